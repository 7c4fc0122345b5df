"""Divergence metrics and spread/containment summaries.

Estimate quality is measured with the Jeffreys divergence (symmetrized KL)
between the estimated and true execution-noise Gaussians, which has a
closed form for bivariate normals. The generalized variance (covariance
determinant) and Monte Carlo strike-zone probabilities summarize pitcher
accuracy in the baseball application.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .noise import ExecutionSkillParams


@dataclass(frozen=True)
class Gaussian2D:
    """A bivariate normal given by its mean and covariance."""

    mean: tuple[float, float]
    cov: np.ndarray

    def __post_init__(self) -> None:
        cov = np.asarray(self.cov, dtype=float)
        object.__setattr__(self, "cov", cov)
        if cov.shape != (2, 2) or not np.allclose(cov, cov.T, rtol=0, atol=1e-9 * abs(cov).max()):
            raise InvalidParameterError("covariance must be a symmetric 2x2 matrix")
        if np.linalg.det(cov) <= 0 or cov[0, 0] <= 0:
            raise InvalidParameterError("covariance must be positive definite")

    @property
    def mean_vec(self) -> np.ndarray:
        return np.asarray(self.mean, dtype=float)


def gaussian_from_params(params: ExecutionSkillParams, mean=(0.0, 0.0)) -> Gaussian2D:
    """Zero-mean (by default) noise distribution for skill parameters."""
    return Gaussian2D(mean=tuple(mean), cov=params.covariance())


def kl_bivariate(p: Gaussian2D, q: Gaussian2D) -> float:
    """KL(P || Q) in nats, closed form for bivariate normals."""
    iq = np.linalg.inv(q.cov)
    d = q.mean_vec - p.mean_vec
    return float(
        0.5
        * (
            np.trace(iq @ p.cov)
            + d @ iq @ d
            - 2.0
            + np.log(np.linalg.det(q.cov) / np.linalg.det(p.cov))
        )
    )


def jeffreys(p: Gaussian2D, q: Gaussian2D) -> float:
    """Symmetrized KL divergence, KL(P||Q) + KL(Q||P), in nats."""
    return kl_bivariate(p, q) + kl_bivariate(q, p)


def jeffreys_covs(cov_p: np.ndarray, cov_q: np.ndarray) -> float:
    """Jeffreys divergence between two zero-mean bivariate normals."""
    zero = (0.0, 0.0)
    return jeffreys(Gaussian2D(zero, cov_p), Gaussian2D(zero, cov_q))


def generalized_variance(cov: np.ndarray) -> float:
    """Determinant of a covariance matrix (units^4)."""
    cov = np.asarray(cov, dtype=float)
    det = float(np.linalg.det(cov))
    if det <= 0:
        raise InvalidParameterError("covariance must be positive definite")
    return det


def strike_zone_probability(
    cov: np.ndarray,
    aim_point,
    zone_bounds: tuple[float, float, float, float],
    n_samples: int = 1_000_000,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Monte Carlo probability that aim_point + N(0, cov) lands in the zone.

    ``zone_bounds`` is (x_min, x_max, z_min, z_max). Returns (probability,
    standard error).
    """
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    aim = np.asarray(aim_point, dtype=float)
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    pts = aim + rng.standard_normal((int(n_samples), 2)) @ chol.T
    x_min, x_max, z_min, z_max = zone_bounds
    inside = (
        (pts[:, 0] >= x_min) & (pts[:, 0] <= x_max) & (pts[:, 1] >= z_min) & (pts[:, 1] <= z_max)
    )
    p = float(inside.mean())
    stderr = float(np.sqrt(max(p * (1.0 - p), 0.0) / n_samples))
    return p, stderr
