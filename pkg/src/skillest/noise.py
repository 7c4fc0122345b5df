"""Bivariate zero-mean Gaussian execution-noise model.

Execution skill is parameterized by (sigma_x, sigma_y, rho): the agent's
executed action is its target plus a draw from N(0, Sigma) with

    Sigma = [[sx^2,       sx*sy*rho],
             [sx*sy*rho,  sy^2     ]].

The density function is kept pluggable at call sites (everything consumes
plain callables / arrays), but only this Gaussian family is provided.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .darts import ActionGrid
from .errors import InvalidParameterError

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class ExecutionSkillParams:
    """Noise-covariance parameters (sigmas in the domain's length unit)."""

    sigma_x: float
    sigma_y: float
    rho: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma_x > 0 and self.sigma_y > 0):
            raise InvalidParameterError(
                f"sigmas must be positive, got ({self.sigma_x}, {self.sigma_y})"
            )
        if not abs(self.rho) < 1:
            raise InvalidParameterError(f"|rho| must be < 1, got {self.rho}")

    def covariance(self) -> np.ndarray:
        off = self.sigma_x * self.sigma_y * self.rho
        return np.array([[self.sigma_x**2, off], [off, self.sigma_y**2]])

    @cached_property
    def _cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.covariance())

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sigma_x, self.sigma_y, self.rho)


@dataclass(frozen=True)
class SkillRanges:
    """Uniform prior ranges for the four estimated skill parameters."""

    sigma_range: tuple[float, float] = (3.0, 150.5)
    rho_range: tuple[float, float] = (-0.75, 0.75)
    lambda_range: tuple[float, float] = (0.001, 32.0)

    def __post_init__(self) -> None:
        for lo, hi in (self.sigma_range, self.rho_range, self.lambda_range):
            if not lo < hi:
                raise InvalidParameterError(f"range must satisfy lo < hi, got [{lo}, {hi}]")
        if self.sigma_range[0] <= 0:
            raise InvalidParameterError("sigma range must be positive")

    @property
    def lows(self) -> np.ndarray:
        """Lower bounds in (sigma_x, sigma_y, rho, lambda) order."""
        return np.array(
            [self.sigma_range[0], self.sigma_range[0], self.rho_range[0], self.lambda_range[0]]
        )

    @property
    def highs(self) -> np.ndarray:
        return np.array(
            [self.sigma_range[1], self.sigma_range[1], self.rho_range[1], self.lambda_range[1]]
        )

    @property
    def widths(self) -> np.ndarray:
        return self.highs - self.lows


DEFAULT_RANGES = SkillRanges()


def covariance(params: ExecutionSkillParams) -> np.ndarray:
    """Covariance matrix (symmetric positive definite) for valid params."""
    return params.covariance()


def _inverse_coeffs(sigma_x, sigma_y, rho):
    """Entries (ixx, iyy, ixy) of the precision matrix, vectorized."""
    om = 1.0 - rho * rho
    ixx = 1.0 / (sigma_x * sigma_x * om)
    iyy = 1.0 / (sigma_y * sigma_y * om)
    ixy = -rho / (sigma_x * sigma_y * om)
    return ixx, iyy, ixy


def log_pdf(params: ExecutionSkillParams, offset) -> np.ndarray | float:
    """Log density of the zero-mean noise at the given offset(s).

    ``offset`` is a length-2 vector or an (..., 2) array.
    """
    off = np.asarray(offset, dtype=float)
    ixx, iyy, ixy = _inverse_coeffs(params.sigma_x, params.sigma_y, params.rho)
    dx = off[..., 0]
    dy = off[..., 1]
    q = ixx * dx * dx + 2.0 * ixy * dx * dy + iyy * dy * dy
    log_det = 2.0 * (np.log(params.sigma_x) + np.log(params.sigma_y)) + np.log(1 - params.rho**2)
    out = -0.5 * q - LOG_2PI - 0.5 * log_det
    return out if out.ndim else float(out)


def pdf(params: ExecutionSkillParams, offset) -> np.ndarray | float:
    """Density of the zero-mean noise at the given offset(s)."""
    return np.exp(log_pdf(params, offset))


def sample(params: ExecutionSkillParams, rng: np.random.Generator, size: int | None = None):
    """Draw perturbation(s) from N(0, Sigma) via the Cholesky factor.

    Consumes exactly two standard normals per draw, keeping parallel
    streams aligned across agents regardless of their skill parameters.
    """
    z = rng.standard_normal(2 if size is None else (size, 2))
    return z @ params._cholesky.T


def discretized_kernel(
    params: ExecutionSkillParams,
    grid: ActionGrid,
    truncate_sigmas: float = 5.0,
    refine_factor: int = 5,
) -> np.ndarray:
    """Noise density discretized onto the grid, normalized to sum to 1.

    Support is truncated to the box |x| <= truncate_sigmas * sigma_x,
    |y| <= truncate_sigmas * sigma_y (intersected with the grid) before
    renormalization. When the grid is coarser than the narrowest sigma the
    density is averaged over a ``refine_factor``-times-finer subgrid per
    cell to avoid aliasing a near-delta kernel.
    """
    if grid.resolution > min(params.sigma_x, params.sigma_y):
        warnings.warn(
            f"grid resolution {grid.resolution} exceeds min sigma "
            f"{min(params.sigma_x, params.sigma_y)}; using {refine_factor}x subgrid",
            stacklevel=2,
        )
        k = _refined_density(
            np.array([params.sigma_x]), np.array([params.sigma_y]), np.array([params.rho]),
            grid, refine_factor,
        )[0]
    else:
        X, Y = grid.mesh
        ixx, iyy, ixy = _inverse_coeffs(params.sigma_x, params.sigma_y, params.rho)
        k = np.exp(-0.5 * (ixx * X * X + 2.0 * ixy * X * Y + iyy * Y * Y))
    k = k * _truncation_mask(
        np.array([params.sigma_x]), np.array([params.sigma_y]), grid, truncate_sigmas
    )[0]
    total = k.sum()
    if total <= 0:
        raise InvalidParameterError("kernel mass vanished; sigma too small for this grid")
    return k / total


def _truncation_mask(sigma_x, sigma_y, grid: ActionGrid, truncate_sigmas: float):
    """Boolean (batch, n, n) support mask; always keeps the center cell."""
    X, Y = grid.mesh
    hx = np.maximum(truncate_sigmas * sigma_x, grid.resolution)[:, None, None]
    hy = np.maximum(truncate_sigmas * sigma_y, grid.resolution)[:, None, None]
    return (np.abs(X)[None] <= hx) & (np.abs(Y)[None] <= hy)


def _refined_density(sigma_x, sigma_y, rho, grid: ActionGrid, refine_factor: int):
    """Cell-averaged density on a finer subgrid, batched over parameters."""
    n = grid.n_per_side
    f = refine_factor
    sub = (np.arange(f) - (f - 1) / 2.0) * (grid.resolution / f)
    ax = (grid.axis[:, None] + sub[None, :]).ravel()  # (n*f,)
    Xs, Ys = np.meshgrid(ax, ax, indexing="ij")
    ixx, iyy, ixy = _inverse_coeffs(
        sigma_x[:, None, None], sigma_y[:, None, None], rho[:, None, None]
    )
    dens = np.exp(-0.5 * (ixx * Xs * Xs + 2.0 * ixy * Xs * Ys + iyy * Ys * Ys))
    return dens.reshape(-1, n, f, n, f).mean(axis=(2, 4))


def kernel_batch(
    sigma_x: np.ndarray,
    sigma_y: np.ndarray,
    rho: np.ndarray,
    grid: ActionGrid,
    truncate_sigmas: float = 5.0,
    refine_factor: int = 5,
    dtype=np.float64,
) -> np.ndarray:
    """Vectorized ``discretized_kernel`` for a batch of parameter triples.

    Matches the scalar routine cell-for-cell (up to dtype rounding); used
    by the estimators, which evaluate hundreds of kernels per observation.
    """
    sigma_x = np.asarray(sigma_x, dtype=dtype)
    sigma_y = np.asarray(sigma_y, dtype=dtype)
    rho = np.asarray(rho, dtype=dtype)
    X, Y = grid.mesh
    X = X.astype(dtype)
    Y = Y.astype(dtype)
    XX, XY, YY = X * X, X * Y, Y * Y
    ixx, iyy, ixy = _inverse_coeffs(
        sigma_x[:, None, None], sigma_y[:, None, None], rho[:, None, None]
    )
    k = np.exp(-0.5 * (ixx * XX + 2.0 * ixy * XY + iyy * YY))
    needs_refine = grid.resolution > np.minimum(sigma_x, sigma_y)
    if np.any(needs_refine):
        idx = np.nonzero(needs_refine)[0]
        k[idx] = _refined_density(
            sigma_x[idx], sigma_y[idx], rho[idx], grid, refine_factor
        ).astype(dtype)
    k *= _truncation_mask(sigma_x, sigma_y, grid, truncate_sigmas)
    k /= k.sum(axis=(1, 2), keepdims=True)
    return k
