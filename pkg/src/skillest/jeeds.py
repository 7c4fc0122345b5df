"""Grid-Bayes baseline estimating a symmetric sigma and lambda jointly.

Beliefs live on a fixed 33 x 33 hypothesis grid: 33 execution-skill levels
(sigma, applied isotropically with rho = 0) crossed with 33 log-spaced
rationality levels. Each observation multiplies every hypothesis's belief
by its softmax-mixture likelihood and renormalizes; the point estimate is
the posterior mean of each marginal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .agents import Observation
from .darts import RewardGrid
from .errors import InvalidParameterError
from .likelihood import log_softmax_mixture
from .noise import DEFAULT_RANGES, ExecutionSkillParams, SkillRanges, kernel_batch
from .traces import TraceRow
from .value_field import _correlate_via_fft


@dataclass(frozen=True)
class JeedsConfig:
    n_sigma: int = 33
    n_lambda: int = 33
    ranges: SkillRanges = DEFAULT_RANGES
    sigma_spacing: str = "linear"  # "linear" or "log"
    precision: str = "float32"
    fft_workers: int = 1

    def __post_init__(self) -> None:
        if self.n_sigma < 2 or self.n_lambda < 2:
            raise InvalidParameterError("hypothesis grid needs at least 2 levels per axis")
        if self.sigma_spacing not in ("linear", "log"):
            raise InvalidParameterError("sigma_spacing must be 'linear' or 'log'")
        if self.precision not in ("float32", "float64"):
            raise InvalidParameterError("precision must be 'float32' or 'float64'")

    @property
    def dtype(self):
        return np.float32 if self.precision == "float32" else np.float64

    def sigma_levels(self) -> np.ndarray:
        lo, hi = self.ranges.sigma_range
        if self.sigma_spacing == "log":
            return np.geomspace(lo, hi, self.n_sigma)
        return np.linspace(lo, hi, self.n_sigma)

    def lambda_levels(self) -> np.ndarray:
        lo, hi = self.ranges.lambda_range
        return np.geomspace(lo, hi, self.n_lambda)


@dataclass
class HypothesisGrid:
    """Joint beliefs over (sigma, lambda) hypotheses; rows index sigma."""

    sigma_levels: np.ndarray
    lambda_levels: np.ndarray
    log_beliefs: np.ndarray

    @property
    def beliefs(self) -> np.ndarray:
        """Normalized linear beliefs (sums to 1)."""
        b = np.exp(self.log_beliefs - logsumexp(self.log_beliefs))
        return b / b.sum()


@dataclass(frozen=True)
class JeedsEstimate:
    sigma: float
    lam: float

    @property
    def sigma_x(self) -> float:
        return self.sigma

    @property
    def sigma_y(self) -> float:
        return self.sigma

    @property
    def rho(self) -> float:
        return 0.0

    @property
    def skill(self) -> ExecutionSkillParams:
        return ExecutionSkillParams(self.sigma, self.sigma, 0.0)

    def covariance(self) -> np.ndarray:
        return np.diag([self.sigma**2, self.sigma**2])


def jeeds_init(config: JeedsConfig = JeedsConfig()) -> HypothesisGrid:
    """Uniform beliefs over all hypotheses."""
    return HypothesisGrid(
        sigma_levels=config.sigma_levels(),
        lambda_levels=config.lambda_levels(),
        log_beliefs=np.zeros((config.n_sigma, config.n_lambda)),
    )


def _hypothesis_log_likelihoods(
    grid: HypothesisGrid,
    observation: Observation,
    reward: RewardGrid,
    kernels: np.ndarray | None = None,
    dtype=np.float64,
    fft_workers: int = 1,
) -> np.ndarray:
    """Log-likelihood of the observation per (sigma, lambda) hypothesis.

    The density term is shared across the lambda axis, so it is
    exponentiated once per sigma; the lambda rows then reduce to one
    matrix-vector product each.
    """
    sig = grid.sigma_levels
    n_sig, n_lam = len(sig), len(grid.lambda_levels)
    if kernels is None:
        kernels = kernel_batch(sig, sig, np.zeros_like(sig), reward.grid, dtype=dtype)
    v = _correlate_via_fft(reward, kernels, dtype=dtype, workers=fft_workers)
    v = v.reshape(n_sig, -1)
    x, y = reward.grid.mesh
    dx = (observation.point[0] - x).astype(dtype).ravel()
    dy = (observation.point[1] - y).astype(dtype).ravel()
    rr = dx * dx + dy * dy
    out = np.empty((n_sig, n_lam))
    lam = grid.lambda_levels.astype(dtype)
    for i, s in enumerate(sig):
        log_f = (-0.5 / dtype(s * s)) * rr
        mf = log_f.max()
        f = np.exp(log_f - mf)
        # max_t lam*V = lam * max_t V since lam > 0.
        e = np.exp(lam[:, None] * (v[i] - v[i].max())[None, :])
        num = e @ f
        den = e.sum(axis=1)
        const = float(mf) - np.log(2.0 * np.pi * s * s)
        ok = num > 0
        with np.errstate(divide="ignore"):
            out[i, ok] = np.log(num[ok].astype(np.float64) / den[ok]) + const
        for j in np.nonzero(~ok)[0]:
            out[i, j] = (
                log_softmax_mixture(
                    v[i].astype(np.float64), float(grid.lambda_levels[j]), log_f.astype(np.float64)
                )
                - np.log(2.0 * np.pi * s * s)
            )
    return out


def jeeds_update(
    grid: HypothesisGrid,
    observation: Observation,
    reward: RewardGrid,
    config: JeedsConfig = JeedsConfig(),
) -> HypothesisGrid:
    """Bayes update of the beliefs for one observation.

    A fully degenerate posterior (all hypotheses at zero) resets to
    uniform rather than failing the run.
    """
    ll = _hypothesis_log_likelihoods(
        grid, observation, reward, dtype=config.dtype, fft_workers=config.fft_workers
    )
    log_post = grid.log_beliefs + ll
    total = logsumexp(log_post)
    if not np.isfinite(total):
        import logging

        logging.getLogger(__name__).warning("degenerate posterior; resetting beliefs to uniform")
        log_post = np.zeros_like(log_post)
        total = logsumexp(log_post)
    return HypothesisGrid(
        sigma_levels=grid.sigma_levels,
        lambda_levels=grid.lambda_levels,
        log_beliefs=log_post - total,
    )


def jeeds_estimate(grid: HypothesisGrid) -> JeedsEstimate:
    """Posterior-mean sigma and lambda."""
    b = grid.beliefs
    sigma = float(b.sum(axis=1) @ grid.sigma_levels)
    lam = float(b.sum(axis=0) @ grid.lambda_levels)
    return JeedsEstimate(sigma=sigma, lam=lam)


class JeedsEstimator:
    """Stateful runner with per-state kernel caching and trace recording.

    The hypothesis sigmas never change, so the discretized kernels (and
    their transforms) are computed once per grid geometry and reused for
    every observation.
    """

    def __init__(self, config: JeedsConfig = JeedsConfig()):
        self.config = config
        self.grid = jeeds_init(config)
        self.obs_index = 0
        self.trace: list[TraceRow] = []
        self._kernel_cache: dict = {}

    def _kernels(self, reward: RewardGrid) -> np.ndarray:
        key = (reward.grid.resolution, reward.grid.half_extent)
        if key not in self._kernel_cache:
            sig = self.grid.sigma_levels
            self._kernel_cache[key] = kernel_batch(
                sig, sig, np.zeros_like(sig), reward.grid, dtype=self.config.dtype
            )
        return self._kernel_cache[key]

    def update(
        self,
        observation: Observation,
        reward: RewardGrid,
        truth: ExecutionSkillParams | None = None,
    ) -> JeedsEstimate:
        ll = _hypothesis_log_likelihoods(
            self.grid,
            observation,
            reward,
            kernels=self._kernels(reward),
            dtype=self.config.dtype,
            fft_workers=self.config.fft_workers,
        )
        log_post = self.grid.log_beliefs + ll
        total = logsumexp(log_post)
        if not np.isfinite(total):
            import logging

            logging.getLogger(__name__).warning(
                "degenerate posterior at observation %d; resetting to uniform", self.obs_index
            )
            log_post = np.zeros_like(log_post)
            total = logsumexp(log_post)
        self.grid = HypothesisGrid(self.grid.sigma_levels, self.grid.lambda_levels, log_post - total)
        est = jeeds_estimate(self.grid)
        jd = None
        if truth is not None:
            from .metrics import jeffreys_covs

            jd = jeffreys_covs(est.covariance(), truth.covariance())
        b = self.grid.beliefs.ravel()
        belief_ess = float(1.0 / np.square(b).sum() / b.size)
        self.trace.append(
            TraceRow(
                obs_index=self.obs_index,
                est_sigma_x=est.sigma,
                est_sigma_y=est.sigma,
                est_rho=0.0,
                est_lambda=est.lam,
                neff=belief_ess,
                resampled=False,
                jd=jd,
            )
        )
        self.obs_index += 1
        return est
