"""Particle-filter estimator of execution and decision-making skill.

Each particle is a joint hypothesis (sigma_x, sigma_y, rho, lambda) with an
accumulated likelihood weight. Per observation the filter:

1. multiplies every particle's weight by the probability of the executed
   action under that particle's skill (softmax-mixture likelihood),
2. optionally resamples: a fraction r of the new set is drawn from the old
   set with replacement in proportion to weight, the remainder is fresh
   uniform random particles, and all weights reset to 1,
3. perturbs every particle parameter with independent zero-mean Gaussian
   noise whose standard deviation is a fraction of the parameter range
   width, then clamps to the range (this is what lets the filter track
   skill that changes over time).

Estimates are weighted parameter means; particles freshly injected at the
latest resample are excluded. Weights are stored and combined in log space
so that long observation sequences cannot underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .agents import Observation
from .darts import RewardGrid
from .errors import DegenerateFilterError, InvalidParameterError
from .likelihood import log_softmax_mixture, log_softmax_mixture_batch
from .noise import (
    DEFAULT_RANGES,
    ExecutionSkillParams,
    SkillRanges,
    _inverse_coeffs,
    log_pdf,
)
from .rng import (
    STREAM_FILTER_INIT,
    STREAM_FILTER_PERTURB,
    STREAM_FILTER_RESAMPLE,
    substream,
)
from .traces import TraceRow
from .value_field import compute_value_field, value_fields_batch

RESAMPLE_ALWAYS = "always"
RESAMPLE_NEFF = "neff_threshold"
NEFF_RAW_SUM = "raw_sum_fraction"
NEFF_NORMALIZED_ESS = "normalized_ess"

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int = 1000
    resample_fraction: float = 0.9
    perturb_fraction: float = 0.005
    resample_strategy: str = RESAMPLE_NEFF
    neff_threshold: float = 0.5
    neff_mode: str = NEFF_RAW_SUM
    ranges: SkillRanges = DEFAULT_RANGES
    seed: int = 0
    # Sample lambda log-uniformly at initialization instead of uniformly.
    lambda_log_uniform: bool = False
    # Perturb after every observation (not only after resamples).
    perturb_every_step: bool = True
    # Internal precision of the batched weight update; the single-particle
    # likelihood API is always float64.
    precision: str = "float32"
    chunk_size: int = 64
    fft_workers: int = 1

    def __post_init__(self) -> None:
        if self.n_particles < 2:
            raise InvalidParameterError("need at least 2 particles")
        if not 0.0 < self.resample_fraction <= 1.0:
            raise InvalidParameterError("resample_fraction must lie in (0, 1]")
        if self.perturb_fraction < 0:
            raise InvalidParameterError("perturb_fraction must be >= 0")
        if self.resample_strategy not in (RESAMPLE_ALWAYS, RESAMPLE_NEFF):
            raise InvalidParameterError(f"unknown resample strategy {self.resample_strategy!r}")
        if self.resample_strategy == RESAMPLE_NEFF and not 0.0 < self.neff_threshold < 1.0:
            raise InvalidParameterError("neff_threshold must lie in (0, 1)")
        if self.neff_mode not in (NEFF_RAW_SUM, NEFF_NORMALIZED_ESS):
            raise InvalidParameterError(f"unknown neff mode {self.neff_mode!r}")
        if self.precision not in ("float32", "float64"):
            raise InvalidParameterError("precision must be 'float32' or 'float64'")

    @property
    def dtype(self):
        return np.float32 if self.precision == "float32" else np.float64


@dataclass(frozen=True)
class Particle:
    """Single-hypothesis view used by the per-particle API."""

    sigma_x: float
    sigma_y: float
    rho: float
    lam: float
    weight: float = 1.0
    fresh: bool = False

    @property
    def skill(self) -> ExecutionSkillParams:
        return ExecutionSkillParams(self.sigma_x, self.sigma_y, self.rho)


@dataclass
class ParticleSet:
    """Columnar particle storage: params (M, 4), log weights, fresh flags."""

    params: np.ndarray
    log_weights: np.ndarray
    fresh: np.ndarray

    @property
    def n(self) -> int:
        return len(self.params)

    def particle(self, i: int) -> Particle:
        sx, sy, rho, lam = self.params[i]
        return Particle(sx, sy, rho, lam, float(np.exp(self.log_weights[i])), bool(self.fresh[i]))

    def copy(self) -> "ParticleSet":
        return ParticleSet(self.params.copy(), self.log_weights.copy(), self.fresh.copy())


@dataclass(frozen=True)
class SkillEstimate:
    """Weighted-mean skill estimate (a convex combination of particles)."""

    sigma_x: float
    sigma_y: float
    rho: float
    lam: float

    @property
    def skill(self) -> ExecutionSkillParams:
        return ExecutionSkillParams(self.sigma_x, self.sigma_y, self.rho)

    def covariance(self) -> np.ndarray:
        return self.skill.covariance()


def _draw_uniform(config: FilterConfig, rng: np.random.Generator, count: int) -> np.ndarray:
    r = config.ranges
    out = np.empty((count, 4))
    out[:, 0] = rng.uniform(*r.sigma_range, count)
    out[:, 1] = rng.uniform(*r.sigma_range, count)
    out[:, 2] = rng.uniform(*r.rho_range, count)
    if config.lambda_log_uniform:
        lo, hi = np.log(r.lambda_range[0]), np.log(r.lambda_range[1])
        out[:, 3] = np.exp(rng.uniform(lo, hi, count))
    else:
        out[:, 3] = rng.uniform(*r.lambda_range, count)
    return out


def init_particles(config: FilterConfig, rng: np.random.Generator) -> ParticleSet:
    """M particles sampled uniformly over the ranges, all weights 1."""
    params = _draw_uniform(config, rng, config.n_particles)
    return ParticleSet(
        params=params,
        log_weights=np.zeros(config.n_particles),
        fresh=np.zeros(config.n_particles, dtype=bool),
    )


def log_likelihood(particle, observation: Observation, reward: RewardGrid) -> float:
    """Exact (float64) log probability of the executed action.

    ``particle`` may be a Particle or an (ExecutionSkillParams, lam) pair.
    """
    if isinstance(particle, Particle):
        skill, lam = particle.skill, particle.lam
    else:
        skill, lam = particle
    field_ = compute_value_field(reward, skill)
    offsets = observation.point - reward.grid.cells
    log_f = log_pdf(skill, offsets)
    return log_softmax_mixture(field_.values.ravel(), lam, log_f)


def likelihood(particle, observation: Observation, reward: RewardGrid) -> float:
    """Softmax-mixture density of the executed action; strictly positive."""
    return float(np.exp(log_likelihood(particle, observation, reward)))


def log_likelihood_batch(
    params: np.ndarray,
    observation: Observation,
    reward: RewardGrid,
    dtype=np.float64,
    chunk_size: int = 256,
    fft_workers: int = 1,
) -> np.ndarray:
    """Log-likelihoods for an (M, 4) parameter array, chunked and batched.

    The normalization constant of each particle's density is applied in
    float64 after the mixture, so reduced-precision internals only affect
    the shape of the mixture term, not its scale.
    """
    params = np.asarray(params)
    m = len(params)
    out = np.empty(m)
    grid = reward.grid
    x, y = grid.mesh
    dx = (observation.point[0] - x).astype(dtype)
    dy = (observation.point[1] - y).astype(dtype)
    dxx, dxy, dyy = dx * dx, dx * dy, dy * dy
    for a in range(0, m, chunk_size):
        b = min(a + chunk_size, m)
        sx = params[a:b, 0]
        sy = params[a:b, 1]
        rho = params[a:b, 2]
        lam = params[a:b, 3].astype(dtype)
        v = value_fields_batch(reward, sx, sy, rho, dtype=dtype, fft_workers=fft_workers)
        ixx, iyy, ixy = _inverse_coeffs(
            sx.astype(dtype)[:, None, None],
            sy.astype(dtype)[:, None, None],
            rho.astype(dtype)[:, None, None],
        )
        log_f = -0.5 * (ixx * dxx + 2.0 * ixy * dxy + iyy * dyy)
        mix = log_softmax_mixture_batch(
            v.reshape(b - a, -1), lam, log_f.reshape(b - a, -1)
        )
        log_norm = -LOG_2PI - 0.5 * np.log((sx * sy) ** 2 * (1.0 - rho**2))
        out[a:b] = mix + log_norm
    return out


def effective_count(particles: ParticleSet, mode: str = NEFF_RAW_SUM) -> float:
    """Degeneracy measure in [0, ~1] compared against the resample threshold.

    raw_sum_fraction: (sum of raw weights) / M, the literal weight-sum rule.
    normalized_ess:   (1 / sum of squared normalized weights) / M.
    """
    lw = particles.log_weights
    if mode == NEFF_RAW_SUM:
        total = logsumexp(lw)
        with np.errstate(over="ignore"):
            return float(np.exp(total - np.log(particles.n)))
    if mode == NEFF_NORMALIZED_ESS:
        norm = lw - logsumexp(lw)
        ess = 1.0 / np.exp(logsumexp(2.0 * norm))
        return float(ess / particles.n)
    raise InvalidParameterError(f"unknown neff mode {mode!r}")


def resample(
    particles: ParticleSet, config: FilterConfig, rng: np.random.Generator
) -> ParticleSet:
    """Weight-proportional multinomial resample plus fresh random particles.

    floor(r * M) survivors are drawn with replacement; the remaining slots
    are filled with new uniform particles flagged fresh. All weights reset
    to 1.
    """
    total = logsumexp(particles.log_weights)
    if not np.isfinite(total):
        raise DegenerateFilterError("all particle weights are zero")
    p = np.exp(particles.log_weights - total)
    p = p / p.sum()  # exact renormalization for rng.choice
    m = particles.n
    n_keep = int(np.floor(config.resample_fraction * m))
    idx = rng.choice(m, size=n_keep, replace=True, p=p)
    new_params = np.concatenate([particles.params[idx], _draw_uniform(config, rng, m - n_keep)])
    fresh = np.zeros(m, dtype=bool)
    fresh[n_keep:] = True
    return ParticleSet(params=new_params, log_weights=np.zeros(m), fresh=fresh)


def perturb(
    particles: ParticleSet, config: FilterConfig, rng: np.random.Generator
) -> ParticleSet:
    """Jitter every parameter of every particle, then clamp to its range."""
    r = config.ranges
    std = config.perturb_fraction * r.widths
    noise = rng.standard_normal((particles.n, 4)) * std
    params = np.clip(particles.params + noise, r.lows, r.highs)
    return ParticleSet(params=params, log_weights=particles.log_weights, fresh=particles.fresh)


def estimate(particles: ParticleSet) -> SkillEstimate:
    """Weighted mean of particle parameters, excluding fresh injections.

    Falls back to all particles when no non-fresh particle carries weight.
    """
    eligible = ~particles.fresh
    for sel in (eligible, np.ones(particles.n, dtype=bool)):
        if not sel.any():
            continue
        lw = particles.log_weights[sel]
        top = lw.max()
        if not np.isfinite(top):
            continue
        w = np.exp(lw - top)
        mean = np.average(particles.params[sel], axis=0, weights=w)
        return SkillEstimate(*(float(v) for v in mean))
    raise DegenerateFilterError("no particle carries positive weight")


class SkillFilter:
    """Stateful wrapper running the full per-observation update cycle.

    The per-step order is: weight update, resample check, perturbation.
    Every step appends one audit entry to ``step_log`` recording the
    actions taken in order, and one TraceRow to ``trace``.
    """

    def __init__(self, config: FilterConfig):
        self.config = config
        self._init_rng = substream(config.seed, STREAM_FILTER_INIT)
        self._resample_rng = substream(config.seed, STREAM_FILTER_RESAMPLE)
        self._perturb_rng = substream(config.seed, STREAM_FILTER_PERTURB)
        self.particles = init_particles(config, self._init_rng)
        self.obs_index = 0
        self.trace: list[TraceRow] = []
        self.step_log: list[tuple] = []

    def update(
        self,
        observation: Observation,
        reward: RewardGrid,
        truth: ExecutionSkillParams | None = None,
    ) -> SkillEstimate:
        """Process one observation and return the post-step estimate."""
        cfg = self.config
        events = ["weight_update"]
        self.particles.fresh[:] = False
        self.particles.log_weights += log_likelihood_batch(
            self.particles.params,
            observation,
            reward,
            dtype=cfg.dtype,
            chunk_size=cfg.chunk_size,
            fft_workers=cfg.fft_workers,
        )

        neff = effective_count(self.particles, cfg.neff_mode)
        resampled = cfg.resample_strategy == RESAMPLE_ALWAYS or (
            cfg.resample_strategy == RESAMPLE_NEFF and neff < cfg.neff_threshold
        )
        if resampled:
            try:
                self.particles = resample(self.particles, cfg, self._resample_rng)
                events.append("resample")
            except DegenerateFilterError:
                # Recovery per contract: reinitialize and log the event.
                self.particles = init_particles(cfg, self._resample_rng)
                events.append("degenerate_reinit")

        if cfg.perturb_every_step or resampled:
            self.particles = perturb(self.particles, cfg, self._perturb_rng)
            events.append("perturb")

        est = estimate(self.particles)
        jd = None
        if truth is not None:
            from .metrics import jeffreys_covs

            jd = jeffreys_covs(est.covariance(), truth.covariance())
        self.trace.append(
            TraceRow(
                obs_index=self.obs_index,
                est_sigma_x=est.sigma_x,
                est_sigma_y=est.sigma_y,
                est_rho=est.rho,
                est_lambda=est.lam,
                neff=neff,
                resampled=resampled,
                jd=jd,
            )
        )
        self.step_log.append((self.obs_index, tuple(events)))
        self.obs_index += 1
        return est
