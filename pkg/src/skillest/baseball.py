"""MLB pitch-location application.

Treats each pitch as one observation of a pitcher "agent": the executed
action is the pitch's plate crossing (plate_x, plate_z in feet), the state
is a fixed binary strike-zone reward grid, and the estimators run over the
pitch sequence exactly as in the simulated domain. Reported summaries are
the generalized variance (covariance determinant, ft^4) and the Monte
Carlo probability of a zone-centered aim landing in the zone.

The reward model is deliberately simple (1 inside the zone, 0 outside) and
pluggable; richer per-pitch reward surfaces can be dropped in through the
``reward`` argument of estimate_pitcher.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .agents import Observation
from .darts import ActionGrid, RewardGrid
from .errors import DataError, DegenerateFilterError, InvalidParameterError
from .jeeds import JeedsConfig, JeedsEstimator
from .mcse import FilterConfig, SkillFilter
from .metrics import strike_zone_probability
from .noise import SkillRanges
from .rng import derive_seed, substream

logger = logging.getLogger(__name__)

DEFAULT_COLUMNS = {
    "pitcher": "pitcher",
    "pitch_type": "pitch_type",
    "plate_x": "plate_x",
    "plate_z": "plate_z",
}

# Prior ranges in feet for pitch-location noise.
BASEBALL_RANGES = SkillRanges(
    sigma_range=(0.05, 2.0), rho_range=(-0.75, 0.75), lambda_range=(0.001, 32.0)
)


@dataclass(frozen=True)
class StrikeZone:
    """Axis-aligned strike zone in plate coordinates (feet)."""

    x_half_width: float = 0.83
    z_low: float = 1.5
    z_high: float = 3.5

    def __post_init__(self) -> None:
        if self.x_half_width <= 0 or self.z_low >= self.z_high:
            raise InvalidParameterError("invalid strike zone dimensions")

    @property
    def center(self) -> tuple[float, float]:
        return (0.0, 0.5 * (self.z_low + self.z_high))

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (-self.x_half_width, self.x_half_width, self.z_low, self.z_high)

    def centered_bounds(self) -> tuple[float, float, float, float]:
        """Bounds relative to the zone center."""
        half_z = 0.5 * (self.z_high - self.z_low)
        return (-self.x_half_width, self.x_half_width, -half_z, half_z)


@dataclass(frozen=True)
class PitchRecord:
    pitcher_id: str
    pitch_type: str
    plate_x: float
    plate_z: float


def ingest_pitches(
    path,
    pitcher: str | None = None,
    pitch_type: str | None = "FF",
    min_count: int = 100,
    columns: dict | None = None,
) -> list[PitchRecord]:
    """Load, filter, and validate pitch rows from a delimited file.

    Rows with missing or non-numeric coordinates are dropped (and logged).
    Raises DataError when required columns are absent or fewer than
    ``min_count`` valid rows survive the filters.
    """
    cols = dict(DEFAULT_COLUMNS)
    if columns:
        cols.update(columns)
    df = pd.read_csv(path)
    missing = [c for c in cols.values() if c not in df.columns]
    if missing:
        raise DataError(f"missing columns in {path}: {missing}")
    if pitcher is not None:
        df = df[df[cols["pitcher"]].astype(str) == str(pitcher)]
    if pitch_type is not None:
        df = df[df[cols["pitch_type"]].astype(str) == str(pitch_type)]
    x = pd.to_numeric(df[cols["plate_x"]], errors="coerce")
    z = pd.to_numeric(df[cols["plate_z"]], errors="coerce")
    valid = x.notna() & z.notna() & np.isfinite(x.fillna(np.inf)) & np.isfinite(z.fillna(np.inf))
    n_dropped = int((~valid).sum())
    if n_dropped:
        logger.warning("dropped %d rows with invalid coordinates", n_dropped)
    df = df[valid]
    records = [
        PitchRecord(
            pitcher_id=str(p), pitch_type=str(t), plate_x=float(px), plate_z=float(pz)
        )
        for p, t, px, pz in zip(
            df[cols["pitcher"]], df[cols["pitch_type"]], x[valid], z[valid]
        )
    ]
    if len(records) < min_count:
        raise DataError(
            f"insufficient data: {len(records)} valid pitches, need at least {min_count}"
        )
    return records


def list_pitchers(path, pitch_type: str | None = "FF", columns: dict | None = None) -> dict[str, int]:
    """Pitch counts per pitcher after the pitch-type filter."""
    cols = dict(DEFAULT_COLUMNS)
    if columns:
        cols.update(columns)
    df = pd.read_csv(path)
    missing = [c for c in cols.values() if c not in df.columns]
    if missing:
        raise DataError(f"missing columns in {path}: {missing}")
    if pitch_type is not None:
        df = df[df[cols["pitch_type"]].astype(str) == str(pitch_type)]
    counts = df[cols["pitcher"]].astype(str).value_counts()
    return {str(k): int(v) for k, v in counts.items()}


def build_pitch_reward(
    zone: StrikeZone = StrikeZone(),
    resolution: float = 0.05,
    margin: float = 3.0,
) -> RewardGrid:
    """Binary zone-indicator reward on a grid centered on the zone center.

    The grid covers the zone plus ``margin`` feet on every side (the
    default corresponds to four times a 0.75 ft execution sigma, the
    largest spread plausible for a professional pitcher).
    """
    xb = zone.centered_bounds()
    half = max(zone.x_half_width, 0.5 * (zone.z_high - zone.z_low)) + margin
    grid = ActionGrid(resolution=resolution, half_extent=half)
    x, z = grid.mesh
    inside = (x >= xb[0]) & (x <= xb[1]) & (z >= xb[2]) & (z <= xb[3])
    return RewardGrid(grid=grid, values=inside.astype(float), state_id=0)


@dataclass(frozen=True)
class Ellipse:
    """Confidence ellipse: center, semi-axes (major >= minor), orientation."""

    center: tuple[float, float]
    semi_major: float
    semi_minor: float
    angle_rad: float

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the ellipse (geometric test)."""
        pts = np.asarray(points, dtype=float) - np.asarray(self.center)
        c, s = np.cos(self.angle_rad), np.sin(self.angle_rad)
        u = pts[..., 0] * c + pts[..., 1] * s
        v = -pts[..., 0] * s + pts[..., 1] * c
        return (u / self.semi_major) ** 2 + (v / self.semi_minor) ** 2 <= 1.0


def confidence_ellipse(cov: np.ndarray, mass: float = 0.5, center=(0.0, 0.0)) -> Ellipse:
    """Ellipse containing the given probability mass of N(center, cov).

    Semi-axes are sqrt(q * eigenvalue) with q the chi-square(2) quantile
    of ``mass`` (q = 2 ln 2 for the 50% ellipse).
    """
    if not 0.0 < mass < 1.0:
        raise InvalidParameterError("mass must lie in (0, 1)")
    cov = np.asarray(cov, dtype=float)
    evals, evecs = np.linalg.eigh(cov)
    if evals.min() <= 0:
        raise InvalidParameterError("covariance must be positive definite")
    q = -2.0 * np.log(1.0 - mass)
    order = np.argsort(evals)[::-1]  # major first
    evals = evals[order]
    evecs = evecs[:, order]
    return Ellipse(
        center=(float(center[0]), float(center[1])),
        semi_major=float(np.sqrt(q * evals[0])),
        semi_minor=float(np.sqrt(q * evals[1])),
        angle_rad=float(np.arctan2(evecs[1, 0], evecs[0, 0])),
    )


@dataclass(frozen=True)
class PitcherReport:
    pitcher_id: str
    n_pitches: int
    estimator: str
    sigma_x: float
    sigma_y: float
    rho: float
    lam: float
    gv: float
    gv_units: str
    strike_zone_prob: float
    strike_zone_stderr: float
    mean_location: tuple[float, float]

    def covariance(self) -> np.ndarray:
        off = self.sigma_x * self.sigma_y * self.rho
        return np.array([[self.sigma_x**2, off], [off, self.sigma_y**2]])

    def to_json_dict(self) -> dict:
        return {
            "pitcher": self.pitcher_id,
            "n_pitches": self.n_pitches,
            "estimator": self.estimator,
            "sigma_x": self.sigma_x,
            "sigma_y": self.sigma_y,
            "rho": self.rho,
            "lambda": self.lam,
            "gv": self.gv,
            "gv_units": self.gv_units,
            "strike_zone_prob": self.strike_zone_prob,
            "strike_zone_stderr": self.strike_zone_stderr,
            "mean_location": list(self.mean_location),
        }


def default_pitch_filter_config(seed: int = 0) -> FilterConfig:
    """Particle filter defaults scaled to plate coordinates (feet)."""
    return FilterConfig(n_particles=500, ranges=BASEBALL_RANGES, seed=seed)


def default_pitch_jeeds_config() -> JeedsConfig:
    return JeedsConfig(ranges=BASEBALL_RANGES)


def estimate_pitcher(
    records: list[PitchRecord],
    estimator: str = "mcse",
    zone: StrikeZone = StrikeZone(),
    reward: RewardGrid | None = None,
    filter_config: FilterConfig | None = None,
    jeeds_config: JeedsConfig | None = None,
    n_samples: int = 1_000_000,
    seed: int = 0,
    min_count: int = 1,
) -> PitcherReport:
    """Run one estimator over a pitcher's pitch sequence.

    Pitches are converted to zone-centered coordinates; the strike-zone
    probability is computed for an aim at the exact middle of the zone.
    """
    if len(records) < min_count:
        raise DataError(f"need at least {min_count} pitches, got {len(records)}")
    pitcher_id = records[0].pitcher_id
    reward = reward if reward is not None else build_pitch_reward(zone)
    cx, cz = zone.center
    if estimator == "mcse":
        runner = SkillFilter(
            filter_config
            or replace(default_pitch_filter_config(), seed=derive_seed(seed, "pitcher", pitcher_id))
        )
    elif estimator == "jeeds":
        runner = JeedsEstimator(jeeds_config or default_pitch_jeeds_config())
    else:
        raise InvalidParameterError(f"unknown estimator {estimator!r}")
    est = None
    for rec in records:
        obs = Observation(state_id=0, executed_action=(rec.plate_x - cx, rec.plate_z - cz))
        try:
            est = runner.update(obs, reward)
        except DegenerateFilterError as exc:
            raise DegenerateFilterError(f"pitcher {pitcher_id}: {exc}") from exc
    cov = est.covariance()
    prob, stderr = strike_zone_probability(
        cov,
        aim_point=(0.0, 0.0),
        zone_bounds=zone.centered_bounds(),
        n_samples=n_samples,
        rng=substream(seed, "strike-zone-mc", pitcher_id),
    )
    mean_loc = (
        float(np.mean([r.plate_x for r in records])),
        float(np.mean([r.plate_z for r in records])),
    )
    return PitcherReport(
        pitcher_id=pitcher_id,
        n_pitches=len(records),
        estimator=estimator,
        sigma_x=float(est.sigma_x),
        sigma_y=float(est.sigma_y),
        rho=float(est.rho),
        lam=float(est.lam),
        gv=float(np.linalg.det(cov)),
        gv_units="ft^4",
        strike_zone_prob=prob,
        strike_zone_stderr=stderr,
        mean_location=mean_loc,
    )


def make_synthetic_pitches(
    pitcher_id: str,
    cov: np.ndarray,
    n: int,
    rng: np.random.Generator,
    zone: StrikeZone = StrikeZone(),
    pitch_type: str = "FF",
) -> list[PitchRecord]:
    """Pitches from a known Gaussian aimed at the zone center (ground truth
    generator for validation)."""
    chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
    pts = np.asarray(zone.center) + rng.standard_normal((n, 2)) @ chol.T
    return [
        PitchRecord(pitcher_id=pitcher_id, pitch_type=pitch_type, plate_x=float(x), plate_z=float(z))
        for x, z in pts
    ]
