"""Experiment harness: common-random-number runs and parameter sweeps.

Every agent in an experiment faces the same sequence of freshly shuffled
board states and the same sequence of execution-noise draws (common random
numbers), so estimator and agent comparisons are paired. Each estimator
consumes the identical observation sequence for a given agent and produces
an estimate, scored by Jeffreys divergence against the agent's true
(possibly time-varying) skill, after every observation.
"""

from __future__ import annotations

import csv
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .agents import (
    Abrupt,
    AgentSpec,
    DecisionModel,
    Gradual,
    Observation,
    current_skill,
    draw_change_step,
    draw_dynamic_endpoints,
    step,
)
from .darts import BoardGeometry, STANDARD_BOARD, board_action_grid, generate_state, rasterize_reward
from .errors import InvalidParameterError
from .jeeds import JeedsConfig, JeedsEstimator
from .mcse import FilterConfig, SkillFilter
from .noise import DEFAULT_RANGES, ExecutionSkillParams, SkillRanges
from .rng import (
    STREAM_AGENT_NOISE,
    STREAM_AGENT_TARGETS,
    STREAM_STATES,
    derive_seed,
    substream,
)
from .value_field import compute_value_field

AGENT_CHOICES = (
    "rational",
    "flip",
    "softmax",
    "deceptive",
    "abrupt-rational",
    "gradual-rational",
    "abrupt-softmax",
    "gradual-softmax",
)


@dataclass(frozen=True)
class EstimatorSpec:
    """An estimator entry in an experiment: method plus its configuration."""

    estimator_id: str
    method: str  # "mcse" or "jeeds"
    filter_config: FilterConfig | None = None
    jeeds_config: JeedsConfig | None = None

    def __post_init__(self) -> None:
        if self.method not in ("mcse", "jeeds"):
            raise InvalidParameterError(f"unknown estimator method {self.method!r}")

    def build(self, seed: int):
        if self.method == "mcse":
            cfg = self.filter_config or FilterConfig()
            return SkillFilter(replace(cfg, seed=derive_seed(seed, "estimator", self.estimator_id)))
        return JeedsEstimator(self.jeeds_config or JeedsConfig())


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    agents: tuple[tuple[str, AgentSpec], ...]
    estimators: tuple[EstimatorSpec, ...]
    n_observations: int = 100
    resolution: float = 5.0
    geometry: BoardGeometry = STANDARD_BOARD

    def __post_init__(self) -> None:
        if self.n_observations < 1:
            raise InvalidParameterError("n_observations must be >= 1")
        if not self.agents or not self.estimators:
            raise InvalidParameterError("experiment needs at least one agent and one estimator")


@dataclass(frozen=True)
class RunRecord:
    """One (observation, agent, estimator) row of an experiment."""

    obs_index: int
    agent_id: str
    estimator_id: str
    jd: float
    est_sigma_x: float
    est_sigma_y: float
    est_rho: float
    est_lambda: float
    true_sigma_x: float
    true_sigma_y: float
    true_rho: float
    neff: float
    resampled: bool


RECORD_COLUMNS = (
    "obs_index",
    "agent_id",
    "estimator_id",
    "jd",
    "est_sigma_x",
    "est_sigma_y",
    "est_rho",
    "est_lambda",
    "true_sigma_x",
    "true_sigma_y",
    "true_rho",
    "neff",
    "resampled_flag",
)


def classify_symmetry(skill: ExecutionSkillParams) -> str:
    """'symmetric' iff |sigma_x - sigma_y| < 50 and |rho| < 0.2 (strict)."""
    if abs(skill.sigma_x - skill.sigma_y) < 50.0 and abs(skill.rho) < 0.2:
        return "symmetric"
    return "asymmetric"


def draw_skill(rng: np.random.Generator, ranges: SkillRanges = DEFAULT_RANGES) -> ExecutionSkillParams:
    """Uniform skill draw over the configured ranges."""
    return ExecutionSkillParams(
        sigma_x=rng.uniform(*ranges.sigma_range),
        sigma_y=rng.uniform(*ranges.sigma_range),
        rho=rng.uniform(*ranges.rho_range),
    )


def draw_skill_classified(
    rng: np.random.Generator,
    symmetry: str,
    ranges: SkillRanges = DEFAULT_RANGES,
    max_tries: int = 10_000,
) -> ExecutionSkillParams:
    """Rejection-sample a skill with the requested symmetry class."""
    for _ in range(max_tries):
        skill = draw_skill(rng, ranges)
        if classify_symmetry(skill) == symmetry:
            return skill
    raise InvalidParameterError(f"could not draw a {symmetry} skill")


def draw_agent_lambda(kind: str, rng: np.random.Generator, ranges: SkillRanges = DEFAULT_RANGES):
    """Random rationality parameter from the agent kind's range."""
    if kind == "rational":
        return None
    if kind == "softmax":
        return float(rng.uniform(*ranges.lambda_range))
    return float(rng.uniform(0.0, 1.0))


def build_agent_spec(
    agent: str,
    rng: np.random.Generator,
    n_observations: int,
    skill: ExecutionSkillParams | None = None,
    final_skill: ExecutionSkillParams | None = None,
    lam: float | None = None,
    change_step: int | None = None,
) -> AgentSpec:
    """Construct an AgentSpec from a CLI-style agent name.

    Unspecified pieces are drawn from ``rng``: stationary skills uniformly
    over the default ranges, dynamic endpoints from the representative
    accurate/inaccurate ranges, lambda from the kind's range.
    """
    if agent not in AGENT_CHOICES:
        raise InvalidParameterError(f"unknown agent {agent!r}")
    dynamic = "-" in agent
    kind = agent.split("-")[-1] if dynamic else agent
    if lam is None:
        lam = draw_agent_lambda(kind, rng)
    decision = DecisionModel(kind=kind, lam=lam)
    if not dynamic:
        return AgentSpec(decision=decision, skill=skill or draw_skill(rng))
    if skill is None or final_skill is None:
        initial, final = draw_dynamic_endpoints(rng)
        skill = skill or initial
        final_skill = final_skill or final
    if agent.startswith("abrupt"):
        if change_step is None:
            change_step = draw_change_step(rng, n_observations)
        return AgentSpec(decision=decision, skill=skill, dynamics=Abrupt(final_skill, change_step))
    return AgentSpec(decision=decision, skill=skill, dynamics=Gradual(final_skill))


def simulate_observations(
    spec: AgentSpec,
    seed: int,
    n_observations: int,
    agent_id: str = "agent",
    resolution: float = 5.0,
    geometry: BoardGeometry = STANDARD_BOARD,
):
    """Generate (states, observations, per-step true skill) for one agent.

    The state stream and the noise stream depend only on ``seed``, so all
    agents simulated with the same seed share them (common random numbers);
    target-selection randomness is per-agent.
    """
    grid = board_action_grid(geometry, resolution)
    state_rng = substream(seed, STREAM_STATES)
    noise_rng = substream(seed, STREAM_AGENT_NOISE)
    target_rng = substream(seed, STREAM_AGENT_TARGETS, agent_id)
    states, observations, truths = [], [], []
    for i in range(n_observations):
        state = generate_state(state_rng, state_id=i, geometry=geometry)
        reward = rasterize_reward(state, grid)
        skill = current_skill(spec, i, n_observations)
        # Every observation gets a fresh shuffled state, so the agent's
        # value field is state-specific and computed per step.
        field = compute_value_field(reward, skill)
        obs = step(spec, field, i, n_observations, target_rng, noise_rng)
        states.append(state)
        observations.append(obs)
        truths.append(skill)
    return states, observations, truths


def score_estimator(
    est_spec: EstimatorSpec,
    states,
    observations: list[Observation],
    truths: list[ExecutionSkillParams],
    seed: int,
    agent_id: str,
    resolution: float = 5.0,
    geometry: BoardGeometry = STANDARD_BOARD,
) -> list[RunRecord]:
    """Run one estimator over a fixed observation sequence and score it."""
    grid = board_action_grid(geometry, resolution)
    estimator = est_spec.build(seed)
    records = []
    for i, (state, obs, truth) in enumerate(zip(states, observations, truths)):
        reward = rasterize_reward(state, grid)
        est = estimator.update(obs, reward, truth=truth)
        row = estimator.trace[-1]
        records.append(
            RunRecord(
                obs_index=i,
                agent_id=agent_id,
                estimator_id=est_spec.estimator_id,
                jd=row.jd,
                est_sigma_x=row.est_sigma_x,
                est_sigma_y=row.est_sigma_y,
                est_rho=row.est_rho,
                est_lambda=row.est_lambda,
                true_sigma_x=truth.sigma_x,
                true_sigma_y=truth.sigma_y,
                true_rho=truth.rho,
                neff=row.neff,
                resampled=row.resampled,
            )
        )
    return records


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Run every estimator on every agent under common random numbers."""
    records = []
    for agent_id, spec in config.agents:
        states, observations, truths = simulate_observations(
            spec,
            config.seed,
            config.n_observations,
            agent_id=agent_id,
            resolution=config.resolution,
            geometry=config.geometry,
        )
        for est_spec in config.estimators:
            records.extend(
                score_estimator(
                    est_spec,
                    states,
                    observations,
                    truths,
                    config.seed,
                    agent_id,
                    resolution=config.resolution,
                    geometry=config.geometry,
                )
            )
    return records


def write_records_csv(path: str | Path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.obs_index,
                    r.agent_id,
                    r.estimator_id,
                    repr(r.jd),
                    repr(r.est_sigma_x),
                    repr(r.est_sigma_y),
                    repr(r.est_rho),
                    repr(r.est_lambda),
                    repr(r.true_sigma_x),
                    repr(r.true_sigma_y),
                    repr(r.true_rho),
                    repr(r.neff),
                    int(r.resampled),
                ]
            )


def mean_jd_curves(records: list[RunRecord]) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Mean JD per observation index for each estimator.

    Averages run across agents/seeds only, never across observation index.
    """
    out: dict[str, tuple[np.ndarray, np.ndarray]] = {}
    by_est: dict[str, dict[int, list[float]]] = {}
    for r in records:
        by_est.setdefault(r.estimator_id, {}).setdefault(r.obs_index, []).append(r.jd)
    for est_id, per_idx in by_est.items():
        idx = np.array(sorted(per_idx))
        means = np.array([np.mean(per_idx[i]) for i in idx])
        out[est_id] = (idx, means)
    return out


# ---------------------------------------------------------------------------
# Parameter sweep
# ---------------------------------------------------------------------------

def default_sweep_roster() -> tuple[tuple[str, ExecutionSkillParams], ...]:
    """Nine stationary rational-agent skill levels: three (sx, sy) pairs
    crossed with rho in {-0.75, 0, 0.75}."""
    pairs = [(10.0, 10.0), (10.0, 100.0), (100.0, 100.0)]
    rhos = [-0.75, 0.0, 0.75]
    roster = []
    for (sx, sy), rho in itertools.product(pairs, rhos):
        roster.append((f"rational-{sx:g}-{sy:g}-{rho:g}", ExecutionSkillParams(sx, sy, rho)))
    return tuple(roster)


@dataclass(frozen=True)
class SweepSpec:
    w_pct_values: tuple[float, ...] = (0.002, 0.005, 0.020)
    r_values: tuple[float, ...] = (0.75, 0.90, 0.95)
    strategies: tuple[str, ...] = ("neff_threshold", "always")
    m_values: tuple[int, ...] = (1000,)
    n_seeds: int = 10
    n_observations: int = 100
    seed: int = 0
    neff_threshold: float = 0.5
    resolution: float = 5.0
    workers: int = 1
    base_filter: FilterConfig = field(default_factory=FilterConfig)

    def cells(self) -> list[dict]:
        combos = itertools.product(
            self.w_pct_values, self.r_values, self.strategies, self.m_values
        )
        return [
            {"w_pct": w, "r": r, "strategy": s, "m": m} for w, r, s, m in combos
        ]


def _sweep_run(args) -> tuple[int, float]:
    """One (cell, run) task; returns (cell_index, final JD)."""
    cell_index, cell, spec, agent_id, skill, run_seed = args
    fc = replace(
        spec.base_filter,
        n_particles=cell["m"],
        resample_fraction=cell["r"],
        perturb_fraction=cell["w_pct"],
        resample_strategy=cell["strategy"],
        neff_threshold=spec.neff_threshold,
    )
    agent = AgentSpec(decision=DecisionModel("rational"), skill=skill)
    config = ExperimentConfig(
        seed=run_seed,
        agents=((agent_id, agent),),
        estimators=(EstimatorSpec("mcse", "mcse", filter_config=fc),),
        n_observations=spec.n_observations,
        resolution=spec.resolution,
    )
    records = run_experiment(config)
    return cell_index, records[-1].jd


def parameter_sweep(spec: SweepSpec) -> list[dict]:
    """Average final JD per configuration, ranked smallest first.

    Each cell is evaluated on ``n_seeds`` runs cycling through the
    nine-agent roster; run seeds are shared across cells (common random
    numbers across configurations).
    """
    cells = spec.cells()
    if not cells:
        raise InvalidParameterError("sweep grid is empty")
    roster = default_sweep_roster()
    tasks = []
    for ci, cell in enumerate(cells):
        for k in range(spec.n_seeds):
            agent_id, skill = roster[k % len(roster)]
            run_seed = derive_seed(spec.seed, "sweep-run", k)
            tasks.append((ci, cell, spec, agent_id, skill, run_seed))
    finals: dict[int, list[float]] = {ci: [] for ci in range(len(cells))}
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for ci, jd in pool.map(_sweep_run, tasks, chunksize=1):
                finals[ci].append(jd)
    else:
        for task in tasks:
            ci, jd = _sweep_run(task)
            finals[ci].append(jd)
    table = []
    for ci, cell in enumerate(cells):
        table.append(
            {
                "w_pct": cell["w_pct"],
                "r": cell["r"],
                "strategy": cell["strategy"],
                "m": cell["m"],
                "mean_final_jd": float(np.mean(finals[ci])),
                "n_runs": len(finals[ci]),
            }
        )
    table.sort(key=lambda row: row["mean_final_jd"])
    return table


SWEEP_COLUMNS = ("w_pct", "r", "strategy", "m", "mean_final_jd", "n_runs")


def write_sweep_csv(path: str | Path, table: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_COLUMNS)
        for row in table:
            writer.writerow(
                [
                    repr(row["w_pct"]),
                    repr(row["r"]),
                    row["strategy"],
                    row["m"],
                    repr(row["mean_final_jd"]),
                    row["n_runs"],
                ]
            )
