"""Simulated agents: decision-making models plus execution noise.

Four decision models are provided. Rational agents aim at the value-field
argmax. Flip agents play the optimal target with probability lambda and a
uniform random grid cell otherwise. Softmax agents sample targets with
probability proportional to exp(lambda * V). Deceptive agents restrict to
cells whose value is at least lambda times the maximum and then aim at the
feasible cell farthest from the optimal one.

Skill may be stationary, change abruptly at one observation, or drift
linearly across the run; agents always know their own current noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .noise import ExecutionSkillParams, sample
from .value_field import ValueField, optimal_action

AGENT_KINDS = ("rational", "flip", "softmax", "deceptive")


@dataclass(frozen=True)
class DecisionModel:
    """Decision component: agent kind plus its rationality parameter."""

    kind: str
    lam: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in AGENT_KINDS:
            raise InvalidParameterError(f"unknown agent kind {self.kind!r}")
        if self.kind == "rational":
            if self.lam is not None:
                raise InvalidParameterError("rational agents take no lambda")
            return
        if self.lam is None:
            raise InvalidParameterError(f"{self.kind} agents require lambda")
        if self.kind in ("flip", "deceptive") and not 0.0 <= self.lam <= 1.0:
            raise InvalidParameterError(f"{self.kind} lambda must lie in [0, 1]")
        if self.kind == "softmax" and self.lam < 0:
            raise InvalidParameterError("softmax lambda must be nonnegative")


@dataclass(frozen=True)
class Stationary:
    pass


@dataclass(frozen=True)
class Abrupt:
    """Skill jumps from the spec's initial skill to ``final`` at ``change_step``."""

    final: ExecutionSkillParams
    change_step: int


@dataclass(frozen=True)
class Gradual:
    """Skill interpolates linearly from initial (index 0) to ``final`` (index N-1)."""

    final: ExecutionSkillParams


@dataclass(frozen=True)
class AgentSpec:
    decision: DecisionModel
    skill: ExecutionSkillParams
    dynamics: Stationary | Abrupt | Gradual = field(default_factory=Stationary)

    @property
    def is_dynamic(self) -> bool:
        return not isinstance(self.dynamics, Stationary)


@dataclass(frozen=True)
class Observation:
    """What estimators see: the state identity and the executed action only."""

    state_id: int
    executed_action: tuple[float, float]

    @property
    def point(self) -> np.ndarray:
        return np.asarray(self.executed_action, dtype=float)


def current_skill(spec: AgentSpec, obs_index: int, n_observations: int) -> ExecutionSkillParams:
    """The agent's true noise parameters when producing observation obs_index."""
    if not 0 <= obs_index < n_observations:
        raise InvalidParameterError(f"obs_index {obs_index} outside [0, {n_observations})")
    dyn = spec.dynamics
    if isinstance(dyn, Stationary):
        return spec.skill
    if isinstance(dyn, Abrupt):
        return spec.skill if obs_index < dyn.change_step else dyn.final
    frac = obs_index / (n_observations - 1) if n_observations > 1 else 0.0
    a, b = spec.skill, dyn.final
    return ExecutionSkillParams(
        sigma_x=a.sigma_x + frac * (b.sigma_x - a.sigma_x),
        sigma_y=a.sigma_y + frac * (b.sigma_y - a.sigma_y),
        rho=a.rho + frac * (b.rho - a.rho),
    )


def softmax_distribution(field: ValueField, lam: float) -> np.ndarray:
    """Target probabilities over flat grid cells, exp(lam*V) normalized.

    Max-subtraction keeps the computation finite for any lam * V scale and
    makes the result invariant under adding a constant to all values.
    """
    if not np.isfinite(lam) or lam < 0:
        raise InvalidParameterError(f"softmax lambda must be finite and >= 0, got {lam}")
    a = lam * field.values.ravel()
    a = a - a.max()
    e = np.exp(a)
    return e / e.sum()


def select_target(spec: AgentSpec, field: ValueField, rng: np.random.Generator) -> np.ndarray:
    """Choose a target cell center according to the agent's decision model."""
    kind = spec.decision.kind
    if kind == "rational":
        return optimal_action(field)
    if kind == "flip":
        if rng.random() < spec.decision.lam:
            return optimal_action(field)
        return field.grid.cell_center(int(rng.integers(field.grid.n_cells)))
    if kind == "softmax":
        p = softmax_distribution(field, spec.decision.lam)
        cdf = np.cumsum(p)
        idx = int(np.searchsorted(cdf, rng.random(), side="right"))
        return field.grid.cell_center(min(idx, field.grid.n_cells - 1))
    # Deceptive: farthest feasible cell from the optimal action, where
    # feasible means value >= lam * max_value. The optimal cell itself is
    # always feasible for lam <= 1, so the feasible set is never empty.
    opt = optimal_action(field)
    feasible = field.values.ravel() >= spec.decision.lam * field.max_value
    d2 = ((field.grid.cells - opt) ** 2).sum(axis=1)
    idx = int(np.argmax(np.where(feasible, d2, -1.0)))
    return field.grid.cell_center(idx)


def step(
    spec: AgentSpec,
    field: ValueField,
    obs_index: int,
    n_observations: int,
    target_rng: np.random.Generator,
    noise_rng: np.random.Generator,
    state_id: int | None = None,
) -> Observation:
    """Produce one observation: select a target, then add execution noise.

    ``field`` must be the value field for the agent's current true skill.
    The perturbation consumes exactly one standard-normal pair from
    ``noise_rng``, so agents sharing a noise stream seed experience the
    same noise sequence (common random numbers).
    """
    target = select_target(spec, field, target_rng)
    skill = current_skill(spec, obs_index, n_observations)
    executed = target + sample(skill, noise_rng)
    sid = field.state_id if state_id is None else state_id
    return Observation(state_id=sid, executed_action=(float(executed[0]), float(executed[1])))


# Representative sigma ranges for accurate / inaccurate endpoints of
# dynamic agents (mm).
ACCURATE_SIGMA_RANGE = (8.0, 15.0)
INACCURATE_SIGMA_RANGE = (130.0, 145.0)


def draw_change_step(rng: np.random.Generator, n_observations: int) -> int:
    """Uniform draw from the middle third of the run, inclusive."""
    lo = n_observations // 3
    hi = (2 * n_observations) // 3
    return int(rng.integers(lo, hi + 1))


def draw_dynamic_endpoints(
    rng: np.random.Generator,
    rho_range: tuple[float, float] = (-0.75, 0.75),
    shared_rho: bool = False,
) -> tuple[ExecutionSkillParams, ExecutionSkillParams]:
    """Initial and final skills for a dynamic agent.

    One endpoint is drawn from the accurate representative range and the
    other from the inaccurate one, in random order. Each endpoint gets its
    own rho unless ``shared_rho`` is set.
    """
    ranges = [ACCURATE_SIGMA_RANGE, INACCURATE_SIGMA_RANGE]
    if rng.random() < 0.5:
        ranges.reverse()
    rho_a = rng.uniform(*rho_range)
    rho_b = rho_a if shared_rho else rng.uniform(*rho_range)
    first = ExecutionSkillParams(rng.uniform(*ranges[0]), rng.uniform(*ranges[0]), rho_a)
    second = ExecutionSkillParams(rng.uniform(*ranges[1]), rng.uniform(*ranges[1]), rho_b)
    return first, second
