"""Skill estimation from observed actions.

A particle-filter estimator of multi-dimensional execution skill and
decision-making skill, a grid-Bayes baseline, a shuffled-dartboard
simulation domain with configurable agents, closed-form evaluation
metrics, and an MLB pitch-location application.
"""

from .agents import (
    Abrupt,
    AgentSpec,
    DecisionModel,
    Gradual,
    Observation,
    Stationary,
    current_skill,
    select_target,
    softmax_distribution,
    step,
)
from .darts import (
    ActionGrid,
    BoardGeometry,
    DartboardState,
    RewardGrid,
    STANDARD_BOARD,
    board_action_grid,
    generate_state,
    rasterize_reward,
    reward_at,
)
from .errors import (
    DataError,
    DegenerateFilterError,
    InvalidObservationError,
    InvalidParameterError,
    MismatchedResolutionError,
    SkillEstimationError,
)
from .jeeds import (
    HypothesisGrid,
    JeedsConfig,
    JeedsEstimate,
    JeedsEstimator,
    jeeds_estimate,
    jeeds_init,
    jeeds_update,
)
from .mcse import (
    FilterConfig,
    Particle,
    ParticleSet,
    SkillEstimate,
    SkillFilter,
    effective_count,
    estimate,
    init_particles,
    likelihood,
    log_likelihood,
    perturb,
    resample,
)
from .metrics import (
    Gaussian2D,
    gaussian_from_params,
    generalized_variance,
    jeffreys,
    jeffreys_covs,
    kl_bivariate,
    strike_zone_probability,
)
from .noise import (
    DEFAULT_RANGES,
    ExecutionSkillParams,
    SkillRanges,
    covariance,
    discretized_kernel,
    log_pdf,
    pdf,
    sample,
)
from .rng import substream
from .value_field import ValueField, compute_value_field, optimal_action

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
