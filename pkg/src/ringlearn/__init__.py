"""Adversarially influenced log-linear learning on ring coordination games."""

__version__ = "0.1.0"

from .topology import (  # noqa: F401
    X,
    Y,
    RingGraph,
    Segment,
    all_x,
    all_y,
    decompose_segments,
    neighbors,
    profile_from_string,
    profile_to_string,
)
from .game import (  # noqa: F401
    GameParams,
    InfluenceSets,
    agent_utility,
    efficiency,
    efficiency_from_description,
    pairwise_payoff,
    perceived_utility,
    potential,
    welfare,
)
from .policies import (  # noqa: F401
    AggressivePolicy,
    DynamicUninformedPolicy,
    InfeasibleBudgetError,
    NoAdversary,
    PolicySpec,
    StaticPolicy,
    UnstabilizableTargetError,
    aggressive_budget,
    aggressive_influence,
    min_x_adversaries,
    min_y_adversaries,
    stabilizing_y_placement,
    static_informed_policy,
    static_uninformed_allocation,
)
from .dynamics import SimConfig, Trajectory, mean_efficiency_over_reps, run, step, update_distribution  # noqa: F401
from .oracle import (  # noqa: F401
    EnumerationCapError,
    ResistanceModel,
    deviation_resistance,
    recurrent_classes,
    resistance_model,
    sss_static,
    stochastic_potentials,
    stochastically_stable_states,
    transition_resistance,
    uninformed_path_resistances,
)
from .bounds import (  # noqa: F401
    BoundResult,
    SegmentDescription,
    comparison,
    di_bound,
    du_bound,
    min_efficiency_target,
    saturation,
    si_bound,
    si_closed_form,
    su_bound,
)
