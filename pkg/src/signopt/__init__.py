"""Distributed scalar optimization where agents exchange only the sign
of relative states: simulation engines, penalty calculus, convergence
bound evaluators, and a config-driven CLI."""

from .graph import (
    GraphError,
    IncidenceMatrix,
    WeightedGraph,
    complete,
    edge_connectivity,
    incidence,
    max_flow_between,
    max_weighted_degree,
    ring,
    ring_random_weights,
    smallest_weights_sum,
)
from .objective import (
    AbsDeviation,
    GridCertificate,
    ObjectiveError,
    OptimalSet,
    ProblemInstance,
    Quadratic,
    Quantile,
    disagreement_penalty,
    grid_certify,
    minimizer_subgradient_bound,
    optimal_set,
    penalized_objective,
    penalized_subgradient,
    penalty_lower_bound,
    quadratic_envelope_constants,
    total_objective,
    uniform_subgradient_bound,
)
from .stochastic import (
    ActivationMatrix,
    NoiseModel,
    StochasticError,
    folded_normal_mean,
    normal_cdf,
    normal_variates,
    sample_activation,
    sample_noise,
    uniform_variates,
)
from .algorithms import (
    AffineReciprocal,
    AlgorithmError,
    Constant,
    PowerLaw,
    RunRecord,
    SimulationDiverged,
    StepSchedule,
    run,
    step_algo1,
    step_algo2,
    step_algo3,
    step_dgd,
)
from .analysis import (
    AnalysisError,
    BoundReport,
    check_grad_floor,
    constant_gap_bound,
    constant_neighborhood_bound,
    constant_neighborhood_bound_growth,
    descent_margins,
    diminishing_gap_bound,
    growth_subgrad_norm_bound,
    noise_spread_bound,
    nonconsensus_grad_floor,
    optimal_constant_step,
    penalized_subgrad_norm_bound,
    sublevel_radius,
    verify_run,
)

__version__ = "0.1.0"
