"""Contextual Bernoulli bandits with expected-free-energy action selection.

The library keeps one Gaussian belief per arm over the weights of a
sigmoid outcome model, updates those beliefs with interchangeable fusion
schemes (variational bound, importance-sampling correction, mode fit) and
selects actions by minimizing expected free energy against a preferred
outcome distribution. A quadrature reference, benchmark policies and a
reproducible experiment harness round out the package.
"""

from .gaussian import (
    GaussianBelief,
    QuadraticFactor,
    expected_log_factor,
    factor_from_quotient,
    kl_divergence,
    product_scale_and_posterior,
    random_covariance,
)
from .sigmoid import (
    VariationalParams,
    bound_coefficients,
    bound_curvature,
    context_vector,
    log_sigmoid,
    optimize_variational_params,
    sigmoid,
    sigmoid_prob,
)
from .fusion import (
    FusionMethod,
    FusionResult,
    fuse,
    laplace_fuse,
    newton_map,
    vb_fuse,
    vbis_fuse,
)
from .efe import (
    EfeBreakdown,
    PriorPreference,
    efe_total,
    outcome_efe,
    select_action_active_inference,
)
from .policies import (
    AgentState,
    PolicyKind,
    epsilon_greedy_select,
    initial_state,
    oracle_select,
    select_arm,
    thompson_select,
    update_belief,
)
from .env import (
    Environment,
    cumulative_regret,
    env_from_manifest,
    env_to_manifest,
    generate_environment,
    pull,
)
from .quadrature import OracleEfe, OracleFusion, oracle_efe, oracle_fusion
from .experiment import (
    EpisodeResult,
    ExperimentConfig,
    RegretTrace,
    paper_grid,
    run_episode,
    run_monte_carlo,
    sweep,
    write_trace_csv,
)

__version__ = "0.1.0"

__all__ = [
    "GaussianBelief",
    "QuadraticFactor",
    "expected_log_factor",
    "factor_from_quotient",
    "kl_divergence",
    "product_scale_and_posterior",
    "random_covariance",
    "VariationalParams",
    "bound_coefficients",
    "bound_curvature",
    "context_vector",
    "log_sigmoid",
    "optimize_variational_params",
    "sigmoid",
    "sigmoid_prob",
    "FusionMethod",
    "FusionResult",
    "fuse",
    "laplace_fuse",
    "newton_map",
    "vb_fuse",
    "vbis_fuse",
    "EfeBreakdown",
    "PriorPreference",
    "efe_total",
    "outcome_efe",
    "select_action_active_inference",
    "AgentState",
    "PolicyKind",
    "epsilon_greedy_select",
    "initial_state",
    "oracle_select",
    "select_arm",
    "thompson_select",
    "update_belief",
    "Environment",
    "cumulative_regret",
    "env_from_manifest",
    "env_to_manifest",
    "generate_environment",
    "pull",
    "OracleEfe",
    "OracleFusion",
    "oracle_efe",
    "oracle_fusion",
    "EpisodeResult",
    "ExperimentConfig",
    "RegretTrace",
    "paper_grid",
    "run_episode",
    "run_monte_carlo",
    "sweep",
    "write_trace_csv",
]
