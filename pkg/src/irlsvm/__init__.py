"""Inverse reinforcement learning on finite MDPs.

Recover reward functions that make a designated action Bellman optimal,
classify instances by the geometry of their feature rows, bound the number
of sampled transitions needed for recovery to survive estimation error, and
reproduce success-versus-samples experiments.
"""

from .estimation import (
    BoundInputs,
    EstimateReport,
    TrajectoryDataset,
    alpha_bound,
    discount_amplification,
    dkw_bound,
    feature_error_bound,
    feature_error_threshold,
    mle_transition,
    power_error_bound,
    recovery_sample_bound,
    simulate_dataset,
    witness_check,
)
from .experiments import (
    ExperimentConfig,
    GenerationExhausted,
    SuccessCurve,
    TrialRecord,
    emit_csv,
    emit_trials_csv,
    gen_mdp_structured,
    gen_mdp_uniform,
    gen_separable_mdp,
    run_experiment,
    run_trial,
)
from .mdp import (
    FeatureRows,
    Mdp,
    TransitionModel,
    bellman_margin,
    discounted_resolvent,
    feature_rows,
    induced_row_norm,
    matrix_sup_norm,
    mdp_from_dict,
    mdp_to_dict,
    optimal_policy_oracle,
    q_values,
    validate_transition_model,
    value_of_policy,
)
from .simplex import LinearProgram, LpSolution, check_feasible, solve
from .solvers import (
    InfeasibleProblem,
    RegimeLabel,
    SeparabilityCertificate,
    SolverReport,
    ZeroFeatureRow,
    beta_certificate,
    classify_regime,
    solve_l1_svm,
    solve_lp_irl,
)

__all__ = [
    "BoundInputs",
    "EstimateReport",
    "ExperimentConfig",
    "FeatureRows",
    "GenerationExhausted",
    "InfeasibleProblem",
    "LinearProgram",
    "LpSolution",
    "Mdp",
    "RegimeLabel",
    "SeparabilityCertificate",
    "SolverReport",
    "SuccessCurve",
    "TrajectoryDataset",
    "TransitionModel",
    "TrialRecord",
    "ZeroFeatureRow",
    "alpha_bound",
    "bellman_margin",
    "beta_certificate",
    "check_feasible",
    "classify_regime",
    "discount_amplification",
    "discounted_resolvent",
    "dkw_bound",
    "emit_csv",
    "emit_trials_csv",
    "feature_error_bound",
    "feature_error_threshold",
    "feature_rows",
    "gen_mdp_structured",
    "gen_mdp_uniform",
    "gen_separable_mdp",
    "induced_row_norm",
    "matrix_sup_norm",
    "mdp_from_dict",
    "mdp_to_dict",
    "mle_transition",
    "optimal_policy_oracle",
    "power_error_bound",
    "q_values",
    "recovery_sample_bound",
    "run_experiment",
    "run_trial",
    "simulate_dataset",
    "solve",
    "solve_l1_svm",
    "solve_lp_irl",
    "validate_transition_model",
    "value_of_policy",
    "witness_check",
]
