"""Cascading-bandit simulation library and experiment harness.

Simulates the cascade click model, runs the KL-UCB and UCB1 index policies
against adversarial instance families, estimates regret by Monte Carlo, fits
scaling exponents, and ships a runnable suite for the divergence inequalities
the regret analysis rests on.
"""

__version__ = "0.1.0"

from .cascade import (
    Action,
    Instance,
    RoundOutcome,
    click_probability,
    doc_regret_increment,
    optimal_action,
    regret_increment,
    sample_round,
)
from .divergence import (
    ClaimResult,
    bernoulli_kl,
    exploration_threshold,
    kl_claim_checks,
    klucb_index,
    ucb1_index,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    Metric,
    RegretTrace,
    ScalingFit,
    check_chi_constant,
    check_product_bound,
    check_tail_sum,
    default_checkpoints,
    fit_scaling,
    max_over_family,
    run_experiment,
    run_trial,
    sweep,
    theory_checks,
    trial_rng,
)
from .instances import (
    InstanceKind,
    InstanceSpec,
    enumerate_family,
    gen_lowerbound_member,
    gen_ucb1_hard,
    gen_two_level,
    ucb1_margin_chi,
)
from .policies import (
    IndexRule,
    PolicyState,
    RuleKind,
    compute_indices,
    init_state,
    select_action,
    step,
    update_state,
)

__all__ = [
    "Action", "ClaimResult", "ExperimentConfig", "ExperimentResult", "IndexRule",
    "Instance", "InstanceKind", "InstanceSpec", "Metric", "PolicyState",
    "RegretTrace", "RoundOutcome", "RuleKind", "ScalingFit", "bernoulli_kl",
    "check_chi_constant", "check_product_bound", "check_tail_sum",
    "click_probability", "compute_indices", "default_checkpoints",
    "doc_regret_increment", "enumerate_family", "exploration_threshold",
    "fit_scaling", "gen_lowerbound_member", "gen_ucb1_hard", "gen_two_level",
    "init_state", "kl_claim_checks", "klucb_index", "max_over_family",
    "optimal_action", "regret_increment", "run_experiment", "run_trial",
    "sample_round", "select_action", "step", "sweep", "ucb1_margin_chi",
    "theory_checks", "trial_rng", "ucb1_index", "update_state",
]
