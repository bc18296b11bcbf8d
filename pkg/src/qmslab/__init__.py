"""Functional-inequality toolkit for Markov semigroups on finite
matrix algebras: state-weighted L^p norms, entropy functionals, Dirichlet
forms, exact spectral gaps, sampled log-Sobolev constants with witnesses,
regularity checks and entropy-decay trajectories."""

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    HypothesesError,
    InputError,
    NonErgodicError,
    NumericalError,
    ToolkitError,
)
from .hermitian import (
    SpectralDecomposition,
    as_hermitian,
    dlog,
    kernel_integral,
    mat_fn,
    mat_log,
    mat_pow,
    min_eig,
    random_hermitian,
    spectral,
)
from .space import (
    ExponentPair,
    WeightedSpace,
    centered,
    embed_ipq,
    entropy_e,
    functional_h,
    kms_inner,
    norm_p,
    op_entropy_tq,
    variance,
)
from .semigroup import (
    Generator,
    Provenance,
    ValidationRecord,
    build_depolarizing,
    build_lindblad,
    dirichlet,
    dirichlet_q,
    embed_classical,
    evolve,
    find_invariant_state,
    random_kms_symmetric,
    random_reversible_chain,
    random_trace_nonsymmetric,
    random_trace_symmetric,
    validate,
)
from .inequalities import (
    EstimateResult,
    ExpansionResult,
    InequalityReport,
    OptimizerConfig,
    RCVerdict,
    StochasticBridge,
    estimate_lsi,
    estimate_mlsi,
    expand_h,
    gap_witness,
    hierarchy_report,
    kt_bridge,
    lsi_ratio,
    mlsi_ratio,
    rc_check,
    rc_limit_probe,
    scalar_inequality_suite,
    spectral_gap,
    wrc_beta,
    wrc_ratio,
)
from .decay import (
    DecayVerdict,
    SearchConfig,
    SearchLog,
    Trajectory,
    default_time_grid,
    entropy_rate,
    entropy_trajectory,
    search_counterexample,
    variance_trajectory,
    verify_decay_equivalence,
)
