"""betcraft: sequential nonparametric hypothesis testing by betting.

A test is a gambling game against the null: a predictable payoff with zero
conditional mean under H0 is bet on each round, wealth compounds, and the
null is rejected as soon as wealth reaches 1/alpha (anytime-valid by Ville's
inequality).
"""

from .betting import (
    BetGrid,
    CompoundedWealth,
    HedgedWealthState,
    ONE_SIDED_GRID,
    OutOfSupport,
    PayoffContractError,
    PayoffStrategy,
    TWO_SIDED_GRID,
    TestOutcome,
    WealthState,
    make_uniform_grid,
    run_sequential,
    should_stop,
)
from .target import (
    DiscreteCDF,
    EmpiricalCDF,
    NormalCDF,
    SortedBuffer,
    TargetCDF,
    UniformCDF,
)
from .one_sample import (
    Chi2Strategy,
    EWKSStrategy,
    KS1PluginStrategy,
    project_simplex,
)
from .kernels import (
    DegenerateWitness,
    GaussianKernel,
    Kernel,
    PairedGramState,
    mmd_squared_biased,
)
from .two_sample import (
    KS2PluginStrategy,
    KTMMDStrategy,
    MMDPluginStrategy,
    kt_log_potential,
)
from .extensions import DominanceStrategy, SymmetryStrategy
from .baselines import (
    BaselineResult,
    batch_chi2,
    batch_ks1,
    batch_ks2,
    batch_mmd,
    br_sequential,
    chi2_quantile,
    kolmogorov_quantile,
    mr_mmd_sequential,
    seq_ks1,
    seq_ks2,
)
from .distributions import (
    DistSpec,
    Discrete,
    MVNormal,
    Normal,
    Piecewise,
    Uniform,
    as_target_cdf,
    make_q_j_eps,
    sample,
    sample_block,
    stream,
)
from .simulate import (
    ExperimentConfig,
    PowerCurve,
    run_trials,
    write_csv,
    write_stopping_times,
)

__version__ = "0.1.0"

__all__ = [
    "BetGrid",
    "WealthState",
    "HedgedWealthState",
    "CompoundedWealth",
    "TestOutcome",
    "OutOfSupport",
    "PayoffContractError",
    "PayoffStrategy",
    "make_uniform_grid",
    "should_stop",
    "run_sequential",
    "ONE_SIDED_GRID",
    "TWO_SIDED_GRID",
    "TargetCDF",
    "UniformCDF",
    "NormalCDF",
    "DiscreteCDF",
    "EmpiricalCDF",
    "SortedBuffer",
    "KS1PluginStrategy",
    "EWKSStrategy",
    "Chi2Strategy",
    "project_simplex",
    "GaussianKernel",
    "Kernel",
    "PairedGramState",
    "DegenerateWitness",
    "mmd_squared_biased",
    "KS2PluginStrategy",
    "MMDPluginStrategy",
    "KTMMDStrategy",
    "kt_log_potential",
    "DominanceStrategy",
    "SymmetryStrategy",
    "BaselineResult",
    "kolmogorov_quantile",
    "chi2_quantile",
    "batch_ks1",
    "batch_ks2",
    "batch_chi2",
    "batch_mmd",
    "seq_ks1",
    "seq_ks2",
    "mr_mmd_sequential",
    "br_sequential",
    "DistSpec",
    "Normal",
    "MVNormal",
    "Uniform",
    "Discrete",
    "Piecewise",
    "sample",
    "sample_block",
    "stream",
    "make_q_j_eps",
    "as_target_cdf",
    "ExperimentConfig",
    "PowerCurve",
    "run_trials",
    "write_csv",
    "write_stopping_times",
    "__version__",
]
