"""Convergence diagnostics for MCMC draws of a categorical variable.

Homogeneity tests compare independent segments of categorical chains, either
separate chains (between-chain) or the head and tail of one chain
(within-chain):

* frequency tests: ``hangartner``, ``weiss``, ``darboot``, ``mcboot``;
* transition tests: ``billingsley``, ``billingsleyboot``.
"""

from .bootstrap import (
    BootstrapConfig,
    BootstrapOutcome,
    NullModel,
    billingsley_boot_test,
    bootstrap_pvalue,
    darboot_test,
    mcboot_test,
)
from .chain import (
    CategoryAlphabet,
    FrequencyTable,
    SegmentSet,
    TransitionTable,
    encode,
    frequency_table,
    split_within,
    transition_table,
)
from .diagnose import DiagnosticReport, DiagnosticRequest, Mode, evaluate, run, run_between, run_sequential, run_within
from .errors import CatconvError, DataError, InsufficientVariationError, NumericalError, ParseError
from .simulate import (
    Dar1Params,
    MarkovParams,
    NdarmaParams,
    RngStream,
    derive_stream,
    simulate_dar1,
    simulate_markov,
    simulate_ndarma,
)
from .special import chi_squared_sf, regularized_gamma_p
from .stats import (
    Dar1Estimate,
    Method,
    TestOutcome,
    billingsley_statistic,
    billingsley_test,
    estimate_dar1,
    hangartner_test,
    kappa_hat,
    pearson_statistic,
    weiss_test,
)

__version__ = "0.1.0"
