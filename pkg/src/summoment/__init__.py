"""Sum-moment statistics for vectors of correlated random variables."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateDataError,
    DomainError,
    InfeasibleSpecError,
    LagGuardError,
    NotPositiveSemidefiniteError,
    NumericError,
    SingularMatrixError,
    SpecValidationError,
    SumMomentError,
)
from .specfun import gamma_fn, lambert_w_m1
from .processes import (
    CovMatrix,
    MarkovParams,
    PairSpec,
    TimeSeries,
    cov_markov1,
    cov_markov2,
    factorize,
    filter_cov,
    gen_correlated_pair,
    gen_gaussian_vector,
    gen_markov_ar,
    gen_white,
    kernel_to_cov,
    ma_filter,
    solve_pair_spec,
)
from .summoments import (
    PolySpec,
    central_summoment,
    gaussian_summoment_closed,
    summoment2_from_cov,
    summoment2_markov2,
)
from .regression import SplitLsResult, ls_fit, poly_ls_fit, split_ls_fit
from .applications import (
    AlignmentEstimate,
    align_by_argmax,
    align_by_lambert,
    cov_1mp_ma,
    fit_2mp,
    fit_mse_metric,
    lmmse_predict,
)
