"""persistgp: persistence exponents of smooth self-similar Gaussian processes.

Exact stationary correlations of the Lamperti-transformed fractional family
(FBM, Riemann-Liouville, and the smooth moving-average component), exact
Gaussian samplers, Monte Carlo persistence-exponent estimation, and a numeric
certification suite for the supporting lemmas.
"""

from .corr import (
    CorrelationFn,
    CorrKind,
    corr_ch,
    corr_gh_closed,
    corr_rh,
    corr_gh_quad,
    corr_gstar_half,
    corr_rescaled,
    correlation_row,
    gstar_integral,
    kernel_K,
    kernel_k,
    make_correlation,
    mh_cov_integral,
    mh_variance_integral,
    young_tail_constant,
)
from .errors import (
    ConfigError,
    DegenerateHurstError,
    DomainError,
    EmbeddingNotNonnegativeError,
    InsufficientSurvivorsError,
    NotPositiveDefiniteError,
    PersistgpError,
    QuadratureError,
    SeriesError,
    TailBudgetExceededError,
)
from .persistence import (
    ExponentEstimate,
    FitMode,
    McSettings,
    SurvivalCurve,
    estimate_exponent,
    fit_exponent,
    rescaled_exponent,
    simulate_survival_curve,
    survival_curve_gsp,
    survival_curve_selfsimilar,
    wilson_interval,
)
from .quadrature import QuadratureSpec, integrate_adaptive
from .sampler import (
    PathBatch,
    SampleMethod,
    TimeGrid,
    build_covariance,
    lamperti,
    sample_cholesky,
    sample_circulant,
    sample_direct_mh,
    sample_direct_mstar,
)
from .specfun import (
    Band,
    Hurst,
    SigmaConstants,
    as_hurst,
    digamma,
    hyp2f1_special,
    ln_gamma,
    sigma_constants,
)

__version__ = "0.1.0"
