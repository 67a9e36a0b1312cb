"""Two-factor Hull-White swap-rate correlation analytics, Monte-Carlo checks and exposure."""

from .curve import (
    ConstantSigma,
    DiscountCurve,
    FactorState,
    Hw2fParams,
    TerminalCovariance,
    b_factor,
    bond,
    log_a_factor,
    xi_constant_sigma,
    xi_integrals,
)
from .errors import (
    ConfigurationError,
    DegenerateCorrelationError,
    DegenerateError,
    DomainError,
    Hw2fError,
    UnattainableTargetError,
)
from .exposure import (
    ExposureProfile,
    ExposureRow,
    NettingSet,
    atm_strike,
    bachelier_call,
    cva_flat_hazard,
    epe,
    exposure_csv,
    exposure_profile,
    exposure_vs_rho_curve,
    portfolio_value,
    spread_option_frozen,
)
from .montecarlo import (
    FactorSample,
    McConfig,
    McResult,
    fisher_stderr,
    pearson,
    sample_factors,
    scatter_csv,
    simulate_swap_pair,
    simulate_swaps,
)
from .swaps import (
    RegionReport,
    SwapSpec,
    TenorGrid,
    annuity,
    calibrate_level,
    calibrate_rho,
    classify_region,
    correlation_curve,
    gearing,
    implied_normal_vol,
    limit_correlation,
    maturity_sweep,
    par_rate,
    proxy_par_rate,
    swap_correlation,
    swap_covariance,
)

__version__ = "0.1.0"
