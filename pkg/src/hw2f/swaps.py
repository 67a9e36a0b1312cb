"""
Co-initial swaps: valuation, the compounded-forward proxy, and the analytic
terminal covariance of swap rates.

The covariance of two swap rates observed at ``T_n`` is approximated by
freezing each rate's sensitivity to the driftless factors at its time-0
value.  For a swap ending at ``T_e`` the sensitivity to ``X_i`` is
``G * B_i(T_n, T_e)`` with gearing ``G = (1 + delta * S(0)) / (T_e - T_n)``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .curve import b_factor, bond, xi_integrals
from .errors import (
    ConfigurationError,
    DegenerateCorrelationError,
    DegenerateError,
    DomainError,
    UnattainableTargetError,
)

__all__ = [
    "TenorGrid",
    "SwapSpec",
    "RegionReport",
    "RhoCalibration",
    "LevelCalibration",
    "annuity",
    "par_rate",
    "proxy_par_rate",
    "gearing",
    "swap_covariance",
    "swap_correlation",
    "classify_region",
    "limit_correlation",
    "correlation_curve",
    "maturity_sweep",
    "calibrate_rho",
    "implied_normal_vol",
    "calibrate_level",
]

PAYER = "payer"
RECEIVER = "receiver"
_DATE_TOL = 1e-9
_DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class TenorGrid:
    t0: float
    delta: float
    n_periods: int

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ConfigurationError("accrual period must be positive")
        if self.n_periods < 1:
            raise ConfigurationError("a tenor grid needs at least one period")

    @property
    def dates(self):
        """``T_0, ..., T_n`` including the start date."""
        return self.t0 + self.delta * np.arange(self.n_periods + 1)


@dataclass(frozen=True)
class SwapSpec:
    """
    A fixed-for-floating swap starting (fixing) at ``start`` and ending at ``end``.

    Fixed payments fall at ``start + k * delta`` for ``k = 1..n``.  ``direction``
    is ``"payer"`` (pay fixed) or ``"receiver"``.
    """

    start: float
    end: float
    delta: float = 0.25
    strike: float = 0.0
    direction: str = PAYER
    notional: float = 1.0

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ConfigurationError("accrual period must be positive")
        if self.start < 0.0:
            raise ConfigurationError("swap start must be nonnegative")
        if not self.end > self.start:
            raise ConfigurationError("swap end must follow its start")
        n = (self.end - self.start) / self.delta
        if abs(n - round(n)) > _DATE_TOL * max(1.0, n):
            raise ConfigurationError(
                f"swap length {self.end - self.start} is not a multiple of delta={self.delta}"
            )
        if self.direction not in (PAYER, RECEIVER):
            raise ConfigurationError("direction must be 'payer' or 'receiver'")

    @property
    def n_periods(self):
        return int(round((self.end - self.start) / self.delta))

    @property
    def grid(self):
        return TenorGrid(self.start, self.delta, self.n_periods)

    @property
    def payment_dates(self):
        return self.grid.dates[1:]

    @property
    def tenor(self):
        return self.end - self.start

    @property
    def sign(self):
        return 1.0 if self.direction == PAYER else -1.0


@dataclass(frozen=True)
class RegionReport:
    """Region label with the three decision ratios and the limiting correlation sign."""

    ratio_vol: float
    ratio_short: float
    ratio_long: float
    region: str
    limit_sign: int

    @property
    def degenerate(self):
        return self.limit_sign == 0


class RhoCalibration(NamedTuple):
    params: object
    rho_m: float
    n_roots: int
    residual: float


class LevelCalibration(NamedTuple):
    params: object
    scale: float


# --------------------------------------------------------------------------
# valuation
# --------------------------------------------------------------------------

def _discounter(curve, params, state):
    """Return ``(t, D)`` with ``D(T)`` the discount factor seen from the state."""
    if state is None:
        return 0.0, curve.discount
    if params is None:
        raise ConfigurationError("a factor state needs model params to rebuild bonds")
    return state.t, lambda T: bond(curve, params, state, T)


def annuity(curve, spec, params=None, state=None):
    """PVBP ``delta * sum_k D(t, T_k)`` over the fixed-leg payment dates."""
    t, disc = _discounter(curve, params, state)
    if t > spec.start + _DATE_TOL:
        raise DomainError("valuation time is after the swap start")
    return spec.delta * float(np.sum(disc(spec.payment_dates)))


def par_rate(curve, spec, params=None, state=None):
    """``(D(t, T_start) - D(t, T_end)) / annuity``; may be negative."""
    t, disc = _discounter(curve, params, state)
    if t > spec.start + _DATE_TOL:
        raise DomainError("valuation time is after the swap start")
    a = annuity(curve, spec, params, state)
    return (disc(spec.start) - disc(spec.end)) / a


def proxy_par_rate(curve, spec, params=None, state=None):
    """
    Rate ``S`` solving ``D(t, T_end) / D(t, T_n) = (1 + delta S)^(-(T_end - T_n) / delta)``.

    Without a state this is the time-0 forward value; with one, ``state.t``
    must equal the swap start.
    """
    if state is not None and abs(state.t - spec.start) > _DATE_TOL:
        raise DomainError("proxy rate is defined at the swap start only")
    _, disc = _discounter(curve, params, state)
    return _proxy(disc, spec.start, spec.end, spec.delta)


def _proxy(disc, start, end, delta):
    ratio = disc(start) / disc(end)
    return math.expm1(math.log(ratio) * delta / (end - start)) / delta


def _gearing(curve, start, end, delta):
    return (1.0 + delta * _proxy(curve.discount, start, end, delta)) / (end - start)


def gearing(curve, spec):
    """``(1 + delta S(0)) / (T_end - T_n)`` with the time-0 proxy rate."""
    return _gearing(curve, spec.start, spec.end, spec.delta)


# --------------------------------------------------------------------------
# covariance and correlation
# --------------------------------------------------------------------------

def _check_observed(T_n, *specs):
    for s in specs:
        if abs(s.start - T_n) > _DATE_TOL:
            raise DomainError(f"swap starting at {s.start} is not co-initial with T_n={T_n}")


def _b_pair(params, T_n, end):
    return b_factor(params.a1, T_n, end), b_factor(params.a2, T_n, end)


def swap_covariance(params, T_n, spec_a, spec_b, curve):
    """Analytic covariance of the two swap rates fixed at ``T_n``."""
    _check_observed(T_n, spec_a, spec_b)
    xi1, xi2, xi12 = xi_integrals(params, T_n)
    b1a, b2a = _b_pair(params, T_n, spec_a.end)
    b1b, b2b = _b_pair(params, T_n, spec_b.end)
    quad = b1a * b1b * xi1 + b2a * b2b * xi2 + (b1a * b2b + b2a * b1b) * xi12
    return gearing(curve, spec_a) * gearing(curve, spec_b) * quad


def _end_loadings(params, T_n, end, delta, curve, xi1, xi2):
    g = 1.0 if curve is None else _gearing(curve, T_n, end, delta)
    b1, b2 = _b_pair(params, T_n, end)
    return g * b1 * math.sqrt(xi1), g * b2 * math.sqrt(xi2)


def _factor_loadings(params, T_n, spec, curve, xi1, xi2):
    return _end_loadings(params, T_n, spec.end, spec.delta, curve, xi1, xi2)


def _corr_from_loadings(pa, qa, pb, qb, cos_t, sin_t):
    # Rotate onto the Cholesky basis so that rho = -1 factorises exactly.
    ua0, ua1 = pa + cos_t * qa, sin_t * qa
    ub0, ub1 = pb + cos_t * qb, sin_t * qb
    na = math.hypot(ua0, ua1)
    nb = math.hypot(ub0, ub1)
    if na == 0.0 or nb == 0.0:
        raise DegenerateCorrelationError("a swap rate has zero analytic variance")
    c = (ua0 * ub0 + ua1 * ub1) / (na * nb)
    return min(1.0, max(-1.0, c))


def _xi_rho(params, T_n):
    xi1, xi2, xi12 = xi_integrals(params, T_n)
    if xi1 > 0.0 and xi2 > 0.0:
        rho = min(1.0, max(-1.0, xi12 / math.sqrt(xi1 * xi2)))
    else:
        rho = 0.0
    return xi1, xi2, rho


def swap_correlation(params, T_n, spec_a, spec_b, curve=None):
    """
    Analytic terminal correlation of two co-initial swap rates.

    Computed through the Cholesky factor of the factor covariance, which is
    algebraically the normalised covariance but exact at ``rho_m = +-1``.
    ``curve`` only matters through the signs of the gearings.
    """
    _check_observed(T_n, spec_a, spec_b)
    xi1, xi2, rho = _xi_rho(params, T_n)
    pa, qa = _factor_loadings(params, T_n, spec_a, curve, xi1, xi2)
    pb, qb = _factor_loadings(params, T_n, spec_b, curve, xi1, xi2)
    return _corr_from_loadings(pa, qa, pb, qb, rho, math.sqrt(max(0.0, 1.0 - rho * rho)))


def implied_normal_vol(params, T_n, spec, curve):
    """Normal volatility implied by the analytic variance: ``sqrt(Var / T_n)``."""
    if T_n <= 0.0:
        raise DomainError("implied volatility needs a positive expiry")
    var = swap_covariance(params, T_n, spec, spec, curve)
    return math.sqrt(max(var, 0.0) / T_n)


# --------------------------------------------------------------------------
# regions and the rho_m -> -1 limit
# --------------------------------------------------------------------------

def _limit_factor(params, T_n, end, xi1, xi2):
    b1, b2 = _b_pair(params, T_n, end)
    u, v = b1 * math.sqrt(xi1), b2 * math.sqrt(xi2)
    f = u - v
    if abs(f) <= _DEGENERATE_RTOL * (u + v):
        return 0.0
    return f


def _limit_sign(params, T_n, short_end, long_end, xi1, xi2):
    fs = _limit_factor(params, T_n, short_end, xi1, xi2)
    fl = _limit_factor(params, T_n, long_end, xi1, xi2)
    return int(np.sign(fs) * np.sign(fl))


def _region(ratio_vol, ratio_short, ratio_long):
    if ratio_vol > ratio_short:
        return "I"
    if ratio_vol > ratio_long:
        return "II"
    return "III"


def classify_region(params, T_n, short_end, long_end, curve=None):
    """
    Place ``sqrt(xi2 / xi1)`` against the B-ratios of the short and long swaps.

    Region II (``ratio_short >= sqrt(xi2/xi1) > ratio_long``) is the only one
    where swap-rate correlation can reach -1.  ``curve`` is accepted for a
    uniform call signature; the ratios do not depend on it.
    """
    if not params.a1 > params.a2:
        raise ConfigurationError("region classification needs a1 > a2")
    if not short_end < long_end:
        raise DomainError("short swap must end before the long swap")
    if short_end <= T_n:
        raise DomainError("swap end dates must follow T_n")
    xi1, xi2, _ = xi_integrals(params, T_n)
    b1s, b2s = _b_pair(params, T_n, short_end)
    b1l, b2l = _b_pair(params, T_n, long_end)
    ratio_vol = math.sqrt(xi2 / xi1) if xi1 > 0.0 else math.inf
    ratio_short = b1s / b2s
    ratio_long = b1l / b2l
    return RegionReport(
        ratio_vol=ratio_vol,
        ratio_short=ratio_short,
        ratio_long=ratio_long,
        region=_region(ratio_vol, ratio_short, ratio_long),
        limit_sign=_limit_sign(params, T_n, short_end, long_end, xi1, xi2),
    )


def limit_correlation(params, T_n, spec_a, spec_b, curve=None):
    """Swap-rate correlation in the limit ``rho_m -> -1``: +1 or -1."""
    _check_observed(T_n, spec_a, spec_b)
    xi1, xi2, _ = xi_integrals(params, T_n)
    sign = _limit_sign(params, T_n, spec_a.end, spec_b.end, xi1, xi2)
    if sign == 0:
        raise DegenerateCorrelationError(
            "one swap has no exposure to the surviving factor at rho_m = -1"
        )
    if curve is not None:
        sign *= int(np.sign(gearing(curve, spec_a) * gearing(curve, spec_b)))
    return sign


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

def correlation_curve(params, T_n, spec_a, spec_b, rho_grid, curve=None):
    """
    ``[(rho_m, rho_swap), ...]`` with the variances of ``params`` at ``T_n``.

    Rows follow the order of ``rho_grid``.
    """
    rows = []
    for rho in rho_grid:
        p = params.with_rho_m(T_n, float(rho))
        rows.append((float(rho), swap_correlation(p, T_n, spec_a, spec_b, curve)))
    return rows


def maturity_sweep(params, T_n, short_end, long_end_grid, delta=0.25, rho_m=None, curve=None):
    """
    ``[(t_long, rho_swap, region), ...]`` as the long swap's end date moves.

    ``rho_m`` overrides the terminal correlation of ``params`` when given.
    Grid points need not sit on the accrual lattice; a point equal to
    ``short_end`` gives the same swap twice.
    """
    if rho_m is not None:
        params = params.with_rho_m(T_n, rho_m)
    if short_end <= T_n:
        raise DomainError("swap end dates must follow T_n")
    xi1, xi2, rho = _xi_rho(params, T_n)
    cos_t, sin_t = rho, math.sqrt(max(0.0, 1.0 - rho * rho))
    ratio_vol = math.sqrt(xi2 / xi1) if xi1 > 0.0 else math.inf
    b1s, b2s = _b_pair(params, T_n, short_end)
    ps, qs = _end_loadings(params, T_n, short_end, delta, curve, xi1, xi2)
    rows = []
    for t_long in long_end_grid:
        t_long = float(t_long)
        if t_long <= T_n:
            raise DomainError("swap end dates must follow T_n")
        b1l, b2l = _b_pair(params, T_n, t_long)
        pl, ql = _end_loadings(params, T_n, t_long, delta, curve, xi1, xi2)
        region = _region(ratio_vol, b1s / b2s, b1l / b2l)
        rows.append((t_long, _corr_from_loadings(ps, qs, pl, ql, cos_t, sin_t), region))
    return rows


# --------------------------------------------------------------------------
# calibration
# --------------------------------------------------------------------------

def calibrate_rho(params, T_n, spec_a, spec_b, target, curve=None, grid_size=4001):
    """
    Find the terminal correlation ``rho_m`` reproducing a swap-rate correlation.

    The search runs over the angle ``theta`` with ``rho_m = cos(theta)``, on
    which the correlation is smooth up to both ends.  When several ``rho_m``
    match (regions I and III are not monotone) the largest is returned and
    ``n_roots`` reports how many there are.
    """
    _check_observed(T_n, spec_a, spec_b)
    if not -1.0 <= target <= 1.0:
        raise DomainError("target correlation must lie in [-1, 1]")
    base = params.at_horizon(T_n)
    xi1, xi2, _ = xi_integrals(base, T_n)
    pa, qa = _factor_loadings(base, T_n, spec_a, curve, xi1, xi2)
    pb, qb = _factor_loadings(base, T_n, spec_b, curve, xi1, xi2)

    def corr(theta):
        return _corr_from_loadings(pa, qa, pb, qb, math.cos(theta), math.sin(theta))

    thetas = np.linspace(0.0, math.pi, grid_size)
    values = np.array([corr(th) for th in thetas])
    k = int(np.argmin(values))
    lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, grid_size - 1)]
    refined = minimize_scalar(corr, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    minimum = min(float(values[k]), float(refined.fun))
    if target < minimum - 1e-14:
        raise UnattainableTargetError(
            f"target {target} is below the attainable minimum {minimum:.12g}", minimum
        )

    f = values - target
    roots = []
    for i in range(grid_size):
        if f[i] == 0.0:
            roots.append(float(thetas[i]))
        elif i + 1 < grid_size and f[i] * f[i + 1] < 0.0:
            roots.append(brentq(lambda th: corr(th) - target, thetas[i], thetas[i + 1], xtol=1e-15))
    if not roots:
        # target sits at a minimum that falls between grid nodes
        roots.append(float(refined.x))
    theta = min(roots)
    rho = 1.0 if theta == 0.0 else (-1.0 if theta == math.pi else math.cos(theta))
    fitted = params.with_rho_m(T_n, rho)
    residual = swap_correlation(fitted, T_n, spec_a, spec_b, curve) - target
    return RhoCalibration(fitted, rho, len(roots), residual)


def calibrate_level(params, T_n, spec, curve, target_normal_vol):
    """
    Scale both factor variances so the swap's analytic normal vol hits the target.

    The terminal correlation and ``sqrt(xi2 / xi1)`` are unchanged, so is the region.
    """
    if not target_normal_vol > 0.0:
        raise DomainError("target normal volatility must be positive")
    var = swap_covariance(params, T_n, spec, spec, curve)
    if not var > 0.0:
        raise DegenerateError("swap rate has zero analytic variance; nothing to scale")
    lam = target_normal_vol ** 2 * T_n / var
    return LevelCalibration(params.scaled(lam), lam)
