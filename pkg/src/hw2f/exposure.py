"""
Netting-set exposure: Monte-Carlo EPE, the frozen-annuity spread option,
the exposure-versus-correlation sweep and a flat-hazard CVA.

EPE at ``T`` is reported as a time-0 value, normalised by the numeraire bond:
``EPE(T) = D(0, S) * E[max(V(T), 0) / D(T, S)]``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
from scipy.stats import norm

from ._io import write_csv
from .errors import ConfigurationError, DomainError
from .montecarlo import simulate_swaps
from .swaps import (
    SwapSpec,
    annuity,
    calibrate_level,
    implied_normal_vol,
    par_rate,
    proxy_par_rate,
    swap_covariance,
)

__all__ = [
    "NettingSet",
    "ExposureProfile",
    "ExposureRow",
    "atm_strike",
    "portfolio_value",
    "path_values",
    "epe",
    "exposure_profile",
    "bachelier_call",
    "spread_option_frozen",
    "exposure_vs_rho_curve",
    "exposure_csv",
    "cva_flat_hazard",
]


@dataclass(frozen=True)
class NettingSet:
    swaps: Tuple[SwapSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "swaps", tuple(self.swaps))
        if not self.swaps:
            raise ConfigurationError("a netting set needs at least one swap")

    @property
    def last_date(self):
        return max(s.end for s in self.swaps)


@dataclass(frozen=True)
class ExposureProfile:
    times: np.ndarray
    epe: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        for name in ("times", "epe", "stderr"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (self.times.shape == self.epe.shape == self.stderr.shape):
            raise ConfigurationError("profile arrays must have the same length")
        if np.any(self.epe < 0.0):
            raise ConfigurationError("expected positive exposure cannot be negative")


class ExposureRow(NamedTuple):
    rho_m: float
    epe: float
    stderr: float
    closed_form: float


def atm_strike(curve, spec):
    """Forward par rate of ``spec`` on the initial curve."""
    return par_rate(curve, spec)


def portfolio_value(curve, params, state, netting_set):
    """Sum of ``sign * notional * A * (S - K)`` with bonds rebuilt at ``state``."""
    total = 0.0
    for s in netting_set.swaps:
        if state.t > s.start + 1e-9:
            raise DomainError("portfolio valuation needs the state before every swap start")
        a = annuity(curve, s, params, state)
        total += s.sign * s.notional * a * (par_rate(curve, s, params, state) - s.strike)
    return total


def path_values(curve, params, netting_set, T, config):
    """Per-path portfolio values at ``T`` and the matching numeraire bonds."""
    val = simulate_swaps(curve, params, list(netting_set.swaps), T, config)
    values = np.zeros(val.annuity.shape[0])
    # accumulate swap by swap so that mirrored trades cancel exactly
    for k, s in enumerate(netting_set.swaps):
        values += (s.sign * s.notional) * (val.annuity[:, k] * (val.rate[:, k] - s.strike))
    return values, val.numeraire, val.numeraire_maturity


def epe(curve, params, netting_set, T, config):
    """Expected positive exposure at ``T`` and its Monte-Carlo standard error."""
    values, numeraire, S = path_values(curve, params, netting_set, T, config)
    weighted = np.maximum(values, 0.0) / numeraire * curve.discount(S)
    n = weighted.shape[0]
    se = float(weighted.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return float(weighted.mean()), se


def exposure_profile(curve, params, netting_set, times, config):
    """EPE on a grid of observation dates; needs a volatility with a time profile."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ConfigurationError("exposure profile needs at least one date")
    if np.any(np.diff(times) <= 0.0):
        raise ConfigurationError("exposure profile dates must be increasing")
    params = params.resolve_numeraire(netting_set.last_date)
    pts = [epe(curve, params, netting_set, float(t), config) for t in times]
    return ExposureProfile(times, np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))


def bachelier_call(forward, strike, stdev):
    """``E[(W - k)^+]`` for ``W ~ N(forward, stdev^2)``."""
    m = forward - strike
    if stdev <= 0.0:
        return max(m, 0.0)
    d = m / stdev
    return m * norm.cdf(d) + stdev * norm.pdf(d)


def spread_option_frozen(curve, params, netting_set, T):
    """
    Closed-form exposure with every annuity frozen at its time-0 value.

    The exposure becomes ``E[(sum_i w_i S_i(T) - k)^+]`` with
    ``w_i = sign_i * notional_i * A_i(0)``: a Gaussian spread option whose
    mean uses time-0 proxy rates and whose variance comes from the analytic
    swap-rate covariances.  All swaps must fix at ``T``.
    """
    swaps = netting_set.swaps
    for s in swaps:
        if abs(s.start - T) > 1e-9:
            raise DomainError("frozen spread option needs every swap to fix at the observation date")
    w = np.array([s.sign * s.notional * annuity(curve, s) for s in swaps])
    k = float(np.dot(w, [s.strike for s in swaps]))
    mean = float(np.dot(w, [proxy_par_rate(curve, s) for s in swaps]))
    cov = np.array([[swap_covariance(params, T, a, b, curve) for b in swaps] for a in swaps])
    var = float(w @ cov @ w)
    return bachelier_call(mean, k, math.sqrt(max(var, 0.0)))


def exposure_vs_rho_curve(
    curve,
    params,
    netting_set,
    T,
    rho_grid,
    config,
    calibration_swap=None,
    target_vol=None,
    recalibrate=False,
):
    """
    EPE, its standard error and the frozen closed form across terminal correlations.

    With a ``calibration_swap`` the variance level is fitted so that swap has
    normal vol ``target_vol`` (default: its vol under ``params``).  By default
    the fit is done once at ``rho_m = 0`` and the factor variances are then
    held while only the covariance moves.  With ``recalibrate`` the fit is
    repeated at every grid point, so the calibration swap's vol stays on
    target across the sweep.  Every point reuses the same seed.
    """
    params = params.resolve_numeraire(netting_set.last_date)
    if recalibrate and calibration_swap is None:
        raise ConfigurationError("recalibration needs a calibration swap")
    if calibration_swap is not None:
        if target_vol is None:
            target_vol = implied_normal_vol(params, T, calibration_swap, curve)
        if not recalibrate:
            params = calibrate_level(params.with_rho_m(T, 0.0), T, calibration_swap, curve, target_vol).params
    rows = []
    for rho in rho_grid:
        p = params.with_rho_m(T, float(rho))
        if recalibrate:
            p = calibrate_level(p, T, calibration_swap, curve, target_vol).params
        value, se = epe(curve, p, netting_set, T, config)
        rows.append(ExposureRow(float(rho), value, se, spread_option_frozen(curve, p, netting_set, T)))
    return rows


def exposure_csv(rows, path):
    write_csv(path, ["rho_m", "epe", "stderr", "closed_form"], rows)


def cva_flat_hazard(profile, hazard, lgd=1.0):
    """Trapezoidal ``lgd * hazard * int EPE(t) dt`` over the profile grid."""
    if profile.times.size == 0:
        raise ConfigurationError("CVA needs a non-empty exposure profile")
    if hazard < 0.0:
        raise DomainError("hazard rate must be nonnegative")
    if np.any(np.diff(profile.times) <= 0.0):
        raise DomainError("profile times must be increasing")
    if profile.times.size == 1:
        return 0.0
    return float(lgd * hazard * np.trapezoid(profile.epe, profile.times))
