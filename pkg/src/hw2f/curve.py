"""
Initial curve, model parameters and the closed-form bond reconstruction.

The two factors are kept in their driftless form ``X_i(t) = exp(a_i t) x_i(t)``
and all simulation happens under the forward measure of the numeraire bond
maturing at ``S``.  Under that measure ``X`` is a centred Gaussian with
covariance ``[[xi1, xi12], [xi12, xi2]]`` and

    D(t, T) = A(t, T) exp(-B1(t, T) X1(t) - B2(t, T) X2(t))

is arbitrage free: ``D(t, T) / D(t, S)`` is a martingale.
"""

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "DiscountCurve",
    "ConstantSigma",
    "TerminalCovariance",
    "Hw2fParams",
    "FactorState",
    "b_factor",
    "xi_constant_sigma",
    "xi_integrals",
    "log_a_factor",
    "bond",
]

_TIME_TOL = 1e-12


# --------------------------------------------------------------------------
# initial curve
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscountCurve:
    """
    Initial discount curve ``D(0, T)``.

    Build it with :meth:`flat` or :meth:`from_pillars`.  Pillar curves are
    interpolated linearly in ``log D``; the point ``(0, 1)`` is implied and
    the last segment's forward rate is extended beyond the final pillar.
    """

    times: Tuple[float, ...]
    log_dfs: Tuple[float, ...]
    flat_rate: Optional[float] = None
    nonnegative_rates: bool = False

    def __post_init__(self):
        if self.flat_rate is not None:
            if not math.isfinite(self.flat_rate):
                raise ConfigurationError("flat_rate must be finite")
            if self.nonnegative_rates and self.flat_rate < 0.0:
                raise ConfigurationError("negative flat_rate on a curve flagged nonnegative_rates")
            return
        t = np.asarray(self.times, dtype=float)
        lg = np.asarray(self.log_dfs, dtype=float)
        if t.size < 2 or t[0] != 0.0 or lg[0] != 0.0:
            raise ConfigurationError("pillar curve needs at least one pillar beyond (0, 1)")
        if np.any(np.diff(t) <= 0.0):
            raise ConfigurationError("pillar times must be strictly increasing and positive")
        if not np.all(np.isfinite(lg)):
            raise ConfigurationError("discount factors must be strictly positive and finite")
        if self.nonnegative_rates and np.any(np.diff(lg) > 0.0):
            raise ConfigurationError("discount factors increase on a curve flagged nonnegative_rates")

    @classmethod
    def flat(cls, rate, nonnegative_rates=False):
        return cls(times=(), log_dfs=(), flat_rate=float(rate), nonnegative_rates=nonnegative_rates)

    @classmethod
    def from_pillars(cls, pillars, nonnegative_rates=False):
        """``pillars`` is a sequence of ``(time, discount_factor)`` pairs."""
        pts = sorted((float(t), float(d)) for t, d in pillars)
        if any(d <= 0.0 for _, d in pts):
            raise ConfigurationError("discount factors must be strictly positive")
        if any(t < 0.0 for t, _ in pts):
            raise ConfigurationError("pillar times must be nonnegative")
        if pts and pts[0][0] == 0.0:
            if abs(pts[0][1] - 1.0) > 1e-14:
                raise ConfigurationError("D(0, 0) must equal 1")
            pts = pts[1:]
        times = (0.0,) + tuple(t for t, _ in pts)
        logs = (0.0,) + tuple(math.log(d) for _, d in pts)
        return cls(times=times, log_dfs=logs, nonnegative_rates=nonnegative_rates)

    @property
    def pillars(self):
        return [(t, math.exp(lg)) for t, lg in zip(self.times[1:], self.log_dfs[1:])]

    def log_discount(self, T):
        T = np.asarray(T, dtype=float)
        if np.any(T < 0.0):
            raise DomainError("curve queried at negative time")
        if self.flat_rate is not None:
            return -self.flat_rate * T
        t = np.asarray(self.times)
        lg = np.asarray(self.log_dfs)
        out = np.interp(T, t, lg)
        beyond = T > t[-1]
        if np.any(beyond):
            slope = (lg[-1] - lg[-2]) / (t[-1] - t[-2])
            out = np.where(beyond, lg[-1] + slope * (T - t[-1]), out)
        return out

    def discount(self, T):
        """``D(0, T)``; scalar in, float out, array in, array out."""
        out = np.exp(self.log_discount(T))
        return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# parameters
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantSigma:
    """Constant instantaneous volatilities and Brownian correlation."""

    sigma1: float
    sigma2: float
    rho12: float

    def __post_init__(self):
        if self.sigma1 < 0.0 or self.sigma2 < 0.0:
            raise ConfigurationError("volatilities must be nonnegative")
        if not -1.0 <= self.rho12 <= 1.0:
            raise ConfigurationError("rho12 must lie in [-1, 1]")


@dataclass(frozen=True)
class TerminalCovariance:
    """
    Terminal covariance of ``(X1, X2)`` at a single horizon.

    Carries no time profile, so it only answers questions at ``horizon``
    (and trivially at time 0, where both variances vanish).
    """

    horizon: float
    xi1: float
    xi2: float
    rho_m: float

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ConfigurationError("horizon must be positive")
        if self.xi1 < 0.0 or self.xi2 < 0.0:
            raise ConfigurationError("terminal variances must be nonnegative")
        if not -1.0 <= self.rho_m <= 1.0:
            raise ConfigurationError("rho_m must lie in [-1, 1]")

    @classmethod
    def from_vol_ratio(cls, horizon, sqrt_xi1, vol_ratio, rho_m):
        """Build from ``sqrt(xi1)`` and ``sqrt(xi2 / xi1)``, the natural experimental knobs."""
        xi1 = float(sqrt_xi1) ** 2
        return cls(horizon=float(horizon), xi1=xi1, xi2=xi1 * float(vol_ratio) ** 2, rho_m=float(rho_m))


VolSpec = Union[ConstantSigma, TerminalCovariance]


@dataclass(frozen=True)
class Hw2fParams:
    """
    Mean reversions, volatility specification and numeraire maturity.

    ``numeraire_maturity`` may be left as ``None``; simulation routines then
    use the longest cashflow date of the experiment.
    """

    a1: float
    a2: float
    vol: VolSpec
    numeraire_maturity: Optional[float] = None

    def __post_init__(self):
        if not (self.a2 >= 0.0):
            raise ConfigurationError("a2 must be nonnegative")
        if self.a1 == self.a2:
            raise ConfigurationError("a1 == a2 collapses the model to one factor")
        if self.a1 < self.a2:
            raise ConfigurationError("mean reversions must satisfy a1 > a2")
        if not isinstance(self.vol, (ConstantSigma, TerminalCovariance)):
            raise ConfigurationError("vol must be ConstantSigma or TerminalCovariance")
        if self.numeraire_maturity is not None and self.numeraire_maturity <= 0.0:
            raise ConfigurationError("numeraire maturity must be positive")

    def with_numeraire(self, S):
        return replace(self, numeraire_maturity=float(S))

    def resolve_numeraire(self, longest_date):
        """Return params with ``S`` set, defaulting to ``longest_date``."""
        if self.numeraire_maturity is not None:
            return self
        return self.with_numeraire(longest_date)

    def at_horizon(self, T):
        """Equivalent :class:`TerminalCovariance` parameterisation at ``T``."""
        xi1, xi2, xi12 = xi_integrals(self, T)
        return replace(self, vol=TerminalCovariance(T, xi1, xi2, _rho_from(xi1, xi2, xi12)))

    def with_rho_m(self, T, rho_m):
        """Terminal parameterisation at ``T`` with the same variances and a new correlation."""
        base = self.at_horizon(T).vol
        return replace(self, vol=replace(base, rho_m=float(rho_m)))

    def scaled(self, lam):
        """Scale every variance and the covariance by ``lam`` (volatilities by ``sqrt(lam)``)."""
        if lam < 0.0:
            raise DomainError("variance scale must be nonnegative")
        v = self.vol
        if isinstance(v, ConstantSigma):
            s = math.sqrt(lam)
            return replace(self, vol=replace(v, sigma1=v.sigma1 * s, sigma2=v.sigma2 * s))
        return replace(self, vol=replace(v, xi1=v.xi1 * lam, xi2=v.xi2 * lam))


@dataclass(frozen=True)
class FactorState:
    """Driftless Markov states at observation time ``t``."""

    t: float
    x1: float = 0.0
    x2: float = 0.0


def _rho_from(xi1, xi2, xi12):
    if xi1 <= 0.0 or xi2 <= 0.0:
        return 0.0
    return float(np.clip(xi12 / math.sqrt(xi1 * xi2), -1.0, 1.0))


# --------------------------------------------------------------------------
# closed forms
# --------------------------------------------------------------------------

def _expm1_over(c, tau):
    """``(exp(c * tau) - 1) / c``, equal to ``tau`` at ``c == 0`` and accurate for tiny ``c``."""
    x = c * tau
    if abs(x) < 1e-8:
        return tau * (1.0 + x / 2.0 + x * x / 6.0)
    return math.expm1(x) / c


def b_factor(a, t, T):
    """
    ``B(t, T) = int_t^T exp(-a s) ds`` for constant mean reversion ``a``.

    Vectorised over ``T``.  ``a == 0`` returns ``T - t`` exactly.
    """
    if a < 0.0:
        raise DomainError("mean reversion must be nonnegative")
    T = np.asarray(T, dtype=float)
    if np.any(T < t - _TIME_TOL):
        raise DomainError("b_factor needs t <= T")
    tau = np.maximum(T - t, 0.0)
    x = a * tau
    small = x < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        body = np.where(small, tau * (1.0 - x / 2.0 + x * x / 6.0), -np.expm1(-x) / (a if a else 1.0))
    out = math.exp(-a * t) * body
    return float(out) if np.ndim(out) == 0 else out


def _xi_single(a, sigma, T):
    return sigma * sigma * _expm1_over(2.0 * a, T)


def xi_constant_sigma(a1, a2, sigma1, sigma2, rho12, T):
    """
    Terminal variances and covariance of the driftless factors for constant inputs.

    Free function so that limiting cases the parameter class refuses
    (for example ``a1 == a2``) can still be evaluated.
    """
    if T < 0.0:
        raise DomainError("horizon must be nonnegative")
    if a1 < 0.0 or a2 < 0.0:
        raise DomainError("mean reversion must be nonnegative")
    xi1 = _xi_single(a1, sigma1, T)
    xi2 = _xi_single(a2, sigma2, T)
    xi12 = rho12 * sigma1 * sigma2 * _expm1_over(a1 + a2, T)
    # Cauchy-Schwarz holds exactly; enforce it against underflow in xi1 * xi2.
    bound = math.sqrt(xi1 * xi2)
    return xi1, xi2, max(-bound, min(bound, xi12))


def xi_integrals(params, T):
    """Return ``(xi1, xi2, xi12)`` at horizon ``T``."""
    v = params.vol
    if isinstance(v, ConstantSigma):
        return xi_constant_sigma(params.a1, params.a2, v.sigma1, v.sigma2, v.rho12, T)
    if T == 0.0:
        return 0.0, 0.0, 0.0
    if abs(T - v.horizon) > _TIME_TOL:
        raise ConfigurationError(
            f"terminal covariance is specified at horizon {v.horizon}, not at {T}"
        )
    return v.xi1, v.xi2, v.rho_m * math.sqrt(v.xi1 * v.xi2)


def log_a_factor(curve, params, t, T):
    """
    ``log A(t, T)``, vectorised over ``T``.

    The convexity terms are written relative to the numeraire maturity ``S``
    so that ``D(t, T) / D(t, S)`` has the right expectation.
    """
    S = params.numeraire_maturity
    if S is None:
        raise ConfigurationError("bond reconstruction needs params.numeraire_maturity")
    T = np.asarray(T, dtype=float)
    xi1, xi2, xi12 = xi_integrals(params, t)
    b1t = float(_signed_b(params.a1, t, S))
    b2t = float(_signed_b(params.a2, t, S))
    b1T = _signed_b(params.a1, T, S)
    b2T = _signed_b(params.a2, T, S)
    conv = (
        0.5 * (b1t * b1t - b1T * b1T) * xi1
        + 0.5 * (b2t * b2t - b2T * b2T) * xi2
        + (b1t * b2t - b1T * b2T) * xi12
    )
    return curve.log_discount(T) - curve.log_discount(t) + conv


def _signed_b(a, T, S):
    """``B(T, S)`` extended to ``T > S`` as ``-B(S, T)``."""
    T = np.asarray(T, dtype=float)
    lo = np.minimum(T, S)
    hi = np.maximum(T, S)
    mag = b_factor(a, 0.0, hi - lo) * np.exp(-a * lo)
    return np.where(T <= S, mag, -mag)


def bond(curve, params, state, T):
    """
    Discount factor ``D(t, T)`` at the factor state ``state``.

    Maturities past the numeraire date are allowed (the formula stays valid)
    but trigger a warning.
    """
    T_arr = np.asarray(T, dtype=float)
    if np.any(T_arr < state.t - _TIME_TOL):
        raise DomainError("bond maturity precedes the observation time")
    S = params.numeraire_maturity
    if S is not None and np.any(T_arr > S + _TIME_TOL):
        warnings.warn("bond maturity beyond the numeraire maturity", stacklevel=2)
    T_arr = np.maximum(T_arr, state.t)
    log_d = (
        log_a_factor(curve, params, state.t, T_arr)
        - b_factor(params.a1, state.t, T_arr) * state.x1
        - b_factor(params.a2, state.t, T_arr) * state.x2
    )
    out = np.exp(log_d)
    return float(out) if np.ndim(out) == 0 else out
