"""
Exact terminal sampling of the driftless factors and path-wise swap rates.

Every observable in the experiments depends on ``(X1(T_n), X2(T_n))`` only,
and that pair is exactly bivariate normal under the numeraire measure, so no
time stepping is involved.  Swap rates on each path come from the full bond
reconstruction, not from the compounded-forward proxy used analytically.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._io import write_csv
from .curve import FactorState, b_factor, log_a_factor, xi_integrals
from .errors import ConfigurationError, DegenerateCorrelationError, DomainError

__all__ = [
    "McConfig",
    "FactorSample",
    "McResult",
    "PathValuation",
    "sample_factors",
    "simulate_swaps",
    "simulate_swap_pair",
    "pearson",
    "fisher_stderr",
    "scatter_csv",
]

_KEY_DIGITS = 9


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.n_paths < 1:
            raise ConfigurationError("n_paths must be positive")


@dataclass(frozen=True)
class FactorSample:
    """Terminal states of all paths at time ``t``, stored column-wise."""

    t: float
    x1: np.ndarray
    x2: np.ndarray

    def __len__(self):
        return self.x1.shape[0]

    def __getitem__(self, i):
        return FactorState(self.t, float(self.x1[i]), float(self.x2[i]))


@dataclass(frozen=True)
class McResult:
    short_rates: np.ndarray
    long_rates: np.ndarray
    correlation: float
    stderr: float
    rho_m: float
    seed: int

    @property
    def n_paths(self):
        return self.short_rates.shape[0]


@dataclass(frozen=True)
class PathValuation:
    """Per-path annuities, par rates and numeraire bond for a list of swaps."""

    sample: FactorSample
    annuity: np.ndarray
    rate: np.ndarray
    numeraire: np.ndarray
    numeraire_maturity: float


def sample_factors(params, T_n, config):
    """Draw ``config.n_paths`` i.i.d. states from ``N(0, [[xi1, xi12], [xi12, xi2]])``."""
    xi1, xi2, xi12 = xi_integrals(params, T_n)
    if xi12 * xi12 > xi1 * xi2 * (1.0 + 1e-12) + 1e-300:
        raise DomainError("factor covariance is not positive semidefinite")
    z = kernels.normal_pairs(config.seed, config.n_paths)
    s1, s2 = math.sqrt(xi1), math.sqrt(xi2)
    rho = xi12 / (s1 * s2) if s1 > 0.0 and s2 > 0.0 else 0.0
    rho = min(1.0, max(-1.0, rho))
    x1 = s1 * z[:, 0]
    if abs(rho) == 1.0 and s1 > 0.0:
        x2 = (rho * (s2 / s1)) * x1
    else:
        x2 = s2 * (rho * z[:, 0] + math.sqrt(1.0 - rho * rho) * z[:, 1])
    return FactorSample(float(T_n), x1, x2)


def _date_key(t):
    return round(float(t), _KEY_DIGITS)


def simulate_swaps(curve, params, specs, T_n, config, sample=None):
    """
    Value every swap in ``specs`` on each path at ``T_n``.

    ``params.numeraire_maturity`` defaults to the latest end date.  Swaps must
    start on or after ``T_n``.
    """
    if not specs:
        raise ConfigurationError("no swaps to simulate")
    for s in specs:
        if s.start < T_n - 1e-9:
            raise DomainError(f"swap starting at {s.start} has already started at {T_n}")
    params = params.resolve_numeraire(max(s.end for s in specs))
    S = params.numeraire_maturity
    if T_n > S + 1e-9:
        raise DomainError("observation date is after the numeraire maturity")
    if sample is None:
        sample = sample_factors(params, T_n, config)

    dates = {_date_key(S): S}
    for s in specs:
        dates[_date_key(s.start)] = s.start
        for d in s.payment_dates:
            dates.setdefault(_date_key(d), float(d))
    keys = sorted(dates)
    index = {k: i for i, k in enumerate(keys)}
    grid = np.array([max(dates[k], T_n) for k in keys])

    log_a = np.asarray(log_a_factor(curve, params, T_n, grid), dtype=float)
    b1 = np.asarray(b_factor(params.a1, T_n, grid), dtype=float)
    b2 = np.asarray(b_factor(params.a2, T_n, grid), dtype=float)

    start_idx = np.array([index[_date_key(s.start)] for s in specs], dtype=np.int64)
    pay_lists = [[index[_date_key(d)] for d in s.payment_dates] for s in specs]
    pay_ptr = np.zeros(len(specs) + 1, dtype=np.int64)
    pay_ptr[1:] = np.cumsum([len(p) for p in pay_lists])
    pay_idx = np.array([i for p in pay_lists for i in p], dtype=np.int64)
    delta = np.array([s.delta for s in specs], dtype=float)

    annuity, rate, disc = kernels.swap_legs(
        sample.x1, sample.x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta
    )
    numeraire = disc[:, index[_date_key(S)]].copy()
    return PathValuation(sample, annuity, rate, numeraire, S)


def pearson(xs, ys):
    """Sample Pearson correlation; raises on a constant series."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DomainError("pearson needs two 1-d series of equal length")
    if x.shape[0] < 2:
        raise DomainError("pearson needs at least two observations")
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise DegenerateCorrelationError("constant series has no correlation")
    dx = x - x.mean()
    dy = y - y.mean()
    norm = math.sqrt(float(np.dot(dx, dx))) * math.sqrt(float(np.dot(dy, dy)))
    if norm == 0.0:
        raise DegenerateCorrelationError("constant series has no correlation")
    r = float(np.dot(dx, dy)) / norm
    return min(1.0, max(-1.0, r))


def fisher_stderr(r, n):
    """Delta-method standard error of a sample correlation via Fisher's z."""
    if n <= 3:
        return math.nan
    return (1.0 - r * r) / math.sqrt(n - 3)


def simulate_swap_pair(curve, params, spec_short, spec_long, config):
    """Monte-Carlo terminal rates of two co-initial swaps and their correlation."""
    if abs(spec_short.start - spec_long.start) > 1e-9:
        raise DomainError("swap pair must be co-initial")
    T_n = spec_short.start
    val = simulate_swaps(curve, params, [spec_short, spec_long], T_n, config)
    short, long_ = val.rate[:, 0].copy(), val.rate[:, 1].copy()
    r = pearson(short, long_)
    xi1, xi2, xi12 = xi_integrals(params, T_n)
    rho_m = xi12 / math.sqrt(xi1 * xi2) if xi1 > 0.0 and xi2 > 0.0 else 0.0
    return McResult(short, long_, r, fisher_stderr(r, short.shape[0]), rho_m, config.seed)


def scatter_csv(result, path):
    """Write ``path_index,short_rate,long_rate`` with the run summary as comment lines."""
    comments = [
        f"rho_m={result.rho_m:.12g}",
        f"rho_swap={result.correlation:.12g}",
        f"seed={result.seed}",
        f"n_paths={result.n_paths}",
    ]
    rows = ((i, s, l) for i, (s, l) in enumerate(zip(result.short_rates, result.long_rates)))
    write_csv(path, ["path_index", "short_rate", "long_rate"], rows, comments)
