"""
Hot Monte-Carlo kernels.

Two implementations of every kernel live here: a numba version compiled with
``@njit`` and a vectorised numpy version.  The numba path is used when numba
imports cleanly and the environment variable ``HW2F_DISABLE_NUMBA`` is unset
(or ``0``); otherwise the numpy path is used.  Both are exported under
``*_numba`` / ``*_numpy`` names so tests and the benchmark can call either.

Random numbers come from SplitMix64 run in counter mode: draw ``k`` of a
stream keyed by ``seed`` is ``mix(mix(seed + G) + (k + 1) * G)``.  Path ``i``
consumes draws ``2i`` and ``2i + 1`` only, so results never depend on how the
path loop is split across threads.
"""

import os

import numpy as np

__all__ = [
    "USE_NUMBA",
    "normal_pairs",
    "swap_legs",
    "normal_pairs_numpy",
    "swap_legs_numpy",
    "normal_pairs_numba",
    "swap_legs_numba",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi


def _flag_disabled():
    return os.environ.get("HW2F_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


try:
    if _flag_disabled():
        raise ImportError("numba disabled by HW2F_DISABLE_NUMBA")
    import numba
    from numba import njit, prange

    if not os.environ.get("NUMBA_THREADING_LAYER"):
        # Probing an outdated TBB first only produces a warning; try it last.
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


def _stream_key(seed):
    """Map an arbitrary Python int seed onto the uint64 stream key."""
    z = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        return _mix_numpy(np.array([z + _GOLDEN], dtype=np.uint64))[0]


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

def _mix_numpy(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def normal_pairs_numpy(key, n):
    """Return an ``(n, 2)`` array of independent standard normals for stream ``key``."""
    key = np.uint64(key)
    counters = np.arange(1, 2 * n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _mix_numpy(key + counters * _GOLDEN)
    h = h.reshape(n, 2)
    u1 = ((h[:, 0] >> _S11).astype(np.float64) + 0.5) * _TWO_M53
    u2 = (h[:, 1] >> _S11).astype(np.float64) * _TWO_M53
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = _TWO_PI * u2
    out = np.empty((n, 2))
    out[:, 0] = radius * np.cos(angle)
    out[:, 1] = radius * np.sin(angle)
    return out


def swap_legs_numpy(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta):
    """
    Rebuild discount factors on every path and return annuities and par rates.

    ``D[p, j] = exp(log_a[j] - b1[j] * x1[p] - b2[j] * x2[p])`` on the date grid;
    swap ``k`` starts at grid column ``start_idx[k]`` and pays fixed at columns
    ``pay_idx[pay_ptr[k]:pay_ptr[k + 1]]`` with accrual ``delta[k]``.
    Returns ``(annuity, par_rate, discount)``, the first two shaped
    ``(n_paths, n_swaps)``.
    """
    disc = np.exp(log_a[None, :] - np.outer(x1, b1) - np.outer(x2, b2))
    n_swaps = start_idx.shape[0]
    annuity = np.empty((x1.shape[0], n_swaps))
    rate = np.empty((x1.shape[0], n_swaps))
    for k in range(n_swaps):
        cols = pay_idx[pay_ptr[k]:pay_ptr[k + 1]]
        annuity[:, k] = delta[k] * disc[:, cols].sum(axis=1)
        rate[:, k] = (disc[:, start_idx[k]] - disc[:, cols[-1]]) / annuity[:, k]
    return annuity, rate, disc


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, inline="always")
    def _mix_scalar(z):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
        return z ^ (z >> _S31)

    @njit(parallel=True, cache=True)
    def _normal_pairs_nb(key, n):
        out = np.empty((n, 2))
        for i in prange(n):
            c = np.uint64(2 * i + 1)
            h1 = _mix_scalar(key + c * _GOLDEN)
            h2 = _mix_scalar(key + (c + np.uint64(1)) * _GOLDEN)
            u1 = (np.float64(h1 >> _S11) + 0.5) * _TWO_M53
            u2 = np.float64(h2 >> _S11) * _TWO_M53
            radius = np.sqrt(-2.0 * np.log(u1))
            angle = _TWO_PI * u2
            out[i, 0] = radius * np.cos(angle)
            out[i, 1] = radius * np.sin(angle)
        return out

    @njit(parallel=True, cache=True)
    def _swap_legs_nb(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta):
        n = x1.shape[0]
        m = log_a.shape[0]
        n_swaps = start_idx.shape[0]
        annuity = np.empty((n, n_swaps))
        rate = np.empty((n, n_swaps))
        disc = np.empty((n, m))
        for p in prange(n):
            for j in range(m):
                disc[p, j] = np.exp(log_a[j] - b1[j] * x1[p] - b2[j] * x2[p])
            for k in range(n_swaps):
                acc = 0.0
                for q in range(pay_ptr[k], pay_ptr[k + 1]):
                    acc += disc[p, pay_idx[q]]
                acc *= delta[k]
                annuity[p, k] = acc
                last = pay_idx[pay_ptr[k + 1] - 1]
                rate[p, k] = (disc[p, start_idx[k]] - disc[p, last]) / acc
        return annuity, rate, disc

    def normal_pairs_numba(key, n):
        return _normal_pairs_nb(np.uint64(key), int(n))

    def swap_legs_numba(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta):
        return _swap_legs_nb(
            np.ascontiguousarray(x1, dtype=np.float64),
            np.ascontiguousarray(x2, dtype=np.float64),
            np.ascontiguousarray(log_a, dtype=np.float64),
            np.ascontiguousarray(b1, dtype=np.float64),
            np.ascontiguousarray(b2, dtype=np.float64),
            np.ascontiguousarray(start_idx, dtype=np.int64),
            np.ascontiguousarray(pay_ptr, dtype=np.int64),
            np.ascontiguousarray(pay_idx, dtype=np.int64),
            np.ascontiguousarray(delta, dtype=np.float64),
        )

else:
    normal_pairs_numba = None
    swap_legs_numba = None


def normal_pairs(seed, n):
    """Standard normal pairs for paths ``0..n-1`` of the stream keyed by ``seed``."""
    key = _stream_key(seed)
    if USE_NUMBA:
        return normal_pairs_numba(key, n)
    return normal_pairs_numpy(key, n)


def swap_legs(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta):
    if USE_NUMBA:
        return swap_legs_numba(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta)
    return swap_legs_numpy(x1, x2, log_a, b1, b2, start_idx, pay_ptr, pay_idx, delta)
