import hashlib
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from hw2f import kernels

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba backend unavailable")


def legs_inputs(n=5000):
    rng = np.random.default_rng(0)
    grid = 10.0 + 0.25 * np.arange(41)
    b1 = (np.exp(-0.1 * 10) - np.exp(-0.1 * grid)) / 0.1
    b2 = (np.exp(-0.01 * 10) - np.exp(-0.01 * grid)) / 0.01
    log_a = -0.02 * (grid - 10.0)
    start_idx = np.array([0, 0], dtype=np.int64)
    pay_ptr = np.array([0, 8, 48], dtype=np.int64)
    pay_idx = np.concatenate([np.arange(1, 9), np.arange(1, 41)]).astype(np.int64)
    delta = np.array([0.25, 0.25])
    return (0.05 * rng.standard_normal(n), 0.015 * rng.standard_normal(n), log_a, b1, b2,
            start_idx, pay_ptr, pay_idx, delta)


def test_counter_mode_prefix():
    key = kernels._stream_key(42)
    full = kernels.normal_pairs_numpy(key, 1000)
    np.testing.assert_array_equal(full[:10], kernels.normal_pairs_numpy(key, 10))


def test_seeds_give_different_streams():
    assert not np.array_equal(kernels.normal_pairs(1, 100), kernels.normal_pairs(2, 100))


def test_large_and_negative_seeds():
    a = kernels.normal_pairs(-1, 10)
    b = kernels.normal_pairs(2 ** 64 - 1, 10)
    np.testing.assert_array_equal(a, b)
    assert np.all(np.isfinite(kernels.normal_pairs(2 ** 70 + 3, 10)))


def test_draws_are_standard_normal():
    z = kernels.normal_pairs(11, 200_000)
    for col in (z[:, 0], z[:, 1]):
        assert stats.kstest(col, "norm").pvalue > 1e-3
    assert abs(np.corrcoef(z.T)[0, 1]) < 4.0 / np.sqrt(200_000)


def test_swap_legs_numpy_matches_direct_formula():
    args = legs_inputs(50)
    x1, x2, log_a, b1, b2 = args[:5]
    annuity, rate, disc = kernels.swap_legs_numpy(*args)
    p = 7
    d = np.exp(log_a - b1 * x1[p] - b2 * x2[p])
    np.testing.assert_allclose(disc[p], d, rtol=1e-15)
    assert annuity[p, 0] == pytest.approx(0.25 * d[1:9].sum(), rel=1e-14)
    assert rate[p, 1] == pytest.approx((d[0] - d[40]) / (0.25 * d[1:41].sum()), rel=1e-14)


@needs_numba
def test_backends_agree_on_normals():
    key = kernels._stream_key(5)
    np.testing.assert_allclose(kernels.normal_pairs_numba(key, 10_000), kernels.normal_pairs_numpy(key, 10_000),
                               rtol=0, atol=1e-13)


@needs_numba
def test_backends_agree_on_swap_legs():
    args = legs_inputs()
    for a, b in zip(kernels.swap_legs_numba(*args), kernels.swap_legs_numpy(*args)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-15)


def _digest_in_subprocess(env_extra):
    code = (
        "import hashlib, numpy as np\n"
        "from hw2f import DiscountCurve, SwapSpec, McConfig, simulate_swaps, kernels\n"
        "from hw2f import Hw2fParams, TerminalCovariance\n"
        "p = Hw2fParams(0.1, 0.01, TerminalCovariance.from_vol_ratio(10, 0.02, 0.3, -0.9))\n"
        "v = simulate_swaps(DiscountCurve.flat(0.02), p, [SwapSpec(10, 12), SwapSpec(10, 20)], 10.0,"
        " McConfig(20000, 3))\n"
        "print(kernels.USE_NUMBA, hashlib.sha256(v.rate.tobytes() + v.annuity.tobytes()).hexdigest())\n"
    )
    env = dict(os.environ, **env_extra)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return out.stdout.split()


@needs_numba
def test_bitwise_independent_of_thread_count():
    one = _digest_in_subprocess({"NUMBA_NUM_THREADS": "1"})
    four = _digest_in_subprocess({"NUMBA_NUM_THREADS": "4"})
    assert one[0] == four[0] == "True"
    assert one[1] == four[1]


def test_env_flag_selects_numpy():
    flag, _ = _digest_in_subprocess({"HW2F_DISABLE_NUMBA": "1"})
    assert flag == "False"
