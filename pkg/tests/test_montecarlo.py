import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hw2f import (
    ConfigurationError,
    DegenerateCorrelationError,
    DiscountCurve,
    DomainError,
    FactorSample,
    FactorState,
    Hw2fParams,
    McConfig,
    SwapSpec,
    TerminalCovariance,
    bond,
    fisher_stderr,
    par_rate,
    pearson,
    sample_factors,
    scatter_csv,
    simulate_swap_pair,
    simulate_swaps,
    swap_correlation,
)
from hw2f.curve import ConstantSigma

from conftest import terminal


class TestConfig:
    def test_paths_positive(self):
        with pytest.raises(ConfigurationError):
            McConfig(0)


class TestSampling:
    def test_second_factor_off(self):
        p = Hw2fParams(0.5, 0.01, TerminalCovariance(2.0, 1e-4, 0.0, 0.3))
        s = sample_factors(p, 2.0, McConfig(1000, 1))
        assert np.all(s.x2 == 0.0)

    def test_identical_factors(self):
        p = Hw2fParams(0.5, 0.01, TerminalCovariance(2.0, 1e-4, 1e-4, 1.0))
        s = sample_factors(p, 2.0, McConfig(1000, 1))
        np.testing.assert_array_equal(s.x1, s.x2)

    def test_anti_correlated_rank_one(self):
        p = Hw2fParams(0.5, 0.01, TerminalCovariance(2.0, 4e-4, 1e-4, -1.0))
        s = sample_factors(p, 2.0, McConfig(100, 1))
        np.testing.assert_array_equal(s.x2, -0.5 * s.x1)

    def test_moments_at_one_million_paths(self):
        p = Hw2fParams(0.5, 0.01, ConstantSigma(0.01, 0.008, -0.6))
        s = sample_factors(p, 3.0, McConfig(1_000_000, 9))
        from hw2f import xi_integrals

        xi1, xi2, xi12 = xi_integrals(p, 3.0)
        n = len(s)
        # standard errors of Gaussian sample second moments
        se11 = xi1 * math.sqrt(2.0 / n)
        se22 = xi2 * math.sqrt(2.0 / n)
        se12 = math.sqrt((xi1 * xi2 + xi12 ** 2) / n)
        assert abs(np.mean(s.x1 ** 2) - xi1) < 4 * se11
        assert abs(np.mean(s.x2 ** 2) - xi2) < 4 * se22
        assert abs(np.mean(s.x1 * s.x2) - xi12) < 4 * se12

    def test_deterministic(self):
        p = terminal(0.5, 0.01, 2.0, 0.02, 0.3, -0.2)
        a = sample_factors(p, 2.0, McConfig(500, 3))
        b = sample_factors(p, 2.0, McConfig(500, 3))
        np.testing.assert_array_equal(a.x1, b.x1)
        np.testing.assert_array_equal(a.x2, b.x2)

    def test_path_independent_of_path_count(self):
        p = terminal(0.5, 0.01, 2.0, 0.02, 0.3, -0.2)
        a = sample_factors(p, 2.0, McConfig(50, 3))
        b = sample_factors(p, 2.0, McConfig(5000, 3))
        np.testing.assert_array_equal(a.x1, b.x1[:50])

    def test_sample_indexing(self):
        s = FactorSample(2.0, np.array([0.1, 0.2]), np.array([0.3, 0.4]))
        assert len(s) == 2
        assert s[1] == FactorState(2.0, 0.2, 0.4)


class TestSimulateSwaps:
    def test_matches_scalar_bond_reconstruction(self, pillar_curve):
        p = terminal(0.5, 0.01, 3.0, 0.02, 0.3, -0.4, 15.0)
        specs = [SwapSpec(3.0, 5.0, 0.5), SwapSpec(4.0, 15.0, 1.0)]
        val = simulate_swaps(pillar_curve, p, specs, 3.0, McConfig(20, 4))
        for i in (0, 7, 19):
            st_ = val.sample[i]
            for k, s in enumerate(specs):
                assert val.rate[i, k] == pytest.approx(par_rate(pillar_curve, s, p, st_), rel=1e-12)
            assert val.numeraire[i] == pytest.approx(bond(pillar_curve, p, st_, 15.0), rel=1e-12)

    def test_default_numeraire_is_last_date(self, flat2):
        val = simulate_swaps(flat2, terminal(0.5, 0.01, 2.0, 0.02, 0.3, 0.0), [SwapSpec(2, 7)], 2.0, McConfig(5))
        assert val.numeraire_maturity == 7.0

    def test_started_swap_rejected(self, flat2):
        with pytest.raises(DomainError):
            simulate_swaps(flat2, terminal(0.5, 0.01, 2.0, 0.02, 0.3, 0.0), [SwapSpec(1, 7)], 2.0, McConfig(5))

    def test_observation_after_numeraire(self, flat2):
        p = terminal(0.5, 0.01, 2.0, 0.02, 0.3, 0.0, 1.5)
        with pytest.raises(DomainError):
            simulate_swaps(flat2, p, [SwapSpec(2, 3)], 2.0, McConfig(5))

    @pytest.mark.parametrize("rho", [-0.9, 0.0, 0.9])
    def test_martingale_on_samples(self, flat2, rho):
        p = terminal(0.5, 0.01, 10.0, 0.02, 0.3, rho, 20.0)
        s = SwapSpec(10.0, 20.0, 1.0)
        val = simulate_swaps(flat2, p, [s], 10.0, McConfig(100_000, 21))
        # annuity / numeraire has expectation A(0) / D(0, S)
        ratio = val.annuity[:, 0] / val.numeraire
        se = ratio.std(ddof=1) / math.sqrt(ratio.size)
        from hw2f import annuity

        assert abs(ratio.mean() - annuity(flat2, s) / flat2.discount(20.0)) < 3 * se


class TestPearson:
    def test_identity_and_mirror(self):
        x = np.array([1.0, 3.0, 2.0, 7.0])
        assert pearson(x, x) == 1.0
        assert pearson(x, -x) == -1.0

    def test_hand_computed(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        y = [2.0, 4.0, 5.0, 4.0, 5.0]
        # sxy = 6, sxx = 10, syy = 6
        assert pearson(x, y) == pytest.approx(6.0 / math.sqrt(60.0), rel=1e-15)

    @settings(deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=30), st.floats(0.1, 10.0), st.floats(-5.0, 5.0))
    def test_affine_invariance_and_symmetry(self, xs, scale, shift):
        x = np.array(xs)
        y = np.sin(x) + 0.1 * x
        try:
            r = pearson(x, y)
        except DegenerateCorrelationError:
            return
        assert pearson(y, x) == pytest.approx(r, abs=1e-12)
        if np.ptp(scale * x + shift) > 1e-9 * np.ptp(x) and np.ptp(x) > 1e-6:
            assert pearson(scale * x + shift, y) == pytest.approx(r, abs=1e-9)

    def test_constant_series(self):
        with pytest.raises(DegenerateCorrelationError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    @pytest.mark.parametrize("x,y", [([1.0], [2.0]), ([1.0, 2.0], [1.0, 2.0, 3.0])])
    def test_shape_errors(self, x, y):
        with pytest.raises(DomainError):
            pearson(x, y)

    def test_fisher_stderr(self):
        assert fisher_stderr(0.5, 103) == pytest.approx(0.075, rel=1e-14)
        assert math.isnan(fisher_stderr(0.5, 3))


class TestSwapPair:
    def test_zero_vol_degenerate(self, flat2):
        p = Hw2fParams(0.5, 0.01, TerminalCovariance(2.0, 0.0, 0.0, 0.0))
        with pytest.raises(DegenerateCorrelationError):
            simulate_swap_pair(flat2, p, SwapSpec(2, 3), SwapSpec(2, 7), McConfig(100, 1))

    def test_not_coinitial(self, flat2):
        with pytest.raises(DomainError):
            simulate_swap_pair(flat2, terminal(0.5, 0.01, 2.0, 0.02, 0.3, 0.0), SwapSpec(2, 3), SwapSpec(3, 7),
                               McConfig(100, 1))

    def test_region_ii_near_minus_one_negative(self, flat2, region_ii_pair):
        T_n, s, l = region_ii_pair
        res = simulate_swap_pair(flat2, terminal(0.1, 0.01, T_n, 0.02, 0.3, -0.999), s, l, McConfig(1000, 7))
        assert res.correlation < 0.0
        assert res.stderr > 0.0 and res.n_paths == 1000

    @pytest.mark.parametrize("rho", [-0.9, -0.5, 0.0, 0.5, 0.9, 1.0])
    def test_agrees_with_analytic(self, flat2, region_ii_pair, rho):
        T_n, s, l = region_ii_pair
        p = terminal(0.1, 0.01, T_n, 0.02, 0.3, rho)
        res = simulate_swap_pair(flat2, p, s, l, McConfig(100_000, 2))
        assert abs(res.correlation - swap_correlation(p, T_n, s, l, flat2)) < 0.05
        assert res.rho_m == pytest.approx(rho, abs=1e-12)


class TestScatterCsv:
    def run(self, flat2, tmp_path, name, n=3, seed=5, rho=-0.999, ratio=0.3):
        p = terminal(0.1, 0.01, 10.0, 0.02, ratio, rho)
        res = simulate_swap_pair(flat2, p, SwapSpec(10, 12), SwapSpec(10, 20), McConfig(n, seed))
        path = tmp_path / name
        scatter_csv(res, path)
        return res, path

    def test_layout(self, flat2, tmp_path):
        res, path = self.run(flat2, tmp_path, "a.csv")
        lines = path.read_text().split("\n")
        assert lines[:4] == [
            "# rho_m=-0.999",
            f"# rho_swap={res.correlation:.12g}",
            "# seed=5",
            "# n_paths=3",
        ]
        assert lines[4] == "path_index,short_rate,long_rate"
        assert len([l for l in lines[5:] if l]) == 3
        assert lines[5].startswith("0,")
        assert b"\r" not in path.read_bytes()

    def test_byte_identical_rerun(self, flat2, tmp_path):
        _, a = self.run(flat2, tmp_path, "a.csv", n=500)
        _, b = self.run(flat2, tmp_path, "b.csv", n=500)
        assert a.read_bytes() == b.read_bytes()

    def test_slope_sign_by_region(self, flat2, tmp_path):
        res_ii, _ = self.run(flat2, tmp_path, "ii.csv", n=2000, rho=-0.99999999, ratio=0.3)
        res_iii, _ = self.run(flat2, tmp_path, "iii.csv", n=2000, rho=-0.99999999, ratio=0.2)
        slope = lambda r: np.polyfit(r.short_rates, r.long_rates, 1)[0]
        assert slope(res_ii) < 0.0 < slope(res_iii)

    def test_io_error_surfaces(self, flat2, tmp_path):
        p = terminal(0.1, 0.01, 10.0, 0.02, 0.3, 0.0)
        res = simulate_swap_pair(flat2, p, SwapSpec(10, 12), SwapSpec(10, 20), McConfig(3, 1))
        with pytest.raises(OSError):
            scatter_csv(res, tmp_path / "missing" / "x.csv")
