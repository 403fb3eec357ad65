import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from scipy import stats

from ppursuit.errors import ContractError, DegenerateInputError, DimensionError
from ppursuit.info_theory import (binned_entropy, differential_entropy_hist, discrete_entropy, hermite,
                                  hermite_orthogonality, kl_divergence, ks_to_standard_normal,
                                  mutual_information_binned)

GAUSS_ENTROPY = 0.5 * math.log(2 * math.pi * math.e)


def dist(rng, k):
    p = rng.random(k)
    return p / p.sum()


class TestDiscreteEntropy:
    def test_uniform(self):
        assert discrete_entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)

    def test_point_mass(self):
        assert discrete_entropy([0, 1, 0]) == 0

    def test_hand_value(self):
        assert discrete_entropy([0.5, 0.25, 0.25]) == pytest.approx(0.5 * math.log(2) + 0.5 * math.log(4), abs=1e-12)
        assert discrete_entropy([0.5, 0.25, 0.25]) == pytest.approx(1.0397, abs=1e-4)

    def test_invalid(self):
        with pytest.raises(ContractError):
            discrete_entropy([0.5, 0.6])
        with pytest.raises(ContractError):
            discrete_entropy([-0.1, 1.1])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 30))
    def test_bounds_and_relabeling(self, seed, k):
        r = np.random.default_rng(seed)
        p = dist(r, k)
        h = discrete_entropy(p)
        assert -1e-15 <= h <= math.log(k) + 1e-12
        assert discrete_entropy(p[r.permutation(k)]) == pytest.approx(h, abs=1e-12)


class TestKL:
    def test_equal(self):
        assert kl_divergence([0.2, 0.8], [0.2, 0.8]) == 0

    def test_bernoulli(self):
        expected = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert kl_divergence([0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.1438, abs=1e-4)

    def test_disjoint(self):
        assert kl_divergence([1, 0], [0, 1]) == math.inf

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            kl_divergence([1.0], [0.5, 0.5])

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 20))
    def test_nonnegative_and_joint_permutation(self, seed, k):
        r = np.random.default_rng(seed)
        p, q = dist(r, k), dist(r, k)
        kl = kl_divergence(p, q)
        assert kl >= 0
        perm = r.permutation(k)
        assert abs(kl_divergence(p[perm], q[perm]) - kl) <= 1e-12
        assert kl_divergence(p, p) == 0


class TestDifferentialEntropy:
    def test_uniform(self):
        x = np.random.default_rng(0).random(10**6)
        assert abs(differential_entropy_hist(x)) < 0.02

    def test_gaussian(self):
        x = np.random.default_rng(1).standard_normal(10**6)
        assert differential_entropy_hist(x) == pytest.approx(GAUSS_ENTROPY, abs=0.05)

    @pytest.mark.parametrize("s,b", [(2.0, 0.0), (0.5, 3.0), (-3.0, 1.0)])
    def test_affine_shift_by_log_scale(self, s, b):
        x = np.random.default_rng(2).standard_normal(10**6)
        gap = differential_entropy_hist(s * x + b) - differential_entropy_hist(x)
        assert gap == pytest.approx(math.log(abs(s)), abs=0.05)

    def test_identical_samples(self):
        with pytest.raises(DegenerateInputError):
            differential_entropy_hist([1.0, 1.0, 1.0])

    def test_gaussian_has_max_entropy(self):
        r = np.random.default_rng(3)
        n = 10**6
        samples = {
            "gaussian": r.standard_normal(n),
            "uniform": r.uniform(-math.sqrt(3), math.sqrt(3), n),
            "laplace": r.laplace(0, 1 / math.sqrt(2), n),
            "exponential": r.exponential(1.0, n) - 1.0,
        }
        h = {k: differential_entropy_hist((v - v.mean()) / v.std()) for k, v in samples.items()}
        others = max(v for k, v in h.items() if k != "gaussian")
        assert h["gaussian"] - others > 0.02


class TestHermite:
    def test_h0(self):
        np.testing.assert_array_equal(hermite(0, np.linspace(-3, 3, 7)), 1.0)

    def test_hand_values(self):
        assert hermite(2, 3.0) == 8.0
        assert hermite(3, 2.0) == 2.0

    def test_range_guard(self):
        with pytest.raises(ContractError):
            hermite(21, 0.0)

    def test_derivative_identity(self):
        x = sympy.symbols("x")
        phi = sympy.exp(-x**2 / 2)
        pts = np.linspace(-2.5, 2.5, 11)
        for n in range(5):
            poly = sympy.simplify((-1) ** n * sympy.diff(phi, x, n) / phi)
            f = sympy.lambdify(x, poly, "numpy")
            np.testing.assert_allclose(hermite(n, pts), np.broadcast_to(f(pts), pts.shape), atol=1e-12)

    def test_orthogonality_examples(self):
        assert abs(hermite_orthogonality(1, 2)) < 1e-8
        assert hermite_orthogonality(2, 2) == pytest.approx(2.0, rel=1e-6)
        assert hermite_orthogonality(0, 0) == pytest.approx(1.0, rel=1e-6)


class TestMutualInformation:
    def test_independent(self):
        r = np.random.default_rng(4)
        x, y = r.standard_normal(10**5), r.standard_normal(10**5)
        assert 0 <= mutual_information_binned(x, y, 10) <= 0.01

    def test_self_information(self):
        x = np.random.default_rng(5).standard_normal(5000)
        h = binned_entropy(x, 10)
        assert mutual_information_binned(x, x, 10) == pytest.approx(h, abs=1e-12)
        assert mutual_information_binned(x, -x, 10) == pytest.approx(h, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            mutual_information_binned([1, 2, 3], [1, 2], 2)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.integers(2, 8))
    def test_nonnegative(self, seed, bins):
        r = np.random.default_rng(seed)
        x = r.standard_normal(200)
        y = 0.3 * x + r.standard_normal(200)
        assert mutual_information_binned(x, y, bins) >= -1e-12


class TestKS:
    def test_optimal_placement(self):
        n = 200
        x = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
        assert ks_to_standard_normal(x) <= 0.5 / n + 1e-12

    def test_all_zero(self):
        assert ks_to_standard_normal(np.zeros(20)) == pytest.approx(0.5, abs=1e-15)

    def test_agrees_with_scipy(self, rng):
        x = rng.standard_t(5, 300)
        assert ks_to_standard_normal(x) == pytest.approx(stats.kstest(x, "norm").statistic, abs=1e-12)

    def test_gaussian_draws_small(self):
        n = 10**4
        hits = sum(ks_to_standard_normal(np.random.default_rng(s).standard_normal(n)) < 0.025 for s in range(100))
        assert hits >= 95
