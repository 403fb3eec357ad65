import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppursuit.errors import ContractError, DegenerateInputError, DimensionError
from ppursuit.indexes import (CumulantIndex, LDAIndex, LogCoshIndex, MeanIndex, Negated, VarianceIndex,
                              cca_index, cumulant_negentropy, get_index, jl_distortion, lda_direction, lda_index,
                              logcosh_gaussian_baseline, logcosh_negentropy, mean_index, random_projection,
                              variance_index)
from ppursuit.info_theory import gaussian_expectation
from ppursuit.linalg import whiten

from conftest import random_spd, with_exact_covariance


def unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


def central_fd(f, a):
    g = np.empty_like(a)
    for i in range(a.size):
        h = 1e-5 * (1 + abs(a[i]))
        e = np.zeros_like(a)
        e[i] = h
        g[i] = (f(a + e) - f(a - e)) / (2 * h)
    return g


def rademacher(n, seed):
    return np.random.default_rng(seed).choice([-1.0, 1.0], n)


class TestVariance:
    X = with_exact_covariance(10**5, np.diag([3.0, 1.0]), seed=0)

    def test_axes(self):
        assert variance_index([1, 0], self.X).value == pytest.approx(3, rel=0.05)
        assert variance_index([0, 1], self.X).value == pytest.approx(1, rel=0.05)

    def test_whitened_any_direction(self, rng):
        Z, _ = whiten(rng.standard_normal((500, 4)) @ rng.standard_normal((4, 4)))
        for _ in range(5):
            assert variance_index(unit(rng, 4), Z).value == pytest.approx(1.0, abs=1e-10)

    def test_gradient_formula(self, rng):
        X = rng.standard_normal((50, 3))
        a = unit(rng, 3)
        np.testing.assert_allclose(variance_index(a, X).gradient, 2 * np.cov(X.T) @ a, rtol=1e-12)

    def test_too_few_rows(self):
        with pytest.raises(DegenerateInputError):
            variance_index([1.0], [[2.0]])

    def test_not_unit(self):
        with pytest.raises(ContractError):
            variance_index([1.0, 1.0], self.X)


class TestMean:
    X = with_exact_covariance(100, np.eye(2), seed=1, mean=[3.0, 4.0])

    def test_argmax_value(self, rng):
        assert mean_index([0.6, 0.8], self.X).value == pytest.approx(5.0, abs=1e-12)
        for _ in range(50):
            assert mean_index(unit(rng, 2), self.X).value <= 5.0 + 1e-12

    def test_minimum(self):
        assert mean_index([-0.6, -0.8], self.X).value == pytest.approx(-5.0, abs=1e-12)

    def test_zero_mean(self, rng):
        X0 = self.X - self.X.mean(axis=0)
        assert abs(mean_index(unit(rng, 2), X0).value) < 1e-12


class TestCumulant:
    def test_gaussian(self):
        z = np.random.default_rng(2).standard_normal(10**6)
        assert cumulant_negentropy(z).value <= 0.001

    def test_rademacher(self):
        assert cumulant_negentropy(rademacher(10**6, 3)).value == pytest.approx(1 / 12, abs=0.005)

    def test_exponential(self):
        z = np.random.default_rng(4).exponential(1.0, 10**6)
        assert cumulant_negentropy(z).value == pytest.approx(4 / 12 + 36 / 48, rel=0.05)

    def test_zero_variance(self):
        with pytest.raises(DegenerateInputError):
            cumulant_negentropy(np.full(10, 2.0))


class TestLogCosh:
    def test_baseline_quadrature_vs_fine_grid(self):
        coarse = logcosh_gaussian_baseline(1.0)
        fine = gaussian_expectation(lambda x: np.log(np.cosh(x)), nodes=20001)
        assert coarse == pytest.approx(fine, abs=1e-12)
        assert coarse == pytest.approx(0.374567, abs=1e-6)

    def test_gaussian(self):
        z = np.random.default_rng(5).standard_normal(10**6)
        assert logcosh_negentropy(z, 1.0).value <= 1e-4

    def test_rademacher(self):
        expected = 0.5 * (math.log(math.cosh(1.0)) - logcosh_gaussian_baseline(1.0)) ** 2
        assert expected == pytest.approx(0.00175, abs=1e-5)
        # a perfectly balanced +-1 sample standardizes to itself, so it hits the population value
        balanced = np.repeat([-1.0, 1.0], 5000)
        assert logcosh_negentropy(balanced).value == pytest.approx(expected, rel=1e-9)
        assert logcosh_negentropy(rademacher(10**6, 6)).value == pytest.approx(expected, rel=0.02)

    def test_even(self, rng):
        z = rng.exponential(size=1000)
        assert logcosh_negentropy(z).value == pytest.approx(logcosh_negentropy(-z).value, rel=1e-12)

    def test_alpha_range(self):
        with pytest.raises(ContractError):
            logcosh_negentropy(np.arange(10.0), alpha=3.0)
        with pytest.raises(ContractError):
            LogCoshIndex(alpha=0.5)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.1, 50), st.booleans(), st.floats(-10, 10))
    def test_affine_invariance(self, seed, scale, flip, shift):
        z = np.random.default_rng(seed).gamma(2.0, size=400)
        s = -scale if flip else scale
        for f in (cumulant_negentropy, logcosh_negentropy):
            assert f(s * z + shift).value == pytest.approx(f(z).value, rel=1e-8, abs=1e-14)


class TestLDA:
    def test_identity_cov(self, rng):
        stats1 = (np.array([3.0, 4.0]), np.eye(2))
        stats2 = (np.zeros(2), np.eye(2))
        assert lda_index([0.6, 0.8], stats1, stats2).value == pytest.approx(25.0)
        for _ in range(50):
            assert lda_index(unit(rng, 2), stats1, stats2).value <= 25.0 + 1e-10

    def test_equal_means(self, rng):
        s = (np.ones(3), np.eye(3))
        assert lda_index(unit(rng, 3), s, s).value == 0

    def test_diag_cov(self):
        S = np.diag([1.0, 4.0])
        val = lda_index([0, 1], (np.array([0.0, 2.0]), S), (np.zeros(2), S)).value
        assert val == pytest.approx(1.0)
        np.testing.assert_allclose(lda_direction([0, 2], [0, 0], S), [0, 1], atol=1e-15)

    def test_direction_examples(self):
        np.testing.assert_allclose(lda_direction([3, 4], [0, 0], np.eye(2)), [0.6, 0.8])
        np.testing.assert_allclose(lda_direction([1, 0], [0, 0], np.eye(2)), [1, 0])

    def test_direction_errors(self):
        with pytest.raises(DegenerateInputError):
            lda_direction([1, 1], [1, 1], np.eye(2))
        with pytest.raises(DegenerateInputError):
            lda_direction([1, 0], [0, 0], np.zeros((2, 2)))
        with pytest.raises(DegenerateInputError):
            lda_index([1, 0], ([1, 0], np.zeros((2, 2))), ([0, 0], np.zeros((2, 2))))


class TestCCA:
    def test_self_and_negation(self, rng):
        X = rng.standard_normal((200, 3))
        a = unit(rng, 3)
        assert cca_index(a, a, X, X).value == pytest.approx(1.0)
        assert cca_index(a, a, X, -X).value == pytest.approx(-1.0)

    def test_independent(self):
        r = np.random.default_rng(7)
        X, Y = r.standard_normal((10**5, 3)), r.standard_normal((10**5, 2))
        assert abs(cca_index(unit(r, 3), unit(r, 2), X, Y).value) < 0.02

    def test_affine_invariance(self, rng):
        X = rng.standard_normal((100, 3))
        Y = X[:, :2] + rng.standard_normal((100, 2))
        a, b = unit(rng, 3), unit(rng, 2)
        base = cca_index(a, b, X, Y).value
        assert cca_index(a, b, 2.5 * X + 7, 0.3 * Y - 1).value == pytest.approx(base, abs=1e-10)

    def test_errors(self, rng):
        X = rng.standard_normal((10, 2))
        with pytest.raises(DimensionError):
            cca_index([1, 0], [1, 0], X, X[:5])
        with pytest.raises(DegenerateInputError):
            cca_index([1, 0], [1, 0], X, np.ones((10, 2)))


class TestJL:
    def test_identity(self, rng):
        X = rng.standard_normal((20, 5))
        dist = jl_distortion(X, X)
        assert dist.sum_abs == 0 and dist.max_relative == 0

    def test_doubling(self, rng):
        X = rng.standard_normal((20, 5))
        assert jl_distortion(X, 2 * X).max_relative == pytest.approx(3.0)

    def test_coincident_pairs_skipped(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        dist = jl_distortion(X, X * 1.5)
        assert dist.skipped_pairs == 1
        assert dist.max_relative == pytest.approx(1.25)

    def test_random_projection_guarantee(self):
        n, d, delta = 100, 1000, 0.5
        r = math.ceil(16 * math.log(n) / delta**2)
        hits = 0
        for seed in range(100):
            X = np.random.default_rng(10_000 + seed).standard_normal((n, d))
            A = random_projection(d, r, seed)
            hits += jl_distortion(X, X @ A.T).max_relative <= delta
        assert hits >= 95

    def test_projection_determinism_and_shape(self):
        np.testing.assert_array_equal(random_projection(10, 3, 9), random_projection(10, 3, 9))
        assert random_projection(1, 1, 4).shape == (1, 1)
        assert random_projection(1, 1, 4)[0, 0] == np.random.default_rng(4).standard_normal()

    def test_column_norms(self):
        A = random_projection(1000, 100, 11)
        sq = np.sum(A * A, axis=0)
        assert np.mean((sq >= 0.5) & (sq <= 1.5)) >= 0.99

    def test_r_exceeds_d(self):
        with pytest.raises(DimensionError):
            random_projection(3, 4, 0)


class TestSymmetry:
    @pytest.mark.parametrize("idx", [VarianceIndex(), CumulantIndex(), LogCoshIndex()])
    def test_even_indexes(self, idx, rng):
        X = rng.exponential(size=(300, 4))
        a = unit(rng, 4)
        assert idx(a, X).value == pytest.approx(idx(-a, X).value, rel=1e-12)

    def test_lda_even(self, rng):
        idx = LDAIndex((rng.standard_normal(3), np.eye(3)), (rng.standard_normal(3), 2 * np.eye(3)))
        a = unit(rng, 3)
        assert idx(a).value == pytest.approx(idx(-a).value)

    def test_mean_odd(self, rng):
        X = rng.standard_normal((30, 3)) + 1
        a = unit(rng, 3)
        assert MeanIndex()(-a, X).value == pytest.approx(-MeanIndex()(a, X).value)


def _gradient_cases():
    cases = []
    for seed in range(20):
        r = np.random.default_rng(seed)
        d = int(r.integers(2, 11))
        X = r.exponential(size=(200, d)) @ r.standard_normal((d, d))
        S1, S2 = random_spd(r, d), random_spd(r, d)
        lda = LDAIndex((r.standard_normal(d), S1), (r.standard_normal(d), S2))
        Y = X[:, :2] + r.standard_normal((200, 2))
        b = unit(r, 2)
        cases.append((seed, unit(r, d), X, lda, Y, b))
    return cases


@pytest.mark.parametrize("seed,a,X,lda,Y,b", _gradient_cases())
def test_gradients_match_finite_differences(seed, a, X, lda, Y, b):
    pairs = [(idx, X) for idx in (VarianceIndex(), MeanIndex(), CumulantIndex(), LogCoshIndex(1.0),
                                  LogCoshIndex(1.7), Negated(CumulantIndex()))]
    pairs.append((lda, X))
    for idx, data in pairs:
        g = idx(a, data).gradient
        fd = central_fd(lambda v: idx(v, data).value, a)
        assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(g) + 1e-12, idx.name
    g = cca_index(a, b, X, Y).gradient
    from ppursuit.indexes import _cca
    fd = central_fd(lambda v: _cca(v, b, X, Y).value, a)
    assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(g)


def test_z_level_gradients(rng):
    z = rng.gamma(2.0, size=300)
    for f in (cumulant_negentropy, logcosh_negentropy):
        g = f(z).gradient
        fd = central_fd(lambda v: f(v).value, z)
        assert np.linalg.norm(g - fd) <= 1e-4 * np.linalg.norm(g)


def test_registry():
    assert isinstance(get_index("logcosh", alpha=1.5), LogCoshIndex)
    with pytest.raises(ValueError, match="logcosh"):
        get_index("nope")
