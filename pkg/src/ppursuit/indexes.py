"""Projection indexes.

Two layers live here. The functions (``variance_index``, ``cumulant_negentropy``,
...) compute one index value, plus its gradient where that is cheap. The
classes wrap them in the common ``index(a, X) -> IndexValue`` form that the
optimizer in :mod:`ppursuit.pursuit` consumes, with the gradient taken with
respect to the direction ``a``.

The entropy-type indexes standardize the projected samples internally, using
plug-in moments, so they are unchanged by affine maps ``z -> s*z + b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial.distance import pdist

from .errors import ContractError, DegenerateInputError, DimensionError
from .info_theory import gaussian_expectation
from .linalg import as_data_matrix, covariance

UNIT_TOL = 1e-10
ALPHA_RANGE = (1.0, 2.0)


@dataclass(frozen=True)
class IndexValue:
    """An index value and, optionally, its gradient (before any projection onto the sphere)."""

    value: float
    gradient: NDArray[np.float64] | None = None


def as_direction(a: ArrayLike, d: int | None = None) -> NDArray[np.float64]:
    """Check that ``a`` is a unit vector (to 1e-10), optionally of length ``d``."""
    a = np.asarray(a, dtype=np.float64).ravel()
    if d is not None and a.size != d:
        raise DimensionError(f"direction has length {a.size}, data has {d} columns")
    if abs(np.linalg.norm(a) - 1.0) > UNIT_TOL:
        raise ContractError(f"direction is not unit length (norm {np.linalg.norm(a):.12g})")
    return a


def normalize(v: ArrayLike) -> NDArray[np.float64]:
    v = np.asarray(v, dtype=np.float64).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise DegenerateInputError("cannot normalize the zero vector")
    return v / nrm


# ---------------------------------------------------------------------------
# value-level indexes
# ---------------------------------------------------------------------------


def _variance(a: NDArray[np.float64], X: NDArray[np.float64]) -> IndexValue:
    n = X.shape[0]
    if n < 2:
        raise DegenerateInputError("variance index needs at least 2 rows")
    z = X @ a
    zc = z - z.mean()
    # X' zc equals Xc' zc because zc sums to zero
    return IndexValue(float(zc @ zc) / (n - 1), (2.0 / (n - 1)) * (X.T @ zc))


def variance_index(a: ArrayLike, X: ArrayLike) -> IndexValue:
    """Sample variance of ``X @ a`` (``n - 1`` denominator); gradient ``2 Cov(X) a``."""
    X = as_data_matrix(X)
    return _variance(as_direction(a, X.shape[1]), X)


def _mean(a: NDArray[np.float64], X: NDArray[np.float64]) -> IndexValue:
    xbar = X.mean(axis=0)
    return IndexValue(float(a @ xbar), xbar)


def mean_index(a: ArrayLike, X: ArrayLike) -> IndexValue:
    """Mean of the projection, ``a . xbar``; gradient ``xbar``. Maximized at ``xbar / |xbar|``."""
    X = as_data_matrix(X)
    return _mean(as_direction(a, X.shape[1]), X)


def _standardize_1d(z: ArrayLike) -> tuple[NDArray[np.float64], float]:
    z = np.asarray(z, dtype=np.float64).ravel()
    if z.size < 2:
        raise DegenerateInputError("need at least 2 projected samples")
    u = z - z.mean()
    s = math.sqrt(float(np.mean(u * u)))
    if s == 0 or s <= 1e-14 * max(1.0, float(np.max(np.abs(z)))):
        raise DegenerateInputError("projected samples have zero variance")
    return u / s, s


def _unstandardize_grad(g_u: NDArray[np.float64], u: NDArray[np.float64], s: float) -> NDArray[np.float64]:
    # d/dz of f((z - mean z) / std z), with the 1/n standard deviation
    return (g_u - g_u.mean() - u * np.mean(g_u * u)) / s


def sample_cumulants(z: ArrayLike) -> tuple[float, float]:
    """Plug-in third and fourth cumulants (skewness, excess kurtosis) of standardized ``z``."""
    u, _ = _standardize_1d(z)
    u2 = u * u
    return float(np.mean(u2 * u)), float(np.mean(u2 * u2) - 3.0)


def cumulant_negentropy(z: ArrayLike) -> IndexValue:
    """Negentropy approximation ``k3**2 / 12 + k4**2 / 48``.

    ``z`` is standardized internally before taking plug-in cumulants. The
    gradient is with respect to the raw ``z``.
    """
    u, s = _standardize_1d(z)
    n = u.size
    u2 = u * u
    k3 = float(np.mean(u2 * u))
    k4 = float(np.mean(u2 * u2) - 3.0)
    g_u = (k3 / 2.0) * u2 / n + (k4 / 6.0) * u2 * u / n
    return IndexValue(k3 * k3 / 12.0 + k4 * k4 / 48.0, _unstandardize_grad(g_u, u, s))


def logcosh(x: ArrayLike, alpha: float = 1.0) -> NDArray[np.float64]:
    """``log(cosh(alpha * x)) / alpha`` without overflow."""
    ax = alpha * np.asarray(x, dtype=np.float64)
    return (np.logaddexp(ax, -ax) - math.log(2.0)) / alpha


@lru_cache(maxsize=64)
def logcosh_gaussian_baseline(alpha: float = 1.0) -> float:
    """``E[log cosh(alpha v) / alpha]`` for ``v ~ N(0, 1)``, by quadrature."""
    return gaussian_expectation(lambda x: logcosh(x, alpha))


def _check_alpha(alpha: float) -> float:
    lo, hi = ALPHA_RANGE
    if not lo <= alpha <= hi:
        raise ContractError(f"alpha must be in [{lo}, {hi}], got {alpha}")
    return float(alpha)


def logcosh_negentropy(z: ArrayLike, alpha: float = 1.0) -> IndexValue:
    """Negentropy approximation ``0.5 * (mean G(u) - E G(v))**2`` with ``G = log cosh(alpha .)/alpha``.

    ``u`` is the standardized ``z`` and ``v`` a standard normal, so the index
    is close to zero for Gaussian samples.
    """
    alpha = _check_alpha(alpha)
    u, s = _standardize_1d(z)
    diff = float(np.mean(logcosh(u, alpha))) - logcosh_gaussian_baseline(alpha)
    g_u = diff * np.tanh(alpha * u) / u.size
    return IndexValue(0.5 * diff * diff, _unstandardize_grad(g_u, u, s))


def pooled_covariance(cov1: ArrayLike, cov2: ArrayLike) -> NDArray[np.float64]:
    return (np.asarray(cov1, dtype=np.float64) + np.asarray(cov2, dtype=np.float64)) / 2.0


def _check_pd(sigma: NDArray[np.float64]) -> None:
    sigma = np.asarray(sigma, dtype=np.float64)
    try:
        np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise DegenerateInputError("covariance is singular or not positive definite") from None


def _lda(a: NDArray[np.float64], diff: NDArray[np.float64], sigma: NDArray[np.float64]) -> IndexValue:
    num = float(a @ diff)
    Sa = sigma @ a
    den = float(a @ Sa)
    value = num * num / den
    grad = 2.0 * num / den * diff - 2.0 * value / den * Sa
    return IndexValue(value, grad)


def _lda_terms(stats1, stats2) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    mu1, cov1 = stats1
    mu2, cov2 = stats2
    diff = np.asarray(mu1, dtype=np.float64) - np.asarray(mu2, dtype=np.float64)
    sigma = pooled_covariance(cov1, cov2)
    if sigma.shape != (diff.size, diff.size):
        raise DimensionError(f"covariance shape {sigma.shape} does not match mean length {diff.size}")
    _check_pd(sigma)
    return diff, sigma


def lda_index(a: ArrayLike, stats1: tuple[ArrayLike, ArrayLike], stats2: tuple[ArrayLike, ArrayLike]) -> IndexValue:
    """Fisher discriminant ratio ``(a . (mu1 - mu2))**2 / (a' Sigma a)``.

    ``stats1`` and ``stats2`` are ``(mean, cov)`` pairs; ``Sigma`` is their
    pooled average.
    """
    diff, sigma = _lda_terms(stats1, stats2)
    return _lda(as_direction(a, diff.size), diff, sigma)


def lda_direction(mu1: ArrayLike, mu2: ArrayLike, sigma: ArrayLike) -> NDArray[np.float64]:
    """Closed-form Fisher direction ``Sigma^{-1}(mu1 - mu2)``, normalized."""
    diff = np.asarray(mu1, dtype=np.float64) - np.asarray(mu2, dtype=np.float64)
    if not np.any(diff):
        raise DegenerateInputError("class means are equal; no discriminant direction")
    sigma = np.asarray(sigma, dtype=np.float64)
    _check_pd(sigma)
    return normalize(np.linalg.solve(sigma, diff))


def _cca(a, b, X, Y) -> IndexValue:
    p = X @ a
    q = Y @ b
    p = p - p.mean()
    q = q - q.mean()
    sp = math.sqrt(float(p @ p))
    sq = math.sqrt(float(q @ q))
    if sp == 0 or sq == 0:
        raise DegenerateInputError("a projection has zero variance")
    r = float(p @ q) / (sp * sq)
    grad = X.T @ (q / (sp * sq) - r * p / (sp * sp))
    return IndexValue(min(1.0, max(-1.0, r)), grad)


def cca_index(a: ArrayLike, b: ArrayLike, X: ArrayLike, Y: ArrayLike) -> IndexValue:
    """Pearson correlation of ``X @ a`` and ``Y @ b``.

    The gradient is with respect to ``a`` only, holding ``b`` fixed.
    """
    X = as_data_matrix(X, "X")
    Y = as_data_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise DimensionError(f"row counts differ: {X.shape[0]} vs {Y.shape[0]}")
    return _cca(as_direction(a, X.shape[1]), as_direction(b, Y.shape[1]), X, Y)


@dataclass(frozen=True)
class Distortion:
    """Pairwise squared-distance distortion between two embeddings of the same points."""

    sum_abs: float
    max_relative: float
    skipped_pairs: int = 0


def jl_distortion(X: ArrayLike, Z: ArrayLike) -> Distortion:
    """Distortion of squared pairwise distances from ``X`` to ``Z``.

    ``sum_abs`` sums ``| |z_i - z_j|^2 - |x_i - x_j|^2 |`` over unordered pairs;
    ``max_relative`` is the largest ``| |z_i - z_j|^2 / |x_i - x_j|^2 - 1 |``.
    Pairs with coincident ``x`` points are left out of the relative figure and
    counted in ``skipped_pairs``.
    """
    X = as_data_matrix(X, "X")
    Z = as_data_matrix(Z, "Z")
    if X.shape[0] != Z.shape[0]:
        raise DimensionError(f"row counts differ: {X.shape[0]} vs {Z.shape[0]}")
    if X.shape[0] < 2:
        return Distortion(0.0, 0.0, 0)
    dx = pdist(X, "sqeuclidean")
    dz = pdist(Z, "sqeuclidean")
    sum_abs = float(np.sum(np.abs(dz - dx)))
    ok = dx > 0
    rel = np.abs(dz[ok] / dx[ok] - 1.0)
    return Distortion(sum_abs, float(rel.max()) if rel.size else 0.0, int(np.count_nonzero(~ok)))


def random_projection(d: int, r: int, seed: int) -> NDArray[np.float64]:
    """``r x d`` Gaussian random projection, entries ``N(0, 1) / sqrt(r)``."""
    if not 1 <= r <= d:
        raise DimensionError(f"target dimension r={r} must be in [1, d={d}]")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((r, d)) / math.sqrt(r)


# ---------------------------------------------------------------------------
# direction-level indexes for the optimizer
# ---------------------------------------------------------------------------

# How the optimizer prepares data for each index family.
PREP_NONE = "none"
PREP_CENTER = "center"
PREP_WHITEN = "whiten"


class ProjectionIndex:
    """Base class: ``index(a, X)`` returns an :class:`IndexValue` with gradient in ``a``.

    Subclasses set ``name``, ``prep`` (``"none"``, ``"center"`` or
    ``"whiten"``) and ``has_gradient``.
    """

    name = "index"
    prep = PREP_NONE
    has_gradient = True

    def __call__(self, a: NDArray[np.float64], X: NDArray[np.float64]) -> IndexValue:
        raise NotImplementedError

    def value(self, a: NDArray[np.float64], X: NDArray[np.float64]) -> float:
        return self(a, X).value


class VarianceIndex(ProjectionIndex):
    name = "variance"
    prep = PREP_CENTER

    def __call__(self, a, X):
        return _variance(np.asarray(a, dtype=np.float64), np.asarray(X, dtype=np.float64))


class MeanIndex(ProjectionIndex):
    name = "mean"
    prep = PREP_NONE

    def __call__(self, a, X):
        return _mean(np.asarray(a, dtype=np.float64), np.asarray(X, dtype=np.float64))


class _ProjectedIndex(ProjectionIndex):
    """Index defined on the projected samples ``z = X @ a``; the chain rule gives the ``a``-gradient."""

    prep = PREP_WHITEN

    def _on_projection(self, z: NDArray[np.float64]) -> IndexValue:
        raise NotImplementedError

    def __call__(self, a, X):
        X = np.asarray(X, dtype=np.float64)
        a = np.asarray(a, dtype=np.float64)
        res = self._on_projection(X @ a)
        return IndexValue(res.value, X.T @ res.gradient)


class CumulantIndex(_ProjectedIndex):
    name = "cumulant"

    def _on_projection(self, z):
        return cumulant_negentropy(z)


@dataclass
class LogCoshIndex(_ProjectedIndex):
    alpha: float = 1.0
    name: str = field(default="logcosh", init=False)

    def __post_init__(self):
        _check_alpha(self.alpha)

    def _on_projection(self, z):
        return logcosh_negentropy(z, self.alpha)


class LDAIndex(ProjectionIndex):
    """Fisher ratio for fixed class statistics; the data argument is ignored."""

    name = "lda"
    prep = PREP_NONE

    def __init__(self, stats1, stats2):
        self.diff, self.sigma = _lda_terms(stats1, stats2)

    @classmethod
    def from_samples(cls, X1: ArrayLike, X2: ArrayLike) -> "LDAIndex":
        X1 = as_data_matrix(X1, "X1")
        X2 = as_data_matrix(X2, "X2")
        return cls((X1.mean(axis=0), covariance(X1)), (X2.mean(axis=0), covariance(X2)))

    def __call__(self, a, X=None):
        return _lda(np.asarray(a, dtype=np.float64), self.diff, self.sigma)


class Negated(ProjectionIndex):
    """Turns minimization of ``inner`` into maximization."""

    def __init__(self, inner: ProjectionIndex):
        self.inner = inner
        self.name = f"-{inner.name}"
        self.prep = inner.prep
        self.has_gradient = inner.has_gradient

    def __call__(self, a, X):
        r = self.inner(a, X)
        return IndexValue(-r.value, None if r.gradient is None else -r.gradient)


class FunctionIndex(ProjectionIndex):
    """Adapts a plain ``f(a, X) -> float`` (no gradient) to the index protocol."""

    has_gradient = False

    def __init__(self, f: Callable[[NDArray, NDArray], float], name: str = "custom", prep: str = PREP_NONE):
        self.f = f
        self.name = name
        self.prep = prep

    def __call__(self, a, X):
        return IndexValue(float(self.f(a, X)), None)


INDEXES: dict[str, Callable[..., ProjectionIndex]] = {
    "logcosh": LogCoshIndex,
    "cumulant": CumulantIndex,
    "variance": VarianceIndex,
    "mean": MeanIndex,
}


def get_index(name: str, **kwargs) -> ProjectionIndex:
    try:
        factory = INDEXES[name]
    except KeyError:
        raise ValueError(f"unknown index {name!r}; choose from {', '.join(INDEXES)}") from None
    return factory(**kwargs)
