"""Entropy, KL divergence, Hermite polynomials, binned mutual information and a Gaussianity distance.

All logarithms are natural, so entropies are in nats. Differential entropy
and mutual information are plug-in estimates over equal-width histograms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import ndtr

from .errors import ContractError, DegenerateInputError, DimensionError

PROB_TOL = 1e-12
MAX_HERMITE_DEGREE = 20
MAX_AUTO_BINS = 512

# quadrature grid for expectations under the standard normal
QUAD_LIMIT = 12.0
QUAD_NODES = 4001


def as_distribution(p: ArrayLike, name: str = "p") -> NDArray[np.float64]:
    """Validate a discrete probability vector: nonnegative entries summing to 1 within 1e-12."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ContractError(f"{name} must be a non-empty 1-D vector")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ContractError(f"{name} has negative or non-finite entries")
    if abs(p.sum() - 1.0) > PROB_TOL * max(1, p.size):
        raise ContractError(f"{name} sums to {p.sum()!r}, not 1")
    return p


@dataclass(frozen=True)
class Histogram:
    edges: NDArray[np.float64]
    counts: NDArray[np.int64]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def widths(self) -> NDArray[np.float64]:
        return np.diff(self.edges)

    def probabilities(self) -> NDArray[np.float64]:
        return self.counts / self.total


def auto_bins(n: int) -> int:
    return min(math.ceil(math.sqrt(n)), MAX_AUTO_BINS)


def _bin_index(x: NDArray[np.float64], lo: float, hi: float, bins: int) -> NDArray[np.intp]:
    idx = np.floor((x - lo) / (hi - lo) * bins).astype(np.intp)
    return np.clip(idx, 0, bins - 1)


def histogram(samples: ArrayLike, bins: int | str = "auto") -> Histogram:
    """Equal-width histogram over ``[min, max]`` of the samples."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size < 2:
        raise DegenerateInputError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ContractError("samples must be finite")
    k = auto_bins(x.size) if bins == "auto" else int(bins)
    if k < 1:
        raise ContractError(f"bin count must be positive, got {bins}")
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise DegenerateInputError("all samples are identical; histogram has zero width")
    counts = np.bincount(_bin_index(x, lo, hi, k), minlength=k)
    return Histogram(np.linspace(lo, hi, k + 1), counts.astype(np.int64))


def discrete_entropy(p: ArrayLike) -> float:
    """Shannon entropy ``-sum p log p`` in nats, with ``0 log 0 = 0``."""
    p = as_distribution(p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def kl_divergence(p: ArrayLike, q: ArrayLike) -> float:
    """``KL(p || q)`` in nats; ``inf`` when ``q`` is zero somewhere ``p`` is not."""
    p = as_distribution(p, "p")
    q = as_distribution(q, "q")
    if p.shape != q.shape:
        raise DimensionError(f"support lengths differ: {p.size} vs {q.size}")
    mask = p > 0
    if np.any(q[mask] == 0):
        return math.inf
    val = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
    return max(val, 0.0)


def differential_entropy_hist(samples: ArrayLike, bin_count: int | str = "auto") -> float:
    """Histogram plug-in estimate of differential entropy in nats.

    Entropy of the bin-probability vector plus ``log`` of the bin width, over
    equal-width bins spanning ``[min, max]``. ``bin_count="auto"`` uses
    ``ceil(sqrt(n))`` capped at 512.
    """
    h = histogram(samples, bin_count)
    p = h.probabilities()
    nz = p[p > 0]
    width = (h.edges[-1] - h.edges[0]) / h.counts.size
    return float(-np.sum(nz * np.log(nz)) + math.log(width))


def hermite(n: int, x: ArrayLike) -> NDArray[np.float64] | float:
    """Probabilists' Hermite polynomial ``He_n(x)`` via ``H_{k+1} = x H_k - k H_{k-1}``."""
    if not 0 <= n <= MAX_HERMITE_DEGREE or int(n) != n:
        raise ContractError(f"Hermite degree must be an integer in [0, {MAX_HERMITE_DEGREE}], got {n}")
    xa = np.asarray(x, dtype=np.float64)
    prev, cur = np.ones_like(xa), xa.copy()
    if n == 0:
        out = prev
    else:
        for k in range(1, n):
            prev, cur = cur, xa * cur - k * prev
        out = cur
    return float(out) if out.ndim == 0 else out


def normal_grid(nodes: int = QUAD_NODES, limit: float = QUAD_LIMIT) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes on ``[-limit, limit]`` and composite Simpson weights already multiplied by the N(0,1) density."""
    if nodes % 2 == 0:
        nodes += 1
    x = np.linspace(-limit, limit, nodes)
    h = x[1] - x[0]
    w = np.full(nodes, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    w *= h / 3
    return x, w * np.exp(-x * x / 2) / math.sqrt(2 * math.pi)


def gaussian_expectation(f, nodes: int = QUAD_NODES) -> float:
    """``E[f(v)]`` for ``v ~ N(0, 1)`` by Simpson quadrature on ``[-12, 12]``."""
    x, w = normal_grid(nodes)
    return float(np.dot(w, f(x)))


def hermite_orthogonality(n: int, m: int) -> float:
    """Quadrature value of the Gaussian inner product of ``He_n`` and ``He_m`` (expected ``n! * [n == m]``)."""
    if max(n, m) > 10 or min(n, m) < 0:
        raise ContractError("degrees must be in [0, 10]")
    return gaussian_expectation(lambda x: hermite(n, x) * hermite(m, x))


def mutual_information_binned(x: ArrayLike, y: ArrayLike, bins: int = 10) -> float:
    """Plug-in mutual information (nats) of the joint equal-width 2-D histogram.

    Each marginal is binned over its own ``[min, max]``. The estimate is biased
    upward for small samples; roughly ``5 * bins**2`` samples keep it useful.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise DimensionError(f"length mismatch: {x.size} vs {y.size}")
    if bins < 1:
        raise ContractError("bins must be positive")
    for name, v in (("x", x), ("y", y)):
        if v.size < 2 or v.min() == v.max():
            raise DegenerateInputError(f"{name} is constant")
    ix = _bin_index(x, x.min(), x.max(), bins)
    iy = _bin_index(y, y.min(), y.max(), bins)
    joint = np.bincount(ix * bins + iy, minlength=bins * bins).reshape(bins, bins) / x.size
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    r, c = np.nonzero(joint)
    pj = joint[r, c]
    mi = float(np.sum(pj * (np.log(pj) - np.log(px[r]) - np.log(py[c]))))
    return max(mi, 0.0)


def binned_entropy(x: ArrayLike, bins: int) -> float:
    """Entropy of the equal-width binning used by :func:`mutual_information_binned`."""
    x = np.asarray(x, dtype=np.float64).ravel()
    counts = np.bincount(_bin_index(x, x.min(), x.max(), bins), minlength=bins)
    return discrete_entropy(counts / x.size)


def ks_to_standard_normal(samples: ArrayLike) -> float:
    """Kolmogorov-Smirnov distance ``sup_t |F_n(t) - Phi(t)|``.

    Evaluated at the sorted sample points using both one-sided gaps. Used as
    a computable stand-in for the Levy-Prohorov distance to the Gaussian.
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise DegenerateInputError("no samples")
    cdf = ndtr(x)
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - cdf)
    d_minus = np.max(cdf - (i - 1) / n)
    return float(max(d_plus, d_minus))
