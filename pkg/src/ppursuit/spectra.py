"""Marcenko-Pastur spectra and random-projection Gaussianity experiments.

Only the aspect-ratio regime ``0 < gamma <= 1`` is supported for density
comparisons: for ``gamma > 1`` the limit has an extra point mass at zero that
the continuous density below does not describe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate

from .errors import ContractError, DimensionError
from .info_theory import ks_to_standard_normal
from .linalg import sym_eigvals

MAX_CELLS = 10**8
ESD_BINS = 64


@dataclass(frozen=True)
class MPParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ContractError(f"gamma must be positive, got {self.gamma}")

    @property
    def b_minus(self) -> float:
        return (1 - math.sqrt(self.gamma)) ** 2

    @property
    def b_plus(self) -> float:
        return (1 + math.sqrt(self.gamma)) ** 2


@dataclass(frozen=True)
class SpectralSample:
    eigenvalues: NDArray[np.float64]  # ascending
    n: int
    d: int
    seed: int

    @property
    def gamma(self) -> float:
        return self.d / self.n


def mp_density(k: ArrayLike, gamma: float) -> NDArray[np.float64] | float:
    """Marcenko-Pastur density ``sqrt((b+ - k)(k - b-)) / (2 pi gamma k)`` on ``[b-, b+]``, zero elsewhere."""
    p = MPParams(gamma)
    k_arr = np.asarray(k, dtype=np.float64)
    inside = (k_arr > p.b_minus) & (k_arr < p.b_plus) & (k_arr > 0)
    out = np.zeros_like(k_arr)
    kk = k_arr[inside]
    out[inside] = np.sqrt((p.b_plus - kk) * (kk - p.b_minus)) / (2 * math.pi * gamma * kk)
    return float(out) if out.ndim == 0 else out


def _mp_mass(gamma: float, lo: float, hi: float) -> float:
    # substitute k = c - r cos(theta) on [b-, b+]; the integrand becomes smooth
    # even at gamma = 1, where the density blows up at k = 0
    p = MPParams(gamma)
    c = (p.b_plus + p.b_minus) / 2
    r = (p.b_plus - p.b_minus) / 2
    lo = max(lo, p.b_minus)
    hi = min(hi, p.b_plus)
    if hi <= lo:
        return 0.0
    th_lo = math.acos(min(1.0, max(-1.0, (c - lo) / r)))
    th_hi = math.acos(min(1.0, max(-1.0, (c - hi) / r)))

    def f(th):
        s = math.sin(th)
        k = c - r * math.cos(th)
        if k <= 0:
            # limit of r^2 sin^2 / k as k -> 0, only reachable when gamma == 1
            return r * (1 + math.cos(th)) / (2 * math.pi * gamma)
        return r * r * s * s / (2 * math.pi * gamma * k)

    val, _ = integrate.quad(f, th_lo, th_hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def mp_total_mass(gamma: float) -> float:
    """Integral of :func:`mp_density` over its support (1 for ``gamma <= 1``)."""
    if not 0 < gamma <= 1:
        raise ContractError(f"gamma must be in (0, 1], got {gamma}")
    p = MPParams(gamma)
    return _mp_mass(gamma, p.b_minus, p.b_plus)


def mp_cdf(k: float, gamma: float) -> float:
    p = MPParams(gamma)
    return _mp_mass(gamma, p.b_minus, k)


def simulate_wishart_esd(n: int, d: int, seed: int) -> SpectralSample:
    """Eigenvalues of ``X'X / n`` for an ``n x d`` matrix of i.i.d. standard normals."""
    if not (n >= d >= 1):
        raise DimensionError(f"need n >= d >= 1, got n={n}, d={d}")
    if n * d > MAX_CELLS:
        raise DimensionError(f"n*d = {n * d} exceeds the {MAX_CELLS:.0e} size guard")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    S = X.T @ X / n
    return SpectralSample(np.sort(sym_eigvals(S)), n, d, seed)


def esd_vs_mp_distance(sample: SpectralSample) -> float:
    """L1 distance between the eigenvalue histogram density and the MP density.

    Uses 64 equal bins over ``[0, 1.1 * b+]``; the MP side is the density
    averaged over each bin.
    """
    gamma = sample.gamma
    if not 0 < gamma <= 1:
        raise ContractError(f"gamma = d/n must be in (0, 1], got {gamma}")
    p = MPParams(gamma)
    edges = np.linspace(0.0, 1.1 * p.b_plus, ESD_BINS + 1)
    width = edges[1] - edges[0]
    lam = np.asarray(sample.eigenvalues)
    counts, _ = np.histogram(lam, bins=edges)
    emp = counts / (lam.size * width)
    cdf = np.array([_mp_mass(gamma, p.b_minus, e) for e in edges])
    theo = np.diff(cdf) / width
    # eigenvalues beyond the window count as pure excess mass
    outside = np.count_nonzero((lam < edges[0]) | (lam > edges[-1])) / lam.size
    return float(np.sum(np.abs(emp - theo)) * width + outside)


def uniform_marginals(rng: np.random.Generator, n: int, d: int) -> NDArray[np.float64]:
    """i.i.d. Uniform(-sqrt 3, sqrt 3) coordinates: mean 0, variance 1, not Gaussian."""
    s = math.sqrt(3.0)
    return rng.uniform(-s, s, size=(n, d))


def random_unit_vectors(rng: np.random.Generator, m: int, d: int) -> NDArray[np.float64]:
    """``m`` directions uniform on the sphere (normalized Gaussian draws), one per row."""
    G = rng.standard_normal((m, d))
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def df_projection_experiment(n: int, d: int, m_directions: int, seed: int,
                             generator: Callable[[np.random.Generator, int, int], NDArray] = uniform_marginals
                             ) -> NDArray[np.float64]:
    """KS distances to N(0, 1) of ``m_directions`` random 1-D projections of one dataset.

    The data (``n`` points in ``d`` dimensions) come from ``generator``; each
    projection is standardized before the KS statistic is taken.
    """
    if n < 2 or d < 1 or m_directions < 1:
        raise DimensionError(f"need n >= 2, d >= 1, m >= 1; got n={n}, d={d}, m={m_directions}")
    if n * d > MAX_CELLS:
        raise DimensionError(f"n*d = {n * d} exceeds the {MAX_CELLS:.0e} size guard")
    data_rng, dir_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2))
    X = generator(data_rng, n, d)
    Z = X @ random_unit_vectors(dir_rng, m_directions, d).T
    Z = (Z - Z.mean(axis=0)) / Z.std(axis=0)
    return np.array([ks_to_standard_normal(Z[:, j]) for j in range(m_directions)])
