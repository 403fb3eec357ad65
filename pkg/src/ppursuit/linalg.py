"""Dense matrix primitives: covariance, symmetric eigendecomposition, standardization, whitening.

A data matrix is a 2-D float array with observations in rows and features in
columns. Functions here never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ContractError, DegenerateInputError, DimensionError

SYMMETRY_TOL = 1e-10
MAX_CONDITION = 1e12


def as_data_matrix(X: ArrayLike, name: str = "X") -> NDArray[np.float64]:
    """Validate and return ``X`` as a finite 2-D float64 array with at least one row and column."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and one column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = tuple(int(i) for i in np.argwhere(~np.isfinite(arr))[0])
        raise ContractError(f"{name} has a non-finite entry at (row, col) = {bad}")
    return arr


@dataclass(frozen=True)
class SymEigen:
    """Eigenvalues sorted descending; ``eigenvectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.float64]

    def reconstruct(self) -> NDArray[np.float64]:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def covariance(X: ArrayLike) -> NDArray[np.float64]:
    """Sample covariance with the unbiased ``n - 1`` denominator.

    Raises
    ------
    DegenerateInputError
        If ``X`` has fewer than two rows.
    """
    X = as_data_matrix(X)
    n = X.shape[0]
    if n < 2:
        raise DegenerateInputError(f"covariance needs at least 2 rows, got {n}")
    Xc = X - X.mean(axis=0)
    S = Xc.T @ Xc / (n - 1)
    return (S + S.T) / 2


def _check_symmetric(S: NDArray[np.float64]) -> None:
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ContractError("matrix has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 1.0)
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise ContractError(f"matrix is not symmetric (max |S - S^T| = {asym:.3g})")


def _canonical_signs(V: NDArray[np.float64]) -> NDArray[np.float64]:
    # Largest-magnitude entry positive; near-equal magnitudes go to the lowest index.
    V = V.copy()
    mags = np.abs(V)
    for j in range(V.shape[1]):
        col = mags[:, j]
        top = col.max()
        i = int(np.flatnonzero(col >= top * (1 - 1e-12))[0])
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def sym_eigen(S: ArrayLike) -> SymEigen:
    """Full eigendecomposition of a symmetric matrix, eigenvalues descending.

    Eigenvector signs are canonicalized so that the largest-magnitude entry of
    each vector is positive (ties broken by lowest index), which makes the
    output reproducible.
    """
    S = np.asarray(S, dtype=np.float64)
    _check_symmetric(S)
    w, V = np.linalg.eigh((S + S.T) / 2)
    order = np.argsort(w, kind="stable")[::-1]
    return SymEigen(w[order], _canonical_signs(V[:, order]))


def sym_eigvals(S: ArrayLike) -> NDArray[np.float64]:
    """Eigenvalues only, ascending. Cheaper than :func:`sym_eigen` for large spectra."""
    S = np.asarray(S, dtype=np.float64)
    _check_symmetric(S)
    return np.linalg.eigvalsh((S + S.T) / 2)


def standardize(X: ArrayLike) -> NDArray[np.float64]:
    """Center each column and scale it to unit sample variance (``n - 1`` denominator)."""
    X = as_data_matrix(X)
    if X.shape[0] < 2:
        raise DegenerateInputError("standardize needs at least 2 rows")
    mean = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1)
    zero = np.flatnonzero(sd == 0)
    if zero.size:
        raise DegenerateInputError(f"column {int(zero[0])} has zero variance")
    return (X - mean) / sd


def whiten(X: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Symmetric (ZCA) whitening.

    Returns ``(Z, W)`` with ``Z = (X - mean) @ W`` and ``W = Cov(X)^{-1/2}``, so
    that ``covariance(Z)`` is the identity. ``W`` is symmetric.

    Raises
    ------
    DegenerateInputError
        If the covariance is singular or its condition number exceeds 1e12.
        Reduce the data with PCA first in that case.
    """
    X = as_data_matrix(X)
    C = covariance(X)
    eig = sym_eigen(C)
    lam = eig.eigenvalues
    if lam[-1] <= 0 or lam[0] / lam[-1] > MAX_CONDITION:
        raise DegenerateInputError(
            "covariance is rank-deficient or ill-conditioned "
            f"(eigenvalues {lam[0]:.3g} .. {lam[-1]:.3g}); reduce dimension with PCA before whitening"
        )
    V = eig.eigenvectors
    W = (V / np.sqrt(lam)) @ V.T
    W = (W + W.T) / 2
    return (X - X.mean(axis=0)) @ W, W


def pca_whiten(X: ArrayLike, rel_tol: float = 1.0 / MAX_CONDITION) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Whitening in the principal-component basis, dropping null directions.

    Keeps the ``r`` eigen-directions whose variance exceeds ``rel_tol`` times
    the largest. Returns ``(Z, T)`` with ``Z = (X - mean) @ T``, ``T`` of shape
    ``(d, r)`` and ``covariance(Z)`` the ``r x r`` identity. Use this where
    :func:`whiten` refuses a singular covariance, e.g. quantile-normalized
    rows, whose sums are all equal.
    """
    X = as_data_matrix(X)
    eig = sym_eigen(covariance(X))
    lam = eig.eigenvalues
    if lam[0] <= 0:
        raise DegenerateInputError("covariance is zero; every column is constant")
    keep = lam > rel_tol * lam[0]
    T = eig.eigenvectors[:, keep] / np.sqrt(lam[keep])
    return (X - X.mean(axis=0)) @ T, T
