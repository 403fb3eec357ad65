"""Projection pursuit: maximize an index over the unit sphere.

The optimizer is projected-gradient ascent with a backtracking (Armijo) line
search and renormalization after every step. Several random starts are run per
direction and the best one wins. Further directions are found by deflation:
each new direction is constrained to the orthogonal complement of the previous
ones.

Data preparation depends on the index (``index.prep``): entropy-type indexes
get whitened data, the variance index centered data, and the mean and LDA
indexes the raw data. :func:`prepare` applies that mapping.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ContractError, DimensionError, PursuitError
from .indexes import PREP_CENTER, PREP_NONE, PREP_WHITEN, IndexValue, ProjectionIndex, normalize
from .linalg import as_data_matrix, covariance, pca_whiten, sym_eigen, whiten

logger = logging.getLogger(__name__)

FD_WARN_DIM = 200
MAX_STEP = 1e12

ANALYTIC = "analytic-if-available"
FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class PursuitConfig:
    restarts: int = 16
    max_iters: int = 500
    step_init: float = 1.0
    tol: float = 1e-7
    seed: int = 0
    gradient_mode: str = ANALYTIC
    armijo: float = 1e-4
    max_halvings: int = 60

    def __post_init__(self):
        if self.restarts < 1:
            raise ContractError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ContractError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ContractError("tol must be positive")
        if not self.step_init > 0:
            raise ContractError("step_init must be positive")
        if self.gradient_mode not in (ANALYTIC, FINITE_DIFFERENCE):
            raise ContractError(f"gradient_mode must be {ANALYTIC!r} or {FINITE_DIFFERENCE!r}")


@dataclass
class RestartTrace:
    """Iteration log of one restart. ``records`` holds ``(iteration, value, step)`` per accepted step."""

    restart: int
    initial_value: float = math.nan
    final_value: float = math.nan
    records: list[tuple[int, float, float]] = field(default_factory=list)
    converged: bool = False
    error: str | None = None


@dataclass
class DirectionResult:
    direction: NDArray[np.float64]
    value: float
    traces: list[RestartTrace]
    chosen_restart: int


@dataclass
class PursuitResult:
    directions: NDArray[np.float64]  # k x d, orthonormal rows
    values: NDArray[np.float64]
    traces: list[list[RestartTrace]]
    chosen_restart: list[int]


def finite_difference_gradient(index: ProjectionIndex, a: NDArray[np.float64], X: NDArray[np.float64]) -> NDArray[np.float64]:
    """Central differences with step ``1e-5 * (1 + |a_i|)`` per coordinate."""
    g = np.empty_like(a)
    for i in range(a.size):
        h = 1e-5 * (1.0 + abs(a[i]))
        e = np.zeros_like(a)
        e[i] = h
        g[i] = (index(a + e, X).value - index(a - e, X).value) / (2 * h)
    return g


def _orthonormal_basis(orthogonal_to: Sequence[ArrayLike] | NDArray, d: int) -> NDArray[np.float64]:
    if orthogonal_to is None or len(orthogonal_to) == 0:
        return np.zeros((0, d))
    B = np.atleast_2d(np.asarray(orthogonal_to, dtype=np.float64))
    if B.shape[1] != d:
        raise DimensionError(f"constraint directions have length {B.shape[1]}, data has {d} columns")
    if not np.allclose(B @ B.T, np.eye(B.shape[0]), atol=1e-8):
        raise ContractError("orthogonal_to directions must be orthonormal")
    return B


def _deflate(v: NDArray[np.float64], B: NDArray[np.float64]) -> NDArray[np.float64]:
    # two Gram-Schmidt passes keep |<v, b>| at rounding level
    for _ in range(2):
        if B.shape[0]:
            v = v - B.T @ (B @ v)
    return v


class _Objective:
    def __init__(self, index: ProjectionIndex, X: NDArray[np.float64], mode: str):
        self.index = index
        self.X = X
        self.use_fd = mode == FINITE_DIFFERENCE or not index.has_gradient

    def full(self, a: NDArray[np.float64]) -> tuple[float, NDArray[np.float64]]:
        if self.use_fd:
            return self.index(a, self.X).value, finite_difference_gradient(self.index, a, self.X)
        r: IndexValue = self.index(a, self.X)
        if r.gradient is None:
            return r.value, finite_difference_gradient(self.index, a, self.X)
        return r.value, np.asarray(r.gradient, dtype=np.float64)

    def candidate(self, a: NDArray[np.float64]):
        # returns (value, gradient or None); the gradient is reused if the step is accepted
        if self.use_fd:
            return self.index(a, self.X).value, None
        r = self.index(a, self.X)
        return r.value, r.gradient


def _initial_direction(rng: np.random.Generator, B: NDArray[np.float64], d: int) -> NDArray[np.float64]:
    for _ in range(100):
        v = _deflate(rng.standard_normal(d), B)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            return v / nrm
    raise ContractError("no room left in the orthogonal complement")


def _ascend(obj: _Objective, a: NDArray[np.float64], B: NDArray[np.float64], cfg: PursuitConfig,
            trace: RestartTrace) -> tuple[NDArray[np.float64], float]:
    val, grad = obj.full(a)
    trace.initial_value = val
    if not math.isfinite(val):
        raise FloatingPointError("index is not finite at the starting direction")
    step = cfg.step_init
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = grad - (grad @ a) * a
        g = _deflate(g, B)
        gnorm2 = float(g @ g)
        if gnorm2 == 0.0:
            trace.converged = True
            break
        t = min(step * 2.0 if it > 1 else step, MAX_STEP)
        accepted = None
        for _ in range(cfg.max_halvings):
            cand = _deflate(a + t * g, B)
            cand /= np.linalg.norm(cand)
            cval, cgrad = obj.candidate(cand)
            if cval >= val + cfg.armijo * t * gnorm2:
                accepted = (cand, cval, cgrad)
                break
            t /= 2.0
        if accepted is None:
            # no ascent step at working precision: stationary
            trace.converged = True
            break
        # The retraction can make an overlong step land on a mirror image of
        # the iterate with nearly equal value; keep halving while it pays.
        while True:
            half = _deflate(a + 0.5 * t * g, B)
            half /= np.linalg.norm(half)
            hval, hgrad = obj.candidate(half)
            if not hval > accepted[1]:
                break
            accepted = (half, hval, hgrad)
            t /= 2.0
        cand, cval, cgrad = accepted
        change = float(np.linalg.norm(cand - a))
        step = t
        a, val = cand, cval
        grad = obj.full(a)[1] if cgrad is None else np.asarray(cgrad, dtype=np.float64)
        trace.records.append((it, val, t))
        if change < cfg.tol:
            trace.converged = True
            break
    else:
        logger.debug("restart %d hit max_iters=%d", trace.restart, cfg.max_iters)
    trace.final_value = val
    return a, val


def pursue_one(X: ArrayLike, index: ProjectionIndex, orthogonal_to: Sequence[ArrayLike] | None = None,
               cfg: PursuitConfig | None = None, direction_id: int = 0) -> DirectionResult:
    """Find one unit direction maximizing ``index``, orthogonal to ``orthogonal_to``.

    ``X`` should already be prepared for the index (see :func:`prepare`).
    Each restart starts from a uniform random point on the sphere drawn from
    its own stream ``(seed, direction_id, restart)``, so adding restarts does
    not change earlier ones. The best final value wins; ties go to the lowest
    restart number.

    Raises
    ------
    PursuitError
        If every restart fails. Failures of individual restarts are logged
        and recorded in their trace.
    """
    cfg = cfg or PursuitConfig()
    X = as_data_matrix(X)
    d = X.shape[1]
    B = _orthonormal_basis(orthogonal_to, d)
    if B.shape[0] >= d:
        raise DimensionError(f"{B.shape[0]} constraints leave no free direction in {d} dimensions")
    obj = _Objective(index, X, cfg.gradient_mode)
    if obj.use_fd and d > FD_WARN_DIM:
        warnings.warn(f"finite-difference gradients in d={d} cost {2 * d} index evaluations per step",
                      RuntimeWarning, stacklevel=2)

    traces: list[RestartTrace] = []
    best: tuple[int, NDArray[np.float64], float] | None = None
    first_error: BaseException | None = None
    for r in range(cfg.restarts):
        trace = RestartTrace(restart=r)
        traces.append(trace)
        rng = np.random.default_rng([cfg.seed, direction_id, r])
        try:
            a0 = _initial_direction(rng, B, d)
            a, val = _ascend(obj, a0, B, cfg, trace)
        except Exception as exc:  # noqa: BLE001 - recorded, re-raised if all restarts fail
            last_iter = trace.records[-1][0] if trace.records else 0
            trace.error = f"restart {r}, iteration {last_iter}: {type(exc).__name__}: {exc}"
            logger.warning("index %s: %s", index.name, trace.error)
            first_error = first_error or exc
            continue
        if best is None or val > best[2]:
            best = (r, a, val)
    if best is None:
        msg = traces[0].error if traces else "no restarts"
        raise PursuitError(f"all {cfg.restarts} restarts failed for index {index.name!r}; first: {msg}") from first_error
    r, a, val = best
    return DirectionResult(a, val, traces, r)


def pursue_k(X: ArrayLike, index: ProjectionIndex, k: int, cfg: PursuitConfig | None = None,
             max_k: int | None = 3) -> PursuitResult:
    """Find ``k`` orthonormal directions by sequential deflation.

    Direction ``j`` maximizes the index subject to orthogonality with
    directions ``0..j-1``. ``k`` is capped at ``min(d, max_k)``; pass
    ``max_k=None`` to allow up to ``d``.
    """
    cfg = cfg or PursuitConfig()
    X = as_data_matrix(X)
    d = X.shape[1]
    limit = d if max_k is None else min(d, max_k)
    if not 1 <= k <= limit:
        raise DimensionError(f"k={k} must be in [1, {limit}] (d={d})")
    dirs: list[NDArray[np.float64]] = []
    values, traces, chosen = [], [], []
    for j in range(k):
        res = pursue_one(X, index, dirs, cfg, direction_id=j)
        dirs.append(res.direction)
        values.append(res.value)
        traces.append(res.traces)
        chosen.append(res.chosen_restart)
    return PursuitResult(np.vstack(dirs), np.asarray(values), traces, chosen)


def pca(X: ArrayLike, k: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Top-``k`` principal axes (rows) and their variances, descending."""
    X = as_data_matrix(X)
    d = X.shape[1]
    if not 1 <= k <= d:
        raise DimensionError(f"k={k} must be in [1, {d}]")
    eig = sym_eigen(covariance(X))
    return eig.eigenvectors[:, :k].T.copy(), eig.eigenvalues[:k].copy()


def embed(X: ArrayLike, A: ArrayLike) -> NDArray[np.float64]:
    """Project the rows of ``X`` onto the rows of ``A``: ``Z = X @ A.T``."""
    X = as_data_matrix(X)
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.shape[1] != X.shape[1]:
        raise DimensionError(f"projection has {A.shape[1]} columns, data has {X.shape[1]}")
    return X @ A.T


@dataclass(frozen=True)
class PreparedData:
    """Data as handed to the optimizer, plus what is needed to map directions back."""

    data: NDArray[np.float64]
    mean: NDArray[np.float64]
    transform: NDArray[np.float64] | None = None  # d x r whitening matrix, if whitened

    def input_space_directions(self, A: ArrayLike) -> NDArray[np.float64]:
        """Unit directions in the original coordinates giving the same 1-D projections (up to scale)."""
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        if self.transform is None:
            return A.copy()
        return np.vstack([normalize(self.transform @ a) for a in A])


def prepare(X: ArrayLike, index: ProjectionIndex, reduce: bool = False) -> PreparedData:
    """Apply the preparation ``index.prep`` asks for.

    With ``reduce=True`` whitening goes through :func:`~ppursuit.linalg.pca_whiten`,
    so a singular covariance loses its null directions instead of raising;
    the optimizer then works in the reduced ``r``-dimensional space.
    """
    X = as_data_matrix(X)
    mean = X.mean(axis=0)
    if index.prep == PREP_WHITEN:
        Z, W = pca_whiten(X) if reduce else whiten(X)
        return PreparedData(Z, mean, W)
    if index.prep == PREP_CENTER:
        return PreparedData(X - mean, mean)
    if index.prep == PREP_NONE:
        return PreparedData(X, np.zeros_like(mean))
    raise ContractError(f"unknown preparation {index.prep!r}")
