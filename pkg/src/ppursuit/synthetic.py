"""Synthetic data where PCA and projection pursuit disagree.

Two balanced Gaussian clusters ``N(-s u, I)`` and ``N(+s u, I)`` (default
``s = 4``), plus extra spread along a direction ``v`` orthogonal to ``u`` whose
standard deviation is ``spread`` times the unit noise (default 10). The top
variance direction is then ``v``, while the cluster structure lives along
``u``. This is a stand-in construction, not a reproduction of any published
dataset.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True)
class TwoClusters:
    X: NDArray[np.float64]
    labels: NDArray[np.int64]  # 0 or 1
    u: NDArray[np.float64]  # separation direction
    v: NDArray[np.float64]  # high-variance nuisance direction


def two_clusters(n: int = 1000, d: int = 10, seed: int = 0, separation: float = 4.0,
                 spread: float = 10.0) -> TwoClusters:
    if d < 2:
        raise ValueError("need d >= 2 for orthogonal u and v")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    v = rng.standard_normal(d)
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    labels = np.arange(n) % 2
    rng.shuffle(labels)
    X = rng.standard_normal((n, d))
    X += np.outer(np.where(labels == 1, separation, -separation), u)
    # total sd along v becomes `spread`
    X += np.outer(rng.standard_normal(n) * np.sqrt(spread**2 - 1.0), v)
    return TwoClusters(X, labels.astype(np.int64), u, v)
