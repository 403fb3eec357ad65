import numpy as np
import pytest


def with_exact_covariance(n, cov, seed=0, mean=None):
    """Gaussian-looking sample whose sample covariance equals ``cov`` to rounding."""
    cov = np.asarray(cov, dtype=float)
    d = cov.shape[0]
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, d))
    Z -= Z.mean(axis=0)
    C = Z.T @ Z / (n - 1)
    w, V = np.linalg.eigh(C)
    Z = Z @ (V / np.sqrt(w)) @ V.T
    w, V = np.linalg.eigh(cov)
    X = Z @ (V * np.sqrt(np.clip(w, 0, None))) @ V.T
    if mean is not None:
        X += mean
    return X


def angle(a, b):
    """Angle between the lines spanned by a and b (sign ignored)."""
    a = np.asarray(a, float) / np.linalg.norm(a)
    b = np.asarray(b, float) / np.linalg.norm(b)
    return float(np.arccos(min(1.0, abs(a @ b))))


def random_spd(rng, d, floor=0.5):
    B = rng.standard_normal((d, d))
    return B @ B.T + floor * np.eye(d)


def jacobi_eigen(S, sweeps=100, tol=1e-15):
    """Cyclic Jacobi eigenvalue iteration; independent oracle for the LAPACK path."""
    A = np.array(S, dtype=float)
    d = A.shape[0]
    V = np.eye(d)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol * max(1.0, np.abs(A).max()):
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if A[p, q] == 0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                J = np.eye(d)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    return np.diag(A), V


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
