"""Independent oracles shared by the test modules.

None of these call the transform code: Walsh values come from real-point
Rademacher products and convolutions are computed by direct summation.
"""
import math

import numpy as np
import pytest


def rademacher_at(k: int, x: float) -> int:
    # r_k(x) = (-1)^{floor(2^{k+1} x)}
    return -1 if math.floor(x * 2 ** (k + 1)) % 2 else 1


def walsh_at(n: int, x: float) -> int:
    value, k = 1, 0
    while n:
        if n & 1:
            value *= rademacher_at(k, x)
        n >>= 1
        k += 1
    return value


def walsh_table(n_max: int, M: int) -> np.ndarray:
    """Rows w_0 .. w_{n_max-1} sampled at the midpoints of the 2^M cells."""
    xs = (np.arange(1 << M) + 0.5) / (1 << M)
    return np.array([[walsh_at(n, x) for x in xs] for n in range(n_max)], dtype=float)


def direct_kernel(values, n: int, W: np.ndarray) -> np.ndarray:
    """F_n = (1/Q_n) sum_{k=1}^n q_{n-k} D_k with D_k = sum_{j<k} w_j, summed literally."""
    Qn = float(np.sum(values[:n]))
    D = np.cumsum(W[:n], axis=0)  # D[k-1] = D_k
    return sum(values[n - k] * D[k - 1] for k in range(1, n + 1)) / Qn


def brute_convolve(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """(f * g)(x) = mean_t f(t) g(x xor t)."""
    idx = np.arange(f.size)
    return np.array([np.mean(f * g[idx ^ x]) for x in idx])


def brute_convolve2d(f: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = f.shape[0]
    idx = np.arange(n)
    out = np.empty_like(f, dtype=float)
    for a in range(n):
        for b in range(n):
            out[a, b] = np.mean(f * g[np.ix_(idx ^ a, idx ^ b)])
    return out


@pytest.fixture(scope="session")
def walsh8():
    return walsh_table(256, 8)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict = {}


def record(criterion: int, ok: bool, detail: str):
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
