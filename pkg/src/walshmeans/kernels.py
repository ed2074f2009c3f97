"""Walsh-Paley functions, Dirichlet kernels and the weighted kernels F_n.

F_n = (1/Q_n) sum_{k=1}^{n} q_{n-k} D_k has Walsh coefficients Q_{n-j}/Q_n
for j < n. It splits as F_n = F_{n,1} + F_{n,2}, where F_{n,1} is the
martingale-transform part built from the power-of-two kernels D_{2^j} at the
set bits of n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicGrid, ResolutionError, expansion, truncate
from .functions import SampledFunction
from .transforms import synthesize, synthesize_samples
from .weights import WeightSequence


def _check_frequency(n: int, grid: DyadicGrid, inclusive: bool = False):
    if n < 0:
        raise ValueError("index must be non-negative")
    limit = grid.cell_count
    if n > limit or (n == limit and not inclusive):
        raise ResolutionError(f"index {n} is not resolved on a grid of {limit} cells")


def walsh_sample(n: int, x_idx: int, grid: DyadicGrid) -> int:
    """w_n at the cell x_idx: (-1) to the sum of eps_j(n) x_j."""
    _check_frequency(n, grid)
    x_idx = grid.check_index(x_idx)
    M = grid.resolution
    exponent = sum(((x_idx >> (M - 1 - j)) & 1) for j in expansion(n).set_bits()) if n else 0
    return -1 if exponent & 1 else 1


def _walsh_signs(n: int, grid: DyadicGrid) -> np.ndarray:
    M = grid.resolution
    idx = grid.indices()
    parity = np.zeros(grid.cell_count, dtype=np.int64)
    for j in expansion(n).set_bits() if n else ():
        parity ^= (idx >> (M - 1 - j)) & 1
    return (1 - 2 * parity).astype(np.int64)


def walsh_function(n: int, grid: DyadicGrid) -> SampledFunction:
    _check_frequency(n, grid)
    return SampledFunction(grid, _walsh_signs(n, grid))


def rademacher(j: int, grid: DyadicGrid) -> SampledFunction:
    """r_j = w_{2^j}."""
    return walsh_function(1 << j, grid)


def _power_dirichlet_samples(j: int, grid: DyadicGrid) -> np.ndarray:
    # D_{2^j} = 2^j on I_j and 0 elsewhere
    if j > grid.resolution:
        raise ResolutionError(f"D_(2^{j}) is not resolved on resolution {grid.resolution}")
    out = np.zeros(grid.cell_count, dtype=np.int64)
    out[: grid.cell_count >> j] = 1 << j
    return out


def dirichlet(n: int, grid: DyadicGrid) -> SampledFunction:
    """D_n = w_0 + ... + w_{n-1}, exact integer samples."""
    _check_frequency(n, grid, inclusive=True)
    coeffs = np.zeros(grid.cell_count, dtype=np.int64)
    coeffs[:n] = 1
    return SampledFunction(grid, synthesize_samples(coeffs, grid))


def dirichlet_star(n: int, grid: DyadicGrid) -> SampledFunction:
    """D*_n = w_n D_n."""
    D = dirichlet(n, grid)
    if n == grid.cell_count:
        # w_{2^M} is +1 on I_M, the only cell where D_{2^M} is nonzero
        return D
    return SampledFunction(grid, _walsh_signs(n, grid) * D.samples)


def weighted_kernel(q: WeightSequence, n: int, grid: DyadicGrid) -> SampledFunction:
    """F_n built from its Walsh coefficients Q_{n-j}/Q_n."""
    if n < 1:
        raise ValueError("kernel index must be >= 1")
    _check_frequency(n, grid, inclusive=True)
    coeffs = np.zeros(grid.cell_count)
    coeffs[:n] = q.multiplier(n)
    return synthesize(coeffs, grid)


@dataclass(frozen=True, eq=False)
class KernelPair:
    part1: SampledFunction
    part2: SampledFunction

    def total(self) -> SampledFunction:
        return self.part1 + self.part2


def kernel_split(q: WeightSequence, n: int, grid: DyadicGrid) -> KernelPair:
    """F_{n,1} and F_{n,2} assembled term by term in the sample domain.

    F_{n,1} = (w_n/Q_n) sum_j eps_j(n) Q_{n(j)} w_{2^j} D_{2^j}, j >= 0
    F_{n,2} = -(w_n/Q_n) sum_{j=1}^{|n|} eps_j(n) w_{n(j)} w_{2^j-1}
              * sum_{k=1}^{2^j-1} q_{k+n(j-1)} D_k

    Products of Walsh functions are merged by XOR of indices before sampling,
    so every factor stays resolvable when n = 2^M.
    """
    if n < 1:
        raise ValueError("kernel index must be >= 1")
    _check_frequency(n, grid, inclusive=True)
    Qn = q.Q_normalizer(n)
    exp = expansion(n)
    N = grid.cell_count
    part1 = np.zeros(N)
    part2 = np.zeros(N)
    for j in exp.set_bits():
        signs = _walsh_signs(n ^ (1 << j), grid)
        part1 += q.Q(truncate(n, j)) * signs * _power_dirichlet_samples(j, grid)
        if j == 0:
            continue
        offset = truncate(n, j - 1)
        top = (1 << j) - 1
        # sum_{k=1}^{top} q_{k+offset} D_k has coefficient Q_{top+1+offset} - Q_{v+1+offset} at w_v
        coeffs = np.zeros(N)
        v = np.arange(top)
        coeffs[:top] = q.prefix[top + 1 + offset] - q.prefix[v + 1 + offset]
        inner = synthesize_samples(coeffs, grid)
        signs = _walsh_signs(n ^ truncate(n, j) ^ top, grid)
        part2 -= signs * inner
    return KernelPair(SampledFunction(grid, part1 / Qn), SampledFunction(grid, part2 / Qn))


def split_multipliers(q: WeightSequence, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Walsh coefficients (j < n) of F_{n,1} and F_{n,2}.

    The set bit j of n owns the frequency block [n - n(j), n - n(j) + 2^j);
    on it F_{n,1} has the constant coefficient Q_{n(j)}/Q_n.
    """
    Qn = q.Q_normalizer(n)
    full = q.multiplier(n)
    m1 = np.empty(n)
    for j in expansion(n).set_bits():
        start = n - truncate(n, j)
        m1[start: start + (1 << j)] = q.Q(truncate(n, j)) / Qn
    return m1, full - m1
