"""Arithmetic on the dyadic group resolved to a grid of 2**M cells.

A cell index ``j`` stands for the half-open interval ``[j 2**-M, (j+1) 2**-M)``.
The dyadic digits of a point are read most-significant first, so digit
``x_i`` of the cell is bit ``M-1-i`` of ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_RESOLUTION = 26


class ResolutionError(ValueError):
    """Raised when an object is not constant on the cells of the grid."""


@dataclass(frozen=True)
class DyadicGrid:
    resolution: int

    def __post_init__(self):
        M = self.resolution
        if not isinstance(M, (int, np.integer)) or isinstance(M, bool):
            raise TypeError("resolution must be an integer")
        if not 1 <= M <= MAX_RESOLUTION:
            raise ValueError(f"resolution must be in [1, {MAX_RESOLUTION}], got {M}")

    @property
    def cell_count(self) -> int:
        return 1 << self.resolution

    def check_index(self, idx: int) -> int:
        if not 0 <= idx < self.cell_count:
            raise ValueError(f"cell index {idx} outside [0, {self.cell_count})")
        return int(idx)

    def indices(self) -> np.ndarray:
        return np.arange(self.cell_count, dtype=np.int64)

    def cell_of(self, x: float) -> int:
        """Cell index containing the real point ``x`` in [0, 1)."""
        if not 0.0 <= x < 1.0:
            raise ValueError("point must lie in [0, 1)")
        return int(x * self.cell_count)

    def digits(self, idx: int) -> tuple[int, ...]:
        """Dyadic digits x_0 .. x_{M-1} of a cell."""
        idx = self.check_index(idx)
        M = self.resolution
        return tuple((idx >> (M - 1 - i)) & 1 for i in range(M))

    def from_digits(self, digits) -> int:
        M = self.resolution
        digits = list(digits)
        if len(digits) > M:
            raise ResolutionError(f"{len(digits)} digits do not fit a grid of resolution {M}")
        idx = 0
        for i, d in enumerate(digits):
            if d not in (0, 1):
                raise ValueError("digits must be 0 or 1")
            idx |= d << (M - 1 - i)
        return idx


@dataclass(frozen=True)
class BinaryExpansion:
    """Binary coefficients eps_0(n), eps_1(n), ... of a non-negative integer.

    ``top`` is |n|, the position of the highest set bit, and is ``None`` for n = 0.
    """
    n: int
    bits: tuple[int, ...]
    top: int | None

    def eps(self, k: int) -> int:
        return (self.n >> k) & 1

    def set_bits(self) -> list[int]:
        return [k for k, b in enumerate(self.bits) if b]


def expansion(n: int) -> BinaryExpansion:
    if n < 0:
        raise ValueError("n must be non-negative")
    n = int(n)
    if n == 0:
        return BinaryExpansion(0, (0,), None)
    top = n.bit_length() - 1
    return BinaryExpansion(n, tuple((n >> k) & 1 for k in range(top + 1)), top)


def truncate(n: int, s: int) -> int:
    """n(s): keep the binary coefficients of n up to and including position s."""
    if n < 0 or s < 0:
        raise ValueError("n and s must be non-negative")
    return int(n) & ((1 << (s + 1)) - 1)


def dyadic_add(x_idx: int, y_idx: int, grid: DyadicGrid) -> int:
    return grid.check_index(x_idx) ^ grid.check_index(y_idx)


def interval_id(x_idx: int, k: int, grid: DyadicGrid) -> int:
    """Identify I_k(x) by its first k digits (0 for the whole interval when k = 0)."""
    x_idx = grid.check_index(x_idx)
    if not 0 <= k <= grid.resolution:
        raise ResolutionError(f"order {k} interval not resolvable on a grid of resolution {grid.resolution}")
    return x_idx >> (grid.resolution - k)


def interval_bounds(k: int, ident: int) -> tuple[float, float]:
    """Endpoints of the order-k dyadic interval with the given id."""
    width = 2.0 ** -k
    return ident * width, (ident + 1) * width


def interval_mask(k: int, ident: int, grid: DyadicGrid) -> np.ndarray:
    """Boolean cell mask of an order-k dyadic interval; I_k itself is ident 0."""
    if not 0 <= k <= grid.resolution:
        raise ResolutionError(f"order {k} interval not resolvable on a grid of resolution {grid.resolution}")
    return (grid.indices() >> (grid.resolution - k)) == ident


@lru_cache(maxsize=32)
def _bit_reverse(M: int) -> np.ndarray:
    idx = np.arange(1 << M, dtype=np.int64)
    rev = np.zeros_like(idx)
    for b in range(M):
        rev |= ((idx >> b) & 1) << (M - 1 - b)
    rev.setflags(write=False)
    return rev


def bit_reverse_indices(M: int) -> np.ndarray:
    """Permutation reversing M-bit indices; maps a cell index to its digit word read as an integer."""
    return _bit_reverse(M)


def digit_word(x_idx: int, grid: DyadicGrid) -> int:
    """Integer whose bit i is the dyadic digit x_i of the cell."""
    return int(_bit_reverse(grid.resolution)[grid.check_index(x_idx)])
