"""Piecewise-constant functions on dyadic grids, in one and two variables."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicGrid


def _frozen(values, shape) -> np.ndarray:
    arr = np.array(values, copy=True)
    if arr.dtype.kind not in "iuf":
        arr = arr.astype(np.float64)
    if arr.shape != shape:
        raise ValueError(f"expected samples of shape {shape}, got {arr.shape}")
    if arr.dtype.kind == "f" and not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Function constant on each of the 2**M cells of ``grid``."""
    grid: DyadicGrid
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples, (self.grid.cell_count,)))

    @classmethod
    def from_callable(cls, func, grid: DyadicGrid) -> "SampledFunction":
        """Sample ``func`` at the left endpoint of every cell."""
        xs = grid.indices() / grid.cell_count
        return cls(grid, np.asarray(func(xs), dtype=np.float64))

    def integral(self) -> float:
        return float(np.mean(self.samples))

    def l1_norm(self) -> float:
        return float(np.mean(np.abs(self.samples)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def at(self, x_idx: int):
        return self.samples[self.grid.check_index(x_idx)]

    def _check(self, other: "SampledFunction"):
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.samples + other.samples)
        return SampledFunction(self.grid, self.samples + other)

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.samples - other.samples)
        return SampledFunction(self.grid, self.samples - other)

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check(other)
            return SampledFunction(self.grid, self.samples * other.samples)
        return SampledFunction(self.grid, self.samples * other)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledFunction(self.grid, -self.samples)

    def __truediv__(self, scalar):
        return SampledFunction(self.grid, self.samples / scalar)

    def __len__(self):
        return self.grid.cell_count


@dataclass(frozen=True, eq=False)
class SampledFunction2D:
    """Function constant on each cell of the 2**M x 2**M tensor grid; axis 0 is x."""
    grid: DyadicGrid
    samples: np.ndarray

    def __post_init__(self):
        n = self.grid.cell_count
        object.__setattr__(self, "samples", _frozen(self.samples, (n, n)))

    @classmethod
    def tensor(cls, u: SampledFunction, v: SampledFunction) -> "SampledFunction2D":
        if u.grid != v.grid:
            raise ValueError("factors live on different grids")
        return cls(u.grid, np.multiply.outer(u.samples, v.samples))

    def row(self, x_idx: int) -> SampledFunction:
        """The slice y -> f(x, y)."""
        return SampledFunction(self.grid, self.samples[self.grid.check_index(x_idx), :])

    def column(self, y_idx: int) -> SampledFunction:
        """The slice x -> f(x, y)."""
        return SampledFunction(self.grid, self.samples[:, self.grid.check_index(y_idx)])

    def integral(self) -> float:
        return float(np.mean(self.samples))

    def l1_norm(self) -> float:
        return float(np.mean(np.abs(self.samples)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def translate(self, a_idx: int, b_idx: int) -> "SampledFunction2D":
        """(x, y) -> f(x + a, y + b) with dyadic addition."""
        idx = self.grid.indices()
        ax = idx ^ self.grid.check_index(a_idx)
        by = idx ^ self.grid.check_index(b_idx)
        return SampledFunction2D(self.grid, self.samples[np.ix_(ax, by)])

    def __sub__(self, other):
        if isinstance(other, SampledFunction2D):
            return SampledFunction2D(self.grid, self.samples - other.samples)
        return SampledFunction2D(self.grid, self.samples - other)
