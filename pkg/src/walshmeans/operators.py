"""The means T_n f = f * F_n, their Lebesgue constants and tensor products."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dyadic import DyadicGrid, ResolutionError, bit_reverse_indices
from .functions import SampledFunction, SampledFunction2D
from .kernels import weighted_kernel
from .transforms import _to_walsh_order, fwht, spectrum, synthesize
from .weights import WeightSequence


def _check_index(n: int, grid: DyadicGrid):
    if n < 1:
        raise ValueError("operator index must be >= 1")
    if n > grid.cell_count:
        raise ResolutionError(f"T_{n} is not resolved on a grid of {grid.cell_count} cells")


def thread_cap() -> int:
    """Worker cap from WALSH_THREADS; 1 (serial) when unset or invalid."""
    try:
        return max(1, int(os.environ.get("WALSH_THREADS", "1")))
    except ValueError:
        return 1


def _pmap(func, items):
    workers = thread_cap()
    if workers == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _spectral_T(coeffs: np.ndarray, q: WeightSequence, n: int, grid: DyadicGrid) -> np.ndarray:
    out = np.zeros(grid.cell_count)
    out[:n] = coeffs[:n] * q.multiplier(n)
    return out


def apply_T(q: WeightSequence, n: int, f: SampledFunction) -> SampledFunction:
    """T_n f = (1/Q_n) sum_{k=1}^{n} q_{n-k} S_k f, via the multipliers Q_{n-j}/Q_n."""
    _check_index(n, f.grid)
    return synthesize(_spectral_T(spectrum(f).coeffs, q, n, f.grid), f.grid)


def lebesgue_sequence(q: WeightSequence, n_values, grid: DyadicGrid) -> list[float]:
    """L_n = integral of |F_n|, exact on the grid since F_n is constant on cells."""
    n_values = [int(n) for n in n_values]
    for n in n_values:
        _check_index(n, grid)
    return _pmap(lambda n: weighted_kernel(q, n, grid).l1_norm(), n_values)


def sup_profile(q: WeightSequence, n_values, f: SampledFunction) -> SampledFunction:
    """Cellwise max over the index set of |T_n f|."""
    n_values = [int(n) for n in n_values]
    if not n_values:
        raise ValueError("index set is empty")
    for n in n_values:
        _check_index(n, f.grid)
    coeffs = spectrum(f).coeffs
    best = np.zeros(f.grid.cell_count)
    for n in n_values:
        vals = synthesize(_spectral_T(coeffs, q, n, f.grid), f.grid).samples
        np.maximum(best, np.abs(vals), out=best)
    return SampledFunction(f.grid, best)


def _apply_axis(samples: np.ndarray, q: WeightSequence, n: int, grid: DyadicGrid, axis: int) -> np.ndarray:
    M = grid.resolution
    rev = bit_reverse_indices(M)
    coeffs = fwht(_to_walsh_order(samples, M, axis), axis=axis) / grid.cell_count
    mult = np.zeros(grid.cell_count)
    mult[:n] = q.multiplier(n)
    shape = [1, 1]
    shape[axis] = grid.cell_count
    coeffs = coeffs * mult.reshape(shape)
    return np.take(fwht(coeffs, axis=axis), rev, axis=axis)


def apply_T2(q: WeightSequence, p: WeightSequence, n: int, m: int, f: SampledFunction2D,
             order: str = "rows-first") -> SampledFunction2D:
    """T_{n,m} f: T_n^(q) in the x variable composed with T_m^(p) in y.

    ``order`` only selects which axis is processed first; the factors commute.
    """
    _check_index(n, f.grid)
    _check_index(m, f.grid)
    s = f.samples.astype(np.float64)
    if order == "rows-first":
        s = _apply_axis(s, q, n, f.grid, axis=0)
        s = _apply_axis(s, p, m, f.grid, axis=1)
    elif order == "columns-first":
        s = _apply_axis(s, p, m, f.grid, axis=1)
        s = _apply_axis(s, q, n, f.grid, axis=0)
    else:
        raise ValueError("order must be 'rows-first' or 'columns-first'")
    return SampledFunction2D(f.grid, s)


def measure_exceeding(f2, threshold: float) -> float:
    """Fraction of cells where |value| > threshold (works for 1-D and 2-D functions)."""
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    return float(np.mean(np.abs(f2.samples) > threshold))
