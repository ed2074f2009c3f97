"""Fast Walsh-Hadamard transform, Walsh-Paley spectra and dyadic convolution."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicGrid, ResolutionError, bit_reverse_indices
from .functions import SampledFunction, SampledFunction2D


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    return n.bit_length() - 1


def fwht(values, axis: int = -1) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along ``axis``.

    out[k] = sum_j in[j] * (-1)**popcount(k & j). Integer input stays integer,
    and applying the transform twice multiplies by the length.
    """
    a = np.asarray(values)
    if a.dtype.kind not in "iuf":
        a = a.astype(np.float64)
    a = np.moveaxis(a, axis, -1)
    n = a.shape[-1]
    _log2_exact(n)
    lead = a.shape[:-1]
    out = np.ascontiguousarray(a).copy()
    h = 1
    while h < n:
        v = out.reshape(lead + (n // (2 * h), 2, h))
        lo = v[..., 0, :]
        hi = v[..., 1, :]
        out = np.stack((lo + hi, lo - hi), axis=-2).reshape(lead + (n,))
        h *= 2
    return np.moveaxis(out, -1, axis)


def _to_walsh_order(samples: np.ndarray, M: int, axis: int) -> np.ndarray:
    # cell j carries digit word rev(j); Paley index k pairs with the digit word
    return np.take(samples, bit_reverse_indices(M), axis=axis)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """coeffs[k] is the k-th Walsh-Paley coefficient, the integral of f w_k."""
    grid: DyadicGrid
    coeffs: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coeffs, copy=True)
        if arr.shape != (self.grid.cell_count,):
            raise ValueError("spectrum length must equal the cell count")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    def energy(self) -> float:
        return float(np.sum(np.square(self.coeffs, dtype=np.float64)))


def spectrum(f: SampledFunction) -> WalshSpectrum:
    M = f.grid.resolution
    raw = fwht(_to_walsh_order(f.samples, M, 0))
    return WalshSpectrum(f.grid, raw / f.grid.cell_count)


def synthesize_samples(coeffs, grid: DyadicGrid) -> np.ndarray:
    """Cell values of sum_k coeffs[k] w_k; integer coefficients give integer samples."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (grid.cell_count,):
        raise ValueError("coefficient array must have one entry per cell")
    return fwht(coeffs)[bit_reverse_indices(grid.resolution)]


def synthesize(coeffs, grid: DyadicGrid) -> SampledFunction:
    return SampledFunction(grid, synthesize_samples(coeffs, grid))


def reconstruct(s: WalshSpectrum) -> SampledFunction:
    return synthesize(s.coeffs, s.grid)


def apply_multiplier(f: SampledFunction, multiplier) -> SampledFunction:
    """Scale Walsh coefficient k of f by multiplier[k]; missing entries count as 0."""
    mult = np.zeros(f.grid.cell_count)
    m = np.asarray(multiplier, dtype=np.float64)
    if m.size > f.grid.cell_count:
        if np.any(m[f.grid.cell_count:] != 0):
            raise ResolutionError("multiplier reaches frequencies beyond the grid")
        m = m[: f.grid.cell_count]
    mult[: m.size] = m
    return synthesize(spectrum(f).coeffs * mult, f.grid)


def partial_sum(f: SampledFunction, n: int) -> SampledFunction:
    """S_n f: the first n terms of the Walsh-Fourier series of f."""
    if n < 1:
        raise ValueError("partial sums need n >= 1")
    if n > f.grid.cell_count:
        raise ResolutionError(f"S_{n} is not resolved on a grid of {f.grid.cell_count} cells")
    return apply_multiplier(f, np.ones(n))


def dyadic_convolve(f: SampledFunction, g: SampledFunction) -> SampledFunction:
    """(f * g)(x) = integral of f(t) g(x + t) dt, via the product of spectra."""
    if f.grid != g.grid:
        raise ValueError("convolution needs both functions on the same grid")
    return synthesize(spectrum(f).coeffs * spectrum(g).coeffs, f.grid)


def translate(f: SampledFunction, a_idx: int) -> SampledFunction:
    """x -> f(x + a)."""
    return SampledFunction(f.grid, f.samples[f.grid.indices() ^ f.grid.check_index(a_idx)])


def spectrum2d(f: SampledFunction2D) -> np.ndarray:
    M = f.grid.resolution
    s = _to_walsh_order(_to_walsh_order(f.samples, M, 0), M, 1)
    return fwht(fwht(s, axis=0), axis=1) / float(f.grid.cell_count) ** 2


def synthesize2d(coeffs, grid: DyadicGrid) -> SampledFunction2D:
    rev = bit_reverse_indices(grid.resolution)
    v = fwht(fwht(np.asarray(coeffs), axis=0), axis=1)
    return SampledFunction2D(grid, v[np.ix_(rev, rev)])


def dyadic_convolve2d(f: SampledFunction2D, g: SampledFunction2D) -> SampledFunction2D:
    if f.grid != g.grid:
        raise ValueError("convolution needs both functions on the same grid")
    return synthesize2d(spectrum2d(f) * spectrum2d(g), f.grid)
