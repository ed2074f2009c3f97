import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import brute_convolve, brute_convolve2d, walsh_table
from walshmeans.dyadic import DyadicGrid, ResolutionError
from walshmeans.functions import SampledFunction, SampledFunction2D
from walshmeans.transforms import (
    apply_multiplier, dyadic_convolve, dyadic_convolve2d, fwht, partial_sum, reconstruct, spectrum,
    spectrum2d, synthesize, synthesize2d, translate,
)

floats = st.floats(-1e3, 1e3, allow_nan=False)


def _signal(M):
    return arrays(np.float64, 1 << M, elements=floats)


def test_fwht_small_case_by_hand():
    assert fwht([1, 0, 0, 0]).tolist() == [1, 1, 1, 1]
    assert fwht([1, 2, 3, 4]).tolist() == [10, -2, -4, 0]
    assert fwht(np.array([1, 2, 3, 4])).dtype.kind == "i"


def test_fwht_rejects_bad_lengths():
    with pytest.raises(ValueError):
        fwht(np.zeros(6))


@given(st.integers(0, 8).flatmap(_signal))
def test_fwht_involution(x):
    assert np.allclose(fwht(fwht(x)), x * x.size, atol=1e-6 * max(1.0, np.abs(x).max()) * x.size)


def test_fwht_along_axis():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((4, 8))
    assert np.allclose(fwht(a, axis=1), np.stack([fwht(r) for r in a]))
    assert np.allclose(fwht(a.T, axis=0), fwht(a, axis=1).T)


def test_spectrum_matches_direct_inner_products():
    M = 6
    W = walsh_table(1 << M, M)
    rng = np.random.default_rng(1)
    f = SampledFunction(DyadicGrid(M), rng.standard_normal(1 << M))
    direct = W @ f.samples / (1 << M)
    assert np.allclose(spectrum(f).coeffs, direct, atol=1e-13)


@settings(max_examples=40)
@given(st.integers(1, 9).flatmap(_signal))
def test_round_trip(x):
    grid = DyadicGrid(int(x.size).bit_length() - 1)
    f = SampledFunction(grid, x)
    assert np.allclose(reconstruct(spectrum(f)).samples, x, atol=1e-9 * max(1.0, np.abs(x).max()))


def test_parseval():
    rng = np.random.default_rng(2)
    f = SampledFunction(DyadicGrid(8), rng.standard_normal(256))
    assert spectrum(f).energy() == pytest.approx(np.mean(f.samples ** 2))


def test_convolution_matches_brute_force():
    rng = np.random.default_rng(3)
    grid = DyadicGrid(6)
    f = SampledFunction(grid, rng.standard_normal(64))
    g = SampledFunction(grid, rng.standard_normal(64))
    assert np.allclose(dyadic_convolve(f, g).samples, brute_convolve(f.samples, g.samples), atol=1e-12)
    with pytest.raises(ValueError):
        dyadic_convolve(f, SampledFunction(DyadicGrid(5), np.zeros(32)))


@settings(max_examples=25)
@given(st.integers(0, 31))
def test_translation_covariance(a):
    rng = np.random.default_rng(a)
    grid = DyadicGrid(5)
    f = SampledFunction(grid, rng.standard_normal(32))
    g = SampledFunction(grid, rng.standard_normal(32))
    lhs = dyadic_convolve(translate(f, a), g).samples
    rhs = translate(dyadic_convolve(f, g), a).samples
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_partial_sum_and_multiplier():
    M = 5
    grid = DyadicGrid(M)
    W = walsh_table(32, M)
    rng = np.random.default_rng(4)
    f = SampledFunction(grid, rng.standard_normal(32))
    c = W @ f.samples / 32
    assert np.allclose(partial_sum(f, 7).samples, c[:7] @ W[:7], atol=1e-12)
    assert np.allclose(partial_sum(f, 32).samples, f.samples)
    with pytest.raises(ResolutionError):
        partial_sum(f, 33)
    with pytest.raises(ValueError):
        partial_sum(f, 0)
    assert np.allclose(apply_multiplier(f, [0.5, 2.0]).samples, 0.5 * c[0] * W[0] + 2.0 * c[1] * W[1])
    with pytest.raises(ResolutionError):
        apply_multiplier(f, np.ones(40))


def test_integer_synthesis_is_exact():
    grid = DyadicGrid(4)
    coeffs = np.zeros(16, dtype=np.int64)
    coeffs[:5] = 1
    out = synthesize(coeffs, grid).samples
    assert np.array_equal(out, walsh_table(5, 4).sum(axis=0))


def test_two_dimensional_transforms():
    rng = np.random.default_rng(5)
    grid = DyadicGrid(3)
    f = SampledFunction2D(grid, rng.standard_normal((8, 8)))
    g = SampledFunction2D(grid, rng.standard_normal((8, 8)))
    assert np.allclose(synthesize2d(spectrum2d(f), grid).samples, f.samples)
    assert np.allclose(dyadic_convolve2d(f, g).samples, brute_convolve2d(f.samples, g.samples), atol=1e-12)
    W = walsh_table(8, 3)
    assert np.allclose(spectrum2d(f), W @ f.samples @ W.T / 64)
