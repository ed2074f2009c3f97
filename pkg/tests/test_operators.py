import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import brute_convolve, brute_convolve2d, direct_kernel, walsh_table
from walshmeans.dyadic import DyadicGrid, ResolutionError, interval_mask
from walshmeans.functions import SampledFunction, SampledFunction2D
from walshmeans.kernels import walsh_function, weighted_kernel
from walshmeans.operators import (
    apply_T, apply_T2, lebesgue_sequence, measure_exceeding, sup_profile, thread_cap,
)
from walshmeans.transforms import partial_sum
from walshmeans.weights import FAMILIES, make_weights


@pytest.fixture
def rand6():
    rng = np.random.default_rng(11)
    return SampledFunction(DyadicGrid(6), rng.standard_normal(64))


def test_delta_means_are_partial_sums(rand6):
    q = make_weights("delta", 65)
    for n in (1, 7, 33, 64):
        assert np.allclose(apply_T(q, n, rand6).samples, partial_sum(rand6, n).samples)


@pytest.mark.parametrize("family", FAMILIES)
def test_means_equal_weighted_partial_sums(family, rand6):
    q = make_weights(family, 65)
    for n in (1, 5, 30, 64):
        direct = sum(q.q(n - k) * partial_sum(rand6, k).samples for k in range(1, n + 1)) / q.Q(n)
        assert np.allclose(apply_T(q, n, rand6).samples, direct, atol=1e-9)


def test_means_are_convolutions_with_the_kernel(rand6):
    q = make_weights("harmonic", 65)
    W = walsh_table(64, 6)
    for n in (3, 21, 50):
        kern = direct_kernel(q.values, n, W)
        assert np.allclose(apply_T(q, n, rand6).samples, brute_convolve(rand6.samples, kern), atol=1e-12)


@settings(max_examples=20)
@given(st.sampled_from(FAMILIES), st.integers(1, 64), st.floats(-5, 5))
def test_constants_are_preserved(family, n, c):
    q = make_weights(family, 65)
    f = SampledFunction(DyadicGrid(6), np.full(64, c))
    assert np.allclose(apply_T(q, n, f).samples, c, atol=1e-12)


def test_fejer_on_a_walsh_function():
    q = make_weights("ones", 5)
    grid = DyadicGrid(3)
    out = apply_T(q, 4, walsh_function(2, grid))
    assert np.allclose(out.samples, 0.5 * walsh_function(2, grid).samples)


def test_apply_T_rejects_bad_indices(rand6):
    q = make_weights("ones", 130)
    with pytest.raises(ResolutionError):
        apply_T(q, 65, rand6)
    with pytest.raises(ValueError):
        apply_T(q, 0, rand6)


def test_lebesgue_values():
    grid = DyadicGrid(10)
    delta = make_weights("delta", 1025)
    assert lebesgue_sequence(delta, [1 << m for m in range(11)], grid) == [1.0] * 11
    assert lebesgue_sequence(delta, [3], DyadicGrid(2)) == [1.5]
    W = walsh_table(200, 8)
    q = make_weights("log_over_k", 257)
    for n, L in zip((7, 100, 199), lebesgue_sequence(q, (7, 100, 199), DyadicGrid(8))):
        assert L == pytest.approx(np.mean(np.abs(direct_kernel(q.values, n, W))))


@pytest.mark.parametrize("family", FAMILIES)
def test_lebesgue_at_least_one(family):
    q = make_weights(family, 1025)
    L = lebesgue_sequence(q, range(1, 1025), DyadicGrid(10))
    assert min(L) >= 1 - 1e-12


def test_lebesgue_respects_thread_cap(monkeypatch):
    q = make_weights("harmonic", 257)
    serial = lebesgue_sequence(q, range(1, 257), DyadicGrid(8))
    monkeypatch.setenv("WALSH_THREADS", "4")
    assert thread_cap() == 4
    assert lebesgue_sequence(q, range(1, 257), DyadicGrid(8)) == serial
    monkeypatch.setenv("WALSH_THREADS", "lots")
    assert thread_cap() == 1


def test_sup_profile(rand6):
    q = make_weights("harmonic", 65)
    single = sup_profile(q, [9], rand6).samples
    assert np.allclose(single, np.abs(apply_T(q, 9, rand6).samples))
    many = sup_profile(q, [3, 9, 40], rand6).samples
    stack = np.abs(np.stack([apply_T(q, n, rand6).samples for n in (3, 9, 40)]))
    assert np.allclose(many, stack.max(axis=0))
    const = SampledFunction(rand6.grid, np.full(64, -2.0))
    assert np.allclose(sup_profile(q, [1, 5, 64], const).samples, 2.0)
    with pytest.raises(ValueError):
        sup_profile(q, [], rand6)


def test_tensor_means():
    grid = DyadicGrid(4)
    rng = np.random.default_rng(12)
    f = SampledFunction2D(grid, rng.standard_normal((16, 16)))
    q, p = make_weights("harmonic", 17), make_weights("cesaro", 17)
    a = apply_T2(q, p, 11, 6, f, order="rows-first").samples
    b = apply_T2(q, p, 11, 6, f, order="columns-first").samples
    assert np.max(np.abs(a - b)) < 1e-10
    kern = np.multiply.outer(weighted_kernel(q, 11, grid).samples, weighted_kernel(p, 6, grid).samples)
    assert np.allclose(a, brute_convolve2d(f.samples, kern), atol=1e-12)
    with pytest.raises(ValueError):
        apply_T2(q, p, 3, 3, f, order="diagonal")


def test_tensor_means_separate():
    grid = DyadicGrid(5)
    rng = np.random.default_rng(13)
    u = SampledFunction(grid, rng.standard_normal(32))
    v = SampledFunction(grid, rng.standard_normal(32))
    q, p = make_weights("ones", 33), make_weights("log_damped", 33)
    out = apply_T2(q, p, 13, 29, SampledFunction2D.tensor(u, v)).samples
    assert np.allclose(out, np.multiply.outer(apply_T(q, 13, u).samples, apply_T(p, 29, v).samples))
    d = make_weights("delta", 33)
    rect = apply_T2(d, d, 5, 9, SampledFunction2D.tensor(u, v)).samples
    assert np.allclose(rect, np.multiply.outer(partial_sum(u, 5).samples, partial_sum(v, 9).samples))


def test_measure_exceeding():
    grid = DyadicGrid(2)
    f = SampledFunction2D(grid, np.arange(16.0).reshape(4, 4) - 8)
    assert measure_exceeding(f, -1.0) == 1.0
    assert measure_exceeding(f, 8.0) == 0.0
    assert measure_exceeding(f, 6.5) == 3 / 16  # -8, -7 and 7
    with pytest.raises(ValueError):
        measure_exceeding(f, np.inf)


def test_fejer_tensor_means_converge_in_measure():
    grid = DyadicGrid(10)
    ones = make_weights("ones", 1025)
    ind = interval_mask(3, 5, grid).astype(float)
    f = SampledFunction2D(grid, np.multiply.outer(ind, interval_mask(2, 1, grid).astype(float)))
    mus = [measure_exceeding(apply_T2(ones, ones, n, n, f) - f, 0.1) for n in (64, 256, 1024)]
    assert mus[0] >= mus[1] >= mus[2]
