import warnings

import numpy as np
import pytest

from conftest import brute_convolve2d
from walshmeans.counterexamples import (
    EXHAUSTIVE_LIMIT, greedy_translates, measure_experiment, stein_sign_search, tensor_fk,
)
from walshmeans.counterexamples.in_measure import _xor_correlate
from walshmeans.dyadic import DyadicGrid, ResolutionError
from walshmeans.functions import SampledFunction2D
from walshmeans.kernels import kernel_split
from walshmeans.weights import DegenerateWeightsError, WeightSequence, make_weights


def test_fk_small_cases():
    fk, n1 = tensor_fk(1, DyadicGrid(4))
    assert n1 == 5
    expected = np.zeros((16, 16))
    expected[:2, :2] = 64.0
    assert np.array_equal(fk.samples, expected)
    assert fk.integral() == 1.0 and fk.l1_norm() == 1.0
    assert tensor_fk(2, DyadicGrid(6))[1] == 21
    with pytest.raises(ResolutionError):
        tensor_fk(3, DyadicGrid(6))
    with pytest.raises(ValueError):
        tensor_fk(0, DyadicGrid(6))


def test_convolution_with_fk_reproduces_the_kernel_tensor():
    grid = DyadicGrid(6)
    q, p = make_weights("harmonic", 65), make_weights("delta", 65)
    fk, n = tensor_fk(2, grid)
    u, v = kernel_split(q, n, grid).part1, kernel_split(p, n, grid).part1
    g = brute_convolve2d(fk.samples, np.multiply.outer(u.samples, v.samples))
    assert np.allclose(g, np.multiply.outer(u.samples, v.samples), atol=1e-9)


def test_delta_rings_are_powers_of_two():
    q = make_weights("delta", 65)
    rep = measure_experiment(q, q, 2)
    # |F_{21,1}| with Q = 1 is 1, 1, 3, 5 on rings 0..3 against 2^l
    assert [r.value_min for r in rep.rings if r.axis == "q"] == [1.0, 1.0, 3.0, 5.0]
    assert [r.bound for r in rep.rings if r.axis == "q"] == [1.0, 2.0, 4.0, 8.0]
    assert rep.ring_constant == 0.5
    assert (rep.gamma_q, rep.gamma_p, rep.lam) == (2, 2, 6)


@pytest.mark.parametrize("family", ["delta", "harmonic"])
def test_measure_of_K_matches_brute_force(family):
    grid = DyadicGrid(6)
    q = make_weights(family, 65)
    rep = measure_experiment(q, q, 2, grid)
    fk, n = tensor_fk(2, grid)
    kern = np.multiply.outer(kernel_split(q, n, grid).part1.samples, kernel_split(q, n, grid).part1.samples)
    g = brute_convolve2d(fk.samples, kern)
    assert rep.measure_K == np.mean(np.abs(g) > 2.0 ** rep.lam)
    assert rep.measure_K > 0
    assert rep.lo_ratio == pytest.approx(rep.measure_K * 2 ** rep.lam / rep.gamma_p)


def test_report_serialization():
    q = make_weights("harmonic", 257)
    rep = measure_experiment(q, q, 3)
    rows = list(rep.csv_rows())
    assert rows[0] == ["axis", "ring", "value_min", "bound", "ratio"] and len(rows) == 1 + 2 * 6
    assert '"lo_ratio"' in rep.to_json()
    assert rep.copies_hint >= 1


def test_vanishing_gamma_is_rejected():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        steep = WeightSequence(4.0 ** np.arange(65), "custom", {})
    with pytest.raises(DegenerateWeightsError):
        measure_experiment(steep, steep, 2)


def test_xor_correlation_matches_direct_count():
    rng = np.random.default_rng(0)
    a = rng.random((8, 8)) < 0.3
    b = rng.random((8, 8)) < 0.4
    idx = np.arange(8)
    direct = np.array([[np.sum(a & b[np.ix_(idx ^ u, idx ^ v)]) for v in range(8)] for u in range(8)])
    assert np.array_equal(_xor_correlate(a, b), direct)


def test_greedy_translates_cover_more_each_step():
    rng = np.random.default_rng(1)
    mask = rng.random((16, 16)) < 0.05
    covs = [greedy_translates(mask, c)[1] for c in (1, 2, 4, 8)]
    assert covs[0] == mask.mean()
    assert all(b >= a for a, b in zip(covs, covs[1:]))
    chosen, _ = greedy_translates(mask, 3)
    assert chosen[0] == (0, 0) and len(set(chosen)) == 3


def test_single_copy_is_the_baseline():
    q = make_weights("delta", 65)
    st = stein_sign_search(q, q, 2, copies=1, seed=0)
    assert st.achieved_measure == st.baseline_measure == st.coverage
    assert st.signs == [1] and st.exhaustive


@pytest.mark.parametrize("copies", [2, 5, EXHAUSTIVE_LIMIT])
def test_exhaustive_search(copies):
    q = make_weights("delta", 65)
    st = stein_sign_search(q, q, 2, copies=copies, seed=4)
    assert st.exhaustive and st.patterns_tried == 2 ** (copies - 1)
    assert st.xi_l1_within_unit and st.xi_l1 <= 1.0
    assert st.achieved_measure >= st.baseline_measure
    assert st.xi.l1_norm() == pytest.approx(st.xi_l1)
    assert not st.partial


def test_xi_is_the_signed_average_of_translates():
    q = make_weights("harmonic", 65)
    st = stein_sign_search(q, q, 2, copies=3, seed=0)
    fk, _ = tensor_fk(2, DyadicGrid(6))
    expected = sum(s * fk.translate(a, b).samples for s, (a, b) in zip(st.signs, st.translates)) / 3
    assert np.array_equal(st.xi.samples, expected)


def test_random_search_is_seeded_and_budget_is_flagged():
    q = make_weights("harmonic", 65)
    a = stein_sign_search(q, q, 2, copies=14, trials=64, seed=9)
    b = stein_sign_search(q, q, 2, copies=14, trials=64, seed=9)
    assert not a.exhaustive and a.patterns_tried == 64
    assert a.to_json() == b.to_json()
    clipped = stein_sign_search(q, q, 2, copies=20, trials=16, seed=0, max_copies=6)
    assert clipped.partial and clipped.copies == 6
    with pytest.raises(ValueError):
        stein_sign_search(q, q, 2, copies=0)


def test_two_dimensional_function_type():
    grid = DyadicGrid(2)
    f = SampledFunction2D(grid, np.ones((4, 4)))
    assert f.integral() == 1.0
    with pytest.raises(ValueError):
        SampledFunction2D(grid, np.ones((4, 3)))
