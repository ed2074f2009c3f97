"""Fast invariant suites run by ``walshmeans selftest``; each returns (ok, detail)."""
from __future__ import annotations

import math

import numpy as np

from .counterexamples import (
    adversarial_index, build_EN, build_PN, kernel_part_closed_form, measure_experiment, stein_sign_search, tensor_fk,
)
from .dyadic import DyadicGrid
from .functions import SampledFunction, SampledFunction2D
from .kernels import dirichlet, kernel_split, walsh_function, weighted_kernel
from .operators import apply_T2
from .transforms import dyadic_convolve2d, fwht, reconstruct, spectrum
from .weights import FAMILIES, make_weights


def _fwht_involution():
    rng = np.random.default_rng(1)
    x = rng.standard_normal(1 << 10)
    err = float(np.max(np.abs(fwht(fwht(x)) - x * x.size)))
    return err < 1e-9, f"max error {err:.2e}"


def _spectrum_round_trip():
    rng = np.random.default_rng(2)
    f = SampledFunction(DyadicGrid(10), rng.standard_normal(1 << 10))
    err = float(np.max(np.abs(reconstruct(spectrum(f)).samples - f.samples)))
    return err < 1e-12, f"max error {err:.2e}"


def _dirichlet_powers():
    grid = DyadicGrid(10)
    bad = [m for m in range(11)
           if not np.array_equal(dirichlet(1 << m, grid).samples,
                                 np.where(grid.indices() < 1 << (10 - m), float(1 << m), 0.0))]
    return not bad, f"mismatched m: {bad}" if bad else "D_{2^m} = 2^m on I_m for m <= 10"


def _walsh_orthonormal():
    grid = DyadicGrid(6)
    W = np.stack([walsh_function(n, grid).samples for n in range(64)])
    err = float(np.max(np.abs(W @ W.T / 64 - np.eye(64))))
    return err == 0.0, f"max Gram error {err:.2e}"


def _multiplier_law():
    grid = DyadicGrid(8)
    worst = 0.0
    for fam in FAMILIES:
        q = make_weights(fam, 257)
        for n in (1, 5, 64, 200, 256):
            coeffs = spectrum(weighted_kernel(q, n, grid)).coeffs
            worst = max(worst, float(np.max(np.abs(coeffs[:n] - q.multiplier(n)))))
    return worst < 1e-12, f"max error {worst:.2e}"


def _kernel_split():
    grid = DyadicGrid(8)
    worst = 0.0
    for fam in ("delta", "ones", "cesaro", "harmonic"):
        q = make_weights(fam, 257)
        for n in range(1, 257, 17):
            pair = kernel_split(q, n, grid)
            worst = max(worst, float(np.max(np.abs(pair.total().samples - weighted_kernel(q, n, grid).samples))))
    return worst < 1e-10, f"max error {worst:.2e}"


def _pn_bounds():
    grid = DyadicGrid(12)
    rows = []
    for N, g in ((6, 2), (8, 2), (10, 3)):
        P = build_PN(N, g, grid)
        rows.append((P.l1_norm(), P.sup_norm() / (2 ** g * math.sqrt(g))))
    ok = all(a <= 1 + 1e-9 and b <= 1.0 for a, b in rows)
    return ok, "; ".join(f"L1 {a:.4f} sup ratio {b:.4f}" for a, b in rows)


def _kernel_part_formula():
    grid = DyadicGrid(9)
    q = make_weights("harmonic", 513)
    N, g = 8, 3
    P = build_PN(N, g, grid)
    idx = grid.indices()
    worst = 0.0
    for x in np.flatnonzero(build_EN(N, g, grid))[::7]:
        K = kernel_split(q, adversarial_index((N, g), int(x), grid).n_value, grid).part1.samples
        brute = float(np.mean(P.samples * K[idx ^ x]))
        worst = max(worst, abs(brute - kernel_part_closed_form(q, (N, g), int(x), grid)))
    return worst < 1e-12, f"max error {worst:.2e}"


def _tensor_commute():
    grid = DyadicGrid(5)
    rng = np.random.default_rng(3)
    f = SampledFunction2D(grid, rng.standard_normal((32, 32)))
    q, p = make_weights("harmonic", 33), make_weights("ones", 33)
    a = apply_T2(q, p, 13, 7, f, order="rows-first").samples
    b = apply_T2(q, p, 13, 7, f, order="columns-first").samples
    kern = SampledFunction2D.tensor(weighted_kernel(q, 13, grid), weighted_kernel(p, 7, grid))
    c = dyadic_convolve2d(f, kern).samples
    err = float(max(np.max(np.abs(a - b)), np.max(np.abs(a - c))))
    return err < 1e-10, f"max error {err:.2e}"


def _measure_machine():
    q = make_weights("delta", 257)
    fk, n_k = tensor_fk(2, DyadicGrid(6))
    rep = measure_experiment(q, q, 2)
    st = stein_sign_search(q, q, 2, copies=4, seed=0)
    ok = (abs(fk.integral() - 1) < 1e-12 and n_k == 21 and rep.measure_K > 0 and rep.ring_constant > 0
          and st.xi_l1_within_unit and st.achieved_measure >= st.baseline_measure)
    return ok, f"mu(K_2) {rep.measure_K:.5f}, stein {st.achieved_measure:.5f} vs {st.baseline_measure:.5f}"


SUITES = {
    "fwht_involution": _fwht_involution,
    "spectrum_round_trip": _spectrum_round_trip,
    "dirichlet_powers": _dirichlet_powers,
    "walsh_orthonormal": _walsh_orthonormal,
    "multiplier_law": _multiplier_law,
    "kernel_split": _kernel_split,
    "pn_bounds": _pn_bounds,
    "kernel_part_formula": _kernel_part_formula,
    "tensor_commute": _tensor_commute,
    "measure_machine": _measure_machine,
}


def run_all():
    """Yield (name, ok, detail) for every suite; exceptions count as failures."""
    for name, check in SUITES.items():
        try:
            ok, detail = check()
        except Exception as exc:  # a crashing suite is a failing suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield name, bool(ok), detail
