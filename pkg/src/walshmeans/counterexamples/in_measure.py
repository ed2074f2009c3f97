"""Two-variable machine: f_k, the kernel tensor, the sets K_k and Stein-type sign selection.

n_k = 2^{2k} + 2^{2k-2} + ... + 1 and f_k = D_{2^{2k+1}} (x) D_{2^{2k+1}}. Since
F_{n_k,1} has no frequencies at or above 2^{2k+1}, f_k * (F_{n,1} (x) F_{n,1})
is the tensor product of the two kernel parts itself.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dyadic import DyadicGrid, ResolutionError
from ..functions import SampledFunction, SampledFunction2D
from ..kernels import dirichlet, kernel_split, weighted_kernel
from ..operators import measure_exceeding
from ..transforms import dyadic_convolve2d, fwht
from ..weights import DegenerateWeightsError, WeightSequence, alternating_index, diagnostics, fmt

EXHAUSTIVE_LIMIT = 12
_SIGN_CHUNK = 256


def _check_k(k: int, grid: DyadicGrid):
    if k < 1:
        raise ValueError("k must be at least 1")
    if 2 * k + 1 > grid.resolution:
        raise ResolutionError(f"k={k} needs resolution >= {2 * k + 1}, grid has {grid.resolution}")


def tensor_fk(k: int, grid: DyadicGrid) -> tuple[SampledFunction2D, int]:
    """(f_k, n_k): the tensor Dirichlet square at order 2k+1 and its companion index."""
    _check_k(k, grid)
    d = dirichlet(1 << (2 * k + 1), grid)
    return SampledFunction2D.tensor(d, d), alternating_index(2 * k)


def _ring_masks(k: int, grid: DyadicGrid):
    # ring l is I_l minus I_{l+1}: the first l digits vanish and digit l is 1
    M = grid.resolution
    idx = grid.indices()
    return [(idx >> (M - l - 1)) == 1 for l in range(2 * k)]


def _gamma_at(q: WeightSequence, K: int) -> int:
    return int(diagnostics(q, K).gamma[K])


@dataclass
class RingRow:
    axis: str
    ring: int
    value_min: float
    bound: float
    ratio: float


@dataclass
class MeasureReport:
    weights_q: str
    weights_p: str
    k: int
    resolution: int
    n_k: int
    gamma_q: int
    gamma_p: int
    lam: int
    ring_constant: float
    measure_K: float
    measure_K_full: float
    lo_ratio: float
    copies_hint: int
    rings: list = field(default_factory=list)

    CSV_COLUMNS = ("axis", "ring", "value_min", "bound", "ratio")

    def csv_rows(self):
        yield list(self.CSV_COLUMNS)
        for r in self.rings:
            yield [r.axis, r.ring, fmt(r.value_min), fmt(r.bound), fmt(r.ratio)]

    def summary(self) -> dict:
        d = asdict(self)
        d["rings"] = [asdict(r) for r in self.rings]
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


@dataclass
class _Setup:
    grid: DyadicGrid
    fk: SampledFunction2D
    n_k: int
    g: SampledFunction2D
    gamma_q: int
    gamma_p: int
    lam: int


def _setup(q: WeightSequence, p: WeightSequence, k: int, grid: DyadicGrid) -> _Setup:
    fk, n_k = tensor_fk(k, grid)
    gq, gp = _gamma_at(q, 2 * k), _gamma_at(p, 2 * k)
    if min(gq, gp) < 1:
        raise DegenerateWeightsError(f"gamma_2k vanishes (q: {gq}, p: {gp}); no measure bound at k={k}")
    u = kernel_split(q, n_k, grid).part1
    v = kernel_split(p, n_k, grid).part1
    g = dyadic_convolve2d(fk, SampledFunction2D.tensor(u, v))
    return _Setup(grid, fk, n_k, g, gq, gp, 4 * k - max(gq, gp))


def measure_experiment(q: WeightSequence, p: WeightSequence, k: int, grid: DyadicGrid | None = None) -> MeasureReport:
    """Ring bounds for F_{n_k,1}, the measure of K_k and the ratio mu(K_k) 2^lambda / gamma_p.

    gamma_q, gamma_p are the diagnostic meeting indices at 2k, the scale at which
    Q_{2^a} must stay comparable to Q_{2^{2k}}; lambda = 4k - max(gamma_q, gamma_p).
    K_k uses the kernel parts F_{n_k,1}; ``measure_K_full`` repeats the count with
    the full kernels F_{n_k}.
    """
    grid = grid or DyadicGrid(2 * k + 2)
    s = _setup(q, p, k, grid)
    rings = []
    for axis, w in (("q", q), ("p", p)):
        part = np.abs(kernel_split(w, s.n_k, grid).part1.samples)
        top = w.Q(1 << (2 * k))
        for l, mask in enumerate(_ring_masks(k, grid)):
            vmin = float(part[mask].min())
            bound = (1 << l) * w.Q(1 << l) / top
            rings.append(RingRow(axis, l, vmin, bound, vmin / bound))
    threshold = 2.0 ** s.lam
    mu = measure_exceeding(s.g, threshold)
    full = SampledFunction2D.tensor(weighted_kernel(q, s.n_k, grid), weighted_kernel(p, s.n_k, grid))
    mu_full = measure_exceeding(dyadic_convolve2d(s.fk, full), threshold)
    ratio = mu * threshold / s.gamma_p
    hint = int((threshold / s.gamma_p) / ratio) + 1 if ratio > 0 else 0
    return MeasureReport(q.label, p.label, k, grid.resolution, s.n_k, s.gamma_q, s.gamma_p, s.lam,
                         min(r.ratio for r in rings), mu, mu_full, ratio, hint, rings)


def _xor_correlate(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c[u, v] = sum_{x,y} a[x, y] b[x ^ u, y ^ v], exactly, for integer arrays."""
    ha = fwht(fwht(a.astype(np.int64), axis=0), axis=1)
    hb = fwht(fwht(b.astype(np.int64), axis=0), axis=1)
    return fwht(fwht(ha * hb, axis=0), axis=1) // a.size


def greedy_translates(mask: np.ndarray, copies: int) -> tuple[list, float]:
    """Translates (a, b) chosen greedily to cover the most cells with mask + (a, b).

    The first translate is (0, 0). Each later step scores every translate at
    once through a dyadic cross-correlation; ties go to the smallest index.
    """
    n = mask.shape[0]
    idx = np.arange(n)
    covered = mask.copy()
    chosen = [(0, 0)]
    size = int(mask.sum())
    for _ in range(copies - 1):
        gain = size - _xor_correlate(covered, mask)
        a, b = np.unravel_index(int(np.argmax(gain)), gain.shape)
        chosen.append((int(a), int(b)))
        covered |= mask[np.ix_(idx ^ a, idx ^ b)]
    return chosen, float(covered.mean())


def _sign_patterns(copies: int, trials: int, rng: np.random.Generator):
    """Sign words with s_1 = +1: all of them up to EXHAUSTIVE_LIMIT copies, else seeded draws."""
    if copies <= EXHAUSTIVE_LIMIT:
        words = list(itertools.product((1, -1), repeat=copies - 1))
        rest = np.array(words, dtype=np.int64).reshape(len(words), copies - 1)
        return np.hstack([np.ones((rest.shape[0], 1), dtype=np.int64), rest]), True
    draws = rng.choice(np.array([1, -1]), size=(trials, copies - 1))
    return np.hstack([np.ones((trials, 1), dtype=np.int64), draws]), False


@dataclass
class SteinReport:
    weights_q: str
    weights_p: str
    k: int
    resolution: int
    lam: int
    copies: int
    seed: int
    exhaustive: bool
    patterns_tried: int
    partial: bool
    translates: list
    coverage: float
    signs: list
    baseline_measure: float
    achieved_measure: float
    xi_l1: float
    xi_l1_within_unit: bool
    xi: SampledFunction2D | None = field(default=None, repr=False)

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "xi"}
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def stein_sign_search(q: WeightSequence, p: WeightSequence, k: int, copies: int, trials: int = 4096,
                      seed: int = 0, grid: DyadicGrid | None = None, max_copies: int = 64) -> SteinReport:
    """Signed average of translates of f_k maximizing mu{|sum_j s_j g(. + a_j)| > 2^lambda}.

    Requests above ``max_copies`` are clipped and the result is flagged partial.
    """
    if copies < 1:
        raise ValueError("copies must be at least 1")
    grid = grid or DyadicGrid(2 * k + 2)
    s = _setup(q, p, k, grid)
    partial = copies > max_copies
    copies = min(copies, max_copies)
    threshold = 2.0 ** s.lam
    K = np.abs(s.g.samples) > threshold
    translates, coverage = greedy_translates(K, copies)

    idx = grid.indices()
    stack = np.stack([s.g.samples[np.ix_(idx ^ a, idx ^ b)].ravel() for a, b in translates])
    rng = np.random.default_rng(seed)
    patterns, exhaustive = _sign_patterns(copies, trials, rng)
    best, best_row = -1, 0
    for start in range(0, patterns.shape[0], _SIGN_CHUNK):
        block = patterns[start:start + _SIGN_CHUNK]
        counts = np.count_nonzero(np.abs(block @ stack) > threshold, axis=1)
        j = int(np.argmax(counts))
        if counts[j] > best:
            best, best_row = int(counts[j]), start + j
    signs = patterns[best_row]

    # f_k is 2^{4k+2} on a square of 4^{M-2k-1} cells; sum signed indicators in integers
    ind = (s.fk.samples > 0).astype(np.int64)
    word = sum(int(sg) * ind[np.ix_(idx ^ a, idx ^ b)] for sg, (a, b) in zip(signs, translates))
    height = 1 << (4 * k + 2)
    l1_num = int(np.abs(word).sum()) * height
    l1_den = copies * ind.size
    xi = SampledFunction2D(grid, word * (height / copies))
    return SteinReport(
        q.label, p.label, k, grid.resolution, s.lam, copies, seed, exhaustive, int(patterns.shape[0]),
        partial, [list(t) for t in translates], coverage, [int(v) for v in signs],
        float(K.mean()), best / K.size, l1_num / l1_den, l1_num <= l1_den, xi,
    )
