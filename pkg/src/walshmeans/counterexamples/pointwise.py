"""One-variable divergence machine: P_N, E_N, adversarial indices n(N, x) and f.

Conventions: in every construction ``gamma`` is the block length, so a level
(N, gamma) uses the digit window [N - 2 gamma, N). The polynomial P_N lives on
the points whose digits in [N - gamma, N) repeat those in [N - 2 gamma, N - gamma).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dyadic import DyadicGrid, ResolutionError, digit_word
from ..functions import SampledFunction
from ..kernels import split_multipliers, walsh_function
from ..transforms import spectrum, synthesize
from ..weights import WeightSequence, classify, diagnostics, fmt


def _check_level(N: int, gamma: int, grid: DyadicGrid):
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    if 2 * gamma >= N:
        raise ValueError(f"need 2*gamma < N, got N={N}, gamma={gamma}")
    if N + 1 > grid.resolution:
        raise ResolutionError(f"level N={N} needs resolution >= {N + 1}, grid has {grid.resolution}")


def _digit(idx: np.ndarray, i: int, M: int) -> np.ndarray:
    return (idx >> (M - 1 - i)) & 1


@dataclass(frozen=True)
class LevelPlan:
    """Levels (N_k, gamma_k) of the construction.

    Consecutive levels must satisfy N_k - 2 gamma_k > N_{k-1} so that their
    frequency bands are disjoint; ``allow_overlap`` accepts plans breaking
    this and marks them as not separated.
    """
    levels: tuple
    grid: DyadicGrid
    allow_overlap: bool = False
    gamma_source: str = "user"

    def __post_init__(self):
        levels = tuple((int(N), int(g)) for N, g in self.levels)
        if not levels:
            raise ValueError("a plan needs at least one level")
        object.__setattr__(self, "levels", levels)
        for N, g in levels:
            _check_level(N, g, self.grid)
        for (N0, _), (N1, g1) in zip(levels, levels[1:]):
            if N1 <= N0:
                raise ValueError("levels must have strictly increasing N")
            if N1 - 2 * g1 <= N0 and not self.allow_overlap:
                raise ValueError(f"level ({N1},{g1}) overlaps the band of N={N0}: need N - 2*gamma > {N0}")

    @property
    def separated(self) -> bool:
        return all(N1 - 2 * g1 > N0 for (N0, _), (N1, g1) in zip(self.levels, self.levels[1:]))


def plan_from_weights(q: WeightSequence, Ns, grid: DyadicGrid, allow_overlap: bool = False) -> LevelPlan:
    """Plan whose gamma at level N is half the diagnostic gamma_N, clipped to [1, (N-1)//2].

    The construction uses the window [N - 2 gamma, N), so halving keeps that
    window inside the range where Q_{2^(N-s)} stays comparable to Q_{2^N}.
    """
    Ns = [int(N) for N in Ns]
    d = diagnostics(q, max(Ns))
    levels = []
    for N in Ns:
        g = int(d.gamma[N]) // 2
        g = max(1, min(g, (N - 1) // 2))
        levels.append((N, g))
    return LevelPlan(tuple(levels), grid, allow_overlap=allow_overlap, gamma_source="diagnostics/2")


def theta_points(N: int, gamma: int, grid: DyadicGrid) -> np.ndarray:
    """Cells of the points theta_i, one per prefix word i of length N - gamma.

    The word u_0 .. u_{N-gamma-1} (u_0 most significant in i) fills the first
    N - gamma digits, and its last gamma digits are repeated at N - gamma .. N - 1.
    """
    _check_level(N, gamma, grid)
    M = grid.resolution
    i = np.arange(1 << (N - gamma), dtype=np.int64)
    dup = i & ((1 << gamma) - 1)
    return (i << (M - N + gamma)) | (dup << (M - N))


def build_PN(N: int, gamma: int, grid: DyadicGrid) -> SampledFunction:
    """P_N = (2^(N-gamma) sqrt(gamma))^-1 sum_i D_{2^N}(t + theta_i) sum_l w_{2^l}(t)."""
    _check_level(N, gamma, grid)
    M = grid.resolution
    idx = grid.indices()
    hit = np.zeros(1 << N, dtype=bool)
    hit[theta_points(N, gamma, grid) >> (M - N)] = True
    # D_{2^N}(t + theta) = 2^N exactly when t and theta share their first N digits,
    # so P_N = 2^gamma sqrt(gamma) * (sum of the gamma Rademacher signs / gamma) there
    rsum = np.zeros(grid.cell_count)
    for l in range(N - 2 * gamma, N - gamma):
        rsum += walsh_function(1 << l, grid).samples
    on = hit[idx >> (M - N)]
    return SampledFunction(grid, np.where(on, rsum / gamma, 0.0) * (2.0 ** gamma * math.sqrt(gamma)))


def build_EN(N: int, gamma: int, grid: DyadicGrid) -> np.ndarray:
    """Mask of E_N: digit N - gamma differs from digit N - 2 gamma."""
    if gamma < 1 or 2 * gamma >= N:
        raise ValueError("need 1 <= gamma and 2*gamma < N")
    if N - gamma + 1 > grid.resolution:
        raise ResolutionError(f"E_N needs resolution >= {N - gamma + 1}")
    M = grid.resolution
    idx = grid.indices()
    return _digit(idx, N - gamma, M) != _digit(idx, N - 2 * gamma, M)


@dataclass(frozen=True)
class AdversarialIndex:
    n_value: int
    lam: int
    chosen_bits: tuple
    case: str  # "complement" when few ones in the block, else "copy"


def adversarial_index(level, x_idx: int, grid: DyadicGrid) -> AdversarialIndex:
    """n(N, x) = lambda + 2^gamma lambda with lambda's bits chosen from x's digits.

    With x_j the digits in [N - 2 gamma, N - gamma): if fewer than gamma/3 of
    them are 1 the bits are 1 - x_j, otherwise x_j.
    """
    N, gamma = level
    if gamma < 1 or 2 * gamma >= N:
        raise ValueError("need 1 <= gamma and 2*gamma < N")
    if N - gamma > grid.resolution:
        raise ResolutionError("the digit block of x is not resolved on the grid")
    digits = [(grid.check_index(x_idx) >> (grid.resolution - 1 - j)) & 1
              for j in range(N - 2 * gamma, N - gamma)]
    if 3 * sum(digits) < gamma:
        eps, case = tuple(1 - d for d in digits), "complement"
    else:
        eps, case = tuple(digits), "copy"
    lam = sum(e << j for e, j in zip(eps, range(N - 2 * gamma, N - gamma)))
    return AdversarialIndex(lam + (lam << gamma), lam, eps, case)


def level_indices(N: int, gamma: int) -> list[int]:
    """Every value n(N, x) can take: lambda (1 + 2^gamma) over nonzero gamma-bit blocks."""
    base = N - 2 * gamma
    return [(b << base) * (1 + (1 << gamma)) for b in range(1, 1 << gamma)]


def build_f(plan: LevelPlan) -> SampledFunction:
    """f = sum over levels of P_{N_k} / gamma_k^(1/4)."""
    total = np.zeros(plan.grid.cell_count)
    for N, g in plan.levels:
        total += build_PN(N, g, plan.grid).samples / g ** 0.25
    return SampledFunction(plan.grid, total)


def _synth_at(coeffs: np.ndarray, mult: np.ndarray, grid: DyadicGrid) -> np.ndarray:
    full = np.zeros(grid.cell_count)
    full[: mult.size] = coeffs[: mult.size] * mult
    return synthesize(full, grid).samples


@dataclass
class LevelRow:
    level: int
    N: int
    gamma: int
    samples: int
    distinct_n: int
    kernel_median: float
    c_kernel: float
    part1_median: float
    c_part1: float
    part1_over_sqrt_gamma: float
    T_median: float
    sup_median: float
    sup_growth_fraction: float
    pn_l1: float
    pn_sup_ratio: float


@dataclass
class DivergenceReport:
    weights: str
    regime: str
    plan: list
    separated: bool
    gamma_source: str
    resolution: int
    seed: int
    rows: list = field(default_factory=list)

    CSV_COLUMNS = ("level", "N", "gamma", "samples", "distinct_n", "kernel_median", "c_kernel",
                   "part1_median", "c_part1", "part1_over_sqrt_gamma", "T_median", "sup_median",
                   "sup_growth_fraction", "pn_l1", "pn_sup_ratio")

    def csv_rows(self):
        yield list(self.CSV_COLUMNS)
        for r in self.rows:
            yield [r.level, r.N, r.gamma, r.samples, r.distinct_n] + [fmt(getattr(r, c)) for c in self.CSV_COLUMNS[5:]]

    def summary(self) -> dict:
        d = asdict(self)
        d["rows"] = [asdict(r) for r in self.rows]
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def divergence_report(q: WeightSequence, plan: LevelPlan, sample_count: int = 256, seed: int = 0) -> DivergenceReport:
    """Evaluate the construction at sampled cells of the intersection of the E_{N_k}.

    Per level k and cell x with n = n(N_k, x):
      kernel part   |(P_{N_k} * F_{n,1})(x)|, normalized by sqrt(gamma_k)
      part 1        |(f * F_{n,1})(x)|, normalized by gamma_k^(1/4)
      full mean     |T_n f(x)|
      sup profile   max over every possible n(N_k, .) of |T_n f(x)|
    """
    grid = plan.grid
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    N_top = plan.levels[-1][0]
    if q.length < (1 << N_top):
        raise ValueError(f"weights need at least {1 << N_top} terms for this plan")
    k_diag = min(20, (q.length - 1).bit_length() - 1)
    regime = classify(q, k_diag).regime if k_diag >= 4 else "unknown"

    pns = [build_PN(N, g, grid) for N, g in plan.levels]
    f = SampledFunction(grid, sum(p.samples / g ** 0.25 for p, (_, g) in zip(pns, plan.levels)))
    f_hat = spectrum(f).coeffs
    p_hats = [spectrum(p).coeffs for p in pns]

    mask = np.ones(grid.cell_count, dtype=bool)
    for N, g in plan.levels:
        mask &= build_EN(N, g, grid)
    pool = np.flatnonzero(mask)
    rng = np.random.default_rng(seed)
    cells = np.sort(rng.choice(pool, size=min(sample_count, pool.size), replace=False))

    report = DivergenceReport(q.label, regime, [list(lv) for lv in plan.levels], plan.separated,
                              plan.gamma_source, grid.resolution, seed)
    prev_sup = None
    for k, ((N, g), p_hat, pn) in enumerate(zip(plan.levels, p_hats, pns), start=1):
        ns = np.array([adversarial_index((N, g), int(x), grid).n_value for x in cells])
        kern = np.empty(cells.size)
        part1 = np.empty(cells.size)
        tvals = np.empty(cells.size)
        for n in np.unique(ns):
            sel = ns == n
            m1, m2 = split_multipliers(q, int(n))
            kern[sel] = _synth_at(p_hat, m1, grid)[cells[sel]]
            part1[sel] = _synth_at(f_hat, m1, grid)[cells[sel]]
            tvals[sel] = _synth_at(f_hat, m1 + m2, grid)[cells[sel]]
        sup = np.zeros(cells.size)
        for n in level_indices(N, g):
            vals = _synth_at(f_hat, q.multiplier(n), grid)[cells]
            np.maximum(sup, np.abs(vals), out=sup)
        growth = float(np.mean(sup > prev_sup)) if prev_sup is not None else float("nan")
        prev_sup = sup
        kmed = float(np.median(np.abs(kern)))
        p1med = float(np.median(np.abs(part1)))
        report.rows.append(LevelRow(
            level=k, N=N, gamma=g, samples=int(cells.size), distinct_n=int(np.unique(ns).size),
            kernel_median=kmed, c_kernel=kmed / math.sqrt(g),
            part1_median=p1med, c_part1=p1med / g ** 0.25, part1_over_sqrt_gamma=p1med / math.sqrt(g),
            T_median=float(np.median(np.abs(tvals))), sup_median=float(np.median(sup)),
            sup_growth_fraction=growth, pn_l1=pn.l1_norm(),
            pn_sup_ratio=pn.sup_norm() / (2.0 ** g * math.sqrt(g)),
        ))
    return report


def kernel_part_closed_form(q: WeightSequence, level, x_idx: int, grid: DyadicGrid) -> float:
    """Exact value of (P_N * F_{n,1})(x) at n = n(N, x) for x in E_N.

    Besides the low-block terms sum_l (-1)^{x_l} eps_l Q_{lambda(l)}, the term
    of F_{n,1} at bit N - gamma survives on supp P_N (it needs only digit
    N - 2 gamma of x + t to vanish) and contributes
    -eps_{N-2gamma} Q_{n(N-gamma)} sum_l (-1)^{x_l}.
    """
    N, gamma = level
    x_idx = grid.check_index(x_idx)
    if not build_EN(N, gamma, grid)[x_idx]:
        raise ValueError("x is not in E_N")
    adv = adversarial_index(level, x_idx, grid)
    M = grid.resolution
    block = range(N - 2 * gamma, N - gamma)
    signs = [1 - 2 * ((x_idx >> (M - 1 - l)) & 1) for l in block]
    main = sum(s * e * q.Q(adv.lam & ((2 << l) - 1)) for l, s, e in zip(block, signs, adv.chosen_bits))
    top = adv.chosen_bits[0] * q.Q(adv.n_value & ((2 << (N - gamma)) - 1)) * sum(signs)
    w = 1 - 2 * (bin(adv.n_value & digit_word(x_idx, grid)).count("1") & 1)
    return w * (main - top) / (q.Q(adv.n_value) * math.sqrt(gamma))

