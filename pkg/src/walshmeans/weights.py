"""Weight sequences q_k, their prefix sums Q_n and the dyadic-block diagnostics.

Q_n = q_0 + ... + q_{n-1}. The diagnostics work on the dyadic samples Q_{2^k}:

* pi_k      = (Q_{2^k} - Q_{2^{k-1}}) / Q_{2^{k-1}}
* ratio_k   = Q_{2^k} / Q_{2^{k-1}}
* crit4_k   = 2^k q_{2^k} / Q_{2^k}
* rho_n     = (Q_{2^0} + ... + Q_{2^n}) / Q_{2^n}
* delta(l,k) = max(pi_s : k - l <= s <= k)
* gamma_k   = first l with delta(l+1, k) > 1/(l+1), or floor(k/2) if none
* hardy_n   = 2^n / Q_{2^n}
"""
from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

FAMILIES = ("delta", "ones", "cesaro", "harmonic", "log_over_k", "log_damped")


class DegenerateWeightsError(ValueError):
    """Raised when a normalizing prefix sum Q_n vanishes."""


@dataclass(frozen=True, eq=False)
class WeightSequence:
    values: np.ndarray
    family: str = "custom"
    params: dict = field(default_factory=dict)
    prefix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        q = np.array(self.values, dtype=np.float64, copy=True)
        if q.ndim != 1 or q.size < 1:
            raise ValueError("weights must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(q)) or np.any(q < 0):
            raise ValueError("weights must be finite and non-negative")
        q.setflags(write=False)
        prefix = np.concatenate(([0.0], np.cumsum(q)))
        prefix.setflags(write=False)
        object.__setattr__(self, "values", q)
        object.__setattr__(self, "prefix", prefix)
        if not self.is_monotone:
            warnings.warn(f"weights '{self.label}' are not non-increasing", stacklevel=3)

    @property
    def length(self) -> int:
        return self.values.size

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    @property
    def label(self) -> str:
        if not self.params:
            return self.family
        args = ",".join(f"{v:g}" for v in self.params.values())
        return f"{self.family}({args})"

    def q(self, k: int) -> float:
        if not 0 <= k < self.length:
            raise IndexError(f"q_{k} beyond the stored {self.length} weights")
        return float(self.values[k])

    def Q(self, n: int) -> float:
        if not 0 <= n <= self.length:
            raise IndexError(f"Q_{n} needs {n} weights, only {self.length} stored")
        return float(self.prefix[n])

    def Q_normalizer(self, n: int) -> float:
        """Q_n, refusing the degenerate case Q_n = 0."""
        Qn = self.Q(n)
        if Qn <= 0:
            raise DegenerateWeightsError(f"Q_{n} = 0 for weights '{self.label}'")
        return Qn

    def multiplier(self, n: int) -> np.ndarray:
        """Q_{n-j} / Q_n for j = 0 .. n-1: the Walsh coefficients of the kernel F_n."""
        Qn = self.Q_normalizer(n)
        return self.prefix[n:0:-1] / Qn


def _noninc_envelope(q: np.ndarray) -> np.ndarray:
    # smallest non-increasing majorant; only flattens the initial hump
    return np.maximum.accumulate(q[::-1])[::-1]


def make_weights(family: str, length: int, alpha: float = 0.5, beta: float = 0.5) -> WeightSequence:
    """Build one of the catalogued weight families.

    ``alpha`` is used by ``cesaro`` (q_j = A_j^{alpha-1}), ``beta`` by
    ``log_damped`` (q_j = 1/((j+1) log^beta(j+1))). Singular leading terms
    are replaced so the sequence stays non-increasing.
    """
    if length < 2:
        raise ValueError("length must be at least 2")
    j = np.arange(length, dtype=np.float64)
    params: dict = {}
    if family == "delta":
        q = np.zeros(length)
        q[0] = 1.0
    elif family == "ones":
        q = np.ones(length)
    elif family == "cesaro":
        if not 0 < alpha <= 1:
            raise ValueError("cesaro needs alpha in (0, 1]")
        # A_j^{a-1} = prod_{i<=j} (a - 1 + i) / i
        factors = np.empty(length)
        factors[0] = 1.0
        factors[1:] = (alpha - 1.0 + j[1:]) / j[1:]
        q = np.cumprod(factors)
        params = {"alpha": float(alpha)}
    elif family == "harmonic":
        q = np.empty(length)
        q[0] = 1.0
        q[1:] = 1.0 / j[1:]
    elif family == "log_over_k":
        q = np.empty(length)
        q[1:] = np.log(j[1:]) / j[1:]
        q[0] = 0.0
        q = _noninc_envelope(q)
    elif family == "log_damped":
        if not beta < 1:
            raise ValueError("log_damped needs beta < 1")
        q = np.empty(length)
        x = j[1:] + 1.0
        q[1:] = 1.0 / (x * np.log(x) ** beta)
        q[0] = q[1]
        q = _noninc_envelope(q)
        params = {"beta": float(beta)}
    else:
        raise ValueError(f"unknown weight family '{family}'; choose from {FAMILIES}")
    return WeightSequence(q, family, params)


def parse_family(label: str, length: int) -> WeightSequence:
    """Parse 'harmonic', 'cesaro(0.5)', 'cesaro:0.5' or 'log_damped(0.3)'."""
    text = label.strip().replace(":", "(")
    name, _, rest = text.partition("(")
    name = name.strip()
    arg = rest.rstrip(")").strip()
    kwargs = {}
    if arg:
        value = float(arg)
        if name == "cesaro":
            kwargs["alpha"] = value
        elif name == "log_damped":
            kwargs["beta"] = value
        else:
            raise ValueError(f"family '{name}' takes no parameter")
    return make_weights(name, length, **kwargs)


@dataclass(frozen=True, eq=False)
class WeightDiagnostics:
    k_max: int
    Q_dyadic: np.ndarray      # Q_{2^k}, k = 0..k_max
    pi: np.ndarray            # pi_k, k = 0..k_max (entry 0 is NaN)
    ratio: np.ndarray         # Q_{2^k}/Q_{2^{k-1}} (entry 0 is NaN)
    crit4: np.ndarray         # 2^k q_{2^k} / Q_{2^k}
    rho_partials: np.ndarray  # (1/Q_{2^n}) sum_{k<=n} Q_{2^k}
    delta_table: np.ndarray   # delta_table[l, k]; NaN where undefined
    gamma: np.ndarray         # gamma_k, k = 0..k_max
    gamma_met: np.ndarray     # True where the meeting point exists
    hardy: np.ndarray         # 2^n / Q_{2^n}

    def beta_estimate(self) -> float:
        return float(np.mean(self.pi[tail_slice(self.k_max)]))

    def delta(self, l: int, k: int) -> float:
        return float(self.delta_table[l, k])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "Q_2k", "pi_k", "ratio", "crit4", "rho_partial", "gamma_k", "hardy"])
        for k in range(self.k_max + 1):
            w.writerow([k, fmt(self.Q_dyadic[k]), fmt(self.pi[k]), fmt(self.ratio[k]),
                        fmt(self.crit4[k]), fmt(self.rho_partials[k]), int(self.gamma[k]),
                        fmt(self.hardy[k])])
        return buf.getvalue()


def fmt(x) -> str:
    """Twelve significant digits; the fixed float format of every CSV we write."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def tail_slice(k_max: int) -> slice:
    """Indices of the last quarter of k = 1..k_max."""
    width = max(1, -(-k_max // 4))
    return slice(k_max - width + 1, k_max + 1)


def diagnostics(q: WeightSequence, k_max: int) -> WeightDiagnostics:
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if q.length < (1 << k_max) + 1:
        raise ValueError(f"diagnostics up to k={k_max} need {2 ** k_max + 1} weights, got {q.length}")
    ks = np.arange(k_max + 1)
    pows = 1 << ks
    Qd = q.prefix[pows]
    if np.any(Qd <= 0):
        raise DegenerateWeightsError("Q_{2^k} vanishes")
    pi = np.full(k_max + 1, np.nan)
    ratio = np.full(k_max + 1, np.nan)
    for k in range(1, k_max + 1):
        block = float(np.sum(q.values[1 << (k - 1): 1 << k]))
        pi[k] = block / Qd[k - 1]
        ratio[k] = Qd[k] / Qd[k - 1]
    crit4 = pows * q.values[pows] / Qd
    rho = np.cumsum(Qd) / Qd
    hardy = pows / Qd

    table = np.full((k_max + 1, k_max + 1), np.nan)
    for k in range(1, k_max + 1):
        for l in range(k):
            table[l, k] = np.max(pi[k - l: k + 1])

    gamma = np.zeros(k_max + 1, dtype=np.int64)
    met = np.zeros(k_max + 1, dtype=bool)
    for k in range(k_max + 1):
        g = None
        # delta(l+1, k) is defined for l + 1 < k
        for l in range(0, k - 1):
            if table[l + 1, k] > 1.0 / (l + 1):
                g = l
                break
        if g is None:
            gamma[k] = k // 2
        else:
            gamma[k] = g
            met[k] = True
    return WeightDiagnostics(k_max, Qd, pi, ratio, crit4, rho, table, gamma, met, hardy)


@dataclass(frozen=True)
class Thresholds:
    """Bands turning finite traces into trend calls.

    A positive sequence "tends to 0" when its last-quarter mean is below
    ``zero_tol`` or has fallen below ``decay_ratio`` times its second-quarter
    mean. A partial-sum trace is "unbounded" when its late increments keep at
    least ``growth_ratio`` of its early increments.
    """
    zero_tol: float = 0.02
    decay_ratio: float = 0.8
    growth_ratio: float = 0.85
    oscillation_tol: float = 0.05
    margin: float = 0.1


def early_slice(k_max: int) -> slice:
    """Second quarter of k = 1..k_max, the reference window for decay tests."""
    width = max(1, -(-k_max // 4))
    start = min(width + 1, max(1, k_max // 2 - width + 1))
    return slice(start, start + width)


def _decays(trace: np.ndarray, k_max: int, th: Thresholds) -> tuple[bool, float, bool]:
    tail = float(np.mean(trace[tail_slice(k_max)]))
    early = float(np.mean(trace[early_slice(k_max)]))
    if tail < th.zero_tol:
        return True, tail, tail > th.zero_tol * (1 - th.margin)
    rel = tail / early if early > 0 else math.inf
    close = abs(rel - th.decay_ratio) < th.margin * th.decay_ratio
    return rel < th.decay_ratio, tail, close


def _grows(increments: np.ndarray, th: Thresholds) -> tuple[bool, float, bool]:
    m = increments.size
    width = max(1, m // 3)
    early = float(np.mean(increments[:width]))
    late = float(np.mean(increments[-width:]))
    if early <= 0:
        return late > 0, math.inf if late > 0 else 0.0, False
    rel = late / early
    close = abs(rel - th.growth_ratio) < th.margin * th.growth_ratio
    return rel >= th.growth_ratio, rel, close


def _tail_monotone(trace: np.ndarray, k_max: int) -> bool:
    d = np.diff(trace[k_max // 2:])
    return bool(np.all(d <= 1e-12) or np.all(d >= -1e-12))


@dataclass
class Verdict:
    family: str
    k_max: int
    ratio_to_one: bool
    crit4_to_zero: bool
    rho_unbounded: bool
    lebesgue_unbounded: bool | None
    regime: str
    coherent: bool
    confidence: str
    beta_estimate: float
    ratio_limit: float
    crit4_limit: float
    rho_growth: float
    assumption_a: bool
    hardy_bounded: bool
    monotone_weights: bool
    lebesgue_trace: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def alternating_index(m: int) -> int:
    """2^m + 2^{m-2} + ... down to bit m mod 2; the n_k of the tensor construction when m = 2k."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return sum(1 << b for b in range(m % 2, m + 1, 2))


def classify(q: WeightSequence, k_max: int = 20, thresholds: Thresholds | None = None,
             lebesgue_m: int | None = None) -> Verdict:
    """Finite-range reading of the four equivalent weight criteria.

    With ``lebesgue_m`` set, the Lebesgue constants at the alternating indices
    of top bit 2, 4, ..., lebesgue_m are computed too (cost grows like 2^m).
    """
    th = thresholds or Thresholds()
    d = diagnostics(q, k_max)
    notes = []

    ratio_to_one, pi_tail, close_pi = _decays(d.pi, k_max, th)
    crit4_to_zero, crit4_tail, close_c4 = _decays(d.crit4, k_max, th)
    rho_unbounded, rho_growth, close_rho = _grows(np.diff(d.rho_partials)[1:], th)

    leb_unbounded = None
    leb_trace = []
    if lebesgue_m is not None:
        from .dyadic import DyadicGrid
        from .operators import lebesgue_sequence
        ms = list(range(2, lebesgue_m + 1, 2))
        if len(ms) < 3:
            raise ValueError("lebesgue_m must be at least 6")
        ns = [alternating_index(m) for m in ms]
        if q.length < ns[-1]:
            raise ValueError("weights too short for the requested Lebesgue check")
        L = lebesgue_sequence(q, ns, DyadicGrid(lebesgue_m + 1))
        leb_trace = [(m, n, v) for m, n, v in zip(ms, ns, L)]
        leb_unbounded, _, _ = _grows(np.diff(L), th)

    calls = [ratio_to_one, crit4_to_zero, rho_unbounded]
    if leb_unbounded is not None:
        calls.append(leb_unbounded)
    coherent = len(set(calls)) == 1

    tail = tail_slice(k_max)
    ratio_tail = d.ratio[tail]
    assumption_a = float(np.max(ratio_tail) - np.min(ratio_tail)) <= th.oscillation_tol
    if not assumption_a:
        notes.append("ratio Q_2^k/Q_2^(k-1) oscillates in the tail; limit (A) doubtful")
    hardy_bounded = float(np.mean(d.hardy[tail])) <= (1 + th.margin) * float(np.mean(d.hardy[early_slice(k_max)]))
    if not q.is_monotone:
        notes.append("weights are not non-increasing")

    low = close_pi or close_c4 or close_rho or not coherent
    low = low or not (_tail_monotone(d.pi, k_max) and _tail_monotone(d.crit4, k_max))
    return Verdict(
        family=q.label,
        k_max=k_max,
        ratio_to_one=ratio_to_one,
        crit4_to_zero=crit4_to_zero,
        rho_unbounded=rho_unbounded,
        lebesgue_unbounded=leb_unbounded,
        regime="divergent" if rho_unbounded else "a.e.-convergent",
        coherent=coherent,
        confidence="low" if low else "high",
        beta_estimate=pi_tail,
        ratio_limit=float(np.mean(ratio_tail)),
        crit4_limit=crit4_tail,
        rho_growth=rho_growth,
        assumption_a=assumption_a,
        hardy_bounded=hardy_bounded,
        monotone_weights=q.is_monotone,
        lebesgue_trace=leb_trace,
        warnings=notes,
    )
