"""Command-line harness: ``walshmeans <command> [options]``.

Every output starts with ``# config: <json>`` echoing the parsed options, then
a CSV body with floats at 12 significant digits. Identical options give
byte-identical output unless ``--timestamp`` is passed.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import selftest
from .counterexamples import (
    LevelPlan, divergence_report, measure_experiment, plan_from_weights, stein_sign_search,
)
from .dyadic import DyadicGrid, ResolutionError, interval_mask
from .functions import SampledFunction
from .kernels import dirichlet, kernel_split, walsh_function, weighted_kernel
from .operators import apply_T, lebesgue_sequence
from .weights import classify, diagnostics, fmt, parse_family

EXIT_USAGE = 2
EXIT_RESOLUTION = 3


class UsageError(ValueError):
    pass


def parse_range(text: str) -> list[int]:
    """'1..8,16,32..34' -> [1, ..., 8, 16, 32, 33, 34] (sorted, unique)."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = (int(v) for v in part.split(".."))
                if hi < lo:
                    raise UsageError(f"empty range '{part}'")
                out.update(range(lo, hi + 1))
            else:
                out.add(int(part))
        except ValueError as exc:
            if isinstance(exc, UsageError):
                raise
            raise UsageError(f"cannot parse index range '{part}'") from None
    if not out:
        raise UsageError("no indices given")
    return sorted(out)


def parse_levels(text: str) -> list[tuple[int, int]]:
    """'10:2,16:4' -> [(10, 2), (16, 4)]."""
    try:
        return [tuple(int(v) for v in item.split(":")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise UsageError(f"levels must look like 'N:gamma,N:gamma', got '{text}'") from None


def load_function(source: str, grid: DyadicGrid) -> SampledFunction:
    """A CSV file of 2^M values, or dirichlet:n, walsh:n, indicator:k:j."""
    kind, _, rest = source.partition(":")
    if kind in ("dirichlet", "walsh", "indicator") and rest:
        try:
            args = [int(v) for v in rest.split(":")]
        except ValueError:
            raise UsageError(f"bad built-in function '{source}'") from None
        if kind == "dirichlet" and len(args) == 1:
            return dirichlet(args[0], grid)
        if kind == "walsh" and len(args) == 1:
            return walsh_function(args[0], grid)
        if kind == "indicator" and len(args) == 2:
            return SampledFunction(grid, interval_mask(args[0], args[1], grid).astype(float))
        raise UsageError(f"bad built-in function '{source}'")
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"function source '{source}' is neither a built-in nor a file")
    values = np.loadtxt(path, delimiter=",", ndmin=1, dtype=float).ravel()
    if values.size != grid.cell_count:
        raise UsageError(f"{path} holds {values.size} values, grid needs {grid.cell_count}")
    return SampledFunction(grid, values)


def _weights(label: str, length: int):
    try:
        return parse_family(label, length)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _grid(M: int) -> DyadicGrid:
    return DyadicGrid(M)


def cmd_lebesgue(args):
    ns = parse_range(args.n)
    grid = _grid(args.grid)
    q = _weights(args.weights, max(ns) + 1)
    L = lebesgue_sequence(q, ns, grid)
    rows = [["n", "L_n"]] + [[n, fmt(v)] for n, v in zip(ns, L)]
    return rows, {"weights": q.label, "max_L": max(L), "argmax_n": ns[int(np.argmax(L))]}


def cmd_classify(args):
    q = _weights(args.weights, (1 << args.kmax) + 1)
    d = diagnostics(q, args.kmax)
    verdict = classify(q, args.kmax)
    rows = list(csv.reader(io.StringIO(d.to_csv())))
    return rows, verdict.as_dict()


def cmd_kernel(args):
    grid = _grid(args.grid)
    q = _weights(args.weights, args.n + 1)
    full = weighted_kernel(q, args.n, grid).samples
    pair = kernel_split(q, args.n, grid)
    rows = [["cell", "F_n", "F_n1", "F_n2"]]
    rows += [[i, fmt(a), fmt(b), fmt(c)] for i, (a, b, c) in
             enumerate(zip(full, pair.part1.samples, pair.part2.samples))]
    return rows, {"weights": q.label, "n": args.n, "L1": float(np.mean(np.abs(full)))}


def cmd_apply(args):
    grid = _grid(args.grid)
    ns = parse_range(args.n)
    q = _weights(args.weights, max(ns) + 1)
    f = load_function(args.function, grid)
    outs = [apply_T(q, n, f).samples for n in ns]
    rows = [["cell"] + [f"T_{n}" for n in ns]]
    rows += [[i] + [fmt(col[i]) for col in outs] for i in range(grid.cell_count)]
    return rows, {"weights": q.label, "n": ns, "sup": [float(np.max(np.abs(o))) for o in outs]}


def cmd_counterexample(args):
    grid = _grid(args.grid)
    if (args.levels is None) == (args.from_weights is None):
        raise UsageError("give exactly one of --levels or --from-weights")
    if args.levels is not None:
        plan = LevelPlan(tuple(parse_levels(args.levels)), grid, allow_overlap=args.allow_overlap)
    else:
        Ns = parse_range(args.from_weights)
        q0 = _weights(args.weights, (1 << max(Ns)) + 1)
        plan = plan_from_weights(q0, Ns, grid, allow_overlap=args.allow_overlap)
    top = plan.levels[-1][0]
    q = _weights(args.weights, max(1 << top, (1 << min(20, top)) + 1))
    rep = divergence_report(q, plan, args.samples, args.seed)
    return list(rep.csv_rows()), rep.summary()


def cmd_tensor_measure(args):
    ks = parse_range(args.k)
    rows = [["k", "axis", "ring", "value_min", "bound", "ratio"]]
    summary = {"measure": [], "stein": []}
    for k in ks:
        M = args.grid or 2 * k + 2
        grid = _grid(M)
        q = _weights(args.weights, (1 << M) + 1)
        p = _weights(args.weights_p or args.weights, (1 << M) + 1)
        rep = measure_experiment(q, p, k, grid)
        rows += [[k] + r for r in list(rep.csv_rows())[1:]]
        summary["measure"].append(rep.summary())
        if args.copies:
            st = stein_sign_search(q, p, k, args.copies, args.trials, args.seed, grid)
            summary["stein"].append(st.summary())
    return rows, summary


def cmd_selftest(args):
    rows = [["suite", "status", "detail"]]
    failed = 0
    for name, ok, detail in selftest.run_all():
        rows.append([name, "pass" if ok else "FAIL", detail])
        failed += not ok
    return rows, {"failed": failed}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="walshmeans", description="Weighted Walsh means experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None):
        p.add_argument("--out", help="write the CSV here instead of stdout")
        p.add_argument("--json", help="also write a JSON summary to this path")
        p.add_argument("--timestamp", action="store_true", help="add a UTC timestamp to the config line")
        if grid_default is not None:
            p.add_argument("--grid", type=int, default=grid_default, help="resolution M (2^M cells)")

    p = sub.add_parser("lebesgue", help="L_n = ||F_n||_1 over an index range")
    p.add_argument("--weights", required=True)
    p.add_argument("--n", required=True, help="indices, e.g. 1..1024,2048")
    common(p, 12)
    p.set_defaults(func=cmd_lebesgue)

    p = sub.add_parser("classify", help="dyadic weight diagnostics and regime verdict")
    p.add_argument("--weights", required=True)
    p.add_argument("--kmax", type=int, default=20)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("kernel", help="sample F_n and its two parts")
    p.add_argument("--weights", required=True)
    p.add_argument("--n", type=int, required=True)
    common(p, 10)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("apply", help="T_n f for a CSV or built-in function")
    p.add_argument("--weights", required=True)
    p.add_argument("--n", required=True)
    p.add_argument("--function", required=True, help="CSV path, dirichlet:n, walsh:n or indicator:k:j")
    common(p, 10)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("counterexample", help="one-variable divergence construction report")
    p.add_argument("--weights", default="harmonic")
    p.add_argument("--levels", help="explicit plan, e.g. 10:2,16:4")
    p.add_argument("--from-weights", help="levels N taken from the weights' diagnostics, e.g. 10,16")
    p.add_argument("--allow-overlap", action="store_true")
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    common(p, 18)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("tensor-measure", help="two-variable measure construction report")
    p.add_argument("--weights", default="harmonic")
    p.add_argument("--weights-p", help="second-axis weights (default: same as --weights)")
    p.add_argument("--k", default="2,3")
    p.add_argument("--grid", type=int, help="resolution per axis (default 2k+2)")
    p.add_argument("--copies", type=int, default=0, help="run the sign search with this many translates")
    p.add_argument("--trials", type=int, default=4096)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_tensor_measure)

    p = sub.add_parser("selftest", help="run the built-in invariant suites")
    common(p)
    p.set_defaults(func=cmd_selftest)
    return parser


def _config(args) -> dict:
    skip = {"func", "out", "json", "timestamp"}
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    if args.timestamp:
        cfg["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return cfg


def _error(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message, "exit": code}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rows, summary = args.func(args)
    except ResolutionError as exc:
        return _error("resolution", str(exc), EXIT_RESOLUTION)
    except ValueError as exc:
        return _error("usage", str(exc), EXIT_USAGE)

    buf = io.StringIO()
    buf.write(f"# config: {json.dumps(_config(args), sort_keys=True)}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    if args.json:
        Path(args.json).write_text(json.dumps(summary, indent=2, sort_keys=True, default=str) + "\n")
    if args.command == "selftest" and summary["failed"]:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
