"""Command-line front end.

Commands: analyze, bound, duality, chain, extend, validate, search, sweep.
Shared flags (given after the subcommand): --seed, --restarts, --iters,
--tol, --format {text|structured}.

--tol sets the optimizer convergence tolerance (default 1e-7) and, for the
commands that assert something (duality, chain), the pass threshold
(default 2e-3).

Exit codes: 0 success, 2 input/parse error, 3 invariant violation,
4 check failure beyond tolerance.  Reports embed the seed; apart from
wall_time_ms a report is a deterministic function of (inputs, flags, seed).
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .extension import build, search_extension, validate
from .kernels import _impl_py as PK
from .kernels import backend_name
from .measures import (
    OptBudget,
    classical_correlation,
    entropy,
    eof_2q,
    eof_convex_roof,
    g_arrow,
    ppt_entangled,
)
from .monogamy import chain_verify, duality_check, monogamy_step_check, sharability_bound
from .qmat import DensityMatrix, StateInvariantError, partial_trace, random_pure_state, random_state
from .statefile import StateFileError, load_state, save_state

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INVARIANT = 3
EXIT_CHECK = 4

DEFAULT_OPT_TOL = 1e-7
DEFAULT_CHECK_TOL = 2e-3


class CheckFailure(Exception):
    """A computed check exceeded its tolerance; carries the full report."""

    def __init__(self, report, message):
        super().__init__(message)
        self.report = report


def _budget(args) -> OptBudget:
    tol = args.tol if args.tol is not None else DEFAULT_OPT_TOL
    return OptBudget(restarts=args.restarts, iters=args.iters, tol=tol, seed=args.seed)


def _check_tol(args) -> float:
    return args.tol if args.tol is not None else DEFAULT_CHECK_TOL


def _state_seed(master, index):
    # per-state stream for sweeps, derived from the master seed
    return PK.mix_seed(master, 7001 + index, 0) % (2**63)


def _report(command, inputs, results, directions=None, notes=None):
    return {
        "format": "entmono-report-v1",
        "command": command,
        "inputs": inputs,
        "results": results,
        "estimates_direction": directions or {},
        "notes": notes or [],
        "wall_time_ms": 0.0,
    }


def render_structured(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.9g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def render_text(report) -> str:
    lines = [f"entmono {report['command']}  (backend: {backend_name()})"]
    for section in ("inputs", "results"):
        lines.append(f"{section}:")
        for key in sorted(report[section]):
            tag = ""
            direction = report["estimates_direction"].get(key)
            if section == "results" and direction:
                tag = f"  [{direction}]"
            lines.append(f"  {key} = {_fmt(report[section][key])}{tag}")
    for note in report["notes"]:
        lines.append(f"note: {note}")
    lines.append(f"wall_time_ms = {report['wall_time_ms']:.1f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_analyze(args):
    loaded = load_state(args.file)
    rho = loaded.density()
    if len(rho.dims) != 2:
        raise StateInvariantError("bipartite state required")
    budget = _budget(args)
    s_a = entropy(partial_trace(rho, [0]))
    s_b = entropy(partial_trace(rho, [1]))
    if rho.dims == (2, 2):
        eof_val, eof_method, eof_dir = eof_2q(rho), "closed-form", "exact"
        eof_meta = {}
    else:
        r = eof_convex_roof(rho, [0], budget)
        eof_val, eof_method, eof_dir = r.value, "convex-roof", "upper"
        eof_meta = {"eof_restarts_used": r.restarts_used, "eof_best_gap": r.best_gap}
    cc = classical_correlation(rho, 1, budget)
    g = g_arrow(rho, 1, budget)
    results = {
        "s_a": s_a,
        "s_b": s_b,
        "eof": float(eof_val),
        "eof_method": eof_method,
        "cc": cc.value,
        "cc_restarts_used": cc.restarts_used,
        "cc_best_gap": cc.best_gap,
        "g_arrow": g.value,
        "g_arrow_restarts_used": g.restarts_used,
        "g_arrow_best_gap": g.best_gap,
        "ppt": ppt_entangled(rho, [0]),
    }
    results.update(eof_meta)
    directions = {"s_a": "exact", "s_b": "exact", "eof": eof_dir,
                  "cc": "lower", "g_arrow": "upper", "ppt": "exact"}
    notes = ["cc is a best-found lower estimate; eof/g_arrow are best-found "
             "upper estimates (ensemble search capped at rank^2 outcomes)"]
    inputs = _inputs(args, file=args.file)
    return _report("analyze", inputs, results, directions, notes)


def cmd_bound(args):
    loaded = load_state(args.file)
    rho = loaded.density()
    if len(rho.dims) != 2:
        raise StateInvariantError("bipartite state required")
    rep = sharability_bound(rho, _budget(args))
    results = {
        "s_a": rep.s_a,
        "g_arrow": rep.g_arrow_ab,
        "separability": rep.separability_verdict,
        "status": rep.status,
        "n_max": rep.n_max if rep.n_max is not None else rep.status.upper(),
        "margin": rep.margin,
        "tie": rep.tie,
        "restarts_used": rep.restarts_used,
        "best_gap": rep.best_gap,
    }
    directions = {"s_a": "exact", "g_arrow": "upper", "separability": "exact"}
    notes = []
    if rep.status == "unreliable":
        notes.append("bound unreliable: g_arrow below optimizer resolution")
    if rep.tie:
        notes.append("ratio within 1e-6 of an integer; reported as that integer")
    return _report("bound", _inputs(args, file=args.file), results, directions, notes)


def cmd_duality(args):
    loaded = load_state(args.file)
    if loaded.kind != "pure":
        raise StateInvariantError("duality requires a pure tripartite state")
    phi = loaded.state
    rep = duality_check(phi, _budget(args))
    tol = _check_tol(args)
    results = {
        "s_a": rep.s_a,
        "eof_ab": rep.eof_ab,
        "cc_ac": rep.cc_ac,
        "residual": rep.residual,
        "tolerance": tol,
    }
    directions = {"s_a": "exact",
                  "eof_ab": "exact" if rep.eof_exact else "upper",
                  "cc_ac": "lower"}
    report = _report("duality", _inputs(args, file=args.file), results, directions)
    if abs(rep.residual) > tol:
        raise CheckFailure(report, f"duality residual {rep.residual:.3e} exceeds {tol:g}")
    return report


def cmd_chain(args):
    loaded = load_state(args.file)
    rho = loaded.density()
    rep = chain_verify(rho, _budget(args))
    tol = _check_tol(args)
    results = {
        "n": rep.n,
        "s_a": rep.s_a,
        "g_arrow": rep.g_arrow_ab,
        "final_margin": rep.final_margin,
        "ef_estimates": list(rep.ef_estimates),
        "step_slacks": list(rep.step_slacks),
        "marginal_deviation": rep.marginal_deviation,
        "tolerance": tol,
    }
    directions = {"s_a": "exact", "g_arrow": "upper", "final_margin": "exact-minus-upper"}
    notes = ["per-step EoF estimates are advisory upper estimates"]
    report = _report("chain", _inputs(args, file=args.file), results, directions, notes)
    if rep.final_margin < -tol:
        raise CheckFailure(report, f"chain margin {rep.final_margin:.3e} below -{tol:g}")
    return report


def cmd_extend(args):
    loaded = load_state(args.file)
    if loaded.decomposition is None:
        raise StateFileError("decomposition: block required for extend")
    rho = loaded.density()
    dev = float(np.max(np.abs(loaded.decomposition.target().matrix - rho.matrix)))
    if dev > 1e-8:
        raise StateInvariantError(
            f"decomposition does not reproduce the declared state (deviation {dev:.3e})"
        )
    ext = build(loaded.decomposition, args.n)
    verdict = validate(ext, rho)
    save_state(args.out, ext)
    results = {
        "n": args.n,
        "dims": list(ext.dims),
        "valid": verdict.valid,
        "deviation": verdict.deviation,
        "out": args.out,
    }
    return _report("extend", _inputs(args, file=args.file, n=args.n, out=args.out), results)


def cmd_validate(args):
    ext = load_state(args.file).density()
    target = load_state(args.target).density()
    verdict = validate(ext, target)
    results = {
        "valid": verdict.valid,
        "first_bad_share": verdict.k,
        "deviation": verdict.deviation,
    }
    report = _report("validate", _inputs(args, file=args.file, target=args.target), results)
    if not verdict.valid:
        raise CheckFailure(
            report,
            f"share {verdict.k} deviates by {verdict.deviation:.3e}",
        )
    return report


def cmd_search(args):
    target = load_state(args.file).density()
    if len(target.dims) != 2:
        raise StateInvariantError("bipartite state required")
    res = search_extension(target, args.n, _budget(args))
    results = {
        "n": args.n,
        "found": res.found,
        "best_deviation": res.best_deviation,
        "rounds": res.rounds,
        "starts_used": res.starts_used,
    }
    notes = []
    if not res.found:
        notes.append("miss is evidence, not a certificate of non-extendability")
    if res.found and args.out:
        save_state(args.out, res.state)
        results["out"] = args.out
    return _report("search", _inputs(args, file=args.file, n=args.n), results, notes=notes)


def _bell4():
    m = np.zeros((4, 4))
    m[0, 0] = m[0, 3] = m[3, 0] = m[3, 3] = 0.5
    return m


def _parse_grid(spec):
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise StateFileError(f"grid: expected start:stop:step, got {spec!r}") from None
    if step <= 0:
        raise StateFileError("grid: step must be positive")
    out = []
    p = start
    while p <= stop + 1e-12:
        out.append(round(p, 12))
        p += step
    return out


def cmd_sweep(args):
    budget0 = _budget(args)
    tol = _check_tol(args)
    rows = []
    header: list
    violations = 0
    monotonic = "n/a"
    summary = {}

    if args.family == "werner":
        grid = _parse_grid(args.grid)
        header = ["p", "s_a", "eof", "cc", "g_arrow", "separability",
                  "n_max", "margin"]
        bell = _bell4()
        bounded_ns = []
        for i, p in enumerate(grid):
            st = DensityMatrix(p * bell + (1 - p) * np.eye(4) / 4, (2, 2))
            b = OptBudget(budget0.restarts, budget0.iters, budget0.tol,
                          _state_seed(args.seed, i))
            cc = classical_correlation(st, 1, b)
            rep = sharability_bound(st, b)
            if rep.g_arrow_ab > cc.value + tol:
                violations += 1
            if rep.status == "bounded" and rep.separability_verdict == "entangled":
                bounded_ns.append(rep.n_max)
            rows.append([p, rep.s_a, eof_2q(st), cc.value, rep.g_arrow_ab,
                         rep.separability_verdict,
                         rep.n_max if rep.n_max is not None else rep.status.upper(),
                         rep.margin])
        monotonic = "pass" if all(
            bounded_ns[i] >= bounded_ns[i + 1] for i in range(len(bounded_ns) - 1)
        ) else "fail"
        summary = {"grid": grid, "n_values": bounded_ns}
    elif args.family == "haar-pure":
        header = ["index", "s_a", "eof_ab", "cc_ac", "residual"]
        worst = 0.0
        for i in range(args.count):
            phi = random_pure_state((2, 2, 2), seed=_state_seed(args.seed, i))
            b = OptBudget(budget0.restarts, budget0.iters, budget0.tol,
                          _state_seed(args.seed, i))
            rep = duality_check(phi, b)
            worst = max(worst, abs(rep.residual))
            if abs(rep.residual) > tol:
                violations += 1
            rows.append([i, rep.s_a, rep.eof_ab, rep.cc_ac, rep.residual])
        summary = {"max_abs_residual": worst}
    elif args.family == "hs-mixed":
        header = ["index", "slack"]
        worst = None
        for i in range(args.count):
            st = random_state((2, 2, 2), "rank-limited",
                              seed=_state_seed(args.seed, i), rank=2)
            b = OptBudget(budget0.restarts, budget0.iters, budget0.tol,
                          _state_seed(args.seed, i))
            slack = monogamy_step_check(st, b)
            worst = slack if worst is None else min(worst, slack)
            if slack < -tol:
                violations += 1
            rows.append([i, slack])
        summary = {"min_slack": worst}
    else:  # pragma: no cover - argparse restricts choices
        raise StateFileError(f"unknown family: {args.family}")

    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(_fmt(v) for v in row) + "\n")

    results = {
        "family": args.family,
        "states": len(rows),
        "violations": violations,
        "monotonicity": monotonic,
        "table": args.out,
        "tolerance": tol,
    }
    results.update(summary)
    inputs = _inputs(args, family=args.family, grid=getattr(args, "grid", None),
                     count=getattr(args, "count", None), out=args.out)
    return _report("sweep", inputs, results)


def _inputs(args, **extra):
    base = {
        "seed": args.seed,
        "restarts": args.restarts,
        "iters": args.iters,
        "tol": args.tol,
    }
    base.update({k: v for k, v in extra.items() if v is not None})
    return base


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    shared.add_argument("--restarts", type=int, default=32,
                        help="optimizer restarts (default 32)")
    shared.add_argument("--iters", type=int, default=400,
                        help="iterations per restart (default 400)")
    shared.add_argument("--tol", type=float, default=None,
                        help="optimizer tolerance (default 1e-7) and, where a "
                             "command asserts a check, its threshold (default 2e-3)")
    shared.add_argument("--format", choices=["text", "structured"], default="text",
                        help="report format (default text)")

    p = argparse.ArgumentParser(
        prog="entmono",
        description="Entanglement monogamy toolkit: correlation measures, "
                    "shareability bounds, and n-extensions of bipartite states.",
    )
    p.add_argument("--version", action="version", version=f"entmono {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("analyze", parents=[shared],
                        help="entropies, EoF, classical correlation, its roof, PPT verdict")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_analyze)

    sp = sub.add_parser("bound", parents=[shared],
                        help="shareability bound N = floor(S_A / G)")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_bound)

    sp = sub.add_parser("duality", parents=[shared],
                        help="check S(A) = EoF(A:B) + C(A:C) on a pure tripartite state")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_duality)

    sp = sub.add_parser("chain", parents=[shared],
                        help="audit S(A) >= n G(A:B) on an n-extension")
    sp.add_argument("file")
    sp.set_defaults(fn=cmd_chain)

    sp = sub.add_parser("extend", parents=[shared],
                        help="build the n-share extension of a product mixture")
    sp.add_argument("file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(fn=cmd_extend)

    sp = sub.add_parser("validate", parents=[shared],
                        help="check a claimed extension against its target")
    sp.add_argument("file")
    sp.add_argument("--target", required=True)
    sp.set_defaults(fn=cmd_validate)

    sp = sub.add_parser("search", parents=[shared],
                        help="look for a symmetric n-extension by alternating projections")
    sp.add_argument("file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(fn=cmd_search)

    sp = sub.add_parser("sweep", parents=[shared],
                        help="batch runs over a state family with a summary table")
    sp.add_argument("--family", choices=["werner", "haar-pure", "hs-mixed"], required=True)
    sp.add_argument("--grid", default="0.4:1.0:0.1",
                    help="werner parameter grid start:stop:step")
    sp.add_argument("--count", type=int, default=20,
                    help="number of random states (haar-pure, hs-mixed)")
    sp.add_argument("--out", required=True, help="table output path (TSV)")
    sp.set_defaults(fn=cmd_sweep)
    return p


def _emit(report, args, stream=None):
    stream = stream or sys.stdout
    if args.format == "structured":
        stream.write(render_structured(report))
    else:
        stream.write(render_text(report))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code else EXIT_OK
    t0 = time.perf_counter()
    try:
        report = args.fn(args)
    except StateFileError as e:
        print(f"entmono: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except CheckFailure as e:
        e.report["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
        _emit(e.report, args)
        print(f"entmono: check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except (StateInvariantError, ValueError) as e:
        print(f"entmono: invariant violation: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    report["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    _emit(report, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
