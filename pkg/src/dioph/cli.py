"""Command-line front end: verify, search, bounds, roots, check."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from dioph import __version__
from dioph.admissibility import OptimizerConfig, is_admissible
from dioph.algebraic import parse
from dioph.bounds import bounds_table
from dioph.parallelepiped import load_matrix
from dioph.polyroots import (
    NotSquareFree,
    ZeroPolynomial,
    ZeroSignAtPoint,
    count_roots_bisection,
    load_polynomial,
    max_roots_in_interval,
    newton_sylvester_table,
)
from dioph.search import (
    STRATEGIES,
    NoAdmissibleCandidate,
    Parameterization,
    SearchConfig,
    configure_logging,
    refine_search,
    resolve_workers,
)
from dioph.starbody import StarBody
from dioph import theorems as th

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ZERO_STAMP = "1970-01-01T00:00:00Z"
THEOREMS = ("f0", "f1", "f2", "f3", "v3", "v4", "v5", "v6", "general", "all")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command_line: list
    seed: Optional[int]
    config: dict
    tool_version: str = __version__
    start: str = ZERO_STAMP
    end: str = ZERO_STAMP
    host_threads: int = field(default_factory=lambda: os.cpu_count() or 1)


def _stamp(deterministic: bool) -> str:
    return ZERO_STAMP if deterministic else time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


# ---------------------------------------------------------------------------
# JSON with 17 significant digits


def _float_text(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def dumps17(obj, indent: int = 2) -> str:
    floats: list[str] = []

    def walk(o):
        if isinstance(o, (bool, type(None), str, int)) and not isinstance(o, np.integer):
            return o
        if isinstance(o, (float, np.floating)):
            floats.append(_float_text(float(o)))
            return f"\x00{len(floats) - 1}\x00"
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, dict):
            return {str(k): walk(v) for k, v in o.items()}
        if isinstance(o, (list, tuple, np.ndarray)):
            return [walk(v) for v in o]
        return str(o)

    text = json.dumps(walk(obj), indent=indent)
    for i, f in enumerate(floats):
        text = text.replace(f'"\\u0000{i}\\u0000"', f, 1)
    return text + "\n"


def _human(x: float) -> str:
    """Six significant digits, positional."""
    if x == 0 or not math.isfinite(x):
        return str(x)
    digits = 5 - math.floor(math.log10(abs(x)))
    return f"{x:.{max(digits, 0)}f}"


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(args, payload: dict, manifest: RunManifest) -> None:
    manifest.end = _stamp(args.deterministic)
    _emit(dumps17({"manifest": asdict(manifest), **payload}), args.out)


# ---------------------------------------------------------------------------
# subcommands


def _verify_one(name: str, oracle_step: Optional[float], polish: int) -> tuple[list, dict]:
    results, steps = [], {}
    if name.startswith("f"):
        which = name.upper()
        results.append(th.closed_form_max(which, oracle_step, polish).to_json())
        check = {"F2": th.verify_f2_interval_facts, "F3": th.verify_f3_interval_facts}.get(which)
        if check is not None:
            passed: list = []
            try:
                check(steps=passed)
            except (th.StepFailed, NotSquareFree) as exc:
                steps[getattr(exc, "step", type(exc).__name__)] = f"FAIL: {exc}"
            for s in passed:
                steps[s] = "pass"
            ledger = th.replay_ledger()
            prefix = which.lower() + "."
            for key, ok in ledger.items():
                if key.startswith(prefix):
                    steps[f"ledger.{key}"] = "pass" if ok else "FAIL"
    elif name.startswith("v"):
        n = int(name[1:])
        res = th.verify_theorem_V(n)
        sol = th.solve_inverse_system(n)
        res.certificates["inverse_system"] = {
            "params": sol.params,
            "objective": sol.objective,
            "objective_gap": abs(sol.objective - res.float_value),
            "max_constraint_residual": max(abs(v) for v in sol.constraint_residuals),
        }
        ok_inv = abs(sol.objective - res.float_value) < 1e-9
        steps[f"v{n}.inverse_system"] = "pass" if ok_inv else "FAIL"
        res.verified = res.verified and ok_inv
        results.append(res.to_json())
    else:
        for n in range(3, 13):
            g = th.general_V_bound(n)
            g.name = f"general.V{n}"
            decomps = th.valid_decompositions(n)
            worst = max(th.exact_float(th.decomposition_volume(d)) for d in decomps)
            ok = g.float_value >= worst - 1e-12
            if n <= 6:
                ok = ok and th.exact_square(g.exact_value) == th.exact_square(th.BASE_VOLUMES[n])
            g.verified = bool(ok)
            g.certificates["decompositions"] = [list(d) for d in decomps]
            g.certificates["best_decomposition_volume"] = worst
            steps[f"general.n{n}"] = "pass" if ok else "FAIL"
            results.append(g.to_json())
    return results, steps


def cmd_verify(args, manifest: RunManifest) -> int:
    if args.oracle_step is not None and args.oracle_step <= 0:
        raise UsageError("--oracle-step must be positive")
    names = [t for t in THEOREMS if t not in ("all",)] if args.theorem == "all" else [args.theorem]
    results, steps = [], {}
    for name in names:
        r, s = _verify_one(name, args.oracle_step, args.polish_starts)
        results += r
        steps.update(s)
    if args.theorem == "all":
        ledger = th.replay_ledger()
        steps.update({f"ledger.{k}": "pass" if v else "FAIL" for k, v in ledger.items()})
    ok = all(r["verified"] for r in results) and all(v == "pass" for v in steps.values())
    _report(args, {"ok": ok, "results": results, "steps": steps}, manifest)
    return EXIT_OK if ok else EXIT_FAIL


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like LO:HI, got {text!r}") from None
    return lo, hi


def cmd_search(args, manifest: RunManifest) -> int:
    try:
        param = Parameterization(args.n, args.s, args.family, args.vars)
        lo, hi = _range(args.range)
        cfg = SearchConfig(
            var_count=param.var_count,
            lo=(lo,),
            hi=(hi,),
            intervals=args.intervals,
            refine_intervals=args.refine_intervals,
            iterations=args.iterations,
            slack=args.slack,
            seed=args.seed,
            workers=resolve_workers(args.workers),
            strategy=args.strategy,
            admissibility=OptimizerConfig(seed=args.seed),
        )
        body = StarBody(args.n, args.s)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    configure_logging(args.log, echo=False, deterministic=args.deterministic)
    try:
        res = refine_search(cfg, param, body, deterministic=args.deterministic)
    except NoAdmissibleCandidate as exc:
        _report(args, {"ok": False, "error": str(exc)}, manifest)
        return EXIT_FAIL
    m = param(res.best_params)
    payload = {
        "ok": bool(res.confirmed),
        "result": res.to_json(),
        "matrix": m.to_json(args.s),
    }
    _report(args, payload, manifest)
    return EXIT_OK if res.confirmed else EXIT_FAIL


CSV_COLUMNS = ("n", "v_bound_exact", "v_bound_float", "delta", "c_exact", "c_float", "furtwangler_baseline")


def cmd_bounds(args, manifest: RunManifest) -> int:
    try:
        rows = bounds_table(args.min_n, args.max_n, include_historical=args.include_historical)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    data = [r.row() for r in rows]
    for r, d in zip(rows, data):
        d["historical"] = r.historical
    ok = all(r.historical or r.c_lower_float > r.furtwangler for r in rows)
    if args.format == "json":
        _report(args, {"ok": ok, "rows": data}, manifest)
        return EXIT_OK if ok else EXIT_FAIL

    def cell(v):
        if isinstance(v, float):
            return "" if math.isnan(v) else _human(v)
        return str(v)

    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for d in data:
            w.writerow([cell(d[c]) for c in CSV_COLUMNS])
        text = buf.getvalue()
    else:
        lines = ["| " + " | ".join(CSV_COLUMNS) + " |", "|" + "---|" * len(CSV_COLUMNS)]
        for d in data:
            lines.append("| " + " | ".join(cell(d[c]) for c in CSV_COLUMNS) + " |")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    if args.out:
        manifest.end = _stamp(args.deterministic)
        Path(args.out + ".manifest.json").write_text(dumps17(asdict(manifest)))
    return EXIT_OK if ok else EXIT_FAIL


def _table_json(tab) -> dict:
    return {
        "point": str(tab.point),
        "f_signs": list(tab.f_signs),
        "F_signs": list(tab.F_signs),
        "n_plus": tab.n_plus,
        "n_minus": tab.n_minus,
    }


def cmd_roots(args, manifest: RunManifest) -> int:
    if not Path(args.poly).is_file():
        raise UsageError(f"polynomial file not found: {args.poly}")
    try:
        p = load_polynomial(args.poly)
        a_text, b_text = args.interval.split(":")
        a, b = parse(a_text), parse(b_text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if not a < b:
        raise UsageError("interval must satisfy a < b")
    payload = {"polynomial": [str(c) for c in p.coeffs], "interval": [str(a), str(b)]}
    try:
        payload["newton_sylvester_bound"] = max_roots_in_interval(p, a, b)
    except (NotSquareFree, ZeroSignAtPoint, ZeroPolynomial) as exc:
        payload["newton_sylvester_bound"] = None
        payload["error"] = f"{type(exc).__name__}: {exc}"
    tables = {}
    for x in (a, b):
        try:
            tables[str(x)] = _table_json(newton_sylvester_table(p, x))
        except (NotSquareFree, ZeroSignAtPoint, ZeroPolynomial) as exc:
            # the bound itself steps off such endpoints; only the display is lost
            tables[str(x)] = f"{type(exc).__name__}: {exc}"
    payload["tables"] = tables
    payload["bisection_count"] = None if p.is_zero() else count_roots_bisection(p, float(a), float(b))
    bound = payload["newton_sylvester_bound"]
    ok = bound is not None and payload["bisection_count"] is not None and bound >= payload["bisection_count"]
    payload["ok"] = ok
    _report(args, payload, manifest)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(args, manifest: RunManifest) -> int:
    if not Path(args.matrix).is_file():
        raise UsageError(f"matrix file not found: {args.matrix}")
    try:
        m = load_matrix(args.matrix)
        body = StarBody(args.n, args.s)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        raise UsageError(str(exc)) from exc
    if m.n != args.n:
        raise UsageError(f"matrix has dimension {m.n}, body has {args.n}")
    cfg = OptimizerConfig(tol=args.tol, diagonal_step=args.step, seed=args.seed)
    rep = is_admissible(m, body, cfg)
    _report(args, {"ok": rep.admissible, "det": float(m.det), "report": rep.to_json()}, manifest)
    return EXIT_OK if rep.admissible else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dioph", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with flag values (flags win)")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--deterministic", action="store_true", help="zero all timestamps")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="check the closed-form results")
    p.add_argument("--theorem", choices=THEOREMS, default="all")
    p.add_argument("--oracle-step", type=float, default=None)
    p.add_argument("--polish-starts", type=int, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", parents=[common], help="grid-refinement search")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--family", choices=("sym", "custom"), default="sym")
    p.add_argument("--vars", type=int, default=None)
    p.add_argument("--range", default="0:2")
    p.add_argument("--intervals", type=int, default=10)
    p.add_argument("--refine-intervals", type=int, default=4)
    p.add_argument("--iterations", type=int, default=20)
    p.add_argument("--slack", type=float, default=0.1)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--strategy", choices=STRATEGIES, default="radial")
    p.add_argument("--log", default=None)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("bounds", parents=[common], help="table of lower bounds")
    p.add_argument("--min-n", type=int, default=3)
    p.add_argument("--max-n", type=int, default=10)
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="json")
    p.add_argument("--include-historical", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("roots", parents=[common], help="root-count certificate on an interval")
    p.add_argument("--poly", required=True)
    p.add_argument("--interval", required=True, help="a:b (algebraic serialization)")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("check", parents=[common], help="admissibility of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--step", type=float, default=0.3)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_check)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        conf = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(conf, dict):
        raise UsageError("config file must hold a JSON object")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in subparser._actions}
    unknown = sorted(set(k.replace("-", "_") for k in conf) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    subparser.set_defaults(**{k.replace("-", "_"): v for k, v in conf.items()})
    return parser.parse_args(argv)


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        try:
            args = _apply_config(parser, argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
        config = {k: v for k, v in vars(args).items() if k != "func"}
        manifest = RunManifest(
            command_line=["dioph", *argv],
            seed=args.seed,
            config=config,
            start=_stamp(args.deterministic),
        )
        return args.func(args, manifest)
    except UsageError as exc:
        print(f"dioph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
