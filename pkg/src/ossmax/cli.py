"""Command-line interface.

Exit status is 0 on success, 2 when a verification or report check fails and
1 on malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .greedy import AUTO, GreedyConfig, GreedyError, Mode
from .instances import Instance, InstanceError, canonical_dumps, generate, load_instance, save_instance
from .matroid import MatroidError
from .objective import ObjectiveError, estimate_sigma
from .oracle import OracleError, brute_force_opt, run_suite
from .pipeline import rows_to_csv, solve, sweep
from .rounding import (
    RoundingError,
    build_quadratic_coverage,
    family_point,
    normalize_family,
    round_best,
    round_by_coverage,
    saturate_to_bases,
    swap_round,
)

EXIT_OK, EXIT_INPUT, EXIT_CHECK = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _number_or_auto(text: str):
    if text == AUTO:
        return AUTO
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}")


def _add_globals(p: argparse.ArgumentParser, top: bool):
    default = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=default(0), help="random seed (default 0)")
    p.add_argument("--output", choices=["json", "csv", "text"], default=default("json"), help="output format")
    p.add_argument("--no-timing", action="store_true", default=default(False), help="omit wall-clock fields")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ossmax", description="Smooth quadratic maximization over matroids.")
    _add_globals(parser, top=True)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate an instance file")
    _add_globals(g, top=False)
    g.add_argument("--family", required=True, choices=["graph", "negtype", "gap", "procurement", "powered"])
    g.add_argument("--n", type=int, default=8, help="ground-set size (non-gap families)")
    g.add_argument("--matroid", default="uniform", choices=["uniform", "partition", "graphic", "paired"])
    g.add_argument("--r", type=int, help="rank for a uniform matroid")
    g.add_argument("--k", type=int, default=3, help="number of pairs (gap)")
    g.add_argument("--t", type=int, default=2, help="pairs per circuit (gap)")
    g.add_argument("--sigma0", type=float, default=4.0, help="distance scale (gap, graph)")
    g.add_argument("--p", type=float, default=0.4, help="edge probability (graph)")
    g.add_argument("--d", type=int, default=2, help="point dimension (negtype, powered)")
    g.add_argument("--power", type=float, default=2.0, help="distance exponent (powered)")
    g.add_argument("--m", type=int, default=3, help="number of communities (procurement)")
    g.add_argument("--bid-scale", type=float, default=1.0, help="bid multiplier (procurement)")
    g.add_argument("--out", type=Path, help="write here instead of stdout")

    s = sub.add_parser("solve", help="run greedy and rounding on an instance")
    _add_globals(s, top=False)
    s.add_argument("instance", type=Path)
    s.add_argument("--alpha", type=_number_or_auto, default=AUTO)
    s.add_argument("--delta", type=_number_or_auto, default=AUTO)
    s.add_argument("--mode", choices=[m.value for m in Mode], help="default depends on the objective")
    s.add_argument("--eta", type=float, help="locality constant for eta-local mode")
    s.add_argument("--sigma", type=float, help="override the smoothness constant")
    s.add_argument("--brute-force", action="store_true", help="also compute the exact optimum (n <= 16)")
    s.add_argument("--trajectory", type=Path, help="write the greedy trajectory as CSV")

    r = sub.add_parser("round", help="round a decomposition of a fractional point")
    _add_globals(r, top=False)
    r.add_argument("instance", type=Path)
    r.add_argument("decomposition", type=Path)
    r.add_argument("--method", choices=["best", "coverage", "swap"], default="best")
    r.add_argument("--sigma", type=float, help="override the smoothness constant")

    v = sub.add_parser("verify", help="run a verification suite")
    _add_globals(v, top=False)
    v.add_argument("--suite", choices=["lemmas", "rounding", "endtoend", "all"], default="all")

    w = sub.add_parser("sweep", help="solve every cell of a parameter grid")
    _add_globals(w, top=False)
    w.add_argument("--family", required=True, choices=["graph", "negtype", "gap", "procurement", "powered"])
    w.add_argument("--grid", action="append", default=[], metavar="KEY=V1,V2,...", help="repeatable")
    w.add_argument("--out", type=Path, help="write here instead of stdout")

    e = sub.add_parser("estimate-sigma", help="triple-scan smoothness constant of an instance")
    _add_globals(e, top=False)
    e.add_argument("instance", type=Path)

    o = sub.add_parser("oracle", help="exact optimum by enumeration")
    _add_globals(o, top=False)
    o.add_argument("instance", type=Path)
    return parser


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_grid(items: list[str]) -> dict[str, list]:
    grid = {}
    for item in items:
        key, sep, values = item.partition("=")
        if not sep or not key:
            raise InputError(f"grid entry {item!r} is not KEY=V1,V2,...")
        grid[key.replace("-", "_")] = [_parse_value(v) for v in values.split(",") if v != ""]
    return grid


def _flatten(d: dict, prefix="") -> dict:
    out = {}
    for key, value in d.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        elif isinstance(value, (list, tuple)):
            out[name] = json.dumps(value)
        else:
            out[name] = value
    return out


def _scalar(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def render(payload, fmt: str) -> str:
    rows = payload if isinstance(payload, list) else [payload]
    if fmt == "json":
        return canonical_dumps(payload)
    flat = [_flatten(row) for row in rows]
    if fmt == "csv":
        columns = sorted({k for row in flat for k in row})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in flat:
            writer.writerow([_scalar(row.get(c)) for c in columns])
        return buf.getvalue()
    blocks = ["\n".join(f"{k}: {_scalar(v)}" for k, v in sorted(row.items())) for row in flat]
    return "\n\n".join(blocks) + "\n"


def _load(path: Path) -> Instance:
    try:
        return load_instance(path)
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc


def cmd_gen(args) -> tuple[object, int]:
    params = {"n": args.n, "matroid": args.matroid}
    if args.family == "gap":
        params = {"k": args.k, "t": args.t, "sigma0": args.sigma0}
    elif args.family == "graph":
        params.update(sigma0=args.sigma0, p=args.p)
    elif args.family in ("negtype", "powered"):
        params.update(d=args.d, power=args.power) if args.family == "powered" else params.update(d=args.d)
    elif args.family == "procurement":
        params.update(m=args.m, bid_scale=args.bid_scale)
    if args.r is not None and args.family != "gap":
        params["r"] = args.r
    inst = generate(args.family, args.seed, **params)
    if args.out:
        save_instance(inst, args.out)
        return {"written": str(args.out), "n": inst.matroid.n}, EXIT_OK
    return inst.to_dict(), EXIT_OK


def cmd_solve(args) -> tuple[object, int]:
    inst = _load(args.instance)
    cfg = None
    if args.mode or args.alpha != AUTO or args.delta != AUTO or args.eta is not None:
        from .pipeline import default_mode

        mode = Mode(args.mode) if args.mode else default_mode(inst.objective)
        cfg = GreedyConfig(args.alpha, args.delta, mode, 0.0, args.eta)
    report = solve(inst.objective, inst.matroid, cfg, brute_force=args.brute_force, meta=inst.meta, sigma=args.sigma)
    if args.trajectory:
        from .greedy import run_jump_start_greedy

        run_cfg = GreedyConfig(report.config["alpha"], report.config["delta"], Mode(report.config["mode"]),
                               report.oss_sigma, report.config["eta"])
        args.trajectory.write_text(run_jump_start_greedy(inst.objective, inst.matroid, run_cfg).trajectory_csv())
    return report.to_dict(timing=not args.no_timing), EXIT_OK if report.passed else EXIT_CHECK


def _read_decomposition(path: Path):
    try:
        data = json.loads(path.read_text())
        return normalize_family((e["weight"], e["set"]) for e in data["entries"])
    except FileNotFoundError as exc:
        raise InputError(f"{path}: no such file") from exc
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: malformed decomposition ({exc})") from exc


def cmd_round(args) -> tuple[object, int]:
    inst = _load(args.instance)
    q, m = inst.objective, inst.matroid
    family = saturate_to_bases(m, _read_decomposition(args.decomposition))
    sigma = args.sigma if args.sigma is not None else estimate_sigma(q.A).oss_sigma
    if args.method == "coverage":
        res = round_by_coverage(q, build_quadratic_coverage(m, family))
    elif args.method == "swap":
        res = swap_round(q, m, family, sigma)
    else:
        res = round_best(q, m, family, sigma)
    fractional = q.value(family_point(m.n, family))
    out = {
        "set": sorted(res.set),
        "method": res.method,
        "value": res.value,
        "fractionalValue": fractional,
        "certificate": res.certificate,
    }
    ok = res.value * res.certificate >= fractional - 1e-9 and m.is_independent(res.set)
    return out, EXIT_OK if ok else EXIT_CHECK


def cmd_verify(args) -> tuple[object, int]:
    reports = run_suite(args.suite, args.seed)
    rows = [r.to_dict() for r in reports]
    return rows, EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK


def cmd_sweep(args) -> tuple[object, int]:
    rows = sweep(args.family, parse_grid(args.grid), args.seed)
    if args.output == "csv" or args.out:
        text = rows_to_csv(rows)
        if args.out:
            args.out.write_text(text)
            return {"written": str(args.out), "rows": len(rows)}, EXIT_OK
        return text, EXIT_OK
    return rows, EXIT_OK


def cmd_estimate_sigma(args) -> tuple[object, int]:
    inst = _load(args.instance)
    if not hasattr(inst.objective, "A"):
        raise InputError("sigma estimation needs a diversity objective block")
    cert = estimate_sigma(inst.objective.A)
    return {"sigma": cert.sigma, "witness": list(cert.witness) if cert.witness else None, "ossSigma": cert.oss_sigma}, EXIT_OK


def cmd_oracle(args) -> tuple[object, int]:
    inst = _load(args.instance)
    best, value = brute_force_opt(inst.objective, inst.matroid)
    return {"set": sorted(best), "value": value}, EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "round": cmd_round,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "estimate-sigma": cmd_estimate_sigma,
    "oracle": cmd_oracle,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, status = COMMANDS[args.command](args)
    except (InputError, InstanceError, ObjectiveError, MatroidError, GreedyError, RoundingError, OracleError) as exc:
        print(f"ossmax {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(payload if isinstance(payload, str) else render(payload, args.output))
    return status


if __name__ == "__main__":
    sys.exit(main())
