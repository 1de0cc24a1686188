"""Command line: evaluate, certify, sweep, replay, export.

Exit codes of ``certify``: 0 feasible, 2 infeasible, 3 numerical failure.
Usage errors and bad input files exit with 1.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .behavior import Behavior, BehaviorError, SignallingError, dumps, is_nonsignalling, loads, to_json_dict
from .games import ALGEBRAIC_MAX, CLASSICAL_BOUND, ghz3_score
from .inflation import (
    CONTRADICTION_SETS,
    BisectionError,
    CertifyConfig,
    certify,
    inequality_decider,
    threshold_bisect,
)
from .inflation.certify import monotone_verdicts
from .lpsolve import FEASIBLE, INFEASIBLE, NUMERICAL_FAILURE, write_certificate, write_lp
from .lpsolve.solve import BACKENDS
from . import strategies

log = logging.getLogger("losrcert")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
VERDICT_EXIT = {FEASIBLE: EXIT_OK, INFEASIBLE: EXIT_INFEASIBLE, NUMERICAL_FAILURE: EXIT_NUMERICAL}
CSV_HEADER = ("f", "combined", "bell", "same", "c1", "ineq_violated", "lp_verdict")


class UsageError(Exception):
    pass


# -- builtin behaviors ------------------------------------------------------------
# Each name resolves to a versioned recipe so numbers in old reports stay
# reproducible even if the unversioned default moves on.

def _noisy_v1(arg: str | None, exact: bool) -> Behavior:
    if arg is None:
        raise UsageError("noisy-ghz needs a fidelity, e.g. noisy-ghz:0.9")
    try:
        f = float(arg)
    except ValueError:
        raise UsageError(f"bad fidelity {arg!r}") from None
    if not 0.0 <= f <= 1.0:
        raise UsageError(f"fidelity must lie in [0, 1], got {f}")
    return strategies.noisy_ghz_behavior(f)


BUILTINS: dict[str, dict[str, Callable]] = {
    "ghz": {"v1": lambda arg, exact: strategies.ghz_behavior()},
    "ns-box": {"v1": lambda arg, exact: strategies.ns_box_behavior(exact=True)},
    "classical-opt": {"v1": lambda arg, exact: strategies.classical_opt_behavior(exact=True)},
    "noisy-ghz": {"v1": _noisy_v1},
    "uniform": {"v1": lambda arg, exact: strategies.noisy_ghz_behavior(0.0)},
}
LATEST = "v1"


def resolve_behavior(source: str, exact: bool = False) -> tuple[Behavior, str]:
    """Builtin name (``ghz``, ``ghz@v1``, ``noisy-ghz:0.9``) or a behavior JSON path.

    Returns the behavior and a canonical label that replays to the same data.
    """
    base, _, arg = source.partition(":")
    name, _, version = base.partition("@")
    if name in BUILTINS:
        version = version or LATEST
        recipe = BUILTINS[name].get(version)
        if recipe is None:
            raise UsageError(f"{name} has versions {sorted(BUILTINS[name])}, not {version!r}")
        beh = recipe(arg or None, exact)
        label = f"{name}@{version}" + (f":{arg}" if arg else "")
        return beh, label
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"{source!r} is neither a builtin ({', '.join(BUILTINS)}) nor a file")
    try:
        beh = loads(path.read_text(), exact=exact)
    except BehaviorError as exc:
        raise UsageError(f"{source}: {exc}") from None
    return beh, str(path)


def behavior_hash(beh: Behavior) -> str:
    return hashlib.sha256(json.dumps(to_json_dict(beh), sort_keys=True).encode()).hexdigest()


def _report_base(argv, command: str) -> dict:
    return {
        "tool": "losrcert",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "lp_backend_env": os.environ.get("LOSRCERT_LP_BACKEND", "auto"),
    }


def _write_report(report: dict, path: str | None):
    text = json.dumps(report, indent=1, sort_keys=True)
    if path:
        Path(path).write_text(text + "\n")
    return text


# -- evaluate -----------------------------------------------------------------------

def evaluate_behavior(beh: Behavior, tol: float) -> dict:
    ns = is_nonsignalling(beh, tol=0 if beh.exact else 1e-8)
    out = {
        "nonsignalling": {
            "is_nonsignalling": ns.is_nonsignalling,
            "max_violation": float(ns.max_violation),
            "worst_party": ns.worst_party,
        }
    }
    if not ns.is_nonsignalling:
        out["scores"] = None
        out["verdict"] = "signalling input: scores are undefined"
        return out
    sc = ghz3_score(beh, tol=tol)
    out["scores"] = sc.as_dict()
    if not sc.assumption_satisfied:
        verdict = f"<C1> = {float(sc.c1_marginal):.3g} is not zero: the bound {CLASSICAL_BOUND} does not apply"
    elif sc.violates_bound:
        verdict = f"violates the classical bound {CLASSICAL_BOUND}"
    else:
        verdict = "no violation"
    out["verdict"] = verdict
    out["bounds"] = {"classical": CLASSICAL_BOUND, "algebraic": ALGEBRAIC_MAX}
    return out


def cmd_evaluate(args, argv) -> int:
    t0 = time.perf_counter()
    beh, label = resolve_behavior(args.behavior, exact=args.exact)
    res = evaluate_behavior(beh, args.tol)
    report = _report_base(argv, "evaluate")
    report.update(
        config={"behavior": label, "exact": args.exact, "tol": args.tol},
        inputs={"behavior": label, "sha256": behavior_hash(beh)},
        timings={"total_s": time.perf_counter() - t0},
        **res,
    )
    _write_report(report, args.report)
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        ns = res["nonsignalling"]
        print(f"behavior      {label}")
        print(f"nonsignalling {ns['is_nonsignalling']} (max violation {ns['max_violation']:.3g})")
        sc = res["scores"]
        if sc is not None:
            print(f"bell (C1=+1)  {sc['bell_conditional']:.12f}")
            print(f"same          {sc['same']:.12f}")
            print(f"<C1>          {sc['c1_marginal']:.3g}")
            exact = f"  [{sc['combined_exact']}]" if beh.exact else ""
            print(f"combined      {sc['combined']:.12f}{exact}")
            print(f"bounds        classical {CLASSICAL_BOUND}, algebraic {ALGEBRAIC_MAX}")
        print(f"verdict       {res['verdict']}")
    return EXIT_OK if res["scores"] is not None else EXIT_USAGE


# -- certify ------------------------------------------------------------------------

def _config_from_args(args) -> CertifyConfig:
    sets = CONTRADICTION_SETS if getattr(args, "contradiction_sets", False) else None
    return CertifyConfig(
        order=args.order,
        wiring=args.wiring,
        full_contexts=args.restrict_inputs == "full",
        constraint_sets=sets,
        backend=args.backend,
        exact_check=args.exact,
    )


def cmd_certify(args, argv) -> int:
    t0 = time.perf_counter()
    beh, label = resolve_behavior(args.behavior)
    config = _config_from_args(args)
    try:
        out = certify(beh.as_float(), config)
    except SignallingError as exc:
        raise UsageError(str(exc)) from None
    except BehaviorError as exc:
        raise UsageError(str(exc)) from None
    summary = out.summary()
    if out.certificate is not None:
        with open(args.certificate, "w") as fh:
            write_certificate(
                out.certificate,
                fh,
                gap=out.certificate_gap,
                meta={"behavior": label, "config": config.as_dict(), "kinds": list(out.lp.kind_names)},
            )
        summary["certificate"] = str(args.certificate)
    if args.lp_out:
        with open(args.lp_out, "w") as fh:
            write_lp(out.lp, fh)
        summary["lp_file"] = str(args.lp_out)
    report = _report_base(argv, "certify")
    report.update(
        config={"behavior": label, **config.as_dict()},
        inputs={"behavior": label, "sha256": behavior_hash(beh)},
        certification=[summary],
        timings={"total_s": time.perf_counter() - t0},
    )
    _write_report(report, args.report)
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        print(f"behavior  {label}")
        print(f"inflation {out.graph} ({out.lp_shape[0]} rows x {out.lp_shape[1]} vars, backend {out.backend})")
        print(f"verdict   {out.verdict}")
        if out.verdict == INFEASIBLE:
            print(f"gap       {out.certificate_gap:.6g}")
            print(f"certificate written to {args.certificate}")
        elif out.verdict == FEASIBLE:
            print("inconclusive: the inflation LP admits a solution")
        for note in out.notes:
            print(f"note      {note}")
    return VERDICT_EXIT[out.verdict]


# -- sweep --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Point:
    f: float
    lp: bool
    config: dict | None


def _family(f: float) -> Behavior:
    return strategies.noisy_ghz_behavior(f)


def _eval_point(p: _Point) -> dict:
    beh = _family(p.f)
    sc = ghz3_score(beh)
    row = {
        "f": p.f,
        "combined": float(sc.combined),
        "bell": float(sc.bell_conditional),
        "same": float(sc.same),
        "c1": float(sc.c1_marginal),
        "ineq_violated": sc.violates_bound,
        "lp_verdict": "",
    }
    if p.lp:
        row["lp_verdict"] = certify(beh, CertifyConfig.from_dict(p.config)).verdict
    return row


def sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise UsageError("sweep range must lie inside [0, 1]")
    if step <= 0:
        raise UsageError("step must be positive")
    if stop < start:
        raise UsageError(f"empty range: from {start} to {stop}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(n)]


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(
            [
                repr(r["f"]),
                format(r["combined"], ".12g"),
                format(r["bell"], ".12g"),
                format(r["same"], ".12g"),
                format(r["c1"], ".3g"),
                int(r["ineq_violated"]),
                r["lp_verdict"],
            ]
        )
    return buf.getvalue()


def run_sweep(grid, mode: str, config: CertifyConfig | None, jobs: int, precision: float) -> dict:
    lp = mode == "lp"
    cfg = config.as_dict() if lp else None
    points = [_Point(f, lp, cfg) for f in grid]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_eval_point, points))
    else:
        rows = [_eval_point(p) for p in points]

    thresholds = {}
    t0 = time.perf_counter()
    ineq = threshold_bisect(_family, inequality_decider, precision=precision)
    thresholds["inequality"] = {**ineq.as_dict(), "seconds": time.perf_counter() - t0}
    if lp:
        cache = {r["f"]: r["lp_verdict"] for r in rows}

        def decide_at(f):
            if f not in cache:
                cache[f] = certify(_family(f), config).verdict
            return cache[f]

        t0 = time.perf_counter()
        # bisect on f directly so grid verdicts are reused
        res = threshold_bisect(lambda f: f, decide_at, precision=precision)
        grid_monotone = monotone_verdicts([(r["f"], r["lp_verdict"]) for r in rows])
        thresholds["lp"] = {
            **res.as_dict(),
            "grid_monotone": grid_monotone,
            "below_inequality": res.threshold <= ineq.threshold,
            "seconds": time.perf_counter() - t0,
        }
    return {"rows": rows, "thresholds": thresholds}


def cmd_sweep(args, argv) -> int:
    if args.family != "noisy-ghz":
        raise UsageError("only the noisy-ghz family is available")
    t0 = time.perf_counter()
    grid = sweep_grid(args.start, args.stop, args.step)
    config = _config_from_args(args) if args.mode == "lp" else None
    res = run_sweep(grid, args.mode, config, args.jobs, args.precision)
    text = _csv_text(res["rows"])
    if args.csv:
        Path(args.csv).write_text(text)
    report = _report_base(argv, "sweep")
    report.update(
        config={
            "family": args.family,
            "from": args.start,
            "to": args.stop,
            "step": args.step,
            "mode": args.mode,
            "precision": args.precision,
            "certify": config.as_dict() if config else None,
        },
        rows=res["rows"],
        thresholds=res["thresholds"],
        timings={"total_s": time.perf_counter() - t0},
    )
    _write_report(report, args.report)
    if args.json:
        print(json.dumps(report, indent=1, sort_keys=True))
    else:
        if not args.csv:
            sys.stdout.write(text)
        th = res["thresholds"]
        print(f"# f* (inequality) = {th['inequality']['threshold']:.6f}")
        if "lp" in th:
            lpt = th["lp"]
            mono = "monotone" if lpt["monotone"] and lpt["grid_monotone"] else "NOT monotone"
            print(f"# f* (lp)         = {lpt['threshold']:.6f} ({mono})")
    return EXIT_OK


# -- replay -------------------------------------------------------------------------

def _collect_numbers(report: dict) -> dict:
    """Scores and verdicts that a replay must reproduce."""
    out = {}
    if report.get("scores"):
        for k in ("bell_conditional", "same", "c1_marginal", "combined"):
            out[k] = report["scores"][k]
    for i, c in enumerate(report.get("certification") or []):
        out[f"verdict{i}"] = c["verdict"]
    for i, r in enumerate(report.get("rows") or []):
        for k in ("combined", "lp_verdict", "ineq_violated"):
            out[f"row{i}.{k}"] = r[k]
    for mode, t in (report.get("thresholds") or {}).items():
        out[f"threshold.{mode}"] = t["threshold"]
    return out


def replay_argv(report: dict) -> list[str]:
    cmd = report["command"]
    cfg = report["config"]
    if cmd == "evaluate":
        argv = ["evaluate", cfg["behavior"], "--tol", repr(cfg["tol"])]
        return argv + (["--exact"] if cfg["exact"] else [])
    if cmd == "certify":
        argv = ["certify", cfg["behavior"], "--order", str(cfg["order"]), "--wiring", cfg["wiring"]]
        argv += ["--restrict-inputs", "full" if cfg["full_contexts"] else "default"]
        if cfg.get("constraint_sets"):
            argv.append("--contradiction-sets")
        if cfg.get("backend"):
            argv += ["--backend", cfg["backend"]]
        if cfg.get("exact_check"):
            argv.append("--exact")
        return argv
    if cmd == "sweep":
        argv = ["sweep", "--family", cfg["family"], "--from", repr(cfg["from"]), "--to", repr(cfg["to"])]
        argv += ["--step", repr(cfg["step"]), "--mode", cfg["mode"], "--precision", repr(cfg["precision"])]
        c = cfg.get("certify")
        if c:
            argv += ["--order", str(c["order"]), "--wiring", c["wiring"]]
            argv += ["--restrict-inputs", "full" if c["full_contexts"] else "default"]
            if c.get("backend"):
                argv += ["--backend", c["backend"]]
        return argv
    raise UsageError(f"cannot replay command {cmd!r}")


def cmd_replay(args, argv) -> int:
    try:
        old = json.loads(Path(args.report_file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report: {exc}") from None
    new_argv = replay_argv(old)
    out = Path(args.out)
    with contextlib.redirect_stdout(io.StringIO()):
        main(new_argv + ["--report", str(out)])
    new = json.loads(out.read_text())
    a, b = _collect_numbers(old), _collect_numbers(new)
    bad = []
    for k in sorted(set(a) | set(b)):
        va, vb = a.get(k), b.get(k)
        if isinstance(va, float) and isinstance(vb, float):
            if abs(va - vb) > args.tol:
                bad.append((k, va, vb))
        elif va != vb:
            bad.append((k, va, vb))
    print(f"replayed: {' '.join(new_argv)}")
    if bad:
        for k, va, vb in bad:
            print(f"mismatch {k}: {va} -> {vb}")
        return EXIT_USAGE
    print(f"all {len(a)} recorded values reproduced")
    return EXIT_OK


# -- export -------------------------------------------------------------------------

def cmd_export(args, argv) -> int:
    beh, label = resolve_behavior(args.behavior, exact=args.exact)
    text = dumps(beh)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_certify_opts(p):
    p.add_argument("--order", type=int, choices=(2, 3), default=3, help="copies per party")
    p.add_argument("--wiring", choices=("auto", "ring", "cut"), default="auto")
    p.add_argument("--restrict-inputs", choices=("default", "full"), default="default")
    p.add_argument("--backend", choices=BACKENDS, default=None, help="LP backend (default: $LOSRCERT_LP_BACKEND or auto)")
    p.add_argument("--exact", action="store_true", help="check certificates in rational arithmetic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="losrcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"losrcert {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--report", help="write the JSON run report here")
    common.add_argument("--json", action="store_true", help="print the report instead of text")

    p = sub.add_parser("evaluate", parents=[common], help="score a behavior")
    p.add_argument("behavior", help="builtin (ghz, ns-box, classical-opt, noisy-ghz:F) or JSON file")
    p.add_argument("--exact", action="store_true", help="read the file with rational probabilities")
    p.add_argument("--tol", type=float, default=1e-6, help="tolerance on <C1> = 0")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("certify", parents=[common], help="inflation LP test")
    p.add_argument("behavior")
    _add_certify_opts(p)
    p.add_argument("--contradiction-sets", action="store_true", help="only the five sets of the monogamy argument")
    p.add_argument("--certificate", default="certificate.json")
    p.add_argument("--lp-out", help="also write the LP in text format")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("sweep", parents=[common], help="noise sweep with thresholds")
    p.add_argument("--family", default="noisy-ghz")
    p.add_argument("--from", dest="start", type=float, default=0.8)
    p.add_argument("--to", dest="stop", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--mode", choices=("inequality", "lp"), default="inequality")
    p.add_argument("--precision", type=float, default=1e-4)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    _add_certify_opts(p)
    p.set_defaults(handler=cmd_sweep, order=2)

    p = sub.add_parser("replay", help="rerun a report and compare")
    p.add_argument("report_file")
    p.add_argument("--out", default="replay-report.json")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(handler=cmd_replay)

    p = sub.add_parser("export", help="write a builtin behavior as JSON")
    p.add_argument("behavior")
    p.add_argument("--exact", action="store_true")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.handler(args, argv)
    except UsageError as exc:
        print(f"losrcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BisectionError as exc:
        print(f"losrcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
