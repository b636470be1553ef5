"""Command-line entry point.

Exit codes: 0 success, 1 domain error (inconsistent evidence, invalid model,
failed check, unwritable output), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from . import check as checks
from . import inference, monty, simulate, trees
from .model import (
    InconsistentEvidenceError,
    MontyError,
    StructureError,
    UsageError,
    format_decimal,
    to_rational,
)
from .modelfmt import ModelParseError, load_model
from .monty import MontyConfig, Policy, TieBreak

SWEEP_HEADER = ["n", "p_switch_per_door", "p_keep", "advantage"]


def _use_color(stream) -> bool:
    return "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _styler(stream):
    if not _use_color(stream):
        return lambda text, code: text
    return lambda text, code: f"\x1b[{code}m{text}\x1b[0m"


def _rat(p: Fraction) -> str:
    return f"{p} ({format_decimal(p, 4)})"


def _add_network_args(p: argparse.ArgumentParser, model: bool = False) -> None:
    p.add_argument("--doors", type=int, default=3, help="number of doors (>= 3)")
    if model:
        p.add_argument("--model", metavar="FILE", help="use a .pgm.txt network instead of the builtin")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--strategy", choices=sorted(monty.STRATEGY_WEIGHTS))
    group.add_argument("--weight", help="switch weight in [0, 1], e.g. 1/2 or 0.25")
    p.add_argument("--policy", choices=[x.value for x in Policy], default="neutral")
    p.add_argument("--tiebreak", choices=[x.value for x in TieBreak], default="uniform",
                   help="host rule when two goat doors are available")


def _add_format(p: argparse.ArgumentParser, choices=("text", "json")) -> None:
    p.add_argument("--format", choices=choices, default="text")


def _config(args, default_strategy: str = "switch") -> MontyConfig:
    if args.weight is not None:
        w = to_rational(args.weight)
    else:
        w = monty.STRATEGY_WEIGHTS[args.strategy or default_strategy]
    return MontyConfig(args.doors, w, Policy(args.policy), TieBreak(args.tiebreak))


def _parse_evidence(text: str | None) -> dict[str, str]:
    out: dict[str, str] = {}
    if not text:
        return out
    for part in text.split(","):
        name, sep, value = part.partition("=")
        if not sep or not name.strip() or not value.strip():
            raise UsageError(f"evidence must look like VAR=VAL[,VAR=VAL], got {part!r}")
        out[name.strip()] = value.strip()
    return out


def _emit(out, fmt: str, payload: dict, text: str) -> None:
    if fmt == "json":
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(text)


def cmd_solve(args, out) -> int:
    if args.model:
        net = load_model(args.model)
        p_win = inference.win_probability(net)
        payload = {
            "network": net.name,
            "p_win": str(p_win),
            "p_loss": str(1 - p_win),
            "decimal": {"p_win": format_decimal(p_win, 4), "p_loss": format_decimal(1 - p_win, 4)},
        }
        text = f"network: {net.name}\nP(W) = {_rat(p_win)}\nP(L) = {_rat(1 - p_win)}\n"
        _emit(out, args.format, payload, text)
        return 0

    cfg = _config(args)
    net = monty.build_monty(cfg)
    enum_door = inference.win_probability(net)
    enum_set = monty.set_win_probability(net)
    cf_door = monty.closed_form_win(cfg)
    cf_set = monty.closed_form_set_win(cfg)
    if enum_door != cf_door or enum_set != cf_set:
        sys.stderr.write(
            f"closed form and enumeration disagree: per-door {cf_door} vs {enum_door}, "
            f"switch-set {cf_set} vs {enum_set}\n"
        )
        return 1
    strategy = monty.strategy_name(cfg.switch_weight)
    payload = {
        "network": net.name,
        "doors": cfg.n_doors,
        "strategy": strategy,
        "weight": str(cfg.switch_weight),
        "policy": cfg.policy.value,
        "p_win": str(enum_set),
        "p_loss": str(1 - enum_set),
        "p_win_per_door": str(enum_door),
        "decimal": {
            "p_win": format_decimal(enum_set, 4),
            "p_loss": format_decimal(1 - enum_set, 4),
            "p_win_per_door": format_decimal(enum_door, 4),
        },
        "closed_form": {"p_win": str(cf_set), "p_win_per_door": str(cf_door)},
        "enumeration": {"p_win": str(enum_set), "p_win_per_door": str(enum_door)},
    }
    text = (
        f"network: {net.name}\n"
        f"doors: {cfg.n_doors}  strategy: {strategy} (w={cfg.switch_weight})  policy: {cfg.policy.value}\n"
        f"P(W) = {_rat(enum_set)}\n"
        f"P(L) = {_rat(1 - enum_set)}\n"
        f"per-door P(W) = {_rat(enum_door)}\n"
        f"closed form: P(W) = {cf_set}, per-door {cf_door}  [matches enumeration]\n"
    )
    _emit(out, args.format, payload, text)
    return 0


def cmd_posterior(args, out) -> int:
    net = load_model(args.model) if args.model else monty.build_monty(_config(args))
    evidence = _parse_evidence(args.evidence)
    dist = inference.marginal(net, args.query, evidence)
    payload = {
        "network": net.name,
        "query": args.query,
        "evidence": evidence,
        "posterior": {o: str(p) for o, p in dist.values.items()},
        "decimal": {o: format_decimal(p, 4) for o, p in dist.values.items()},
    }
    given = ", ".join(f"{k}={v}" for k, v in evidence.items()) or "no evidence"
    lines = [f"P({args.query} | {given}):"]
    lines += [f"  {o}: {_rat(p)}" for o, p in dist.values.items()]
    if args.odds:
        parts = [s.strip() for s in args.odds.split(",")]
        if len(parts) != 2:
            raise UsageError("--odds takes two outcomes, e.g. --odds C,A")
        ratio = inference.odds_ratio(net, (args.query, parts[0]), (args.query, parts[1]), evidence)
        payload["odds"] = {"numerator": parts[0], "denominator": parts[1], "ratio": str(ratio)}
        lines.append(f"odds {parts[0]}:{parts[1]} = {_rat(ratio)}")
    _emit(out, args.format, payload, "\n".join(lines) + "\n")
    return 0


def cmd_tree(args, out) -> int:
    cfg = _config(args, default_strategy="keep")
    doors = monty.door_labels(cfg.n_doors)
    car = args.car if args.car is not None else doors[0]
    if car not in doors:
        raise UsageError(f"unknown car label {car!r}; doors are {', '.join(doors)}")
    tree = trees.strategy_tree(cfg, car, prune_zero=not args.keep_zero)
    out.write(trees.render_tree(tree, args.format, paper_rounding=args.paper_rounding))
    return 0


def cmd_simulate(args, out) -> int:
    cfg = _config(args)
    net = monty.build_monty(cfg)
    tally = simulate.run_trials(net, args.trials, args.seed, workers=args.workers)
    report = simulate.empirical_vs_exact(tally, net)
    payload = {"network": net.name, "tally": tally.to_json(), "report": report.to_json()}
    text = (
        f"network: {net.name}\n"
        f"trials: {tally.trials}  seed: {tally.seed}\n"
        f"wins: {tally.wins}  losses: {tally.losses}  win_rate: {format_decimal(tally.win_rate, 6)}\n"
        f"exact P(W) = {_rat(report.exact)}\n"
        f"|deviation| = {format_decimal(report.deviation, 6)}  "
        f"standard error = {report.standard_error:.6f}  z = {report.z_score:.2f}\n"
    )
    _emit(out, args.format, payload, text)
    return 0


def cmd_sweep(args, out) -> int:
    lo, hi = args.doors_from, args.doors_to
    if lo < 3 or hi < lo:
        raise UsageError("sweep needs 3 <= --doors-from <= --doors-to")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(SWEEP_HEADER)
    if args.exact:
        header += ["p_switch_per_door_exact", "p_keep_exact", "advantage_exact"]
    writer.writerow(header)
    for n in range(lo, hi + 1):
        values = (monty.per_door_switch_probability(n), Fraction(1, n), monty.switch_advantage(n))
        row = [n] + [format_decimal(v, 6) for v in values]
        if args.exact:
            row += [str(v) for v in values]
        writer.writerow(row)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(buf.getvalue())
        except OSError as exc:
            sys.stderr.write(f"error: cannot write {args.out}: {exc.strerror or exc}\n")
            return 1
    else:
        out.write(buf.getvalue())
    return 0


def cmd_check(args, out) -> int:
    style = _styler(out)
    results = checks.run_checks()
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        mark = style("PASS", "32") if r.passed else style("FAIL", "31")
        out.write(f"{mark}  {r.name.ljust(width)}  {r.cases} case(s)\n")
        for f in r.failures:
            out.write(f"      - {f}\n")
        failed += not r.passed
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return 1 if failed else 0


def cmd_play(args, out) -> int:
    from .play import play

    return play(seed=args.seed, n_doors=args.doors, out=out, style=_styler(out))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="montypgm", description="Exact inference for Monty Hall decision networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="exact win/loss probabilities")
    _add_network_args(p, model=True)
    _add_format(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("posterior", help="posterior distribution of one variable")
    _add_network_args(p, model=True)
    p.add_argument("--query", required=True)
    p.add_argument("--evidence", help="VAR=VAL[,VAR=VAL...]")
    p.add_argument("--odds", metavar="O1,O2", help="also print P(query=O1 | e) / P(query=O2 | e)")
    _add_format(p)
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("tree", help="render a strategy decision tree")
    _add_network_args(p)
    p.add_argument("--car", help="door hiding the car (default: first door)")
    p.add_argument("--paper-rounding", action="store_true", help="two-decimal truncated figures")
    p.add_argument("--keep-zero", action="store_true", help="keep zero-probability branches")
    _add_format(p, ("text", "dot", "json"))
    p.set_defaults(func=cmd_tree)

    p = sub.add_parser("simulate", help="Monte Carlo trials against the exact answer")
    _add_network_args(p)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_format(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="n-door closed forms as CSV")
    p.add_argument("--doors-from", type=int, default=3)
    p.add_argument("--doors-to", type=int, required=True)
    p.add_argument("--out", metavar="FILE.csv")
    p.add_argument("--exact", action="store_true", help="append exact rational columns")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="cross-validate closed forms, enumeration, trees and simulation")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("play", help="play the game in the terminal")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--doors", type=int, default=3)
    p.set_defaults(func=cmd_play)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 2
    except ModelParseError as exc:
        sys.stderr.write(f"invalid model:\n{exc}\n")
        return 1
    except (InconsistentEvidenceError, StructureError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except MontyError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
