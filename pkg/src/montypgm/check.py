"""Cross-validation of closed forms, enumeration, trees and simulation.

Every check takes the network builder as a parameter so a deliberately
corrupted builder can be used to confirm the checks actually bite.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import inference, monty, simulate, trees
from .model import Network, validate_network
from .modelfmt import networks_equal, parse_model, serialize
from .monty import MontyConfig, Policy, TieBreak

Builder = Callable[[MontyConfig], Network]

WEIGHT_GRID = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
F = Fraction

# Published reference values, exact.
# Switch-strategy sample space: (X, G1, H, G2, R, probability).
SWITCH_SAMPLE_SPACE = [
    ("A", "A", "B", "C", "L", F(1, 18)),
    ("A", "A", "C", "B", "L", F(1, 18)),
    ("A", "B", "C", "A", "W", F(1, 9)),
    ("A", "C", "B", "A", "W", F(1, 9)),
    ("B", "A", "C", "B", "W", F(1, 9)),
    ("B", "B", "A", "C", "L", F(1, 18)),
    ("B", "B", "C", "A", "L", F(1, 18)),
    ("B", "C", "A", "B", "W", F(1, 9)),
    ("C", "A", "B", "C", "W", F(1, 9)),
    ("C", "B", "A", "C", "W", F(1, 9)),
    ("C", "C", "A", "B", "L", F(1, 18)),
    ("C", "C", "B", "A", "L", F(1, 18)),
]

# (car, first guess) -> result under switching; each cell has probability 1/9.
GUESS_GRID = {
    ("A", "A"): "L", ("A", "B"): "W", ("A", "C"): "W",
    ("B", "A"): "W", ("B", "B"): "L", ("B", "C"): "W",
    ("C", "A"): "W", ("C", "B"): "W", ("C", "C"): "L",
}

h = F(1, 2)
HOST_ROWS = {
    ("A", "A"): (0, h, h), ("A", "B"): (0, 0, 1), ("A", "C"): (0, 1, 0),
    ("B", "A"): (0, 0, 1), ("B", "B"): (h, 0, h), ("B", "C"): (1, 0, 0),
    ("C", "A"): (0, 1, 0), ("C", "B"): (1, 0, 0), ("C", "C"): (h, h, 0),
}
# G2 given (g1, h) for switch / keep / flip.
SWITCH_ROWS = {
    ("A", "B"): (0, 0, 1), ("A", "C"): (0, 1, 0),
    ("B", "A"): (0, 0, 1), ("B", "C"): (1, 0, 0),
    ("C", "A"): (0, 1, 0), ("C", "B"): (1, 0, 0),
}
KEEP_ROWS = {
    ("A", "B"): (1, 0, 0), ("A", "C"): (1, 0, 0),
    ("B", "A"): (0, 1, 0), ("B", "C"): (0, 1, 0),
    ("C", "A"): (0, 0, 1), ("C", "B"): (0, 0, 1),
}
FLIP_ROWS = {
    ("A", "B"): (h, 0, h), ("A", "C"): (h, h, 0),
    ("B", "A"): (0, h, h), ("B", "C"): (h, h, 0),
    ("C", "A"): (0, h, h), ("C", "B"): (h, 0, h),
}
STRATEGY_SUMMARY = {"keep": (F(1, 3), F(2, 3)), "switch": (F(2, 3), F(1, 3)), "flip": (F(1, 2), F(1, 2))}
ALONZI_3 = (F(1, 3), F(0), F(0), F(2, 3))
ALONZI_4 = (F(1, 4), F(0), F(0), F(3, 4))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    failures: tuple[str, ...] = ()
    cases: int = 0


class _Recorder:
    def __init__(self, name: str):
        self.name = name
        self.failures: list[str] = []
        self.cases = 0

    def expect(self, ok: bool, what: str) -> None:
        self.cases += 1
        if not ok:
            self.failures.append(what)

    def result(self) -> CheckResult:
        return CheckResult(self.name, not self.failures, tuple(self.failures), self.cases)


def _default_builder(cfg: MontyConfig) -> Network:
    return monty.build_monty(cfg)


def _strategy_net(builder: Builder, cfg: MontyConfig) -> Network:
    return inference.sum_out_root(builder(cfg), "S")


def _row(net: Network, name: str, key) -> tuple:
    var = net.variable(name)
    row = net.cpts[name].rows[tuple(key)]
    return tuple(row.get(o, 0) for o in var.domain)


def check_validation(builder: Builder) -> CheckResult:
    rec = _Recorder("built networks validate")
    for n in range(3, 9):
        for w in WEIGHT_GRID:
            for policy in Policy:
                report = validate_network(builder(MontyConfig(n, w, policy)))
                rec.expect(report.ok, f"n={n} w={w} {policy.value}: {report}")
    return rec.result()


def check_closed_form(builder: Builder) -> CheckResult:
    rec = _Recorder("closed form = enumeration")
    for n in range(3, 9):
        for w in WEIGHT_GRID:
            for policy in Policy:
                cfg = MontyConfig(n, w, policy)
                net = builder(cfg)
                got = inference.win_probability(net)
                want = monty.closed_form_win(cfg)
                rec.expect(got == want, f"per-door n={n} w={w} {policy.value}: {got} != {want}")
                got = monty.set_win_probability(net)
                want = monty.closed_form_set_win(cfg)
                rec.expect(got == want, f"switch-set n={n} w={w} {policy.value}: {got} != {want}")
    return rec.result()


def check_tiebreak(builder: Builder) -> CheckResult:
    rec = _Recorder("host tie-break rule is irrelevant")
    for n in range(3, 7):
        for w in WEIGHT_GRID:
            a = inference.win_probability(builder(MontyConfig(n, w)))
            b = inference.win_probability(builder(MontyConfig(n, w, tiebreak=TieBreak.FIRST)))
            rec.expect(a == b, f"n={n} w={w}: uniform {a} != first {b}")
    return rec.result()


def check_reference_tables(builder: Builder) -> CheckResult:
    rec = _Recorder("reference tables")
    switch = builder(MontyConfig(3, 1))
    rows = [
        (a.assignment["X"], a.assignment["G1"], a.assignment["H"], a.assignment["G2"],
         a.assignment["R"], a.probability)
        for a in inference.enumerate_outcomes(switch)
    ]
    rec.expect(rows == SWITCH_SAMPLE_SPACE, f"switch sample space: {rows}")

    cells: dict[tuple[str, str], tuple[Fraction, set]] = {}
    for x, g1, _, _, r, p in rows:
        mass, results = cells.get((x, g1), (F(0), set()))
        cells[(x, g1)] = (mass + p, results | {r})
    grid = {k: (m, r) for k, (m, r) in cells.items()}
    want_grid = {k: (F(1, 9), {r}) for k, r in GUESS_GRID.items()}
    rec.expect(grid == want_grid, f"car x guess grid: {grid}")

    third = (F(1, 3),) * 3
    rec.expect(_row(switch, "X", ()) == third, "X prior")
    rec.expect(_row(switch, "G1", ()) == third, "G1 prior")
    for key, want in HOST_ROWS.items():
        got = _row(switch, "H", key)
        rec.expect(got == tuple(F(v) for v in want), f"host row {key}: {got}")
    for w, table, label in ((1, SWITCH_ROWS, "switch"), (0, KEEP_ROWS, "keep"), (h, FLIP_ROWS, "flip")):
        net = _strategy_net(builder, MontyConfig(3, w))
        for key, want in table.items():
            got = _row(net, "G2", key)
            rec.expect(got == tuple(F(v) for v in want), f"G2 {label} row {key}: {got}")
    for x in "ABC":
        for g2 in "ABC":
            got = _row(switch, "R", (x, g2))
            rec.expect(got == ((1, 0) if x == g2 else (0, 1)), f"R row {(x, g2)}: {got}")

    for name, (pw, pl) in STRATEGY_SUMMARY.items():
        net = builder(MontyConfig(3, monty.STRATEGY_WEIGHTS[name]))
        got = inference.win_probability(net)
        rec.expect(got == pw and 1 - got == pl, f"win probability {name}: {got}")

    for n, want in ((3, ALONZI_3), (4, ALONZI_4)):
        table = monty.alonzi_joint(n)
        got = tuple(p for *_, p in table.rows())
        rec.expect(got == want and table.total() == 1, f"Alonzi n={n}: {got}")
        # Enumerated counterpart: scenario mass under the corresponding pure strategy.
        correct = sum(
            (a.probability for a in inference.enumerate_outcomes(builder(MontyConfig(n, 0)))
             if a.assignment["X"] == a.assignment["G1"]),
            F(0),
        )
        rec.expect(correct == want[0], f"Alonzi n={n} enumerated correct-guess mass {correct}")
    return rec.result()


def check_bayes(builder: Builder) -> CheckResult:
    rec = _Recorder("posterior, odds ratio, prior stability")
    net = builder(MontyConfig(3, 1))
    post = inference.marginal(net, "X", {"G1": "A", "H": "B"})
    rec.expect(post.values == {"A": F(1, 3), "B": F(0), "C": F(2, 3)}, f"posterior {post.values}")
    odds = inference.odds_ratio(net, ("X", "C"), ("X", "A"), {"G1": "A", "H": "B"})
    rec.expect(odds == 2, f"odds C:A = {odds}")
    for g1 in "ABC":
        for hd in "ABC":
            if g1 == hd:
                continue
            p = inference.marginal(net, "X", {"G1": g1, "H": hd})[g1]
            rec.expect(p == F(1, 3), f"P(X={g1} | G1={g1}, H={hd}) = {p}")
    return rec.result()


def check_n_doors(builder: Builder) -> CheckResult:
    rec = _Recorder("n-door formula")
    rec.expect(monty.per_door_switch_probability(3) == F(2, 3), "n=3 per-door")
    rec.expect(monty.per_door_switch_probability(4) == F(3, 8), "n=4 per-door")
    for n in range(3, 9):
        doors = monty.door_labels(n)
        net = builder(MontyConfig(n, 1))
        post = inference.marginal(net, "X", {"G1": doors[0], "H": doors[1]})
        want = monty.per_door_switch_probability(n)
        for d in doors[2:]:
            rec.expect(post[d] == want, f"n={n} P(X={d} | G1, H) = {post[d]} != {want}")
        rec.expect(inference.win_probability(net) == want, f"n={n} switch win")
        alonzi = monty.alonzi_joint(n).incorrect_switched * F(1, n - 2)
        rec.expect(alonzi == want, f"n={n} Alonzi decomposition {alonzi}")
    adv = [monty.switch_advantage(n) for n in range(3, 101)]
    rec.expect(all(a > 0 for a in adv), "advantage positive on 3..100")
    rec.expect(all(a > b for a, b in zip(adv, adv[1:])), "advantage strictly decreasing on 3..100")
    return rec.result()


def check_trees(builder: Builder) -> CheckResult:
    rec = _Recorder("decision trees")
    for n in range(3, 6):
        doors = monty.door_labels(n)
        for name, w in monty.STRATEGY_WEIGHTS.items():
            cfg = MontyConfig(n, w)
            net = _strategy_net(builder, cfg)
            wins = []
            for car in doors if n == 3 else doors[:1]:
                fixed = {"X": car}
                leaf_set = trees.leaves(trees.expand_tree(net, fixed))
                total = sum((l.joint_probability for l in leaf_set), F(0))
                rec.expect(total == 1, f"n={n} {name} car={car} leaf sum {total}")
                pf = inference.evidence_probability(net, fixed)
                for leaf in leaf_set:
                    joint = inference.joint_probability(net, leaf.assignment) / pf
                    rec.expect(joint == leaf.joint_probability, f"n={n} {name} leaf {leaf.path_label}")
                wins.append(sum((l.joint_probability for l in leaf_set if l.result == "W"), F(0)))
            rec.expect(len(set(wins)) == 1, f"n={n} {name} car symmetry {wins}")
            rec.expect(wins[0] == monty.closed_form_win(cfg), f"n={n} {name} tree win {wins[0]}")
    keep = trees.leaves(trees.expand_tree(_strategy_net(builder, MontyConfig(3, 0)), {"X": "A"}))
    rec.expect(sorted(l.joint_probability for l in keep) == [F(1, 6), F(1, 6), F(1, 3), F(1, 3)],
               "keep tree leaves")
    return rec.result()


def check_simulation(builder: Builder, trials: int = 20000) -> CheckResult:
    rec = _Recorder("Monte Carlo agrees with exact")
    for name, w in monty.STRATEGY_WEIGHTS.items():
        net = builder(MontyConfig(3, w))
        tally = simulate.run_trials(net, trials, seed=1)
        report = simulate.empirical_vs_exact(tally, net)
        rec.expect(report.z_score <= 4, f"{name}: deviation {float(report.deviation):.4f}, z={report.z_score:.2f}")
    return rec.result()


def check_roundtrip(builder: Builder) -> CheckResult:
    rec = _Recorder("model format round-trip")
    for n in (3, 4):
        for w in (F(0), F(1, 2), F(1)):
            for policy in Policy:
                net = builder(MontyConfig(n, w, policy))
                text = serialize(net)
                back = parse_model(text)
                rec.expect(networks_equal(net, back) and serialize(back) == text,
                           f"n={n} w={w} {policy.value}")
    text = serialize(builder(MontyConfig(3, 1)))
    h_rows = [line for line in text.splitlines() if line.startswith("cpt H | ")]
    rec.expect(len(h_rows) == 9, f"{len(h_rows)} H rows")
    return rec.result()


CHECKS = (
    check_validation,
    check_reference_tables,
    check_bayes,
    check_closed_form,
    check_tiebreak,
    check_n_doors,
    check_trees,
    check_simulation,
    check_roundtrip,
)


def run_checks(builder: Builder | None = None) -> list[CheckResult]:
    builder = builder or _default_builder
    results = []
    for check in CHECKS:
        try:
            results.append(check(builder))
        except Exception as exc:  # a broken model must show up as a failed check
            results.append(CheckResult(check.__name__, False, (f"{type(exc).__name__}: {exc}",)))
    return results
