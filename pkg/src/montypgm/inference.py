"""Exact inference by full-joint enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Assignment,
    Cpt,
    InconsistentEvidenceError,
    Network,
    UsageError,
    Variable,
    check_assignment,
    parent_space,
    topological_order,
)

WIN_LABELS = ("W", "T")


@dataclass(frozen=True)
class WeightedOutcome:
    assignment: dict[str, str]
    probability: Fraction


@dataclass(frozen=True)
class Distribution:
    over: str
    values: dict[str, Fraction]

    def __getitem__(self, outcome: str) -> Fraction:
        return self.values[outcome]


def joint_probability(net: Network, a: Assignment) -> Fraction:
    """Product of local probabilities along topological order."""
    missing = [n for n in net.names if n not in a]
    if missing:
        raise UsageError("partial assignment; unbound: " + ", ".join(missing))
    check_assignment(net, a)
    p = Fraction(1)
    for name in topological_order(net):
        cpt = net.cpts[name]
        row = cpt.rows[tuple(a[q] for q in cpt.parents)]
        p *= row.get(a[name], 0)
        if not p:
            return p
    return p


def enumerate_outcomes(
    net: Network, evidence: Assignment | None = None, include_zero: bool = False
) -> list[WeightedOutcome]:
    """All full assignments extending ``evidence``, in topological-lexicographic order.

    Zero-probability rows are dropped unless ``include_zero`` is set.
    """
    evidence = dict(evidence or {})
    check_assignment(net, evidence)
    order = topological_order(net)
    steps = []
    for name in order:
        var = net.variable(name)
        cpt = net.cpts[name]
        choices = (evidence[name],) if name in evidence else var.domain
        steps.append((name, choices, cpt.rows, cpt.parents))

    out: list[WeightedOutcome] = []
    current: dict[str, str] = {}

    def walk(depth: int, p: Fraction) -> None:
        if depth == len(steps):
            out.append(WeightedOutcome(dict(current), p))
            return
        name, choices, rows, parents = steps[depth]
        row = rows[tuple(current[q] for q in parents)]
        for label in choices:
            local = row.get(label, Fraction(0))
            if not local and not include_zero:
                continue
            current[name] = label
            walk(depth + 1, p * local)
        current.pop(name, None)

    walk(0, Fraction(1))
    return out


def evidence_probability(net: Network, evidence: Assignment) -> Fraction:
    return sum((w.probability for w in enumerate_outcomes(net, evidence)), Fraction(0))


def marginal(net: Network, query: str, evidence: Assignment | None = None) -> Distribution:
    """Posterior distribution of ``query`` given ``evidence``."""
    var = net.variable(query)
    rows = enumerate_outcomes(net, evidence)
    total = sum((w.probability for w in rows), Fraction(0))
    if total == 0:
        raise InconsistentEvidenceError()
    mass = {o: Fraction(0) for o in var.domain}
    for w in rows:
        mass[w.assignment[query]] += w.probability
    return Distribution(query, {o: m / total for o, m in mass.items()})


def odds_ratio(
    net: Network,
    hyp1: tuple[str, str],
    hyp2: tuple[str, str],
    evidence: Assignment | None = None,
) -> Fraction:
    """P(hyp1 | evidence) / P(hyp2 | evidence)."""
    p1 = marginal(net, hyp1[0], evidence)[hyp1[1]]
    p2 = marginal(net, hyp2[0], evidence)[hyp2[1]]
    if p2 == 0:
        raise InconsistentEvidenceError("hypothesis 2 excluded by evidence")
    return p1 / p2


def result_variable(net: Network) -> tuple[Variable, str]:
    """The single utility variable and its winning outcome label."""
    candidates = []
    for v in net.utility_variables():
        wins = [o for o in v.domain if o in WIN_LABELS]
        if wins:
            candidates.append((v, wins[0]))
    if len(candidates) != 1:
        raise UsageError(
            "expected exactly one utility variable with a W or T outcome, "
            f"found {len(candidates)}"
        )
    return candidates[0]


def win_probability(net: Network) -> Fraction:
    var, win = result_variable(net)
    return marginal(net, var.name)[win]


def sum_out_root(net: Network, name: str) -> Network:
    """Remove a root variable by mixing it into its only child.

    The child's new row for each remaining parent key is the average of its
    old rows weighted by the root's prior. Roots with several children cannot
    be removed this way without coupling those children.
    """
    var = net.variable(name)
    if var.parents:
        raise UsageError(f"{name} is not a root variable")
    kids = net.children(name)
    if len(kids) != 1:
        raise UsageError(f"{name} must have exactly one child to be summed out")
    prior = net.cpts[name].rows[()]
    child = net.variable(kids[0])
    old = net.cpts[child.name]
    pos = child.parents.index(name)
    new_parents = child.parents[:pos] + child.parents[pos + 1 :]

    rows: dict[tuple[str, ...], dict[str, Fraction]] = {}
    for key in parent_space(net, new_parents):
        mixed = {o: Fraction(0) for o in child.domain}
        for s, ps in prior.items():
            if not ps:
                continue
            full = key[:pos] + (s,) + key[pos:]
            for o, p in old.rows[full].items():
                mixed[o] += ps * p
        rows[key] = mixed

    variables = []
    for v in net.variables:
        if v.name == name:
            continue
        if v.name == child.name:
            v = Variable(v.name, v.kind, v.domain, new_parents)
        variables.append(v)
    cpts = {k: c for k, c in net.cpts.items() if k != name}
    cpts[child.name] = Cpt(child.name, new_parents, rows)
    return Network(tuple(variables), cpts, name=net.name)
