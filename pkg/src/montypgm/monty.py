"""Builders for the Monty Hall network family and its closed-form results.

The network has six variables, in order of play::

    S  (decision)  keep / switch, P(switch) = w
    X  (chance)    door hiding the car, uniform
    G1 (chance)    contestant's first guess, uniform
    H  (decision)  door opened by the host, given X and G1
    G2 (decision)  contestant's second guess, given S, G1 and H
    R  (utility)   W if G2 == X else L

The coin-flip strategy is simply w = 1/2. For n > 3 doors the host opens one
goat door and a switching contestant picks uniformly among the n - 2 doors
left, so "switch" wins with probability (n-1)/(n^2-2n) per door.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from . import inference
from .model import (
    Cpt,
    Network,
    UsageError,
    Variable,
    VariableKind,
    to_rational,
)

NONE = "none"
STRATEGY_WEIGHTS = {"keep": Fraction(0), "switch": Fraction(1), "flip": Fraction(1, 2)}


class Policy(str, Enum):
    NEUTRAL = "neutral"
    GOOD = "good"
    BAD = "bad"


class TieBreak(str, Enum):
    UNIFORM = "uniform"
    FIRST = "first"


@dataclass(frozen=True)
class MontyConfig:
    n_doors: int = 3
    switch_weight: Fraction = Fraction(1)
    policy: Policy = Policy.NEUTRAL
    tiebreak: TieBreak = TieBreak.UNIFORM

    def __post_init__(self):
        if isinstance(self.n_doors, bool) or not isinstance(self.n_doors, int):
            raise UsageError("n_doors must be an integer")
        if self.n_doors < 3:
            raise UsageError(f"n_doors must be >= 3, got {self.n_doors}")
        w = to_rational(self.switch_weight)
        if not 0 <= w <= 1:
            raise UsageError(f"switch weight must lie in [0, 1], got {w}")
        object.__setattr__(self, "switch_weight", w)
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "tiebreak", TieBreak(self.tiebreak))


@dataclass(frozen=True)
class AlonziTable:
    """Joint probabilities over (first guess correct?, switched?)."""

    correct_kept: Fraction
    correct_switched: Fraction
    incorrect_kept: Fraction
    incorrect_switched: Fraction

    def rows(self) -> list[tuple[bool, bool, Fraction]]:
        return [
            (True, False, self.correct_kept),
            (True, True, self.correct_switched),
            (False, False, self.incorrect_kept),
            (False, True, self.incorrect_switched),
        ]

    def total(self) -> Fraction:
        return sum((p for *_, p in self.rows()), Fraction(0))


def door_labels(n: int) -> tuple[str, ...]:
    if n == 3:
        return ("A", "B", "C")
    return tuple(f"D{i}" for i in range(1, n + 1))


def strategy_name(w: Fraction) -> str:
    for name, weight in STRATEGY_WEIGHTS.items():
        if weight == w:
            return name
    return f"w={w}"


def _uniform(labels, over) -> dict[str, Fraction]:
    over = list(over)
    return {o: Fraction(1, len(over)) if o in over else Fraction(0) for o in labels}


def _pick(labels, choices, tiebreak: TieBreak) -> dict[str, Fraction]:
    if tiebreak is TieBreak.FIRST:
        return _uniform(labels, choices[:1])
    return _uniform(labels, choices)


def host_cpt(cfg: MontyConfig) -> Cpt:
    """Distribution of the opened door H given car X and first guess G1."""
    doors = door_labels(cfg.n_doors)
    h_domain = doors if cfg.policy is Policy.NEUTRAL else doors + (NONE,)
    rows = {}
    for x in doors:
        for g1 in doors:
            goats = [d for d in doors if d != x and d != g1]
            reveal = (
                cfg.policy is Policy.NEUTRAL
                or (cfg.policy is Policy.GOOD and g1 != x)
                or (cfg.policy is Policy.BAD and g1 == x)
            )
            if reveal:
                rows[(x, g1)] = _pick(h_domain, goats, cfg.tiebreak)
            else:
                rows[(x, g1)] = _uniform(h_domain, [NONE])
    return Cpt("H", ("X", "G1"), rows)


def strategy_cpt(cfg: MontyConfig) -> Cpt:
    """Second guess G2 given strategy S, first guess G1 and opened door H.

    Rows where H equals G1 never occur; they keep G1 so every row is a
    distribution.
    """
    doors = door_labels(cfg.n_doors)
    h_domain = doors if cfg.policy is Policy.NEUTRAL else doors + (NONE,)
    rows = {}
    for s in ("keep", "switch"):
        for g1 in doors:
            for h in h_domain:
                if s == "keep" or h == NONE or h == g1:
                    rows[(s, g1, h)] = _uniform(doors, [g1])
                else:
                    rows[(s, g1, h)] = _uniform(doors, [d for d in doors if d not in (g1, h)])
    return Cpt("G2", ("S", "G1", "H"), rows)


def result_cpt(cfg: MontyConfig) -> Cpt:
    doors = door_labels(cfg.n_doors)
    rows = {
        (x, g2): {"W": Fraction(int(x == g2)), "L": Fraction(int(x != g2))}
        for x in doors
        for g2 in doors
    }
    return Cpt("R", ("X", "G2"), rows)


def build_monty(cfg: MontyConfig | None = None, **kwargs) -> Network:
    """Build the Monty Hall network; keyword arguments construct a MontyConfig."""
    if cfg is None:
        cfg = MontyConfig(**kwargs)
    elif kwargs:
        raise UsageError("pass either a MontyConfig or keyword arguments, not both")
    doors = door_labels(cfg.n_doors)
    h_domain = doors if cfg.policy is Policy.NEUTRAL else doors + (NONE,)
    w = cfg.switch_weight
    variables = (
        Variable("S", VariableKind.DECISION, ("keep", "switch")),
        Variable("X", VariableKind.CHANCE, doors),
        Variable("G1", VariableKind.CHANCE, doors),
        Variable("H", VariableKind.DECISION, h_domain, ("X", "G1")),
        Variable("G2", VariableKind.DECISION, doors, ("S", "G1", "H")),
        Variable("R", VariableKind.UTILITY, ("W", "L"), ("X", "G2")),
    )
    cpts = {
        "S": Cpt("S", (), {(): {"keep": 1 - w, "switch": w}}),
        "X": Cpt("X", (), {(): _uniform(doors, doors)}),
        "G1": Cpt("G1", (), {(): _uniform(doors, doors)}),
        "H": host_cpt(cfg),
        "G2": strategy_cpt(cfg),
        "R": result_cpt(cfg),
    }
    name = f"monty_{cfg.n_doors}_{cfg.policy.value}_{strategy_name(w).replace('=', '').replace('/', '_')}"
    return Network(variables, cpts, name=name)


def strategy_network(cfg: MontyConfig) -> Network:
    """The Monty network with S summed into G2 (one network per strategy)."""
    return inference.sum_out_root(build_monty(cfg), "S")


def closed_form_win(cfg: MontyConfig) -> Fraction:
    """Exact P(R=W), where a switch picks one specific remaining door."""
    n = cfg.n_doors
    w = cfg.switch_weight
    per_door = per_door_switch_probability(n)
    if cfg.policy is Policy.NEUTRAL:
        return (1 - w) * Fraction(1, n) + w * per_door
    if cfg.policy is Policy.GOOD:
        # Correct first guesses get no reveal and keep; wrong ones switch with prob w.
        return Fraction(1, n) + w * per_door
    return Fraction(1, n) * (1 - w)


def closed_form_set_win(cfg: MontyConfig) -> Fraction:
    """P(win) counting a switch as winning when the car is behind any unopened other door."""
    n = cfg.n_doors
    w = cfg.switch_weight
    if cfg.policy is Policy.NEUTRAL:
        return (1 - w) * Fraction(1, n) + w * Fraction(n - 1, n)
    if cfg.policy is Policy.GOOD:
        return Fraction(1, n) + w * Fraction(n - 1, n)
    return Fraction(1, n) * (1 - w)


def set_win_probability(net: Network) -> Fraction:
    """Enumerated counterpart of :func:`closed_form_set_win` on a Monty network."""
    total = Fraction(0)
    for row in inference.enumerate_outcomes(net):
        a = row.assignment
        if a["G2"] == a["G1"]:
            won = a["X"] == a["G1"]
        else:
            won = a["X"] not in (a["G1"], a["H"])
        if won:
            total += row.probability
    return total


def per_door_switch_probability(n: int) -> Fraction:
    if n < 3:
        raise UsageError(f"per-door switch probability needs n >= 3, got {n}")
    return Fraction(n - 1, n * n - 2 * n)


def switch_advantage(n: int) -> Fraction:
    return per_door_switch_probability(n) - Fraction(1, n)


def alonzi_joint(n: int) -> AlonziTable:
    if n < 3:
        raise UsageError(f"n must be >= 3, got {n}")
    return AlonziTable(
        correct_kept=Fraction(1, n),
        correct_switched=Fraction(0),
        incorrect_kept=Fraction(0),
        incorrect_switched=Fraction(n - 1, n),
    )

