"""Core value types for discrete decision networks.

Probabilities are exact rationals (:class:`fractions.Fraction`) everywhere;
decimal strings only appear at the display boundary via :func:`format_decimal`
and :func:`truncate_decimal`.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping

Rational = Fraction

# Full or partial binding of variable names to outcome labels.
Assignment = Mapping[str, str]

_RATIONAL_RE = re.compile(r"^([0-9]+)/([0-9]+)$")
_DECIMAL_RE = re.compile(r"^(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)$")


class MontyError(Exception):
    """Base class for all errors raised by the package."""


class UsageError(MontyError):
    """A caller passed arguments that violate an operation's preconditions."""


class StructureError(MontyError):
    """The network graph is malformed (e.g. contains a cycle)."""


class InconsistentEvidenceError(MontyError):
    """Conditioning on an event of probability zero."""

    def __init__(self, message: str = "evidence has probability zero"):
        super().__init__(message)


def to_rational(value) -> Fraction:
    """Convert ``value`` to an exact rational.

    Strings may be ``p/q`` or a base-10 decimal literal; decimals convert
    exactly, so ``"0.1"`` is 1/10 and ``".33"`` is 33/100 (not 1/3).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        m = _RATIONAL_RE.match(text)
        if m:
            den = int(m.group(2))
            if den == 0:
                raise UsageError(f"zero denominator in {value!r}")
            return Fraction(int(m.group(1)), den)
        if _DECIMAL_RE.match(text):
            return Fraction(Decimal(text))
        raise UsageError(f"not a probability literal: {value!r}")
    raise UsageError(f"cannot convert {type(value).__name__} to a rational")


def format_decimal(value: Fraction, places: int = 4) -> str:
    """Round half-up (away from zero) to ``places`` decimals."""
    value = Fraction(value)
    sign = "-" if value < 0 else ""
    value = abs(value)
    scaled, rem = divmod(value.numerator * 10**places, value.denominator)
    if 2 * rem >= value.denominator:
        scaled += 1
    if places == 0:
        return f"{sign}{scaled}"
    whole, frac = divmod(scaled, 10**places)
    return f"{sign}{whole}.{frac:0{places}d}"


def truncate_decimal(value: Fraction, places: int = 2) -> Decimal:
    """Truncate toward zero to ``places`` decimals (1/3 -> 0.33)."""
    value = Fraction(value)
    scaled = int(value * 10**places)
    return Decimal(scaled).scaleb(-places)


class VariableKind(str, Enum):
    CHANCE = "chance"
    DECISION = "decision"
    UTILITY = "utility"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: VariableKind
    domain: tuple[str, ...]
    parents: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", VariableKind(self.kind))
        object.__setattr__(self, "domain", tuple(self.domain))
        object.__setattr__(self, "parents", tuple(self.parents))


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table for one variable.

    ``rows`` maps a tuple of parent outcomes (ordered like ``parents``) to a
    distribution over the variable's outcomes. Root variables have a single
    row keyed by the empty tuple.
    """

    variable: str
    parents: tuple[str, ...]
    rows: dict[tuple[str, ...], dict[str, Fraction]]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        rows = {
            tuple(key): {o: Fraction(p) for o, p in dist.items()}
            for key, dist in self.rows.items()
        }
        object.__setattr__(self, "rows", rows)


@dataclass(frozen=True)
class Network:
    """A DAG of named variables, each with a CPT over its parents.

    Construction does not validate; use :func:`validate_network`. This keeps
    malformed networks representable so that validation can report on them.
    """

    variables: tuple[Variable, ...]
    cpts: dict[str, Cpt]
    name: str = "network"
    _index: dict[str, Variable] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cpts", dict(self.cpts))
        object.__setattr__(self, "_index", {v.name: v for v in self.variables})

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def variable(self, name: str) -> Variable:
        try:
            return self._index[name]
        except KeyError:
            raise UsageError(f"unknown variable {name!r}") from None

    def cpt(self, name: str) -> Cpt:
        try:
            return self.cpts[name]
        except KeyError:
            raise UsageError(f"no CPT for variable {name!r}") from None

    def children(self, name: str) -> list[str]:
        return [v.name for v in self.variables if name in v.parents]

    def utility_variables(self) -> list[Variable]:
        return [v for v in self.variables if v.kind is VariableKind.UTILITY]


@dataclass(frozen=True)
class Violation:
    variable: str
    reason: str
    detail: str = ""
    row: tuple[str, ...] | None = None

    def __str__(self) -> str:
        where = self.variable
        if self.row is not None:
            where += " | " + ",".join(self.row)
        text = f"{where}: {self.reason}"
        return f"{text} ({self.detail})" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(str(v) for v in self.violations)


def parent_space(net: Network, parents) -> Iterator[tuple[str, ...]]:
    """Cartesian product of parent domains, in lexicographic domain order."""
    return itertools.product(*(net.variable(p).domain for p in parents))


def _find_cycle_members(variables) -> set[str]:
    # Kahn's algorithm over known parents; whatever never drains is on or
    # downstream of a cycle.
    known = {v.name for v in variables}
    pending = {v.name: {p for p in v.parents if p in known} for v in variables}
    changed = True
    while changed:
        changed = False
        for name, parents in list(pending.items()):
            if not parents:
                del pending[name]
                for rest in pending.values():
                    rest.discard(name)
                changed = True
    return set(pending)


def validate_network(net: Network) -> ValidationReport:
    """Check every network invariant; violations are returned, not raised."""
    out: list[Violation] = []
    seen: set[str] = set()
    for v in net.variables:
        if v.name in seen:
            out.append(Violation(v.name, "duplicate variable"))
        seen.add(v.name)
        if not v.domain:
            out.append(Violation(v.name, "empty domain"))
        elif len(set(v.domain)) != len(v.domain):
            out.append(Violation(v.name, "duplicate outcome label"))
        for p in v.parents:
            if p == v.name:
                out.append(Violation(v.name, "cycle", "variable is its own parent"))
            elif p not in net._index:
                out.append(Violation(v.name, "unknown parent", p))
        if len(set(v.parents)) != len(v.parents):
            out.append(Violation(v.name, "duplicate parent"))

    cyclic = _find_cycle_members(net.variables)
    for v in net.variables:
        if v.name in cyclic and v.name not in v.parents:
            out.append(Violation(v.name, "cycle", "parent relation is not acyclic"))

    for v in net.variables:
        if v.kind is VariableKind.UTILITY:
            kids = net.children(v.name)
            if kids:
                out.append(
                    Violation(v.name, "utility variable has children", ",".join(kids))
                )

    for name in net.cpts:
        if name not in net._index:
            out.append(Violation(name, "CPT for unknown variable"))

    for v in net.variables:
        cpt = net.cpts.get(v.name)
        if cpt is None:
            out.append(Violation(v.name, "missing CPT"))
            continue
        if cpt.variable != v.name:
            out.append(Violation(v.name, "CPT variable mismatch", cpt.variable))
        if cpt.parents != v.parents:
            out.append(
                Violation(
                    v.name,
                    "CPT parents differ from variable parents",
                    f"{list(cpt.parents)} vs {list(v.parents)}",
                )
            )
            continue
        if any(p not in net._index for p in v.parents):
            continue
        expected = set(parent_space(net, v.parents))
        for key in parent_space(net, v.parents):
            if key not in cpt.rows:
                out.append(Violation(v.name, "missing CPT row", row=key))
        for key, dist in cpt.rows.items():
            if key not in expected:
                out.append(Violation(v.name, "unexpected CPT row", row=key))
                continue
            domain = set(v.domain)
            for o, p in dist.items():
                if o not in domain:
                    out.append(Violation(v.name, "unknown outcome", o, row=key))
                if p < 0 or p > 1:
                    out.append(Violation(v.name, "value out of [0, 1]", f"{o}={p}", row=key))
            total = sum(dist.values(), Fraction(0))
            if total != 1:
                out.append(Violation(v.name, "row sum ≠ 1", f"row sum {total} ≠ 1", row=key))
    return ValidationReport(tuple(out))


def topological_order(net: Network) -> list[str]:
    """Parents before children; ties broken by declaration order."""
    known = set(net.names)
    placed: set[str] = set()
    order: list[str] = []
    remaining = list(net.variables)
    while remaining:
        for i, v in enumerate(remaining):
            if all(p in placed or p not in known for p in v.parents) and v.name not in v.parents:
                order.append(v.name)
                placed.add(v.name)
                del remaining[i]
                break
        else:
            raise StructureError(
                "cycle detected among: " + ", ".join(v.name for v in remaining)
            )
    return order


def row_lookup(cpt: Cpt, parent_assignment: Assignment) -> dict[str, Fraction]:
    """Return the CPT row selected by a binding of exactly the CPT's parents."""
    missing = [p for p in cpt.parents if p not in parent_assignment]
    extra = [k for k in parent_assignment if k not in cpt.parents]
    if missing or extra:
        parts = []
        if missing:
            parts.append("unbound parent(s) " + ", ".join(missing))
        if extra:
            parts.append("extra binding(s) " + ", ".join(extra))
        raise UsageError(f"row lookup for {cpt.variable}: " + "; ".join(parts))
    key = tuple(parent_assignment[p] for p in cpt.parents)
    try:
        return dict(cpt.rows[key])
    except KeyError:
        raise UsageError(f"{cpt.variable} has no row for {key}") from None


def probability_of(net: Network, name: str, assignment: Assignment) -> Fraction:
    """Local probability P(name = a[name] | parents = a[parents])."""
    cpt = net.cpts[name]
    row = cpt.rows[tuple(assignment[p] for p in cpt.parents)]
    return row.get(assignment[name], Fraction(0))


def check_assignment(net: Network, assignment: Assignment) -> None:
    for name, label in assignment.items():
        var = net.variable(name)
        if label not in var.domain:
            raise UsageError(f"{label!r} is not an outcome of {name} {list(var.domain)}")
