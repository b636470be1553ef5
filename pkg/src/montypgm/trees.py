"""Strategy decision trees: expansion, leaves, summaries and rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from fractions import Fraction

from . import inference
from .model import (
    Assignment,
    InconsistentEvidenceError,
    Network,
    VariableKind,
    check_assignment,
    format_decimal,
    topological_order,
    truncate_decimal,
)
from .monty import MontyConfig, Policy, door_labels, strategy_name, strategy_network


@dataclass
class TreeNode:
    variable: str
    outcome: str
    local_probability: Fraction
    children: list["TreeNode"] = field(default_factory=list)

    @property
    def is_root(self) -> bool:
        return self.variable == ""


@dataclass(frozen=True)
class Leaf:
    path_label: str
    joint_probability: Fraction
    result: str | None
    assignment: dict[str, str]
    local_probabilities: tuple[Fraction, ...]


@dataclass(frozen=True)
class StrategySummary:
    strategy: str
    weight: Fraction
    p_win: Fraction
    p_loss: Fraction
    p_win_per_door: Fraction


class TreeFormat(str, Enum):
    TEXT = "text"
    DOT = "dot"
    JSON = "json"


def expand_tree(net: Network, fixed: Assignment | None = None, prune_zero: bool = True) -> TreeNode:
    """Branch over variables in topological order below a synthetic root.

    Fixed variables contribute one branch of local probability 1; the other
    branches carry their CPT entry given the path so far.
    """
    fixed = dict(fixed or {})
    check_assignment(net, fixed)
    if inference.evidence_probability(net, fixed) == 0:
        raise InconsistentEvidenceError("fixed assignment has probability zero")
    order = topological_order(net)
    root = TreeNode("", "", Fraction(1))
    path: dict[str, str] = {}

    # Locals under fixing are conditionals: P(v | path) renormalised over the
    # continuations consistent with later fixed values.
    def mass(depth: int) -> Fraction:
        if depth == len(order):
            return Fraction(1)
        name = order[depth]
        cpt = net.cpts[name]
        row = cpt.rows[tuple(path[p] for p in cpt.parents)]
        choices = [fixed[name]] if name in fixed else net.variable(name).domain
        total = Fraction(0)
        for label in choices:
            p = row.get(label, Fraction(0))
            if p:
                path[name] = label
                total += p * mass(depth + 1)
        path.pop(name, None)
        return total

    def grow(node: TreeNode, depth: int) -> None:
        if depth == len(order):
            return
        name = order[depth]
        cpt = net.cpts[name]
        row = cpt.rows[tuple(path[p] for p in cpt.parents)]
        choices = [fixed[name]] if name in fixed else net.variable(name).domain
        weights = []
        for label in choices:
            p = row.get(label, Fraction(0))
            path[name] = label
            weights.append((label, p * mass(depth + 1) if p else Fraction(0)))
        path.pop(name, None)
        total = sum((w for _, w in weights), Fraction(0))
        for label, w in weights:
            local = w / total if total else Fraction(0)
            if prune_zero and not local:
                continue
            child = TreeNode(name, label, local)
            node.children.append(child)
            path[name] = label
            grow(child, depth + 1)
            path.pop(name, None)

    grow(root, 0)
    return root


def _join(labels: list[str]) -> str:
    if all(len(label) == 1 for label in labels):
        return "".join(labels)
    return "-".join(labels)


def leaves(tree: TreeNode, utility: set[str] | None = None) -> list[Leaf]:
    """Depth-first, left-to-right leaves.

    Outcomes of variables named in ``utility`` are reported as the leaf's
    result rather than included in the path label. When omitted, the result
    variable is taken to be ``R``.
    """
    utility = {"R"} if utility is None else utility
    out: list[Leaf] = []

    def walk(node: TreeNode, trail: list[TreeNode]) -> None:
        if not node.children:
            steps = [n for n in trail if not n.is_root]
            p = Fraction(1)
            for n in steps:
                p *= n.local_probability
            labels = [n.outcome for n in steps if n.variable not in utility]
            results = [n.outcome for n in steps if n.variable in utility]
            out.append(
                Leaf(
                    path_label=_join(labels),
                    joint_probability=p,
                    result=results[-1] if results else None,
                    assignment={n.variable: n.outcome for n in steps},
                    local_probabilities=tuple(n.local_probability for n in steps),
                )
            )
            return
        for child in node.children:
            walk(child, trail + [child])

    walk(tree, [tree])
    return out


def utility_names(net: Network) -> set[str]:
    return {v.name for v in net.variables if v.kind is VariableKind.UTILITY}


def strategy_tree(cfg: MontyConfig, car: str | None = "A", prune_zero: bool = True) -> TreeNode:
    net = strategy_network(cfg)
    return expand_tree(net, {"X": car} if car is not None else {}, prune_zero)


def summarize_strategies(
    n: int, weights, policy: Policy = Policy.NEUTRAL
) -> list[StrategySummary]:
    """Win/loss per strategy weight, averaged over all car placements.

    ``p_win`` counts a switch as winning when the car sits behind any of the
    doors the contestant could switch to (for n = 3 this is the single
    remaining door); ``p_win_per_door`` is the probability of winning with
    the door actually chosen.
    """
    doors = door_labels(n)
    out = []
    for w in weights:
        w = Fraction(w)
        cfg = MontyConfig(n, w, policy)
        net = strategy_network(cfg)
        names = utility_names(net)
        set_win = Fraction(0)
        door_win = Fraction(0)
        for car in doors:
            for leaf in leaves(expand_tree(net, {"X": car}), names):
                a = leaf.assignment
                if leaf.result == "W":
                    door_win += leaf.joint_probability
                if a["G2"] == a["G1"]:
                    won = a["X"] == a["G1"]
                else:
                    won = a["X"] not in (a["G1"], a["H"])
                if won:
                    set_win += leaf.joint_probability
        set_win /= len(doors)
        door_win /= len(doors)
        out.append(StrategySummary(strategy_name(w), w, set_win, 1 - set_win, door_win))
    return out


def short_decimal(d: Decimal) -> str:
    """Trailing zeros dropped, but integers keep one place: "1.0", "0.5", "0.165"."""
    d = d.normalize()
    text = format(d, "f")
    return text if "." in text else text + ".0"


def _fmt(p: Fraction, truncated: bool) -> str:
    if truncated:
        return f"{p} ({short_decimal(truncate_decimal(p))})"
    return f"{p} ({format_decimal(p, 4)})"


def _truncated_joint(leaf: Leaf) -> Decimal:
    d = Decimal(1)
    for p in leaf.local_probabilities:
        d *= truncate_decimal(p)
    return d


def render_tree(
    tree: TreeNode,
    format: TreeFormat | str = TreeFormat.TEXT,
    paper_rounding: bool = False,
    utility: set[str] | None = None,
) -> str:
    """Render as an indented outline, a Graphviz digraph, or nested JSON.

    With ``paper_rounding`` each local probability is truncated to two
    decimals and leaf products are formed from the truncated values, so the
    1/6 leaves render as 0.165.
    """
    format = TreeFormat(format)
    utility = {"R"} if utility is None else utility
    leaf_iter = iter(leaves(tree, utility))

    def leaf_fields(leaf: Leaf) -> tuple[str, str]:
        if paper_rounding:
            joint = f"{leaf.joint_probability} ({short_decimal(_truncated_joint(leaf))})"
        else:
            joint = _fmt(leaf.joint_probability, False)
        return joint, leaf.result or "-"

    if format is TreeFormat.TEXT:
        lines = ["root"]

        def walk(node: TreeNode, depth: int) -> None:
            for child in node.children:
                line = "  " * depth + f"{child.variable}={child.outcome} p={_fmt(child.local_probability, paper_rounding)}"
                if not child.children:
                    leaf = next(leaf_iter)
                    joint, result = leaf_fields(leaf)
                    line += f"  [{leaf.path_label}] joint={joint} result={result}"
                lines.append(line)
                walk(child, depth + 1)

        walk(tree, 1)
        return "\n".join(lines) + "\n"

    if format is TreeFormat.DOT:
        nodes = ['  n0 [label="root"];']
        edges = []
        counter = [0]

        def walk(node: TreeNode, ident: str) -> None:
            for child in node.children:
                counter[0] += 1
                cid = f"n{counter[0]}"
                label = f"{child.variable}={child.outcome}\\np={child.local_probability}"
                attrs = ""
                if not child.children:
                    leaf = next(leaf_iter)
                    joint, result = leaf_fields(leaf)
                    label += f"\\n{leaf.path_label} {result}\\njoint={leaf.joint_probability}"
                    attrs = ", shape=box"
                    if result == "W":
                        attrs += ", color=green"
                    elif result == "L":
                        attrs += ", color=red"
                nodes.append(f'  {cid} [label="{label}"{attrs}];')
                edges.append(f'  {ident} -> {cid} [label="{child.local_probability}"];')
                walk(child, cid)

        walk(tree, "n0")
        return "digraph tree {\n" + "\n".join(nodes + edges) + "\n}\n"

    def to_obj(node: TreeNode) -> dict:
        obj: dict = {
            "variable": node.variable or None,
            "outcome": node.outcome or None,
            "local_probability": str(node.local_probability),
        }
        if node.children:
            obj["children"] = [to_obj(c) for c in node.children]
        elif not node.is_root:
            leaf = next(leaf_iter)
            obj["path_label"] = leaf.path_label
            obj["joint_probability"] = str(leaf.joint_probability)
            obj["result"] = leaf.result
        else:
            obj["children"] = []
        return obj

    return json.dumps(to_obj(tree), indent=2) + "\n"
