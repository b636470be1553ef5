"""Seedable Monte Carlo forward sampling.

Random numbers come from xoshiro256** seeded through splitmix64, implemented
here so the stream is bit-exact on every platform. Trials are grouped into
fixed blocks of :data:`BLOCK_SIZE`; block ``b`` draws from its own generator,
seeded with splitmix64 started at ``(seed + b * BLOCK_GAMMA) mod 2**64``.
Because block boundaries do not depend on the number of workers, a parallel
run merges to exactly the single-worker tally.

A CPT row is sampled by comparing one 64-bit draw ``u`` against integer
thresholds ``ceil(P_k * 2**64)`` for the cumulative row probabilities
``P_k``; ``u < ceil(P_k * 2**64)`` iff ``u / 2**64 < P_k``, so no floats are
involved. Rows with a single possible outcome consume no draw.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from . import inference
from .model import Network, UsageError, format_decimal, topological_order

MASK64 = (1 << 64) - 1
BLOCK_SIZE = 4096
BLOCK_GAMMA = 0xD1B54A32D192ED03


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** 1.0 (Blackman & Vigna)."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int | None = None, state: tuple[int, int, int, int] | None = None):
        if state is None:
            if seed is None:
                raise UsageError("seed or state required")
            sm = seed & MASK64
            words = []
            for _ in range(4):
                sm, out = splitmix64(sm)
                words.append(out)
            state = tuple(words)
        if not any(state):
            raise UsageError("xoshiro state must not be all zero")
        self.s0, self.s1, self.s2, self.s3 = (w & MASK64 for w in state)

    def next(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s1 * 5) & MASK64
        result = ((((x << 7) | (x >> 57)) & MASK64) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & MASK64
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (unbiased)."""
        if n <= 0:
            raise UsageError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next()
            if u < limit:
                return u % n


def block_rng(seed: int, block: int) -> Xoshiro256:
    return Xoshiro256((seed + block * BLOCK_GAMMA) & MASK64)


def _thresholds(row: dict[str, Fraction], domain) -> list[int]:
    cum = Fraction(0)
    out = []
    for label in domain:
        cum += row.get(label, Fraction(0))
        out.append(-((-cum.numerator << 64) // cum.denominator))
    out[-1] = 1 << 64
    return out


@dataclass(frozen=True)
class CompiledNetwork:
    names: tuple[str, ...]
    domains: tuple[tuple[str, ...], ...]
    parents: tuple[tuple[int, ...], ...]
    # per variable: parent-index key -> outcome index (deterministic) or threshold list
    tables: tuple[dict, ...]


def compile_network(net: Network) -> CompiledNetwork:
    order = topological_order(net)
    pos = {name: i for i, name in enumerate(order)}
    domains, parents, tables = [], [], []
    for name in order:
        var = net.variable(name)
        cpt = net.cpts[name]
        pidx = tuple(pos[p] for p in cpt.parents)
        table = {}
        for key, row in cpt.rows.items():
            ikey = tuple(net.variable(p).domain.index(k) for p, k in zip(cpt.parents, key))
            support = [i for i, label in enumerate(var.domain) if row.get(label, 0)]
            if len(support) == 1:
                table[ikey] = support[0]
            else:
                table[ikey] = _thresholds(row, var.domain)
        domains.append(var.domain)
        parents.append(pidx)
        tables.append(table)
    return CompiledNetwork(tuple(order), tuple(domains), tuple(parents), tuple(tables))


def _sample_block(cn: CompiledNetwork, rng: Xoshiro256, count: int) -> Iterator[list[int]]:
    plan = list(zip(cn.parents, cn.tables))
    draw = rng.next
    for _ in range(count):
        values: list[int] = []
        for pidx, table in plan:
            entry = table[tuple(values[i] for i in pidx)]
            if entry.__class__ is int:
                values.append(entry)
            else:
                values.append(bisect_right(entry, draw()))
        yield values


def _blocks(trials: int) -> list[tuple[int, int]]:
    return [
        (b, min(BLOCK_SIZE, trials - b * BLOCK_SIZE))
        for b in range((trials + BLOCK_SIZE - 1) // BLOCK_SIZE)
    ]


@dataclass(frozen=True)
class TrialRecord:
    assignment: dict[str, str]


def sample_trials(net: Network, trials: int, seed: int) -> Iterator[TrialRecord]:
    """Yield the sampled games in order; same stream as :func:`run_trials`."""
    _check_args(trials, seed)
    cn = compile_network(net)
    for b, count in _blocks(trials):
        for values in _sample_block(cn, block_rng(seed, b), count):
            yield TrialRecord(
                {name: cn.domains[i][v] for i, (name, v) in enumerate(zip(cn.names, values))}
            )


@dataclass
class Tally:
    trials: int
    wins: int
    losses: int
    seed: int
    per_outcome: dict[str, int] = field(default_factory=dict)

    @property
    def win_rate(self) -> Fraction:
        return Fraction(self.wins, self.trials) if self.trials else Fraction(0)

    def merge(self, other: "Tally") -> "Tally":
        if other.seed != self.seed:
            raise UsageError("cannot merge tallies drawn from different seeds")
        counts = dict(self.per_outcome)
        for k, v in other.per_outcome.items():
            counts[k] = counts.get(k, 0) + v
        return Tally(
            self.trials + other.trials,
            self.wins + other.wins,
            self.losses + other.losses,
            self.seed,
            counts,
        )

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "wins": self.wins,
            "losses": self.losses,
            "seed": self.seed,
            "win_rate": format_decimal(self.win_rate, 6),
            "per_outcome": dict(sorted(self.per_outcome.items())),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=False)


def _check_args(trials: int, seed: int) -> None:
    if not isinstance(trials, int) or trials < 1:
        raise UsageError(f"trials must be a positive integer, got {trials!r}")
    if not isinstance(seed, int) or not 0 <= seed <= MASK64:
        raise UsageError(f"seed must be an unsigned 64-bit integer, got {seed!r}")


def _run_blocks(cn: CompiledNetwork, seed: int, blocks, result_pos: int) -> list[int]:
    counts = [0] * len(cn.domains[result_pos])
    for b, count in blocks:
        for values in _sample_block(cn, block_rng(seed, b), count):
            counts[values[result_pos]] += 1
    return counts


def run_trials(net: Network, trials: int, seed: int, workers: int = 1) -> Tally:
    """Forward-sample ``trials`` games and tally the result variable."""
    _check_args(trials, seed)
    result, win_label = inference.result_variable(net)
    cn = compile_network(net)
    rpos = cn.names.index(result.name)
    widx = cn.domains[rpos].index(win_label)
    blocks = _blocks(trials)
    if workers <= 1 or len(blocks) == 1:
        counts = _run_blocks(cn, seed, blocks, rpos)
    else:
        workers = min(workers, len(blocks))
        step = -(-len(blocks) // workers)
        chunks = [blocks[i : i + step] for i in range(0, len(blocks), step)]
        counts = [0] * len(cn.domains[rpos])
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_blocks, cn, seed, c, rpos) for c in chunks]
            for fut in futures:
                for i, c in enumerate(fut.result()):
                    counts[i] += c
    per_outcome = {label: counts[i] for i, label in enumerate(cn.domains[rpos])}
    wins = counts[widx]
    return Tally(trials, wins, trials - wins, seed, per_outcome)


@dataclass(frozen=True)
class SimulationReport:
    empirical: Fraction
    exact: Fraction
    deviation: Fraction
    standard_error: float
    trials: int

    @property
    def z_score(self) -> float:
        if self.standard_error == 0:
            return 0.0 if self.deviation == 0 else math.inf
        return float(self.deviation) / self.standard_error

    def to_json(self) -> dict:
        return {
            "empirical": format_decimal(self.empirical, 6),
            "exact": str(self.exact),
            "exact_decimal": format_decimal(self.exact, 6),
            "deviation": format_decimal(self.deviation, 6),
            "standard_error": format_decimal(Fraction(self.standard_error), 6),
        }


def empirical_vs_exact(tally: Tally, net: Network) -> SimulationReport:
    exact = inference.win_probability(net)
    empirical = tally.win_rate
    se = math.sqrt(float(exact * (1 - exact)) / tally.trials)
    return SimulationReport(empirical, exact, abs(empirical - exact), se, tally.trials)
