"""The twelve acceptance criteria, each at its stated tolerance.

Every test records PASS or FAIL under its criterion name; the lines are printed
in an "acceptance criteria" section at the end of the pytest run.
"""

import io
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import networks
from montypgm import cli, inference, monty
from montypgm.modelfmt import networks_equal, parse_model, serialize
from montypgm.monty import MontyConfig, Policy, build_monty
from montypgm.simulate import empirical_vs_exact, run_trials
from montypgm.trees import leaves, render_tree, strategy_tree

F = Fraction


@contextmanager
def criterion(record, name):
    record[name] = False
    yield
    record[name] = True


def test_01_strategy_win_probabilities(acceptance_record):
    with criterion(acceptance_record, "01 switch/keep/flip win probabilities are 2/3, 1/3, 1/2"):
        expected = {F(1): F(2, 3), F(0): F(1, 3), F(1, 2): F(1, 2)}
        for w, want in expected.items():
            assert inference.win_probability(build_monty(MontyConfig(3, w, Policy.NEUTRAL))) == want


def test_02_switch_sample_space(acceptance_record):
    with criterion(acceptance_record, "02 switch sample space has 12 rows, 6 losses at 1/18 and 6 wins at 1/9"):
        rows = inference.enumerate_outcomes(build_monty(MontyConfig(3, 1)))
        assert len(rows) == 12
        losses = [r for r in rows if r.assignment["R"] == "L"]
        wins = [r for r in rows if r.assignment["R"] == "W"]
        assert len(losses) == 6 and all(r.probability == F(1, 18) for r in losses)
        assert len(wins) == 6 and all(r.probability == F(1, 9) for r in wins)
        assert all(r.assignment["X"] == r.assignment["G1"] for r in losses)
        assert all(r.assignment["H"] not in (r.assignment["X"], r.assignment["G1"]) for r in rows)


def test_03_posterior_and_odds(acceptance_record):
    with criterion(acceptance_record, "03 P(X=C | G1=A, H=B) = 2/3 and odds C:A = 2"):
        net = build_monty(MontyConfig(3, 1))
        e = {"G1": "A", "H": "B"}
        assert inference.marginal(net, "X", e)["C"] == F(2, 3)
        assert inference.odds_ratio(net, ("X", "C"), ("X", "A"), e) == 2


def test_04_prior_stability(acceptance_record):
    with criterion(acceptance_record, "04 P(X=g1 | G1=g1, H=h) = 1/3 for all 6 valid pairs"):
        net = build_monty(MontyConfig(3, 1))
        pairs = [(g, h) for g in "ABC" for h in "ABC" if g != h]
        assert len(pairs) == 6
        for g1, h in pairs:
            assert inference.marginal(net, "X", {"G1": g1, "H": h})[g1] == F(1, 3)


def test_05_keep_tree_leaves(acceptance_record):
    with criterion(acceptance_record, "05 keep tree at X=A has leaves 1/6, 1/6, 1/3, 1/3; truncated mode prints 0.165"):
        tree = strategy_tree(MontyConfig(3, 0), "A")
        probs = sorted(l.joint_probability for l in leaves(tree))
        assert probs == [F(1, 6), F(1, 6), F(1, 3), F(1, 3)] and sum(probs) == 1
        text = render_tree(tree, paper_rounding=True)
        assert text.count("joint=1/6 (0.165)") == 2


def test_06_n_door_closed_form(acceptance_record):
    with criterion(acceptance_record, "06 per-door switch probability 2/3, 3/8 and equal to enumeration for n in 3..8"):
        assert monty.per_door_switch_probability(3) == F(2, 3)
        assert monty.per_door_switch_probability(4) == F(3, 8)
        for n in range(3, 9):
            net = build_monty(MontyConfig(n, 1, Policy.NEUTRAL))
            doors = monty.door_labels(n)
            post = inference.marginal(net, "X", {"G1": doors[0], "H": doors[1]})
            for d in doors[2:]:
                assert post[d] == monty.per_door_switch_probability(n)


def test_07_alonzi_tables(acceptance_record):
    with criterion(acceptance_record, "07 four-event tables (1/3, 0, 0, 2/3) and (1/4, 0, 0, 3/4)"):
        for n, want in ((3, (F(1, 3), 0, 0, F(2, 3))), (4, (F(1, 4), 0, 0, F(3, 4)))):
            table = monty.alonzi_joint(n)
            assert tuple(p for *_, p in table.rows()) == want
            assert table.total() == 1


def test_08_advantage_positive_and_decreasing(acceptance_record):
    with criterion(acceptance_record, "08 switch advantage positive and strictly decreasing for n in 3..100"):
        adv = [monty.switch_advantage(n) for n in range(3, 101)]
        assert all(a > 0 for a in adv)
        assert all(a > b for a, b in zip(adv, adv[1:]))


def test_09_monte_carlo_convergence(acceptance_record):
    with criterion(acceptance_record, "09 N=100000, seeds 1-3: |empirical - exact| <= 0.01; reruns byte-identical"):
        for w in (F(1), F(0), F(1, 2)):
            net = build_monty(MontyConfig(3, w))
            for seed in (1, 2, 3):
                tally = run_trials(net, 100_000, seed)
                assert abs(F(tally.wins, tally.trials) - inference.win_probability(net)) <= F(1, 100)
                assert empirical_vs_exact(tally, net).deviation <= F(1, 100)
        net = build_monty(MontyConfig(3, 1))
        assert run_trials(net, 100_000, 1).dumps() == run_trials(net, 100_000, 1).dumps()


def test_10_policy_extension(acceptance_record):
    with criterion(acceptance_record, "10 good/bad host closed forms equal enumeration; good w=1 is 1, bad w=1 is 0"):
        for policy in (Policy.GOOD, Policy.BAD):
            for n in range(3, 6):
                for w in (F(0), F(1, 2), F(1)):
                    cfg = MontyConfig(n, w, policy)
                    assert monty.closed_form_win(cfg) == inference.win_probability(build_monty(cfg))
        assert inference.win_probability(build_monty(MontyConfig(3, 1, Policy.GOOD))) == 1
        assert inference.win_probability(build_monty(MontyConfig(3, 1, Policy.BAD))) == 0


@settings(max_examples=200, deadline=None, database=None)
@given(networks())
def _random_round_trip(net):
    back = parse_model(serialize(net))
    assert networks_equal(net, back)


def test_11_parser_round_trip(acceptance_record):
    with criterion(acceptance_record, "11 parse/serialize round-trip on builtins and 200 random networks; 9 host rows"):
        for n in (3, 4, 5):
            for w in (F(0), F(1, 2), F(1)):
                for policy in Policy:
                    net = build_monty(MontyConfig(n, w, policy))
                    assert networks_equal(net, parse_model(serialize(net)))
        _random_round_trip()
        text = serialize(build_monty(MontyConfig(3, 1)))
        h_rows = [line for line in text.splitlines() if line.startswith("cpt H | ")]
        assert h_rows == [
            "cpt H | X=A, G1=A : A=0, B=1/2, C=1/2",
            "cpt H | X=A, G1=B : A=0, B=0, C=1",
            "cpt H | X=A, G1=C : A=0, B=1, C=0",
            "cpt H | X=B, G1=A : A=0, B=0, C=1",
            "cpt H | X=B, G1=B : A=1/2, B=0, C=1/2",
            "cpt H | X=B, G1=C : A=1, B=0, C=0",
            "cpt H | X=C, G1=A : A=0, B=1, C=0",
            "cpt H | X=C, G1=B : A=1, B=0, C=0",
            "cpt H | X=C, G1=C : A=1/2, B=1/2, C=0",
        ]


def _perturb(net, mode):
    host = net.cpt("H")
    x, guess = net.variable("G1").domain[:2]
    row = dict(host.rows[(x, guess)])
    forced = next(d for d, p in row.items() if p == 1)
    if mode == "single entry":
        row[forced] = F(1, 2)
    else:
        # move the forced reveal onto the car's door; the row still sums to 1
        row[forced], row[x] = F(0), F(1)
    rows = {**host.rows, (x, guess): row}
    return replace(net, cpts={**net.cpts, "H": replace(host, rows=rows)})


@pytest.mark.parametrize("mode", ["single entry", "row-preserving swap"])
def test_12_check_detects_mutation(acceptance_record, monkeypatch, mode):
    with criterion(acceptance_record, f"12 check exits 0 on a correct build and 1 after a host-cell mutation ({mode})"):
        assert cli.main(["check"], io.StringIO()) == 0
        original = monty.build_monty
        monkeypatch.setattr(monty, "build_monty", lambda cfg=None, **kw: _perturb(original(cfg, **kw), mode))
        out = io.StringIO()
        assert cli.main(["check"], out) == 1
        assert "FAIL" in out.getvalue()
