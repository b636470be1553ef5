import io
import json
import os
import re
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import pytest

from montypgm import cli, monty
from montypgm.modelfmt import serialize
from montypgm.monty import MontyConfig, build_monty
from montypgm.play import play

GOLDEN = Path(__file__).parent / "golden"
REGEN = os.environ.get("MONTYPGM_REGEN_GOLDEN") == "1"


def run(*argv, stdin=None, monkeypatch=None):
    out = io.StringIO()
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def golden(name: str, text: str) -> None:
    path = GOLDEN / name
    if REGEN or not path.exists():
        path.parent.mkdir(exist_ok=True)
        path.write_text(text)
    assert text == path.read_text()


# solve


def test_solve_switch():
    code, out = run("solve", "--doors", "3", "--strategy", "switch")
    assert code == 0
    assert "P(W) = 2/3 (0.6667)" in out and "P(L) = 1/3 (0.3333)" in out
    assert "[matches enumeration]" in out


def test_solve_four_doors():
    code, out = run("solve", "--doors", "4", "--strategy", "switch")
    assert code == 0
    assert "P(W) = 3/4" in out and "per-door P(W) = 3/8" in out


def test_solve_keep_by_weight():
    code, out = run("solve", "--doors", "3", "--weight", "0")
    assert code == 0 and "P(W) = 1/3 (0.3333)" in out


def test_solve_json_golden():
    code, out = run("solve", "--doors", "3", "--strategy", "flip", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["p_win"] == "1/2" and obj["closed_form"] == obj["enumeration"]
    golden("solve_flip.json", out)


@pytest.mark.parametrize("argv", [("--doors", "2"), ("--weight", "3/2"), ("--weight", "abc"), ("--strategy", "maybe")])
def test_solve_usage_errors(argv):
    assert run("solve", *argv)[0] == 2


def test_strategy_and_weight_are_exclusive():
    assert run("solve", "--strategy", "keep", "--weight", "0")[0] == 2


def test_solve_model_file(tmp_path):
    path = tmp_path / "net.pgm.txt"
    path.write_text(serialize(build_monty(MontyConfig(3, 1))))
    code, out = run("solve", "--model", str(path))
    assert code == 0 and "P(W) = 2/3" in out


def test_bad_model_file_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.pgm.txt"
    path.write_text("network bad\nvar X chance { A B }\ncpt X : A=1/2, B=1/3\n")
    assert run("solve", "--model", str(path))[0] == 1
    assert "3:5: semantic error: row sum 5/6 ≠ 1" in capsys.readouterr().err


def test_missing_model_file_exits_one(tmp_path):
    assert run("solve", "--model", str(tmp_path / "nope.pgm.txt"))[0] == 1


# posterior


def test_posterior_with_odds():
    code, out = run("posterior", "--doors", "3", "--query", "X", "--evidence", "G1=A,H=B", "--odds", "C,A")
    assert code == 0
    assert "  A: 1/3 (0.3333)" in out and "  B: 0 (0.0000)" in out and "  C: 2/3 (0.6667)" in out
    assert "odds C:A = 2" in out


def test_posterior_without_evidence_is_uniform():
    code, out = run("posterior", "--query", "X", "--format", "json")
    assert code == 0
    assert json.loads(out)["posterior"] == {"A": "1/3", "B": "1/3", "C": "1/3"}


def test_posterior_inconsistent_evidence(capsys):
    assert run("posterior", "--query", "X", "--evidence", "H=A,X=A")[0] == 1
    assert "evidence has probability zero" in capsys.readouterr().err


@pytest.mark.parametrize("evidence", ["H", "Q=A", "H=Z"])
def test_posterior_bad_evidence_is_usage(evidence):
    assert run("posterior", "--query", "X", "--evidence", evidence)[0] == 2


def test_posterior_model_file(tmp_path):
    path = tmp_path / "net.pgm.txt"
    path.write_text(serialize(build_monty(MontyConfig(3, 1))))
    code, out = run("posterior", "--model", str(path), "--query", "X", "--evidence", "G1=A,H=B")
    assert code == 0 and "C: 2/3" in out


def test_posterior_json_golden():
    code, out = run("posterior", "--query", "X", "--evidence", "G1=A,H=B", "--format", "json")
    assert code == 0
    golden("posterior_x.json", out)


# tree


def test_tree_two_place_truncation():
    code, out = run("tree", "--doors", "3", "--strategy", "keep", "--car", "A", "--paper-rounding")
    assert code == 0
    assert out.count("joint=1/6 (0.165)") == 2
    golden("tree_keep_truncated.txt", out)


def test_tree_switch_win_mass():
    code, out = run("tree", "--strategy", "switch", "--car", "A", "--format", "json")
    assert code == 0
    found = []

    def walk(o):
        if "children" in o:
            for c in o["children"]:
                walk(c)
        else:
            found.append(o)

    walk(json.loads(out))
    assert sum(Fraction(o["joint_probability"]) for o in found if o["result"] == "W") == Fraction(2, 3)
    golden("tree_switch.json", out)


def test_tree_dot():
    code, out = run("tree", "--strategy", "flip", "--format", "dot")
    assert code == 0
    assert out.startswith("digraph tree {") and out.rstrip().endswith("}")
    nodes = re.findall(r"^  n\d+ \[label=", out, flags=re.M)
    assert len(re.findall(r"->", out)) == len(nodes) - 1
    golden("tree_flip.dot", out)


def test_tree_unknown_car():
    assert run("tree", "--car", "Q")[0] == 2


# simulate


def test_simulate_switch_converges():
    code, out = run("simulate", "--strategy", "switch", "--trials", "100000", "--seed", "1", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["tally"]["wins"] == 66871
    assert abs(Fraction(obj["tally"]["win_rate"]) - Fraction(2, 3)) <= Fraction(1, 100)


def test_simulate_single_trial_is_byte_identical():
    first = run("simulate", "--trials", "1", "--seed", "7")
    second = run("simulate", "--trials", "1", "--seed", "7")
    assert first == second and first[0] == 0


def test_simulate_json_golden():
    code, out = run("simulate", "--strategy", "flip", "--trials", "2000", "--seed", "3", "--format", "json")
    assert code == 0
    golden("simulate_flip.json", out)


def test_simulate_workers_match():
    a = run("simulate", "--trials", "9000", "--seed", "5", "--format", "json")
    b = run("simulate", "--trials", "9000", "--seed", "5", "--workers", "2", "--format", "json")
    assert a == b


@pytest.mark.parametrize("argv", [("--trials", "0"), ("--seed", "-3"), ("--trials", "many")])
def test_simulate_usage_errors(argv):
    assert run("simulate", *argv)[0] == 2


# sweep


def test_sweep_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    code, _ = run("sweep", "--doors-from", "3", "--doors-to", "12", "--out", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "n,p_switch_per_door,p_keep,advantage"
    assert lines[1] == "3,0.666667,0.333333,0.333333"
    assert lines[2] == "4,0.375000,0.250000,0.125000"
    adv = [float(line.split(",")[3]) for line in lines[1:]]
    assert len(adv) == 10 and all(a > b for a, b in zip(adv, adv[1:]))


def test_sweep_exact_columns():
    code, out = run("sweep", "--doors-to", "4", "--exact")
    assert code == 0
    assert out.splitlines()[2].endswith(",3/8,1/4,1/8")
    golden("sweep_exact.csv", out)


def test_sweep_unwritable_file(tmp_path):
    assert run("sweep", "--doors-to", "5", "--out", str(tmp_path / "no" / "dir" / "x.csv"))[0] == 1


@pytest.mark.parametrize("argv", [("--doors-from", "2", "--doors-to", "5"), ("--doors-from", "6", "--doors-to", "5")])
def test_sweep_bad_range(argv):
    assert run("sweep", *argv)[0] == 2


# check


def test_check_passes():
    code, out = run("check")
    assert code == 0
    assert out.rstrip().endswith("checks passed")
    assert "FAIL" not in out


def _perturbed_builder(monkeypatch):
    original = monty.build_monty

    def perturbed(cfg=None, **kwargs):
        net = original(cfg, **kwargs)
        host = net.cpt("H")
        rows = dict(host.rows)
        rows[("A", "A")] = {**rows[("A", "A")], "B": Fraction(1, 3), "C": Fraction(2, 3)}
        cpts = dict(net.cpts)
        cpts["H"] = replace(host, rows=rows)
        return replace(net, cpts=cpts)

    monkeypatch.setattr(monty, "build_monty", perturbed)


def test_check_detects_single_cell_mutation(monkeypatch):
    _perturbed_builder(monkeypatch)
    code, out = run("check")
    assert code == 1
    assert "FAIL" in out


# play


SCRIPT = "A\ns\nZ\nb\nk\nC\ns\nq\n"


def test_play_golden_transcript(monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    code, out = run("play", "--seed", "42", stdin=SCRIPT, monkeypatch=monkeypatch)
    assert code == 0
    assert "'Z' is not a door." in out
    assert out.rstrip().splitlines()[-2].endswith("Session over.")
    golden("play_seed42.txt", out)


def test_play_eof_ends_session(monkeypatch):
    code, out = run("play", "--seed", "1", stdin="A\n", monkeypatch=monkeypatch)
    assert code == 0 and "Session over." in out


def test_play_no_ansi_without_tty(monkeypatch):
    monkeypatch.delenv("NO_COLOR", raising=False)
    _, out = run("play", "--seed", "3", stdin="A\nk\nq\n", monkeypatch=monkeypatch)
    assert "\x1b[" not in out


def test_play_host_never_opens_guess_or_car():
    guesses = ["A", "B", "C"] * 334
    script = []
    for i, g in enumerate(guesses[:1000]):
        script += [g, "s" if i % 2 else "k"]
    lines = iter(script)

    def read():
        try:
            return next(lines) + "\n"
        except StopIteration:
            raise EOFError from None

    out = io.StringIO()
    assert play(seed=2024, read=read, out=out) == 0
    text = out.getvalue()
    opened = re.findall(r"The host opens door (\w+)", text)
    cars = re.findall(r"The car was behind door (\w+)", text)
    assert len(opened) == len(cars) == 1000
    for g, h, x in zip(guesses, opened, cars):
        assert h != g and h != x
    # both reveal branches occur when the guess hides the car
    assert len({h for g, h, x in zip(guesses, opened, cars) if g == x == "A"}) == 2


def test_play_more_doors(monkeypatch):
    code, out = run("play", "--seed", "9", "--doors", "4", stdin="D1\nD1\nq\n", monkeypatch=monkeypatch)
    assert code == 0 and "Pick a door (D1, D2, D3, D4)" in out
