"""Interactive terminal game against a neutral host."""

from __future__ import annotations

import sys
from bisect import bisect_right
from fractions import Fraction

from .model import format_decimal
from .monty import MontyConfig, closed_form_win, door_labels, host_cpt
from .simulate import Xoshiro256, _thresholds

QUIT = {"q", "quit", "exit"}


class _Session:
    def __init__(self, seed: int, n_doors: int, read, out, style):
        self.rng = Xoshiro256(seed)
        self.cfg = MontyConfig(n_doors)
        self.doors = door_labels(n_doors)
        self.host = host_cpt(self.cfg)
        self.read = read
        self.out = out
        self.style = style
        self.games = 0
        self.kept = [0, 0]  # games, wins
        self.switched = [0, 0]

    def say(self, text: str = "") -> None:
        self.out.write(text + "\n")

    def ask(self, prompt: str) -> str | None:
        self.out.write(prompt)
        self.out.flush()
        try:
            answer = self.read()
        except EOFError:
            self.out.write("\n")
            return None
        return answer.strip()

    def _reveal(self, car: str, guess: str) -> str:
        row = self.host.rows[(car, guess)]
        choices = [d for d in self.doors if row.get(d)]
        if len(choices) == 1:
            return choices[0]
        return self.doors[bisect_right(_thresholds(row, self.doors), self.rng.next())]

    def play_one(self) -> bool:
        car = self.doors[self.rng.below(len(self.doors))]
        listing = ", ".join(self.doors)
        while True:
            answer = self.ask(f"Pick a door ({listing}) or q to quit: ")
            if answer is None or answer.lower() in QUIT:
                return False
            guess = answer.upper()
            if guess in self.doors:
                break
            self.say(f"'{answer}' is not a door.")
        opened = self._reveal(car, guess)
        others = [d for d in self.doors if d not in (guess, opened)]
        self.say(f"The host opens door {opened}: a goat.")
        if len(others) == 1:
            prompt = f"Keep {guess} or switch to {others[0]}? [k/s]: "
        else:
            prompt = f"Keep {guess} (k) or switch to one of {', '.join(others)}? "
        while True:
            answer = self.ask(prompt)
            if answer is None or answer.lower() in QUIT:
                return False
            choice = answer.upper()
            if choice == "K" or choice == guess:
                final = guess
                break
            if choice == "S" and len(others) == 1:
                final = others[0]
                break
            if choice in others:
                final = choice
                break
            self.say(f"'{answer}' is not a valid choice.")
        won = final == car
        cell = self.kept if final == guess else self.switched
        cell[0] += 1
        cell[1] += won
        self.games += 1
        verdict = self.style("You win the car!", "32") if won else self.style("A goat. You lose.", "31")
        self.say(f"The car was behind door {car}. {verdict}")
        self.summary()
        return True

    def summary(self) -> None:
        keep = closed_form_win(MontyConfig(len(self.doors), 0))
        switch = closed_form_win(MontyConfig(len(self.doors), 1))

        def rate(cell):
            return f"{cell[1]}/{cell[0]}" if cell[0] else "0/0"

        self.say(
            f"Tally after {self.games} game(s): kept {rate(self.kept)} won, "
            f"switched {rate(self.switched)} won | exact: keep {keep} "
            f"({format_decimal(keep, 4)}), switch {switch} ({format_decimal(switch, 4)})"
        )


def play(seed: int = 0, n_doors: int = 3, read=None, out=None, style=None) -> int:
    """Play until quit or end of input; returns the process exit code."""
    read = read or _stdin_reader
    out = out or sys.stdout
    style = style or (lambda text, code: text)
    session = _Session(seed, n_doors, read, out, style)
    session.say(f"Monty Hall with {n_doors} doors (seed {seed}). One hides a car, the rest goats.")
    while session.play_one():
        pass
    session.say("Session over.")
    session.summary()
    return 0


def _stdin_reader() -> str:
    line = sys.stdin.readline()
    if not line:
        raise EOFError
    return line
