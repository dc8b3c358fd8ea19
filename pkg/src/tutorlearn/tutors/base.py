"""Shared tutor-session machinery: step rules, grading, hints, problem files."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from ..model import ActionType, InterfaceState, SAI

MC_ADDITION = "mc-addition"
FRACTIONS = "fractions"


@dataclass(frozen=True)
class HintPackage:
    """A bottom-out hint: the next correct action plus instructional extras."""

    sai: SAI
    foci: tuple[str, ...]
    skill_label: str


@dataclass(frozen=True)
class Step:
    """One required action with its instructional annotations."""

    sai: SAI
    kc: str
    foci: tuple[str, ...]


class TutorSession:
    """Base class: subclasses provide the layout and the step-availability rule.

    Required cell values, knowledge-component labels, and foci are precomputed
    per problem; availability (which actions are correct *now*) is a function
    of which cells are already locked.
    """

    domain: str = ""

    def __init__(self, problem):
        self.problem = problem
        self.state: InterfaceState = self._initial_state()
        self._steps: dict[str, Step] = {s.sai.selection: s for s in self._required_steps()}
        self.complete = False
        self.step_log: list[SAI] = []

    # subclass hooks
    def _initial_state(self) -> InterfaceState:
        raise NotImplementedError

    def _required_steps(self) -> list[Step]:
        raise NotImplementedError

    def _available(self) -> list[str]:
        """Selections whose required action may be taken in the current state."""
        raise NotImplementedError

    # common behavior
    def _filled(self, selection: str) -> bool:
        el = self.state[selection]
        if el.widget_type.value == "Button":
            return False
        return el.locked and el.value != ""

    def _all_cells_filled(self) -> bool:
        return all(
            self._filled(sel)
            for sel, step in self._steps.items()
            if step.sai.action_type is ActionType.UPDATE_TEXT_FIELD
        )

    def correct_actions(self) -> list[SAI]:
        if self.complete:
            return []
        out = []
        for sel in self._available():
            if not self._filled(sel):
                out.append(self._steps[sel].sai)
        out.sort(key=lambda s: s.selection)
        return out

    def grade(self, sai: SAI) -> float:
        return 1.0 if sai in self.correct_actions() else -1.0

    def apply(self, sai: SAI, reward: float) -> "TutorSession":
        """Correct actions write-and-lock; negative reward leaves the state alone."""
        if reward <= 0:
            return self
        self.step_log.append(sai)
        if sai.action_type is ActionType.PRESS_BUTTON:
            self.complete = True
            return self
        self.state = self.state.with_applied(sai.selection, sai.value, locked=True)
        return self

    def hint(self) -> HintPackage:
        """Bottom-out hint: the lexicographically first correct action."""
        actions = self.correct_actions()
        if not actions:
            raise RuntimeError("no correct action available (session complete?)")
        step = self._steps[actions[0].selection]
        return HintPackage(step.sai, step.foci, step.kc)

    def kc_of(self, sai: SAI) -> Optional[str]:
        step = self._steps.get(sai.selection)
        if step is not None and step.sai == sai:
            return step.kc
        return None

    def total_steps(self) -> int:
        return len(self._steps)


def gen_problem(domain: str, rng: random.Random) -> TutorSession:
    """Draw a uniform random problem and open a session on it."""
    from .fractions import FractionProblem, FractionSession
    from .mc import MCProblem, MCSession

    if domain == MC_ADDITION:
        a = tuple(rng.randint(0, 9) for _ in range(3))
        b = tuple(rng.randint(0, 9) for _ in range(3))
        return MCSession(MCProblem(a, b))
    if domain == FRACTIONS:
        num_a, den_a, num_b, den_b = (rng.randint(1, 15) for _ in range(4))
        op = rng.choice(["+", "*"])
        return FractionSession(FractionProblem(num_a, den_a, num_b, den_b, op))
    raise ValueError(f"unknown domain: {domain!r}")


def session_for(problem) -> TutorSession:
    from .fractions import FractionProblem, FractionSession
    from .mc import MCProblem, MCSession

    if isinstance(problem, MCProblem):
        return MCSession(problem)
    if isinstance(problem, FractionProblem):
        return FractionSession(problem)
    raise TypeError(f"unknown problem type: {type(problem)!r}")


def kc_labels(domain: str) -> list[str]:
    if domain == MC_ADDITION:
        return ["add2", "add3", "carry2", "carry3", "final-carry", "done"]
    if domain == FRACTIONS:
        return [
            "check_convert",
            "conv_den",
            "conv_num",
            "add_num",
            "copy_den",
            "mul_num",
            "mul_den",
            "add_same_num",
            "done",
        ]
    raise ValueError(f"unknown domain: {domain!r}")


DOMAINS = (MC_ADDITION, FRACTIONS)


def problem_to_dict(problem) -> dict:
    from .fractions import FractionProblem
    from .mc import MCProblem

    if isinstance(problem, MCProblem):
        return {"domain": MC_ADDITION, "a": list(problem.a_digits), "b": list(problem.b_digits)}
    if isinstance(problem, FractionProblem):
        return {
            "domain": FRACTIONS,
            "num_a": problem.num_a,
            "den_a": problem.den_a,
            "num_b": problem.num_b,
            "den_b": problem.den_b,
            "op": problem.op,
        }
    raise TypeError(f"unknown problem type: {type(problem)!r}")


def problem_from_dict(payload: dict):
    from .fractions import FractionProblem
    from .mc import MCProblem

    if payload["domain"] == MC_ADDITION:
        return MCProblem(tuple(payload["a"]), tuple(payload["b"]))
    if payload["domain"] == FRACTIONS:
        return FractionProblem(
            payload["num_a"], payload["den_a"], payload["num_b"], payload["den_b"], payload["op"]
        )
    raise ValueError(f"unknown domain: {payload['domain']!r}")


def load_problems(path: Union[str, Path]) -> list:
    """Read a JSONL problem-set file; one problem spec per line."""
    problems = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            problems.append(problem_from_dict(json.loads(line)))
    return problems
