"""Fraction arithmetic tutor: three procedures behind one interface.

Layout (x left to right; numerator row above denominator row):

    numA  check  numB   conv_numA  conv_numB  ans_num  done
    denA   op    denB   conv_denA  conv_denB  ans_den

The first step of every problem is the check_convert box above the operator:
"x" when unlike denominators must be converted (addition with denA != denB),
"no" otherwise.  Conversion uses the product of the denominators as the
common denominator.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..model import (
    ElementState,
    InterfaceState,
    WidgetType,
    press_button,
    update_field,
)
from .base import FRACTIONS, Step, TutorSession

CELL = 60.0
_NUM_ROW = ("numA", "check_convert", "numB", "conv_numA", "conv_numB", "ans_num", "done")
_DEN_ROW = ("denA", "op", "denB", "conv_denA", "conv_denB", "ans_den", "")
_COL_X = (0.0, CELL, 2 * CELL, 4 * CELL, 5 * CELL, 6 * CELL, 7 * CELL)


@dataclass(frozen=True)
class FractionProblem:
    num_a: int
    den_a: int
    num_b: int
    den_b: int
    op: str  # "+" or "*"

    def __post_init__(self):
        values = (self.num_a, self.den_a, self.num_b, self.den_b)
        if any(not 1 <= v <= 15 for v in values):
            raise ValueError("fraction fields must be in 1..15")
        if self.op not in ("+", "*"):
            raise ValueError("op must be '+' or '*'")

    @property
    def procedure(self) -> str:
        """AD: add unlike denominators; AS: add like; M: multiply."""
        if self.op == "*":
            return "M"
        return "AS" if self.den_a == self.den_b else "AD"


class FractionSession(TutorSession):
    domain = FRACTIONS

    def _initial_state(self) -> InterfaceState:
        p = self.problem
        given = {
            "numA": str(p.num_a),
            "denA": str(p.den_a),
            "numB": str(p.num_b),
            "denB": str(p.den_b),
            "op": p.op,
        }

        def neighbor(row: tuple, col: int, step: int) -> str:
            j = col + step
            while 0 <= j < len(row):
                if row[j]:
                    return row[j]
                j += step
            return ""

        elements = []
        for col in range(len(_NUM_ROW)):
            for row, other, y in ((_NUM_ROW, _DEN_ROW, CELL), (_DEN_ROW, _NUM_ROW, 2 * CELL)):
                el_id = row[col]
                if not el_id:
                    continue
                elements.append(
                    ElementState(
                        id=el_id,
                        widget_type=WidgetType.BUTTON if el_id == "done" else WidgetType.TEXT_FIELD,
                        value=given.get(el_id, ""),
                        locked=el_id in given,
                        above=other[col] if y == 2 * CELL else "",
                        below=other[col] if y == CELL else "",
                        to_left=neighbor(row, col, -1),
                        to_right=neighbor(row, col, +1),
                        x=_COL_X[col],
                        y=y,
                        width=80.0 if el_id == "done" else 40.0,
                    )
                )
        return InterfaceState(elements)

    def _required_steps(self) -> list[Step]:
        p = self.problem
        steps: list[Step] = []
        if p.procedure == "AD":
            common = p.den_a * p.den_b
            steps.append(Step(update_field("check_convert", "x"), "check_convert", ()))
            steps.append(
                Step(update_field("conv_numA", str(p.num_a * p.den_b)), "conv_num", ("numA", "denB"))
            )
            steps.append(
                Step(update_field("conv_denA", str(common)), "conv_den", ("denA", "denB"))
            )
            steps.append(
                Step(update_field("conv_numB", str(p.num_b * p.den_a)), "conv_num", ("numB", "denA"))
            )
            steps.append(
                Step(update_field("conv_denB", str(common)), "conv_den", ("denA", "denB"))
            )
            steps.append(
                Step(
                    update_field("ans_num", str(p.num_a * p.den_b + p.num_b * p.den_a)),
                    "add_num",
                    ("conv_numA", "conv_numB"),
                )
            )
            steps.append(Step(update_field("ans_den", str(common)), "copy_den", ("conv_denA",)))
        elif p.procedure == "AS":
            steps.append(Step(update_field("check_convert", "no"), "check_convert", ()))
            steps.append(
                Step(update_field("ans_num", str(p.num_a + p.num_b)), "add_same_num", ("numA", "numB"))
            )
            steps.append(Step(update_field("ans_den", str(p.den_a)), "copy_den", ("denA",)))
        else:  # M
            steps.append(Step(update_field("check_convert", "no"), "check_convert", ()))
            steps.append(
                Step(update_field("ans_num", str(p.num_a * p.num_b)), "mul_num", ("numA", "numB"))
            )
            steps.append(
                Step(update_field("ans_den", str(p.den_a * p.den_b)), "mul_den", ("denA", "denB"))
            )
        steps.append(Step(press_button("done"), "done", ()))
        return steps

    def _available(self) -> list[str]:
        if not self._filled("check_convert"):
            return ["check_convert"]
        conv_cells = [s for s in self._steps if s.startswith("conv_")]
        pending_conv = [s for s in conv_cells if not self._filled(s)]
        if pending_conv:
            return pending_conv
        answers = [s for s in ("ans_num", "ans_den") if s in self._steps and not self._filled(s)]
        if answers:
            return answers
        if self._all_cells_filled():
            return ["done"]
        return []
