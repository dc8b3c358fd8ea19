"""Multi-column addition tutor: right-to-left column sums with explicit carries.

Board layout for n addend columns (default 3), columns counted right to left:

    carry_{n+1} ... carry_2           (top row, editable)
                A_n ... A_1           (locked givens)
                B_n ... B_1           (locked givens)
    out_{n+1}   out_n ... out_1       (answer row, editable)
                   done               (button, below the answer row)

The leftmost column holds only the final-carry cell and the extra answer cell:
a final carry is first written to carry_{n+1} and then copied down to
out_{n+1}.
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
from .base import MC_ADDITION, Step, TutorSession

CELL = 60.0
_ROW_ORDER = ("carry", "A", "B", "out")
_ROW_Y = {"carry": CELL, "A": 2 * CELL, "B": 3 * CELL, "out": 4 * CELL}


@dataclass(frozen=True)
class MCProblem:
    """Addend digits, index 0 = ones column."""

    a_digits: tuple[int, ...]
    b_digits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a_digits", tuple(self.a_digits))
        object.__setattr__(self, "b_digits", tuple(self.b_digits))
        if len(self.a_digits) != len(self.b_digits) or not self.a_digits:
            raise ValueError("addends must have the same, nonzero number of digits")
        if any(not 0 <= d <= 9 for d in self.a_digits + self.b_digits):
            raise ValueError("digits must be in 0..9")

    @property
    def n(self) -> int:
        return len(self.a_digits)


class MCSession(TutorSession):
    domain = MC_ADDITION

    def _col_x(self, i: int) -> float:
        # column 1 (ones) is rightmost; column n+1 leftmost
        return CELL * (self.problem.n + 2 - i)

    def _initial_state(self) -> InterfaceState:
        n = self.problem.n
        grid: dict[tuple[str, int], str] = {}
        for i in range(2, n + 2):
            grid[("carry", i)] = f"carry_{i}"
        for i in range(1, n + 1):
            grid[("A", i)] = f"A_{i}"
            grid[("B", i)] = f"B_{i}"
        for i in range(1, n + 2):
            grid[("out", i)] = f"out_{i}"

        def row_neighbor(row: str, i: int, step: int) -> str:
            # spatial left = larger column index (columns count right to left)
            j = i + step
            while 1 <= j <= n + 1:
                if (row, j) in grid:
                    return grid[(row, j)]
                j += step
            return ""

        def col_neighbor(row: str, i: int, step: int) -> str:
            idx = _ROW_ORDER.index(row) + step
            while 0 <= idx < len(_ROW_ORDER):
                if (_ROW_ORDER[idx], i) in grid:
                    return grid[(_ROW_ORDER[idx], i)]
                idx += step
            if row == "out" and step == 1 and i == 2:
                return "done"
            return ""

        elements = []
        for (row, i), el_id in sorted(grid.items(), key=lambda kv: kv[1]):
            if row == "A":
                value, locked = str(self.problem.a_digits[i - 1]), True
            elif row == "B":
                value, locked = str(self.problem.b_digits[i - 1]), True
            else:
                value, locked = "", False
            elements.append(
                ElementState(
                    id=el_id,
                    widget_type=WidgetType.TEXT_FIELD,
                    value=value,
                    locked=locked,
                    above=col_neighbor(row, i, -1),
                    below=col_neighbor(row, i, +1),
                    to_left=row_neighbor(row, i, +1),
                    to_right=row_neighbor(row, i, -1),
                    x=self._col_x(i),
                    y=_ROW_Y[row],
                )
            )
        elements.append(
            ElementState(
                id="done",
                widget_type=WidgetType.BUTTON,
                above="out_2",
                x=self._col_x(2),
                y=5 * CELL,
                width=80.0,
            )
        )
        return InterfaceState(elements)

    def _column_sums(self) -> tuple[list[int], list[int]]:
        """Per-column sums (including incoming carry) and incoming carries."""
        sums, carry_in = [], [0]
        carry = 0
        for a, b in zip(self.problem.a_digits, self.problem.b_digits):
            total = a + b + carry
            sums.append(total)
            carry = total // 10
            carry_in.append(carry)
        return sums, carry_in

    def _required_steps(self) -> list[Step]:
        n = self.problem.n
        sums, carry_in = self._column_sums()
        steps: list[Step] = []
        for i in range(1, n + 1):
            total = sums[i - 1]
            incoming = carry_in[i - 1]
            foci = [f"A_{i}", f"B_{i}"] + ([f"carry_{i}"] if incoming else [])
            kc_out = "add3" if incoming else "add2"
            steps.append(Step(update_field(f"out_{i}", str(total % 10)), kc_out, tuple(foci)))
            if total >= 10:
                kc_carry = "carry3" if incoming else "carry2"
                steps.append(Step(update_field(f"carry_{i + 1}", "1"), kc_carry, tuple(foci)))
        if carry_in[n]:
            steps.append(
                Step(update_field(f"out_{n + 1}", "1"), "final-carry", (f"carry_{n + 1}",))
            )
        steps.append(Step(press_button("done"), "done", ()))
        return steps

    def _resolved(self, i: int) -> bool:
        """Column i is resolved: its answer digit and outgoing carry are in."""
        if not self._filled(f"out_{i}"):
            return False
        carry_cell = f"carry_{i + 1}"
        if carry_cell in self._steps and not self._filled(carry_cell):
            return False
        return True

    def _available(self) -> list[str]:
        n = self.problem.n
        out = []
        for i in range(1, n + 1):
            if i > 1 and not self._resolved(i - 1):
                continue
            if f"out_{i}" in self._steps:
                out.append(f"out_{i}")
            if f"carry_{i + 1}" in self._steps:
                out.append(f"carry_{i + 1}")
        final = f"out_{n + 1}"
        if final in self._steps and self._resolved(n):
            out.append(final)
        if self._all_cells_filled():
            out.append("done")
        return out
