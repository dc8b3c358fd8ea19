"""Shared data model: interface states, actions, skills, and the JSON wire format.

Everything in this module is an immutable value object, safe to share across
threads and to use as dict keys where hashable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence, Union


class MalformedState(ValueError):
    """Raised when a wire-format state is structurally invalid."""


class WidgetType(str, Enum):
    TEXT_FIELD = "TextField"
    BUTTON = "Button"


class ActionType(str, Enum):
    UPDATE_TEXT_FIELD = "UpdateTextField"
    PRESS_BUTTON = "PressButton"


class SignalSource(str, Enum):
    DEMONSTRATION = "Demonstration"
    FEEDBACK = "FeedbackOnOwnAction"


POINTER_FIELDS = ("above", "below", "to_left", "to_right")


@dataclass(frozen=True)
class ElementState:
    """One interface widget: value, lock flag, and spatial pointers."""

    id: str
    widget_type: WidgetType = WidgetType.TEXT_FIELD
    value: str = ""
    locked: bool = False
    above: str = ""
    below: str = ""
    to_left: str = ""
    to_right: str = ""
    x: float = 0.0
    y: float = 0.0
    width: float = 40.0
    height: float = 40.0
    offset_parent: str = "background-initial"

    def pointer(self, direction: str) -> str:
        return getattr(self, direction)


class InterfaceState:
    """Ordered map of element id -> ElementState; the sole agent observation."""

    __slots__ = ("elements", "_fingerprint")

    def __init__(self, elements: Union[Mapping[str, ElementState], Iterable[ElementState]]):
        if isinstance(elements, Mapping):
            items = list(elements.values())
        else:
            items = list(elements)
        self.elements: dict[str, ElementState] = {}
        for el in items:
            if el.id in self.elements:
                raise MalformedState(f"duplicate element id: {el.id}")
            self.elements[el.id] = el
        self._fingerprint: Optional[str] = None

    def __contains__(self, element_id: str) -> bool:
        return element_id in self.elements

    def __getitem__(self, element_id: str) -> ElementState:
        return self.elements[element_id]

    def get(self, element_id: str) -> Optional[ElementState]:
        return self.elements.get(element_id)

    def ids(self) -> list[str]:
        return list(self.elements)

    def __iter__(self):
        return iter(self.elements.values())

    def __len__(self) -> int:
        return len(self.elements)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, InterfaceState) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.fingerprint())

    def __repr__(self) -> str:
        return f"InterfaceState({sorted(self.elements)})"

    def fingerprint(self) -> str:
        if self._fingerprint is None:
            self._fingerprint = encode_state(self, validate=False)
        return self._fingerprint

    def with_applied(self, element_id: str, value: str, locked: bool = True) -> "InterfaceState":
        """Return a copy with one element's value written (and locked by default)."""
        el = self.elements[element_id]
        new = dict(self.elements)
        new[element_id] = ElementState(
            id=el.id,
            widget_type=el.widget_type,
            value=value,
            locked=locked,
            above=el.above,
            below=el.below,
            to_left=el.to_left,
            to_right=el.to_right,
            x=el.x,
            y=el.y,
            width=el.width,
            height=el.height,
            offset_parent=el.offset_parent,
        )
        return InterfaceState(new)

    def validate(self) -> None:
        for el in self:
            for direction in POINTER_FIELDS:
                target = el.pointer(direction)
                if target and target not in self.elements:
                    raise MalformedState(
                        f"element {el.id!r} has dangling pointer {direction}={target!r}"
                    )


@dataclass(frozen=True)
class SAI:
    """Selection-ActionType-Input action triple."""

    selection: str
    action_type: ActionType
    input: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        inp = dict(self.input)
        object.__setattr__(self, "input", inp)
        if self.action_type is ActionType.UPDATE_TEXT_FIELD and "value" not in inp:
            raise ValueError("UpdateTextField SAIs must carry a 'value' input")
        if self.action_type is ActionType.PRESS_BUTTON and inp:
            raise ValueError("PressButton SAIs carry an empty input map")

    @property
    def value(self) -> str:
        return self.input.get("value", "")

    def __hash__(self) -> int:
        return hash((self.selection, self.action_type, tuple(sorted(self.input.items()))))

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, SAI)
            and self.selection == other.selection
            and self.action_type == other.action_type
            and dict(self.input) == dict(other.input)
        )

    def to_wire(self) -> dict:
        return {
            "selection": self.selection,
            "action_type": self.action_type.value,
            "input": dict(self.input),
        }

    @classmethod
    def from_wire(cls, payload: Mapping) -> "SAI":
        return cls(
            selection=payload["selection"],
            action_type=ActionType(payload["action_type"]),
            input=dict(payload.get("input", {})),
        )


def update_field(selection: str, value: str) -> SAI:
    return SAI(selection, ActionType.UPDATE_TEXT_FIELD, {"value": value})


def press_button(selection: str) -> SAI:
    return SAI(selection, ActionType.PRESS_BUTTON, {})


@dataclass(frozen=True)
class Binding:
    """Concrete (selection, argument elements) tuple grounding a skill in a state."""

    selection: str
    args: tuple[str, ...] = ()

    def all_ids(self) -> tuple[str, ...]:
        return (self.selection,) + self.args


# --- How-part term AST -------------------------------------------------------


@dataclass(frozen=True)
class Apply:
    fn: str
    children: tuple["FunctionTerm", ...]

    def __repr__(self) -> str:
        return f"{self.fn}({', '.join(map(repr, self.children))})"


@dataclass(frozen=True)
class Var:
    index: int

    def __repr__(self) -> str:
        return f"Var{self.index}"


@dataclass(frozen=True)
class Const:
    value: str

    def __repr__(self) -> str:
        return f"Const({self.value!r})"


FunctionTerm = Union[Apply, Var, Const]


def term_arity(term: FunctionTerm) -> int:
    """Number of binding arguments the term consumes (max Var index + 1)."""
    if isinstance(term, Var):
        return term.index + 1
    if isinstance(term, Apply):
        return max((term_arity(c) for c in term.children), default=0)
    return 0


def term_size(term: FunctionTerm) -> int:
    """Number of function applications in the term."""
    if isinstance(term, Apply):
        return 1 + sum(term_size(c) for c in term.children)
    return 0


def term_key(term: FunctionTerm) -> str:
    """Canonical structural key; equal keys iff structurally equal terms."""
    if isinstance(term, Var):
        return f"v{term.index}"
    if isinstance(term, Const):
        return f"c:{term.value}"
    return f"{term.fn}({','.join(term_key(c) for c in term.children)})"


def term_to_wire(term: FunctionTerm):
    if isinstance(term, Var):
        return {"var": term.index}
    if isinstance(term, Const):
        return {"const": term.value}
    return {"apply": term.fn, "children": [term_to_wire(c) for c in term.children]}


def term_from_wire(payload) -> FunctionTerm:
    if "var" in payload:
        return Var(payload["var"])
    if "const" in payload:
        return Const(payload["const"])
    return Apply(payload["apply"], tuple(term_from_wire(c) for c in payload["children"]))


@dataclass(frozen=True)
class Explanation:
    """How a demonstrated action is accounted for: an existing skill or a new term."""

    binding: Binding
    skill_id: Optional[str] = None
    term: Optional[FunctionTerm] = None


@dataclass(frozen=True)
class TrainingSignal:
    """One unit of instruction: a state, an action, and signed reward."""

    state: InterfaceState
    sai: SAI
    reward: float
    foci: Optional[tuple[str, ...]] = None
    skill_label: Optional[str] = None
    source: SignalSource = SignalSource.DEMONSTRATION

    def __post_init__(self):
        if self.foci is not None:
            object.__setattr__(self, "foci", tuple(self.foci))
        if self.source is SignalSource.DEMONSTRATION and not self.reward > 0:
            raise ValueError("demonstrations must carry positive reward")


# --- JSON wire format --------------------------------------------------------

_DOM_CLASS = {WidgetType.TEXT_FIELD: "CTATTextInput", WidgetType.BUTTON: "CTATButton"}
_REQUIRED_WIRE_FIELDS = (
    "above",
    "below",
    "contentEditable",
    "height",
    "id",
    "offsetParent",
    "to_left",
    "to_right",
    "type",
    "value",
    "width",
    "x",
    "y",
)


def _element_to_wire(el: ElementState) -> dict:
    return {
        "above": el.above,
        "below": el.below,
        "contentEditable": not el.locked,
        "dom_class": _DOM_CLASS[el.widget_type],
        "height": el.height,
        "id": el.id,
        "offsetParent": el.offset_parent,
        "to_left": el.to_left,
        "to_right": el.to_right,
        "type": el.widget_type.value,
        "value": el.value,
        "width": el.width,
        "x": el.x,
        "y": el.y,
    }


def encode_state(state: InterfaceState, validate: bool = True) -> str:
    """Serialize a state to deterministic, key-sorted JSON.

    The wire format mirrors the tutor log convention: the internal ``locked``
    flag is emitted as its negation ``contentEditable``.
    """
    if validate:
        state.validate()
    payload = {el.id: _element_to_wire(el) for el in state}
    return json.dumps(payload, sort_keys=True)


def decode_state(text: str) -> InterfaceState:
    """Parse wire-format JSON into a validated InterfaceState."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedState(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedState("state payload must be a JSON object")
    elements = []
    for key, raw in payload.items():
        if not isinstance(raw, dict):
            raise MalformedState(f"element {key!r} must be an object")
        missing = [f for f in _REQUIRED_WIRE_FIELDS if f not in raw]
        if missing:
            raise MalformedState(f"element {key!r} missing fields: {missing}")
        if raw["id"] != key:
            raise MalformedState(f"element key {key!r} does not match id {raw['id']!r}")
        try:
            widget = WidgetType(raw["type"])
        except ValueError as exc:
            raise MalformedState(f"element {key!r} has unknown type {raw['type']!r}") from exc
        elements.append(
            ElementState(
                id=raw["id"],
                widget_type=widget,
                value=str(raw["value"]),
                locked=not raw["contentEditable"],
                above=raw["above"],
                below=raw["below"],
                to_left=raw["to_left"],
                to_right=raw["to_right"],
                x=raw["x"],
                y=raw["y"],
                width=raw["width"],
                height=raw["height"],
                offset_parent=raw["offsetParent"],
            )
        )
    state = InterfaceState(elements)
    state.validate()
    return state


def state_from_elements(*elements: ElementState) -> InterfaceState:
    return InterfaceState(elements)
