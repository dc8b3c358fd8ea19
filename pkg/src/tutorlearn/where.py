"""Where-learning: binding generators induced by least general generalization.

The AntiUnify variant keeps conjunctive literals per binding slot (features,
single-hop neighbor anchors, inter-slot spatial/adjacency relations) and
generalizes strictly by dropping literals a new example does not satisfy.  A
neighbor anchor survives generalization only while it can be mapped across
examples -- by element identity or by a retained structural atom tying it to
another slot; feature-only anchors with differing ids drop as a group.

MostSpecific never generalizes: it replays exactly the bindings it was shown.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .model import Binding, ElementState, InterfaceState, POINTER_FIELDS

_OPPOSITE = {"above": "below", "below": "above", "to_left": "to_right", "to_right": "to_left"}

MISSING = "missing"
PRESENT = "present"
DROPPED = "dropped"


def _element_feats(el: ElementState) -> dict:
    return {
        "id": el.id,
        "widget_type": el.widget_type.value,
        "locked": el.locked,
        "empty": el.value == "",
    }


def _anchor_atoms(anchor: ElementState, slot: int, direction: str, slot_ids: tuple[str, ...]) -> frozenset:
    """Structural atoms tying a neighbor anchor to the binding's slots.

    The trivial back-pointer (the anchor is, by construction, adjacent to its
    own slot) is excluded; it would hold for every anchor.
    """
    atoms = set()
    for j, sid in enumerate(slot_ids):
        if anchor.id == sid:
            atoms.add(("is", j))
        for d2 in POINTER_FIELDS:
            if anchor.pointer(d2) == sid:
                if j == slot and d2 == _OPPOSITE[direction]:
                    continue
                atoms.add(("adj", d2, j))
    return frozenset(atoms)


def _pair_atoms(a: ElementState, b: ElementState) -> frozenset:
    atoms = set()
    if a.x == b.x:
        atoms.add("x_eq")
    elif a.x < b.x:
        atoms.add("x_lt")
    else:
        atoms.add("x_gt")
    if a.y == b.y:
        atoms.add("y_eq")
    elif a.y < b.y:
        atoms.add("y_lt")
    else:
        atoms.add("y_gt")
    for d in POINTER_FIELDS:
        if a.pointer(d) == b.id:
            atoms.add(("ptr_ij", d))
        if b.pointer(d) == a.id:
            atoms.add(("ptr_ji", d))
    return frozenset(atoms)


@dataclass(frozen=True)
class AnchorGroup:
    status: str
    feats: tuple = ()
    atoms: frozenset = frozenset()

    @classmethod
    def from_state(
        cls, el: ElementState, slot: int, direction: str, slot_ids: tuple[str, ...], state: InterfaceState
    ) -> "AnchorGroup":
        target = el.pointer(direction)
        if not target or target not in state:
            return cls(MISSING)
        anchor = state[target]
        return cls(
            PRESENT,
            feats=tuple(sorted(_element_feats(anchor).items())),
            atoms=_anchor_atoms(anchor, slot, direction, slot_ids),
        )

    def generalize(self, new: "AnchorGroup") -> "AnchorGroup":
        if self.status == DROPPED or self.status != new.status:
            return AnchorGroup(DROPPED)
        if self.status == MISSING:
            return self
        feats = tuple(sorted(set(self.feats) & set(new.feats)))
        atoms = self.atoms & new.atoms
        identity = any(k == "id" for k, _ in feats)
        if not identity and not atoms:
            return AnchorGroup(DROPPED)
        return AnchorGroup(PRESENT, feats, atoms)

    def matches(self, el: ElementState, slot: int, direction: str, slot_ids: tuple[str, ...], state: InterfaceState) -> bool:
        target = el.pointer(direction)
        if self.status == DROPPED:
            return True
        if self.status == MISSING:
            return not target
        if not target or target not in state:
            return False
        anchor = state[target]
        feats = _element_feats(anchor)
        if any(feats.get(k) != v for k, v in self.feats):
            return False
        return self.atoms <= _anchor_atoms(anchor, slot, direction, slot_ids)


@dataclass(frozen=True)
class AntiUnifyWhere:
    """LGG-generalized conjunctive conditions over (selection, args) slots."""

    arity: int
    slot_literals: tuple  # per slot: tuple of (feature, value) pairs
    anchors: tuple  # per slot: tuple of (direction, AnchorGroup)
    pair_atoms: tuple  # tuple of ((i, j), frozenset) for i < j
    examples: int = 1  # bindings absorbed so far (evidence count)

    variant = "AntiUnify"

    @classmethod
    def from_example(cls, state: InterfaceState, binding: Binding) -> "AntiUnifyWhere":
        slot_ids = binding.all_ids()
        elements = [state[i] for i in slot_ids]
        slot_literals = tuple(tuple(sorted(_element_feats(el).items())) for el in elements)
        anchors = tuple(
            tuple(
                (d, AnchorGroup.from_state(el, s, d, slot_ids, state))
                for d in POINTER_FIELDS
            )
            for s, el in enumerate(elements)
        )
        pairs = []
        for i in range(len(elements)):
            for j in range(i + 1, len(elements)):
                pairs.append(((i, j), _pair_atoms(elements[i], elements[j])))
        return cls(len(binding.args), slot_literals, anchors, tuple(pairs))

    def absorb(self, state: InterfaceState, binding: Binding) -> "AntiUnifyWhere":
        new = AntiUnifyWhere.from_example(state, binding)
        if new.arity != self.arity:
            raise ValueError("cannot generalize across different arities")
        slot_literals = tuple(
            tuple(sorted(set(old) & set(cur)))
            for old, cur in zip(self.slot_literals, new.slot_literals)
        )
        anchors = tuple(
            tuple((d, og.generalize(ng)) for (d, og), (_, ng) in zip(old_row, new_row))
            for old_row, new_row in zip(self.anchors, new.anchors)
        )
        pair_atoms = tuple(
            (ij, old & cur) for (ij, old), (_, cur) in zip(self.pair_atoms, new.pair_atoms)
        )
        return AntiUnifyWhere(
            self.arity, slot_literals, anchors, pair_atoms, self.examples + 1
        )

    def relational_count(self) -> int:
        """Load-bearing structure: inter-slot atoms plus atom-bearing anchors."""
        count = sum(len(atoms) for _, atoms in self.pair_atoms)
        for row in self.anchors:
            for _, group in row:
                if group.status == PRESENT:
                    count += len(group.atoms)
        return count

    def _slot_ok(self, slot: int, el: ElementState) -> bool:
        feats = _element_feats(el)
        return all(feats.get(k) == v for k, v in self.slot_literals[slot])

    def match(self, state: InterfaceState) -> list[Binding]:
        n_slots = self.arity + 1
        candidates: list[list[ElementState]] = []
        for slot in range(n_slots):
            row = []
            for el in sorted(state, key=lambda e: e.id):
                if slot == 0 and (el.locked or el.value != ""):
                    continue
                if self._slot_ok(slot, el):
                    row.append(el)
            if not row:
                return []
            candidates.append(row)
        pair_map = dict(self.pair_atoms)
        results: list[Binding] = []

        def extend(assigned: list[ElementState]) -> None:
            slot = len(assigned)
            if slot == n_slots:
                slot_ids = tuple(el.id for el in assigned)
                for s, el in enumerate(assigned):
                    for d, group in self.anchors[s]:
                        if not group.matches(el, s, d, slot_ids, state):
                            return
                results.append(Binding(slot_ids[0], slot_ids[1:]))
                return
            for el in candidates[slot]:
                if any(el.id == prev.id for prev in assigned):
                    continue
                ok = True
                for i, prev in enumerate(assigned):
                    atoms = pair_map.get((i, slot), frozenset())
                    if not atoms <= _pair_atoms(prev, el):
                        ok = False
                        break
                if ok:
                    extend(assigned + [el])

        extend([])
        results.sort(key=lambda b: (b.selection,) + b.args)
        return results

    def to_wire(self) -> dict:
        return {
            "variant": self.variant,
            "arity": self.arity,
            "slots": [
                {
                    "literals": {k: v for k, v in lits},
                    "neighbors": {
                        d: (
                            {"status": g.status}
                            if g.status != PRESENT
                            else {
                                "status": g.status,
                                "literals": {k: v for k, v in g.feats},
                                "atoms": sorted(map(str, g.atoms)),
                            }
                        )
                        for d, g in anchor_row
                    },
                }
                for lits, anchor_row in zip(self.slot_literals, self.anchors)
            ],
            "relations": {
                f"{i},{j}": sorted(map(str, atoms)) for (i, j), atoms in self.pair_atoms
            },
        }


@dataclass(frozen=True)
class MostSpecificWhere:
    """Non-generalizing variant: replays exactly the demonstrated bindings."""

    arity: int
    bindings: tuple[Binding, ...] = ()

    variant = "MostSpecific"

    @classmethod
    def from_example(cls, state: InterfaceState, binding: Binding) -> "MostSpecificWhere":
        return cls(len(binding.args), (binding,))

    def absorb(self, state: InterfaceState, binding: Binding) -> "MostSpecificWhere":
        if binding in self.bindings:
            return self
        return MostSpecificWhere(self.arity, self.bindings + (binding,))

    def match(self, state: InterfaceState) -> list[Binding]:
        results = []
        for b in self.bindings:
            if any(i not in state for i in b.all_ids()):
                continue
            sel = state[b.selection]
            if sel.locked or sel.value != "":
                continue
            results.append(b)
        results.sort(key=lambda b: (b.selection,) + b.args)
        return results

    def to_wire(self) -> dict:
        return {
            "variant": self.variant,
            "arity": self.arity,
            "bindings": [[b.selection, *b.args] for b in self.bindings],
        }


def literal_count(wp: "AntiUnifyWhere") -> int:
    """Total retained literal units (for measuring generalization steps)."""
    count = sum(len(lits) for lits in wp.slot_literals)
    for row in wp.anchors:
        for _, group in row:
            if group.status == MISSING:
                count += 1
            elif group.status == PRESENT:
                count += 1 + len(group.feats) + len(group.atoms)
    count += sum(len(atoms) for _, atoms in wp.pair_atoms)
    return count


def generalization_cost(wp, state: InterfaceState, binding: Binding) -> float:
    """Fraction of retained literals that absorbing the example would drop.

    0 when the example is already admitted; the conservative (least-general)
    explanation of a demonstration is the one with the smallest cost.
    MostSpecific parts never drop anything.
    """
    if wp.variant != "AntiUnify":
        return 0.0
    if len(binding.args) != wp.arity:
        raise ValueError("binding arity does not match where-part arity")
    before = literal_count(wp)
    if before == 0:
        return 0.0
    return (before - literal_count(wp.absorb(state, binding))) / before


WherePart = Union[AntiUnifyWhere, MostSpecificWhere]

_VARIANTS = {"AntiUnify": AntiUnifyWhere, "MostSpecific": MostSpecificWhere}


def init_where(state: InterfaceState, binding: Binding, variant: str = "AntiUnify") -> WherePart:
    """Most-specific where-part matching exactly this binding in this state."""
    for el_id in binding.all_ids():
        if el_id not in state:
            raise KeyError(f"binding element {el_id!r} not present in state")
    try:
        cls = _VARIANTS[variant]
    except KeyError:
        raise ValueError(f"unknown where variant: {variant!r}") from None
    return cls.from_example(state, binding)


def generalize_where(wp: WherePart, state: InterfaceState, binding: Binding) -> WherePart:
    """Least general generalization admitting the new (state, binding) example."""
    if wp.variant != "AntiUnify":
        raise ValueError("generalize_where applies to the AntiUnify variant")
    return wp.absorb(state, binding)


def match_where(wp: WherePart, state: InterfaceState) -> list[Binding]:
    """All bindings the where-part proposes, lexicographically ordered."""
    return wp.match(state)
