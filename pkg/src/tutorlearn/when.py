"""When-learning: legality classifiers over preprocessed state features.

Two preprocessors turn a (state, binding) pair into a flat categorical
FeatureMap: 'Relative' renames elements by their pointer path from the
binding's selection (so conditions generalize across board positions), while
'AppendBinding' keeps absolute element ids and simply appends the binding.
Classification is a from-scratch decision tree; a skill with no fitted
when-part accepts everything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

from .model import InterfaceState
from .tree import CategoricalDecisionTree, example_sort_key

FeatureMap = dict[str, str]

RELATIVE = "Relative"
APPEND_BINDING = "AppendBinding"

EXPLICIT = "Explicit"
IMPLICIT_NEGATIVE = "ImplicitNegative"

_SHORT_DIR = (("above", "a"), ("below", "b"), ("to_left", "l"), ("to_right", "r"))


@dataclass(frozen=True)
class AugmentedState:
    """A state plus derived general-feature relations (value equality pairs)."""

    state: InterfaceState
    equals: Mapping[tuple[str, str], bool] = field(default_factory=dict)


def equality_relations(state: InterfaceState) -> dict[tuple[str, str], bool]:
    """Equals(x, y) over all pairs of non-empty-valued elements."""
    filled = sorted((el for el in state if el.value != ""), key=lambda e: e.id)
    relations: dict[tuple[str, str], bool] = {}
    for i, a in enumerate(filled):
        for b in filled[i + 1 :]:
            relations[(a.id, b.id)] = a.value == b.value
    return relations


def _unwrap(state: Union[InterfaceState, AugmentedState]):
    if isinstance(state, AugmentedState):
        return state.state, state.equals
    return state, None


def _bool(v: bool) -> str:
    return "T" if v else "F"


def _element_features(out: FeatureMap, prefix: str, el) -> None:
    out[f"{prefix}.value"] = el.value
    out[f"{prefix}.locked"] = _bool(el.locked)
    out[f"{prefix}.empty"] = _bool(el.value == "")


def _arg_blocks(out: FeatureMap, state: InterfaceState, binding, include_ids: bool) -> None:
    for i, arg_id in enumerate(binding.args):
        prefix = f"arg{i}"
        if include_ids:
            out[f"{prefix}.id"] = arg_id
        el = state.get(arg_id)
        if el is not None:
            # digit values stay out (same memorization-bait argument as for
            # positional values; the evaluated how-values carry the arithmetic)
            if el.value and not el.value.isdigit():
                out[f"{prefix}.value"] = el.value
            out[f"{prefix}.locked"] = _bool(el.locked)
            out[f"{prefix}.empty"] = _bool(el.value == "")


def _equality_features(
    out: FeatureMap, equals: Mapping, names_by_id: Mapping[str, str]
) -> None:
    for (id_a, id_b), same in equals.items():
        na, nb = names_by_id.get(id_a), names_by_id.get(id_b)
        if na is None or nb is None:
            continue
        if nb < na:
            na, nb = nb, na
        out[f"eq({na},{nb})"] = _bool(same)


def preprocess_relative(
    state: Union[InterfaceState, AugmentedState], binding, radius: int = 2
) -> FeatureMap:
    """Relabel the neighborhood of the binding's selection by pointer paths.

    Breadth-first walk from the selection (expansion order: above, below,
    left, right) out to ``radius`` hops; the first (shortest) path to an
    element names it.  Emits value/locked/empty plus a role marker per
    position, and arg blocks for the binding's arguments.
    """
    raw, equals = _unwrap(state)
    roles = {arg_id: "arg" for arg_id in binding.args}
    roles[binding.selection] = "sel"

    names, dists = relative_names(raw, binding.selection, radius)

    out: FeatureMap = {}
    for el_id, name in names.items():
        el = raw[el_id]
        # Positional digit values are memorization bait: the arithmetic role
        # of a number enters through the binding's arg blocks and the
        # candidate's evaluated how-values.  Symbols (operators, flags) are
        # genuine categories and stay, within two hops.
        if dists[el_id] <= 2 and el.value and not el.value.isdigit():
            out[f"{name}.value"] = el.value
        out[f"{name}.locked"] = _bool(el.locked)
        out[f"{name}.empty"] = _bool(el.value == "")
        out[f"{name}.role"] = roles.get(el_id, "none")
    _arg_blocks(out, raw, binding, include_ids=False)
    if equals is not None:
        # Equality pairs are emitted for the near neighborhood only (two hops);
        # farther coincidences add noise without adding legality signal.
        near = {el_id: name for el_id, name in names.items() if dists[el_id] <= 2}
        _equality_features(out, equals, near)
    return out


def relative_names(
    raw: InterfaceState, selection: str, radius: int
) -> tuple[dict[str, str], dict[str, int]]:
    """BFS pointer-path names from the selection; first (shortest) path wins."""
    names: dict[str, str] = {selection: "sel"}
    dists: dict[str, int] = {selection: 0}
    queue: list[tuple[str, str, int]] = [(selection, "sel", 0)]
    while queue:
        el_id, name, dist = queue.pop(0)
        if dist >= radius:
            continue
        el = raw.get(el_id)
        if el is None:
            continue
        for direction, short in _SHORT_DIR:
            target = el.pointer(direction)
            if target and target in raw and target not in names:
                names[target] = f"{name}.{short}"
                dists[target] = dist + 1
                queue.append((target, names[target], dist + 1))
    return names, dists


def preprocess_append(
    state: Union[InterfaceState, AugmentedState], binding
) -> FeatureMap:
    """Absolute-id-keyed features for the whole state plus the binding blocks."""
    raw, equals = _unwrap(state)
    out: FeatureMap = {}
    for el in sorted(raw, key=lambda e: e.id):
        _element_features(out, el.id, el)
    out["sel.id"] = binding.selection
    sel = raw.get(binding.selection)
    if sel is not None:
        _element_features(out, "sel", sel)
    _arg_blocks(out, raw, binding, include_ids=True)
    if equals is not None:
        _equality_features(out, equals, {el.id: el.id for el in raw})
    return out


PREPROCESSORS = {RELATIVE: preprocess_relative, APPEND_BINDING: preprocess_append}


@dataclass(frozen=True)
class WhenExample:
    """One labeled (feature map, legality) observation for a skill."""

    features: Mapping[str, str]
    label: bool
    weight: str = EXPLICIT
    sort_key: str = field(init=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sort_key", example_sort_key(self.features, self.label))


def fit_tree(
    examples: Sequence[WhenExample], config: Optional[Mapping] = None
) -> CategoricalDecisionTree:
    """Refit a legality tree from scratch on the full example set."""
    if not examples:
        raise ValueError("fit_tree requires at least one example")
    config = dict(config or {})
    tree = CategoricalDecisionTree(
        criterion=config.get("criterion", "info_gain"),
        min_samples=config.get("min_samples", 2),
        seed=config.get("seed", 0),
    )
    tree.fit(
        [ex.features for ex in examples],
        [ex.label for ex in examples],
        sort_keys=[ex.sort_key for ex in examples],
    )
    return tree


def predict_tree(tree: Optional[CategoricalDecisionTree], features: Mapping[str, str]) -> bool:
    """Route a feature map through the tree; no tree yet means accept."""
    if tree is None:
        return True
    return bool(tree.predict_one(features))


def predict_with_confidence(
    tree: Optional[CategoricalDecisionTree], features: Mapping[str, str]
) -> tuple[bool, float]:
    """Prediction plus the reached leaf's smoothed positive fraction."""
    if tree is None:
        return True, 0.5
    label, counts = tree.decide_one(features)
    total = sum(c for _, c in counts)
    pos = sum(c for l, c in counts if l is True)
    return bool(label), (pos + 1) / (total + 2)


def when_rules(tree: Optional[CategoricalDecisionTree]) -> list[dict]:
    """Export the when-part as a disjunction of positive-path conjunctions."""
    if tree is None:
        return [{}]
    return tree.to_rules(positive_label=True)
