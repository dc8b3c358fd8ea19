"""How-learning: search for function compositions that explain demonstrated actions.

The search enumerates ground terms over source elements bottom-up by size,
where size counts function applications: a ``max_depth`` of 2 allows up to two
chained applications (e.g. GetOnesPlace(Add(x, y))).  Term leaves are distinct
elements, and commutative functions are expanded over canonically ordered
argument tuples only, so the returned explanation set is already structurally
deduplicated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .functions import FunctionSpec, default_registry
from .model import (
    ActionType,
    Apply,
    Binding,
    Const,
    FunctionTerm,
    InterfaceState,
    SAI,
    Var,
    term_arity,
    term_key,
    term_size,
)


class EmptySearch(Exception):
    """No function composition explains the demonstration; caller must bottom out."""


@dataclass(frozen=True)
class HowSearchConfig:
    max_depth: int = 2
    foci: Optional[tuple[str, ...]] = None
    restrict_to_foci: bool = True

    def __post_init__(self):
        if self.foci is not None:
            object.__setattr__(self, "foci", tuple(self.foci))


Explanations = list[tuple[FunctionTerm, Binding]]


@dataclass(frozen=True)
class ConsistentComposition:
    """A term explaining every demo, with the bindings that ground it per demo."""

    term: FunctionTerm
    bindings_per_demo: tuple[tuple[Binding, ...], ...]


@dataclass
class _Entry:
    """A ground term: evaluated value, canonical key, and leaf elements in order."""

    value: str
    key: str
    node: tuple
    leaves: frozenset
    sort_key: tuple = field(init=False)

    def __post_init__(self):
        self.sort_key = (self.value, self.key)


def _source_elements(state: InterfaceState) -> list:
    return sorted((el for el in state if el.value != ""), key=lambda el: el.id)


def _size_vectors(total: int, slots: int) -> list[tuple[int, ...]]:
    if slots == 1:
        return [(total,)]
    vectors = []
    for head in range(total + 1):
        for rest in _size_vectors(total - head, slots - 1):
            vectors.append((head,) + rest)
    return vectors


def _enumerate(
    sources: Sequence,
    max_depth: int,
    registry: dict[str, FunctionSpec],
    goal: Optional[str] = None,
) -> tuple[list[list[_Entry]], int]:
    """Return entry pools per size plus the count of candidate terms visited.

    A term's leaves are distinct elements (a binding is a set of interface
    elements), so child subterms must draw on disjoint leaf sets.  Commutative
    functions expand canonically ordered argument tuples only.
    """
    pools: list[list[_Entry]] = [[] for _ in range(max_depth + 1)]
    for el in sources:
        pools[0].append(_Entry(el.value, f"L:{el.id}", ("leaf", el.id), frozenset((el.id,))))
    visited = len(pools[0])
    seen = {e.key for e in pools[0]}
    specs = sorted(registry.values(), key=lambda s: s.id)
    for size in range(1, max_depth + 1):
        for spec in specs:
            apply = spec.apply
            for vector in _size_vectors(size - 1, spec.arity):
                child_pools = [pools[sz] for sz in vector]
                if any(not p for p in child_pools):
                    continue
                for children in itertools.product(*child_pools):
                    if spec.commutative and any(
                        children[i].sort_key > children[i + 1].sort_key
                        for i in range(len(children) - 1)
                    ):
                        continue
                    leaves = children[0].leaves
                    disjoint = True
                    for c in children[1:]:
                        if leaves & c.leaves:
                            disjoint = False
                            break
                        leaves = leaves | c.leaves
                    if not disjoint:
                        continue
                    visited += 1
                    value = apply(*(c.value for c in children))
                    if value is None:
                        continue
                    if size == max_depth and goal is not None and value != goal:
                        continue  # top-size terms feed nothing deeper
                    key = f"{spec.id}({','.join(c.key for c in children)})"
                    if key in seen:
                        continue
                    seen.add(key)
                    pools[size].append(_Entry(value, key, (spec.id, children), leaves))
    return pools, visited


def _leaf_ids(node: tuple, out: list[str]) -> None:
    if node[0] == "leaf":
        out.append(node[1])
    else:
        for child in node[1]:
            _leaf_ids(child.node, out)


def _to_explanation(entry: _Entry, selection: str) -> tuple[FunctionTerm, Binding]:
    leaves: list[str] = []
    _leaf_ids(entry.node, leaves)
    order: list[str] = []
    for el_id in leaves:
        if el_id not in order:
            order.append(el_id)
    index = {el_id: i for i, el_id in enumerate(order)}

    def build(node: tuple) -> FunctionTerm:
        if node[0] == "leaf":
            return Var(index[node[1]])
        return Apply(node[0], tuple(build(c.node) for c in node[1]))

    return build(entry.node), Binding(selection, tuple(order))


def _const_leaves(term: FunctionTerm) -> int:
    if isinstance(term, Const):
        return 1
    if isinstance(term, Apply):
        return sum(_const_leaves(c) for c in term.children)
    return 0


def preference_key(term: FunctionTerm, binding: Binding) -> tuple:
    """Ordering for choosing among explanations: most parsimonious first."""
    return (
        _const_leaves(term),
        term_size(term),
        len(set(binding.args)),
        term_key(term),
        binding.args,
    )


def reachable_values(
    state: InterfaceState,
    config: HowSearchConfig,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> list[set[str]]:
    """Per-size sets of producible values, using the unique-value optimization.

    Only distinct values are carried between sizes; by determinism of the
    registry functions this leaves every per-size value set unchanged relative
    to full term enumeration over value tuples (elements free to repeat).  The
    result over-approximates the distinct-element explanation search, so it is
    sound as a reachability prune.
    """
    registry = registry if registry is not None else default_registry()
    values: list[set[str]] = [{el.value for el in _source_elements(state)}]
    specs = sorted(registry.values(), key=lambda s: s.id)
    for size in range(1, config.max_depth + 1):
        produced: set[str] = set()
        for spec in specs:
            for vector in _size_vectors(size - 1, spec.arity):
                pools = [sorted(values[sz]) for sz in vector]
                if any(not p for p in pools):
                    continue
                if spec.commutative and len(set(vector)) == 1:
                    combos = itertools.combinations_with_replacement(pools[0], spec.arity)
                else:
                    combos = itertools.product(*pools)
                for vals in combos:
                    result = spec.apply(*vals)
                    if result is not None:
                        produced.add(result)
        values.append(produced)
    return values


def search_with_stats(
    state: InterfaceState,
    target: SAI,
    config: HowSearchConfig,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> tuple[Explanations, int]:
    """Like :func:`how_search` but also reports the visited-term count."""
    if target.action_type is not ActionType.UPDATE_TEXT_FIELD:
        raise ValueError("how_search explains text-field updates; buttons bottom out")
    registry = registry if registry is not None else default_registry()
    goal = target.value
    sources = _source_elements(state)
    if config.foci is not None and config.restrict_to_foci:
        foci = set(config.foci)
        missing = foci - set(state.ids())
        if missing:
            raise KeyError(f"foci not present in state: {sorted(missing)}")
        sources = [el for el in sources if el.id in foci]

    # Non-numeric goals can only be explained by copy terms: registry functions
    # emit decimal strings, so skip enumeration entirely.
    if not goal.isdigit():
        hits = [
            (Var(0), Binding(target.selection, (el.id,)))
            for el in sources
            if el.value == goal
        ]
        hits = _filter_foci(hits, config)
        if not hits:
            raise EmptySearch(f"no composition produces {goal!r}")
        return hits, len(sources)

    pools, visited = _enumerate(sources, config.max_depth, registry, goal)
    explanations: Explanations = []
    seen: set[tuple] = set()
    for pool in pools:
        for entry in pool:
            if entry.value != goal:
                continue
            term, binding = _to_explanation(entry, target.selection)
            dedup = (term_key(term), binding.args)
            if dedup not in seen:
                seen.add(dedup)
                explanations.append((term, binding))
    explanations = _filter_foci(explanations, config)
    if not explanations:
        raise EmptySearch(f"no composition produces {goal!r}")
    explanations.sort(key=lambda tb: preference_key(*tb))
    return explanations, visited


def _filter_foci(explanations: Explanations, config: HowSearchConfig) -> Explanations:
    if config.foci is None or not config.restrict_to_foci:
        return explanations
    foci = set(config.foci)
    return [(t, b) for t, b in explanations if set(b.args) == foci]


def how_search(
    state: InterfaceState,
    target: SAI,
    config: Optional[HowSearchConfig] = None,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> Explanations:
    """All (term, binding) pairs of size <= max_depth whose evaluation equals the target.

    Raises EmptySearch when no composition (including the depth-0 copy term)
    produces the demonstrated value.
    """
    config = config or HowSearchConfig()
    explanations, _ = search_with_stats(state, target, config, registry)
    return explanations


def bottom_out(target: SAI) -> FunctionTerm:
    """Fallback explanation: reproduce the observed action as a constant."""
    if target.action_type is ActionType.PRESS_BUTTON:
        return Const("")
    return Const(target.value)


def consistent_compositions(
    demos: Sequence[tuple],
    config: Optional[HowSearchConfig] = None,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> list[ConsistentComposition]:
    """Intersect per-demo explanation sets, matching terms up to structural identity.

    Each demo is (state, sai) or (state, sai, foci).  Raises EmptySearch when
    any demo is unexplainable or the intersection is empty.
    """
    base = config or HowSearchConfig()
    per_demo: list[dict[str, list[Binding]]] = []
    term_by_key: dict[str, FunctionTerm] = {}
    for demo in demos:
        state, sai = demo[0], demo[1]
        foci = demo[2] if len(demo) > 2 else None
        demo_config = HowSearchConfig(
            max_depth=base.max_depth,
            foci=tuple(foci) if foci else None,
            restrict_to_foci=base.restrict_to_foci,
        )
        groups: dict[str, list[Binding]] = {}
        for term, binding in how_search(state, sai, demo_config, registry):
            key = term_key(term)
            term_by_key.setdefault(key, term)
            groups.setdefault(key, []).append(binding)
        per_demo.append(groups)
    if not per_demo:
        raise EmptySearch("no demonstrations supplied")
    common = set(per_demo[0])
    for groups in per_demo[1:]:
        common &= set(groups)
    if not common:
        raise EmptySearch("no composition is consistent across all demonstrations")
    result = [
        ConsistentComposition(
            term=term_by_key[key],
            bindings_per_demo=tuple(tuple(groups[key]) for groups in per_demo),
        )
        for key in common
    ]
    result.sort(key=lambda cc: preference_key(cc.term, cc.bindings_per_demo[0][0]))
    return result


def eval_term_values(
    term: FunctionTerm,
    binding: Binding,
    state: InterfaceState,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> Optional[list[str]]:
    """Pre-order values of every function application in the term.

    The head entry is the term's final value; the rest are the intermediate
    ("mental") results.  None when any application is undefined.
    """
    registry = registry if registry is not None else default_registry()
    values: list[str] = []

    def ev(node: FunctionTerm) -> Optional[str]:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            el = state.get(binding.args[node.index]) if node.index < len(binding.args) else None
            return el.value if el is not None else None
        slot = len(values)
        values.append("")
        child_vals = []
        for child in node.children:
            v = ev(child)
            if v is None:
                return None
            child_vals.append(v)
        result = registry[node.fn].apply(*child_vals)
        if result is None:
            return None
        values[slot] = result
        return result

    if ev(term) is None:
        return None
    if not isinstance(term, Apply):
        return [term.value if isinstance(term, Const) else ev(term)]
    return values


def eval_term(
    term: FunctionTerm,
    binding: Binding,
    state: InterfaceState,
    action_type: ActionType = ActionType.UPDATE_TEXT_FIELD,
    registry: Optional[dict[str, FunctionSpec]] = None,
) -> Optional[SAI]:
    """Apply a how-part on a binding; None when any partial application is undefined."""
    arity = term_arity(term)
    if len(binding.args) < arity:
        raise ValueError(f"binding arity {len(binding.args)} < term arity {arity}")
    registry = registry if registry is not None else default_registry()

    def ev(node: FunctionTerm) -> Optional[str]:
        if isinstance(node, Const):
            return node.value
        if isinstance(node, Var):
            el = state.get(binding.args[node.index])
            return el.value if el is not None else None
        vals = []
        for child in node.children:
            v = ev(child)
            if v is None:
                return None
            vals.append(v)
        return registry[node.fn].apply(*vals)

    value = ev(term)
    if value is None:
        return None
    if action_type is ActionType.PRESS_BUTTON:
        return SAI(binding.selection, ActionType.PRESS_BUTTON, {})
    return SAI(binding.selection, ActionType.UPDATE_TEXT_FIELD, {"value": value})
