"""Independent verification oracles, written without the implementation's
optimizations: a brute-force term enumerator, a brute-force where matcher,
and plain arithmetic models of both tutor procedures."""

from __future__ import annotations

import itertools
from fractions import Fraction

from tutorlearn.functions import default_registry
from tutorlearn.model import Apply, Binding, InterfaceState, Var, term_key


def naive_enumerate(state, max_size, registry=None, distinct_elements=True):
    """Every ground term of at most max_size applications, no dedup tricks.

    Returns (list of (value, canonical term, args tuple), visited count).
    Commutative functions are enumerated over all permutations; canonical
    sorting happens after the fact, mirroring the production conventions
    without sharing their code.
    """
    registry = registry or default_registry()
    sources = sorted((el for el in state if el.value != ""), key=lambda el: el.id)
    # ground term: (value, node, leaf ids tuple)
    levels = [[(el.value, ("leaf", el.id), (el.id,)) for el in sources]]
    visited = len(levels[0])
    for size in range(1, max_size + 1):
        level = []
        for spec in registry.values():
            for sizes in _compositions(size - 1, spec.arity):
                pools = [levels[s] for s in sizes]
                for children in itertools.product(*pools):
                    leaves = tuple(l for c in children for l in c[2])
                    if distinct_elements and len(set(leaves)) != len(leaves):
                        continue
                    visited += 1
                    value = spec.apply(*(c[0] for c in children))
                    if value is None:
                        continue
                    level.append((value, (spec.id, tuple(children)), leaves))
        levels.append(level)
    flat = [t for level in levels for t in level]
    return flat, visited


def _compositions(total, slots):
    if slots == 1:
        return [(total,)]
    out = []
    for head in range(total + 1):
        for rest in _compositions(total - head, slots - 1):
            out.append((head,) + rest)
    return out


def _canonical(node, registry):
    """Sort commutative children by (value, key); returns (value, node)."""
    if node[0] == "leaf":
        return node
    spec_id, children = node
    fixed = tuple(_canonical(c[1], registry) for c in children)
    values = [c[0] for c in children]
    rebuilt = list(zip(values, fixed))
    if registry[spec_id].commutative:
        rebuilt.sort(key=lambda vc: (vc[0], _node_key(vc[1])))
    return (spec_id, tuple(rebuilt))


def _node_key(node):
    if node[0] == "leaf":
        return f"L:{node[1]}"
    return f"{node[0]}({','.join(_node_key(c[1]) for c in node[1])})"


def naive_explanations(state, target_value, selection, max_size, registry=None):
    """Set of (term_key, args) explaining the target, canonically deduplicated."""
    registry = registry or default_registry()
    flat, visited = naive_enumerate(state, max_size, registry)
    out = set()
    for value, node, _ in flat:
        if value != target_value:
            continue
        canon = _canonical(node if node[0] == "leaf" else node, registry)
        term, args = _to_term(canon)
        out.add((term_key(term), args))
    return out, visited


def _to_term(node):
    order: list[str] = []

    def walk(n):
        if n[0] == "leaf":
            if n[1] not in order:
                order.append(n[1])
            return Var(order.index(n[1]))
        return Apply(n[0], tuple(walk(c[1] if isinstance(c, tuple) and len(c) == 2 and not isinstance(c[0], str) else c) for c in n[1]))

    # canonical nodes store children as (value, node) pairs
    def walk2(n):
        if n[0] == "leaf":
            if n[1] not in order:
                order.append(n[1])
            return Var(order.index(n[1]))
        return Apply(n[0], tuple(walk2(c[1]) for c in n[1]))

    term = walk2(node)
    return term, tuple(order)


def brute_force_match(wp, state):
    """All bindings satisfying an AntiUnify where-part, by exhaustive tuples."""
    from tutorlearn.where import AntiUnifyWhere, match_where

    assert isinstance(wp, AntiUnifyWhere)
    ids = sorted(state.ids())
    n_slots = wp.arity + 1
    found = []
    for combo in itertools.permutations(ids, n_slots):
        candidate = Binding(combo[0], combo[1:])
        single = AntiUnifyWhere(
            wp.arity, wp.slot_literals, wp.anchors, wp.pair_atoms, wp.examples
        )
        # reuse the literal checks through a 1-candidate match: build a filter
        if _satisfies(single, state, candidate):
            found.append(candidate)
    return sorted(found, key=lambda b: (b.selection,) + b.args)


def _satisfies(wp, state, binding):
    from tutorlearn.where import _element_feats, _pair_atoms, _anchor_atoms, PRESENT, MISSING

    elements = []
    for i in binding.all_ids():
        el = state.get(i)
        if el is None:
            return False
        elements.append(el)
    sel = elements[0]
    if sel.locked or sel.value != "":
        return False
    for slot, el in enumerate(elements):
        feats = _element_feats(el)
        if any(feats.get(k) != v for k, v in wp.slot_literals[slot]):
            return False
    for (i, j), atoms in wp.pair_atoms:
        if not atoms <= _pair_atoms(elements[i], elements[j]):
            return False
    slot_ids = binding.all_ids()
    for slot, el in enumerate(elements):
        for direction, group in wp.anchors[slot]:
            target = el.pointer(direction)
            if group.status == MISSING and target:
                return False
            if group.status == PRESENT:
                if not target or target not in state:
                    return False
                anchor = state[target]
                feats = _element_feats(anchor)
                if any(feats.get(k) != v for k, v in group.feats):
                    return False
                if not group.atoms <= _anchor_atoms(anchor, slot, direction, slot_ids):
                    return False
    return True


# --- tutor arithmetic oracles --------------------------------------------------


def long_addition(a_digits, b_digits):
    """(answer digits right-to-left including final carry, per-column carries-in)."""
    carry = 0
    out = []
    carries = [0]
    for a, b in zip(a_digits, b_digits):
        total = a + b + carry
        out.append(total % 10)
        carry = total // 10
        carries.append(carry)
    if carry:
        out.append(carry)
    return out, carries


def fraction_answer(num_a, den_a, num_b, den_b, op):
    if op == "*":
        return Fraction(num_a, den_a) * Fraction(num_b, den_b)
    return Fraction(num_a, den_a) + Fraction(num_b, den_b)
