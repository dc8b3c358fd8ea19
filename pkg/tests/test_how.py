import json
import random
from pathlib import Path

import pytest

from tutorlearn.how import (
    EmptySearch,
    HowSearchConfig,
    bottom_out,
    consistent_compositions,
    eval_term,
    eval_term_values,
    how_search,
    reachable_values,
    search_with_stats,
)
from tutorlearn.model import (
    ActionType,
    Apply,
    Binding,
    Const,
    ElementState,
    InterfaceState,
    Var,
    press_button,
    term_key,
    update_field,
)
from tutorlearn.tutors import MCProblem, MCSession

from oracles import naive_enumerate, naive_explanations

GOLDEN = Path(__file__).parent / "fixtures" / "how_goldens.json"


def state_27_35():
    return MCSession(MCProblem((7, 2), (5, 3))).state  # 27 + 35


def state_17_96():
    return MCSession(MCProblem((7, 1), (6, 9))).state  # 17 + 96


@pytest.fixture(scope="module")
def first_step_sets():
    s1, s2 = state_27_35(), state_17_96()
    e1, v1 = search_with_stats(s1, update_field("out_1", "2"), HowSearchConfig(max_depth=2))
    e2, v2 = search_with_stats(s2, update_field("out_1", "3"), HowSearchConfig(max_depth=2))
    return (s1, e1, v1), (s2, e2, v2)


def test_worked_example_contains_expected_terms(first_step_sets):
    (s1, e1, _), _ = first_step_sets
    keys = {term_key(t) for t, _ in e1}
    assert "GetOnesPlace(Add(v0,v1))" in keys
    assert "v0" in keys  # the copy term: a "2" is on the board
    assert "Subtract(v0,v1)" in keys  # 7 - 5


def test_golden_counts_frozen(first_step_sets):
    (_, e1, v1), (_, e2, v2) = first_step_sets
    golden = json.loads(GOLDEN.read_text())
    assert len(e1) == golden["unfocused_27_35_count"]
    assert len(e2) == golden["unfocused_17_96_count"]
    distinct_args = {b.args for _, b in e1}
    assert len(distinct_args) == golden["distinct_arg_tuples_27_35"]
    # the worked example's search-space orders: bindings stay under n^3 = 64
    assert len(distinct_args) <= 64
    assert v1 <= 87808 and v2 <= 87808


def test_focused_search_is_smaller_and_keeps_the_target_term(first_step_sets):
    (s1, e1, _), _ = first_step_sets
    focused = how_search(s1, update_field("out_1", "2"),
                         HowSearchConfig(max_depth=2, foci=("A_1", "B_1")))
    assert 0 < len(focused) < len(e1)
    assert "GetOnesPlace(Add(v0,v1))" in {term_key(t) for t, _ in focused}
    for _, binding in focused:
        assert set(binding.args) == {"A_1", "B_1"}


def test_539_421_first_step():
    state = MCSession(MCProblem((9, 3, 5), (1, 2, 4))).state  # 539 + 421
    explanations = how_search(state, update_field("out_1", "0"))
    keys = {term_key(t): b for t, b in explanations}
    assert "GetOnesPlace(Add(v0,v1))" in {term_key(t) for t, _ in explanations}
    pair = [b for t, b in explanations if term_key(t) == "GetOnesPlace(Add(v0,v1))"]
    assert any(set(b.args) == {"A_1", "B_1"} for b in pair)  # the 9 and the 1


def test_copy_term_included_when_value_present():
    state = state_27_35()
    explanations = how_search(state, update_field("out_1", "2"))
    copies = [b for t, b in explanations if isinstance(t, Var)]
    assert copies and all(state[b.args[0]].value == "2" for b in copies)


def test_soundness_every_explanation_reproduces_target():
    state = state_17_96()
    target = update_field("out_1", "3")
    for term, binding in how_search(state, target):
        assert eval_term(term, binding, state) == target


def test_empty_search_raises():
    state = state_27_35()
    with pytest.raises(EmptySearch):
        how_search(state, update_field("out_1", "999"))
    with pytest.raises(EmptySearch):
        how_search(state, update_field("check", "x"))


def test_bottom_out():
    assert bottom_out(press_button("done")) == Const("")
    assert bottom_out(update_field("check_convert", "x")) == Const("x")
    assert bottom_out(update_field("c", "42")) == Const("42")


def test_oracle_equivalence_desk_scale():
    rng = random.Random(11)
    checked = 0
    for _ in range(40):
        n = rng.randint(2, 6)
        values = [str(rng.randint(0, 30)) for _ in range(n)]
        elements = [ElementState(id=f"e{i}", value=v, locked=True, x=float(i) * 10)
                    for i, v in enumerate(values)]
        elements.append(ElementState(id="t", x=999.0))
        state = InterfaceState(elements)
        flat, _ = naive_enumerate(state, 2)
        candidates = sorted({v for v, _, _ in flat})
        targets = rng.sample(candidates, min(3, len(candidates))) + [str(rng.randint(0, 9))]
        for target in targets:
            oracle_set, _ = naive_explanations(state, target, "t", 2)
            try:
                ours = {(term_key(t), b.args) for t, b in
                        how_search(state, update_field("t", target))}
            except EmptySearch:
                ours = set()
            assert ours == oracle_set, f"mismatch for target {target} over {values}"
            checked += 1
    assert checked >= 120


def test_unique_value_optimization_preserves_value_sets():
    # paper's optimization claim, validated on value-level chaining where
    # elements are free to repeat
    rng = random.Random(5)
    for _ in range(10):
        n = rng.randint(2, 5)
        elements = [ElementState(id=f"e{i}", value=str(rng.randint(0, 12)), locked=True)
                    for i in range(n)]
        state = InterfaceState(elements)
        fast = reachable_values(state, HowSearchConfig(max_depth=2))
        naive_flat, _ = naive_enumerate(state, 2, distinct_elements=False)
        by_size = [set() for _ in range(3)]
        by_size[0] = {el.value for el in state}
        for value, node, leaves in naive_flat:
            if node[0] != "leaf":
                by_size[_size(node)].add(value)
        assert fast[1] == by_size[1]
        assert fast[2] == by_size[2]


def _size(node):
    if node[0] == "leaf":
        return 0
    return 1 + sum(_size(c[1]) for c in node[1])


def test_visited_bound_for_paper_scale():
    # |F| = 7, n = 4, D = 2: both the naive enumerator and the optimized
    # search stay within the worked example's worst-case envelope
    state = state_27_35()
    _, naive_visited = naive_enumerate(state, 2)
    _, ours_visited = search_with_stats(state, update_field("out_1", "2"), HowSearchConfig(2))
    assert naive_visited <= 7**3 * 4**4 == 87808
    assert ours_visited <= 87808


def test_consistent_compositions_intersection(first_step_sets):
    (s1, e1, _), (s2, e2, _) = first_step_sets
    demos = [(s1, update_field("out_1", "2")), (s2, update_field("out_1", "3"))]
    both = consistent_compositions(demos)
    keys = {term_key(cc.term) for cc in both}
    assert "GetOnesPlace(Add(v0,v1))" in keys
    assert len(both) <= min(len(e1), len(e2))


def test_consistent_single_demo_equals_how_search(first_step_sets):
    (s1, e1, _), _ = first_step_sets
    single = consistent_compositions([(s1, update_field("out_1", "2"))])
    expanded = {(term_key(cc.term), b.args) for cc in single for b in cc.bindings_per_demo[0]}
    assert expanded == {(term_key(t), b.args) for t, b in e1}


def test_consistent_contradictory_demos_empty():
    s1 = state_27_35()
    demos = [(s1, update_field("out_1", "2")), (s1, update_field("out_1", "999"))]
    with pytest.raises(EmptySearch):
        consistent_compositions(demos)


def test_focused_intersection_is_the_singleton_add_ones(first_step_sets):
    (s1, _, _), (s2, _, _) = first_step_sets
    demos = [
        (s1, update_field("out_1", "2"), ("A_1", "B_1")),
        (s2, update_field("out_1", "3"), ("A_1", "B_1")),
    ]
    both = consistent_compositions(demos)
    assert [term_key(cc.term) for cc in both] == ["GetOnesPlace(Add(v0,v1))"]


def test_eval_term_cases():
    state = state_27_35()
    term = Apply("GetOnesPlace", (Apply("Add", (Var(0), Var(1))),))
    sai = eval_term(term, Binding("out_1", ("A_1", "B_1")), state)
    assert sai == update_field("out_1", "2")
    assert eval_term(Const("x"), Binding("c", ()), state) == update_field("c", "x")
    div = Apply("Divide", (Var(0), Var(1)))
    st = InterfaceState([
        ElementState(id="a", value="4", locked=True),
        ElementState(id="b", value="0", locked=True),
        ElementState(id="t"),
    ])
    assert eval_term(div, Binding("t", ("a", "b")), st) is None
    with pytest.raises(ValueError):
        eval_term(div, Binding("t", ("a",)), st)


def test_eval_term_values_preorder():
    state = state_27_35()
    term = Apply("GetOnesPlace", (Apply("Add", (Var(0), Var(1))),))
    values = eval_term_values(term, Binding("out_1", ("A_1", "B_1")), state)
    assert values == ["2", "12"]  # root first, then the inner sum
