import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from tutorlearn.model import (
    ActionType,
    ElementState,
    InterfaceState,
    MalformedState,
    SAI,
    TrainingSignal,
    WidgetType,
    decode_state,
    encode_state,
    press_button,
    update_field,
)
from tutorlearn.tutors import gen_problem


PAPER_FRAGMENT = {
    "inpA1": {
        "above": "hidden1",
        "below": "inpB1",
        "contentEditable": False,
        "dom_class": "CTATTextInput",
        "height": 40,
        "id": "inpA1",
        "offsetParent": "background-initial",
        "to_left": "inpA2",
        "to_right": "",
        "type": "TextField",
        "value": "9",
        "width": 40,
        "x": 552.46875,
        "y": 180,
    },
}


def _neighbor(el_id, **overrides):
    base = dict(PAPER_FRAGMENT["inpA1"], id=el_id, above="", below="", to_left="", to_right="")
    base.update(overrides)
    return base


def full_fragment():
    payload = dict(PAPER_FRAGMENT)
    payload["hidden1"] = _neighbor("hidden1", below="inpA1")
    payload["inpB1"] = _neighbor("inpB1", above="inpA1")
    payload["inpA2"] = _neighbor("inpA2", to_right="inpA1")
    return payload


def test_decode_paper_listing_fragment():
    state = decode_state(json.dumps(full_fragment()))
    el = state["inpA1"]
    assert el.value == "9"
    assert el.locked is True  # contentEditable: False
    assert el.above == "hidden1" and el.below == "inpB1"
    assert el.widget_type is WidgetType.TEXT_FIELD


def test_encode_matches_listing_fields():
    state = decode_state(json.dumps(full_fragment()))
    payload = json.loads(encode_state(state))
    assert set(payload["inpA1"]) == set(PAPER_FRAGMENT["inpA1"])
    assert payload["inpA1"]["contentEditable"] is False
    assert payload["inpA1"]["dom_class"] == "CTATTextInput"
    assert payload["inpA1"]["above"] == "hidden1"


def test_encode_empty_state():
    assert encode_state(InterfaceState({})) == "{}"


def test_dangling_pointer_rejected():
    payload = dict(PAPER_FRAGMENT)  # references hidden1 etc. that do not exist
    with pytest.raises(MalformedState):
        decode_state(json.dumps(payload))


def test_duplicate_id_rejected():
    payload = full_fragment()
    payload["other"] = dict(payload["inpA1"])  # id field says inpA1 under key other
    with pytest.raises(MalformedState):
        decode_state(json.dumps(payload))


def test_missing_field_rejected():
    payload = full_fragment()
    del payload["inpA1"]["value"]
    with pytest.raises(MalformedState):
        decode_state(json.dumps(payload))


def test_round_trip_on_generated_multicolumn_state():
    state = gen_problem("mc-addition", random.Random(3)).state
    text = encode_state(state)
    again = encode_state(decode_state(text))
    assert text == again  # byte equality after normalization


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000), st.sampled_from(["mc-addition", "fractions"]))
def test_decode_encode_identity_property(seed, domain):
    state = gen_problem(domain, random.Random(seed)).state
    assert decode_state(encode_state(state)) == state


def test_sai_structural_equality_and_validation():
    assert update_field("c", "7") == SAI("c", ActionType.UPDATE_TEXT_FIELD, {"value": "7"})
    assert press_button("done") == press_button("done")
    assert update_field("c", "7") != update_field("c", "8")
    with pytest.raises(ValueError):
        SAI("c", ActionType.UPDATE_TEXT_FIELD, {})
    with pytest.raises(ValueError):
        SAI("done", ActionType.PRESS_BUTTON, {"value": "x"})


def test_demonstration_requires_positive_reward():
    state = gen_problem("mc-addition", random.Random(0)).state
    with pytest.raises(ValueError):
        TrainingSignal(state, update_field("out_1", "1"), -1.0)


def test_spatial_pointer_symmetry_in_generated_boards():
    for domain in ("mc-addition", "fractions"):
        state = gen_problem(domain, random.Random(5)).state
        for el in state:
            for d, opposite in (("above", "below"), ("to_left", "to_right")):
                target = el.pointer(d)
                if target:
                    assert state[target].pointer(opposite) == el.id
