import pytest

from tutorlearn.functions import default_registry, registry_from_ids


@pytest.fixture(scope="module")
def registry():
    return default_registry()


def test_registry_contents(registry):
    assert set(registry) == {
        "Add", "Add3", "Subtract", "Divide", "Multiply", "GetTensPlace", "GetOnesPlace",
    }
    arities = {fid: spec.arity for fid, spec in registry.items()}
    assert arities == {
        "Add": 2, "Add3": 3, "Subtract": 2, "Divide": 2, "Multiply": 2,
        "GetTensPlace": 1, "GetOnesPlace": 1,
    }
    assert registry["Add"].commutative and registry["Add3"].commutative
    assert registry["Multiply"].commutative
    assert not registry["Subtract"].commutative and not registry["Divide"].commutative


def test_integer_string_semantics(registry):
    assert registry["Add"].apply("7", "5") == "12"
    assert registry["Add3"].apply("9", "8", "1") == "18"
    assert registry["Subtract"].apply("7", "5") == "2"
    assert registry["Multiply"].apply("4", "6") == "24"
    assert registry["Divide"].apply("12", "4") == "3"


def test_digit_extraction_matches_string_indexing(registry):
    # oracle: index the zero-padded decimal rendering directly
    for n in [0, 5, 7, 12, 40, 99, 100, 450, 2024]:
        rendered = str(n).rjust(2, "0")
        assert registry["GetOnesPlace"].apply(str(n)) == rendered[-1]
        assert registry["GetTensPlace"].apply(str(n)) == rendered[-2]
    assert registry["GetTensPlace"].apply("7") == "0"
    assert registry["GetOnesPlace"].apply("12") == "2"
    assert registry["GetTensPlace"].apply("12") == "1"


def test_partiality(registry):
    assert registry["Divide"].apply("4", "0") is None
    assert registry["Divide"].apply("7", "2") is None  # not exact
    assert registry["Subtract"].apply("5", "7") is None  # negative
    for fid in registry:
        spec = registry[fid]
        assert spec.apply(*(["x"] * spec.arity)) is None  # non-numeric
        assert spec.apply(*([""] * spec.arity)) is None  # empty


def test_commutative_invariance(registry):
    assert registry["Add"].apply("3", "9") == registry["Add"].apply("9", "3")
    assert registry["Add3"].apply("1", "2", "3") == registry["Add3"].apply("3", "1", "2")
    assert registry["Multiply"].apply("6", "7") == registry["Multiply"].apply("7", "6")


def test_registry_from_ids_subset():
    sub = registry_from_ids(["Add", "GetOnesPlace"])
    assert set(sub) == {"Add", "GetOnesPlace"}
    with pytest.raises(KeyError):
        registry_from_ids(["Exp"])
