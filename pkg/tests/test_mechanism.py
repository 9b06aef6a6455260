"""Mechanism model: validation, profiles, partials, reordering, JSON."""

import itertools
import json

import pytest

from respmech.fixtures import clemency, pollution, salsa, yellow_light
from respmech.formula import BudgetExceededError, parse
from respmech.mechanism import Agent, Mechanism, MechanismError, load_mechanism, save_mechanism

from conftest import split_mechanism


# ---------------------------------------------------------------------------
# Construction and validation


def test_two_agent_mechanism_valid():
    m = yellow_light()
    assert m.n == 2
    assert m.var_names == ("u", "l")
    assert m.bits == 2


def test_empty_mechanism():
    m = Mechanism((), parse("T"))
    assert m.n == 0
    assert list(m.profiles()) == [()]


def test_shared_variable_rejected():
    with pytest.raises(MechanismError, match="owned by both"):
        Mechanism((Agent("a", ("p",)), Agent("b", ("p",))), parse("p"))


def test_unknown_constraint_variable_rejected():
    with pytest.raises(MechanismError, match="unknown"):
        Mechanism((Agent("a", ("p",)),), parse("p & q"))


def test_quantified_constraint_rejected():
    with pytest.raises(MechanismError, match="quantifier"):
        Mechanism((Agent("a", ("p",)),), parse("@all q. p | q"))


def test_duplicate_agent_names_rejected():
    with pytest.raises(MechanismError, match="duplicate agent names"):
        Mechanism((Agent("a", ("p",)), Agent("a", ("q",))), parse("p"))


def test_reserved_variable_name_rejected():
    with pytest.raises(MechanismError, match="invalid variable"):
        Agent("a", ("T",))


def test_action_arity_checked():
    with pytest.raises(MechanismError, match="expected 2 bits"):
        Agent("a", ("p", "q"), {"go": (1,)})
    with pytest.raises(MechanismError, match="bits must be 0 or 1"):
        Agent("a", ("p",), {"go": (2,)})


def test_zero_variable_agent_allowed():
    m = Mechanism((Agent("mute"), Agent("b", ("p",))), parse("p"))
    assert m.bits == 1
    assert list(m.profiles()) == [((), (0,)), ((), (1,))]


# ---------------------------------------------------------------------------
# Profile enumeration and evaluation


def test_profiles_pollution():
    assert list(pollution().profiles()) == [
        ((0,), (0,)),
        ((0,), (1,)),
        ((1,), (0,)),
        ((1,), (1,)),
    ]


def test_profiles_count_three_agents_two_bits():
    m = split_mechanism((2, 2, 2), tuple([1] * 64))
    profiles = list(m.profiles())
    assert len(profiles) == 64
    assert len(set(profiles)) == 64


def test_profiles_budget():
    with pytest.raises(BudgetExceededError):
        list(pollution().profiles(max_bits=1))


def test_constraint_value_tables():
    # collision exactly when the uncle brakes
    yellow = yellow_light()
    for u, l in itertools.product((0, 1), repeat=2):
        assert yellow.constraint_value(((u,), (l,))) == (u == 0)
    # the fish die only when both factories pollute
    dirty = pollution()
    for a, b in itertools.product((0, 1), repeat=2):
        assert dirty.constraint_value(((a,), (b,))) == (not (a and b))
    # the prisoner is spared only under support and grant
    mercy = clemency()
    for b, g in itertools.product((0, 1), repeat=2):
        assert mercy.constraint_value(((b,), (g,))) == bool(b and g)


def test_constraint_value_arity_mismatch():
    with pytest.raises(MechanismError):
        yellow_light().constraint_value(((1,),))
    with pytest.raises(MechanismError):
        yellow_light().constraint_value(((1, 0), (0,)))


# ---------------------------------------------------------------------------
# Partial mechanisms


def test_partial_zero_is_identity():
    m = salsa("abc")
    assert m.partial(0, ()) == m


def test_partial_salsa_one_step():
    m = salsa("abc")
    rest = m.partial(1, ((0, 0),))  # Ann picked red
    assert [a.name for a in rest.agents] == ["bob", "charles"]
    assert rest.n == 2


def test_partial_full_prefix_clemency():
    residual = clemency().partial(2, ((0,), (0,)))
    assert residual.n == 0
    assert residual.constraint_value(()) is False


def test_partial_range_and_arity_errors():
    m = clemency()
    with pytest.raises(MechanismError, match="out of range"):
        m.partial(3, ((0,), (0,), (0,)))
    with pytest.raises(MechanismError, match="prefix"):
        m.partial(1, ())
    with pytest.raises(MechanismError, match="bits"):
        m.partial(1, ((0, 1),))


@pytest.mark.parametrize("make", [yellow_light, pollution, clemency, lambda: salsa("abc")])
def test_partial_splits_agree_with_full_profile(make):
    m = make()
    for k in range(m.n + 1):
        head = Mechanism(m.agents[:k], parse("T"))
        tail = Mechanism(m.agents[k:], parse("T"))
        for prefix in head.profiles():
            residual = m.partial(k, prefix)
            for suffix in tail.profiles():
                assert residual.constraint_value(suffix) == m.constraint_value(
                    prefix + suffix
                )


# ---------------------------------------------------------------------------
# Reordering


def test_reorder_salsa():
    m = salsa("abc")
    rotated = m.reorder((1, 2, 0))
    assert [a.name for a in rotated.agents] == ["bob", "charles", "ann"]
    assert rotated.constraint == m.constraint


def test_reorder_identity_and_inverse():
    m = salsa("abc")
    assert m.reorder((0, 1, 2)) == m
    perm = (2, 0, 1)
    inverse = tuple(perm.index(i) for i in range(3))
    assert m.reorder(perm).reorder(inverse) == m


def test_reorder_rejects_non_permutation():
    with pytest.raises(MechanismError, match="permutation"):
        clemency().reorder((0, 0))


def test_reorder_preserves_violations_up_to_permutation():
    m = salsa("abc")
    perm = (1, 2, 0)
    rotated = m.reorder(perm)
    before = {p for p in m.profiles() if not m.constraint_value(p)}
    after = {p for p in rotated.profiles() if not rotated.constraint_value(p)}
    assert after == {tuple(p[i] for i in perm) for p in before}


# ---------------------------------------------------------------------------
# Action labels


def test_profile_from_labels_yellow():
    assert yellow_light().profile_from_labels(["brake", "continue"]) == ((1,), (0,))


def test_profile_from_labels_salsa_red():
    assert salsa("abc").profile_from_labels(["red", "red", "red"]) == (
        (0, 0),
        (0, 0),
        (0, 0),
    )


def test_profile_from_labels_unknown():
    with pytest.raises(MechanismError, match="unknown label"):
        pollution().profile_from_labels(["pollute", "fish"])


def test_profile_from_labels_without_map():
    m = Mechanism((Agent("a", ("p",)),), parse("p"))
    with pytest.raises(MechanismError, match="no action labels"):
        m.profile_from_labels(["x"])


def test_profile_labels_with_fallback():
    m = salsa("abc")
    assert m.profile_labels(((0, 0), (0, 1), (1, 1))) == ("red", "white", "11")


# ---------------------------------------------------------------------------
# Serialization


def test_from_dict_matches_documented_format():
    doc = {
        "agents": [
            {"name": "uncle", "vars": ["u"], "actions": {"brake": [1], "continue": [0]}},
            {"name": "lorry", "vars": ["l"], "actions": {"brake": [1], "continue": [0]}},
        ],
        "constraint": "!u",
    }
    assert Mechanism.from_dict(doc) == yellow_light()


def test_dict_round_trip_all_fixtures():
    from respmech.fixtures import all_fixtures

    for name, m in all_fixtures().items():
        assert Mechanism.from_dict(m.to_dict()) == m, name


def test_file_round_trip(tmp_path):
    path = tmp_path / "m.json"
    save_mechanism(salsa("bca"), str(path))
    assert load_mechanism(str(path)) == salsa("bca")
    doc = json.loads(path.read_text())
    assert list(doc) == ["agents", "constraint"]


def test_from_dict_missing_key():
    with pytest.raises(MechanismError, match="lacks key"):
        Mechanism.from_dict({"agents": []})
