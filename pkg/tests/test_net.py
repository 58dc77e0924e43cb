from decimal import Decimal
from fractions import Fraction

import pytest

from helpers import example_net, n1_net
from tpwn import (
    NetDefinitionError,
    NotEnabled,
    Transition,
    UnsafeFiring,
    WorkflowNet,
    build_net,
    conflict_set,
    conflict_sets,
    enabled_transitions,
    fire,
    independent,
)
from tpwn.net import parse_rational


def test_example_enabled_after_t1():
    net = example_net()
    m = fire(net, {"i"}, "t1")
    assert m == {"p1", "p3"}
    assert enabled_transitions(net, m) == {"t2", "t3", "t4"}


def test_fire_self_loop_keeps_marking():
    net = example_net()
    assert fire(net, {"p1", "p3"}, "t2") == {"p1", "p3"}


def test_fire_disabled_raises():
    with pytest.raises(NotEnabled):
        fire(example_net(), {"i"}, "t5")


def test_fire_unsafe_raises():
    net = build_net(["i", "p", "o"], [dict(id="a", pre=["i"], post=["p"]), dict(id="b", pre=["p"], post=["o"])])
    with pytest.raises(UnsafeFiring) as exc:
        fire(net, {"i", "p"}, "a")
    assert exc.value.place == "p"


def test_conflict_sets_example():
    net = example_net()
    assert conflict_set(net, {"p1", "p3"}, "t2") == {"t2", "t3"}
    assert conflict_sets(net, {"p1", "p3"}) == {frozenset({"t2", "t3"}), frozenset({"t4"})}


def test_conflict_sets_are_not_transitively_closed():
    net = n1_net()
    m = {"p1", "p2"}
    assert conflict_set(net, m, "t2") == {"t2", "t3"}
    assert conflict_set(net, m, "t4") == {"t3", "t4"}
    assert conflict_set(net, m, "t3") == {"t2", "t3", "t4"}


def test_conflict_set_requires_enabled():
    with pytest.raises(NotEnabled):
        conflict_set(example_net(), {"i"}, "t2")


def test_independence():
    net = example_net()
    assert independent(net, "t2", "t4")
    assert not independent(net, "t2", "t3")


@pytest.mark.parametrize(
    "text, value",
    [("1/5", Fraction(1, 5)), ("0.25", Fraction(1, 4)), (" 3 ", Fraction(3)), ("12.5%", Fraction(1, 8)),
     (7, Fraction(7)), (Decimal("0.1"), Fraction(1, 10))],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", [0.5, True, "1/0", "abc", "inf", "1/2/3", None])
def test_parse_rational_rejects(bad):
    with pytest.raises(NetDefinitionError):
        parse_rational(bad)


@pytest.mark.parametrize(
    "kwargs",
    [dict(weight=0), dict(weight="-1"), dict(duration=-1), dict(duration=2**63), dict(duration=1.5)],
)
def test_transition_validation(kwargs):
    base = dict(id="t", preset={"i"}, postset={"o"})
    with pytest.raises(NetDefinitionError):
        Transition(**base, **kwargs)


def test_empty_preset_rejected():
    with pytest.raises(NetDefinitionError):
        Transition("t", frozenset(), frozenset({"o"}))


@pytest.mark.parametrize(
    "places, transitions, initial, final",
    [
        (["i", "i", "o"], [], "i", "o"),
        (["i", "o"], [Transition("i", {"i"}, {"o"})], "i", "o"),
        (["i", "o"], [Transition("t", {"i"}, {"x"})], "i", "o"),
        (["i", "o"], [], "i", "i"),
        (["i", "o"], [], "i", "z"),
        (["i", "o"], [Transition("t", {"i"}, {"o"}), Transition("t", {"i"}, {"o"})], "i", "o"),
    ],
)
def test_net_validation(places, transitions, initial, final):
    with pytest.raises(NetDefinitionError):
        WorkflowNet(tuple(places), tuple(transitions), initial, final)


def test_without_and_equality():
    net = example_net()
    smaller = net.without("t5")
    assert [t.id for t in smaller.transitions] == ["t1", "t2", "t3", "t4"]
    assert net == example_net() and hash(net) == hash(example_net())
    assert smaller != net
    with pytest.raises(KeyError):
        net.without("nope")


def test_structural_views():
    net = example_net()
    assert net.place_postset("p1") == {"t2", "t3"}
    assert net.place_preset("p1") == {"t1", "t2"}
    assert ("p2", "t5") in net.arcs and ("t5", "o") in net.arcs
    assert net.max_duration == 5
