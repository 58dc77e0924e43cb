import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import DATA, example_net, seven_edge_pert
from tpwn import FormatError, dump_net, dump_pert, generate_random_net, load_net, parse_net, parse_pert


def test_example_document():
    net = load_net(DATA / "example.json")
    assert len(net.places) == 6 and len(net.transitions) == 5
    assert net == example_net()


def test_weight_is_exact():
    doc = json.loads((DATA / "example.json").read_text())
    doc["transitions"][1]["weight"] = "1/5"
    net = parse_net(json.dumps(doc))
    assert net.transition("t2").weight == Fraction(1, 5)


def test_syntax_error_has_position():
    with pytest.raises(FormatError) as exc:
        parse_net('{\n  "places": [,]\n}')
    assert (exc.value.line, exc.value.column) == (2, 14)
    assert "line 2" in str(exc.value)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d.pop("final"), "'final'"),
        (lambda d: d["transitions"][0].update(pre=["nowhere"]), "nowhere"),
        (lambda d: d["transitions"][0].update(weight=0.5), "t1"),
        (lambda d: d["transitions"][0].update(weight="x"), "t1"),
        (lambda d: d["transitions"][0].update(time=-1), "t1"),
        (lambda d: d["transitions"][0].update(time=True), "t1"),
        (lambda d: d["transitions"][0].update(weight="0"), "t1"),
        (lambda d: d.update(version=2), "version"),
        (lambda d: d["transitions"].append(dict(d["transitions"][0])), "duplicate"),
        (lambda d: d.update(places="i"), "places"),
    ],
)
def test_semantic_errors(mutate, fragment):
    doc = json.loads((DATA / "example.json").read_text())
    mutate(doc)
    with pytest.raises(FormatError) as exc:
        parse_net(json.dumps(doc))
    assert fragment in str(exc.value)


def test_non_object_and_bad_utf8():
    with pytest.raises(FormatError):
        parse_net("[]")
    with pytest.raises(FormatError):
        parse_net(b"\xff\xfe")


def test_require_shape():
    text = (DATA / "unsound.json").read_text()
    assert len(parse_net(text).transitions) == 4
    with pytest.raises(FormatError):
        parse_net(text, require_shape=True)


def test_defaults_for_weight_and_time():
    net = parse_net('{"places": ["i", "o"], "initial": "i", "final": "o", "transitions": [{"id": "t", "pre": ["i"], "post": ["o"]}]}')
    t = net.transition("t")
    assert (t.weight, t.duration) == (1, 0)


def test_net_round_trip():
    net = example_net()
    assert parse_net(dump_net(net)) == net


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 20), st.integers(0, 10**6))
def test_generated_net_round_trip(places, seed):
    net = generate_random_net(places, seed, times=(0, 9), weights=(1, 5))
    assert parse_net(dump_net(net)) == net


def test_pert_round_trip_and_fixture():
    pn = seven_edge_pert(Fraction(3, 16))
    assert parse_pert(dump_pert(pn)) == pn
    two = parse_pert((DATA / "twopar.json").read_bytes())
    assert [e.p for e in two.edges] == [Fraction(1, 2)] * 2


def test_invalid_pert_document():
    doc = {"vertices": ["s", "t"], "source": "s", "sink": "t", "edges": [{"id": "e", "from": "t", "to": "s", "p": "1/2"}]}
    with pytest.raises(FormatError):
        parse_pert(json.dumps(doc))
    assert parse_pert(json.dumps(doc), validate=False).edges[0].source == "t"
    doc["edges"][0].pop("p")
    with pytest.raises(FormatError):
        parse_pert(json.dumps(doc), validate=False)
