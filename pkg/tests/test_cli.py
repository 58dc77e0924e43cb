import json
from fractions import Fraction

import pytest

from helpers import DATA
from tpwn import load_net, parse_net
from tpwn.cli import main, to_decimal

EXAMPLE = str(DATA / "example.json")
UNSOUND = str(DATA / "unsound.json")
TWOPAR = str(DATA / "twopar.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_expected_time(capsys):
    code, out, _ = run(capsys, "expected-time", EXAMPLE)
    assert code == 0
    assert out.splitlines()[0] == "47/5 (= 9.4)"
    assert "chain states: 11" in out


def test_expected_time_json(capsys):
    code, out, _ = run(capsys, "expected-time", EXAMPLE, "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["expected_time"] == "47/5" and doc["decimal"] == "9.4"
    assert doc["chain_states"] == 11 and doc["infinite"] is False
    assert set(doc["timings_ms"]) == {"construction", "solving"}
    assert doc["structure"]["sound"] is True


def test_expected_time_unsound(capsys):
    code, out, err = run(capsys, "expected-time", UNSOUND)
    assert code == 0 and out.strip() == "infinite" and "{p2,p4}" in err
    code, out, _ = run(capsys, "expected-time", UNSOUND, "--json")
    assert json.loads(out)["infinite"] is True


def test_check(capsys):
    code, out, _ = run(capsys, "check", EXAMPLE)
    assert code == 0 and "sound:             yes" in out
    code, out, _ = run(capsys, "check", UNSOUND)
    assert code == 1 and "witness: final marking unreachable from {p2,p4}" in out


def test_chain_dot(capsys, tmp_path):
    out_file = tmp_path / "chain.dot"
    code, out, _ = run(capsys, "chain", EXAMPLE, "--dot", str(out_file))
    assert code == 0 and "11 states" in out
    assert '"{p1:4,p4:5} r=4"' in out_file.read_text()
    code, _, err = run(capsys, "chain", UNSOUND, "--dot", str(out_file))
    assert code == 1 and "sound" in err


def test_enumerate(capsys):
    code, out, _ = run(capsys, "enumerate", EXAMPLE, "--mass-epsilon", "1/1000000000000", "--scheduler", "rightmost")
    assert code == 0 and out.startswith("lower bound:")


def test_simulate(capsys):
    code, out, _ = run(capsys, "simulate", EXAMPLE, "--runs", "2000", "--seed", "5")
    assert code == 0 and out.startswith("mean: ")
    again = run(capsys, "simulate", EXAMPLE, "--runs", "2000", "--seed", "5")[1]
    assert again == out


def test_pert_commands(capsys, tmp_path):
    assert run(capsys, "pert", "expected", TWOPAR)[1].strip() == "3/4"
    assert run(capsys, "pert", "check", TWOPAR)[0] == 0
    target = tmp_path / "net.json"
    assert run(capsys, "pert", "reduce", "--unit-weights", TWOPAR, "-o", str(target))[0] == 0
    net = load_net(target)
    assert all(t.weight == 1 for t in net.transitions)
    code, out, _ = run(capsys, "pert", "reduce", TWOPAR)
    assert parse_net(out).transition("t_e1_1").weight == Fraction(1, 2)


def test_pert_check_invalid(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"vertices": ["s", "t", "x"], "source": "s", "sink": "t",
                               "edges": [{"id": "e", "from": "s", "to": "t", "p": "1"}]}))
    code, _, err = run(capsys, "pert", "check", str(bad))
    assert code == 1 and "'x'" in err
    assert run(capsys, "pert", "expected", str(bad))[0] == 1


def test_generate(capsys, tmp_path):
    target = tmp_path / "g.json"
    code, _, _ = run(capsys, "generate", "--places", "9", "--seed", "3", "--times", "1:5", "--weights", "1:3", "-o", str(target))
    assert code == 0
    net = load_net(target)
    assert len(net.places) == 9
    assert all(1 <= t.duration <= 5 and 1 <= t.weight <= 3 for t in net.transitions)


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["expected-time"])
    assert exc.value.code == 2
    code, _, err = run(capsys, "generate", "--places", "5", "--seed", "1", "--times", "5:1")
    assert code == 2 and "error" in err


def test_missing_file_is_a_failure(capsys, tmp_path):
    code, _, err = run(capsys, "check", str(tmp_path / "none.json"))
    assert code == 1 and err.startswith("error:")


def test_malformed_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"places": ')
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1 and "line 1" in err


@pytest.mark.parametrize(
    "q, text",
    [(Fraction(47, 5), "9.4"), (Fraction(1, 3), "0.3333333333"), (Fraction(2, 3), "0.6666666667"),
     (Fraction(10), "10"), (Fraction(10000000005, 10**10), "1"), (Fraction(10000000015, 10**10), "1.000000002"),
     (Fraction(123456789125, 10), "12345678910"),
     (Fraction(1, 10**12), "0.000000000001")],
)
def test_decimal_rendering_half_even(q, text):
    assert to_decimal(q) == text
