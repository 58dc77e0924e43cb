"""JSON formats for nets and PERT networks.

Net document::

    {"version": 1, "places": ["i", "p", "o"], "initial": "i", "final": "o",
     "transitions": [{"id": "t", "pre": ["i"], "post": ["o"],
                      "weight": "1/5", "time": 3}, ...]}

``weight`` is a string ``"a/b"`` or a decimal (integers are accepted too) and
defaults to 1; ``time`` is a non-negative integer and defaults to 0.

PERT document::

    {"vertices": ["s", "t"], "source": "s", "sink": "t",
     "edges": [{"id": "e", "from": "s", "to": "t", "p": "1/2"}]}
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import FormatError, NetDefinitionError
from .net import MAX_TIME, Transition, WorkflowNet, parse_rational
from .pert import PertEdge, PertNetwork, validate_pert
from .structural import check_workflow_shape

FORMAT_VERSION = 1


def _load_json(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FormatError(f"not UTF-8: {exc.reason} at byte {exc.start}") from None
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from None


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise FormatError(f"{where}: missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise FormatError(f"{where}: field {key!r} has the wrong type")
    return value


def _id_list(value, where: str) -> list[str]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise FormatError(f"{where}: expected a list of ids")
    return value


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise FormatError(f"{where}: expected a rational string such as \"1/5\"")
    try:
        return parse_rational(value)
    except NetDefinitionError as exc:
        raise FormatError(f"{where}: {exc}") from None


def format_rational(q: Fraction) -> str:
    return str(q)


def parse_net(data: bytes | str, require_shape: bool = False) -> WorkflowNet:
    """Parse and validate a net document.

    Workflow shape is only enforced with ``require_shape``; otherwise it is
    left to the structural checks so that broken nets can be diagnosed.
    """
    doc = _load_json(data)
    if not isinstance(doc, dict):
        raise FormatError("net document must be a JSON object")
    version = doc.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version!r}")
    places = _id_list(_require(doc, "places", list, "net"), "net.places")
    initial = _require(doc, "initial", str, "net")
    final = _require(doc, "final", str, "net")
    known = set(places)
    records = []
    for n, t in enumerate(_require(doc, "transitions", list, "net")):
        if not isinstance(t, dict):
            raise FormatError(f"transition #{n} is not an object")
        tid = _require(t, "id", str, f"transition #{n}")
        where = f"transition {tid!r}"
        pre = _id_list(t.get("pre", []), f"{where}.pre")
        post = _id_list(t.get("post", []), f"{where}.post")
        for p in pre + post:
            if p not in known:
                raise FormatError(f"{where}: unknown place {p!r}")
        weight = _rational(t.get("weight", "1"), f"{where}.weight")
        dur = t.get("time", 0)
        if isinstance(dur, bool) or not isinstance(dur, int) or not 0 <= dur <= MAX_TIME:
            raise FormatError(f"{where}: time must be an integer in [0, 2^63)")
        try:
            records.append(Transition(tid, frozenset(pre), frozenset(post), weight, dur))
        except NetDefinitionError as exc:
            raise FormatError(str(exc)) from None
    try:
        net = WorkflowNet(tuple(places), tuple(records), initial, final)
    except NetDefinitionError as exc:
        raise FormatError(str(exc)) from None
    if require_shape:
        ok, problems = check_workflow_shape(net)
        if not ok:
            raise FormatError("not a workflow net: " + "; ".join(problems))
    return net


def net_to_dict(net: WorkflowNet) -> dict:
    return {
        "version": FORMAT_VERSION,
        "places": list(net.places),
        "initial": net.initial,
        "final": net.final,
        "transitions": [
            {
                "id": t.id,
                "pre": sorted(t.preset),
                "post": sorted(t.postset),
                "weight": format_rational(t.weight),
                "time": t.duration,
            }
            for t in net.transitions
        ],
    }


def dump_net(net: WorkflowNet) -> str:
    return json.dumps(net_to_dict(net), indent=2) + "\n"


def parse_pert(data: bytes | str, validate: bool = True) -> PertNetwork:
    doc = _load_json(data)
    if not isinstance(doc, dict):
        raise FormatError("PERT document must be a JSON object")
    vertices = _id_list(_require(doc, "vertices", list, "pert"), "pert.vertices")
    source = _require(doc, "source", str, "pert")
    sink = _require(doc, "sink", str, "pert")
    edges = []
    for n, e in enumerate(_require(doc, "edges", list, "pert")):
        if not isinstance(e, dict):
            raise FormatError(f"edge #{n} is not an object")
        eid = _require(e, "id", str, f"edge #{n}")
        where = f"edge {eid!r}"
        u = _require(e, "from", str, where)
        v = _require(e, "to", str, where)
        p = _rational(e.get("p"), f"{where}.p")
        edges.append(PertEdge(eid, u, v, p))
    pn = PertNetwork(tuple(vertices), tuple(edges), source, sink)
    if validate:
        problems = validate_pert(pn)
        if problems:
            raise FormatError("invalid PERT network: " + "; ".join(problems))
    return pn


def pert_to_dict(pn: PertNetwork) -> dict:
    return {
        "vertices": list(pn.vertices),
        "source": pn.source,
        "sink": pn.sink,
        "edges": [
            {"id": e.id, "from": e.source, "to": e.target, "p": format_rational(e.p)}
            for e in pn.edges
        ],
    }


def dump_pert(pn: PertNetwork) -> str:
    return json.dumps(pert_to_dict(pn), indent=2) + "\n"


def load_net(path: str | Path, **kwargs) -> WorkflowNet:
    return parse_net(Path(path).read_bytes(), **kwargs)


def load_pert(path: str | Path, **kwargs) -> PertNetwork:
    return parse_pert(Path(path).read_bytes(), **kwargs)
