"""Two-state stochastic PERT networks and their translation to timed nets.

Every edge of a PERT network takes one time unit with probability ``p`` and
zero otherwise; the project duration is the longest source-to-sink path.
Two generators turn a network into a workflow net with the same expected
time: one with rational weights, one with weights 1 and binary gadgets.

Generated ids follow a fixed scheme:

* places ``[u,e]`` and ``[e,v]`` for an edge ``e = (u, v)``, plus ``i`` and ``o``
* ``t_<e>_0`` / ``t_<e>_1`` (zero / unit duration) and ``t_<v>`` per vertex
* unit-weight gadgets use places ``q_<e>_<i>`` and transitions ``a_<e>_<i>``, ``b_<e>_<i>``
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidPert, NetDefinitionError, NonDyadic, TooManyEdges
from .net import Transition, WorkflowNet, parse_rational

DEFAULT_EDGE_CAP = 24


@dataclass(frozen=True)
class PertEdge:
    id: str
    source: str
    target: str
    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", parse_rational(self.p))


@dataclass(frozen=True)
class PertNetwork:
    vertices: tuple[str, ...]
    edges: tuple[PertEdge, ...]
    source: str
    sink: str

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))


def pert(vertices, edges, source="s", sink="t") -> PertNetwork:
    """Build from ``(id, from, to, p)`` tuples."""
    return PertNetwork(tuple(vertices), tuple(PertEdge(*e) for e in edges), source, sink)


def _topological(pn: PertNetwork) -> list[str] | None:
    indeg = {v: 0 for v in pn.vertices}
    succ: dict[str, list[str]] = {v: [] for v in pn.vertices}
    for e in pn.edges:
        succ[e.source].append(e.target)
        indeg[e.target] += 1
    ready = [v for v in pn.vertices if indeg[v] == 0]
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in succ[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
    return order if len(order) == len(pn.vertices) else None


def validate_pert(pn: PertNetwork) -> list[str]:
    """All structural violations; an empty list means the network is valid."""
    problems = []
    vs = set(pn.vertices)
    if len(vs) != len(pn.vertices):
        problems.append("duplicate vertex id")
    eids = [e.id for e in pn.edges]
    if len(set(eids)) != len(eids):
        problems.append("duplicate edge id")
    if vs & set(eids):
        problems.append(f"ids used for both a vertex and an edge: {sorted(vs & set(eids))}")
    for end, what in ((pn.source, "source"), (pn.sink, "sink")):
        if end not in vs:
            problems.append(f"{what} {end!r} is not a vertex")
    if pn.source == pn.sink:
        problems.append("source and sink coincide")
    for e in pn.edges:
        for end in (e.source, e.target):
            if end not in vs:
                problems.append(f"edge {e.id!r} refers to unknown vertex {end!r}")
        if not 0 <= e.p <= 1:
            problems.append(f"edge {e.id!r}: probability {e.p} outside [0, 1]")
    if problems:
        return problems

    if _topological(pn) is None:
        problems.append("graph has a cycle")
    has_in = {e.target for e in pn.edges}
    has_out = {e.source for e in pn.edges}
    for v in pn.vertices:
        if v != pn.source and v not in has_in:
            problems.append(f"vertex {v!r} is a second source")
        if v != pn.sink and v not in has_out:
            problems.append(f"vertex {v!r} is a second sink")
    if pn.source in has_in:
        problems.append(f"source {pn.source!r} has incoming edges")
    if pn.sink in has_out:
        problems.append(f"sink {pn.sink!r} has outgoing edges")

    def reach(start, forward):
        seen = {start}
        todo = [start]
        while todo:
            v = todo.pop()
            for e in pn.edges:
                a, b = (e.source, e.target) if forward else (e.target, e.source)
                if a == v and b not in seen:
                    seen.add(b)
                    todo.append(b)
        return seen

    on_path = reach(pn.source, True) & reach(pn.sink, False)
    for v in pn.vertices:
        if v not in on_path:
            problems.append(f"vertex {v!r} lies on no source-sink path")
    return problems


def ensure_valid(pn: PertNetwork) -> None:
    problems = validate_pert(pn)
    if problems:
        raise InvalidPert(problems)


def project_duration(pn: PertNetwork, lengths: dict[str, int], order: list[str] | None = None) -> int:
    """Longest source-sink path under the given edge lengths."""
    order = order or _topological(pn)
    incoming: dict[str, list[PertEdge]] = {v: [] for v in pn.vertices}
    for e in pn.edges:
        incoming[e.target].append(e)
    y = {}
    for v in order:
        y[v] = max((y[e.source] + lengths[e.id] for e in incoming[v]), default=0)
    return y[pn.sink]


def expected_project_duration(pn: PertNetwork, max_edges: int = DEFAULT_EDGE_CAP) -> Fraction:
    """Brute force over all 2^|E| outcomes of the edge durations."""
    ensure_valid(pn)
    if len(pn.edges) > max_edges:
        raise TooManyEdges(f"{len(pn.edges)} edges exceed the enumeration cap of {max_edges}")
    order = _topological(pn)
    incoming: dict[str, list[tuple[int, str]]] = {v: [] for v in pn.vertices}
    for k, e in enumerate(pn.edges):
        incoming[e.target].append((k, e.source))
    choices = []
    for e in pn.edges:
        opts = []
        if e.p != 1:
            opts.append((0, 1 - e.p))
        if e.p != 0:
            opts.append((1, e.p))
        choices.append(opts)
    total = Fraction(0)
    for combo in itertools.product(*choices):
        prob = Fraction(1)
        for _, q in combo:
            prob *= q
        y = {}
        for v in order:
            y[v] = max((y[u] + combo[k][0] for k, u in incoming[v]), default=0)
        total += prob * y[pn.sink]
    return total


# -- reductions ------------------------------------------------------------


def _in_place(e: PertEdge) -> str:
    return f"[{e.source},{e.id}]"


def _out_place(e: PertEdge) -> str:
    return f"[{e.id},{e.target}]"


def _vertex_transitions(pn: PertNetwork) -> list[Transition]:
    out = []
    for v in pn.vertices:
        pre = [_out_place(e) for e in pn.edges if e.target == v]
        post = [_in_place(e) for e in pn.edges if e.source == v]
        if v == pn.source:
            pre = ["i"]
        if v == pn.sink:
            post = ["o"]
        out.append(Transition(f"t_{v}", frozenset(pre), frozenset(post)))
    return out


def _assemble(pn: PertNetwork, places: list[str], transitions: list[Transition]) -> WorkflowNet:
    try:
        return WorkflowNet(tuple(["i"] + places + ["o"]), tuple(transitions), "i", "o")
    except NetDefinitionError as exc:
        raise InvalidPert([f"generated ids clash: {exc}"]) from None


def reduce_rational(pn: PertNetwork) -> WorkflowNet:
    """Net with one two-way choice per edge, weighted ``1 - p`` and ``p``.

    A choice of probability 0 is omitted, since weights must be positive.
    """
    ensure_valid(pn)
    places = []
    transitions = _vertex_transitions(pn)
    for e in pn.edges:
        a, b = _in_place(e), _out_place(e)
        places += [a, b]
        if e.p != 1:
            transitions.append(Transition(f"t_{e.id}_0", frozenset([a]), frozenset([b]), 1 - e.p, 0))
        if e.p != 0:
            transitions.append(Transition(f"t_{e.id}_1", frozenset([a]), frozenset([b]), e.p, 1))
    return _assemble(pn, places, transitions)


def binary_expansion(p) -> list[int]:
    """Digits ``[p0, p1, ..., pk]`` with ``p = sum 2^-i p_i`` and ``k`` minimal."""
    p = parse_rational(p)
    if not 0 <= p <= 1:
        raise ValueError(f"probability {p} outside [0, 1]")
    den = p.denominator
    if den & (den - 1):
        raise NonDyadic(f"{p} has no finite binary expansion")
    k = den.bit_length() - 1
    num = p.numerator
    return [(num >> (k - i)) & 1 for i in range(k + 1)]


def reduce_unit_weights(pn: PertNetwork) -> WorkflowNet:
    """Like :func:`reduce_rational` but with all weights 1.

    An edge with ``p = (p0.p1...pk)_2`` becomes a ladder: ``a_e_0`` moves the
    token on, then at step ``i`` either ``a_e_i`` (duration ``p_i``) exits or
    ``b_e_i`` goes one rung down, so ``a_e_i`` fires with probability ``2^-i``.
    """
    ensure_valid(pn)
    bad = [e.id for e in pn.edges if e.p.denominator & (e.p.denominator - 1)]
    if bad:
        raise NonDyadic(f"edges without a finite binary expansion: {', '.join(bad)}")
    places = []
    transitions = _vertex_transitions(pn)
    for e in pn.edges:
        start, end = _in_place(e), _out_place(e)
        places += [start, end]
        bits = binary_expansion(e.p)
        k = len(bits) - 1
        q = [f"q_{e.id}_{i}" for i in range(1, k + 1)]
        places += q
        first = q[0] if k else end
        transitions.append(Transition(f"a_{e.id}_0", frozenset([start]), frozenset([first]), 1, bits[0]))
        for i in range(1, k + 1):
            here = frozenset([q[i - 1]])
            nxt = q[i] if i < k else end
            transitions.append(Transition(f"a_{e.id}_{i}", here, frozenset([end]), 1, bits[i]))
            transitions.append(Transition(f"b_{e.id}_{i}", here, frozenset([nxt]), 1, 0))
    return _assemble(pn, places, transitions)


def random_pert(
    seed: int, max_edges: int = 8, max_exponent: int = 4, rng: random.Random | None = None
) -> PertNetwork:
    """A random valid network with dyadic probabilities of denominator at most 2^max_exponent."""
    rng = rng or random.Random(seed)
    if max_edges < 1:
        raise ValueError("need at least one edge")
    internal = rng.randint(0, max_edges // 2)
    names = ["s"] + [f"v{j}" for j in range(1, internal + 1)] + ["t"]
    n = len(names)
    pairs = []
    for j in range(1, n - 1):
        pairs.append((rng.randrange(0, j), j))
    for j in range(0, n - 1):
        if not any(a == j for a, _ in pairs):
            pairs.append((j, rng.randrange(j + 1, n)))
    if not any(b == n - 1 for _, b in pairs):
        pairs.append((rng.randrange(0, n - 1), n - 1))
    target = rng.randint(len(pairs), max(len(pairs), max_edges))
    while len(pairs) < target:
        a = rng.randrange(0, n - 1)
        pairs.append((a, rng.randrange(a + 1, n)))
    rng.shuffle(pairs)
    edges = []
    for k, (a, b) in enumerate(pairs, 1):
        d = rng.randint(0, max_exponent)
        p = Fraction(rng.randint(0, 2**d), 2**d)
        edges.append(PertEdge(f"e{k}", names[a], names[b], p))
    return PertNetwork(tuple(names), tuple(edges), "s", "t")
