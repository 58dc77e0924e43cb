"""Nets shared by the test modules."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from tpwn import build_net
from tpwn.pert import pert

DATA = Path(__file__).parent / "data"


def example_net():
    return build_net(
        ["i", "p1", "p2", "p3", "p4", "o"],
        [
            dict(id="t1", pre=["i"], post=["p1", "p3"], time=1),
            dict(id="t2", pre=["p1"], post=["p1"], time=4, weight=1),
            dict(id="t3", pre=["p1"], post=["p2"], time=2, weight=4),
            dict(id="t4", pre=["p3"], post=["p4"], time=5),
            dict(id="t5", pre=["p2", "p4"], post=["o"], time=3),
        ],
    )


def trivial_net(time=7):
    return build_net(["i", "o"], [dict(id="t", pre=["i"], post=["o"], time=time)])


def _untimed(triples):
    places = sorted({p for _, a, b in triples for p in a + b}, key=lambda p: (p != "i", p == "o", p))
    return build_net(places, [dict(id=t, pre=a, post=b) for t, a, b in triples])


def n1_net():
    return _untimed([
        ("t1", ["i"], ["p1", "p2"]),
        ("t2", ["p1"], ["p3"]),
        ("t3", ["p1", "p2"], ["p3", "p4"]),
        ("t4", ["p2"], ["p4"]),
        ("t5", ["p3"], ["p3"]),
        ("t6", ["p3", "p4"], ["o"]),
    ])


def n2_net():
    return _untimed([
        ("t1", ["i"], ["p1", "p2"]),
        ("t2", ["p1"], ["p3"]),
        ("t3", ["p1"], ["p1"]),
        ("t4", ["p2"], ["p2"]),
        ("t5", ["p2", "p3"], ["o"]),
    ])


def n3_net():
    return _untimed([
        ("t1", ["i"], ["p1", "p3"]),
        ("t2", ["i"], ["p1", "p2"]),
        ("t3", ["p1"], ["p4"]),
        ("t5", ["p3", "p4"], ["o"]),
        ("t6", ["p2", "p4"], ["o"]),
    ])


def n4_net():
    return _untimed([
        ("t1", ["i"], ["p1"]),
        ("t2", ["i"], ["p2", "p3"]),
        ("t3", ["p2"], ["p4"]),
        ("t4", ["p3"], ["p5"]),
        ("t5", ["p4", "p5"], ["p2", "p3"]),
        ("t6", ["p1"], ["o"]),
        ("t7", ["p4", "p5"], ["o"]),
    ])


def seven_edge_pert(p=Fraction(1, 2)):
    return pert(
        ["s", "v1", "v2", "v3", "v4", "t"],
        [
            ("e1", "s", "v1", p),
            ("e2", "s", "v2", p),
            ("e3", "v1", "v3", p),
            ("e4", "v1", "v4", p),
            ("e5", "v2", "v4", p),
            ("e6", "v3", "t", p),
            ("e7", "v4", "t", p),
        ],
    )


def compatible_sequences(net, max_len, rule="earliest"):
    """All earliest-first compatible firing sequences up to ``max_len``, with their mu vectors.

    Every minimizing conflict set is followed, not just the tie-broken one.
    """
    from tpwn.timing import earliest_candidates, initial_vector, upd

    out = []
    stack = [((), initial_vector(net))]
    while stack:
        seq, x = stack.pop()
        out.append(seq)
        if len(seq) == max_len:
            continue
        for cset in earliest_candidates(net, x):
            for t in sorted(cset):
                stack.append((seq + (t,), upd(net, x, t)))
    return out


def random_walk(net, rng, max_len):
    """A random occurrence sequence from {i}, stopping at a dead marking or ``max_len``."""
    from tpwn.net import bit_indices

    m = net.initial_mask
    seq = []
    while len(seq) < max_len:
        enabled = net.enabled_indices(m)
        if not enabled:
            break
        k = rng.choice(enabled)
        seq.append(net.transitions[k].id)
        m = (m & ~net.pre_mask[k]) | net.post_mask[k]
    assert all(b < len(net.places) for b in bit_indices(m))
    return seq


def check_abstraction(net, max_len):
    """Check the four abstraction properties on every compatible prefix; returns the count."""
    from tpwn.timing import earliest_candidates, mu, nu, nu_folded, reward, time_of

    bound = net.max_duration
    count = 0
    for seq in compatible_sequences(net, max_len):
        x = nu(net, seq)
        assert x == nu_folded(net, seq), seq
        assert earliest_candidates(net, mu(net, seq)) == earliest_candidates(net, x), seq
        assert all(v <= bound for v in x), seq
        total = sum(reward(net, nu(net, seq[:k])) for k in range(len(seq)))
        assert time_of(net, seq) == max(x) + total, seq
        count += 1
    return count


def check_partition(net):
    """Conflict sets at every reachable marking partition the enabled transitions."""
    from tpwn import explore

    graph = explore(net)
    for m in graph.states:
        enabled = net.enabled_indices(m)
        sets = net.conflict_masks(m)
        union = 0
        for c in sets:
            assert union & c == 0
            union |= c
        assert union == sum(1 << k for k in enabled)
        for k in enabled:
            assert net.conflict_mask(m, k) in sets
    return len(graph)


def check_uniform_start(net, seq):
    """Within every enabled conflict set after each prefix, all start times agree."""
    from tpwn import conflict_sets
    from tpwn.timing import mu, start_time, support

    for n in range(len(seq) + 1):
        prefix = seq[:n]
        marking = net.marking(support(mu(net, prefix)))
        for cset in conflict_sets(net, marking):
            assert len({start_time(net, prefix, t) for t in cset}) == 1, (prefix, cset)


def check_monotone_starts(net, max_len):
    from tpwn.timing import start_time

    for seq in compatible_sequences(net, max_len):
        starts = [start_time(net, seq[:k], t) for k, t in enumerate(seq)]
        assert starts == sorted(starts), seq
