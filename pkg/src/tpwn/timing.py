"""Timestamps of token arrivals and their finite abstraction.

A time vector is a tuple with one entry per place (in ``net.places`` order).
Unmarked places hold :data:`BOTTOM`, which sorts below every time, is
absorbing under addition and fixed under :func:`ominus`.  Arithmetic below
never adds to ``BOTTOM`` because it only reads entries of marked presets.

Two routes compute the abstraction: :func:`nu` shifts the unbounded
timestamps of :func:`mu`, while :func:`nu_folded` applies
:func:`abstract_update` step by step.  The chain builder uses the latter;
the former is kept as an oracle.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence, Union

from .errors import NoEnabledTransition, NotEnabled, NotFirable, UnsafeFiring
from .net import MAX_TIME, WorkflowNet, bit_indices

BOTTOM = -1

TimeVector = tuple  # tuple[int, ...]; BOTTOM marks an absent token
VectorLike = Union[TimeVector, Mapping[str, int]]


def as_vector(net: WorkflowNet, x: VectorLike) -> TimeVector:
    if isinstance(x, Mapping):
        out = [BOTTOM] * len(net.places)
        for p, v in x.items():
            if v is None or v == BOTTOM:
                continue
            if v < 0:
                raise ValueError(f"negative time {v} for {p!r}")
            out[net.place_index[p]] = v
        return tuple(out)
    x = tuple(x)
    if len(x) != len(net.places):
        raise ValueError(f"time vector has {len(x)} entries, net has {len(net.places)} places")
    return x


def as_dict(net: WorkflowNet, x: TimeVector) -> dict[str, int]:
    """The marked entries of ``x`` keyed by place id."""
    return {net.places[k]: v for k, v in enumerate(x) if v != BOTTOM}


def format_vector(net: WorkflowNet, x: TimeVector) -> str:
    return "{" + ",".join(f"{p}:{v}" for p, v in as_dict(net, x).items()) + "}"


def support(x: TimeVector) -> int:
    m = 0
    for k, v in enumerate(x):
        if v != BOTTOM:
            m |= 1 << k
    return m


def initial_vector(net: WorkflowNet) -> TimeVector:
    x = [BOTTOM] * len(net.places)
    x[net.place_index[net.initial]] = 0
    return tuple(x)


def _upd(net: WorkflowNet, x: TimeVector, k: int) -> TimeVector:
    pre = net.pre_idx[k]
    start = max(x[q] for q in pre)
    arrival = start + net.durations[k]
    if arrival > MAX_TIME:
        raise OverflowError(f"timestamp exceeds 64 bits after {net.transitions[k].id!r}")
    out = list(x)
    for q in pre:
        out[q] = BOTTOM
    for q in net.post_idx[k]:
        out[q] = arrival
    return tuple(out)


def _shift(x: TimeVector, n: int) -> TimeVector:
    if n == 0:
        return x
    return tuple(v if v == BOTTOM else (v - n if v > n else 0) for v in x)


def _check_enabled(net: WorkflowNet, x: TimeVector, k: int) -> None:
    pre = net.pre_mask[k]
    m = support(x)
    if m & pre != pre:
        raise NotEnabled(net.transitions[k].id, net.marking(m))


def upd(net: WorkflowNet, x: VectorLike, t: str) -> TimeVector:
    """Fire ``t``: postset gets the latest preset arrival plus the duration."""
    x = as_vector(net, x)
    k = net.tidx(t)
    _check_enabled(net, x, k)
    return _upd(net, x, k)


def ominus(x: Sequence[int], n: int) -> TimeVector:
    """Subtract ``n`` from every marked entry, clamping at zero."""
    if n < 0:
        raise ValueError("shift must be non-negative")
    return _shift(tuple(x), n)


def _fold_mu(net: WorkflowNet, seq: Iterable[str]):
    """Yield (prefix_vector, transition index) pairs along ``seq``; returns final vector."""
    x = initial_vector(net)
    for pos, t in enumerate(seq):
        k = net.tidx(t)
        m = support(x)
        pre = net.pre_mask[k]
        if m & pre != pre:
            raise NotFirable(t, pos, net.marking(m))
        clash = m & net.post_mask[k] & ~pre
        if clash:
            raise UnsafeFiring(t, net.places[bit_indices(clash)[0]])
        yield x, k
        x = _upd(net, x, k)
    yield x, None


def mu(net: WorkflowNet, seq: Iterable[str]) -> TimeVector:
    """Token arrival times after firing ``seq`` from {i} at time 0."""
    for x, _ in _fold_mu(net, seq):
        pass
    return x


def time_of(net: WorkflowNet, seq: Iterable[str]) -> int:
    return max(0, max(mu(net, seq)))


def start_time(net: WorkflowNet, seq: Iterable[str], t: str) -> int:
    """Earliest time at which ``t`` can start after ``seq``."""
    x = mu(net, seq)
    k = net.tidx(t)
    _check_enabled(net, x, k)
    return max(x[q] for q in net.pre_idx[k])


def abstract_update(net: WorkflowNet, x: VectorLike, t: str) -> TimeVector:
    """upd followed by shifting the origin of time to the start of ``t``."""
    x = as_vector(net, x)
    k = net.tidx(t)
    _check_enabled(net, x, k)
    return _shift(_upd(net, x, k), max(x[q] for q in net.pre_idx[k]))


def nu(net: WorkflowNet, seq: Sequence[str]) -> TimeVector:
    """Finite abstraction computed from the unbounded timestamps (oracle route)."""
    prev = None
    for x, k in _fold_mu(net, seq):
        if k is None:
            if prev is None:
                return x
            return _shift(x, prev)
        prev = max(x[q] for q in net.pre_idx[k])
    raise AssertionError("unreachable")


def nu_folded(net: WorkflowNet, seq: Iterable[str]) -> TimeVector:
    """Finite abstraction computed by folding :func:`abstract_update`."""
    x = initial_vector(net)
    for pos, t in enumerate(seq):
        k = net.tidx(t)
        m = support(x)
        if m & net.pre_mask[k] != net.pre_mask[k]:
            raise NotFirable(t, pos, net.marking(m))
        x = _shift(_upd(net, x, k), max(x[q] for q in net.pre_idx[k]))
    return x


# -- scheduling on time vectors --------------------------------------------


def set_start(net: WorkflowNet, x: TimeVector, cmask: int) -> int:
    """Latest arrival over the preset of the conflict set ``cmask``."""
    pre_idx = net.pre_idx
    best = BOTTOM
    while cmask:
        low = cmask & -cmask
        for q in pre_idx[low.bit_length() - 1]:
            if x[q] > best:
                best = x[q]
        cmask ^= low
    return best


def ranked_conflict_sets(net: WorkflowNet, x: TimeVector) -> list[tuple[int, int]]:
    """(start, conflict-set mask) for every conflict set enabled at supp(x)."""
    return [(set_start(net, x, c), c) for c in net.conflict_masks(support(x))]


def _pick(candidates: list[int], tie_break: str) -> int:
    if tie_break == "least":
        return min(candidates, key=lambda c: (c & -c))
    if tie_break == "greatest":
        return max(candidates, key=lambda c: c.bit_length())
    raise ValueError(f"unknown tie-break rule {tie_break!r}")


def earliest_choice_mask(net: WorkflowNet, x: TimeVector, tie_break: str = "least") -> tuple[int, int]:
    """(reward, chosen conflict-set mask) of the earliest-first scheduler at ``x``."""
    ranked = ranked_conflict_sets(net, x)
    if not ranked:
        raise NoEnabledTransition(f"no transition enabled at {format_vector(net, x)}")
    r = min(s for s, _ in ranked)
    return r, _pick([c for s, c in ranked if s == r], tie_break)


def earliest_candidates(net: WorkflowNet, x: VectorLike) -> frozenset[frozenset[str]]:
    """All conflict sets achieving the minimal starting time at ``x``."""
    x = as_vector(net, x)
    ranked = ranked_conflict_sets(net, x)
    if not ranked:
        return frozenset()
    r = min(s for s, _ in ranked)
    return frozenset(net.transition_ids(c) for s, c in ranked if s == r)


def earliest_first_choice(
    net: WorkflowNet, x: VectorLike, tie_break: str = "least"
) -> frozenset[str]:
    """The conflict set an earliest-first scheduler fires next.

    Ties go to the set holding the lowest transition index (``"least"``) or
    the highest one (``"greatest"``).
    """
    _, c = earliest_choice_mask(net, as_vector(net, x), tie_break)
    return net.transition_ids(c)


def reward(net: WorkflowNet, x: VectorLike) -> int:
    """Earliest local starting time over the conflict sets enabled at ``x``."""
    r, _ = earliest_choice_mask(net, as_vector(net, x))
    return r
