"""Core data model for 1-safe workflow nets.

Place and transition ids are strings.  Internally every place gets a bit in
an integer mask and every transition a dense index, so markings of the hot
exploration loops are plain ints.  The public functions below speak in terms
of ids and ``frozenset`` markings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import NetDefinitionError, NotEnabled, UnsafeFiring

Marking = frozenset  # frozenset[str] of marked places

MAX_TIME = 2**63 - 1

WeightLike = Union[Fraction, int, str, Decimal]


def parse_rational(value: WeightLike) -> Fraction:
    """Convert ``"a/b"``, a decimal string, an int or a Decimal to an exact Fraction.

    Floats are rejected on purpose: they would smuggle binary rounding into
    weights that are meant to be exact.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise NetDefinitionError(f"refusing inexact rational {value!r}; pass a string")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, Decimal):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("%"):
            return parse_rational(text[:-1]) / 100
        try:
            if "/" in text:
                num, den = text.split("/")
                return Fraction(int(num), int(den))
            return Fraction(Decimal(text))
        except (ValueError, ZeroDivisionError, InvalidOperation, OverflowError):
            raise NetDefinitionError(f"not a rational number: {value!r}") from None
    raise NetDefinitionError(f"not a rational number: {value!r}")


@dataclass(frozen=True)
class Transition:
    id: str
    preset: frozenset[str]
    postset: frozenset[str]
    weight: Fraction = Fraction(1)
    duration: int = 0

    def __post_init__(self):
        object.__setattr__(self, "preset", frozenset(self.preset))
        object.__setattr__(self, "postset", frozenset(self.postset))
        object.__setattr__(self, "weight", parse_rational(self.weight))
        if self.weight <= 0:
            raise NetDefinitionError(f"transition {self.id!r}: weight must be positive")
        if isinstance(self.duration, bool) or not isinstance(self.duration, int):
            raise NetDefinitionError(f"transition {self.id!r}: duration must be an integer")
        if not 0 <= self.duration <= MAX_TIME:
            raise NetDefinitionError(
                f"transition {self.id!r}: duration must lie in [0, 2^63)"
            )
        if not self.preset:
            raise NetDefinitionError(f"transition {self.id!r}: empty preset")


@dataclass(frozen=True, eq=False)
class WorkflowNet:
    """A 1-safe workflow net with weights and durations on its transitions.

    The workflow shape (strong connectivity through ``o -> i``) is *not*
    enforced here; :func:`tpwn.structural.check_workflow_shape` reports it,
    so that broken nets can still be loaded and diagnosed.
    """

    places: tuple[str, ...]
    transitions: tuple[Transition, ...]
    initial: str
    final: str

    place_index: dict[str, int] = field(init=False, repr=False)
    transition_index: dict[str, int] = field(init=False, repr=False)
    pre_mask: tuple[int, ...] = field(init=False, repr=False)
    post_mask: tuple[int, ...] = field(init=False, repr=False)
    pre_idx: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    post_idx: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    dependents: tuple[tuple[int, ...], ...] = field(init=False, repr=False)
    durations: tuple[int, ...] = field(init=False, repr=False)
    weights: tuple[Fraction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        places = tuple(self.places)
        transitions = tuple(self.transitions)
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        if len(set(places)) != len(places):
            raise NetDefinitionError("duplicate place id")
        tids = [t.id for t in transitions]
        if len(set(tids)) != len(tids):
            raise NetDefinitionError("duplicate transition id")
        clash = set(places) & set(tids)
        if clash:
            raise NetDefinitionError(f"ids used for both a place and a transition: {sorted(clash)}")
        pidx = {p: k for k, p in enumerate(places)}
        for end in (self.initial, self.final):
            if end not in pidx:
                raise NetDefinitionError(f"unknown place {end!r}")
        if self.initial == self.final:
            raise NetDefinitionError("initial and final place must differ")
        for t in transitions:
            for p in t.preset | t.postset:
                if p not in pidx:
                    raise NetDefinitionError(f"transition {t.id!r} refers to unknown place {p!r}")

        pre_idx = tuple(tuple(sorted(pidx[p] for p in t.preset)) for t in transitions)
        post_idx = tuple(tuple(sorted(pidx[p] for p in t.postset)) for t in transitions)
        pre_mask = tuple(_mask(ix) for ix in pre_idx)
        post_mask = tuple(_mask(ix) for ix in post_idx)
        dependents = tuple(
            tuple(u for u in range(len(transitions)) if pre_mask[u] & pre_mask[k])
            for k in range(len(transitions))
        )
        object.__setattr__(self, "place_index", pidx)
        object.__setattr__(self, "transition_index", {t: k for k, t in enumerate(tids)})
        object.__setattr__(self, "pre_mask", pre_mask)
        object.__setattr__(self, "post_mask", post_mask)
        object.__setattr__(self, "pre_idx", pre_idx)
        object.__setattr__(self, "post_idx", post_idx)
        object.__setattr__(self, "dependents", dependents)
        object.__setattr__(self, "durations", tuple(t.duration for t in transitions))
        object.__setattr__(self, "weights", tuple(t.weight for t in transitions))

    # -- structural views -------------------------------------------------

    @property
    def arcs(self) -> set[tuple[str, str]]:
        arcs = set()
        for t in self.transitions:
            arcs.update((p, t.id) for p in t.preset)
            arcs.update((t.id, p) for p in t.postset)
        return arcs

    @property
    def max_duration(self) -> int:
        return max(self.durations, default=0)

    def transition(self, tid: str) -> Transition:
        try:
            return self.transitions[self.transition_index[tid]]
        except KeyError:
            raise KeyError(f"unknown transition {tid!r}") from None

    def place_postset(self, p: str) -> frozenset[str]:
        return frozenset(t.id for t in self.transitions if p in t.preset)

    def place_preset(self, p: str) -> frozenset[str]:
        return frozenset(t.id for t in self.transitions if p in t.postset)

    def without(self, *tids: str) -> WorkflowNet:
        """Copy of the net with the given transitions deleted."""
        for tid in tids:
            self.transition(tid)
        drop = set(tids)
        return WorkflowNet(
            self.places,
            tuple(t for t in self.transitions if t.id not in drop),
            self.initial,
            self.final,
        )

    def __eq__(self, other):
        if not isinstance(other, WorkflowNet):
            return NotImplemented
        return (
            self.places == other.places
            and self.transitions == other.transitions
            and self.initial == other.initial
            and self.final == other.final
        )

    def __hash__(self):
        return hash((self.places, self.transitions, self.initial, self.final))

    # -- marking conversion -----------------------------------------------

    def mask(self, marking: Iterable[str]) -> int:
        m = 0
        for p in marking:
            try:
                m |= 1 << self.place_index[p]
            except KeyError:
                raise KeyError(f"unknown place {p!r}") from None
        return m

    def marking(self, mask: int) -> Marking:
        places = self.places
        out = []
        k = 0
        while mask:
            if mask & 1:
                out.append(places[k])
            mask >>= 1
            k += 1
        return frozenset(out)

    @property
    def initial_mask(self) -> int:
        return 1 << self.place_index[self.initial]

    @property
    def final_mask(self) -> int:
        return 1 << self.place_index[self.final]

    def tidx(self, t: str) -> int:
        try:
            return self.transition_index[t]
        except KeyError:
            raise KeyError(f"unknown transition {t!r}") from None

    # -- mask-level primitives used by the exploration modules --------------

    def enabled_indices(self, mask: int) -> list[int]:
        return [k for k, pre in enumerate(self.pre_mask) if mask & pre == pre]

    def conflict_mask(self, mask: int, k: int) -> int:
        """C(t_k, M) as a bitmask over transition indices (t_k assumed enabled)."""
        pre_mask = self.pre_mask
        out = 1 << k
        for u in self.dependents[k]:
            if mask & pre_mask[u] == pre_mask[u]:
                out |= 1 << u
        return out

    def conflict_masks(self, mask: int) -> list[int]:
        """Distinct conflict sets at ``mask``, ordered by their least transition index."""
        seen = dict.fromkeys(self.conflict_mask(mask, k) for k in self.enabled_indices(mask))
        return sorted(seen, key=_lowest_bit)

    def transition_ids(self, tmask: int) -> frozenset[str]:
        out = []
        k = 0
        while tmask:
            if tmask & 1:
                out.append(self.transitions[k].id)
            tmask >>= 1
            k += 1
        return frozenset(out)


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for k in indices:
        m |= 1 << k
    return m


def _lowest_bit(m: int) -> int:
    return (m & -m).bit_length()


def bit_indices(m: int) -> list[int]:
    out = []
    k = 0
    while m:
        if m & 1:
            out.append(k)
        m >>= 1
        k += 1
    return out


def build_net(
    places: Iterable[str],
    transitions: Iterable[Mapping | Transition],
    initial: str = "i",
    final: str = "o",
) -> WorkflowNet:
    """Convenience constructor taking dicts with keys id/pre/post/weight/time."""
    records = []
    for t in transitions:
        if isinstance(t, Transition):
            records.append(t)
        else:
            records.append(
                Transition(
                    t["id"],
                    frozenset(t.get("pre", ())),
                    frozenset(t.get("post", ())),
                    parse_rational(t.get("weight", 1)),
                    t.get("time", 0),
                )
            )
    return WorkflowNet(tuple(places), tuple(records), initial, final)


# -- id-level operations -------------------------------------------------


def enabled_transitions(net: WorkflowNet, marking: Iterable[str]) -> frozenset[str]:
    m = net.mask(marking)
    return frozenset(net.transitions[k].id for k in net.enabled_indices(m))


def fire(net: WorkflowNet, marking: Iterable[str], t: str) -> Marking:
    """Fire ``t`` at ``marking``; raises if disabled or if 1-safety would break."""
    m = net.mask(marking)
    k = net.tidx(t)
    pre, post = net.pre_mask[k], net.post_mask[k]
    if m & pre != pre:
        raise NotEnabled(t, net.marking(m))
    clash = m & post & ~pre
    if clash:
        raise UnsafeFiring(t, sorted(net.marking(clash))[0])
    return net.marking((m & ~pre) | post)


def independent(net: WorkflowNet, t1: str, t2: str) -> bool:
    return not (net.pre_mask[net.tidx(t1)] & net.pre_mask[net.tidx(t2)])


def conflict_set(net: WorkflowNet, marking: Iterable[str], t: str) -> frozenset[str]:
    m = net.mask(marking)
    k = net.tidx(t)
    if m & net.pre_mask[k] != net.pre_mask[k]:
        raise NotEnabled(t, net.marking(m))
    return net.transition_ids(net.conflict_mask(m, k))


def conflict_sets(net: WorkflowNet, marking: Iterable[str]) -> frozenset[frozenset[str]]:
    m = net.mask(marking)
    return frozenset(net.transition_ids(c) for c in net.conflict_masks(m))
