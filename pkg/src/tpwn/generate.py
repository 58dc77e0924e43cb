"""Random sound free-choice nets built from nested blocks.

Each block connects an entry place to an exit place:

* task      one transition from entry to exit
* sequence  two blocks joined by a fresh middle place
* choice    two blocks sharing entry and exit
* loop      enter, body, exit, and a redo block from the body's end back to its start
* parallel  an AND-split into 2-4 branches and the matching join

Gluing these blocks keeps nets 1-safe, sound and free-choice, so every
output passes the structural gates without a search.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .net import Transition, WorkflowNet

BLOCKS = ("task", "sequence", "choice", "loop", "parallel")
DEFAULT_MIX = {"task": 2, "sequence": 3, "choice": 2, "loop": 1, "parallel": 2}
MIN_COST = {"task": 0, "sequence": 1, "choice": 0, "loop": 2, "parallel": 4}


def parse_range(text: str) -> tuple[int, int]:
    """``"lo:hi"`` or a single integer."""
    lo, _, hi = text.partition(":")
    lo_i = int(lo)
    hi_i = int(hi) if hi else lo_i
    if lo_i > hi_i:
        raise ValueError(f"empty range {text!r}")
    return lo_i, hi_i


@dataclass
class _Builder:
    rng: random.Random
    times: tuple[int, int]
    weights: tuple[int, int]
    mix: dict[str, float]
    max_branches: int
    places: list[str] = field(default_factory=lambda: ["i"])
    transitions: list[Transition] = field(default_factory=list)

    def place(self) -> str:
        p = f"p{len(self.places)}"
        self.places.append(p)
        return p

    def transition(self, pre, post) -> None:
        self.transitions.append(
            Transition(
                f"t{len(self.transitions) + 1}",
                frozenset(pre),
                frozenset(post),
                Fraction(self.rng.randint(*self.weights)),
                self.rng.randint(*self.times),
            )
        )

    def split(self, budget: int, parts: int) -> list[int]:
        cuts = sorted(self.rng.randint(0, budget) for _ in range(parts - 1))
        return [b - a for a, b in zip([0] + cuts, cuts + [budget])]

    def block(self, entry: str, exit_: str, budget: int, depth: int = 0) -> None:
        if budget == 0:
            # a choice without places only adds an alternative task
            kinds = ["task", "choice"] if depth < 3 and self.mix.get("choice", 0) > 0 else ["task"]
        else:
            kinds = [
                k for k in BLOCKS
                if k != "task" and MIN_COST[k] <= budget and self.mix.get(k, 0) > 0
            ] or ["sequence"]
        kind = self.rng.choices(kinds, [self.mix.get(k, 1) for k in kinds])[0]
        if kind == "task":
            self.transition([entry], [exit_])
        elif kind == "sequence":
            mid = self.place()
            a, b = self.split(budget - 1, 2)
            self.block(entry, mid, a, depth + 1)
            self.block(mid, exit_, b, depth + 1)
        elif kind == "choice":
            a, b = self.split(budget, 2)
            self.block(entry, exit_, a, depth + 1)
            self.block(entry, exit_, b, depth + 1)
        elif kind == "loop":
            start, end = self.place(), self.place()
            self.transition([entry], [start])
            body, redo = self.split(budget - 2, 2)
            if self.rng.random() < 0.7:
                body, redo = body + redo, 0
            self.block(start, end, body, depth + 1)
            self.transition([end], [exit_])
            self.block(end, start, redo, depth + 1)
        else:
            k = self.rng.randint(2, max(2, min(self.max_branches, budget // 2)))
            heads = [self.place() for _ in range(k)]
            tails = [self.place() for _ in range(k)]
            self.transition([entry], heads)
            for h, t, share in zip(heads, tails, self.split(budget - 2 * k, k)):
                self.block(h, t, share, depth + 1)
            self.transition(tails, [exit_])


def generate_random_net(
    places: int,
    seed: int,
    times: tuple[int, int] = (1, 1),
    weights: tuple[int, int] = (1, 1),
    mix: dict[str, float] | None = None,
    max_branches: int = 4,
) -> WorkflowNet:
    """A random sound, 1-safe, free-choice net with exactly ``places`` places.

    ``times`` and ``weights`` are inclusive integer ranges; ``mix`` gives the
    relative frequency of each block kind.  ``places = 2`` yields the net with
    a single transition from i to o.
    """
    if places < 2:
        raise ValueError("a workflow net needs at least the places i and o")
    if times[0] < 0 or times[0] > times[1]:
        raise ValueError(f"bad time range {times}")
    if weights[0] < 1 or weights[0] > weights[1]:
        raise ValueError(f"bad weight range {weights}")
    b = _Builder(random.Random(seed), times, weights, dict(mix or DEFAULT_MIX), max_branches)
    b.block("i", "o", places - 2)
    assert len(b.places) == places - 1
    return WorkflowNet(tuple(b.places + ["o"]), tuple(b.transitions), "i", "o")


def break_net(net: WorkflowNet, seed: int) -> tuple[WorkflowNet, str]:
    """Delete a transition that is the only consumer of its preset places.

    In a sound net every transition can fire; after deleting such a
    transition, the marking that enabled it stays reachable and its tokens
    can never leave, so the result is unsound.  Returns the net and the id.
    """
    rng = random.Random(seed)
    candidates = [
        t.id for t in net.transitions if all(net.place_postset(p) == {t.id} for p in t.preset)
    ]
    if not candidates:
        raise ValueError("no transition is the sole consumer of its preset")
    victim = rng.choice(candidates)
    return net.without(victim), victim
