"""Structural gates: workflow shape, 1-safeness, soundness, free-choice, confusion-freeness."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import StateExplosion, Unsafe1
from .net import Marking, WorkflowNet

DEFAULT_MARKING_CAP = 10**7


@dataclass
class ReachabilityGraph:
    """Reachable markings (as place bitmasks) in BFS order, with labelled edges."""

    net: WorkflowNet
    states: list[int]
    edges: list[tuple[int, str, int]]
    index: dict[int, int] = field(repr=False)
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def marking(self, k: int) -> Marking:
        return self.net.marking(self.states[k])

    def markings(self) -> list[Marking]:
        return [self.net.marking(m) for m in self.states]

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in self.states]
        for a, _, b in self.edges:
            succ[a].append(b)
        return succ

    def is_acyclic(self) -> bool:
        succ = self.successors()
        indeg = [0] * len(self.states)
        for a, _, b in self.edges:
            indeg[b] += 1
        todo = [k for k, d in enumerate(indeg) if d == 0]
        seen = 0
        while todo:
            k = todo.pop()
            seen += 1
            for b in succ[k]:
                indeg[b] -= 1
                if indeg[b] == 0:
                    todo.append(b)
        return seen == len(self.states)


@dataclass
class StructuralReport:
    is_workflow_shape: bool
    is_1safe: bool
    is_sound: bool
    is_free_choice: bool
    is_confusion_free: bool
    reachable_marking_count: int
    witness: str | None = None
    shape_problems: list[str] = field(default_factory=list)

    @property
    def is_tpwn(self) -> bool:
        """All gates a net must pass to be analysed (soundness included)."""
        return (
            self.is_workflow_shape
            and self.is_1safe
            and self.is_confusion_free
            and self.is_sound
        )

    def as_dict(self) -> dict:
        return {
            "workflow_shape": self.is_workflow_shape,
            "one_safe": self.is_1safe,
            "sound": self.is_sound,
            "free_choice": self.is_free_choice,
            "confusion_free": self.is_confusion_free,
            "reachable_markings": self.reachable_marking_count,
            "witness": self.witness,
            "shape_problems": list(self.shape_problems),
        }

    def render(self) -> str:
        def yn(b):
            return "yes" if b else "no"

        lines = [
            f"workflow shape:    {yn(self.is_workflow_shape)}",
            f"1-safe:            {yn(self.is_1safe)}",
            f"free-choice:       {yn(self.is_free_choice)}",
            f"confusion-free:    {yn(self.is_confusion_free)}",
            f"sound:             {yn(self.is_sound)}",
            f"reachable markings: {self.reachable_marking_count}",
        ]
        lines += [f"  shape: {p}" for p in self.shape_problems]
        if self.witness:
            lines.append(f"witness: {self.witness}")
        return "\n".join(lines)


def check_workflow_shape(net: WorkflowNet) -> tuple[bool, list[str]]:
    """True iff i has no input, o no output, and the net plus (o, i) is strongly connected."""
    problems = []
    if net.place_preset(net.initial):
        problems.append(f"initial place {net.initial!r} has incoming arcs")
    if net.place_postset(net.final):
        problems.append(f"final place {net.final!r} has outgoing arcs")

    succ: dict[str, set[str]] = {n: set() for n in net.places}
    succ.update({t.id: set() for t in net.transitions})
    for a, b in net.arcs:
        succ[a].add(b)
    succ[net.final].add(net.initial)
    pred: dict[str, set[str]] = {n: set() for n in succ}
    for a, bs in succ.items():
        for b in bs:
            pred[b].add(a)

    def reach(adj):
        seen = {net.initial}
        todo = [net.initial]
        while todo:
            for b in adj[todo.pop()]:
                if b not in seen:
                    seen.add(b)
                    todo.append(b)
        return seen

    fwd, bwd = reach(succ), reach(pred)
    missing = sorted(n for n in succ if n not in fwd or n not in bwd)
    if missing:
        problems.append("not strongly connected via (o, i); off-cycle nodes: " + ", ".join(missing))
    return not problems, problems


def explore(net: WorkflowNet, max_states: int = DEFAULT_MARKING_CAP) -> ReachabilityGraph:
    """Breadth-first reachability graph from {i}; transitions tried in declaration order."""
    pre_mask, post_mask = net.pre_mask, net.post_mask
    tids = [t.id for t in net.transitions]
    order = range(len(tids))
    start = net.initial_mask
    states = [start]
    index = {start: 0}
    parent: list[tuple[int, int] | None] = [None]
    edges = []
    queue = deque([0])
    while queue:
        a = queue.popleft()
        m = states[a]
        for k in order:
            pre = pre_mask[k]
            if m & pre != pre:
                continue
            post = post_mask[k]
            clash = m & post & ~pre
            if clash:
                witness = _path(parent, a, tids) + [tids[k]]
                place = sorted(net.marking(clash & -clash))[0]
                raise Unsafe1(witness, place)
            m2 = (m & ~pre) | post
            b = index.get(m2)
            if b is None:
                b = len(states)
                if b >= max_states:
                    raise StateExplosion("reachability graph", max_states)
                index[m2] = b
                states.append(m2)
                parent.append((a, k))
                queue.append(b)
            edges.append((a, tids[k], b))
    return ReachabilityGraph(net, states, edges, index)


def _path(parent, b, tids) -> list[str]:
    seq = []
    while parent[b] is not None:
        a, k = parent[b]
        seq.append(tids[k])
        b = a
    return seq[::-1]


def firing_path(rg: ReachabilityGraph, target: int) -> list[str]:
    """A shortest firing sequence from the initial marking to state ``target``."""
    parent: dict[int, tuple[int, str] | None] = {rg.initial: None}
    queue = deque([rg.initial])
    succ: list[list[tuple[str, int]]] = [[] for _ in rg.states]
    for a, t, b in rg.edges:
        succ[a].append((t, b))
    while queue and target not in parent:
        a = queue.popleft()
        for t, b in succ[a]:
            if b not in parent:
                parent[b] = (a, t)
                queue.append(b)
    seq = []
    node = target
    while parent[node] is not None:
        a, t = parent[node]
        seq.append(t)
        node = a
    return seq[::-1]


def check_soundness(net: WorkflowNet, rg: ReachabilityGraph) -> tuple[bool, Marking | None]:
    """Sound iff {o} is reachable from every reachable marking.

    Returns the verdict and, when unsound, a marking from which {o} cannot be
    reached (a dead marking if there is one).
    """
    final = net.final_mask
    n = len(rg.states)
    pred: list[list[int]] = [[] for _ in range(n)]
    out_deg = [0] * n
    for a, _, b in rg.edges:
        pred[b].append(a)
        out_deg[a] += 1
    good = [False] * n
    target = rg.index.get(final)
    if target is not None:
        good[target] = True
        todo = [target]
        while todo:
            for a in pred[todo.pop()]:
                if not good[a]:
                    good[a] = True
                    todo.append(a)
    bad = [k for k in range(n) if not good[k]]
    if not bad:
        return True, None
    dead = [k for k in bad if out_deg[k] == 0]
    return False, rg.marking((dead or bad)[0])


def check_free_choice(net: WorkflowNet) -> bool:
    posts = [net.place_postset(p) for p in net.places]
    for a in range(len(posts)):
        for b in range(a + 1, len(posts)):
            if posts[a] & posts[b] and posts[a] != posts[b]:
                return False
    return True


def check_confusion_free(
    net: WorkflowNet, rg: ReachabilityGraph
) -> tuple[bool, tuple[Marking, str, str] | None]:
    """Check C(u,M) = C(u, M - pre t) = C(u, (M - pre t) + post t) for concurrent t, u.

    The witness is ``(M, t, u)``: firing ``t`` at ``M`` alters the conflict set of ``u``.
    """
    pre_mask, post_mask = net.pre_mask, net.post_mask
    for m in rg.states:
        enabled = net.enabled_indices(m)
        if len(enabled) < 2:
            continue
        for u in enabled:
            cu = net.conflict_mask(m, u)
            for t in enabled:
                if pre_mask[t] & pre_mask[u]:
                    continue
                m1 = m & ~pre_mask[t]
                m2 = m1 | post_mask[t]
                if net.conflict_mask(m1, u) != cu or net.conflict_mask(m2, u) != cu:
                    tids = net.transitions
                    return False, (net.marking(m), tids[t].id, tids[u].id)
    return True, None


def analyze_structure(net: WorkflowNet, max_states: int = DEFAULT_MARKING_CAP) -> StructuralReport:
    """Run every gate and collect the verdicts.

    A non-1-safe net is reported (not raised); the remaining behavioural checks
    are then meaningless and reported as failed.
    """
    shape, problems = check_workflow_shape(net)
    free_choice = check_free_choice(net)
    try:
        rg = explore(net, max_states)
    except Unsafe1 as exc:
        # confusion-freeness is only defined for 1-safe nets; report the
        # structural implication from free-choice rather than a verdict
        return StructuralReport(
            shape, False, False, free_choice, free_choice, 0,
            witness=f"firing {' '.join(exc.witness)} puts a second token on {exc.place}",
            shape_problems=problems,
        )
    cf, cf_witness = check_confusion_free(net, rg)
    sound, stuck = check_soundness(net, rg)
    witness = None
    if not sound:
        witness = "final marking unreachable from " + format_marking(stuck)
    elif not cf:
        m, t, u = cf_witness
        witness = f"at {format_marking(m)} firing {t} changes the conflict set of {u}"
    return StructuralReport(shape, True, sound, free_choice, cf, len(rg), witness, problems)


def format_marking(m) -> str:
    return "{" + ",".join(sorted(m)) + "}"
