"""Markov chain of the earliest-first scheduler and its exact expected time.

States are abstract time vectors (see :mod:`tpwn.timing`).  Each non-final
state fires one conflict set, picked by the earliest-first rule, and moves
to ``f(x, t)`` with probability ``w(t)/w(C)``.  The expected time is the
value at the initial state of the reward equations

    X_x = r(x) + sum_t  w(t)/w(C_x) * X_f(x,t)      (x non-final)
    X_x = max_p x_p                                (supp x = {o})
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import Deadlock, NotConfusionFree, Singular, StateExplosion, UnsafeFiring
from .net import WorkflowNet, bit_indices
from .structural import (
    DEFAULT_MARKING_CAP,
    StructuralReport,
    check_confusion_free,
    check_free_choice,
    check_soundness,
    check_workflow_shape,
    explore,
    firing_path,
    format_marking,
)
from .timing import (
    _shift,
    _upd,
    as_dict,
    as_vector,
    earliest_choice_mask,
    format_vector,
    initial_vector,
    support,
)

DEFAULT_CHAIN_CAP = 10**6

INFINITE = math.inf

Value = Union[Fraction, float]


@dataclass
class SchedulerChain:
    """Finite chain induced by the earliest-first scheduler.

    ``successors[k]`` lists ``(transition id, probability, target index)``;
    it is empty for final states, whose value sits in ``terminal``.
    """

    net: WorkflowNet
    states: list[tuple]
    index: dict[tuple, int] = field(repr=False)
    rewards: list[int | None] = field(repr=False)
    choices: list[frozenset[str] | None] = field(repr=False)
    successors: list[list[tuple[str, Fraction, int]]] = field(repr=False)
    terminal: dict[int, int] = field(repr=False)
    tie_break: str = "least"
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def is_final(self, k: int) -> bool:
        return k in self.terminal

    def state(self, k: int) -> dict[str, int]:
        return as_dict(self.net, self.states[k])

    def label(self, k: int) -> str:
        return format_vector(self.net, self.states[k])

    def find(self, x) -> int:
        """Index of the state given as a place -> time mapping."""
        return self.index[as_vector(self.net, x)]


def build_chain(
    net: WorkflowNet, tie_break: str = "least", max_states: int = DEFAULT_CHAIN_CAP
) -> SchedulerChain:
    """Worklist closure from {i:0} under the earliest-first scheduler.

    Assumes the net is 1-safe, confusion-free and sound; a non-final state
    without enabled transitions raises :class:`Deadlock`.
    """
    final = net.final_mask
    weights, pre_mask, post_mask = net.weights, net.pre_mask, net.post_mask
    tids = [t.id for t in net.transitions]
    start = initial_vector(net)
    states = [start]
    index = {start: 0}
    rewards: list[int | None] = []
    choices: list[frozenset[str] | None] = []
    successors: list[list[tuple[str, Fraction, int]]] = []
    terminal: dict[int, int] = {}
    queue = deque([0])
    while queue:
        a = queue.popleft()
        x = states[a]
        m = support(x)
        if m == final:
            terminal[a] = max(x)
            rewards.append(None)
            choices.append(None)
            successors.append([])
            continue
        enabled = net.enabled_indices(m)
        if not enabled:
            raise Deadlock(net.marking(m))
        r, cmask = earliest_choice_mask(net, x, tie_break)
        members = bit_indices(cmask)
        total = sum(weights[k] for k in members)
        out = []
        for k in members:
            clash = m & post_mask[k] & ~pre_mask[k]
            if clash:
                raise UnsafeFiring(tids[k], net.places[bit_indices(clash)[0]])
            y = _shift(_upd(net, x, k), r)
            b = index.get(y)
            if b is None:
                b = len(states)
                if b >= max_states:
                    raise StateExplosion("scheduler chain", max_states)
                index[y] = b
                states.append(y)
                queue.append(b)
            out.append((tids[k], weights[k] / total, b))
        rewards.append(r)
        choices.append(net.transition_ids(cmask))
        successors.append(out)
    return SchedulerChain(net, states, index, rewards, choices, successors, terminal, tie_break)


# -- linear system ---------------------------------------------------------


@dataclass
class LinearSystem:
    """``X_k = rhs[k] + sum_j coeffs[k][j] * X_j`` for every state ``k``.

    Parallel edges to the same target are merged; final rows have no coefficients.
    """

    rhs: list[Fraction]
    coeffs: list[dict[int, Fraction]]

    def __len__(self):
        return len(self.rhs)

    def equation(self, k: int) -> tuple[Fraction, dict[int, Fraction]]:
        return self.rhs[k], self.coeffs[k]


def assemble_system(chain: SchedulerChain) -> LinearSystem:
    rhs = []
    coeffs = []
    for k in range(len(chain)):
        if chain.is_final(k):
            rhs.append(Fraction(chain.terminal[k]))
            coeffs.append({})
            continue
        row: dict[int, Fraction] = {}
        for _, p, b in chain.successors[k]:
            row[b] = row.get(b, 0) + p
        rhs.append(Fraction(chain.rewards[k]))
        coeffs.append(row)
    return LinearSystem(rhs, coeffs)


def _sccs(coeffs: list[dict[int, Fraction]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out sinks first."""
    n = len(coeffs)
    order = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out = []
    counter = 0
    for root in range(n):
        if order[root] != -1:
            continue
        work = [(root, iter(coeffs[root]))]
        order[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, it = work[-1]
            for w in it:
                if order[w] == -1:
                    order[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, iter(coeffs[w])))
                    break
                if on_stack[w] and order[w] < low[v]:
                    low[v] = order[w]
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == order[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def _size(q: Fraction) -> int:
    return q.numerator.bit_length() + q.denominator.bit_length()


def _solve_block(rows: list[dict[int, Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve ``A X = rhs`` for a small sparse square system by exact elimination.

    Pivots favour short rows and then small entries, which keeps fill-in and
    coefficient growth down.
    """
    n = len(rhs)
    col_rows: dict[int, set[int]] = {c: set() for c in range(n)}
    for r, row in enumerate(rows):
        for c in row:
            col_rows[c].add(r)
    remaining = set(range(n))
    pivots: list[tuple[int, int]] = []
    for col in range(n):
        cands = col_rows[col] & remaining
        if not cands:
            raise Singular("linear system is singular; the net is probably unsound")
        piv = min(cands, key=lambda r: (len(rows[r]), _size(rows[r][col]), r))
        remaining.discard(piv)
        prow = rows[piv]
        pval = prow[col]
        for r in cands:
            if r == piv:
                continue
            row = rows[r]
            factor = row[col] / pval
            for c, v in prow.items():
                nv = row.get(c, 0) - factor * v
                if nv:
                    if c not in row:
                        col_rows[c].add(r)
                    row[c] = nv
                elif c in row:
                    del row[c]
                    col_rows[c].discard(r)
            rhs[r] -= factor * rhs[piv]
        pivots.append((col, piv))
    x: list[Fraction] = [Fraction(0)] * n
    for col, piv in reversed(pivots):
        row = rows[piv]
        acc = rhs[piv]
        for c, v in row.items():
            if c != col:
                acc -= v * x[c]
        x[col] = acc / row[col]
    return x


def solve_exact(system: LinearSystem) -> list[Fraction]:
    """Exact solution, one strongly connected component at a time."""
    n = len(system)
    x: list[Fraction | None] = [None] * n
    for comp in _sccs(system.coeffs):
        if len(comp) == 1:
            k = comp[0]
            row = system.coeffs[k]
            acc = system.rhs[k]
            self_p = Fraction(0)
            for j, p in row.items():
                if j == k:
                    self_p = p
                else:
                    acc += p * x[j]
            if self_p == 1:
                raise Singular(f"state {k} loops on itself with probability 1")
            x[k] = acc / (1 - self_p) if self_p else acc
            continue
        local = {k: a for a, k in enumerate(comp)}
        rows = []
        rhs = []
        for k in comp:
            row = {local[k]: Fraction(1)}
            acc = system.rhs[k]
            for j, p in system.coeffs[k].items():
                a = local.get(j)
                if a is None:
                    acc += p * x[j]
                else:
                    nv = row.get(a, 0) - p
                    if nv:
                        row[a] = nv
                    else:
                        row.pop(a, None)
            rows.append(row)
            rhs.append(acc)
        for k, v in zip(comp, _solve_block(rows, rhs)):
            x[k] = v
    return x  # type: ignore[return-value]


def residuals(system: LinearSystem, x: list[Fraction]) -> list[Fraction]:
    """``rhs + sum coeff * X_j - X_k`` per equation; exactly zero for a solution."""
    return [
        system.rhs[k] + sum((p * x[j] for j, p in system.coeffs[k].items()), Fraction(0)) - x[k]
        for k in range(len(system))
    ]


# -- pipeline --------------------------------------------------------------


@dataclass
class Analysis:
    net: WorkflowNet
    value: Value
    report: StructuralReport | None = None
    chain: SchedulerChain | None = None
    system: LinearSystem | None = None
    solution: list[Fraction] | None = None
    witness: str | None = None
    construction_ms: float = 0.0
    solving_ms: float = 0.0

    @property
    def is_infinite(self) -> bool:
        return self.value == INFINITE

    @property
    def chain_states(self) -> int:
        return len(self.chain) if self.chain is not None else 0


def _gates(net: WorkflowNet, max_markings: int) -> tuple[StructuralReport, str | None]:
    shape, problems = check_workflow_shape(net)
    rg = explore(net, max_markings)
    cf, cf_witness = check_confusion_free(net, rg)
    if not cf:
        raise NotConfusionFree(*cf_witness)
    sound, stuck = check_soundness(net, rg)
    witness = None
    if not sound:
        path = firing_path(rg, rg.index[net.mask(stuck)])
        witness = (
            f"final marking unreachable from {format_marking(stuck)}"
            f" (reached by {' '.join(path) or 'the empty sequence'})"
        )
    report = StructuralReport(
        shape, True, sound, check_free_choice(net), True, len(rg), witness, problems
    )
    return report, witness


def analyze(
    net: WorkflowNet,
    assume_sound: bool = False,
    max_states: int = DEFAULT_CHAIN_CAP,
    max_markings: int = DEFAULT_MARKING_CAP,
    tie_break: str = "least",
) -> Analysis:
    """Full pipeline: structural gates, chain construction, exact solve.

    Unsound nets yield an infinite value and a witness.  Non-1-safe and
    confused nets raise, since no number would be meaningful for them.
    ``assume_sound`` skips the gates (and the reachability graph).
    """
    report = None
    if not assume_sound:
        report, witness = _gates(net, max_markings)
        if not report.is_sound:
            return Analysis(net, INFINITE, report, witness=witness)
    t0 = time.perf_counter()
    chain = build_chain(net, tie_break, max_states)
    system = assemble_system(chain)
    t1 = time.perf_counter()
    solution = solve_exact(system)
    t2 = time.perf_counter()
    return Analysis(
        net,
        solution[chain.initial],
        report,
        chain,
        system,
        solution,
        construction_ms=(t1 - t0) * 1e3,
        solving_ms=(t2 - t1) * 1e3,
    )


def expected_time(net: WorkflowNet, **kwargs) -> Value:
    """Exact expected time as a Fraction, or ``math.inf`` for unsound nets."""
    return analyze(net, **kwargs).value


def chain_to_dot(chain: SchedulerChain, name: str = "chain") -> str:
    lines = [f"digraph {name} {{", "  node [shape=box];"]
    for k in range(len(chain)):
        label = chain.label(k)
        if chain.is_final(k):
            label += f" value={chain.terminal[k]}"
            lines.append(f'  s{k} [label="{label}", peripheries=2];')
        else:
            lines.append(f'  s{k} [label="{label} r={chain.rewards[k]}"];')
    for k, out in enumerate(chain.successors):
        for t, p, b in out:
            lines.append(f'  s{k} -> s{b} [label="{t} {p}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
