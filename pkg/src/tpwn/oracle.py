"""Reference engines used to cross-check the chain solver.

* :func:`enumerate_expected_time` walks the tree of scheduler-compatible
  firing sequences on the unbounded timestamps, summing time times probability.
* :func:`simulate` samples runs under a uniformly random conflict-set
  scheduler with numpy's PCG64 generator.
* :func:`mazurkiewicz_swaps` produces equivalent runs by swapping adjacent
  independent transitions.

None of these share code with :mod:`tpwn.chain` beyond the net model and
the plain timestamp update.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import NonTermination, NotFirable, UnsafeFiring
from .net import WorkflowNet, bit_indices
from .timing import _upd, initial_vector, set_start

SCHEDULERS = ("earliest", "leftmost", "rightmost")
DEFAULT_DEPTH_CAP = 10_000
DEFAULT_STEP_CAP = 10**6


@dataclass(frozen=True)
class WeightedRun:
    sequence: tuple[str, ...]
    probability: Fraction
    time: int


@dataclass
class EnumerationResult:
    """Accumulated ``sum time * probability`` over the completed runs.

    ``value`` is a lower bound on the expected time unless ``exact``.
    ``truncated_mass`` went to branches pruned below the mass threshold,
    ``stuck_mass`` to branches ending in a non-final dead marking.
    """

    value: Fraction
    covered_mass: Fraction
    truncated_mass: Fraction
    stuck_mass: Fraction
    runs_explored: int
    runs: list[WeightedRun] = field(default_factory=list, repr=False)

    @property
    def exact(self) -> bool:
        return self.covered_mass == 1

    @property
    def lower(self) -> Fraction:
        return self.value


def _choose(net: WorkflowNet, m: int, x: tuple, rule: str) -> int:
    sets = net.conflict_masks(m)
    if rule == "earliest":
        best = min(set_start(net, x, c) for c in sets)
        return next(c for c in sets if set_start(net, x, c) == best)
    if rule == "leftmost":
        return sets[0]
    if rule == "rightmost":
        return max(sets, key=lambda c: c.bit_length())
    raise ValueError(f"unknown scheduler {rule!r}; expected one of {SCHEDULERS}")


def enumerate_expected_time(
    net: WorkflowNet,
    scheduler: str = "earliest",
    mass_epsilon: Fraction | int | str = 0,
    depth_cap: int = DEFAULT_DEPTH_CAP,
    collect_runs: bool = False,
) -> EnumerationResult:
    """Depth-first enumeration of the runs compatible with ``scheduler``.

    Branches whose probability drops below ``mass_epsilon`` are pruned and
    their mass reported as truncated.  With ``mass_epsilon = 0`` the walk
    must terminate on its own, so a branch deeper than ``depth_cap``
    raises :class:`NonTermination` (cyclic or unsound nets).
    """
    if scheduler not in SCHEDULERS:
        raise ValueError(f"unknown scheduler {scheduler!r}; expected one of {SCHEDULERS}")
    eps = Fraction(mass_epsilon)
    final = net.final_mask
    weights, pre_mask, post_mask = net.weights, net.pre_mask, net.post_mask
    tids = [t.id for t in net.transitions]

    value = Fraction(0)
    covered = Fraction(0)
    truncated = Fraction(0)
    stuck = Fraction(0)
    count = 0
    runs: list[WeightedRun] = []

    # (marking, timestamps, probability, sequence so far)
    stack: list[tuple[int, tuple, Fraction, tuple]] = [
        (net.initial_mask, initial_vector(net), Fraction(1), ())
    ]
    while stack:
        m, x, prob, seq = stack.pop()
        if m == final:
            t = max(x)
            value += t * prob
            covered += prob
            count += 1
            if collect_runs:
                runs.append(WeightedRun(seq, prob, t))
            continue
        if not net.enabled_indices(m):
            stuck += prob
            continue
        if eps and prob < eps:
            truncated += prob
            continue
        if len(seq) >= depth_cap:
            if eps:
                truncated += prob
                continue
            raise NonTermination(f"run longer than {depth_cap} transitions; net cyclic or unsound")
        c = _choose(net, m, x, scheduler)
        members = bit_indices(c)
        total = sum(weights[k] for k in members)
        for k in reversed(members):
            clash = m & post_mask[k] & ~pre_mask[k]
            if clash:
                raise UnsafeFiring(tids[k], net.places[bit_indices(clash)[0]])
            m2 = (m & ~pre_mask[k]) | post_mask[k]
            stack.append((m2, _upd(net, x, k), prob * weights[k] / total, seq + (tids[k],)))
    return EnumerationResult(value, covered, truncated, stuck, count, runs)


# -- Monte Carlo -----------------------------------------------------------


@dataclass
class SimulationResult:
    mean: float
    std_error: float
    runs: int
    failed: int
    total: int = field(repr=False, default=0)
    total_sq: int = field(repr=False, default=0)

    @property
    def exact_mean(self) -> Fraction:
        return Fraction(self.total, self.runs) if self.runs else Fraction(0)


class _Sampler:
    """Vectorised lockstep simulation of many runs of one net."""

    def __init__(self, net: WorkflowNet, step_cap: int):
        self.net = net
        self.step_cap = step_cap
        n_t = len(net.transitions)
        self.pre = [np.array(ix, dtype=np.intp) for ix in net.pre_idx]
        self.post = [np.array(ix, dtype=np.intp) for ix in net.post_idx]
        self.tau = np.array(net.durations, dtype=np.int64)
        dep = np.zeros((n_t, n_t), dtype=bool)
        for k, us in enumerate(net.dependents):
            dep[k, list(us)] = True
        self.dep = dep
        self.lower_dep = [np.array([u for u in net.dependents[k] if u < k], dtype=np.intp)
                          for k in range(n_t)]
        scale = math.lcm(*(w.denominator for w in net.weights)) if n_t else 1
        self.int_weight = [int(w * scale) for w in net.weights]
        self.final = net.place_index[net.final]
        self._thresholds: dict[tuple[int, ...], np.ndarray] = {}

    def thresholds(self, members: tuple[int, ...]) -> np.ndarray:
        # u/2^64 < cum/W  <=>  u < ceil(cum * 2^64 / W) for integer u
        th = self._thresholds.get(members)
        if th is None:
            ws = [self.int_weight[k] for k in members]
            total = sum(ws)
            cum = 0
            out = []
            for w in ws[:-1]:
                cum += w
                out.append(min(-(-(cum << 64) // total), 2**64 - 1))
            th = np.array(out, dtype=np.uint64)
            self._thresholds[members] = th
        return th

    @staticmethod
    def _group_patterns(block: np.ndarray, cols: np.ndarray, g: np.ndarray):
        """Split the runs ``g`` by which of ``cols`` they enable."""
        if len(cols) <= 16:
            codes = block.astype(np.int64) @ (1 << np.arange(len(cols), dtype=np.int64))
            for code in np.nonzero(np.bincount(codes))[0]:
                members = tuple(int(c) for b, c in enumerate(cols) if code >> b & 1)
                yield members, g[codes == code]
            return
        patterns, inverse = np.unique(block, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for pi, pat in enumerate(patterns):
            yield tuple(int(c) for c in cols[pat]), g[inverse == pi]

    def run_batch(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
        """Completion times of the runs that reached {o}, and the number that failed."""
        net = self.net
        n_p, n_t = len(net.places), len(net.transitions)
        marked = np.zeros((n, n_p), dtype=bool)
        times = np.zeros((n, n_p), dtype=np.int64)
        marked[:, net.place_index[net.initial]] = True
        done: list[np.ndarray] = []
        failed = 0
        only_final = np.zeros(n_p, dtype=bool)
        only_final[self.final] = True
        for _ in range(self.step_cap + 1):
            if not len(marked):
                break
            is_final = (marked == only_final).all(axis=1)
            if is_final.any():
                done.append(np.where(marked[is_final], times[is_final], -1).max(axis=1))
                keep = ~is_final
                marked, times = marked[keep], times[keep]
                if not len(marked):
                    break
            enabled = np.empty((len(marked), n_t), dtype=bool)
            for k in range(n_t):
                enabled[:, k] = marked[:, self.pre[k]].all(axis=1)
            # a set is represented by its least enabled member
            rep = enabled.copy()
            for k in range(n_t):
                if len(self.lower_dep[k]):
                    rep[:, k] &= ~enabled[:, self.lower_dep[k]].any(axis=1)
            n_sets = rep.sum(axis=1)
            dead = n_sets == 0
            if dead.any():
                failed += int(dead.sum())
                keep = ~dead
                marked, times, enabled, rep, n_sets = (
                    marked[keep], times[keep], enabled[keep], rep[keep], n_sets[keep]
                )
                if not len(marked):
                    break
            m = len(marked)
            chosen_rep = rep.argmax(axis=1)
            multi = np.nonzero(n_sets > 1)[0]
            if len(multi):
                j = rng.integers(0, n_sets[multi])
                chosen_rep[multi] = (np.cumsum(rep[multi], axis=1) > j[:, None]).argmax(axis=1)
            u = rng.bit_generator.random_raw(m).astype(np.uint64)
            fired = np.empty(m, dtype=np.intp)
            for r in np.nonzero(np.bincount(chosen_rep, minlength=n_t))[0]:
                g = np.nonzero(chosen_rep == r)[0]
                cols = np.nonzero(self.dep[r])[0]
                if len(cols) == 1:
                    fired[g] = r
                    continue
                for members, sel in self._group_patterns(enabled[np.ix_(g, cols)], cols, g):
                    if len(members) == 1:
                        fired[sel] = members[0]
                        continue
                    pick = np.searchsorted(self.thresholds(members), u[sel], side="right")
                    fired[sel] = np.array(members, dtype=np.intp)[pick]
            for k in np.nonzero(np.bincount(fired, minlength=n_t))[0]:
                g = np.nonzero(fired == k)[0]
                pre, post = self.pre[k], self.post[k]
                arrival = times[np.ix_(g, pre)].max(axis=1) + self.tau[k]
                clash = (marked[np.ix_(g, post)] & ~np.isin(post, pre)).any(axis=0)
                if clash.any():
                    place = net.places[post[clash.argmax()]]
                    raise UnsafeFiring(net.transitions[k].id, place)
                marked[np.ix_(g, pre)] = False
                marked[np.ix_(g, post)] = True
                times[np.ix_(g, post)] = arrival[:, None]
        failed += len(marked)
        out = np.concatenate(done) if done else np.zeros(0, dtype=np.int64)
        return out, failed


def simulate(
    net: WorkflowNet,
    runs: int,
    seed: int,
    batch_size: int = 1 << 16,
    step_cap: int = DEFAULT_STEP_CAP,
) -> SimulationResult:
    """Sample mean and standard error of the completion time.

    Conflict sets are chosen uniformly among those enabled; the transition
    inside a set is drawn with probability proportional to its weight by an
    exact comparison of a raw 64-bit draw against rational cut points.
    Batch ``b`` draws from ``PCG64(SeedSequence([seed, b]))``, so the result
    depends only on ``seed``, ``runs`` and ``batch_size``.
    Runs that deadlock or exceed ``step_cap`` count as failed, not as samples.
    """
    if runs < 0:
        raise ValueError("runs must be non-negative")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    sampler = _Sampler(net, step_cap)
    total = 0
    total_sq = 0
    n_ok = 0
    failed = 0
    for b, start in enumerate(range(0, runs, batch_size)):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, b])))
        out, bad = sampler.run_batch(min(batch_size, runs - start), rng)
        failed += bad
        n_ok += len(out)
        total += int(out.sum())
        if len(out):
            top = int(out.max())
            if len(out) * top * top < 2**63:
                total_sq += int((out * out).sum())
            else:
                total_sq += sum(int(v) * int(v) for v in out)
    if n_ok == 0:
        return SimulationResult(math.nan, math.nan, 0, failed)
    mean = Fraction(total, n_ok)
    if n_ok > 1:
        var = (Fraction(total_sq) - Fraction(total) ** 2 / n_ok) / (n_ok - 1)
        se = math.sqrt(var / n_ok)
    else:
        se = math.nan
    return SimulationResult(float(mean), se, n_ok, failed, total, total_sq)


# -- Mazurkiewicz swaps -----------------------------------------------------


def _fire_mask(net: WorkflowNet, m: int, k: int) -> int | None:
    pre, post = net.pre_mask[k], net.post_mask[k]
    if m & pre != pre or m & post & ~pre:
        return None
    return (m & ~pre) | post


def mazurkiewicz_swaps(
    net: WorkflowNet, run: Sequence[str], swaps: int, seed: int = 0
) -> list[list[str]]:
    """``run`` followed by the runs obtained from ``swaps`` random adjacent swaps.

    Only pairs with disjoint presets whose swapped order is still firable are
    exchanged; if no such pair exists the run is repeated unchanged.
    """
    rng = random.Random(seed)
    ks = [net.tidx(t) for t in run]
    marks = [net.initial_mask]
    for pos, k in enumerate(ks):
        m = _fire_mask(net, marks[-1], k)
        if m is None:
            raise NotFirable(run[pos], pos, net.marking(marks[-1]))
        marks.append(m)
    pre = net.pre_mask
    tids = [t.id for t in net.transitions]
    out = [list(run)]
    for _ in range(swaps):
        options = []
        for p in range(len(ks) - 1):
            a, b = ks[p], ks[p + 1]
            if a == b or pre[a] & pre[b]:
                continue
            mid = _fire_mask(net, marks[p], b)
            if mid is not None and _fire_mask(net, mid, a) == marks[p + 2]:
                options.append((p, mid))
        if options:
            p, mid = rng.choice(options)
            ks[p], ks[p + 1] = ks[p + 1], ks[p]
            marks[p + 1] = mid
        out.append([tids[k] for k in ks])
    return out
