"""Delete-relaxation heuristics and the rollout policies built on them.

The relaxed task works on "relaxed masks": bit ``f`` means fact ``f`` is
reachable as true, bit ``f + N`` means it is reachable as false (N is the
number of facts). Negative preconditions and goals are therefore ordinary
positive requirements. Every (action, conditional effect) pair becomes one
relaxed operator whose precondition is the action precondition plus the
effect condition, and whose adds are the union over all stochastic options.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .logic import iter_bits
from .model import ModelError, Problem

DEAD_END = math.inf


@dataclass
class RelaxedOp:
    action: int
    name: str
    pre: int  # relaxed mask of the action precondition
    cond: int  # relaxed mask of the effect condition
    add: int


class RelaxedTask:
    def __init__(self, problem: Problem):
        self.problem = problem
        n = self.n = problem.num_facts
        self.full = problem.full_mask
        if problem.goal_lits is None:
            raise ModelError("relaxation heuristics need a conjunctive goal")
        self.goal = problem.goal_pos | (problem.goal_neg << n)
        self.goal_bits = list(iter_bits(self.goal))
        ops = []
        for a in problem.actuations:
            if a.unsatisfiable:
                continue
            pre = a.pre_pos | (a.pre_neg << n)
            # effects sharing a condition are merged into one operator
            grouped: dict[int, int] = {}
            for cpos, cneg, apos, aneg in a.relaxed_effects():
                cond = cpos | (cneg << n)
                grouped[cond] = grouped.get(cond, 0) | apos | (aneg << n)
            for cond, add in grouped.items():
                if add:
                    ops.append(RelaxedOp(a.index, a.name, pre, cond, add))
        self.ops = ops
        self.op_pre = [o.pre | o.cond for o in ops]
        self.op_add = [o.add for o in ops]
        self.op_need = [bin(m).count("1") for m in self.op_pre]
        watch: dict[int, list[int]] = {}
        free = []
        for i, m in enumerate(self.op_pre):
            if not m:
                free.append(i)
            for b in iter_bits(m):
                watch.setdefault(b, []).append(i)
        self.watch = watch
        self.free_ops = free
        self.cache: dict[int, float] = {}
        # actuation index -> list of (relaxed cond, add) for relaxed successors
        self.by_action: dict[int, list[tuple[int, int]]] = {}
        for o in ops:
            self.by_action.setdefault(o.action, []).append((o.cond, o.add))

    def relax(self, s: int) -> int:
        return s | ((~s & self.full) << self.n)

    def positive(self, r: int) -> int:
        return r & self.full

    def successor(self, action_index: int, s: int, r: int | None = None) -> int:
        """Relaxed successor: conditions read from the real state ``s``."""
        if r is None:
            r = self.relax(s)
        rs = self.relax(s)
        for cond, add in self.by_action.get(action_index, ()):
            if (cond & rs) == cond:
                r |= add
        return r


def relaxed_task(problem: Problem) -> RelaxedTask:
    t = problem.__dict__.get("_relaxed_task")
    if t is None:
        t = RelaxedTask(problem)
        problem.__dict__["_relaxed_task"] = t
    return t


def _hadd_counters(task: RelaxedTask, r: int, use_max: bool = False) -> float:
    goal = task.goal
    missing = goal & ~r
    if not missing:
        return 0
    need = list(task.op_need)
    watch = task.watch
    op_add = task.op_add
    reached = r
    ready = list(task.free_ops)
    for b in iter_bits(r):
        for i in watch.get(b, ()):
            need[i] -= 1
            if need[i] == 0:
                ready.append(i)
    total = 0
    depth = 0
    while ready:
        depth += 1
        new = 0
        for i in ready:
            new |= op_add[i]
        new &= ~reached
        if not new:
            break
        reached |= new
        got = new & missing
        if got:
            k = bin(got).count("1")
            total = depth if use_max else total + depth * k
            missing &= ~got
            if not missing:
                return total
        ready = []
        for b in iter_bits(new):
            for i in watch.get(b, ()):
                need[i] -= 1
                if need[i] == 0:
                    ready.append(i)
    return DEAD_END


def hadd_relaxed(task: RelaxedTask, r: int) -> float:
    cache = task.cache
    v = cache.get(r)
    if v is None:
        if len(cache) > 500_000:
            cache.clear()
        v = cache[r] = _hadd_counters(task, r)
    return v


def hadd_single(problem: Problem, s: int) -> float:
    """Sum over goal facts of their first layer in the relaxed graph from ``s``."""
    task = relaxed_task(problem)
    return hadd_relaxed(task, task.relax(s))


def hmax_single(problem: Problem, s: int) -> float:
    task = relaxed_task(problem)
    return _hadd_counters(task, task.relax(s), use_max=True)


@dataclass
class PlanningGraph:
    fact_layers: list[int]  # relaxed masks, fact_layers[0] is the input state
    action_layers: list[list[int]]  # relaxed operator indices
    depth: dict[int, int]  # relaxed bit -> first layer

    def goal_depths(self, goal_bits: Iterable[int]) -> list[float]:
        return [self.depth.get(b, DEAD_END) for b in goal_bits]


def build_planning_graph(problem: Problem, s: int, relaxed: bool = False) -> PlanningGraph:
    """Layer-by-layer graph built by scanning every operator at each layer."""
    task = relaxed_task(problem)
    r = s if relaxed else task.relax(s)
    layers = [r]
    depth = {b: 0 for b in iter_bits(r)}
    used = [False] * len(task.ops)
    action_layers: list[list[int]] = []
    limit = 2 * task.n + 2
    while True:
        cur = layers[-1]
        layer = [
            i for i, m in enumerate(task.op_pre) if not used[i] and (m & cur) == m
        ]
        for i in layer:
            used[i] = True
        nxt = cur
        for i in layer:
            nxt |= task.op_add[i]
        if nxt == cur:
            break
        action_layers.append(layer)
        layers.append(nxt)
        for b in iter_bits(nxt & ~cur):
            depth[b] = len(layers) - 1
        assert len(layers) <= limit, "relaxed graph failed to reach a fixpoint"
    return PlanningGraph(layers, action_layers, depth)


def hadd_from_graph(problem: Problem, g: PlanningGraph) -> float:
    task = relaxed_task(problem)
    return sum(g.goal_depths(task.goal_bits))


def hmax_from_graph(problem: Problem, g: PlanningGraph) -> float:
    task = relaxed_task(problem)
    return max(g.goal_depths(task.goal_bits), default=0)


# --- belief-space h_add --------------------------------------------------------

@dataclass
class _SenseInfo:
    pre: int
    obs: int


def _sense_table(task: RelaxedTask) -> list[_SenseInfo]:
    t = task.__dict__.get("_sense")
    if t is None:
        n = task.n
        t = [
            _SenseInfo(a.pre_pos | (a.pre_neg << n), a.obs_mask)
            for a in task.problem.sensings
            if not a.unsatisfiable
        ]
        # combined actions observe too, but their precondition is an actuation one
        t += [
            _SenseInfo(a.pre_pos | (a.pre_neg << n), a.obs_mask)
            for a in task.problem.actuations
            if a.obs_mask and not a.unsatisfiable
        ]
        task.__dict__["_sense"] = t
    return t


def _pre_watch(task: RelaxedTask):
    got = task.__dict__.get("_pre_watch")
    if got is None:
        need = [bin(o.pre).count("1") for o in task.ops]
        watch: dict[int, list[int]] = {}
        for k, o in enumerate(task.ops):
            for b in iter_bits(o.pre):
                watch.setdefault(b, []).append(k)
        free = [k for k, c in enumerate(need) if c == 0]
        got = task.__dict__["_pre_watch"] = (need, watch, free)
    return got


def hadd_belief_relaxed(task: RelaxedTask, rs: int, others: Sequence[int], trace: list | None = None,
                        shortcut: bool = True) -> float:
    """Belief-space h_add on relaxed masks; ``rs`` is the layer of s, ``others`` of B minus s."""
    goal = task.goal
    if not others and shortcut:
        return hadd_relaxed(task, rs)
    if not (goal & ~rs):
        return 0
    senses = _sense_table(task)
    ops = task.ops
    pre_need, pre_watch, pre_free = _pre_watch(task)
    need = list(pre_need)
    newly = list(pre_free)
    seen_joint = 0
    active_uncond_add = 0
    active_cond: list[tuple[int, int, int]] = []
    alive = list(others)
    fired = [set() for _ in alive]  # cond operators already applied per state
    fired_s: set = set()
    lay_s = rs
    missing = goal & ~rs
    total = 0
    i = 0
    limit = 2 * task.n + len(others) + 3
    while True:
        i += 1
        assert i <= limit, "belief graph failed to terminate"
        joint = lay_s
        for l in alive:
            joint &= l
        # actions whose precondition holds in every surviving layer; joint only grows
        for b in iter_bits(joint & ~seen_joint):
            for k in pre_watch.get(b, ()):
                need[k] -= 1
                if need[k] == 0:
                    newly.append(k)
        seen_joint = joint
        for k in newly:
            op = ops[k]
            if op.cond:
                active_cond.append((op.cond, op.add, k))
            else:
                active_uncond_add |= op.add
        newly = []
        # sensing: drop states that disagree with s on an observation
        discarded = False
        if alive:
            for sn in senses:
                if (sn.pre & joint) == sn.pre:
                    want = lay_s & sn.obs
                    keep = []
                    keep_f = []
                    for l, f in zip(alive, fired):
                        if (l & sn.obs) == want:
                            keep.append(l)
                            keep_f.append(f)
                        else:
                            discarded = True
                            if trace is not None:
                                trace.append((i, l, sn.obs))
                    alive, fired = keep, keep_f
        # next layers
        new_s = lay_s | active_uncond_add
        for cond, add, k in active_cond:
            if k not in fired_s and (cond & lay_s) == cond:
                new_s |= add
                fired_s.add(k)
        grew = new_s != lay_s
        new_alive = []
        for l, f in zip(alive, fired):
            nl = l | active_uncond_add
            for cond, add, k in active_cond:
                if k not in f and (cond & l) == cond:
                    nl |= add
                    f.add(k)
            if nl != l:
                grew = True
            new_alive.append(nl)
        alive = new_alive
        got = new_s & missing
        if got:
            total += i * bin(got).count("1")
            missing &= ~got
            if not missing:
                return total
        lay_s = new_s
        if not grew and not discarded:
            return DEAD_END


def hadd_belief(problem: Problem, s: int, B: Iterable[int]) -> float:
    task = relaxed_task(problem)
    others = sorted({b for b in B if b != s})
    return hadd_belief_relaxed(task, task.relax(s), [task.relax(b) for b in others])


# --- rollout policies ----------------------------------------------------------

class DeadEnd(Exception):
    pass


def joint_masks(states: Iterable[int], full: int) -> tuple[int, int]:
    jt = full
    jf = full
    for b in states:
        jt &= b
        jf &= ~b
    return jt, jf


class PolicyContext:
    """Per-problem scratch shared by the policies (candidate and score caches)."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.task = relaxed_task(problem)
        self._cands: dict[tuple[int, int], tuple[list, list]] = {}
        self.choice_cache: dict = {}

    def candidates(self, B: Iterable[int]) -> tuple[list, list]:
        jt, jf = joint_masks(B, self.problem.full_mask)
        key = (jt, jf)
        got = self._cands.get(key)
        if got is None:
            acts = [
                a for a in self.problem.actuations
                if (jt & a.pre_pos) == a.pre_pos and (jf & a.pre_neg) == a.pre_neg
            ]
            sens = [
                a for a in self.problem.sensings
                if (jt & a.pre_pos) == a.pre_pos and (jf & a.pre_neg) == a.pre_neg
            ]
            got = (acts, sens)
            if len(self._cands) > 100_000:
                self._cands.clear()
            self._cands[key] = got
        return got


def context_for(problem: Problem) -> PolicyContext:
    ctx = problem.__dict__.get("_policy_ctx")
    if ctx is None:
        ctx = PolicyContext(problem)
        problem.__dict__["_policy_ctx"] = ctx
    return ctx


def _argmin(items, scores, rng):
    best = min(scores)
    if best == DEAD_END:
        return None
    ties = [a for a, v in zip(items, scores) if v == best]
    return ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]


def rollout_policy_random(problem: Problem, s: int, B: Sequence[int], rng: random.Random):
    acts, sens = context_for(problem).candidates(B)
    n = len(acts) + len(sens)
    if n == 0:
        raise DeadEnd("no applicable action")
    k = rng.randrange(n)
    return acts[k] if k < len(acts) else sens[k - len(acts)]


SENSE_EPSILON = 0.1


def rollout_policy_hadd(problem: Problem, s: int, B: Sequence[int], rng: random.Random,
                        epsilon: float = SENSE_EPSILON):
    ctx = context_for(problem)
    acts, sens = ctx.candidates(B)
    if not acts and not sens:
        raise DeadEnd("no applicable action")
    if sens and (not acts or rng.random() < epsilon):
        return sens[rng.randrange(len(sens))]
    task = ctx.task
    key = ("h", s, tuple(a.index for a in acts))
    scores = ctx.choice_cache.get(key)
    if scores is None:
        r = task.relax(s)
        scores = [hadd_relaxed(task, task.successor(a.index, s, r)) for a in acts]
        _cache_put(ctx.choice_cache, key, scores)
    a = _argmin(acts, scores, rng)
    if a is None:
        if sens:
            return sens[rng.randrange(len(sens))]
        raise DeadEnd("every successor is a dead end")
    return a


def rollout_policy_hadd_belief(problem: Problem, s: int, B: Sequence[int], rng: random.Random):
    ctx = context_for(problem)
    acts, sens = ctx.candidates(B)
    if not acts and not sens:
        raise DeadEnd("no applicable action")
    others = tuple(sorted({b for b in B if b != s}))
    key = ("b", s, others)
    got = ctx.choice_cache.get(key)
    if got is None:
        task = ctx.task
        rs = task.relax(s)
        r_others = [task.relax(b) for b in others]
        items = []
        scores = []
        for a in acts:
            succ = task.successor(a.index, s, rs)
            succ_o = sorted({task.successor(a.index, b, rb) for b, rb in zip(others, r_others)} - {succ})
            items.append(a)
            scores.append(_hb_cached(ctx, succ, tuple(succ_o)))
        if sens:
            base = _hb_cached(ctx, rs, tuple(sorted(set(r_others))))
            for a in sens:
                want = s & a.obs_mask
                informative = any((b & a.obs_mask) != want for b in others)
                items.append(a)
                scores.append(base - 1 if informative else base)
        got = (items, scores)
        _cache_put(ctx.choice_cache, key, got)
    items, scores = got
    a = _argmin(items, scores, rng)
    if a is None:
        raise DeadEnd("every successor is a dead end")
    return a


def _hb_cached(ctx: PolicyContext, rs: int, others: tuple) -> float:
    key = ("hb", rs, others)
    v = ctx.choice_cache.get(key)
    if v is None:
        v = hadd_belief_relaxed(ctx.task, rs, others)
        _cache_put(ctx.choice_cache, key, v)
    return v


def _cache_put(cache: dict, key, value) -> None:
    if len(cache) > 200_000:
        cache.clear()
    cache[key] = value


Policy = Callable[[Problem, int, Sequence[int], random.Random], object]

POLICIES: dict[str, Policy] = {
    "random": rollout_policy_random,
    "hadd": rollout_policy_hadd,
    "hadd-belief": rollout_policy_hadd_belief,
}


def register_policy(name: str, fn: Policy) -> None:
    if name in POLICIES:
        raise ValueError(f"policy {name!r} already registered")
    POLICIES[name] = fn


def get_policy(name: str) -> Policy:
    try:
        return POLICIES[name]
    except KeyError:
        raise ValueError(f"unknown rollout policy {name!r}; known: {sorted(POLICIES)}") from None
