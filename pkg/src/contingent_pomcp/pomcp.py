"""Online POMCP for stochastic contingent problems.

Values are expected steps to reach a goal belief, so action selection takes
the minimum. Belief questions at tree nodes (goal reached, action applicable)
go through :mod:`contingent_pomcp.belief`: regression for deterministic
histories and particles otherwise.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, asdict

from .belief import (
    MAX_REJECTIONS,
    EmptyBelief,
    History,
    holds_in_belief,
    push_through_history,
    sample_initial,
    step_state,
)
from .heuristics import DeadEnd, get_policy
from .model import ModelError, Problem


class NoApplicableAction(RuntimeError):
    pass


class ParticleDeprivation(RuntimeError):
    pass


@dataclass
class SearchConfig:
    simulations: int = 1500
    timeout_ms: float | None = None
    max_tree_depth: int = 30
    max_rollout_depth: int = 70
    exploration_c: float = 1.0
    particles: int = 500
    rollout_policy: str = "hadd"
    seed: int = 0
    tree_reuse: bool = True
    strict_applicability: bool = False
    # cap on the number of distinct states handed to a rollout as its belief
    rollout_particles: int = 32
    check_invariants: bool = False

    def __post_init__(self):
        if self.max_tree_depth < 1:
            raise ValueError("max_tree_depth must be at least 1")
        if self.max_rollout_depth < 0:
            raise ValueError("max_rollout_depth must be non-negative")
        if self.exploration_c < 0:
            raise ValueError("exploration_c must be non-negative")
        if self.simulations < 1 and self.timeout_ms is None:
            raise ValueError("need a positive simulation count or a timeout")
        if self.particles < 1:
            raise ValueError("particles must be positive")
        if self.rollout_particles < 1:
            raise ValueError("rollout_particles must be positive")
        get_policy(self.rollout_policy)


class DecisionNode:
    __slots__ = (
        "history", "count", "value", "particles", "edges", "actions", "goal",
        "roll_sum", "roll_n", "parent", "via", "support", "dead", "untried",
    )

    def __init__(self, history: History, parent=None, via=None):
        self.history = history
        self.count = 0
        self.value = 0.0
        self.particles: list[int] = []
        self.edges: dict[int, ActionNode] = {}
        self.actions: list | None = None
        self.goal: bool | None = None
        self.roll_sum = 0.0
        self.roll_n = 0
        self.parent = parent
        self.via = via  # (action, observation bits) leading here
        self.support: tuple | None = None
        self.dead = False
        self.untried: list = []  # applicable actions without an edge yet


class ActionNode:
    __slots__ = ("action", "count", "value", "children")

    def __init__(self, action):
        self.action = action
        self.count = 0
        self.value = 0.0
        self.children: dict[int | None, DecisionNode] = {}


def action_backup(edge: ActionNode) -> float:
    """V(n.a) = 1 + count-weighted mean of the observation children."""
    total = 0.0
    for c in edge.children.values():
        total += c.count * c.value
    edge.value = 1.0 + total / edge.count
    return edge.value


def node_backup(n: DecisionNode) -> float:
    """V(n) = min over visited actions."""
    n.value = min(e.value for e in n.edges.values() if e.count)
    return n.value


class Planner:
    """Holds the search tree and the root particle pool across decisions."""

    def __init__(self, problem: Problem, cfg: SearchConfig, rng: random.Random | None = None):
        self.problem = problem
        self.cfg = cfg
        self.rng = rng if rng is not None else random.Random(cfg.seed)
        self.policy = get_policy(cfg.rollout_policy)
        self.goal = problem.goal
        self.root = DecisionNode(History.root(problem))
        self.pool = [sample_initial(problem, self.rng) for _ in range(cfg.particles)]
        self._set_root_support()
        self.simulations_run = 0
        self._app_cache: dict = {}

    # --- belief helpers ---------------------------------------------------

    def _set_root_support(self):
        distinct = list(dict.fromkeys(self.pool))
        if len(distinct) > self.cfg.rollout_particles:
            distinct = self.rng.sample(distinct, self.cfg.rollout_particles)
        self.root.support = tuple(distinct)

    def belief_sample(self, n: DecisionNode) -> list[int]:
        """Distinct states standing in for the belief at ``n``."""
        if n.support is None:
            n.support = self._propagate_support(n)
        cap = self.cfg.rollout_particles
        merged = list(dict.fromkeys(n.support + tuple(n.particles)))
        if len(merged) > cap:
            merged = merged[:cap]
        return merged

    def _propagate_support(self, n: DecisionNode) -> tuple:
        if n.parent is None:
            return ()
        src = self.belief_sample(n.parent)
        a, o = n.via
        out: dict[int, None] = {}
        for b in src:
            if not a.applicable(b):
                continue
            if a.is_sensing:
                succ = (b,)
            else:
                try:
                    succ = a.successors(b, limit=64)
                except ModelError:
                    succ = (a.apply(b, self.rng),)
            for t in succ:
                if o is None or (t & a.obs_mask) == o:
                    out[t] = None
        res = list(out)
        if len(res) > self.cfg.rollout_particles:
            res = self.rng.sample(res, self.cfg.rollout_particles)
        return tuple(res)

    def _holds(self, f, n: DecisionNode) -> bool:
        h = n.history
        parts = None if h.deterministic else self.belief_sample(n)
        return holds_in_belief(f, h, parts, self.problem, self.cfg.strict_applicability)

    def is_goal(self, n: DecisionNode) -> bool:
        if n.goal is None:
            n.goal = self._holds(self.goal, n)
        return n.goal

    def expand(self, n: DecisionNode) -> list:
        if n.actions is None:
            h = n.history
            kt, kf = h.kt, h.kf
            if not h.deterministic and not self.cfg.strict_applicability:
                # preconditions are literal conjunctions: test them against the joint literals
                states = self.belief_sample(n)
                if not states:
                    raise EmptyBelief("stochastic history and no particles")
                full = self.problem.full_mask
                jt, jf = full, full
                for b in states:
                    jt &= b
                    jf &= ~b
                kt |= jt
                kf |= jf
            sure, unsure = self._applicable_by_literals(kt, kf)
            acts = list(sure)
            if unsure and h.deterministic:
                acts.extend(a for a in unsure if self._holds(a.pre, n))
                acts.sort(key=lambda a: a.index)
            n.actions = acts
            n.untried = list(acts)
        return n.actions

    def _applicable_by_literals(self, kt: int, kf: int) -> tuple[list, list]:
        """Actions whose precondition the known literals decide true, and undecided ones."""
        key = (kt, kf)
        got = self._app_cache.get(key)
        if got is None:
            sure, unsure = [], []
            for a in self.problem.actions:
                if a.unsatisfiable or (a.pre_pos & kf) or (a.pre_neg & kt):
                    continue
                if (a.pre_pos & ~kt) or (a.pre_neg & ~kf):
                    unsure.append(a)
                else:
                    sure.append(a)
            got = (sure, unsure)
            if len(self._app_cache) > 100_000:
                self._app_cache.clear()
            self._app_cache[key] = got
        return got

    # --- search, simulate, rollout ---------------------------------------------

    def simulate(self, s: int, n: DecisionNode, depth: int) -> None:
        cfg = self.cfg
        if len(n.particles) < cfg.particles:
            n.particles.append(s)
        n.count += 1
        if self.is_goal(n):
            if self.problem.is_goal_state(s) or n.history.deterministic:
                n.value = 0.0
                return
            # a particle-based goal test refuted by a reaching state
            n.goal = False
        if depth > cfg.max_tree_depth:
            n.roll_sum += self.rollout(s, self.belief_sample(n))
            n.roll_n += 1
            n.value = n.roll_sum / n.roll_n
            return
        acts = self.expand(n)
        if not acts:
            n.dead = True
            n.value = float(cfg.max_rollout_depth)
            return
        edge = self._select(n)
        a = edge.action
        while not a.applicable(s):
            # s is a possible state here, so pre(a) is not known after all
            self._prune(n, a)
            if not n.actions:
                n.dead = True
                n.value = float(cfg.max_rollout_depth)
                return
            edge = self._select(n)
            a = edge.action
        rng = self.rng
        if a.is_sensing:
            s2 = s
            o = s & a.obs_mask
        else:
            s2 = a.apply(s, rng)
            o = (s2 & a.obs_mask) if a.obs_mask else None
        child = edge.children.get(o)
        if child is None:
            child = DecisionNode(n.history.extend(a, o), parent=n, via=(a, o))
            edge.children[o] = child
        self.simulate(s2, child, depth + 1)
        edge.count += 1
        action_backup(edge)
        node_backup(n)
        if cfg.check_invariants:
            self._check_node(n)

    def _prune(self, n: DecisionNode, a) -> None:
        n.actions = [b for b in n.actions if b is not a]
        n.untried = [b for b in n.untried if b is not a]
        n.edges.pop(a.index, None)
        visited = [e.value for e in n.edges.values() if e.count]
        if visited:
            n.value = min(visited)

    def _prune_with(self, n: DecisionNode, states) -> None:
        if n.actions is None:
            return
        for a in list(n.actions):
            if not all(a.applicable(b) for b in states):
                self._prune(n, a)

    def _select(self, n: DecisionNode) -> ActionNode:
        untried = n.untried
        if untried:
            # unvisited actions come first, in uniformly random order
            k = self.rng.randrange(len(untried)) if len(untried) > 1 else 0
            a = untried[k]
            untried[k] = untried[-1]
            untried.pop()
            edge = n.edges[a.index] = ActionNode(a)
            return edge
        edges = n.edges
        c = self.cfg.exploration_c
        logn = math.log(n.count) if n.count > 1 else 0.0
        best = None
        ties = []
        for e in edges.values():
            score = e.value - c * math.sqrt(logn / e.count)
            if best is None or score < best:
                best = score
                ties = [e]
            elif score == best:
                ties.append(e)
        return ties[0] if len(ties) == 1 else ties[self.rng.randrange(len(ties))]

    def _check_node(self, n: DecisionNode) -> None:
        visited = [e for e in n.edges.values() if e.count]
        assert visited, "backup without a visited edge"
        assert abs(n.value - min(e.value for e in visited)) < 1e-9
        for e in visited:
            cnt = sum(c.count for c in e.children.values())
            assert cnt == e.count, "count conservation violated"
            mean = sum(c.count * c.value for c in e.children.values()) / e.count
            assert abs(e.value - (1.0 + mean)) < 1e-9, "action backup inconsistent"
        assert n.value >= 0

    def rollout(self, s: int, B) -> int:
        cfg = self.cfg
        problem = self.problem
        rng = self.rng
        policy = self.policy
        others = {b for b in B if b != s}
        depth = 0
        limit = cfg.max_rollout_depth
        while depth < limit and not problem.is_goal_state(s):
            bel = [s, *others]
            try:
                a = policy(problem, s, bel, rng)
            except DeadEnd:
                return limit
            if not a.is_sensing:
                s = a.apply(s, rng)
                others = {a.apply(b, rng) for b in others}
            if a.obs_mask:
                want = s & a.obs_mask
                others = {b for b in others if (b & a.obs_mask) == want}
            others.discard(s)
            depth += 1
        return depth

    # --- decisions ------------------------------------------------------------

    def root_is_goal(self) -> bool:
        n = self.root
        if n.goal is None:
            h = n.history
            parts = None if h.deterministic else list(dict.fromkeys(self.pool))
            n.goal = holds_in_belief(self.goal, h, parts, self.problem, self.cfg.strict_applicability)
        return n.goal

    def search(self):
        root = self.root
        self.expand(root)
        if not root.history.deterministic:
            # the rollout support is a subsample; applicability at the root uses the whole pool
            self._prune_with(root, set(self.pool))
        acts = root.actions
        if not acts:
            raise NoApplicableAction("no action is applicable at the current belief")
        if len(acts) == 1:
            return acts[0]
        cfg = self.cfg
        pool = self.pool
        rng = self.rng
        if cfg.timeout_ms is not None:
            deadline = time.perf_counter() + cfg.timeout_ms / 1000.0
            while time.perf_counter() < deadline:
                self.simulate(pool[rng.randrange(len(pool))], root, 0)
                self.simulations_run += 1
        else:
            for _ in range(cfg.simulations):
                self.simulate(pool[rng.randrange(len(pool))], root, 0)
                self.simulations_run += 1
        visited = [e for e in root.edges.values() if e.count]
        best = min(e.value for e in visited)
        ties = [e for e in visited if e.value == best]
        return (ties[0] if len(ties) == 1 else ties[rng.randrange(len(ties))]).action

    def value_table(self) -> dict[str, tuple[int, float]]:
        return {e.action.name: (e.count, e.value) for e in self.root.edges.values()}

    def advance(self, a, obs_bits: int | None) -> None:
        """Move the root along the executed action and received observation."""
        old = self.root
        edge = old.edges.get(a.index)
        child = edge.children.get(obs_bits) if edge is not None else None
        if child is not None and self.cfg.tree_reuse:
            new = child
        else:
            new = DecisionNode(old.history.extend(a, obs_bits))
        self.pool = self._next_pool(a, obs_bits, child)
        new.parent = None
        new.via = None
        self.root = new
        self._set_root_support()
        self.root.goal = None
        if not new.history.deterministic:
            self._prune_with(new, set(self.pool))

    def _next_pool(self, a, obs_bits, child) -> list[int]:
        target = self.cfg.particles
        rng = self.rng
        old = self.pool
        # one pass over the whole pool first, so only the top-up adds resampling noise
        new = [t for t in (step_state(a, obs_bits, s, rng) for s in old) if t is not None][:target]
        attempts = len(old)
        while len(new) < target and attempts < 20 * target:
            attempts += 1
            t = step_state(a, obs_bits, old[rng.randrange(len(old))], rng)
            if t is not None:
                new.append(t)
        if not new and child is not None and child.particles:
            new = list(child.particles)
        if not new:
            h = self.root.history.extend(a, obs_bits)
            for _ in range(MAX_REJECTIONS * 10):
                t = push_through_history(sample_initial(self.problem, rng), h, rng)
                if t is not None:
                    new.append(t)
                    break
        if not new:
            raise ParticleDeprivation(
                f"no particle consistent with the history after {a.name}"
            )
        while len(new) < target:
            new.append(new[rng.randrange(len(new))])
        return new


@dataclass
class EpisodeRecord:
    seed: int
    success: bool
    cost: int
    steps: int
    step_secs: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    diagnostic: str | None = None

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d["step_secs"] = []
        return d


def search(problem: Problem, history: History | None, cfg: SearchConfig, rng: random.Random):
    """One-shot decision from ``history`` with a fresh tree."""
    planner = Planner(problem, cfg, rng)
    if history is not None and history.length:
        for step in history.nodes():
            planner.advance(step.action, step.obs_bits)
    return planner.search()


def run_episode(problem: Problem, cfg: SearchConfig, rng: random.Random, step_limit: int = 100,
                seed: int = 0) -> EpisodeRecord:
    if step_limit < 1:
        raise ValueError("step_limit must be at least 1")
    world = random.Random(rng.getrandbits(64))
    rec = EpisodeRecord(seed=seed, success=False, cost=0, steps=0)
    try:
        true_state = sample_initial(problem, world)
        planner = Planner(problem, cfg, rng)
        while True:
            if planner.root_is_goal():
                rec.success = True
                break
            if rec.steps >= step_limit:
                rec.diagnostic = f"step limit {step_limit} reached"
                break
            t0 = time.perf_counter()
            a = planner.search()
            rec.step_secs.append(time.perf_counter() - t0)
            if not a.applicable(true_state):
                rec.steps += 1
                rec.actions.append(a.name)
                rec.diagnostic = f"{a.name} is not applicable in the true state"
                break
            if a.is_sensing:
                obs = true_state & a.obs_mask
            else:
                true_state = a.apply(true_state, world)
                obs = (true_state & a.obs_mask) if a.obs_mask else None
            rec.actions.append(a.name)
            rec.steps += 1
            planner.advance(a, obs)
    except Exception as e:  # planner failures are reported, not raised
        rec.diagnostic = f"{type(e).__name__}: {e}"
        rec.success = False
    rec.cost = rec.steps
    return rec
