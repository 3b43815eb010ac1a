"""Independent brute-force reference implementations used by the tests.

Nothing here calls the package's evaluation, regression, SAT or heuristic
code: the oracles work on explicit sets and truth tables.
"""
import itertools
import random

from contingent_pomcp.logic import FALSE, TRUE, And, Literal, Not, OneOf, Or, conj, disj, negate, oneof
from contingent_pomcp.model import ActuationAction, Effect, Problem, SensingAction, StochasticFormula


def truth(f, assignment):
    """Evaluate a formula against a dict fact -> bool."""
    if f is TRUE:
        return True
    if f is FALSE:
        return False
    if isinstance(f, Literal):
        return assignment[f.fact] == f.positive
    if isinstance(f, Not):
        return not truth(f.item, assignment)
    vals = [truth(x, assignment) for x in f.items]
    if isinstance(f, And):
        return all(vals)
    if isinstance(f, Or):
        return any(vals)
    if isinstance(f, OneOf):
        return sum(vals) == 1
    raise TypeError(f)


def as_dict(state, n):
    return {i: bool((state >> i) & 1) for i in range(n)}


def models(f, n):
    return [s for s in range(1 << n) if truth(f, as_dict(s, n))]


def random_formula(rng, n, depth=3):
    if depth == 0 or rng.random() < 0.3:
        return Literal(rng.randrange(n), rng.random() < 0.5)
    k = rng.random()
    if k < 0.35:
        return conj(*[random_formula(rng, n, depth - 1) for _ in range(rng.randint(2, 3))])
    if k < 0.7:
        return disj(*[random_formula(rng, n, depth - 1) for _ in range(rng.randint(2, 3))])
    if k < 0.85 and n >= 2:
        facts = rng.sample(range(n), rng.randint(2, min(3, n)))
        return oneof(*[Literal(f, rng.random() < 0.7) for f in facts])
    return negate(random_formula(rng, n, depth - 1))


# --- forward semantics --------------------------------------------------------

def step_forward(a, state, n):
    """Successor of a deterministic action by explicit literal bookkeeping."""
    d = as_dict(state, n)
    if not truth(a.pre, d):
        return None
    new = dict(d)
    for e in a.effects:
        if truth(e.condition, d):
            (lits, _), = e.outcome.options
            for l in lits:
                new[l.fact] = l.positive
    return sum(1 << i for i, v in new.items() if v)


def initial_states(problem):
    """All states satisfying the initial formula plus closed world and clauses."""
    n = problem.num_facts
    mentioned = problem.init.mask
    for sf in problem.init_probs:
        mentioned |= sf.mentioned()
    out = []
    for s in range(1 << n):
        d = as_dict(s, n)
        if not truth(problem.init, d):
            continue
        if any(d[i] for i in range(n) if not (mentioned >> i) & 1):
            continue
        ok = True
        for sf in problem.init_probs:
            scope = sf.mentioned()
            hit = False
            for lits, _ in sf.options:
                want = {l.fact: l.positive for l in lits}
                if all(d[f] == want.get(f, False) for f in range(n) if (scope >> f) & 1):
                    hit = True
            ok = ok and hit
        if ok:
            out.append(s)
    return out


def forward_belief(problem, steps):
    """Set of states consistent with a deterministic (action, obs dict) sequence."""
    n = problem.num_facts
    belief = set(initial_states(problem))
    for a, obs in steps:
        nxt = set()
        for s in belief:
            d = as_dict(s, n)
            if not truth(a.pre, d):
                continue
            t = s if a.is_sensing else step_forward(a, s, n)
            if obs is not None and any(bool((t >> f) & 1) != v for f, v in obs.items()):
                continue
            nxt.add(t)
        belief = nxt
    return belief


# --- relaxed planning graph ------------------------------------------------------

def relaxed_layers(problem, state):
    """Alg.-style layering over explicit (fact, polarity) sets.

    Every (action, effect) pair is an operator; its adds are the union over
    options. Returns the depth of each literal.
    """
    n = problem.num_facts
    facts = {(i, bool((state >> i) & 1)) for i in range(n)}
    ops = []
    for a in problem.actuations:
        pre = {(l.fact, l.positive) for l in _lits(a.pre)}
        for e in a.effects:
            cond = {(l.fact, l.positive) for l in _lits(e.condition)}
            adds = set()
            for lits, _ in e.outcome.options:
                adds |= {(l.fact, l.positive) for l in lits}
            ops.append((frozenset(pre | cond), frozenset(adds)))
    depth = {f: 0 for f in facts}
    used = set()
    layer = 0
    while True:
        layer += 1
        ready = [i for i, (pre, _) in enumerate(ops) if i not in used and pre <= facts]
        used.update(ready)
        new = set()
        for i in ready:
            new |= ops[i][1]
        new -= facts
        if not new:
            return depth
        for f in new:
            depth[f] = layer
        facts |= new


def _lits(f):
    if f is TRUE:
        return []
    if isinstance(f, Literal):
        return [f]
    return list(f.items)


def oracle_hadd(problem, state):
    depth = relaxed_layers(problem, state)
    total = 0
    for l in _lits(problem.goal):
        key = (l.fact, l.positive)
        if key not in depth:
            return float("inf")
        total += depth[key]
    return total


def oracle_hmax(problem, state):
    depth = relaxed_layers(problem, state)
    vals = [depth.get((l.fact, l.positive), float("inf")) for l in _lits(problem.goal)]
    return max(vals, default=0)


# --- random problems ----------------------------------------------------------------

def random_lits(rng, n, k, exclude=()):
    facts = [f for f in range(n) if f not in exclude]
    k = min(k, len(facts))
    return [Literal(f, rng.random() < 0.5) for f in rng.sample(facts, k)]


def random_problem(rng, n_facts=None, n_actions=None, deterministic=True, hidden=True):
    n = n_facts or rng.randint(3, 10)
    k = n_actions or rng.randint(2, 10)
    acts = []
    for i in range(k):
        pre = conj(*random_lits(rng, n, rng.randint(0, 2)))
        effects = []
        used = set()
        for _ in range(rng.randint(1, 3)):
            cond = conj(*random_lits(rng, n, rng.randint(0, 1)))
            lits = random_lits(rng, n, rng.randint(1, 2), exclude=used)
            if not lits:
                break
            used.update(l.fact for l in lits)
            if not deterministic and rng.random() < 0.3:
                alt = [l.negated() for l in lits]
                sf = StochasticFormula(((tuple(lits), 0.6), (tuple(alt), 0.4)))
            else:
                sf = StochasticFormula.deterministic(lits)
            effects.append(Effect(cond, sf))
        acts.append(ActuationAction(f"a{i}", pre, tuple(effects)))
    sens = [SensingAction(f"s{j}", TRUE, (f,)) for j, f in enumerate(rng.sample(range(n), min(n, 3)))]
    known = rng.sample(range(n), n // 2)
    rest = [f for f in range(n) if f not in known]
    parts = [Literal(f, rng.random() < 0.5) for f in known]
    if hidden and len(rest) >= 2:
        parts.append(oneof(*[Literal(f) for f in rest[:3]]))
        if len(rest) > 3:
            parts.append(disj(*[Literal(f) for f in rest[3:]]))
    goal = conj(*random_lits(rng, n, rng.randint(1, 3)))
    if goal is TRUE or goal is FALSE:
        goal = Literal(0)
    return Problem([f"p{i}" for i in range(n)], acts, sens, conj(*parts), [], goal)


# --- value iteration ----------------------------------------------------------------

def shortest_costs(problem, states):
    """Goal distances for a fully observable deterministic problem by value iteration."""
    V = {s: 0.0 if problem.is_goal_state(s) else float("inf") for s in states}
    changed = True
    while changed:
        changed = False
        for s in states:
            if problem.is_goal_state(s):
                continue
            best = V[s]
            for a in problem.actuations:
                t = step_forward(a, s, problem.num_facts)
                if t is not None and 1 + V.get(t, float("inf")) < best:
                    best = 1 + V[t]
            if best < V[s]:
                V[s] = best
                changed = True
    return V


def reachable(problem, start):
    seen = {start}
    todo = [start]
    while todo:
        s = todo.pop()
        for a in problem.actuations:
            t = step_forward(a, s, problem.num_facts)
            if t is not None and t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


# --- histories --------------------------------------------------------------------

def random_history(rng, problem, length):
    """A history applicable in the forward belief, with observations drawn from it.

    Returns a list of (action, obs dict or None) and the final belief set.
    """
    n = problem.num_facts
    belief = set(initial_states(problem))
    steps = []
    for _ in range(length):
        ok = [a for a in problem.actions if all(truth(a.pre, as_dict(s, n)) for s in belief)]
        if not ok or not belief:
            break
        a = rng.choice(ok)
        s = rng.choice(sorted(belief))
        obs = None
        if a.is_sensing:
            obs = {f: bool((s >> f) & 1) for f in a.observed}
        steps.append((a, obs))
        belief = forward_belief(problem, steps)
    return steps, belief


def shortest_path_instance(rng, max_states=20):
    """A known-initial-state deterministic problem with a reachable goal.

    Returns (problem, start, costs) where costs holds optimal goal distances.
    """
    while True:
        p = random_problem(rng, n_facts=rng.randint(3, 5), n_actions=rng.randint(3, 7), hidden=False)
        start = initial_states(p)
        if len(start) != 1:
            continue
        start = start[0]
        states = reachable(p, start)
        if len(states) > max_states:
            continue
        costs = shortest_costs(p, states)
        if not 2 <= costs[start] < float("inf"):
            continue
        if sum(step_forward(a, start, p.num_facts) is not None for a in p.actuations) < 2:
            continue
        return p, start, costs


def optimal_actions(p, s, costs):
    out = set()
    for a in p.actuations:
        t = step_forward(a, s, p.num_facts)
        if t is not None and 1 + costs.get(t, float("inf")) == costs[s]:
            out.add(a.name)
    return out
