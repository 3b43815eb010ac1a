"""Belief reasoning over action/observation histories.

Two routes answer "does psi hold in every state consistent with history h":

* regression: psi is rewritten backwards through h and checked for
  entailment against the initial constraint with a SAT call. It is exact
  but only defined for deterministic actions.
* particles: psi is checked on a finite set of sampled states consistent
  with h. It is used whenever h contains a stochastic actuation.

Each history node also keeps literals known to hold after it (``kt`` and
``kf`` bitmasks), which answer most queries without any search.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .logic import (
    FALSE,
    TRUE,
    Formula,
    Literal,
    conj,
    disj,
    iter_bits,
    literal_conjunction,
    literal_masks,
    negate,
    replace_literals,
    simplify_known,
)
from .model import (
    ActuationAction,
    ModelError,
    Problem,
    SensingAction,
    observation_from_bits,
    observation_to_bits,
)
from .sat import CNF, enumerate_models, satisfiable

MAX_REJECTIONS = 1000


class StochasticRegressionError(ValueError):
    """Regression was requested through an action with stochastic effects."""


class UnsatisfiableInitial(RuntimeError):
    pass


class EmptyBelief(RuntimeError):
    """A particle query was made with no particles and no regression route."""


@dataclass(frozen=True)
class HistoryStep:
    action: ActuationAction | SensingAction
    observation: dict | None


class History:
    """Immutable linked history node.

    ``kt``/``kf`` are the facts known true/false after the last step. They
    only ever grow on a given node (new values are learned from queries).
    """

    __slots__ = ("parent", "action", "obs_bits", "kt", "kf", "deterministic", "length", "_steps")

    def __init__(self, parent, action, obs_bits, kt, kf, deterministic, length):
        self.parent = parent
        self.action = action
        self.obs_bits = obs_bits
        self.kt = kt
        self.kf = kf
        self.deterministic = deterministic
        self.length = length
        self._steps = None

    @classmethod
    def root(cls, problem: Problem) -> "History":
        return cls(None, None, None, problem.init_known_true, problem.init_known_false, True, 0)

    def __len__(self):
        return self.length

    def extend(self, action, observation: Mapping[int, bool] | int | None = None) -> "History":
        """Append a step. ``observation`` is a dict or the raw observed bits."""
        if isinstance(observation, Mapping):
            obs_bits = observation_to_bits(action, observation)
        else:
            obs_bits = observation
        needs_obs = bool(action.obs_mask)
        if needs_obs and obs_bits is None:
            raise ModelError(f"{action.name} requires an observation")
        if not needs_obs and obs_bits is not None:
            raise ModelError(f"{action.name} produces no observation")
        if obs_bits is not None and obs_bits & ~action.obs_mask:
            raise ModelError(f"observation mentions facts outside obs({action.name})")
        kt, kf = self.kt, self.kf
        # the action was applicable, so its precondition held
        kt |= action.pre_pos
        kf |= action.pre_neg
        if not action.is_sensing:
            kt, kf = _actuation_update(action, kt, kf)
        if obs_bits is not None:
            kt = (kt & ~action.obs_mask) | obs_bits
            kf = (kf & ~action.obs_mask) | (action.obs_mask & ~obs_bits)
        det = self.deterministic and action.deterministic
        return History(self, action, obs_bits, kt, kf, det, self.length + 1)

    def nodes(self) -> list["History"]:
        """Nodes from the first step to this one (root excluded)."""
        out = []
        n = self
        while n.parent is not None:
            out.append(n)
            n = n.parent
        out.reverse()
        return out

    def compiled_steps(self) -> tuple:
        if self._steps is None:
            self._steps = tuple((n.action, n.obs_bits) for n in self.nodes())
        return self._steps

    def steps(self) -> Iterator[HistoryStep]:
        for a, bits in self.compiled_steps():
            obs = None if bits is None else observation_from_bits(a, bits)
            yield HistoryStep(a, obs)

    def known(self) -> set[Literal]:
        return {Literal(f, True) for f in iter_bits(self.kt)} | {
            Literal(f, False) for f in iter_bits(self.kf)
        }

    def learn(self, pos: int, neg: int) -> None:
        """Record literals proven to hold after this node."""
        self.kt |= pos
        self.kf |= neg

    def __repr__(self):
        names = [a.name for a, _ in self.compiled_steps()]
        return f"History({names})"


def _actuation_update(a: ActuationAction, kt: int, kf: int) -> tuple[int, int]:
    sure_pos = sure_neg = maybe_pos = maybe_neg = 0
    for cpos, cneg, outcome in a._compiled:
        if (cpos & kf) or (cneg & kt):
            continue  # condition known false
        certain = (cpos & kt) == cpos and (cneg & kf) == cneg
        opts = outcome.compiled
        all_pos, all_neg = -1, -1
        for p, n, _ in opts:
            maybe_pos |= p
            maybe_neg |= n
            all_pos &= p
            all_neg &= n
        if certain:
            sure_pos |= all_pos
            sure_neg |= all_neg
    new_kt = (kt & ~maybe_neg) | (sure_pos & ~maybe_neg)
    new_kf = (kf & ~maybe_pos) | (sure_neg & ~maybe_pos)
    # facts that may only be set stay true if already true, and vice versa
    new_kt |= kt & maybe_pos & ~maybe_neg
    new_kf |= kf & maybe_neg & ~maybe_pos
    return new_kt, new_kf


# --- regression ---------------------------------------------------------------

_regression_tables: dict[int, tuple] = {}


def _conditions(a: ActuationAction):
    key = id(a)
    got = _regression_tables.get(key)
    if got is not None and got[0] is a:
        return got[1]
    c_pos: dict[int, list[Formula]] = {}
    c_neg: dict[int, list[Formula]] = {}
    for e in a.effects:
        lits = e.outcome.options[0][0]
        for l in lits:
            (c_pos if l.positive else c_neg).setdefault(l.fact, []).append(e.condition)
    table = {}
    for f in set(c_pos) | set(c_neg):
        table[f] = (disj(*c_pos.get(f, [])), disj(*c_neg.get(f, [])))
    _regression_tables[key] = (a, table)
    return table


def regress_action(phi: Formula, a: ActuationAction) -> Formula:
    """Weakest condition before ``a`` under which ``phi`` holds after it."""
    if a.is_sensing:
        return conj(a.pre, phi)
    if not a.deterministic:
        raise StochasticRegressionError(f"{a.name} has stochastic effects")
    table = _conditions(a)
    if table and phi.mask & a.modified_mask:
        def sub(l: Literal) -> Formula:
            got = table.get(l.fact)
            if got is None:
                return l
            c_true, c_false = got
            if not l.positive:
                c_true, c_false = c_false, c_true
            return disj(c_true, conj(l, negate(c_false)))

        phi = replace_literals(phi, sub, a.modified_mask)
    return conj(a.pre, phi)


def _observation_antecedent(a, obs_bits: int) -> list[Literal]:
    return [Literal(f, bool((obs_bits >> f) & 1)) for f in a.observe]


def regress_observation(phi: Formula, a, o: Mapping[int, bool] | int) -> Formula:
    """Condition before ``a`` under which observing ``o`` implies ``phi`` after it."""
    bits = observation_to_bits(a, o) if isinstance(o, Mapping) else o
    neg = [l.negated() for l in _observation_antecedent(a, bits)]
    return regress_action(disj(*neg, phi), a)


def _regress_step(phi: Formula, node: History) -> Formula:
    a = node.action
    if node.obs_bits is not None:
        return regress_observation(phi, a, node.obs_bits)
    return regress_action(phi, a)


def regress_history(phi: Formula, h: History) -> Formula:
    """Regress ``phi`` from the end of ``h`` to the initial state.

    Known literals cached on each node are substituted on the way.
    """
    node = h
    phi = simplify_known(phi, node.kt, node.kf)
    while node.parent is not None:
        if not node.action.deterministic:
            raise StochasticRegressionError(f"history step {node.action.name} is stochastic")
        phi = _regress_step(phi, node)
        node = node.parent
        if phi is TRUE or phi is FALSE:
            return phi
        phi = simplify_known(phi, node.kt, node.kf)
    return phi


# --- entailment ---------------------------------------------------------------

def _num_facts(*fs: Formula) -> int:
    m = 0
    for f in fs:
        m |= f.mask
    return m.bit_length()


def entails(phi_i: Formula, support: Formula, psi: Formula) -> bool:
    """True iff every model of ``phi_i`` and ``support`` satisfies ``psi``."""
    if psi is TRUE:
        return True
    cnf = CNF(_num_facts(phi_i, support, psi))
    cnf.assert_formula(phi_i)
    cnf.assert_formula(support)
    cnf.assert_formula(negate(psi))
    return not satisfiable(cnf)


class EntailmentOracle:
    """Entailment against a fixed problem's initial constraint, memoized."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.base = CNF(problem.num_facts)
        self.base.assert_formula(problem.support_formula())
        self.memo: dict[Formula, bool] = {}
        self.calls = 0

    def __call__(self, psi: Formula) -> bool:
        if psi is TRUE:
            return True
        got = self.memo.get(psi)
        if got is not None:
            return got
        self.calls += 1
        cnf = self.base.copy()
        cnf.assert_formula(negate(psi))
        res = not satisfiable(cnf)
        self.memo[psi] = res
        return res

    def consistent(self) -> bool:
        return satisfiable(self.base)


def holds_in_belief(
    psi: Formula,
    h: History,
    particles: Iterable[int] | None,
    problem: Problem,
    strict: bool = False,
) -> bool:
    """Whether ``psi`` holds in every state consistent with ``h``."""
    if psi is TRUE:
        return True
    lits = literal_conjunction(psi)
    if lits is not None:
        pos, neg = literal_masks(lits)
        if (h.kt & pos) == pos and (h.kf & neg) == neg:
            return True
        if (h.kf & pos) or (h.kt & neg):
            return False
    if h.deterministic:
        res = problem.entailment(regress_history(psi, h))
        if res and lits is not None:
            h.learn(pos, neg)
        return res
    if strict:
        return False
    if particles is None:
        raise EmptyBelief("stochastic history and no particles")
    seen = False
    for s in particles:
        seen = True
        if not psi.holds(s):
            return False
    if not seen:
        raise EmptyBelief("stochastic history and no particles")
    return True


# --- sampling -----------------------------------------------------------------

class InitialSampler:
    """Draws initial states.

    Probabilistic clauses are sampled by their weights. Facts tied only by
    oneof/or constraints are sampled uniformly over the satisfying
    assignments of each independent group, given the probabilistic draws.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        self.base = problem.init_known_true
        self.probs = [(sf, sf.mentioned()) for sf in problem.init_probs]
        self.groups = self._groups()

    def _groups(self):
        p = self.problem
        cons = list(p.init_constraints)
        comps: list[tuple[int, list[Formula]]] = []
        for c in cons:
            m = c.mask
            merged = [c]
            rest = []
            for cm, cl in comps:
                if cm & m:
                    m |= cm
                    merged.extend(cl)
                else:
                    rest.append((cm, cl))
            comps = rest + [(m, merged)]
        known = p.init_known_true | p.init_known_false
        groups = []
        for m, cl in comps:
            cnf = CNF(p.num_facts)
            for f in iter_bits(m & known):
                cnf.assert_formula(Literal(f, bool((p.init_known_true >> f) & 1)))
            for c in cl:
                cnf.assert_formula(c)
            free = m & ~known
            models = list(enumerate_models(cnf, list(iter_bits(free))))
            if not models:
                raise UnsatisfiableInitial("initial constraint group has no model")
            groups.append((free, models))
        return groups

    def _draw(self, rng: random.Random) -> int | None:
        s = self.base
        fixed = 0
        for sf, scope in self.probs:
            pos, _ = sf.sample(rng)
            s |= pos
            fixed |= scope
        for free, models in self.groups:
            inter = free & fixed
            if inter:
                want = s & inter
                ok = [m for m in models if m & inter == want]
                if not ok:
                    return None
                m = ok[rng.randrange(len(ok))] if len(ok) > 1 else ok[0]
            else:
                m = models[rng.randrange(len(models))] if len(models) > 1 else models[0]
            s = (s & ~free) | m
        return s

    def sample(self, rng: random.Random) -> int:
        for _ in range(MAX_REJECTIONS):
            s = self._draw(rng)
            if s is not None:
                return s
        raise UnsatisfiableInitial(f"no initial state after {MAX_REJECTIONS} draws")


def sample_initial(problem: Problem, rng: random.Random) -> int:
    return problem.initial_sampler.sample(rng)


def push_through_history(s: int, h: History | Sequence, rng: random.Random) -> int | None:
    """Advance ``s`` along ``h``; None if it contradicts an observation or precondition."""
    steps = h.compiled_steps() if isinstance(h, History) else h
    for a, obs_bits in steps:
        if (s & a.pre_pos) != a.pre_pos or (s & a.pre_neg):
            return None
        if not a.is_sensing:
            s = a.apply(s, rng)
        if obs_bits is not None and (s & a.obs_mask) != obs_bits:
            return None
    return s


def sample_consistent(problem: Problem, h: History, rng: random.Random, budget: int = MAX_REJECTIONS) -> int | None:
    for _ in range(budget):
        s = push_through_history(sample_initial(problem, rng), h, rng)
        if s is not None:
            return s
    return None


def step_state(a, obs_bits: int | None, s: int, rng: random.Random) -> int | None:
    """One history step applied to a single particle; None on rejection."""
    if (s & a.pre_pos) != a.pre_pos or (s & a.pre_neg):
        return None
    if not a.is_sensing:
        s = a.apply(s, rng)
    if obs_bits is not None and (s & a.obs_mask) != obs_bits:
        return None
    return s


def initial_support(problem: Problem, limit: int = 1 << 16) -> list[int]:
    """All initial states with nonzero probability."""
    cnf = CNF(problem.num_facts)
    cnf.assert_formula(problem.support_formula())
    hidden = list(iter_bits(problem.hidden_mask))
    return [problem.init_known_true | m for m in enumerate_models(cnf, hidden, limit)]
