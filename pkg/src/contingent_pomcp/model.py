"""Grounded stochastic contingent planning problems.

A state is an ``int`` bitmask over fact indices. Actions precompile their
preconditions and effects into masks so that applying an action costs a few
integer operations.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .logic import (
    FALSE,
    TRUE,
    Formula,
    Literal,
    OneOf,
    Or,
    conj,
    disj,
    iter_literals,
    literal_conjunction,
    literal_masks,
    negate,
)

PROB_TOLERANCE = 1e-9

State = int


class ModelError(ValueError):
    """Malformed problem or action definition."""


class PreconditionViolated(RuntimeError):
    """An action was applied in a state that does not satisfy its precondition."""


class ConflictingEffects(RuntimeError):
    """Triggered effects asserted both a literal and its negation."""


@dataclass(frozen=True)
class Fact:
    id: int
    name: str


@dataclass(frozen=True)
class StochasticFormula:
    """Mutually exclusive options, each a conjunction of literals with a probability."""

    options: tuple[tuple[tuple[Literal, ...], float], ...]

    def __post_init__(self):
        if not self.options:
            raise ModelError("stochastic formula without options")
        total = 0.0
        for lits, p in self.options:
            if not lits:
                raise ModelError("empty stochastic option")
            if not (0.0 < p <= 1.0):
                raise ModelError(f"option probability {p} outside (0, 1]")
            pos, neg = literal_masks(lits)
            if pos & neg:
                raise ModelError("option asserts a literal and its negation")
            total += p
        if abs(total - 1.0) > PROB_TOLERANCE:
            raise ModelError(f"option probabilities sum to {total}, not 1")

    @classmethod
    def deterministic(cls, lits: Iterable[Literal]) -> "StochasticFormula":
        return cls(((tuple(lits), 1.0),))

    @property
    def is_deterministic(self) -> bool:
        return len(self.options) == 1

    @cached_property
    def compiled(self) -> tuple[tuple[int, int, float], ...]:
        """(set mask, clear mask, cumulative probability) per option."""
        out = []
        acc = 0.0
        for lits, p in self.options:
            pos, neg = literal_masks(lits)
            acc += p
            out.append((pos, neg, acc))
        return tuple(out)

    def sample(self, rng: random.Random) -> tuple[int, int]:
        comp = self.compiled
        if len(comp) == 1:
            return comp[0][0], comp[0][1]
        r = rng.random() * comp[-1][2]
        for pos, neg, acc in comp:
            if r < acc:
                return pos, neg
        return comp[-1][0], comp[-1][1]

    def mentioned(self) -> int:
        m = 0
        for lits, _ in self.options:
            for l in lits:
                m |= l.mask
        return m


@dataclass(frozen=True)
class Effect:
    condition: Formula
    outcome: StochasticFormula


def _conjunction(f: Formula, what: str) -> tuple[Literal, ...]:
    lits = literal_conjunction(f)
    if lits is None:
        raise ModelError(f"{what} must be a conjunction of literals, got {f!r}")
    return lits


def _compile_pre(pre: Formula, name: str) -> tuple[int, int, bool]:
    if pre is FALSE:
        # bit 0 required both true and false: never applicable to any state
        return 1, 1, True
    pos, neg = literal_masks(_conjunction(pre, f"precondition of {name}"))
    return pos, neg, False


@dataclass(eq=False)
class ActuationAction:
    """An action with (possibly conditional, possibly stochastic) effects.

    ``observe`` is non-empty only for combined actions: the listed facts are
    sensed right after the effects are applied.
    """

    name: str
    pre: Formula
    effects: tuple[Effect, ...]
    observe: tuple[int, ...] = ()
    index: int = field(default=-1, compare=False)

    def __post_init__(self):
        self.pre_pos, self.pre_neg, self.unsatisfiable = _compile_pre(self.pre, self.name)
        comp = []
        modified = 0
        for e in self.effects:
            cpos, cneg = literal_masks(_conjunction(e.condition, f"effect condition of {self.name}"))
            comp.append((cpos, cneg, e.outcome))
            modified |= e.outcome.mentioned()
        self._compiled = tuple(comp)
        self.modified_mask = modified
        self.deterministic = all(e.outcome.is_deterministic for e in self.effects)
        self.obs_mask = 0
        for f in self.observe:
            self.obs_mask |= 1 << f
        self._static_mutex_check()

    def _static_mutex_check(self):
        # effects certain to fire together whenever the action applies
        sure_pos = sure_neg = 0
        if self.unsatisfiable:
            return
        for cpos, cneg, outcome in self._compiled:
            if (cpos & ~self.pre_pos) or (cneg & ~self.pre_neg) or not outcome.is_deterministic:
                continue
            pos, neg, _ = outcome.compiled[0]
            sure_pos |= pos
            sure_neg |= neg
        if sure_pos & sure_neg:
            raise ModelError(f"{self.name}: unconditional effects assert a literal and its negation")

    @property
    def is_sensing(self) -> bool:
        return False

    @property
    def is_combined(self) -> bool:
        return bool(self.observe)

    def applicable(self, s: int) -> bool:
        return (s & self.pre_pos) == self.pre_pos and not (s & self.pre_neg)

    def apply(self, s: int, rng: random.Random) -> int:
        if (s & self.pre_pos) != self.pre_pos or (s & self.pre_neg):
            raise PreconditionViolated(f"{self.name} not applicable")
        set_mask = clear_mask = 0
        for cpos, cneg, outcome in self._compiled:
            if (s & cpos) == cpos and not (s & cneg):
                comp = outcome.compiled
                if len(comp) == 1:
                    p, n, _ = comp[0]
                else:
                    p, n = outcome.sample(rng)
                set_mask |= p
                clear_mask |= n
        if set_mask & clear_mask:
            raise ConflictingEffects(f"{self.name}: simultaneous effects conflict")
        return (s & ~clear_mask) | set_mask

    def successors(self, s: int, limit: int = 256) -> list[int]:
        """Every state reachable by one application (support only, no weights)."""
        outs = [(0, 0)]
        for cpos, cneg, outcome in self._compiled:
            if (s & cpos) == cpos and not (s & cneg):
                comp = outcome.compiled
                outs = [(p | op, n | on) for p, n in outs for op, on, _ in comp]
                if len(outs) > limit:
                    raise ModelError(f"{self.name}: more than {limit} joint outcomes")
        res = []
        for p, n in outs:
            if p & n:
                raise ConflictingEffects(f"{self.name}: simultaneous effects conflict")
            t = (s & ~n) | p
            if t not in res:
                res.append(t)
        return res

    def relaxed_effects(self) -> Iterable[tuple[int, int, int, int]]:
        """(condition pos, condition neg, add pos, add neg) with all options unioned."""
        for cpos, cneg, outcome in self._compiled:
            apos = aneg = 0
            for p, n, _ in outcome.compiled:
                apos |= p
                aneg |= n
            yield cpos, cneg, apos, aneg

    def __repr__(self):
        return f"ActuationAction({self.name!r})"


@dataclass(eq=False)
class SensingAction:
    name: str
    pre: Formula
    observed: tuple[int, ...]
    index: int = field(default=-1, compare=False)

    def __post_init__(self):
        if not self.observed:
            raise ModelError(f"sensing action {self.name} observes nothing")
        self.pre_pos, self.pre_neg, self.unsatisfiable = _compile_pre(self.pre, self.name)
        self.obs_mask = 0
        for f in self.observed:
            self.obs_mask |= 1 << f
        self.observe = self.observed
        self.deterministic = True
        self.modified_mask = 0

    @property
    def is_sensing(self) -> bool:
        return True

    is_combined = False

    def applicable(self, s: int) -> bool:
        return (s & self.pre_pos) == self.pre_pos and not (s & self.pre_neg)

    def __repr__(self):
        return f"SensingAction({self.name!r})"


Action = ActuationAction | SensingAction


def apply_actuation(a: ActuationAction, s: int, rng: random.Random) -> int:
    """Sample a successor of ``s``; all triggered effects are read from ``s``."""
    return a.apply(s, rng)


def apply_sensing(a: SensingAction | ActuationAction, s: int) -> dict[int, bool]:
    if not a.applicable(s) and a.is_sensing:
        raise PreconditionViolated(f"{a.name} not applicable")
    return {f: bool((s >> f) & 1) for f in a.observe}


def observation_bits(a, s: int) -> int:
    return s & a.obs_mask


def observation_from_bits(a, bits: int) -> dict[int, bool]:
    return {f: bool((bits >> f) & 1) for f in a.observe}


def observation_to_bits(a, obs: Mapping[int, bool]) -> int:
    if set(obs) != set(a.observe):
        raise ModelError(f"observation keys {sorted(obs)} differ from obs({a.name})")
    bits = 0
    for f, v in obs.items():
        if v:
            bits |= 1 << f
    return bits


def evaluate(f: Formula, s: int) -> bool:
    return f.holds(s)


class Problem:
    """A grounded stochastic contingent planning task.

    ``init`` is the initial formula (literals, disjunctions, oneof clauses).
    ``init_probs`` are independent stochastic formulas over disjoint fact
    scopes; sampling an option sets its literals and makes the other facts
    of that scope false. Facts mentioned nowhere in the initial description
    are false.
    """

    def __init__(
        self,
        facts: Sequence[str],
        actuations: Sequence[ActuationAction],
        sensings: Sequence[SensingAction],
        init: Formula,
        init_probs: Sequence[StochasticFormula],
        goal: Formula,
        name: str = "problem",
    ):
        self.name = name
        self.facts = tuple(Fact(i, n) for i, n in enumerate(facts))
        if len({f.name for f in self.facts}) != len(self.facts):
            raise ModelError("duplicate fact names")
        self.fact_index = {f.name: f.id for f in self.facts}
        self.num_facts = len(self.facts)
        self.full_mask = (1 << self.num_facts) - 1
        self.actuations = tuple(actuations)
        self.sensings = tuple(sensings)
        self.actions = self.actuations + self.sensings
        if len({a.name for a in self.actions}) != len(self.actions):
            raise ModelError("duplicate action names")
        for i, a in enumerate(self.actions):
            a.index = i
        self.action_index = {a.name: a for a in self.actions}
        self.init = init
        self.init_probs = tuple(init_probs)
        self.goal = goal
        self._check_facts()
        self._analyse_init()
        lits = literal_conjunction(goal)
        self.goal_lits = lits
        self.goal_pos, self.goal_neg = literal_masks(lits) if lits is not None else (0, 0)

    def _check_facts(self):
        full = self.full_mask
        masks = [self.init.mask, self.goal.mask]
        for sf in self.init_probs:
            masks.append(sf.mentioned())
        for a in self.actions:
            masks.append(a.pre.mask)
            if a.unsatisfiable:
                continue
            if a.is_sensing:
                masks.append(a.obs_mask)
            else:
                masks.append(a.obs_mask | a.modified_mask)
                for e in a.effects:
                    masks.append(e.condition.mask)
        for m in masks:
            if m & ~full:
                raise ModelError("formula mentions an undeclared fact")

    def _analyse_init(self):
        # known literals are top-level unit conjuncts; everything in a clause is hidden
        parts = self.init.items if type(self.init).__name__ == "And" else (self.init,)
        known_true = known_false = 0
        hidden = 0
        constraints = []
        for p in parts:
            if p is TRUE:
                continue
            if type(p) is Literal:
                if p.positive:
                    known_true |= p.mask
                else:
                    known_false |= p.mask
            else:
                hidden |= p.mask
                constraints.append(p)
        scopes = 0
        for sf in self.init_probs:
            m = sf.mentioned()
            if m & scopes:
                raise ModelError("initial probabilistic clauses share facts")
            scopes |= m
        hidden |= scopes
        if known_true & known_false:
            raise ModelError("initial formula asserts a literal and its negation")
        self.init_constraints = tuple(constraints)
        self.hidden_mask = hidden & ~(known_true | known_false)
        self.init_known_true = known_true
        self.init_known_false = (self.full_mask & ~known_true & ~self.hidden_mask)

    def support_formula(self) -> Formula:
        """Formula whose models are exactly the states with nonzero initial probability."""
        parts = [self.init]
        for lit_f in self.closed_world_literals():
            parts.append(lit_f)
        for sf in self.init_probs:
            scope = sf.mentioned()
            opts = []
            for lits, _ in sf.options:
                pos, neg = literal_masks(lits)
                rest = scope & ~pos & ~neg
                opts.append(conj(*lits, *[Literal(f, False) for f in _bits(rest)]))
            parts.append(disj(*opts))
        return conj(*parts)

    def closed_world_literals(self) -> list[Literal]:
        unmentioned = self.init_known_false & ~self._init_literal_mask()
        return [Literal(f, False) for f in _bits(unmentioned)]

    def _init_literal_mask(self) -> int:
        return self.init.mask

    def fact(self, name: str) -> int:
        return self.fact_index[name]

    def lit(self, name: str, positive: bool = True) -> Literal:
        return Literal(self.fact_index[name], positive)

    def state(self, true_facts: Iterable[str]) -> int:
        s = 0
        for n in true_facts:
            s |= 1 << self.fact_index[n]
        return s

    def describe(self, s: int) -> list[str]:
        return [f.name for f in self.facts if (s >> f.id) & 1]

    def is_goal_state(self, s: int) -> bool:
        if self.goal_lits is not None:
            return (s & self.goal_pos) == self.goal_pos and not (s & self.goal_neg)
        return self.goal.holds(s)

    @cached_property
    def initial_sampler(self):
        from .belief import InitialSampler

        return InitialSampler(self)

    @cached_property
    def entailment(self):
        from .belief import EntailmentOracle

        return EntailmentOracle(self)

    def structure(self):
        """Hashable description used for structural comparisons."""
        def act(a):
            if a.is_sensing:
                return ("sense", a.name, a.pre, a.observed)
            effs = tuple(
                (e.condition, tuple((frozenset(l), round(p, 12)) for l, p in e.outcome.options))
                for e in a.effects
            )
            return ("act", a.name, a.pre, effs, a.observe)

        probs = tuple(
            tuple((frozenset(l), round(p, 12)) for l, p in sf.options) for sf in self.init_probs
        )
        return (
            tuple(f.name for f in self.facts),
            tuple(act(a) for a in self.actions),
            self.init,
            probs,
            self.goal,
        )

    def __repr__(self):
        return (
            f"Problem({self.name!r}, facts={self.num_facts}, "
            f"actuations={len(self.actuations)}, sensings={len(self.sensings)})"
        )


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low
