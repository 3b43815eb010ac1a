"""Propositional formulas over dense fact indices.

Formulas are immutable and hashable so they can key memo tables. Every node
carries ``mask``, the bitmask of facts it mentions, which lets substitution
passes skip subtrees that cannot be affected.

States are plain ``int`` bitmasks: bit ``i`` is the truth value of fact ``i``.
"""
from __future__ import annotations

from typing import Callable, Iterable, Iterator


class Formula:
    __slots__ = ("mask", "_hash")

    def holds(self, state: int) -> bool:
        raise NotImplementedError

    def __hash__(self) -> int:
        return self._hash

    def __invert__(self) -> "Formula":
        return negate(self)

    def __and__(self, other: "Formula") -> "Formula":
        return conj(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return disj(self, other)


class _Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value
        self.mask = 0
        self._hash = hash(("const", value))

    def holds(self, state):
        return self.value

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, _Const) and other.value == self.value

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"

    def __reduce__(self):
        return (_const, (self.value,))


TRUE = _Const(True)
FALSE = _Const(False)


def _const(value):
    return TRUE if value else FALSE


class Literal(Formula):
    """A fact or its negation."""

    __slots__ = ("fact", "positive")

    def __init__(self, fact: int, positive: bool = True):
        self.fact = fact
        self.positive = positive
        self.mask = 1 << fact
        self._hash = hash((fact, positive))

    def holds(self, state):
        return bool((state >> self.fact) & 1) == self.positive

    def negated(self) -> "Literal":
        return Literal(self.fact, not self.positive)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return (
            isinstance(other, Literal)
            and other.fact == self.fact
            and other.positive == self.positive
        )

    def __lt__(self, other):
        return (self.fact, not self.positive) < (other.fact, not other.positive)

    def __repr__(self):
        return f"{'' if self.positive else '~'}f{self.fact}"

    def __reduce__(self):
        return (Literal, (self.fact, self.positive))


class _Nary(Formula):
    __slots__ = ("items",)
    _tag = ""

    def __init__(self, items: tuple):
        self.items = items
        m = 0
        for it in items:
            m |= it.mask
        self.mask = m
        self._hash = hash((self._tag, items))

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return type(other) is type(self) and other.items == self.items

    def __repr__(self):
        return f"{self._tag}({', '.join(map(repr, self.items))})"

    def __reduce__(self):
        return (type(self), (self.items,))


class And(_Nary):
    __slots__ = ()
    _tag = "and"

    def holds(self, state):
        for it in self.items:
            if not it.holds(state):
                return False
        return True


class Or(_Nary):
    __slots__ = ()
    _tag = "or"

    def holds(self, state):
        for it in self.items:
            if it.holds(state):
                return True
        return False


class OneOf(_Nary):
    """Exactly one of the listed literals holds."""

    __slots__ = ()
    _tag = "oneof"

    def holds(self, state):
        n = 0
        for it in self.items:
            if it.holds(state):
                n += 1
                if n > 1:
                    return False
        return n == 1


class Not(Formula):
    __slots__ = ("item",)

    def __init__(self, item: Formula):
        self.item = item
        self.mask = item.mask
        self._hash = hash(("not", item))

    def holds(self, state):
        return not self.item.holds(state)

    __hash__ = Formula.__hash__

    def __eq__(self, other):
        return isinstance(other, Not) and other.item == self.item

    def __repr__(self):
        return f"not({self.item!r})"

    def __reduce__(self):
        return (Not, (self.item,))


def evaluate(f: Formula, state: int) -> bool:
    return f.holds(state)


# --- smart constructors -----------------------------------------------------

def conj(*items: Formula) -> Formula:
    """Conjunction with flattening, constant folding and complement detection."""
    out: list[Formula] = []
    seen: set = set()
    pos = neg = 0
    stack = list(reversed(items))
    while stack:
        it = stack.pop()
        if it is TRUE:
            continue
        if it is FALSE:
            return FALSE
        if type(it) is And:
            stack.extend(reversed(it.items))
            continue
        if it in seen:
            continue
        if type(it) is Literal:
            if it.positive:
                if neg & it.mask:
                    return FALSE
                pos |= it.mask
            else:
                if pos & it.mask:
                    return FALSE
                neg |= it.mask
        seen.add(it)
        out.append(it)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*items: Formula) -> Formula:
    """Disjunction with flattening, constant folding and complement detection."""
    out: list[Formula] = []
    seen: set = set()
    pos = neg = 0
    stack = list(reversed(items))
    while stack:
        it = stack.pop()
        if it is FALSE:
            continue
        if it is TRUE:
            return TRUE
        if type(it) is Or:
            stack.extend(reversed(it.items))
            continue
        if it in seen:
            continue
        if type(it) is Literal:
            if it.positive:
                if neg & it.mask:
                    return TRUE
                pos |= it.mask
            else:
                if pos & it.mask:
                    return TRUE
                neg |= it.mask
        seen.add(it)
        out.append(it)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def negate(f: Formula) -> Formula:
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    t = type(f)
    if t is Literal:
        return f.negated()
    if t is Not:
        return f.item
    return Not(f)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(negate(a), b)


def oneof(*lits: Literal) -> Formula:
    lits = tuple(dict.fromkeys(lits))
    if len({l.fact for l in lits}) != len(lits):
        raise ValueError("oneof lists the same fact twice")
    if len(lits) < 2:
        raise ValueError("oneof needs at least two distinct facts")
    return OneOf(lits)


def expand_oneof(f: OneOf) -> Formula:
    """At-least-one plus pairwise at-most-one."""
    lits = f.items
    parts = [disj(*lits)]
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            parts.append(disj(negate(lits[i]), negate(lits[j])))
    return conj(*parts)


# --- structural passes ------------------------------------------------------

def replace_literals(f: Formula, fn: Callable[[Literal], Formula], only: int = -1) -> Formula:
    """Rebuild ``f`` with every literal ``l`` replaced by ``fn(l)``.

    Subtrees whose fact mask does not intersect ``only`` are returned as is.
    """
    if not (f.mask & only):
        return f
    t = type(f)
    if t is Literal:
        return fn(f)
    if t is And:
        return conj(*[replace_literals(it, fn, only) for it in f.items])
    if t is Or:
        return disj(*[replace_literals(it, fn, only) for it in f.items])
    if t is Not:
        return negate(replace_literals(f.item, fn, only))
    if t is OneOf:
        return replace_literals(expand_oneof(f), fn, only)
    return f


def simplify_known(f: Formula, known_true: int, known_false: int) -> Formula:
    """Substitute constants for facts whose value is known."""
    known = known_true | known_false
    if not (f.mask & known):
        return f

    def sub(l: Literal) -> Formula:
        if known_true & l.mask:
            return _const(l.positive)
        if known_false & l.mask:
            return _const(not l.positive)
        return l

    return replace_literals(f, sub, known)


def literal_conjunction(f: Formula) -> tuple[Literal, ...] | None:
    """The literals of ``f`` if it is a conjunction of literals, else None."""
    if f is TRUE:
        return ()
    if type(f) is Literal:
        return (f,)
    if type(f) is And and all(type(it) is Literal for it in f.items):
        return f.items
    return None


def literal_masks(lits: Iterable[Literal]) -> tuple[int, int]:
    pos = neg = 0
    for l in lits:
        if l.positive:
            pos |= l.mask
        else:
            neg |= l.mask
    return pos, neg


def iter_literals(f: Formula) -> Iterator[Literal]:
    t = type(f)
    if t is Literal:
        yield f
    elif t is Not:
        yield from iter_literals(f.item)
    elif isinstance(f, _Nary):
        for it in f.items:
            yield from iter_literals(it)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def state_from_facts(facts: Iterable[int]) -> int:
    s = 0
    for f in facts:
        s |= 1 << f
    return s


def facts_of(state: int) -> list[int]:
    return list(iter_bits(state))
