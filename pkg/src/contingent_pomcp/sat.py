"""CNF encoding and a small complete DPLL solver.

Fact ``i`` maps to DIMACS variable ``i + 1``; auxiliary variables are
allocated above the fact range so models projected onto facts are direct.
"""
from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .logic import FALSE, TRUE, And, Formula, Literal, Not, OneOf, Or, expand_oneof


class CNF:
    def __init__(self, num_facts: int):
        self.num_facts = num_facts
        self.num_vars = num_facts
        self.clauses: list[list[int]] = []
        self._defs: dict[Formula, int] = {}

    def copy(self) -> "CNF":
        c = CNF.__new__(CNF)
        c.num_facts = self.num_facts
        c.num_vars = self.num_vars
        c.clauses = list(self.clauses)
        c._defs = dict(self._defs)
        return c

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def add_clause(self, lits: Iterable[int]) -> None:
        self.clauses.append(list(lits))

    def assert_formula(self, f: Formula) -> None:
        """Add clauses forcing ``f`` to hold (equisatisfiable over facts)."""
        if f is TRUE:
            return
        if f is FALSE:
            self.clauses.append([])
            return
        t = type(f)
        if t is And:
            for it in f.items:
                self.assert_formula(it)
        elif t is Literal:
            self.clauses.append([_lit(f)])
        elif t is Or and all(type(it) is Literal for it in f.items):
            self.clauses.append([_lit(it) for it in f.items])
        elif t is OneOf:
            self.assert_formula(expand_oneof(f))
        else:
            self.clauses.append([self.encode(f)])

    def encode(self, f: Formula) -> int:
        """Tseitin literal equivalent to ``f``."""
        t = type(f)
        if t is Literal:
            return _lit(f)
        if t is Not:
            return -self.encode(f.item)
        got = self._defs.get(f)
        if got is not None:
            return got
        if f is TRUE or f is FALSE:
            v = self.new_var()
            self.clauses.append([v] if f is TRUE else [-v])
        elif t is OneOf:
            v = self.encode(expand_oneof(f))
        else:
            kids = [self.encode(it) for it in f.items]
            v = self.new_var()
            if t is And:
                for k in kids:
                    self.clauses.append([-v, k])
                self.clauses.append([v] + [-k for k in kids])
            else:
                for k in kids:
                    self.clauses.append([v, -k])
                self.clauses.append([-v] + kids)
        self._defs[f] = v
        return v


def _lit(l: Literal) -> int:
    return l.fact + 1 if l.positive else -(l.fact + 1)


class _Solver:
    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]]):
        self.val = [0] * (num_vars + 1)
        self.trail: list[int] = []
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.units: list[int] = []
        self.conflict = False
        occ = [0] * (num_vars + 1)
        for c in clauses:
            c = list(dict.fromkeys(c))
            if not c:
                self.conflict = True
                continue
            if len(c) == 1:
                self.units.append(c[0])
                continue
            s = set(c)
            if any(-l in s for l in c):
                continue
            idx = len(self.clauses)
            self.clauses.append(c)
            self.watches.setdefault(c[0], []).append(idx)
            self.watches.setdefault(c[1], []).append(idx)
            for l in c:
                occ[abs(l)] += 1
        self.order = sorted(range(1, num_vars + 1), key=lambda v: -occ[v])

    def _value(self, lit: int) -> int:
        v = self.val[lit if lit > 0 else -lit]
        return v if lit > 0 else -v

    def _assign(self, lit: int) -> None:
        if lit > 0:
            self.val[lit] = 1
        else:
            self.val[-lit] = -1
        self.trail.append(lit)

    def _propagate(self, head: int) -> bool:
        trail = self.trail
        val = self.val
        clauses = self.clauses
        watches = self.watches
        while head < len(trail):
            false_lit = -trail[head]
            head += 1
            ws = watches.get(false_lit)
            if not ws:
                continue
            keep: list[int] = []
            j = 0
            n = len(ws)
            while j < n:
                ci = ws[j]
                j += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = val[first] if first > 0 else -val[-first]
                if fv == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    kv = val[lk] if lk > 0 else -val[-lk]
                    if kv != -1:
                        c[1], c[k] = lk, false_lit
                        watches.setdefault(lk, []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if fv == -1:
                        keep.extend(ws[j:])
                        watches[false_lit] = keep
                        return False
                    self._assign(first)
            watches[false_lit] = keep
        return True

    def _undo(self, size: int) -> None:
        val = self.val
        for lit in self.trail[size:]:
            val[lit if lit > 0 else -lit] = 0
        del self.trail[size:]

    def solve(self) -> list[int] | None:
        if self.conflict:
            return None
        for u in self.units:
            v = self._value(u)
            if v == -1:
                return None
            if v == 0:
                self._assign(u)
        if not self._propagate(0):
            return None
        decisions: list[tuple[int, int, bool]] = []
        order = self.order
        val = self.val
        pos = 0
        while True:
            while pos < len(order) and val[order[pos]] != 0:
                pos += 1
            if pos == len(order):
                return list(val)
            var = order[pos]
            size = len(self.trail)
            decisions.append((size, -var, False))
            self._assign(-var)
            while not self._propagate(size):
                while decisions and decisions[-1][2]:
                    decisions.pop()
                if not decisions:
                    return None
                size, lit, _ = decisions.pop()
                self._undo(size)
                decisions.append((size, -lit, True))
                self._assign(-lit)
            # a backtrack may have unassigned variables before ``pos``
            pos = 0


def solve(num_vars: int, clauses: Sequence[Sequence[int]]) -> list[int] | None:
    """Return a model as a list indexed by variable (1 true, -1 false), or None."""
    return _Solver(num_vars, clauses).solve()


def satisfiable(cnf: CNF) -> bool:
    return solve(cnf.num_vars, cnf.clauses) is not None


def enumerate_models(cnf: CNF, project: Sequence[int], limit: int = 1 << 16) -> Iterator[int]:
    """Yield every assignment to the fact indices in ``project`` that extends to a model.

    Each assignment is reported as a bitmask over fact indices.
    """
    clauses = [list(c) for c in cnf.clauses]
    count = 0
    while True:
        model = solve(cnf.num_vars, clauses)
        if model is None:
            return
        bits = 0
        block = []
        for f in project:
            if model[f + 1] == 1:
                bits |= 1 << f
                block.append(-(f + 1))
            else:
                block.append(f + 1)
        yield bits
        count += 1
        if count >= limit:
            raise RuntimeError(f"more than {limit} models")
        if not block:
            return
        clauses.append(block)
