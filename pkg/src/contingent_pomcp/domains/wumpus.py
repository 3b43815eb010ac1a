"""Cross a grid whose off-diagonal cells may hide a Wumpus or a pit.

For each slot i in 2..n-1 exactly one of the cells (i, i+1) and (i+1, i)
is dangerous; slots alternate between Wumpuses (even i) and pits (odd i).
Wumpuses cause a stench and pits a breeze in adjacent cells, which the agent
can sense where it stands. Moving requires the target to be known safe.
"""
from __future__ import annotations

import itertools

from .common import atom, cell, check_size, conj, probabilistic

DEFAULT_PRIOR = 0.65


def slots(n: int) -> list[tuple[str, tuple[int, int], tuple[int, int]]]:
    out = []
    for i in range(2, n):
        kind = "wumpus" if i % 2 == 0 else "pit"
        out.append((kind, (i, i + 1), (i + 1, i)))
    return out


def neighbours(n: int, x: int, y: int):
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        if 1 <= x + dx <= n and 1 <= y + dy <= n:
            yield x + dx, y + dy


def configurations(n: int, prior: float = DEFAULT_PRIOR):
    """Yield (probability, {cell: kind}) for every hazard placement."""
    sl = slots(n)
    for choice in itertools.product((0, 1), repeat=len(sl)):
        pr = 1.0
        hazards = {}
        for (kind, a, b), c in zip(sl, choice):
            pr *= prior if c == 0 else 1 - prior
            hazards[a if c == 0 else b] = kind
        yield pr, hazards


def signal_cells(n: int) -> tuple[set, set]:
    """Cells where a stench (resp. breeze) is possible."""
    stench, breeze = set(), set()
    for kind, a, b in slots(n):
        for c in (a, b):
            for nb in neighbours(n, *c):
                (stench if kind == "wumpus" else breeze).add(nb)
    return stench, breeze


def generate(size: int, seed: int = 0, prior: float = DEFAULT_PRIOR) -> tuple[str, str]:
    check_size("wumpus", size, 3, 9)
    n = size
    dom = """(define (domain wumpus)
  (:requirements :strips :contingent)
  (:types cell)
  (:predicates (at ?c - cell) (adj ?a - cell ?b - cell) (wumpus ?c - cell) (pit ?c - cell)
               (stench ?c - cell) (breeze ?c - cell) (smelly ?c - cell) (windy ?c - cell))
  (:action move
    :parameters (?a - cell ?b - cell)
    :precondition (and (at ?a) (adj ?a ?b) (not (wumpus ?b)) (not (pit ?b)))
    :effect (and (not (at ?a)) (at ?b)))
  (:action smell
    :parameters (?c - cell)
    :precondition (and (at ?c) (smelly ?c))
    :observe (stench ?c))
  (:action feel
    :parameters (?c - cell)
    :precondition (and (at ?c) (windy ?c))
    :observe (breeze ?c))
)
"""
    stench_cells, breeze_cells = signal_cells(n)
    opts = []
    configs = list(configurations(n, prior))
    total = sum(p for p, _ in configs)
    for pr, hazards in configs:
        lits = []
        for c, kind in sorted(hazards.items()):
            lits.append(atom(kind, cell(*c)))
        for c in sorted(stench_cells):
            if any(hazards.get(nb) == "wumpus" for nb in neighbours(n, *c)):
                lits.append(atom("stench", cell(*c)))
        for c in sorted(breeze_cells):
            if any(hazards.get(nb) == "pit" for nb in neighbours(n, *c)):
                lits.append(atom("breeze", cell(*c)))
        opts.append((pr / total, conj(lits)))
    init = [atom("at", cell(1, 1))]
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            for nb in neighbours(n, x, y):
                init.append(atom("adj", cell(x, y), cell(*nb)))
    init += [atom("smelly", cell(*c)) for c in sorted(stench_cells)]
    init += [atom("windy", cell(*c)) for c in sorted(breeze_cells)]
    init.append(probabilistic(opts))
    objs = " ".join(cell(x, y) for x in range(1, n + 1) for y in range(1, n + 1))
    prob = f"""(define (problem wumpus{n})
  (:domain wumpus)
  (:objects {objs} - cell)
  (:init {' '.join(init)})
  (:goal (at {cell(n, n)}))
)
"""
    return dom, prob
