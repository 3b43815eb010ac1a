"""Grid with door columns: each door column has exactly one open door.

Odd columns (and the last column) allow free vertical movement. Every cell
of an even column before the last is a door. The agent can sense a door
from a horizontally adjacent cell and try to open a door it knows is closed.
"""
from __future__ import annotations

from .common import atom, cell, check_size, probabilistic

DEFAULT_OPEN_PROB = 0.5


def door_columns(n: int) -> list[int]:
    return [x for x in range(2, n) if x % 2 == 0]


def generate(size: int, seed: int = 0, open_prob: float = DEFAULT_OPEN_PROB) -> tuple[str, str]:
    check_size("doors", size, 3, 9)
    n = size
    mid = (n + 1) // 2
    doors = set(door_columns(n))
    dom = f"""(define (domain doors)
  (:requirements :strips :contingent)
  (:types cell)
  (:predicates (at ?c - cell) (adj ?a - cell ?b - cell) (door-adj ?a - cell ?d - cell)
               (opened ?d - cell))
  (:action move
    :parameters (?a - cell ?b - cell)
    :precondition (and (at ?a) (adj ?a ?b))
    :effect (and (not (at ?a)) (at ?b)))
  (:action pass-door
    :parameters (?a - cell ?d - cell)
    :precondition (and (at ?a) (door-adj ?a ?d) (opened ?d))
    :effect (and (not (at ?a)) (at ?d)))
  (:action sense-door
    :parameters (?a - cell ?d - cell)
    :precondition (and (at ?a) (door-adj ?a ?d))
    :observe (opened ?d))
  (:action open-door
    :parameters (?a - cell ?d - cell)
    :precondition (and (at ?a) (door-adj ?a ?d) (not (opened ?d)))
    :effect {probabilistic([(open_prob, '(opened ?d)'), (1 - open_prob, '(not (opened ?d))')])})
)
"""
    objs = " ".join(cell(x, y) for x in range(1, n + 1) for y in range(1, n + 1))
    init = [atom("at", cell(1, mid))]
    for x in range(1, n + 1):
        for y in range(1, n + 1):
            if x in doors:
                # leaving a door cell sideways is always possible
                for nx in (x - 1, x + 1):
                    init.append(atom("adj", cell(x, y), cell(nx, y)))
                continue
            for nx in (x - 1, x + 1):
                if 1 <= nx <= n:
                    if nx in doors:
                        init.append(atom("door-adj", cell(x, y), cell(nx, y)))
                    else:
                        init.append(atom("adj", cell(x, y), cell(nx, y)))
            for ny in (y - 1, y + 1):
                if 1 <= ny <= n:
                    init.append(atom("adj", cell(x, y), cell(x, ny)))
    for x in sorted(doors):
        init.append("(oneof " + " ".join(atom("opened", cell(x, y)) for y in range(1, n + 1)) + ")")
    prob = f"""(define (problem doors{n})
  (:domain doors)
  (:objects {objs} - cell)
  (:init {' '.join(init)})
  (:goal (at {cell(n, mid)}))
)
"""
    return dom, prob


def configuration_count(size: int) -> int:
    c = 1
    for _ in door_columns(size):
        c *= size
    return c
