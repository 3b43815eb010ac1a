"""Reach the top-right corner of a grid from an unknown start cell.

The agent only senses the walls around its current cell. At a few seeded
slip cells a move fails (the agent stays) with probability ``slip``.
Moving into a wall does nothing.
"""
from __future__ import annotations

import random

from .common import atom, cell, check_size, conj, probabilistic

DEFAULT_SLIP = 0.3

DIRS = {"north": (0, 1), "south": (0, -1), "east": (1, 0), "west": (-1, 0)}


def walls(n: int, x: int, y: int) -> dict[str, bool]:
    return {d: not (1 <= x + dx <= n and 1 <= y + dy <= n) for d, (dx, dy) in DIRS.items()}


def slip_cells(n: int, seed: int = 0) -> list[tuple[int, int]]:
    rng = random.Random(seed * 104729 + n)
    cells = [(x, y) for x in range(1, n + 1) for y in range(1, n + 1) if (x, y) != (n, n)]
    return sorted(rng.sample(cells, n - 1))


def _wall_lits(n, x, y) -> list[str]:
    return [atom(f"wall-{d}") if w else f"(not {atom(f'wall-{d}')})" for d, w in walls(n, x, y).items()]


def generate(size: int, seed: int = 0, slip: float = DEFAULT_SLIP) -> tuple[str, str]:
    check_size("localize", size, 3, 9)
    n = size
    slips = set(slip_cells(n, seed))
    actions = []
    for d, (dx, dy) in DIRS.items():
        whens = []
        for x in range(1, n + 1):
            for y in range(1, n + 1):
                tx, ty = x + dx, y + dy
                if not (1 <= tx <= n and 1 <= ty <= n):
                    continue
                here, there = cell(x, y), cell(tx, ty)
                moved = conj([f"(not {atom('at', here)})", atom("at", there)] + _wall_lits(n, tx, ty))
                if (x, y) in slips:
                    eff = probabilistic([(1 - slip, moved), (slip, atom("at", here))])
                else:
                    eff = moved
                whens.append(f"(when {atom('at', here)} {eff})")
        actions.append(f"""  (:action move-{d}
    :parameters ()
    :effect (and {' '.join(whens)}))""")
        actions.append(f"""  (:action sense-wall-{d}
    :parameters ()
    :observe (wall-{d}))""")
    dom = f"""(define (domain localize)
  (:requirements :strips :contingent :conditional-effects)
  (:types cell)
  (:predicates (at ?c - cell) (wall-north) (wall-south) (wall-east) (wall-west))
{chr(10).join(actions)}
)
"""
    starts = [(x, y) for x in range(1, n + 1) for y in range(1, n + 1) if (x, y) != (n, n)]
    p = 1.0 / len(starts)
    opts = [(p, conj([atom("at", cell(x, y))] + [atom(f"wall-{d}") for d, w in walls(n, x, y).items() if w]))
            for x, y in starts]
    objs = " ".join(cell(x, y) for x in range(1, n + 1) for y in range(1, n + 1))
    prob = f"""(define (problem localize{n})
  (:domain localize)
  (:objects {objs} - cell)
  (:init {probabilistic(opts)})
  (:goal (at {cell(n, n)}))
)
"""
    return dom, prob
