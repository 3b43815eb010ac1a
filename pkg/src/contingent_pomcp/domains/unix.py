"""Find a file in a directory tree and copy it to the root directory.

The tree has ``BRANCHING`` subdirectories per directory down to the given
depth. The file sits in some non-root directory with a geometric prior
over directories in breadth-first order.
"""
from __future__ import annotations

from .common import atom, check_size, geometric, probabilistic

BRANCHING = 4
DEFAULT_RATIO = 0.7


def directories(depth: int) -> tuple[list[str], list[tuple[str, str]]]:
    """Directory names in breadth-first order and (parent, child) edges."""
    names = ["root"]
    edges = []
    frontier = ["root"]
    for level in range(1, depth + 1):
        nxt = []
        for parent in frontier:
            for k in range(1, BRANCHING + 1):
                child = f"d{k}" if parent == "root" else f"{parent}{k}"
                names.append(child)
                edges.append((parent, child))
                nxt.append(child)
        frontier = nxt
    return names, edges


def generate(size: int, seed: int = 0, ratio: float = DEFAULT_RATIO) -> tuple[str, str]:
    check_size("unix", size, 1, 3)
    names, edges = directories(size)
    dom = """(define (domain unix)
  (:requirements :strips :contingent)
  (:types dir)
  (:predicates (in ?d - dir) (sub ?p - dir ?c - dir) (file-in ?d - dir) (is-root ?d - dir))
  (:action cd-down
    :parameters (?p - dir ?c - dir)
    :precondition (and (in ?p) (sub ?p ?c))
    :effect (and (not (in ?p)) (in ?c)))
  (:action cd-up
    :parameters (?c - dir ?p - dir)
    :precondition (and (in ?c) (sub ?p ?c))
    :effect (and (not (in ?c)) (in ?p)))
  (:action ls
    :parameters (?d - dir)
    :precondition (in ?d)
    :observe (file-in ?d))
  (:action copy
    :parameters (?d - dir ?r - dir)
    :precondition (and (in ?d) (file-in ?d) (is-root ?r))
    :effect (file-in ?r))
)
"""
    hidden = names[1:]
    weights = geometric(len(hidden), ratio)
    init = ["(in root)", "(is-root root)"] + [atom("sub", p, c) for p, c in edges]
    if len(hidden) > 1:
        init.append(probabilistic([(w, atom("file-in", d)) for w, d in zip(weights, hidden)]))
    prob = f"""(define (problem unix{size})
  (:domain unix)
  (:objects {' '.join(names)} - dir)
  (:init {' '.join(init)})
  (:goal (file-in root))
)
"""
    return dom, prob
