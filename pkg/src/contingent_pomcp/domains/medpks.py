"""Diagnose one of several illnesses by testing each in turn, then treat it.

Exactly one illness holds; the prior over illnesses is geometric.
"""
from __future__ import annotations

from .common import atom, check_size, geometric, probabilistic

DEFAULT_RATIO = 0.7


def prior(size: int, ratio: float = DEFAULT_RATIO) -> list[float]:
    return geometric(size, ratio)


def generate(size: int, seed: int = 0, ratio: float = DEFAULT_RATIO) -> tuple[str, str]:
    check_size("medpks", size, 2, 12)
    ills = [f"i{k}" for k in range(1, size + 1)]
    dom = """(define (domain medpks)
  (:requirements :strips :contingent)
  (:types illness)
  (:predicates (ill ?i - illness) (healthy))
  (:action test
    :parameters (?i - illness)
    :observe (ill ?i))
  (:action treat
    :parameters (?i - illness)
    :precondition (ill ?i)
    :effect (healthy))
)
"""
    weights = prior(size, ratio)
    init = [
        "(oneof " + " ".join(atom("ill", i) for i in ills) + ")",
        probabilistic([(w, atom("ill", i)) for w, i in zip(weights, ills)]),
    ]
    prob = f"""(define (problem medpks{size})
  (:domain medpks)
  (:objects {' '.join(ills)} - illness)
  (:init {' '.join(init)})
  (:goal (healthy))
)
"""
    return dom, prob
