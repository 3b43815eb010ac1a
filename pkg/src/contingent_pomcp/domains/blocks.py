"""Blocks world with an unknown initial arrangement.

The arrangement is one of a few seeded configurations, each equally likely.
Moving a block onto another block succeeds with probability ``success`` and
otherwise drops the block on the table. Moves to and from the table always
succeed. The agent can sense whether a block is on another and whether a
block is clear.
"""
from __future__ import annotations

import random

from .common import atom, check_size, conj, probabilistic

DEFAULT_SUCCESS = 0.3
DEFAULT_CONFIGS = 4


def random_configuration(blocks: list[str], rng: random.Random) -> list[list[str]]:
    order = blocks[:]
    rng.shuffle(order)
    towers: list[list[str]] = []
    for b in order:
        if towers and rng.random() < 0.5:
            rng.choice(towers).append(b)
        else:
            towers.append([b])
    return sorted(towers)


def configuration_facts(towers: list[list[str]]) -> list[str]:
    facts = []
    for t in towers:
        facts.append(atom("ontable", t[0]))
        for below, above in zip(t, t[1:]):
            facts.append(atom("on", above, below))
        facts.append(atom("clear", t[-1]))
    return facts


def configurations(size: int, seed: int = 0, count: int = DEFAULT_CONFIGS) -> list[list[list[str]]]:
    blocks = [f"b{i}" for i in range(1, size + 1)]
    rng = random.Random(seed * 7919 + size)
    seen = []
    tries = 0
    while len(seen) < count and tries < 10_000:
        tries += 1
        c = random_configuration(blocks, rng)
        facts = configuration_facts(c)
        if c not in seen and not ("(on b1 b2)" in facts and "(on b2 b3)" in facts):
            seen.append(c)
    return seen


def generate(size: int, seed: int = 0, success: float = DEFAULT_SUCCESS,
             configs: int = DEFAULT_CONFIGS) -> tuple[str, str]:
    check_size("blocks", size, 3, 6)
    blocks = [f"b{i}" for i in range(1, size + 1)]
    stoch = probabilistic([
        (success, "(and (on ?x ?z) (not (on ?x ?y)) (clear ?y) (not (clear ?z)))"),
        (1 - success, "(and (ontable ?x) (not (on ?x ?y)) (clear ?y))"),
    ])
    dom = f"""(define (domain blocks)
  (:requirements :strips :contingent)
  (:types block)
  (:predicates (on ?x - block ?y - block) (ontable ?x - block) (clear ?x - block)
               (neq ?x - block ?y - block))
  (:action move-b-to-b
    :parameters (?x - block ?y - block ?z - block)
    :precondition (and (on ?x ?y) (clear ?x) (clear ?z) (neq ?x ?y) (neq ?x ?z) (neq ?y ?z))
    :effect {stoch})
  (:action move-to-table
    :parameters (?x - block ?y - block)
    :precondition (and (on ?x ?y) (clear ?x) (neq ?x ?y))
    :effect (and (ontable ?x) (not (on ?x ?y)) (clear ?y)))
  (:action move-from-table
    :parameters (?x - block ?z - block)
    :precondition (and (ontable ?x) (clear ?x) (clear ?z) (neq ?x ?z))
    :effect (and (on ?x ?z) (not (ontable ?x)) (not (clear ?z))))
  (:action sense-on
    :parameters (?x - block ?y - block)
    :precondition (neq ?x ?y)
    :observe (on ?x ?y))
  (:action sense-clear
    :parameters (?x - block)
    :observe (clear ?x))
)
"""
    confs = configurations(size, seed, configs)
    p = 1.0 / len(confs)
    opts = [(p, conj(configuration_facts(c))) for c in confs]
    neq = [atom("neq", a, b) for a in blocks for b in blocks if a != b]
    prob = f"""(define (problem blocks{size})
  (:domain blocks)
  (:objects {' '.join(blocks)} - block)
  (:init {' '.join(neq)}
    {probabilistic(opts)})
  (:goal (and (on b1 b2) (on b2 b3)))
)
"""
    return dom, prob
