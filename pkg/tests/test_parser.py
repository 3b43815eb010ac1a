import pytest
from hypothesis import given, settings, strategies as st

from contingent_pomcp.domains import DomainSpec, GENERATORS, SIZE_RANGES, generate, load
from contingent_pomcp.logic import TRUE, Literal, conj
from contingent_pomcp.model import ActuationAction, Effect, Problem, StochasticFormula
from contingent_pomcp.parser import ParseError, parse, pretty_print, read_sexprs, validate

DOMAIN = """
(define (domain toy)
  (:requirements :strips :contingent)
  (:types spot)
  (:predicates (at ?s - spot) (link ?a - spot ?b - spot) (lit ?s - spot))
  (:action go
    :parameters (?a - spot ?b - spot)
    :precondition (and (at ?a) (link ?a ?b))
    :effect (and (not (at ?a)) (at ?b)))
  (:action flip
    :parameters (?s - spot)
    :precondition (at ?s)
    :effect (probabilistic 0.25 (lit ?s) 0.75 (not (lit ?s))))
  (:action look
    :parameters (?s - spot)
    :precondition (at ?s)
    :observe (lit ?s))
)
"""

PROBLEM = """
(define (problem toy1)
  (:domain toy)
  (:objects a b c - spot)
  (:init (at a) (link a b) (link b c) (oneof (lit b) (lit c)))  ; comment
  (:goal (and (at c) (lit c)))
)
"""


def test_parse_toy():
    p = parse(DOMAIN, PROBLEM)
    names = [a.name for a in p.actions]
    assert "go_a_b" in names and "go_b_c" in names
    assert "go_a_c" not in names  # static link pruned
    assert names.count("look_a") == 1
    assert p.hidden_mask == p.state(["lit_b", "lit_c"])
    flip = next(a for a in p.actuations if a.name == "flip_a")
    assert not flip.deterministic


def test_grounding_is_order_stable():
    p1, p2 = parse(DOMAIN, PROBLEM), parse(DOMAIN, PROBLEM)
    assert [f.name for f in p1.facts] == [f.name for f in p2.facts]
    assert [a.name for a in p1.actions] == [a.name for a in p2.actions]


@pytest.mark.parametrize("text, line", [
    ("(define (problem x)\n  (:domain toy)\n  (:objects a - spot)\n  (:init)\n  (:goal (at a)))", None),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a - spot)\n  (:goal (at a)))", None),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a - spot)\n  (:init (at a)\n", 4),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a - spot)\n  (:init (at a b))\n  (:goal (at a)))", None),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a - spot)\n  (:init (hat a))\n  (:goal (at a)))", None),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a b - spot)\n"
     "  (:init (at a) (probabilistic 0.5 (lit a) 0.6 (lit b)))\n  (:goal (at a)))", None),
    ("(define (problem x)\n  (:domain toy)\n  (:objects a b - spot)\n"
     "  (:init (at a) (oneof (lit a) (and (lit b))))\n  (:goal (at a)))", None),
])
def test_parse_errors(text, line):
    with pytest.raises(ParseError) as e:
        parse(DOMAIN, text)
    if line is not None:
        assert e.value.line == line


def test_syntax_error_location():
    with pytest.raises(ParseError) as e:
        read_sexprs("(a (b c)\n  d))")
    assert (e.value.line, e.value.col) == (2, 5)


def test_zero_probability_rejected():
    bad = PROBLEM.replace("(oneof (lit b) (lit c))", "(probabilistic 0 (lit b) 1 (lit c))")
    with pytest.raises(ParseError):
        parse(DOMAIN, bad)


def test_medpks_structure():
    p = load("medpks10")
    ill = [f for f in p.facts if f.name.startswith("ill_")]
    assert len(ill) == 10
    assert len(p.init_probs) == 1
    probs = [pr for _, pr in p.init_probs[0].options]
    assert abs(sum(probs) - 1) < 1e-9 and len(set(probs)) > 1


def test_doors_sense_door_count():
    # two door columns, five rows, a sensing cell on each side
    p = load("doors5")
    assert len([a for a in p.sensings if a.name.startswith("sense-door")]) == 2 * 5 * 2


def test_validate_unsatisfiable_precondition_and_dead_fact():
    P, Q = Literal(0), Literal(1)
    acts = [
        ActuationAction("ok", TRUE, (Effect(TRUE, StochasticFormula.deterministic([P])),)),
        ActuationAction("never", conj(P, P.negated()), (Effect(TRUE, StochasticFormula.deterministic([P])),)),
    ]
    prob = Problem(["p", "unused"], acts, [], P.negated(), [], P)
    codes = {d.code for d in validate(prob)}
    assert "unsatisfiable-precondition" in codes
    assert "dead-fact" in codes


def test_validate_goal_trivial():
    P = Literal(0)
    acts = [ActuationAction("noop", TRUE, (Effect(TRUE, StochasticFormula.deterministic([P])),))]
    prob = Problem(["p"], acts, [], P, [], P)
    assert [d.code for d in validate(prob)] == ["goal-trivial"]


@pytest.mark.parametrize("family", sorted(GENERATORS))
def test_generated_instances_validate_cleanly(family):
    lo, hi = SIZE_RANGES[family]
    for size in {lo, (lo + hi) // 2}:
        p = parse(*generate(DomainSpec(family, size)))
        assert not [d for d in validate(p) if d.severity == "error"]


@pytest.mark.parametrize("name", ["doors5", "blocks4", "localize3", "medpks10", "unix1", "wumpus5"])
def test_round_trip(name):
    p = load(name)
    q = parse(*pretty_print(p))
    assert q.structure() == p.structure()


@given(st.integers(0, 50))
@settings(max_examples=10, deadline=None)
def test_round_trip_seeded_blocks(seed):
    p = parse(*generate(DomainSpec("blocks", 3, seed)))
    assert parse(*pretty_print(p)).structure() == p.structure()
