import random
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from contingent_pomcp.domains import load
from contingent_pomcp.heuristics import (
    DEAD_END, DeadEnd, build_planning_graph, get_policy, hadd_belief, hadd_belief_relaxed,
    hadd_from_graph, hadd_single, hmax_from_graph, hmax_single, register_policy, relaxed_task,
    rollout_policy_hadd, rollout_policy_hadd_belief, rollout_policy_random,
)
from contingent_pomcp.logic import TRUE, Literal, conj
from contingent_pomcp.model import ActuationAction, Effect, Problem, SensingAction, StochasticFormula
from oracles import oracle_hadd, oracle_hmax, random_problem

A, B, G = Literal(0), Literal(1), Literal(2)


def det(*lits):
    return StochasticFormula.deterministic(lits)


def chain():
    x = ActuationAction("x", A, (Effect(TRUE, det(B)),))
    y = ActuationAction("y", B, (Effect(TRUE, det(G)),))
    noop = ActuationAction("noop", A, (Effect(TRUE, det(A)),))
    return Problem(["a", "b", "g"], [x, y, noop], [], A, [], G)


def door_fragment():
    # at0, at1, door, dummy: passing needs the door open, looking reveals it
    at0, at1, door, dummy = (Literal(i) for i in range(4))
    pass_ = ActuationAction("pass", conj(at0, door), (Effect(TRUE, det(at1, at0.negated())),))
    wait = ActuationAction("wait", at0, (Effect(TRUE, det(dummy)),))
    look = SensingAction("look", at0, (2,))
    prob = Problem(["at0", "at1", "door", "dummy"], [pass_, wait], [look], conj(at0, door), [], at1)
    return prob, 0b0101, 0b0001


def test_chain_value():
    p = chain()
    assert hadd_single(p, 0b001) == 2
    assert hadd_single(p, 0b100) == 0
    assert hmax_single(p, 0b001) == 2


def test_unreachable_goal_is_dead_end():
    x = ActuationAction("x", A, (Effect(TRUE, det(B)),))
    p = Problem(["a", "b", "g"], [x], [], A, [], G)
    assert hadd_single(p, 0b001) == DEAD_END
    assert DEAD_END > 10**9


@given(st.integers(0, 100_000))
@settings(max_examples=150, deadline=None)
def test_hadd_matches_layered_oracle(seed):
    rng = random.Random(seed)
    p = random_problem(rng, n_facts=rng.randint(3, 12), n_actions=rng.randint(2, 10), deterministic=rng.random() < 0.5)
    s = rng.getrandbits(p.num_facts)
    assert hadd_single(p, s) == oracle_hadd(p, s)
    assert hmax_single(p, s) == oracle_hmax(p, s)
    assert hmax_single(p, s) <= hadd_single(p, s)
    assert (hadd_single(p, s) == 0) == p.is_goal_state(s)


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_scan_graph_agrees_with_counters(seed):
    rng = random.Random(seed)
    p = random_problem(rng)
    s = rng.getrandbits(p.num_facts)
    g = build_planning_graph(p, s)
    assert hadd_from_graph(p, g) == hadd_single(p, s)
    assert hmax_from_graph(p, g) == hmax_single(p, s)
    for lo, hi in zip(g.fact_layers, g.fact_layers[1:]):
        assert lo & hi == lo
    seen = set()
    for layer in g.action_layers:
        assert not seen & set(layer)
        seen |= set(layer)
    assert len(g.fact_layers) <= 2 * p.num_facts + 1


@given(st.integers(0, 100_000))
@settings(max_examples=100, deadline=None)
def test_singleton_reduction(seed):
    rng = random.Random(seed)
    p = random_problem(rng)
    s = rng.getrandbits(p.num_facts)
    task = relaxed_task(p)
    assert hadd_belief(p, s, [s]) == hadd_single(p, s)
    assert hadd_belief_relaxed(task, task.relax(s), [], shortcut=False) == hadd_single(p, s)


def test_belief_heuristic_on_door_fragment():
    prob, s_open, s_closed = door_fragment()
    assert hadd_single(prob, s_open) == 1
    task = relaxed_task(prob)
    trace = []
    v = hadd_belief_relaxed(task, task.relax(s_open), [task.relax(s_closed)], trace=trace)
    assert v == 2
    # the closed state is dropped by looking at the door, at the first layer
    (layer, dropped, obs), = trace
    assert layer == 1 and dropped == task.relax(s_closed)
    assert (dropped & obs) != (task.relax(s_open) & obs)
    assert hadd_belief(prob, s_closed, [s_closed, s_open]) == DEAD_END


def test_belief_goal_at_layer_zero():
    prob, s_open, s_closed = door_fragment()
    done = 0b0110
    assert hadd_belief(prob, done, [done, done | 0b1000]) == 0


@given(st.integers(0, 100_000))
@settings(max_examples=60, deadline=None)
def test_belief_heuristic_not_below_single_without_sensing(seed):
    rng = random.Random(seed)
    p = random_problem(rng)
    p = Problem([f.name for f in p.facts], list(p.actuations), [], p.init, [], p.goal)
    states = [rng.getrandbits(p.num_facts) for _ in range(3)]
    assert hadd_belief(p, states[0], states) >= hadd_single(p, states[0])


def _four_way():
    acts = [ActuationAction(f"a{i}", TRUE, (Effect(TRUE, det(Literal(i))),)) for i in range(4)]
    return Problem([f"p{i}" for i in range(5)], acts, [], TRUE, [], Literal(4))


def test_random_policy_uniform():
    p = _four_way()
    rng = random.Random(0)
    counts = Counter(rollout_policy_random(p, 0, [0], rng).name for _ in range(10_000))
    assert all(abs(c / 10_000 - 0.25) <= 0.02 for c in counts.values())
    assert len(counts) == 4


def test_random_policy_filters_by_belief():
    x = ActuationAction("x", A, (Effect(TRUE, det(B)),))
    y = ActuationAction("y", TRUE, (Effect(TRUE, det(G)),))
    p = Problem(["a", "b", "g"], [x, y], [], TRUE, [], G)
    rng = random.Random(1)
    assert {rollout_policy_random(p, 1, [1, 0], rng).name for _ in range(200)} == {"y"}
    only = ActuationAction("only", A, (Effect(TRUE, det(G)),))
    q = Problem(["a", "b", "g"], [only], [], TRUE, [], G)
    assert rollout_policy_random(q, 1, [1], rng).name == "only"
    with pytest.raises(DeadEnd):
        rollout_policy_random(q, 0, [0], rng)


def test_hadd_policy_prefers_progress():
    p = chain()
    rng = random.Random(2)
    assert {rollout_policy_hadd(p, 0b001, [0b001], rng).name for _ in range(100)} == {"x"}
    assert rollout_policy_hadd(p, 0b011, [0b011], rng).name == "y"


def test_hadd_policy_ties_uniform():
    acts = [ActuationAction(f"a{i}", TRUE, (Effect(TRUE, det(Literal(i))),)) for i in range(3)]
    fin = ActuationAction("fin", conj(Literal(0), Literal(1), Literal(2)), (Effect(TRUE, det(Literal(3))),))
    p = Problem([f"p{i}" for i in range(4)], acts + [fin], [], TRUE, [], Literal(3))
    rng = random.Random(3)
    counts = Counter(rollout_policy_hadd(p, 0, [0], rng).name for _ in range(10_000))
    assert set(counts) == {"a0", "a1", "a2"}
    assert all(abs(c / 10_000 - 1 / 3) <= 0.03 for c in counts.values())


def test_hadd_policy_sensing_epsilon():
    prob, s_open, s_closed = door_fragment()
    rng = random.Random(4)
    counts = Counter(rollout_policy_hadd(prob, s_open, [s_open], rng).name for _ in range(10_000))
    assert abs(counts["look"] / 10_000 - 0.1) <= 0.02


def test_belief_policy_senses_when_door_unknown():
    prob, s_open, s_closed = door_fragment()
    rng = random.Random(5)
    assert rollout_policy_hadd_belief(prob, s_open, [s_open, s_closed], rng).name == "look"
    # with nothing to learn the policy acts like the single-state one
    assert rollout_policy_hadd_belief(prob, s_open, [s_open], rng).name == "pass"


@given(st.integers(0, 100_000))
@settings(max_examples=40, deadline=None)
def test_belief_policy_singleton_matches_single_state_ranking(seed):
    rng = random.Random(seed)
    p = random_problem(rng)
    p = Problem([f.name for f in p.facts], list(p.actuations), [], p.init, [], p.goal)
    s = rng.getrandbits(p.num_facts)
    try:
        a = rollout_policy_hadd_belief(p, s, [s], random.Random(0))
    except DeadEnd:
        return
    task = relaxed_task(p)
    r = task.relax(s)
    best = min(_succ_h(task, b, s, r) for b in p.actuations if b.applicable(s))
    assert _succ_h(task, a, s, r) == best


def _succ_h(task, a, s, r):
    from contingent_pomcp.heuristics import hadd_relaxed
    return hadd_relaxed(task, task.successor(a.index, s, r))


def test_policy_registry():
    assert get_policy("hadd") is rollout_policy_hadd
    with pytest.raises(ValueError):
        get_policy("nope")
    from contingent_pomcp.heuristics import POLICIES
    register_policy("first-action", lambda p, s, B, rng: p.actions[0])
    try:
        with pytest.raises(ValueError):
            register_policy("first-action", lambda p, s, B, rng: p.actions[0])
    finally:
        POLICIES.pop("first-action")


@pytest.mark.parametrize("name", ["doors5", "localize3", "wumpus5", "medpks10", "blocks4", "unix1"])
def test_policies_run_on_benchmarks(name):
    p = load(name)
    rng = random.Random(0)
    from contingent_pomcp.belief import sample_initial
    B = [sample_initial(p, rng) for _ in range(8)]
    s = B[0]
    for pol in ("random", "hadd", "hadd-belief"):
        a = get_policy(pol)(p, s, B, rng)
        assert all(a.applicable(b) for b in B)
