import random

import pytest

from helpers import replay
from regbisim.automata import Automaton, Configuration, global_fresh, known, local_fresh
from regbisim.errors import UsageError
from regbisim.fresh import (INF, fchallenges, fresh_check, fresh_depth_bound, fresh_fixpoint, fresh_game_decide,
                            fsys_satisfied, symb)
from regbisim.randgen import random_automaton, random_pair
from regbisim.reductions import finite_check
from regbisim.symbolic import TransIndex, both_sides


def fixture(extra_known=False):
    trans = [local_fresh("q1", "t", 1, "q1'"), global_fresh("q2", "t", 1, "q2'")]
    states = ["q1", "q1'", "q2", "q2'"]
    if extra_known:
        trans.append(known("q2", "t", 1, "q2''"))
        states.append("q2''")
    return Automaton("FRA", "S#0", 1, tuple(states), "q1", (None,), tuple(trans), frozenset(), ("t",), "fix")


def test_depth_bound_values():
    A = random_automaton(1, 2, 1, "S#0", "FRA")
    assert fresh_depth_bound(A) == 144
    A = random_automaton(1, 2, 2, "S#0", "FRA")
    assert fresh_depth_bound(A) == 960


def test_symb_small_history():
    k = Configuration("q", (5,), frozenset({5}))
    out = symb(k, k, 1)
    assert len(out) == 1
    g = out[0]
    assert g.h == 1 and g.sigma(1) == 1 and g.sigma.size() == 1


def test_symb_large_history_is_single_infinite_tuple():
    H = frozenset({1, 2, 3})
    out = symb(Configuration("q", (1,), H), Configuration("q", (2,), H), 1)
    assert len(out) == 1 and out[0].h == INF


def test_symb_needs_shared_history():
    with pytest.raises(UsageError):
        symb(Configuration("q", (1,), frozenset({1})), Configuration("q", (1,), frozenset({1, 2})), 1)


def test_local_fresh_matched_by_global_fresh_when_history_is_registers():
    A = fixture()
    H = frozenset({5})
    assert fresh_check(A, Configuration("q1", (5,), H), Configuration("q2", (5,), H)).bisimilar


def test_global_fresh_alone_cannot_answer_historical_name():
    A = fixture()
    H = frozenset({1, 2})
    k1, k2 = Configuration("q1", (1,), H), Configuration("q2", (2,), H)
    v = fresh_check(A, k1, k2)
    assert not v.bisimilar
    assert replay(A, k1, k2, v.witness)
    # a known-name answer from the right closes the gap
    B = fixture(extra_known=True)
    assert fresh_check(B, k1, k2).bisimilar


def test_vacuous_state():
    A = fixture()
    g = symb(Configuration("q1'", (1,), frozenset({1})), Configuration("q2'", (1,), frozenset({1})), 1)[0]
    assert fsys_satisfied(A, g, set())


def test_history_component_never_decreases():
    rng = random.Random(2)
    for seed in range(20):
        A = random_automaton(100 + seed, rng.randint(1, 3), rng.randint(1, 2), "S#0", "FRA", 1, 0.35)
        k1, k2 = random_pair(rng, A)
        ix = TransIndex(A)
        g = symb(k1, k2, A.registers, canonical=True)[0]
        seen, todo = {g}, [g]
        while todo:
            p = todo.pop()
            for _, opts in both_sides(fchallenges, ix, p):
                for _, s in opts:
                    assert s.h == INF or (p.h != INF and s.h >= p.h)
                    if s not in seen:
                        seen.add(s)
                        todo.append(s)


def test_symb_tuples_agree():
    rng = random.Random(4)
    for seed in range(25):
        A = random_automaton(200 + seed, rng.randint(1, 3), 2, "S#0", "FRA", 1, 0.3)
        k1, k2 = random_pair(rng, A, extra_history=1)
        tuples = symb(k1, k2, A.registers)
        rel = fresh_fixpoint(A, roots=tuples)
        inside = {g in rel.tuples for g in tuples}
        assert len(inside) == 1


def test_checks_agree_with_game_and_reduction():
    rng = random.Random(12)
    for seed in range(25):
        A = random_automaton(300 + seed, rng.randint(1, 3), rng.randint(1, 2), "S#0", "FRA", rng.randint(1, 2), 0.25)
        k1, k2 = random_pair(rng, A, extra_history=rng.randint(0, 2))
        v = fresh_check(A, k1, k2)
        g = fresh_game_decide(A, k1, k2, fresh_depth_bound(A))
        f = finite_check(A, k1, k2, materialize_limit=20000)
        assert v.bisimilar == g.bisimilar == f.bisimilar
        assert v.stats["iterations"] <= fresh_depth_bound(A)
        if not v.bisimilar:
            assert v.attacker_depth == g.attacker_depth
            assert replay(A, k1, k2, v.witness)


def test_identical_configurations():
    A = random_automaton(7, 3, 2, "S#0", "FRA", 2, 0.4)
    k = Configuration("q0", (0, 1), frozenset({0, 1, 2}))
    assert fresh_check(A, k, k).bisimilar
