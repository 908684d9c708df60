import random

import pytest

from regbisim.automata import (STAR, Automaton, Configuration, Transition, concrete_step, double_registers,
                               embed_ra_in_fra, fire, global_fresh, known, local_fresh, validate, validate_config)
from regbisim.errors import UsageError
from regbisim.oracle import exact_bisim_ra
from regbisim.randgen import random_automaton, random_pair
from regbisim.reductions import finite_check
from regbisim.symbolic import check_bisim
from regbisim.fresh import fresh_check


def one(t, kind="RA", disc="S#0", r=1):
    states = tuple(sorted({t.source, t.target}))
    return Automaton(kind, disc, r, states, t.source, (None,) * r, (t,), frozenset(), (t.tag,), "x")


def test_read_stored_name():
    A = one(known("q", "t", 1, "p"))
    assert concrete_step(A, Configuration("q", (5,)), ("t", 5)) == {Configuration("p", (5,))}


def test_empty_guard_needs_unstored_name():
    A = one(local_fresh("q", "t", 1, "p"))
    assert concrete_step(A, Configuration("q", (5,)), ("t", 5)) == set()
    assert concrete_step(A, Configuration("q", (5,)), ("t", 6)) == {Configuration("p", (6,))}


def test_global_freshness_uses_history():
    A = one(global_fresh("q", "t", 1, "p"), kind="FRA")
    k = Configuration("q", (None,), frozenset({5}))
    assert concrete_step(A, k, ("t", 5)) == set()
    assert concrete_step(A, k, ("t", 7)) == {Configuration("p", (7,), frozenset({5, 7}))}


def test_fire_erases_after_write():
    t = Transition("q", "t", frozenset({1}), 2, frozenset({1}), "p")
    assert fire(t, (3, None), None, 3) == (None, 3)


@pytest.mark.parametrize("t,disc,rule", [
    (Transition("q", "t", frozenset({1, 2}), 1, frozenset(), "q"), "S#0", "S requires"),
    (Transition("q", "t", frozenset(), 1, frozenset({2}), "q"), "S#0", "erase forbidden"),
    (Transition("q", "t", frozenset(), 0, frozenset(), "q"), "SF", "write to 0 forbidden"),
    (Transition("q", "t", STAR, 1, frozenset(), "q"), "S#", "forbidden in RA"),
    (Transition("q", "t", frozenset(), 1, frozenset({1}), "q"), "M#", "i in Z"),
])
def test_validate_rules(t, disc, rule):
    A = Automaton("RA", disc, 2, ("q",), "q", (1, 2) if disc.endswith("F") else (None, None), (t,),
                  frozenset(), ("t",), "x")
    assert any(rule in v.rule for v in validate(A))


def test_single_assignment_configurations_are_injective():
    A = Automaton("RA", "S#", 2, ("q",), "q", (1, 1), (), frozenset(), ("t",), "x")
    assert any("injective" in v.rule for v in validate(A))
    B = A.replace(discipline="M#")
    assert validate(B) == []


def test_fra_configuration_needs_history():
    A = one(known("q", "t", 1, "p"), kind="FRA")
    assert validate_config(A, Configuration("q", (5,)))
    assert validate_config(A, Configuration("q", (5,), frozenset({4})))
    assert not validate_config(A, Configuration("q", (5,), frozenset({4, 5})))


def test_steps_respect_discipline():
    rng = random.Random(4)
    for disc in ("SF", "S#0", "S#", "MF", "M#0", "M#"):
        for seed in range(10):
            A = random_automaton(seed, 2, 2, disc, "FRA", 1, 0.4)
            k, _ = random_pair(rng, A)
            for _ in range(6):
                succ = sorted(concrete_step(A, k, ("a", rng.randint(0, 6))), key=str)
                if not succ:
                    break
                nxt = succ[0]
                assert not validate_config(A, nxt)
                assert k.history <= nxt.history
                k = nxt


def test_embedding_histories():
    A = one(known("q", "t", 1, "p"))
    _, c1, c2 = embed_ra_in_fra(A, Configuration("q", (3,)), Configuration("q", (3,)))
    assert c1.history == c2.history == {3}
    _, c1, c2 = embed_ra_in_fra(A, Configuration("q", (1,)), Configuration("p", (2,)))
    assert c1.history == {1, 2}


def test_embedding_preserves_verdicts():
    rng = random.Random(8)
    for seed in range(50):
        A = random_automaton(600 + seed, rng.randint(1, 3), rng.randint(1, 2), "S#0", "RA", 1, 0.3)
        k1, k2 = random_pair(rng, A)
        B, c1, c2 = embed_ra_in_fra(A, k1, k2)
        assert check_bisim(A, k1, k2).bisimilar == fresh_check(B, c1, c2).bisimilar


def test_doubling_structure():
    t = Transition("q", "t", frozenset({1}), 0, frozenset({1}), "p")
    A = Automaton("RA", "S#", 1, ("p", "q"), "q", (None,), (t,), frozenset(), ("t",), "x")
    B, c1, c2 = double_registers(A, Configuration("q", (None,)), Configuration("q", (4,)))
    assert B.registers == 2 and not validate(B)
    assert len(B.transitions) == 3
    assert c1.regs[0] == c1.regs[1]            # empty register: both copies agree
    assert c2.regs[1] == 4 and c2.regs[0] != 4


def test_doubling_preserves_verdicts():
    rng = random.Random(4)
    for k in range(8):
        A = random_automaton(300 + k, rng.randint(1, 2), 1, "S#", "RA", 1, 0.35)
        k1, k2 = random_pair(rng, A)
        B, c1, c2 = double_registers(A, k1, k2)
        E, e1, e2 = embed_ra_in_fra(B, c1, c2)
        assert exact_bisim_ra(A, k1, k2).bisimilar == finite_check(E, e1, e2, materialize_limit=60000).bisimilar


def test_doubling_needs_single_assignment():
    A = Automaton("RA", "M#", 1, ("q",), "q", (None,), (), frozenset(), ("t",), "x")
    with pytest.raises(UsageError):
        double_registers(A, Configuration("q", (None,)), Configuration("q", (None,)))
