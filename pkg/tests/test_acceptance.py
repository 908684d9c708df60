"""The eight acceptance criteria, each run at its stated size and tolerance.

Every test records one PASS/FAIL line in RESULTS; tests/conftest.py prints
them in the pytest terminal summary.  Running this file directly prints the
same lines.
"""

import itertools
import random
import time
from collections import Counter, deque
from dataclasses import replace
from functools import lru_cache

import pytest

from regbisim import certs
from regbisim.automata import Automaton, Configuration, known, local_fresh, global_fresh, validate
from regbisim.errors import CapacityError
from regbisim.fresh import fresh_check, fresh_closure, fresh_closure_report, full_universe
from regbisim.langequiv import accepts, lang_equiv
from regbisim.oracle import exact_bisim_ra
from regbisim.perm import (PartialPerm, bijections, group_contains, group_from_generators, naive_closure,
                           partial_injections)
from regbisim.randgen import random_automaton, random_pair
from regbisim.reductions import (QBF, build_finite_game, evaluate, finite_game_decide, fsa_bisim, split_depth,
                                 tqbf_instance)
from regbisim.symbolic import (check_bisim, closure, closure_report, depth_bound, fixpoint_bisim, game_decide,
                               query_tuple, universe, set_family)

RESULTS = {}


def record(k, ok, detail):
    RESULTS[k] = "criterion %d: %s  %s" % (k, "PASS" if ok else "FAIL", detail)
    print(RESULTS[k])
    return ok


# --- shared corpora -------------------------------------------------------------

@lru_cache(maxsize=None)
def ra_corpus():
    """200 seeded RA(S#0) instances: |Q| <= 4, r <= 2, at most 2 tags."""
    rng = random.Random(7)
    out = []
    for k in range(200):
        A = random_automaton(1000 + k, rng.randint(1, 4), rng.randint(1, 2), "S#0", "RA",
                             rng.randint(1, 2), rng.choice([0.2, 0.3, 0.45]))
        k1, k2 = random_pair(rng, A)
        out.append((A, k1, k2))
    return out


@lru_cache(maxsize=None)
def ra_results():
    t0 = time.perf_counter()
    rows = []
    for A, k1, k2 in ra_corpus():
        a = check_bisim(A, k1, k2)
        b = game_decide(A, query_tuple(k1, k2, A.registers), depth_bound(A), (k1, k2))
        c = exact_bisim_ra(A, k1, k2)
        rows.append((a, b, c))
    return rows, time.perf_counter() - t0


@lru_cache(maxsize=None)
def sf_corpus():
    """100 seeded SF instances, alternating RA (r <= 3) and FRA (r <= 2)."""
    rng = random.Random(5)
    out = []
    for k in range(100):
        kind = "RA" if k % 2 == 0 else "FRA"
        r = rng.randint(1, 2) if kind == "FRA" else rng.randint(1, 3)
        A = random_automaton(7000 + k, rng.randint(1, 3), r, "SF", kind, rng.randint(1, 2), 0.3)
        k1, k2 = random_pair(rng, A, extra_history=rng.randint(0, 3))
        out.append((A, k1, k2))
    return out


def as_sf(A, k1, k2):
    """An RA(S#0) instance with both registers files full behaves as RA(SF)."""
    if None in k1.regs or None in k2.regs:
        return None
    B = A.replace(discipline="SF", assign=tuple(range(A.registers)))
    return None if validate(B) else B


# --- 1 ------------------------------------------------------------------------------

def test_c1_oracle_equivalence():
    rows, elapsed = ra_results()
    agree = sum(a.bisimilar == b.bisimilar == c.bisimilar for a, b, c in rows)
    yes = sum(a.bisimilar for a, _, _ in rows)
    ok = agree == len(rows) and elapsed < 120
    record(1, ok, "%d/%d agree (%d bisimilar), %.1fs" % (agree, len(rows), yes, elapsed))
    assert ok


# --- 2 ------------------------------------------------------------------------------

def test_c2_depth_and_iteration_bound():
    rows, _ = ra_results()
    worst_it = worst_depth = 0
    ok = True
    for (A, k1, k2), (a, b, c) in zip(ra_corpus(), rows):
        B = depth_bound(A)
        rel = fixpoint_bisim(A, roots=[query_tuple(k1, k2, A.registers)])
        its = (rel.iterations, a.stats["iterations"])
        depths = [v.attacker_depth for v in (a, b, c) if v.attacker_depth is not None]
        ok &= max(its) <= B and all(d <= B for d in depths)
        worst_it = max(worst_it, max(its) / B)
        worst_depth = max([worst_depth] + [d / B for d in depths])
    record(2, ok, "max iterations/B = %.4f, max attacker depth/B = %.4f" % (worst_it, worst_depth))
    assert ok


# --- 3 ------------------------------------------------------------------------------

def exhaustive_qbfs():
    """Every prefix over 1..3 variables with a family of matrices:
    h=1 all non-empty sets of the 3 clauses, h=2 all 1-2 clause sets of
    non-tautological clauses, h=3 all 1-3 clause sets of full-width clauses."""
    out = []
    for h in (1, 2, 3):
        lits = [v for x in range(1, h + 1) for v in (x, -x)]
        if h == 1:
            pool = [(1,), (-1,), (-1, 1)]
            sizes = (1, 2, 3)
        elif h == 2:
            pool = [c for w in (1, 2) for c in itertools.combinations(lits, w) if len({abs(x) for x in c}) == w]
            sizes = (1, 2)
        else:
            pool = [tuple(sorted(c)) for c in itertools.product((1, -1), (2, -2), (3, -3))]
            sizes = (1, 2, 3)
        pool = [tuple(sorted(c)) for c in pool]
        mats = [m for s in sizes for m in itertools.combinations(pool, s)]
        for qs in itertools.product(("forall", "exists"), repeat=h):
            prefix = tuple(zip(qs, range(1, h + 1)))
            out.extend(QBF(prefix, m) for m in mats)
    return out


def random_qbfs(n, seed):
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        h = rng.randint(1, 3)
        prefix = tuple((rng.choice(("forall", "exists")), v) for v in range(1, h + 1))
        clauses = tuple(tuple(sorted({rng.choice((1, -1)) * rng.randint(1, h) for _ in range(rng.randint(1, 3))}))
                        for _ in range(rng.randint(1, 3)))
        out.append(QBF(prefix, clauses))
    return out


def test_c3_tqbf():
    t0 = time.perf_counter()
    fam = exhaustive_qbfs() + random_qbfs(50, 17)
    bad = truths = 0
    for phi in fam:
        A, k1, k2 = tqbf_instance(phi)
        truth = evaluate(phi)
        truths += truth
        bad += check_bisim(A, k1, k2).bisimilar != truth
    ok = bad == 0
    record(3, ok, "%d formulas (%d exhaustive + 50 random, %d true), %d mismatches, %.1fs"
           % (len(fam), len(fam) - 50, truths, bad, time.perf_counter() - t0))
    assert ok


# --- 4 ------------------------------------------------------------------------------

def certificate_round(A, k1, k2):
    """extract -> verify -> contains; returns (bisimilar by certificate, within bound)."""
    g = certs.query_of(A, k1, k2)
    systems = certs.extract_all(A, getattr(g, "h", None))
    assert certs.verify_gensys(A, systems)
    G = {S.phase: S for S in systems}.get((g.S1, getattr(g, "h", None)))
    return G is not None and certs.gensys_contains(G, g), all(certs.within_bound(S, A.states) for S in systems)


def _outside_group(G, p):
    X = G.char_sets[p]
    return [s for s in bijections(G.n, X, X) if not group_contains(G.group(p), s)]


def _new_rays(G, q):
    """Rays to q that put a tuple outside the generated relation."""
    p = G.rep_of(q)
    old = G.rays[q]
    return [s for s in partial_injections(G.n, old.dom(), G.S)
            if s.dom() == old.dom() and not certs.gensys_contains(G, G.make(p, s, q))]


def mutation_targets(systems):
    out = []
    for pi, G in enumerate(systems):
        for p in G.reps:
            if G.generators[p] and _outside_group(G, p):
                out.extend((pi, "generator", p, k) for k in range(len(G.generators[p])))
        for q in G.rays:
            if G.rep_of(q) != q and _new_rays(G, q):
                out.append((pi, "ray", q, None))
    return out


def mutate(rng, systems, target):
    pi, what, key, k = target
    G = systems[pi]
    if what == "generator":
        gens = {p: list(v) for p, v in G.generators.items()}
        gens[key][k] = rng.choice(_outside_group(G, key))
        G2 = replace(G, generators=gens, _groups={}, _rep_of={})
    else:
        rays = dict(G.rays)
        rays[key] = rng.choice(_new_rays(G, key))
        G2 = replace(G, rays=rays, _groups={}, _rep_of={})
    out = list(systems)
    out[pi] = G2
    return out


def test_c4_sf_certificates():
    t0 = time.perf_counter()
    instances = []
    for (A, k1, k2), (a, _, _) in zip(ra_corpus(), ra_results()[0]):
        B = as_sf(A, k1, k2)
        if B is not None and a.bisimilar:
            instances.append((B, k1, k2, True))
    from_c1 = len(instances)
    for A, k1, k2 in sf_corpus():
        ref = check_bisim(A, k1, k2) if A.kind == "RA" else fresh_check(A, k1, k2)
        instances.append((A, k1, k2, ref.bisimilar))
    verdict_ok = bound_ok = 0
    for A, k1, k2, expected in instances:
        got, small = certificate_round(A, k1, k2)
        verdict_ok += got == expected
        bound_ok += small
    # mutations over the SF corpus
    corpus = []
    for A, k1, k2 in sf_corpus():
        g = certs.query_of(A, k1, k2)
        systems = certs.extract_all(A, getattr(g, "h", None))
        if mutation_targets(systems):
            corpus.append((A, systems))
    rng = random.Random(1)
    tally = Counter()
    for _ in range(200):
        A, systems = rng.choice(corpus)
        target = rng.choice(mutation_targets(systems))
        mutated = mutate(rng, systems, target)
        if not certs.verify_gensys(A, mutated):
            tally["rejected"] += 1
            continue
        pi = target[0]
        same = certs.materialize(mutated[pi], A.states) == certs.materialize(systems[pi], A.states)
        tally["accepted, same relation" if same else "accepted, different relation"] += 1
    n = len(instances)
    ok = (verdict_ok == n and bound_ok == n and tally["rejected"] >= 190
          and tally["accepted, different relation"] == 0)
    record(4, ok, "%d instances (%d from criterion 1), verdicts %d/%d, within bound %d/%d, "
                  "mutations %d/200 rejected, %d accepted with same relation, %.1fs"
           % (n, from_c1, verdict_ok, n, bound_ok, n, tally["rejected"], tally["accepted, same relation"],
              time.perf_counter() - t0))
    assert ok


# --- 5 ------------------------------------------------------------------------------

def test_c5_group_engine():
    rng = random.Random(23)
    mism = checked = 0
    for _ in range(500):
        size = rng.randint(1, 6)
        X = frozenset(rng.sample(range(1, 7), size))
        perms = list(bijections(6, X, X))
        gens = [rng.choice(perms) for _ in range(rng.randint(1, 3))]
        G = group_from_generators(gens, X, 6)
        naive = naive_closure(gens, X, 6)
        probes = perms if len(perms) <= 24 else rng.sample(perms, 40) + rng.sample(sorted(naive), min(10, len(naive)))
        for p in probes:
            checked += 1
            mism += group_contains(G, p) != (p in naive)
        mism += G.order != len(naive)
    chains = []
    for A, k1, k2 in ra_corpus():
        chains += fixpoint_bisim(A, roots=[query_tuple(k1, k2, A.registers)], trace_groups=True).chains
    for A, _, _ in sf_corpus():
        if A.kind == "RA":
            chains += fixpoint_bisim(A, trace_groups=True).chains
    long = [c for c in chains if len(c["X"]) >= 2]
    over = [c for c in long if c["length"] > 2 * len(c["X"]) - 3]
    ok = mism == 0 and not over
    record(5, ok, "%d membership probes, %d mismatches; %d chains with |X|>=2, longest %d, %d over 2|X|-3"
           % (checked, mism, len(long), max((c["length"] for c in long), default=0), len(over)))
    assert ok


# --- 6 ------------------------------------------------------------------------------

FRAGMENT_CAP = 60000


def fra_fixture(extra_known=False, histories=False):
    """r=1: q1 reads a locally fresh name, q2 a globally fresh one."""
    trans = [local_fresh("q1", "t", 1, "q1'"), global_fresh("q2", "t", 1, "q2'")]
    states = ["q1", "q1'", "q2", "q2'"]
    if extra_known:
        trans.append(known("q2", "t", 1, "q2''"))
        states.append("q2''")
    A = Automaton("FRA", "S#0", 1, tuple(states), "q1", (None,), tuple(trans), frozenset(), ("t",), "fix")
    if histories:
        H = frozenset((1, 2))
        return A, Configuration("q1", (1,), H), Configuration("q2", (2,), H)
    H = frozenset((5,))
    return A, Configuration("q1", (5,), H), Configuration("q2", (5,), H)


def finite_verdict(A, k1, k2):
    """(bisimilar, attacker depth, how) from the finite reduction."""
    try:
        L, s1, s2 = build_finite_game(A, k1, k2, max_states=FRAGMENT_CAP)
    except CapacityError:
        v = finite_game_decide(A, k1, k2)
        return v.bisimilar, v.attacker_depth, "symmetric game"
    same = fsa_bisim(L, s1, s2)
    d = split_depth(L, s1, s2)
    assert same == (d is None)
    return same, d, "partition refinement"


def test_c6_finite_reduction():
    t0 = time.perf_counter()
    rng = random.Random(11)
    agree = depth_ok = 0
    how = Counter()
    for k in range(50):
        r = rng.randint(1, 2)
        A = random_automaton(9000 + k, rng.randint(1, 3), r, "S#0", "FRA", rng.randint(1, 2), 0.25)
        k1, k2 = random_pair(rng, A, extra_history=rng.randint(0, 2))
        ref = fresh_check(A, k1, k2)
        same, d, used = finite_verdict(A, k1, k2)
        how[used] += 1
        agree += same == ref.bisimilar
        depth_ok += same or d <= 4 * ref.attacker_depth + 4
    fixtures = [(fra_fixture(), True), (fra_fixture(histories=True), False),
                (fra_fixture(extra_known=True, histories=True), True)]
    fix_ok = 0
    for (A, k1, k2), expected in fixtures:
        fix_ok += fresh_check(A, k1, k2).bisimilar == expected and finite_verdict(A, k1, k2)[0] == expected
    ok = agree == 50 and depth_ok == 50 and fix_ok == len(fixtures)
    record(6, ok, "%d/50 agree, depth bound %d/50, fixtures %d/%d (%s), %.1fs"
           % (agree, depth_ok, fix_ok, len(fixtures), ", ".join("%s: %d" % kv for kv in sorted(how.items())),
              time.perf_counter() - t0))
    assert ok


# --- 7 ------------------------------------------------------------------------------

def chain_pair(rng, d, r=2):
    """Deterministic chains that agree on d-1 steps and differ at step d."""
    filled, steps = set(), []
    for _ in range(d - 1):
        opts = [("fresh", i) for i in range(1, r + 1)] + [("known", i) for i in sorted(filled)]
        kind, i = rng.choice(opts)
        steps.append((kind, i, rng.choice("ab")))
        if kind == "fresh":
            filled.add(i)

    def build(last, name, final=True):
        qs = ["p%d" % k for k in range(d + 1)]
        tr = []
        for k, (kind, i, tag) in enumerate(steps + [last]):
            tr.append((known if kind == "known" else local_fresh)(qs[k], tag, i, qs[k + 1]))
        tr.append(local_fresh(qs[d], "b", 1, qs[d]))
        fin = frozenset([qs[d]]) if final else frozenset()
        return Automaton("RA", "S#0", r, tuple(qs), qs[0], (None,) * r, tuple(tr), fin, ("a", "b"), name).canonical()

    A1 = build(("fresh", 1, "a"), "left")
    if filled:
        A2 = build(("known", min(filled), "a"), "right")
    else:
        A2 = build(("fresh", 1, "a"), "right", final=False)
    return A1, A2


def shortest_separator(A1, A2, limit=12):
    """Breadth-first search over pairs of runs on 2r+1 concrete names."""
    r = max(A1.registers, A2.registers)
    letters = [(t, x) for t in sorted(set(A1.tags) | set(A2.tags)) for x in range(2 * r + 1)]

    def step(A, c, letter):
        if c is None:
            return None
        q, regs = c
        for t in A.transitions:
            if t.source != q or t.tag != letter[0]:
                continue
            if (t.is_known and regs[t.write - 1] == letter[1]) or (t.is_local_fresh and letter[1] not in regs):
                regs = list(regs)
                regs[t.write - 1] = letter[1]
                return t.target, tuple(regs)
        return None

    def acc(A, c):
        return c is not None and c[0] in A.finals

    start = ((A1.initial, A1.assign), (A2.initial, A2.assign))
    dist = {start: 0}
    queue = deque([start])
    while queue:
        c = queue.popleft()
        if acc(A1, c[0]) != acc(A2, c[1]):
            return dist[c]
        if dist[c] >= limit:
            continue
        for letter in letters:
            n = (step(A1, c[0], letter), step(A2, c[1], letter))
            if n not in dist:
                dist[n] = dist[c] + 1
                queue.append(n)
    return None


def rename(A, tag):
    ren = {q: "%s_%s" % (tag, q) for q in A.states}
    trans = tuple(replace(t, source=ren[t.source], target=ren[t.target]) for t in A.transitions)
    return A.replace(states=tuple(ren[q] for q in A.states), initial=ren[A.initial], transitions=trans,
                     finals=frozenset(ren[q] for q in A.finals), name=A.name + "_" + tag)


def test_c7_language_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(3)
    good = equiv = 0
    longest = 0
    for d in range(1, 7):
        for _ in range(5):
            A1, A2 = chain_pair(rng, d)
            assert shortest_separator(A1, A2) == d
            v = lang_equiv(A1, A2)
            N = len(A1.states) + len(A2.states)
            r = max(A1.registers, A2.registers)
            bound = (2 * r + 1) * (4 * N * N + 4 * r * r * N - 2 * r * N) + 1
            w = v.witness
            valid = (not v.equivalent and w is not None and len(w.word) <= bound
                     and accepts(A1, w.word) == (w.accepted_by == "A1")
                     and accepts(A2, w.word) == (w.accepted_by == "A2")
                     and accepts(A1, w.word) != accepts(A2, w.word))
            good += valid
            longest = max(longest, len(w.word) if w else 0)
            equiv += lang_equiv(A1, A1).equivalent and lang_equiv(A1, rename(A1, "copy")).equivalent
    ok = good == 30 and equiv == 30
    record(7, ok, "%d/30 valid witnesses (longest %d), %d/30 self and renamed copies equivalent, %.1fs"
           % (good, longest, equiv, time.perf_counter() - t0))
    assert ok


# --- 8 ------------------------------------------------------------------------------

def test_c8_closure_laws():
    rng = random.Random(29)
    laws_ok = 0
    for k in range(100):
        r = rng.randint(1, 2)
        states = tuple("q%d" % i for i in range(rng.randint(1, 3)))
        A = Automaton("RA", "S#0", r, states, states[0], (None,) * r, (), frozenset(), ("a",), "u")
        U = universe(A, set_family(r))
        R = set(rng.sample(U, rng.randint(1, min(6, len(U)))))
        C = closure(R, states, r)
        rep = closure_report(C, r)
        laws_ok += R <= C and closure(C, states, r) == C and all(rep.values())
    fra_ok = 0
    for k in range(20):
        A = random_automaton(400 + k, rng.randint(1, 2), 1, "S#0", "FRA")
        U = full_universe(A)
        R = set(rng.sample(U, 4))
        C = fresh_closure(R, A.states, 1)
        fra_ok += fresh_closure(C, A.states, 1) == C and all(fresh_closure_report(C, 1).values())
    fix_ok = 0
    fix_n = 0
    for A, k1, k2 in ra_corpus()[:60]:
        fix_n += 1
        rel = fixpoint_bisim(A)
        fix_ok += all(closure_report(rel.tuples, A.registers).values())
    ok = laws_ok == 100 and fra_ok == 20 and fix_ok == fix_n
    record(8, ok, "closure laws on %d/100 random RA relations and %d/20 FRA relations; %d/%d fixpoints closed"
           % (laws_ok, fra_ok, fix_ok, fix_n))
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c"):
            try:
                fn()
            except AssertionError:
                pass
