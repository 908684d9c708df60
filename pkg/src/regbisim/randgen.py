"""Seeded random automata and configurations for tests and the CLI."""

import random
from itertools import combinations

from .automata import STAR, Automaton, Configuration, Transition
from .errors import UsageError


def _candidates(r, discipline, kind):
    """(guard, write, erase) triples allowed by the discipline."""
    single = discipline.startswith("S")
    no_erase = discipline.endswith("F") or discipline.endswith("#0")
    regs = range(1, r + 1)
    writes = list(regs) if no_erase else [0] + list(regs)
    out = []
    guards = []
    if single:
        for i in writes:
            if i:
                out.append((frozenset((i,)), i))
            out.append((frozenset(), i))
            if kind == "FRA" and i:
                out.append((STAR, i))
    else:
        for k in range(r + 1):
            guards.extend(frozenset(c) for c in combinations(regs, k))
        if kind == "FRA":
            guards.append(STAR)
        for g in guards:
            for i in writes:
                out.append((g, i))
    res = []
    for g, i in out:
        if no_erase:
            res.append((g, i, frozenset()))
        else:
            others = [z for z in regs if z != i]
            res.append((g, i, frozenset()))
            for z in others:
                res.append((g, i, frozenset((z,))))
    return res


def random_assignment(rng, r, discipline, pool=None):
    single = discipline.startswith("S")
    filled = discipline.endswith("F")
    pool = list(range(2 * r + 2)) if pool is None else list(pool)
    regs = []
    for _ in range(r):
        if not filled and rng.random() < 0.35:
            regs.append(None)
            continue
        choices = [d for d in pool if not (single and d in regs)]
        regs.append(rng.choice(choices))
    return tuple(regs)


def random_automaton(seed, states, registers, discipline, kind="RA", tag_count=1, density=0.3):
    """A valid automaton of the requested discipline.

    Every candidate transition shape (source, tag, guard, write, erase) is
    included independently with probability ``density`` (scaled down for
    the large multiple-assignment shape sets) and gets a uniform target.
    """
    if states < 1 or registers < 0 or tag_count < 1 or not (0 <= density <= 1):
        raise UsageError("bad generator parameters")
    if discipline not in ("SF", "S#0", "S#", "MF", "M#0", "M#") or kind not in ("RA", "FRA"):
        raise UsageError("unknown discipline or kind")
    rng = random.Random(seed)
    qs = tuple("q%d" % k for k in range(states))
    tags = tuple("abcdefghijklmnopqrstuvwxyz"[k] if k < 26 else "t%d" % k for k in range(tag_count))
    shapes = _candidates(registers, discipline, kind)
    scale = min(1.0, 2.0 * (registers + 1) / max(1, len(shapes)))
    p = density if discipline.startswith("S") and discipline.endswith(("F", "#0")) else density * scale
    trans = []
    for q in qs:
        for t in tags:
            for g, i, z in shapes:
                if rng.random() < p:
                    trans.append(Transition(q, t, g, i, z, rng.choice(qs)))
    finals = frozenset(q for q in qs if rng.random() < 0.4)
    assign = random_assignment(rng, registers, discipline)
    A = Automaton(kind, discipline, registers, qs, qs[0], assign, tuple(trans), finals, tags,
                  "rand%d" % seed)
    return A.canonical()


def random_config(rng, A, pool=None, history=None):
    regs = random_assignment(rng, A.registers, A.discipline, pool)
    return Configuration(rng.choice(A.states), regs, history)


def random_pair(rng, A, pool=None, extra_history=0):
    """Two random configurations; for FRA they share a history containing
    both assignments plus ``extra_history`` further names."""
    k1 = random_config(rng, A, pool)
    if rng.random() < 0.3:
        # same state with a renamed assignment is a frequent bisimilar case
        names = sorted(k1.names())
        target = list(names)
        rng.shuffle(target)
        ren = dict(zip(names, target))
        k2 = Configuration(k1.state if rng.random() < 0.5 else rng.choice(A.states),
                           tuple(None if d is None else ren[d] for d in k1.regs))
    else:
        k2 = random_config(rng, A, pool)
    if A.kind == "FRA":
        H = set(k1.names() | k2.names())
        n = max(H, default=-1) + 1
        for _ in range(extra_history):
            H.add(n)
            n += 1
        H = frozenset(H)
        k1 = Configuration(k1.state, k1.regs, H)
        k2 = Configuration(k2.state, k2.regs, H)
    return k1, k2
