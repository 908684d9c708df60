"""Brute-force bisimulation game on concrete configurations over a finite
pool of names.  This is the reference the symbolic checkers are tested
against, so it is written for clarity rather than speed.

Positions are canonicalised up to renaming of names: register names are
numbered in order of appearance (left assignment first), the remaining
history names follow in ascending order.  Since all pool names outside a
position are interchangeable, one representative fresh name per move
suffices, and likewise one historical non-register name.
"""

from .automata import Configuration, fire, least_unused
from .errors import UsageError
from .games import Game, GameVerdict


def canon(q1, r1, q2, r2, H):
    m = {}
    for d in r1 + r2:
        if d is not None and d not in m:
            m[d] = len(m)
    if H is not None:
        for d in sorted(H):
            if d not in m:
                m[d] = len(m)
    c1 = tuple(None if d is None else m[d] for d in r1)
    c2 = tuple(None if d is None else m[d] for d in r2)
    cH = None if H is None else frozenset(m[d] for d in H)
    return (q1, c1, q2, c2, cH), m


def _labels(pool_size, r1, r2, H, tags):
    names = sorted({d for d in r1 + r2 if d is not None})
    live = set(names)
    if H:
        extra = sorted(H - live)
        if extra:
            names.append(extra[0])
    used = live | (H or set())
    spare = least_unused(used)
    if spare < pool_size:
        names.append(spare)
    return [(t, d) for t in tags for d in names]


def _succ(A, q, regs, H, tag, d):
    out = []
    for idx, t in A.out(q):
        if t.tag != tag:
            continue
        new = fire(t, regs, H, d)
        if new is not None:
            out.append((idx, t.target, new))
    return out


def _moves_fn(A, pool_size):
    tags = A.tags

    def moves(pos):
        q1, r1, q2, r2, H = pos
        mv = []
        for t, d in _labels(pool_size, r1, r2, H, tags):
            H2 = None if H is None else H | {d}
            s1 = _succ(A, q1, r1, H, t, d)
            s2 = _succ(A, q2, r2, H, t, d)
            for idx, p1, n1 in s1:
                resp = [(j, canon(p1, n1, p2, n2, H2)[0]) for j, p2, n2 in s2]
                mv.append(((1, (t, d), idx), resp))
            for idx, p2, n2 in s2:
                resp = [(j, canon(p1, n1, p2, n2, H2)[0]) for j, p1, n1 in s1]
                mv.append(((2, (t, d), idx), resp))
        return mv

    return moves


def bounded_bisim(A, k1, k2, depth, pool):
    """Evaluate the bisimulation game for ``depth`` rounds with labels drawn
    from tags x pool.  ``depth=None`` iterates until the ranks stabilise."""
    pool = set(pool)
    live = k1.names() | k2.names() | (k1.history or set()) | (k2.history or set())
    if not live <= pool:
        raise UsageError("configuration names %s are outside the pool" % sorted(live - pool))
    if (k1.history is None) != (k2.history is None) or (k1.history is not None and k1.history != k2.history):
        raise UsageError("configurations must share the same history")
    root, _ = canon(k1.state, k1.regs, k2.state, k2.regs, k1.history)
    game = Game(root, _moves_fn(A, len(pool)))
    if depth == 0:
        return GameVerdict(True, method="oracle", stats={"positions": len(game.graph), "depth": 0})
    rank = game.solve(depth)
    stats = {"positions": len(game.graph), "depth": depth}
    if root not in rank:
        return GameVerdict(True, method="oracle", stats=stats)
    witness = _replay(A, game, k1, k2, sorted(pool))
    return GameVerdict(False, rank[root], witness, "oracle", stats)


def _replay(A, game, k1, k2, pool):
    """Turn the canonical principal variation into a trace over real names."""
    c1, c2 = k1, k2
    trace = []
    while True:
        pos, m = canon(c1.state, c1.regs, c2.state, c2.regs, c1.history)
        bm = game.best_move(pos)
        if bm is None:
            return trace
        (side, (tag, cd), idx), resp = bm
        back = {v: k for k, v in m.items()}
        if cd in back:
            d = back[cd]
        else:
            used = set(m)
            d = next(x for x in pool if x not in used)
        label = (tag, d)
        trace.append((side, label, idx))
        att = c1 if side == 1 else c2
        t = A.transitions[idx]
        hist = None if att.history is None else att.history | {d}
        natt = Configuration(t.target, fire(t, att.regs, att.history, d), hist)
        if resp is None:
            return trace
        j = resp[0]
        dfn = c2 if side == 1 else c1
        u = A.transitions[j]
        ndef = Configuration(u.target, fire(u, dfn.regs, dfn.history, d), hist)
        trace.append((3 - side, label, j))
        c1, c2 = (natt, ndef) if side == 1 else (ndef, natt)


def ra_pool(A, k1, k2):
    names = sorted(k1.names() | k2.names())
    while len(names) < 2 * A.registers + 1:
        names.append(least_unused(names))
    return names


def exact_bisim_ra(A, k1, k2, depth=None):
    """Exact bisimilarity for an RA: pool of 2r+1 names, depth B."""
    if A.kind != "RA":
        raise UsageError("exact_bisim_ra needs an RA; use the finite reduction for FRA")
    from .symbolic import depth_bound
    if depth is None:
        depth = depth_bound(A)
    v = bounded_bisim(A, k1, k2, depth, ra_pool(A, k1, k2))
    v.method = "oracle"
    return v
