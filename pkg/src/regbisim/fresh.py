"""Symbolic bisimulation for fresh-register automata (single assignment,
no erasure).

Tuples carry an extra component h.  While the history holds at most 2r
names (h = |H| <= 2r) every historical name gets an index in [r+1, 3r],
so sigma is a bijection between the full index sets S1 and S2.  Once the
history outgrows 2r names (h = INF) only register contents are tracked and
the tuple behaves exactly like its RA counterpart over [1, r].
"""

import math
from collections import deque, namedtuple
from itertools import permutations

from .automata import fire
from .errors import CapacityError, UsageError
from .games import Game, GameVerdict
from .perm import PartialPerm, _pp, bijections, invert, partial_injections, transpose_action, update
from .symbolic import TransIndex, both_sides, closure, closure_report, refine, subsets

INF = math.inf
FreshSymTuple = namedtuple("FreshSymTuple", "q1 S1 sigma q2 S2 h")

FRESH_CAP = 2
FRESH_CAP_SF = 3


def _swapset(a, b, S):
    if a == b:
        return S
    return frozenset(b if k == a else a if k == b else k for k in S)


def _add_pair(s, i, j):
    images = list(s)
    images[i - 1] = j
    return _pp(images)


def _new_name_successor(g, ix, tq1, i, tq2, j):
    """Successor after both sides read a name outside the history, the left
    storing it in register i and the right in register j."""
    q1, S1, s, q2, S2, h = g
    r = ix.r
    n = 3 * r
    if h < 2 * r:
        ip = min(k for k in range(r + 1, n + 1) if k not in S1)
        jp = min(k for k in range(r + 1, n + 1) if k not in S2)
        s0 = _add_pair(s, ip, jp)
        sn = transpose_action(j, jp, transpose_action(i, ip, s0, "left"), "right")
        return FreshSymTuple(tq1, _swapset(i, ip, S1 | {ip}), sn, tq2, _swapset(j, jp, S2 | {jp}), h + 1)
    regs = frozenset(range(1, r + 1))
    if h == 2 * r:
        return FreshSymTuple(tq1, (S1 | {i}) & regs, update(s, i, j).restrict(regs, regs),
                             tq2, (S2 | {j}) & regs, INF)
    return FreshSymTuple(tq1, S1 | {i}, update(s, i, j), tq2, S2 | {j}, INF)


def fchallenges(ix, g):
    """Attacker challenges on the left component of g, as in
    symbolic.challenges.  Kinds: known (register read), hist (locally fresh
    read of a historical name at index ref), fresh-known (locally fresh read
    of a name in right register ref), new (name outside the history)."""
    q1, S1, s, q2, S2, h = g
    r = ix.r
    out = []
    for idx, t in ix.by_state.get(q1, ()):
        tag = t.tag
        if t.is_known:
            i = t.write
            if i not in S1:
                continue
            j = s[i - 1]
            if j and j <= r:
                opts = [(jdx, FreshSymTuple(t.target, S1, s, u.target, S2, h))
                        for jdx, u in ix.known.get((q2, tag, j), ())]
            elif j:
                opts = [(jdx, FreshSymTuple(t.target, S1, transpose_action(u.write, j, s, "right"),
                                            u.target, _swapset(u.write, j, S2), h))
                        for jdx, u in ix.fresh.get((q2, tag), ())]
            else:
                opts = [(jdx, FreshSymTuple(t.target, S1, update(s, i, u.write), u.target, S2 | {u.write}, h))
                        for jdx, u in ix.fresh.get((q2, tag), ())]
            out.append((("known", idx, i), opts))
            continue
        i = t.write
        if t.is_local_fresh:
            for ip in sorted(k for k in S1 if k > r):
                j = s[ip - 1]
                S1n = _swapset(i, ip, S1)
                s0 = transpose_action(i, ip, s, "left")
                if j <= r:
                    opts = [(jdx, FreshSymTuple(t.target, S1n, s0, u.target, S2, h))
                            for jdx, u in ix.known.get((q2, tag, j), ())]
                else:
                    opts = [(jdx, FreshSymTuple(t.target, S1n, transpose_action(u.write, j, s0, "right"),
                                                u.target, _swapset(u.write, j, S2), h))
                            for jdx, u in ix.fresh.get((q2, tag), ())]
                out.append((("hist", idx, ip), opts))
            S1n = S1 | {i}
            for j in sorted(S2 - s.rng()):
                opts = [(jdx, FreshSymTuple(t.target, S1n, update(s, i, j), u.target, S2, h))
                        for jdx, u in ix.known.get((q2, tag, j), ())]
                out.append((("fresh-known", idx, j), opts))
        answers = list(ix.fresh.get((q2, tag), ()))
        if h != INF or t.is_global_fresh:
            answers += ix.glob.get((q2, tag), [])
        answers.sort()
        opts = [(jdx, _new_name_successor(g, ix, t.target, i, u.target, u.write)) for jdx, u in answers]
        out.append((("new", idx, None), opts))
    return out


def fsys_satisfied(A, g, R):
    ix = A if isinstance(A, TransIndex) else TransIndex(A)
    return all(any(s in R for _, s in opts) for _, opts in fchallenges(ix, g))


def fresh_depth_bound(A):
    r, Q = A.registers, len(A.states)
    return (4 * r + 2) * (4 * Q * Q + 16 * r * r * Q - 12 * r * Q)


def _check(A, cap=True):
    if A.kind != "FRA" or A.discipline not in ("S#0", "SF"):
        raise UsageError("fresh symbolic checking needs FRA(S#0) or FRA(SF), got %s(%s)"
                         % (A.kind, A.discipline))
    limit = FRESH_CAP_SF if A.discipline == "SF" else FRESH_CAP
    if cap and A.registers > limit:
        raise CapacityError("fresh symbolic universe limited to r <= %d for %s" % (limit, A.discipline))


# --- symb -------------------------------------------------------------------

def _hat(k, r, extras):
    hat = list(k.regs) + [None] * (2 * r)
    for idx, d in extras:
        hat[idx - 1] = d
    return hat


def tuple_of(q1, hat1, q2, hat2, h, r):
    """The symbolic tuple described by two extended index assignments."""
    n = 3 * r if h != INF else r
    pos2 = {d: k + 1 for k, d in enumerate(hat2[:n]) if d is not None}
    images = [0] * (3 * r)
    for k, d in enumerate(hat1[:n]):
        if d is not None:
            images[k] = pos2.get(d, 0)
    S1 = frozenset(k + 1 for k, d in enumerate(hat1[:n]) if d is not None)
    S2 = frozenset(k + 1 for k, d in enumerate(hat2[:n]) if d is not None)
    return FreshSymTuple(q1, S1, _pp(images), q2, S2, h)


def _check_histories(k1, k2):
    if k1.history is None or k2.history is None or k1.history != k2.history:
        raise UsageError("configurations must share the same history")
    if not (k1.names() | k2.names()) <= k1.history:
        raise UsageError("register contents must belong to the history")


def canonical_hats(k1, k2, r):
    H = k1.history
    if len(H) > 2 * r:
        return list(k1.regs), list(k2.regs), INF
    hats = []
    for k in (k1, k2):
        extra = sorted(H - k.names())
        hats.append(_hat(k, r, [(r + 1 + m, d) for m, d in enumerate(extra)]))
    return hats[0], hats[1], len(H)


def symb(k1, k2, r, canonical=False):
    """The symbolic tuples representing the configuration pair."""
    _check_histories(k1, k2)
    H = k1.history
    if canonical or len(H) > 2 * r:
        h1, h2, h = canonical_hats(k1, k2, r)
        return [tuple_of(k1.state, h1, k2.state, h2, h, r)]
    slots = list(range(r + 1, 3 * r + 1))
    x1 = sorted(H - k1.names())
    x2 = sorted(H - k2.names())
    out = []
    for p1 in permutations(slots, len(x1)):
        hat1 = _hat(k1, r, zip(p1, x1))
        for p2 in permutations(slots, len(x2)):
            hat2 = _hat(k2, r, zip(p2, x2))
            out.append(tuple_of(k1.state, hat1, k2.state, hat2, len(H), r))
    return out


# --- fixpoint -----------------------------------------------------------------

class FreshSymRel:
    def __init__(self, tuples, r, states, iterations, removed):
        self.tuples = tuples
        self.r = r
        self.states = states
        self.iterations = iterations
        self.removed = removed

    def __contains__(self, g):
        return g in self.tuples

    def __len__(self):
        return len(self.tuples)

    def component(self, h):
        return {g for g in self.tuples if g.h == h}


def full_universe(A):
    r = A.registers
    n = 3 * r
    idx = list(range(1, n + 1))
    out = []
    for h in range(0, 2 * r + 1):
        sets = [frozenset(c) for c in _combos(idx, h)]
        for S1 in sets:
            for S2 in sets:
                for s in bijections(n, S1, S2):
                    for q1 in A.states:
                        for q2 in A.states:
                            out.append(FreshSymTuple(q1, S1, s, q2, S2, h))
    for S1 in subsets(r):
        for S2 in subsets(r):
            for s in partial_injections(n, S1, S2):
                for q1 in A.states:
                    for q2 in A.states:
                        out.append(FreshSymTuple(q1, S1, s, q2, S2, INF))
    return out


def _combos(idx, k):
    from itertools import combinations
    return combinations(idx, k)


def reachable(ix, roots):
    seen = set(roots)
    queue = deque(roots)
    order = list(roots)
    while queue:
        g = queue.popleft()
        for _, opts in both_sides(fchallenges, ix, g):
            for _, s in opts:
                if s not in seen:
                    seen.add(s)
                    order.append(s)
                    queue.append(s)
    return order


def fresh_fixpoint(A, roots=None):
    """Greatest fixpoint of the fresh simulation conditions (both directions)
    over the whole universe, or over the tuples reachable from ``roots``."""
    _check(A)
    ix = TransIndex(A)
    U = full_universe(A) if roots is None else reachable(ix, list(roots))
    R, it, removed = refine(U, lambda g: both_sides(fchallenges, ix, g))
    return FreshSymRel(R, A.registers, tuple(A.states), it, removed)


def fresh_closure(R, states, r, pairs=None):
    """Componentwise closure; Ext only matters in the h = INF component."""
    by_h = {}
    for g in R:
        by_h.setdefault(g.h, set()).add(g)
    if pairs is not None:
        for q, S, h in pairs:
            by_h.setdefault(h, set())
    out = set()
    for h, comp in by_h.items():
        reps = set()
        for g in comp:
            reps.add((g.q1, g.S1))
            reps.add((g.q2, g.S2))
        if pairs is not None:
            reps |= {(q, S) for q, S, hh in pairs if hh == h}
        out |= closure(comp, states, r, pairs=sorted(reps, key=lambda p: (p[0], sorted(p[1]))),
                       ext=(h == INF), n=3 * r, cls=FreshSymTuple, extra=(h,))
    return out


def fresh_closure_report(R, r):
    by_h = {}
    for g in R:
        by_h.setdefault(g.h, set()).add(g)
    report = {"identity": True, "symmetric": True, "transitive": True, "upward": True}
    for h, comp in by_h.items():
        rep = closure_report(comp, r, ext=(h == INF), n=3 * r)
        for k, v in rep.items():
            report[k] = report[k] and v
    return report


# --- checking -----------------------------------------------------------------

def fresh_check(A, k1, k2):
    _check(A)
    g = symb(k1, k2, A.registers, canonical=True)[0]
    rel = fresh_fixpoint(A, roots=[g])
    stats = {"iterations": rel.iterations, "tuples": len(rel.tuples), "bound": fresh_depth_bound(A)}
    if g in rel.tuples:
        return GameVerdict(True, method="symbolic", stats=stats)
    ix = TransIndex(A)
    game = Game(g, lambda p: both_sides(fchallenges, ix, p))
    game.solve()
    witness = concretize(A, game, k1, k2)
    return GameVerdict(False, rel.removed[g], witness, "symbolic", stats)


def fresh_game_decide(A, k1, k2, depth):
    """Depth-bounded game on the fresh symbolic positions."""
    _check(A, cap=False)
    ix = TransIndex(A)
    g = symb(k1, k2, A.registers, canonical=True)[0]
    game = Game(g, lambda p: both_sides(fchallenges, ix, p))
    stats = {"positions": len(game.graph), "depth": depth}
    if depth == 0:
        return GameVerdict(True, method="game", stats=stats)
    rank = game.solve(depth)
    if g not in rank:
        return GameVerdict(True, method="game", stats=stats)
    return GameVerdict(False, rank[g], concretize(A, game, k1, k2), "game", stats)


def _advance(hat, t, d, h, H, r):
    """Extended index assignment of one side after reading d with t."""
    regs = fire(t, tuple(hat[:r]), H, d)
    new = list(regs) + list(hat[r:])
    if h == INF:
        return new
    if d in hat:
        x = hat.index(d) + 1
        if x > r:
            new[x - 1] = hat[t.write - 1]
        return new
    if h < 2 * r:
        x = min(k for k in range(r + 1, 3 * r + 1) if hat[k - 1] is None)
        new[x - 1] = hat[t.write - 1]
        return new
    return list(regs) + [None] * (2 * r)


def concretize(A, game, k1, k2):
    """Replay the principal variation of a solved fresh symbolic game on
    concrete configurations, tracking where historical names sit."""
    r = A.registers
    hat1, hat2, h = canonical_hats(k1, k2, r)
    q1, q2 = k1.state, k2.state
    H = set(k1.history)
    trace = []
    while True:
        pos = tuple_of(q1, hat1, q2, hat2, h, r)
        bm = game.best_move(pos)
        if bm is None:
            return trace
        (side, kind, idx, ref), resp = bm
        att, dfn = (hat1, hat2) if side == 1 else (hat2, hat1)
        if kind in ("known", "hist"):
            d = att[ref - 1]
        elif kind == "fresh-known":
            d = dfn[ref - 1]
        else:
            d = min(set(range(len(H) + 1)) - H)
        t = A.transitions[idx]
        label = (t.tag, d)
        trace.append((side, label, idx))
        if resp is None:
            return trace
        u = A.transitions[resp[0]]
        trace.append((3 - side, label, resp[0]))
        natt = _advance(att, t, d, h, H, r)
        ndef = _advance(dfn, u, d, h, H, r)
        if d not in H and h != INF:
            h = h + 1 if h < 2 * r else INF
        H.add(d)
        if side == 1:
            hat1, hat2, q1, q2 = natt, ndef, t.target, u.target
        else:
            hat1, hat2, q1, q2 = ndef, natt, u.target, t.target
        if h == INF:
            hat1 = hat1[:r] + [None] * (2 * r)
            hat2 = hat2[:r] + [None] * (2 * r)
