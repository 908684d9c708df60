"""Symbolic bisimulation for single-assignment RA without erasure.

A symbolic tuple (q1, S1, sigma, q2, S2) stands for every pair of
configurations whose filled registers are S1 and S2 and whose common
names are exactly the pairs of sigma (register i on the left holds the
same name as register sigma(i) on the right).
"""

from collections import defaultdict, deque, namedtuple
from dataclasses import dataclass
from itertools import combinations

from .automata import Configuration, fire, least_unused
from .errors import CapacityError, UsageError
from .games import Game, GameVerdict
from .perm import PartialPerm, PermGroup, compose, invert, partial_injections, update

SymTuple = namedtuple("SymTuple", "q1 S1 sigma q2 S2")

NAIVE_CAP = 4
SYMBOLIC_DISCIPLINES = ("S#0", "SF")


class TransIndex:
    """Transitions of an automaton grouped for symbolic move generation."""

    def __init__(self, A):
        self.A = A
        self.r = A.registers
        self.known = defaultdict(list)   # (q, tag, i) -> [(idx, t)]
        self.fresh = defaultdict(list)   # (q, tag) -> [(idx, t)] locally fresh
        self.glob = defaultdict(list)    # (q, tag) -> [(idx, t)] globally fresh
        self.by_state = defaultdict(list)
        for idx, t in enumerate(A.transitions):
            self.by_state[t.source].append((idx, t))
            if t.is_known:
                self.known[(t.source, t.tag, t.write)].append((idx, t))
            elif t.is_global_fresh:
                self.glob[(t.source, t.tag)].append((idx, t))
            elif t.is_local_fresh:
                self.fresh[(t.source, t.tag)].append((idx, t))


def subsets(r):
    out = []
    for k in range(r + 1):
        out.extend(frozenset(c) for c in combinations(range(1, r + 1), k))
    return out


def inverse_tuple(g):
    return g.__class__(g.q2, g.S2, invert(g.sigma), g.q1, g.S1, *g[5:])


def query_tuple(k1, k2, r):
    """(q1, dom rho1, rho1;rho2^-1, q2, dom rho2) for two configurations."""
    pos2 = {d: k + 1 for k, d in enumerate(k2.regs) if d is not None}
    images = [pos2.get(d, 0) if d is not None else 0 for d in k1.regs]
    return SymTuple(k1.state, k1.dom(), PartialPerm(images), k2.state, k2.dom())


def challenges(ix, g):
    """Attacker challenges on the left component of g.

    Each entry is ((kind, transition, ref), options) where options lists the
    Defender answers as (transition, successor tuple).
    """
    q1, S1, s, q2, S2 = g
    out = []
    for idx, t in ix.by_state.get(q1, ()):
        tag = t.tag
        if t.is_known:
            i = t.write
            if i not in S1:
                continue
            j = s[i - 1]
            if j:
                opts = [(jdx, SymTuple(t.target, S1, s, u.target, S2))
                        for jdx, u in ix.known.get((q2, tag, j), ())]
            else:
                opts = [(jdx, SymTuple(t.target, S1, update(s, i, u.write), u.target, S2 | {u.write}))
                        for jdx, u in ix.fresh.get((q2, tag), ())]
            out.append((("known", idx, i), opts))
        elif t.is_local_fresh:
            i = t.write
            S1n = S1 | {i}
            opts = [(jdx, SymTuple(t.target, S1n, update(s, i, u.write), u.target, S2 | {u.write}))
                    for jdx, u in ix.fresh.get((q2, tag), ())]
            out.append((("fresh", idx, None), opts))
            rng = s.rng()
            for j in sorted(S2 - rng):
                opts = [(jdx, SymTuple(t.target, S1n, update(s, i, j), u.target, S2))
                        for jdx, u in ix.known.get((q2, tag, j), ())]
                out.append((("fresh-known", idx, j), opts))
    return out


def both_sides(chal, ix, g):
    """Challenges from both components; right-hand ones are computed on the
    inverse tuple and mapped back."""
    out = [((1,) + m, opts) for m, opts in chal(ix, g)]
    for m, opts in chal(ix, inverse_tuple(g)):
        out.append(((2,) + m, [(j, inverse_tuple(s)) for j, s in opts]))
    return out


def sys_satisfied(A, g, R):
    """The symbolic simulation conditions of g against the relation R
    (a set or any object supporting ``in``)."""
    ix = A if isinstance(A, TransIndex) else TransIndex(A)
    return all(any(s in R for _, s in opts) for _, opts in challenges(ix, g))


def depth_bound(A):
    r, Q = A.registers, len(A.states)
    return (2 * r + 1) * (4 * Q * Q + 4 * r * r * Q - 2 * r * Q)


def _check_discipline(A):
    if A.discipline not in SYMBOLIC_DISCIPLINES:
        raise UsageError("symbolic checking needs discipline S#0 or SF, got %s" % A.discipline)


@dataclass
class SymRel:
    tuples: set
    r: int
    states: tuple
    iterations: int = 0
    removed: dict = None
    chains: list = None

    def __contains__(self, g):
        return g in self.tuples

    def __len__(self):
        return len(self.tuples)


def set_family(r, roots=None):
    """(S1,S2) pairs of the universe, optionally only those reachable from roots."""
    subs = subsets(r)
    if roots is None:
        return [(a, b) for a in subs for b in subs]
    fam = set()
    for g in roots:
        for a in subs:
            for b in subs:
                if (a >= g.S1 and b >= g.S2) or (a >= g.S2 and b >= g.S1):
                    fam.add((a, b))
    return sorted(fam, key=lambda p: (sorted(p[0]), sorted(p[1])))


def universe(A, family):
    r = A.registers
    out = []
    for S1, S2 in family:
        sigmas = partial_injections(r, S1, S2)
        for q1 in A.states:
            for q2 in A.states:
                for s in sigmas:
                    out.append(SymTuple(q1, S1, s, q2, S2))
    return out


def refine(U, moves_of, trace=None):
    """Greatest fixpoint of 'every challenge has an answer inside R'.

    Rounds are computed against an immutable snapshot, so the tuples
    removed in round k are exactly those in the k-th approximant's
    complement; ``removed`` records that round per tuple.
    """
    R = set(U)
    succ = {}
    deps = defaultdict(list)
    for g in U:
        lists = [[s for _, s in opts] for _, opts in moves_of(g)]
        succ[g] = lists
        for lst in lists:
            for s in lst:
                deps[s].append(g)
    removed = {}
    dirty = list(U)
    it = 0
    while True:
        if trace is not None:
            trace(it, R)
        gone = [g for g in dirty if g in R and not all(any(s in R for s in lst) for lst in succ[g])]
        if not gone:
            break
        it += 1
        for g in gone:
            R.discard(g)
            removed[g] = it
        nxt = set()
        for g in gone:
            nxt.update(deps.get(g, ()))
        dirty = [g for g in nxt if g in R]
    return R, it, removed


def fixpoint_bisim(A, roots=None, trace_groups=False):
    """Symbolic bisimilarity over the universe (or the part of it reachable
    from ``roots``) as the limit of the indexed approximants."""
    _check_discipline(A)
    if A.kind != "RA":
        raise UsageError("fixpoint_bisim handles RA; use fresh.fresh_fixpoint for FRA")
    if A.registers > NAIVE_CAP:
        raise CapacityError("explicit universe limited to r <= %d; use game_decide" % NAIVE_CAP)
    ix = TransIndex(A)
    U = universe(A, set_family(A.registers, roots))
    chains = [] if trace_groups else None
    tracer = _GroupTracer(A.registers, chains) if trace_groups else None
    R, it, removed = refine(U, lambda g: both_sides(challenges, ix, g), tracer)
    if tracer:
        tracer.finish()
    return SymRel(R, A.registers, tuple(A.states), it, removed, chains)


class _GroupTracer:
    """Records, per (q,S), the sequence of vertex groups across rounds and
    the length of every strictly descending run with a fixed characteristic set."""

    def __init__(self, n, chains):
        self.n = n
        self.chains = chains
        self.last = {}   # (q,S) -> (X, order, run length)

    def __call__(self, it, R):
        diag = defaultdict(list)
        for g in R:
            if g.q1 == g.q2 and g.S1 == g.S2:
                diag[(g.q1, g.S1)].append(g.sigma)
        for key, sigmas in diag.items():
            cd = char_from_sigmas(self.n, sigmas)
            prev = self.last.get(key)
            if prev is None or prev[0] != cd.X:
                if prev is not None:
                    self._emit(key, prev)
                self.last[key] = (cd.X, cd.group.order, 0)
            elif cd.group.order < prev[1]:
                self.last[key] = (cd.X, cd.group.order, prev[2] + 1)

    def _emit(self, key, rec):
        self.chains.append({"state": key[0], "S": sorted(key[1]), "X": sorted(rec[0]), "length": rec[2]})

    def finish(self):
        for key, rec in self.last.items():
            self._emit(key, rec)


@dataclass
class CharData:
    X: frozenset
    group: PermGroup


def char_from_sigmas(n, sigmas):
    sigmas = list(sigmas)
    ids = [s.dom() for s in sigmas if all(v == k + 1 for k, v in enumerate(s) if v)]
    if not ids:
        raise UsageError("relation has no partial identity at this (q,S)")
    X = min(ids, key=lambda x: (len(x), sorted(x)))
    elems = set()
    for s in sigmas:
        t = s.restrict(X, X)
        if t.dom() == X:
            elems.add(t)
    return CharData(X, PermGroup(n, X, sorted(elems)))


def char_and_group(R, q, S, n=None):
    """Characteristic set of (q,S) in the closed relation R and its group."""
    tuples = R.tuples if isinstance(R, SymRel) else R
    if n is None:
        n = R.r
    S = frozenset(S)
    sig = [g.sigma for g in tuples if g.q1 == q and g.q2 == q and g.S1 == S and g.S2 == S]
    return char_from_sigmas(n, sig)


# --- closure ---------------------------------------------------------------

def compose_tuples(g, h):
    return g.__class__(g.q1, g.S1, compose(g.sigma, h.sigma), h.q2, h.S2, *g[5:])


def closure(R, states, r, pairs=None, ext=True, n=None, cls=SymTuple, extra=()):
    """Least relation containing R closed under Id, Sym, Ext and Tr.

    ``pairs`` lists the (q,S) for which identities are added (default: every
    state with every subset of [1,r]).  With ``ext=False`` the Ext rule is
    skipped, which is what the bijective phases of the FRA variant need.
    """
    n = r if n is None else n
    if pairs is None:
        pairs = [(q, S) for q in states for S in subsets(r)]
    rel = set()
    by_left = defaultdict(set)
    by_right = defaultdict(set)
    work = deque()
    inj_cache = {}

    def add(g):
        if g not in rel:
            rel.add(g)
            by_left[(g.q1, g.S1) + tuple(g[5:])].add(g)
            by_right[(g.q2, g.S2) + tuple(g[5:])].add(g)
            work.append(g)

    for g in R:
        add(g)
    for q, S in pairs:
        add(cls(q, frozenset(S), PartialPerm.identity(n, S), q, frozenset(S), *extra))
    while work:
        g = work.popleft()
        add(inverse_tuple(g))
        if ext:
            key = (g.S1, g.S2)
            if key not in inj_cache:
                inj_cache[key] = partial_injections(n, g.S1, g.S2)
            for s in inj_cache[key]:
                if g.sigma.issubset(s):
                    add(g._replace(sigma=s))
        extra = tuple(g[5:])
        for h in list(by_left.get((g.q2, g.S2) + extra, ())):
            add(compose_tuples(g, h))
        for h in list(by_right.get((g.q1, g.S1) + extra, ())):
            add(compose_tuples(h, g))
    return rel


def closure_report(R, r, ext=True, n=None):
    """Which closure laws hold for the tuple set R."""
    n = r if n is None else n
    R = set(R)
    reps = set()
    for g in R:
        reps.add((g.q1, g.S1) + tuple(g[5:]))
        reps.add((g.q2, g.S2) + tuple(g[5:]))
    has_id = all(_id_tuple(R, key, n) in R for key in reps)
    symmetric = all(inverse_tuple(g) in R for g in R)
    by_left = defaultdict(list)
    for g in R:
        by_left[(g.q1, g.S1) + tuple(g[5:])].append(g)
    transitive = all(compose_tuples(g, h) in R
                     for g in R for h in by_left.get((g.q2, g.S2) + tuple(g[5:]), ()))
    upward = True
    if ext:
        cache = {}
        for g in R:
            key = (g.S1, g.S2)
            if key not in cache:
                cache[key] = partial_injections(n, g.S1, g.S2)
            if any(g.sigma.issubset(s) and g._replace(sigma=s) not in R for s in cache[key]):
                upward = False
                break
    return {"identity": has_id, "symmetric": symmetric, "transitive": transitive, "upward": upward}


def _id_tuple(R, key, n):
    q, S = key[0], key[1]
    sample = next(iter(R))
    return sample.__class__(q, S, PartialPerm.identity(n, S), q, S, *key[2:])


def is_closed(R, r, ext=True, n=None):
    return all(closure_report(R, r, ext, n).values())


# --- games -----------------------------------------------------------------

def game_decide(A, g, depth, configs=None):
    """Depth-bounded solution of the symbolic game from g.

    When the concrete configurations behind g are supplied the Attacker's
    strategy is replayed into a concrete witness trace.
    """
    ix = TransIndex(A)
    game = Game(g, lambda p: both_sides(challenges, ix, p))
    if depth == 0:
        return GameVerdict(True, method="game", stats={"positions": len(game.graph)})
    rank = game.solve(depth)
    stats = {"positions": len(game.graph), "depth": depth}
    if g not in rank:
        return GameVerdict(True, method="game", stats=stats)
    if configs is not None:
        witness = concretize(A, game, *configs)
    else:
        witness = [(m[0], (m[1], m[3]), m[2]) for m, _ in game.line()]
    return GameVerdict(False, rank[g], witness, "game", stats)


def _pick_name(kind, ref, att, dfn, used):
    if kind == "known":
        return att.regs[ref - 1]
    if kind == "fresh-known":
        return dfn.regs[ref - 1]
    return least_unused(used)


def concretize(A, game, k1, k2):
    """Replay the principal variation of a solved symbolic game on concrete
    configurations, producing (side, label, transition) triples."""
    r = A.registers
    c1, c2 = k1, k2
    used = set(k1.names() | k2.names())
    trace = []
    while True:
        pos = query_tuple(c1, c2, r)
        bm = game.best_move(pos)
        if bm is None:
            return trace
        (side, kind, idx, ref), resp = bm
        att, dfn = (c1, c2) if side == 1 else (c2, c1)
        d = _pick_name(kind, ref, att, dfn, used)
        used.add(d)
        label = (A.transitions[idx].tag, d)
        trace.append((side, label, idx))
        t = A.transitions[idx]
        natt = Configuration(t.target, fire(t, att.regs, None, d), None)
        if resp is None:
            return trace
        j = resp[0]
        u = A.transitions[j]
        ndef = Configuration(u.target, fire(u, dfn.regs, None, d), None)
        trace.append((3 - side, label, j))
        c1, c2 = (natt, ndef) if side == 1 else (ndef, natt)


def reachable_moves(ix, g):
    """Moves of every tuple reachable from g.  The greatest fixpoint on this
    forward-closed part agrees with the full one on its members."""
    moves = {}
    todo = [g]
    while todo:
        p = todo.pop()
        if p in moves:
            continue
        moves[p] = both_sides(challenges, ix, p)
        for _, opts in moves[p]:
            todo.extend(s for _, s in opts if s not in moves)
    return moves


def check_bisim(A, k1, k2):
    """Bisimilarity of two configurations of an RA(S#0)/RA(SF)."""
    _check_discipline(A)
    if A.kind != "RA":
        raise UsageError("check_bisim handles RA; use fresh.fresh_check for FRA")
    g = query_tuple(k1, k2, A.registers)
    B = depth_bound(A)
    if A.registers > NAIVE_CAP:
        v = game_decide(A, g, B, (k1, k2))
        v.method = "game"
        return v
    ix = TransIndex(A)
    moves = reachable_moves(ix, g)
    R, it, removed = refine(list(moves), moves.__getitem__)
    stats = {"iterations": it, "tuples": len(moves), "bound": B}
    if g in R:
        return GameVerdict(True, method="symbolic", stats=stats)
    game = Game(g, lambda p: both_sides(challenges, ix, p))
    game.solve()
    witness = concretize(A, game, k1, k2)
    return GameVerdict(False, removed[g], witness, "symbolic", stats)
