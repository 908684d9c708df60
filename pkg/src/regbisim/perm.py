"""Partial permutations on [1,n] and permutation groups via Schreier-Sims.

A PartialPerm is a tuple of length n whose entry k-1 is the image of k,
or 0 when k is outside the domain.  Being a tuple it is immutable and
hashable, so relations can be stored as plain Python sets.
"""

from collections import deque
from itertools import combinations

from .errors import CapacityError, UsageError


class PartialPerm(tuple):
    __slots__ = ()

    def __new__(cls, images):
        images = tuple(images)
        n = len(images)
        seen = set()
        for v in images:
            if not isinstance(v, int) or v < 0 or v > n:
                raise UsageError("image %r out of range [0,%d]" % (v, n))
            if v:
                if v in seen:
                    raise UsageError("not injective: %d hit twice" % v)
                seen.add(v)
        return tuple.__new__(cls, images)

    @classmethod
    def from_pairs(cls, n, pairs):
        images = [0] * n
        for i, j in pairs:
            if not (1 <= i <= n and 1 <= j <= n):
                raise UsageError("pair (%d,%d) outside [1,%d]" % (i, j, n))
            if images[i - 1] and images[i - 1] != j:
                raise UsageError("index %d mapped twice" % i)
            images[i - 1] = j
        return cls(images)

    @classmethod
    def identity(cls, n, X=None):
        if X is None:
            X = range(1, n + 1)
        images = [0] * n
        for i in X:
            images[i - 1] = i
        return _pp(images)

    @classmethod
    def empty(cls, n):
        return _pp((0,) * n)

    @property
    def n(self):
        return len(self)

    def __call__(self, i):
        """Image of i, or None when i is not in the domain."""
        v = self[i - 1]
        return v or None

    def dom(self):
        return frozenset(k + 1 for k, v in enumerate(self) if v)

    def rng(self):
        return frozenset(v for v in self if v)

    def pairs(self):
        return [(k + 1, v) for k, v in enumerate(self) if v]

    def size(self):
        return sum(1 for v in self if v)

    def __repr__(self):
        return "{" + ",".join("(%d,%d)" % p for p in self.pairs()) + "}"

    def compose(self, other):
        return compose(self, other)

    def inverse(self):
        return invert(self)

    def update(self, i, j):
        return update(self, i, j)

    def restrict(self, A, B):
        """sigma intersected with A x B."""
        return _pp(v if (k + 1 in A and v in B) else 0 for k, v in enumerate(self))

    def issubset(self, other):
        return all(v == 0 or other[k] == v for k, v in enumerate(self))


def _pp(images):
    # trusted constructor used on hot paths, skips the injectivity check
    return tuple.__new__(PartialPerm, tuple(images))


def _check_same(s, t):
    if len(s) != len(t):
        raise UsageError("domain sizes differ: %d vs %d" % (len(s), len(t)))


def compose(s, t):
    """Diagrammatic composition s;t (first s, then t)."""
    _check_same(s, t)
    return _pp(t[v - 1] if v else 0 for v in s)


def invert(s):
    images = [0] * len(s)
    for k, v in enumerate(s):
        if v:
            images[v - 1] = k + 1
    return _pp(images)


def update(s, i, j):
    """s[i -> j]: map i to j and drop whatever previously hit j."""
    n = len(s)
    if not (1 <= i <= n and 1 <= j <= n):
        raise UsageError("update index out of range [1,%d]" % n)
    images = [0 if v == j else v for v in s]
    images[i - 1] = j
    return _pp(images)


def swap(i, ip, k):
    if k == i:
        return ip
    if k == ip:
        return i
    return k


def transpose_action(i, ip, x, side="left"):
    """Act with the transposition (i ip).

    For a set returns (i ip).S.  For a PartialPerm, side="left" gives
    (i ip);x and side="right" gives x;(i ip).
    """
    if isinstance(x, PartialPerm):
        n = len(x)
        if not (1 <= i <= n and 1 <= ip <= n):
            raise UsageError("transposition index out of range")
        if i == ip:
            return x
        images = list(x)
        if side == "left":
            images[i - 1], images[ip - 1] = images[ip - 1], images[i - 1]
        elif side == "right":
            images = [swap(i, ip, v) if v else 0 for v in images]
        else:
            raise UsageError("side must be 'left' or 'right'")
        return _pp(images)
    return frozenset(swap(i, ip, k) for k in x)


def extends(s, sp, S1, S2):
    """True iff s is contained in sp and sp lies inside S1 x S2."""
    if not s.issubset(sp):
        return False
    return all(v == 0 or (k + 1 in S1 and v in S2) for k, v in enumerate(sp))


def partial_injections(n, S1, S2):
    """All partial injections contained in S1 x S2, as PartialPerms on [1,n]."""
    S1 = sorted(S1)
    S2 = sorted(S2)
    out = []

    def rec(idx, images, used):
        if idx == len(S1):
            out.append(_pp(images))
            return
        i = S1[idx]
        rec(idx + 1, images, used)
        for j in S2:
            if j not in used:
                images[i - 1] = j
                used.add(j)
                rec(idx + 1, images, used)
                used.discard(j)
                images[i - 1] = 0

    rec(0, [0] * n, set())
    return out


def bijections(n, S1, S2):
    """All bijections S1 -> S2 as PartialPerms on [1,n]."""
    k = len(S1)
    if k != len(S2):
        return []
    return [s for s in partial_injections(n, S1, S2) if s.size() == k]


def from_cycles(n, cycles, X=None):
    """Build a permutation of X (default [1,n]) from a list of cycles."""
    if X is None:
        X = range(1, n + 1)
    images = [0] * n
    for i in X:
        images[i - 1] = i
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if images[a - 1] != a and len(cyc) > 1 and images[a - 1] != b:
                raise UsageError("cycles overlap at %d" % a)
            images[a - 1] = b
    return PartialPerm(images)


def to_cycles(p):
    seen = set()
    cycles = []
    for k, v in enumerate(p):
        start = k + 1
        if not v or start in seen or v == start:
            continue
        cyc = [start]
        seen.add(start)
        x = v
        while x != start:
            cyc.append(x)
            seen.add(x)
            x = p[x - 1]
        cycles.append(cyc)
    return cycles


# --- permutation groups ---------------------------------------------------
#
# Internally a permutation of X is kept as a full tuple over [1,n] that is
# the identity outside X, so composition and sifting need no domain checks.

def _full(p, X):
    return tuple(p[k] if (k + 1) in X else k + 1 for k in range(len(p)))


def _mul(a, b):
    return tuple(b[v - 1] for v in a)


def _inv(a):
    out = [0] * len(a)
    for k, v in enumerate(a):
        out[v - 1] = k + 1
    return tuple(out)


def _is_id(a):
    return all(v == k + 1 for k, v in enumerate(a))


def _first_moved(a):
    for k, v in enumerate(a):
        if v != k + 1:
            return k + 1
    return None


def _orbit_transversal(point, gens, n):
    ident = tuple(range(1, n + 1))
    trans = {point: ident}
    queue = deque([point])
    while queue:
        x = queue.popleft()
        u = trans[x]
        for g in gens:
            y = g[x - 1]
            if y not in trans:
                trans[y] = _mul(u, g)
                queue.append(y)
    return trans


class PermGroup:
    """A permutation group on X given by a base and strong generating set."""

    def __init__(self, n, base_set, gens):
        self.n = n
        self.base_set = frozenset(base_set)
        self.generators = [g for g in gens]
        self.base = []
        self.levels = []  # per base point: (strong gens fixing earlier points, transversal)
        self._build([_full(g, self.base_set) for g in gens])
        self.order = 1
        for _, trans in self.levels:
            self.order *= len(trans)

    def _build(self, gens):
        n = self.n
        gens = [g for g in gens if not _is_id(g)]
        base = []
        for g in gens:
            if all(g[b - 1] == b for b in base):
                base.append(_first_moved(g))
        S = [[g for g in gens if all(g[b - 1] == b for b in base[:k])] for k in range(len(base))]
        trans = [_orbit_transversal(base[k], S[k], n) for k in range(len(base))]
        k = len(base) - 1
        while k >= 0:
            restart = False
            for x in list(trans[k]):
                u = trans[k][x]
                for g in S[k]:
                    y = g[x - 1]
                    s = _mul(_mul(u, g), _inv(trans[k][y]))
                    h, j = self._strip(s, base, trans, k + 1)
                    if j < len(base) or not _is_id(h):
                        if j == len(base):
                            base.append(_first_moved(h))
                            S.append([])
                            trans.append(None)
                        for m in range(k + 1, j + 1):
                            S[m].append(h)
                            trans[m] = _orbit_transversal(base[m], S[m], n)
                        k = j
                        restart = True
                        break
                if restart:
                    break
            if not restart:
                k -= 1
        self.base = base
        self.levels = list(zip(S, trans))

    @staticmethod
    def _strip(g, base, trans, start=0):
        for m in range(start, len(base)):
            x = g[base[m] - 1]
            t = trans[m]
            if x not in t:
                return g, m
            g = _mul(g, _inv(t[x]))
        return g, len(base)

    def strong_generators(self):
        seen = []
        for gens, _ in self.levels:
            for g in gens:
                if g not in seen:
                    seen.append(g)
        return [_to_pp(g, self.base_set) for g in seen]

    def contains(self, p):
        return group_contains(self, p)

    def __repr__(self):
        return "PermGroup(X=%s, order=%d)" % (sorted(self.base_set), self.order)


def _to_pp(a, X):
    return _pp(a[k] if (k + 1) in X else 0 for k in range(len(a)))


def _check_perm_of(p, X, n):
    if len(p) != n:
        raise UsageError("permutation has domain size %d, expected %d" % (len(p), n))
    if p.dom() != X or p.rng() != X:
        raise UsageError("%r is not a bijection on %s" % (p, sorted(X)))


def group_from_generators(gens, X=None, n=None):
    """Build the group generated by gens, each a bijection on X."""
    gens = list(gens)
    if n is None:
        if not gens:
            raise UsageError("n is required when there are no generators")
        n = len(gens[0])
    if X is None:
        X = gens[0].dom() if gens else frozenset()
    X = frozenset(X)
    for g in gens:
        _check_perm_of(g, X, n)
    return PermGroup(n, X, gens)


def group_contains(G, p):
    _check_perm_of(p, G.base_set, G.n)
    trans = [t for _, t in G.levels]
    h, j = PermGroup._strip(_full(p, G.base_set), G.base, trans)
    return j == len(G.base) and _is_id(h)


def small_generating_set(G, pair_search_limit=120, max_pairs=5000):
    """A short generating list for G.

    Greedily keeps strong generators that enlarge the group generated so
    far; every kept element strictly grows a subgroup chain, so the count is
    bounded by the longest chain in Sym(X).  Small groups are then reduced
    to two generators when a pair suffices.
    """
    X = G.base_set
    kept = []
    cur = PermGroup(G.n, X, [])
    for g in G.strong_generators():
        if not group_contains(cur, g):
            kept.append(g)
            cur = PermGroup(G.n, X, kept)
            if cur.order == G.order:
                break
    if len(kept) > 2 and G.order <= pair_search_limit:
        elems = sorted(naive_closure(kept, X, G.n))
        for tries, (a, b) in enumerate(combinations(elems, 2)):
            if tries >= max_pairs:
                break
            if PermGroup(G.n, X, [a, b]).order == G.order:
                return [a, b]
    return kept


def naive_closure(gens, X, n, limit=10080):
    """All elements of the group generated by gens, by breadth-first search."""
    X = frozenset(X)
    ident = PartialPerm.identity(n, X)
    seen = {ident}
    queue = deque([ident])
    gens = list(gens)
    while queue:
        a = queue.popleft()
        for g in gens:
            b = compose(a, g)
            if b not in seen:
                seen.add(b)
                if len(seen) > limit:
                    raise CapacityError("group order exceeds %d" % limit)
                queue.append(b)
    return seen
