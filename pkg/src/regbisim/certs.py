"""Generating-system certificates for single-assignment automata whose
registers are always filled (discipline SF).

For a closed relation over one index set S, a generating system keeps a
partition of the states, one representative per block, the representative's
characteristic set X with generators of its group, and for every state q of
the block a ray: an injection from X that relates the representative to q.
The relation is recovered as the closure of the base tuples; membership is
decided by conjugating with rays and sifting through the group.

For FRA the index set grows with the history, so a certificate is a list of
such systems, one per phase (S, h): h = |S| for the phases with at most 2r
historical names, followed by the phase h = INF over the registers.
"""

import json
import re
from dataclasses import dataclass, field

from .errors import CertificateError, UsageError
from .fresh import INF, FreshSymTuple, fchallenges, fresh_check, fresh_fixpoint, symb
from .games import GameVerdict
from .perm import (PartialPerm, bijections, compose, from_cycles, group_from_generators, group_contains,
                   invert, partial_injections, small_generating_set, to_cycles)
from .symbolic import (SymTuple, TransIndex, both_sides, challenges, char_from_sigmas, check_bisim, closure,
                       fixpoint_bisim, query_tuple)

FORMAT = 1


@dataclass
class GeneratingSystem:
    kind: str                # "RA" or "FRA"
    n: int                   # indices range over [1, n]
    S: frozenset
    h: object                # None for RA; an int or INF for FRA phases
    partitions: list         # tuples of states
    reps: list               # one representative per partition, same order
    char_sets: dict          # rep -> frozenset
    generators: dict         # rep -> [PartialPerm], permutations of the char set
    rays: dict               # state -> PartialPerm from its representative
    _groups: dict = field(default_factory=dict, repr=False, compare=False)
    _rep_of: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def phase(self):
        return (self.S, self.h)

    def rep_of(self, q):
        if not self._rep_of:
            for p, part in zip(self.reps, self.partitions):
                for x in part:
                    self._rep_of[x] = p
        return self._rep_of.get(q)

    def group(self, p):
        if p not in self._groups:
            self._groups[p] = group_from_generators(self.generators[p], self.char_sets[p], self.n)
        return self._groups[p]

    def make(self, q1, sigma, q2):
        if self.kind == "RA":
            return SymTuple(q1, self.S, sigma, q2, self.S)
        return FreshSymTuple(q1, self.S, sigma, q2, self.S, self.h)

    def base(self):
        out = []
        for p in self.reps:
            for s in self.generators[p]:
                out.append(self.make(p, s, p))
        for p, part in zip(self.reps, self.partitions):
            for q in part:
                out.append(self.make(p, self.rays[q], q))
        return out

    def num_generators(self):
        return sum(len(g) for g in self.generators.values())


def generator_bound(X):
    """Generators allowed per representative: every kept generator strictly
    enlarges a subgroup chain of Sym(X), and such chains are shorter than
    |X|(|X|-1)/2 for |X| >= 2."""
    k = len(X)
    return max(1, k * (k - 1) // 2) if k >= 2 else 0


def within_bound(G, states):
    if len(G.partitions) > len(states) or len(G.rays) > len(states):
        return False
    return all(len(G.generators[p]) <= generator_bound(G.char_sets[p]) for p in G.reps)


def _check_sf(A):
    if A.discipline != "SF":
        raise UsageError("certificates exist for discipline SF only, got %s" % A.discipline)


def _full(r):
    return frozenset(range(1, r + 1))


def phase_list(A, h0):
    """The phases a query at history size h0 can visit, in order."""
    r = A.registers
    if A.kind == "RA":
        return [(_full(r), None)]
    if h0 == INF or h0 > 2 * r:
        return [(_full(r), INF)]
    return [(frozenset(range(1, h + 1)), h) for h in range(h0, 2 * r + 1)] + [(_full(r), INF)]


# --- extraction ---------------------------------------------------------------

def extract_gensys(A, rel, phase=None):
    """A generating system whose closure is ``rel`` restricted to the phase.

    ``rel`` must be a closed relation (typically the computed bisimilarity)
    containing the whole phase it is restricted to.
    """
    _check_sf(A)
    r = A.registers
    if A.kind == "RA":
        n, S, h = r, _full(r), None
        tuples = [g for g in rel if g.S1 == S and g.S2 == S]
    else:
        if phase is None:
            raise UsageError("FRA certificates need an explicit phase (S, h)")
        n = 3 * r
        S, h = frozenset(phase[0]), phase[1]
        tuples = [g for g in rel if g.h == h and g.S1 == S and g.S2 == S]
    parent = {q: q for q in A.states}

    def find(q):
        while parent[q] != q:
            parent[q] = parent[parent[q]]
            q = parent[q]
        return q

    for g in tuples:
        a, b = find(g.q1), find(g.q2)
        if a != b:
            parent[max(a, b)] = min(a, b)
    blocks = {}
    for q in A.states:
        blocks.setdefault(find(q), []).append(q)
    partitions = sorted((tuple(sorted(b)) for b in blocks.values()), key=lambda b: b[0])
    reps = [b[0] for b in partitions]
    diag = {p: [] for p in reps}
    across = {}
    rep_of = {q: b[0] for b in partitions for q in b}
    for g in tuples:
        if g.q1 == g.q2 and g.q1 in diag:
            diag[g.q1].append(g.sigma)
        if g.q1 in diag and g.q2 != g.q1:
            best = across.get(g.q2)
            if rep_of[g.q2] == g.q1 and (best is None or tuple(g.sigma) < tuple(best)):
                across[g.q2] = g.sigma
    char_sets, generators, rays = {}, {}, {}
    everything = range(1, n + 1)
    for p, part in zip(reps, partitions):
        if not diag[p]:
            raise UsageError("relation lacks identities at %s; is it closed?" % p)
        cd = char_from_sigmas(n, diag[p])
        char_sets[p] = cd.X
        generators[p] = small_generating_set(cd.group)
        rays[p] = PartialPerm.identity(n, cd.X)
        for q in part[1:]:
            if q not in across:
                raise UsageError("relation has no tuple from %s to %s; is it closed?" % (p, q))
            ray = across[q].restrict(cd.X, everything)
            if ray.dom() != cd.X:
                raise UsageError("relation is not closed: ray to %s misses the characteristic set" % q)
            rays[q] = ray
    G = GeneratingSystem(A.kind, n, S, h, partitions, reps, char_sets, generators, rays)
    assert within_bound(G, A.states), "certificate exceeds the size bound"
    return G


def sf_relation(A, h0=None):
    """Symbolic bisimilarity on every tuple of the phases from h0 on."""
    _check_sf(A)
    r = A.registers
    if A.kind == "RA":
        S = _full(r)
        return fixpoint_bisim(A, roots=[SymTuple(A.initial, S, PartialPerm.identity(r, S), A.initial, S)]).tuples
    roots = []
    n = 3 * r
    for S, h in phase_list(A, h0 if h0 is not None else r):
        sigmas = partial_injections(n, S, S) if h == INF else bijections(n, S, S)
        for s in sigmas:
            for q1 in A.states:
                for q2 in A.states:
                    roots.append(FreshSymTuple(q1, S, s, q2, S, h))
    return fresh_fixpoint(A, roots=roots).tuples


def extract_all(A, h0=None, rel=None):
    """Certificate for every phase visited from history size h0."""
    if rel is None:
        rel = sf_relation(A, h0)
    if A.kind == "RA":
        return [extract_gensys(A, rel)]
    return [extract_gensys(A, rel, ph) for ph in phase_list(A, h0 if h0 is not None else A.registers)]


# --- membership and verification ----------------------------------------------

def gensys_contains(G, g):
    """Whether the tuple g belongs to the closure of the base of G."""
    if g.S1 != G.S or g.S2 != G.S:
        return False
    if G.kind == "FRA" and getattr(g, "h", None) != G.h:
        return False
    p = G.rep_of(g.q1)
    if p is None or p != G.rep_of(g.q2):
        return False
    X = G.char_sets[p]
    s = compose(compose(G.rays[g.q1], g.sigma), invert(G.rays[g.q2]))
    t = s.restrict(X, X)
    if t.dom() != X:
        return False
    return group_contains(G.group(p), t)


class _Membership:
    def __init__(self, systems):
        self.by_phase = {G.phase: G for G in systems}

    def __contains__(self, g):
        G = self.by_phase.get((g.S1, getattr(g, "h", None)))
        return G is not None and gensys_contains(G, g)


def check_structure(A, G):
    """Raise CertificateError when G is not a well-formed generating system."""
    if G.kind != A.kind:
        raise CertificateError("certificate is for %s, automaton is %s" % (G.kind, A.kind))
    n = A.registers if A.kind == "RA" else 3 * A.registers
    if G.n != n:
        raise CertificateError("certificate index range %d, expected %d" % (G.n, n))
    seen = [q for part in G.partitions for q in part]
    if sorted(seen) != sorted(A.states) or len(set(seen)) != len(seen):
        raise CertificateError("partitions must cover every state exactly once")
    if len(G.reps) != len(G.partitions) or any(p not in part for p, part in zip(G.reps, G.partitions)):
        raise CertificateError("every partition needs a representative inside it")
    finite = G.kind == "FRA" and G.h != INF
    for p, part in zip(G.reps, G.partitions):
        X = G.char_sets.get(p)
        if X is None or not X <= G.S:
            raise CertificateError("characteristic set of %s must be a subset of S" % p)
        if finite and X != G.S:
            raise CertificateError("characteristic set of %s must equal S in a bijective phase" % p)
        for s in G.generators.get(p, ()):
            if len(s) != n or s.dom() != X or s.rng() != X:
                raise CertificateError("generator %r of %s is not a permutation of %s" % (s, p, sorted(X)))
        if G.rays.get(p) != PartialPerm.identity(n, X):
            raise CertificateError("ray from %s to itself must be the identity" % p)
        for q in part:
            ray = G.rays.get(q)
            if ray is None or len(ray) != n or ray.dom() != X or not ray.rng() <= G.S:
                raise CertificateError("ray to %s must be an injection from %s into S" % (q, sorted(X)))


def verify_gensys(A, systems):
    """True iff every base element of every phase (and its inverse) meets
    the symbolic simulation conditions inside the generated relation."""
    _check_sf(A)
    if isinstance(systems, GeneratingSystem):
        systems = [systems]
    for G in systems:
        check_structure(A, G)
    member = _Membership(systems)
    ix = TransIndex(A)
    chal = challenges if A.kind == "RA" else fchallenges
    for G in systems:
        for b in G.base():
            for _, opts in both_sides(chal, ix, b):
                if not any(s in member for _, s in opts):
                    return False
    return True


def materialize(G, states):
    """The closure of the base of G, computed explicitly."""
    pairs = [(q, G.S) for q in states]
    if G.kind == "RA":
        return closure(G.base(), states, G.n, pairs=pairs, n=G.n)
    return closure(G.base(), states, G.n, pairs=pairs, ext=(G.h == INF), n=G.n,
                   cls=FreshSymTuple, extra=(G.h,))


# --- queries ------------------------------------------------------------------

def normalize_query(g, r):
    """Rename the left-hand historical indices so that S1 = S2."""
    if g.S1 == g.S2 or g.h == INF:
        return g
    a = sorted(k for k in g.S1 if k > r)
    b = sorted(k for k in g.S2 if k > r)
    if len(a) != len(b):
        raise UsageError("index sets of different sizes cannot be aligned")
    pi = dict(zip(a, b))
    images = [0] * len(g.sigma)
    for k, v in enumerate(g.sigma):
        if v:
            images[pi.get(k + 1, k + 1) - 1] = v
    return g._replace(S1=g.S2, sigma=PartialPerm(images))


def query_of(A, k1, k2):
    if A.kind == "RA":
        return query_tuple(k1, k2, A.registers)
    return normalize_query(symb(k1, k2, A.registers, canonical=True)[0], A.registers)


def certify(A, k1, k2, certificate=None):
    """Bisimilarity through a verified generating system.

    Without a certificate one is extracted from the computed bisimilarity.
    An external certificate that fails verification raises
    CertificateError; one that verifies but does not cover the query only
    proves nothing, so the extracted certificate decides instead.
    """
    _check_sf(A)
    g = query_of(A, k1, k2)
    h0 = getattr(g, "h", None)
    stats = {}
    if certificate is not None:
        systems = list(certificate)
        if not verify_gensys(A, systems):
            raise CertificateError("certificate does not generate a bisimulation")
        G = _Membership(systems).by_phase.get((g.S1, h0))
        if G is not None and gensys_contains(G, g):
            stats.update(_size_stats(systems), certificate="external")
            return GameVerdict(True, method="cert", stats=stats)
        stats["external_certificate"] = "does not cover the query"
    systems = extract_all(A, h0)
    if not verify_gensys(A, systems):
        raise AssertionError("extracted certificate failed verification")
    stats.update(_size_stats(systems), certificate="extracted")
    if gensys_contains(systems[0], g):
        return GameVerdict(True, method="cert", stats=stats)
    v = check_bisim(A, k1, k2) if A.kind == "RA" else fresh_check(A, k1, k2)
    return GameVerdict(False, v.attacker_depth, v.witness, "cert", stats)


def _size_stats(systems):
    return {"phases": len(systems),
            "partitions": sum(len(G.partitions) for G in systems),
            "generators": sum(G.num_generators() for G in systems),
            "rays": sum(len(G.rays) for G in systems)}


# --- JSON -----------------------------------------------------------------------

def _cycles_text(p):
    cyc = to_cycles(p)
    return "".join("(%s)" % " ".join(map(str, c)) for c in cyc) or "()"


def _phase_obj(G):
    return {"S": sorted(G.S),
            "h": None if G.h is None else ("inf" if G.h == INF else G.h),
            "partitions": [list(p) for p in G.partitions],
            "reps": list(G.reps),
            "char_sets": {p: sorted(G.char_sets[p]) for p in G.reps},
            "generators": {p: [_cycles_text(s) for s in G.generators[p]] for p in G.reps},
            "rays": {q: [list(pr) for pr in G.rays[q].pairs()] for q in sorted(G.rays)}}


def to_json(systems):
    systems = [systems] if isinstance(systems, GeneratingSystem) else list(systems)
    first = systems[0]
    obj = {"format": FORMAT, "kind": first.kind, "n": first.n}
    obj.update(_phase_obj(first))
    obj["phases"] = [_phase_obj(G) for G in systems[1:]]
    return obj


def dumps(systems):
    return json.dumps(to_json(systems), indent=1, sort_keys=True)


_CYCLE = re.compile(r"\(([^()]*)\)")


def _parse_cycles(text, n, X):
    text = text.strip()
    if _CYCLE.sub("", text).strip():
        raise CertificateError("bad cycle notation %r" % text)
    cycles = []
    for body in _CYCLE.findall(text):
        items = body.replace(",", " ").split()
        try:
            cycles.append([int(x) for x in items])
        except ValueError:
            raise CertificateError("bad cycle notation %r" % text) from None
    for c in cycles:
        if any(not 1 <= x <= n for x in c) or len(set(c)) != len(c):
            raise CertificateError("bad cycle %r" % c)
    try:
        return from_cycles(n, [c for c in cycles if c], X)
    except (UsageError, ValueError) as e:
        raise CertificateError(str(e)) from None


def _from_phase(obj, kind, n):
    try:
        S = frozenset(int(x) for x in obj["S"])
        h = obj["h"]
        h = None if h is None else (INF if h == "inf" else int(h))
        partitions = [tuple(p) for p in obj["partitions"]]
        reps = list(obj["reps"])
        char_sets = {p: frozenset(int(x) for x in X) for p, X in obj["char_sets"].items()}
        generators = {p: [_parse_cycles(c, n, char_sets.get(p, frozenset())) for c in cs]
                      for p, cs in obj["generators"].items()}
        rays = {}
        for q, pairs in obj["rays"].items():
            rays[q] = PartialPerm.from_pairs(n, [tuple(int(x) for x in pr) for pr in pairs])
    except CertificateError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CertificateError("malformed certificate: %s" % e) from None
    for p in reps:
        generators.setdefault(p, [])
    return GeneratingSystem(kind, n, S, h, partitions, reps, char_sets, generators, rays)


def from_json(obj):
    if not isinstance(obj, dict) or obj.get("format") != FORMAT:
        raise CertificateError("unsupported certificate format (expected format: %d)" % FORMAT)
    kind, n = obj.get("kind"), obj.get("n")
    if kind not in ("RA", "FRA") or not isinstance(n, int):
        raise CertificateError("certificate needs kind RA|FRA and an integer n")
    out = [_from_phase(obj, kind, n)]
    for ph in obj.get("phases", []):
        out.append(_from_phase(ph, kind, n))
    return out


def loads(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise CertificateError("certificate is not JSON: %s" % e) from None
    return from_json(obj)
