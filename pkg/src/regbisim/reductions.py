"""Finite-state reduction of FRA bisimilarity, finite LTS bisimilarity,
forcing gadgets and the TQBF instance generator.

The reduction works over a finite letter set N of 2r+2 letters.  A state of
the finite system carries both N-configurations of the simulated game
position together with a potted history, so one round of the register
game becomes up to four rounds of the finite game: a side choice, the
Attacker's labelled move, and a Defender-forcing gadget in which the
Defender names its answer (transition, letter, new potted history).
"""

import itertools
import re
from collections import deque
from dataclasses import dataclass

from .automata import Automaton, Configuration, Transition, fire
from .errors import UsageError

HEART = "heart"


# --- N-representations and pottings ------------------------------------------

@dataclass
class NRepresentation:
    r: int
    letters: tuple
    mapping: dict          # name -> letter, for every name of H and the registers
    outside: dict          # sample names outside H -> letter, covering the rest of N

    def __call__(self, d):
        if d in self.mapping:
            return self.mapping[d]
        if d in self.outside:
            return self.outside[d]
        rest = sorted(set(self.letters) - set(self.mapping.values()))
        return rest[0]

    def act_regs(self, regs):
        return tuple(None if d is None else self(d) for d in regs)

    def act_history(self, H):
        return frozenset(self(d) for d in H)

    def domain_sample(self):
        return set(self.mapping) | set(self.outside)


def n_representation(rho1, rho2, H, r):
    """A surjection of names onto N = {0..2r+1}: injective on register names,
    one shared letter for the other historical names, and the remaining
    letters for names outside the history."""
    H = frozenset(H)
    regs = [d for d in tuple(rho1) + tuple(rho2) if d is not None]
    if not set(regs) <= H:
        raise UsageError("register names must belong to the history")
    letters = tuple(range(2 * r + 2))
    mapping = {}
    for d in regs:
        if d not in mapping:
            mapping[d] = len(mapping)
    extra = sorted(H - set(mapping))
    if extra:
        hist_letter = len(set(mapping.values()))
        for d in extra:
            mapping[d] = hist_letter
    used = set(mapping.values())
    rest = [a for a in letters if a not in used]
    outside = {}
    name = 0
    for a in rest:
        while name in H:
            name += 1
        outside[name] = a
        name += 1
    return NRepresentation(r, letters, mapping, outside)


def is_representation(phi, X1, X2, sample=None):
    """Check surjectivity, (R1) and (R2) of phi on a finite sample of names."""
    X1, X2 = set(X1), set(X2)
    dom = set(sample) if sample is not None else phi.domain_sample()
    dom |= X1 | X2
    if {phi(d) for d in dom} != set(phi.letters):
        return False
    if len({phi(d) for d in X1}) != len(X1):
        return False
    for X in (X1, X2):
        img = {phi(d) for d in X}
        if any(phi(a) in img and a not in X for a in dom):
            return False
    return True


def pottings(H_next, X, r):
    """Every Ĥ ⊆ N containing X with |Ĥ| = min(|H_next|, 2r+1)."""
    N = range(2 * r + 2)
    X = frozenset(X)
    size = min(len(H_next), 2 * r + 1)
    if len(X) > size:
        return []
    rest = [a for a in N if a not in X]
    out = [X | frozenset(c) for c in itertools.combinations(rest, size - len(X))]
    return sorted(out, key=lambda s: sorted(s))


# --- the finite game ---------------------------------------------------------

@dataclass
class FiniteLTS:
    states: list
    index: dict
    out: list        # per state: list of (label id, successor id)
    labels: list

    def num_transitions(self):
        return sum(len(o) for o in self.out)


def label_text(lab):
    if isinstance(lab, str):
        return lab
    if lab[0] == "T":
        return "(%d,%d)" % (lab[1], lab[2])
    return "(%d,%d,{%s})" % (lab[1], lab[2], ",".join(map(str, sorted(lab[3]))))


class _FiniteGame:
    def __init__(self, A):
        self.A = A
        self.r = A.registers
        self.N = range(2 * A.registers + 2)

    def moves(self, q, regs, H):
        out = []
        for idx, t in self.A.out(q):
            for a in self.N:
                new = fire(t, regs, H, a)
                if new is not None:
                    out.append((idx, a, (t.target, new)))
        return out

    def choices(self, q, regs, H, a, tag, other):
        """Defender answers (T, a, Ĥ) from (q, regs) on (tag, a), given the
        other side's (already updated) registers."""
        out = []
        H_next = H | {a}
        for idx, t in self.A.out(q):
            if t.tag != tag:
                continue
            new = fire(t, regs, H, a)
            if new is None:
                continue
            X = frozenset(d for d in new + other if d is not None)
            for Hh in pottings(H_next, X, self.r):
                out.append(((idx, a, Hh), (t.target, new)))
        return out

    def succ(self, st):
        side, g1, H, g2, tok = st
        kind = tok[0]
        if kind == "A":
            return [("L", (side, g1, H, g2, ("AL",))), ("R", (side, g1, H, g2, ("AR",)))]
        if kind == "AL":
            return [(("T", idx, a), (side, g1n, H, g2, ("DR", a, self.A.transitions[idx].tag)))
                    for idx, a, g1n in self.moves(g1[0], g1[1], H)]
        if kind == "AR":
            return [(("T", idx, a), (side, g1, H, g2n, ("DL", a, self.A.transitions[idx].tag)))
                    for idx, a, g2n in self.moves(g2[0], g2[1], H)]
        if kind == "DR":
            ch = self.choices(g2[0], g2[1], H, tok[1], tok[2], g1[1])
            out = [(HEART, ("R", g1, H, g2, ("DRt", tau))) for tau, _ in ch]
            if side == "L":
                if not ch:
                    return [(HEART, st)]
                out.insert(0, (HEART, ("L", g1, H, g2, ("FR",) + tok[1:])))
            return out
        if kind == "DL":
            ch = self.choices(g1[0], g1[1], H, tok[1], tok[2], g2[1])
            out = [(HEART, ("L", g1, H, g2, ("DLt", tau))) for tau, _ in ch]
            if side == "R":
                if not ch:
                    return [(HEART, st)]
                out.insert(0, (HEART, ("R", g1, H, g2, ("FL",) + tok[1:])))
            return out
        if kind == "FR":
            return [(("tau",) + tau, ("L", g1, tau[2], g2k, ("A",)))
                    for tau, g2k in self.choices(g2[0], g2[1], H, tok[1], tok[2], g1[1])]
        if kind == "FL":
            return [(("tau",) + tau, ("R", g1k, tau[2], g2, ("A",)))
                    for tau, g1k in self.choices(g1[0], g1[1], H, tok[1], tok[2], g2[1])]
        if kind == "DRt":
            mine = tok[1]
            a = mine[1]
            tag = self.A.transitions[mine[0]].tag
            return [(("tau",) + tau, ("R" if tau == mine else "L", g1, tau[2], g2k, ("A",)))
                    for tau, g2k in self.choices(g2[0], g2[1], H, a, tag, g1[1])]
        if kind == "DLt":
            mine = tok[1]
            a = mine[1]
            tag = self.A.transitions[mine[0]].tag
            return [(("tau",) + tau, ("L" if tau == mine else "R", g1k, tau[2], g2, ("A",)))
                    for tau, g1k in self.choices(g1[0], g1[1], H, a, tag, g2[1])]
        raise ValueError("unknown token %r" % (tok,))


def build_finite_game(A, k1, k2, max_states=None):
    """The reachable fragment of the finite system from the two start states
    (L, g1, H, g2, A) and (R, g1, H, g2, A); start_L is state 0 and start_R
    is state 1."""
    if A.kind != "FRA":
        raise UsageError("build_finite_game expects an FRA (embed an RA first)")
    if k1.history is None or k1.history != k2.history:
        raise UsageError("configurations must share the same history")
    phi = n_representation(k1.regs, k2.regs, k1.history, A.registers)
    g1 = (k1.state, phi.act_regs(k1.regs))
    g2 = (k2.state, phi.act_regs(k2.regs))
    H = phi.act_history(k1.history)
    game = _FiniteGame(A)
    starts = [("L", g1, H, g2, ("A",)), ("R", g1, H, g2, ("A",))]
    index = {}
    states = []
    out = []
    labels = []
    lab_index = {}
    queue = deque()
    for s in starts:
        index[s] = len(states)
        states.append(s)
        out.append(None)
        queue.append(s)
    while queue:
        s = queue.popleft()
        edges = []
        for lab, t in game.succ(s):
            if t not in index:
                index[t] = len(states)
                states.append(t)
                out.append(None)
                queue.append(t)
                if max_states is not None and len(states) > max_states:
                    from .errors import CapacityError
                    raise CapacityError("finite game exceeds %d states" % max_states)
            if lab not in lab_index:
                lab_index[lab] = len(labels)
                labels.append(lab)
            edges.append((lab_index[lab], index[t]))
        out[index[s]] = edges
    return FiniteLTS(states, index, out, labels), 0, 1


def refine(L):
    """Signature-based partition refinement.  Returns the final block of every
    state and, per round, the block array (round k = k-step bisimilarity)."""
    n = len(L.states)
    block = [0] * n
    rounds = [block]
    count = 1
    while True:
        sigs = {}
        new = [0] * n
        for s in range(n):
            sig = (block[s], frozenset((lab, block[t]) for lab, t in L.out[s]))
            new[s] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == count:
            return block, rounds
        count = len(sigs)
        block = new
        rounds.append(block)


def fsa_bisim(L, s1, s2):
    block, _ = refine(L)
    return block[s1] == block[s2]


def split_depth(L, s1, s2):
    """Least k such that s1 and s2 are not k-step bisimilar (None if bisimilar)."""
    _, rounds = refine(L)
    for k, block in enumerate(rounds):
        if block[s1] != block[s2]:
            return k
    return None


def naive_bisim(L):
    """Greatest fixpoint over state pairs; quadratic, for testing only."""
    n = len(L.states)
    rel = {(a, b) for a in range(n) for b in range(n)}
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            ok = all(any(l2 == l1 and (t1, t2) in rel for l2, t2 in L.out[b]) for l1, t1 in L.out[a]) and \
                all(any(l1 == l2 and (t1, t2) in rel for l1, t1 in L.out[a]) for l2, t2 in L.out[b])
            if not ok:
                rel.discard((a, b))
                changed = True
    return rel


# --- on-the-fly solution with letter symmetry ----------------------------------
#
# Any permutation of N is an automorphism of the finite system once it is
# applied to the letters inside labels as well, so a pair of states and its
# image under a permutation are either both bisimilar or both not.  The
# bisimulation game between two states can therefore be explored on pairs
# taken modulo letter permutations, which is far smaller than the full
# reachable fragment.

def _state_letters(st):
    side, g1, H, g2, tok = st
    seq = [d for d in g1[1] + g2[1] if d is not None]
    sets = [H]
    if len(tok) > 1:
        if tok[0] in ("DRt", "DLt"):
            seq.append(tok[1][1])
            sets.append(tok[1][2])
        else:
            seq.append(tok[1])
    return seq, sets


def _rename_state(st, m):
    side, g1, H, g2, tok = st
    f = lambda regs: tuple(None if d is None else m[d] for d in regs)
    if len(tok) > 1:
        if tok[0] in ("DRt", "DLt"):
            T, a, Hh = tok[1]
            tok = (tok[0], (T, m[a], frozenset(m[d] for d in Hh)))
        else:
            tok = (tok[0], m[tok[1]]) + tok[2:]
    return (side, (g1[0], f(g1[1])), frozenset(m[d] for d in H), (g2[0], f(g2[1])), tok)


def canon_pair(x, y, letters):
    """Representative of the pair (x, y) modulo permutations of N."""
    sx, setx = _state_letters(x)
    sy, sety = _state_letters(y)
    m = {}
    for d in sx + sy:
        if d not in m:
            m[d] = len(m)
    sets = setx + sety
    rest = [d for d in letters if d not in m]
    rest.sort(key=lambda d: tuple(0 if d in S else 1 for S in sets))
    for d in rest:
        m[d] = len(m)
    return (_rename_state(x, m), _rename_state(y, m)), m


def finite_game_decide(A, k1, k2, depth=None):
    """Bisimulation game between the two start states of the finite system,
    solved on the fly modulo letter symmetry.  The Attacker depth is
    counted in rounds of the finite game."""
    from .games import Game, GameVerdict
    if A.kind == "RA":
        from .automata import embed_ra_in_fra
        A, k1, k2 = embed_ra_in_fra(A, k1, k2)
    if k1.history is None or k1.history != k2.history:
        raise UsageError("configurations must share the same history")
    phi = n_representation(k1.regs, k2.regs, k1.history, A.registers)
    g1 = (k1.state, phi.act_regs(k1.regs))
    g2 = (k2.state, phi.act_regs(k2.regs))
    H = phi.act_history(k1.history)
    game = _FiniteGame(A)
    letters = list(game.N)
    cache = {}

    def succ(st):
        if st not in cache:
            cache[st] = game.succ(st)
        return cache[st]

    pairs = {}

    def cp(x, y):
        key = (x, y)
        if key not in pairs:
            pairs[key] = canon_pair(x, y, letters)[0]
        return pairs[key]

    def moves(pos):
        x, y = pos
        if x == y:
            return []
        sx, sy = succ(x), succ(y)
        out = []
        for lab, x2 in sx:
            out.append(((1, lab), [(lab, cp(x2, y2)) for l2, y2 in sy if l2 == lab]))
        for lab, y2 in sy:
            out.append(((2, lab), [(lab, cp(x2, y2)) for l2, x2 in sx if l2 == lab]))
        return out

    root, _ = canon_pair(("L", g1, H, g2, ("A",)), ("R", g1, H, g2, ("A",)), letters)
    G = Game(root, moves)
    rank = G.solve(depth)
    stats = {"pair_positions": len(G.graph), "states_expanded": len(cache)}
    if root not in rank:
        return GameVerdict(True, method="finite", stats=stats)
    line = []
    for (side, lab), resp in G.line():
        line.append((side, label_text(lab), None))
        if resp is not None:
            line.append((3 - side, label_text(lab), None))
    return GameVerdict(False, rank[root], line, "finite", stats)


def finite_check(A, k1, k2, materialize_limit=None):
    """Bisimilarity through the finite reduction, for any discipline.

    With ``materialize_limit`` set, the reachable fragment is built and
    decided by partition refinement when it has at most that many states;
    otherwise (or when it is larger) the symmetric on-the-fly game is used.
    """
    from .games import GameVerdict
    from .errors import CapacityError
    if A.kind == "RA":
        from .automata import embed_ra_in_fra
        A, k1, k2 = embed_ra_in_fra(A, k1, k2)
    if materialize_limit:
        try:
            L, s1, s2 = build_finite_game(A, k1, k2, max_states=materialize_limit)
        except CapacityError:
            pass
        else:
            depth = split_depth(L, s1, s2)
            stats = {"states": len(L.states), "transitions": L.num_transitions(),
                     "algorithm": "partition refinement"}
            return GameVerdict(depth is None, depth, None, "finite", stats)
    v = finite_game_decide(A, k1, k2)
    v.stats["algorithm"] = "symmetric game"
    return v


def to_aut(L):
    lines = ["des (0, %d, %d)" % (L.num_transitions(), len(L.states))]
    for s, edges in enumerate(L.out):
        for lab, t in edges:
            lines.append('(%d, "%s", %d)' % (s, label_text(L.labels[lab]), t))
    return "\n".join(lines) + "\n"


# --- forcing gadgets ---------------------------------------------------------

def forcing_gadget(kind, left, right, targets, prefix, tag="f", choice_tags=None):
    """Transitions (and fresh internal states) of a forcing circuit.

    ``targets`` is a list of (left target, right target) pairs.  In the
    Defender kind the Defender selects which pair the game continues from;
    with no targets the left anchor gets a self-loop the right anchor cannot
    answer.  In the Attacker kind the Attacker selects the pair.  All labels
    read register 1, which must hold the same name on both sides.
    """
    n = len(targets)
    tags = list(choice_tags) if choice_tags is not None else ["c%d" % (k + 1) for k in range(n)]

    def rd(src, t, dst):
        return Transition(src, t, frozenset((1,)), 1, frozenset(), dst)

    states = []
    trans = []
    if kind == "attacker":
        for k, (tl, tr) in enumerate(targets):
            trans.append(rd(left, tags[k], tl))
            trans.append(rd(right, tags[k], tr))
        return states, trans
    if kind != "defender":
        raise UsageError("gadget kind must be 'defender' or 'attacker'")
    if n == 0:
        return states, [rd(left, tag, left)]
    p0 = "%s.0" % prefix
    pc = ["%s.c%d" % (prefix, k + 1) for k in range(n)]
    states = [p0] + pc
    trans.append(rd(left, tag, p0))
    for k in range(n):
        trans.append(rd(left, tag, pc[k]))
        trans.append(rd(right, tag, pc[k]))
    for k, (tl, tr) in enumerate(targets):
        trans.append(rd(p0, tags[k], tl))
    for k in range(n):
        for m, (tl, tr) in enumerate(targets):
            trans.append(rd(pc[k], tags[m], tr if m == k else tl))
    return states, trans


# --- TQBF ---------------------------------------------------------------------

@dataclass(frozen=True)
class QBF:
    prefix: tuple   # ((quantifier, variable index), ...), quantifier in {"forall", "exists"}
    clauses: tuple  # tuple of tuples of nonzero ints, -k meaning "not x_k"

    def __post_init__(self):
        vars_ = [v for _, v in self.prefix]
        if len(set(vars_)) != len(vars_):
            raise UsageError("variable quantified twice")
        for q, _ in self.prefix:
            if q not in ("forall", "exists"):
                raise UsageError("unknown quantifier %r" % q)
        for c in self.clauses:
            for lit in c:
                if not isinstance(lit, int) or lit == 0 or abs(lit) not in vars_:
                    raise UsageError("literal %r uses an unquantified variable" % (lit,))

    def __str__(self):
        pre = " ".join("%s x%d" % qv for qv in self.prefix)
        mat = " & ".join("(" + " | ".join(("!x%d" % -l) if l < 0 else "x%d" % l for l in c) + ")"
                         for c in self.clauses)
        return "%s : %s" % (pre, mat)


def parse_qbf(text):
    """Parse "forall x1 exists x2 : (x1 | !x2) & (x2)"."""
    if ":" not in text:
        raise UsageError("QBF needs a ':' between prefix and matrix")
    pre, mat = text.split(":", 1)
    toks = pre.split()
    if len(toks) % 2:
        raise UsageError("malformed quantifier prefix")
    prefix = []
    names = {}
    for q, v in zip(toks[::2], toks[1::2]):
        if v in names:
            raise UsageError("variable %s quantified twice" % v)
        names[v] = len(names) + 1
        prefix.append((q, names[v]))
    clauses = []
    mat = mat.strip()
    if mat:
        for part in mat.split("&"):
            part = part.strip()
            m = re.fullmatch(r"\((.*)\)", part)
            if not m:
                raise UsageError("clause %r is not a parenthesised disjunction (CNF required)" % part)
            body = m.group(1).strip()
            lits = []
            if body:
                for lit in body.split("|"):
                    lit = lit.strip()
                    neg = lit.startswith("!")
                    v = lit[1:].strip() if neg else lit
                    if v not in names:
                        raise UsageError("unquantified variable %r" % v)
                    lits.append(-names[v] if neg else names[v])
            clauses.append(tuple(lits))
    return QBF(tuple(prefix), tuple(clauses))


def evaluate(phi):
    def rec(k, val):
        if k == len(phi.prefix):
            return all(any(val[abs(l)] == (l > 0) for l in c) for c in phi.clauses)
        q, v = phi.prefix[k]
        res = (rec(k + 1, {**val, v: b}) for b in (True, False))
        return all(res) if q == "forall" else any(res)
    return rec(0, {})


def tqbf_instance(phi):
    """An RA(S#0) and two configurations that are bisimilar iff phi is true.

    Register 1 is filled first and read by every gadget label; variable x_i
    is recorded by filling register 2i (true) or 2i+1 (false).  Universal
    variables and the conjunction use Attacker forcing, existential
    variables and each disjunction use Defender forcing.  At a literal only
    the left copy can move, and only when the literal is false.
    """
    if not isinstance(phi, QBF):
        raise UsageError("tqbf_instance expects a QBF")
    h = len(phi.prefix)
    r = 2 * h + 1
    states = []
    trans = []

    def both(name):
        states.extend([name + ".L", name + ".R"])
        return name + ".L", name + ".R"

    init = both("init")
    heads = [both("x%d" % v) for _, v in phi.prefix]
    mat = both("mat")
    nxt = heads[0] if heads else mat
    for s in (0, 1):
        trans.append(Transition(init[s], "init", frozenset(), 1, frozenset(), nxt[s]))
    for k, (q, v) in enumerate(phi.prefix):
        tt = both("x%dT" % v)
        ff = both("x%dF" % v)
        kind = "attacker" if q == "forall" else "defender"
        st, tr = forcing_gadget(kind, heads[k][0], heads[k][1], [tt, ff], "g%d" % v)
        states.extend(st)
        trans.extend(tr)
        after = heads[k + 1] if k + 1 < h else mat
        for s in (0, 1):
            trans.append(Transition(tt[s], "v", frozenset(), 2 * v, frozenset(), after[s]))
            trans.append(Transition(ff[s], "v", frozenset(), 2 * v + 1, frozenset(), after[s]))
    clause_heads = [both("cl%d" % (c + 1)) for c in range(len(phi.clauses))]
    st, tr = forcing_gadget("attacker", mat[0], mat[1], clause_heads, "m")
    states.extend(st)
    trans.extend(tr)
    for c, lits in enumerate(phi.clauses):
        lit_states = [both("cl%d.l%d" % (c + 1, m + 1)) for m in range(len(lits))]
        st, tr = forcing_gadget("defender", clause_heads[c][0], clause_heads[c][1], lit_states,
                                "d%d" % (c + 1))
        states.extend(st)
        trans.extend(tr)
        for lit, (sl, _) in zip(lits, lit_states):
            v = abs(lit)
            reg = 2 * v + 1 if lit > 0 else 2 * v
            trans.append(Transition(sl, "e", frozenset((reg,)), reg, frozenset(), sl))
    width = max([2, len(phi.clauses)] + [len(c) for c in phi.clauses])
    tags = ("init", "f", "v", "e") + tuple("c%d" % (k + 1) for k in range(width))
    A = Automaton("RA", "S#0", r, tuple(states), init[0], (None,) * r, tuple(trans),
                  frozenset(), tags, "tqbf")
    empty = (None,) * r
    return A, Configuration(init[0], empty), Configuration(init[1], empty)
