"""Language equivalence of deterministic RA(S#0) through bisimilarity.

Both automata are merged into one automaton over r = max(r1, r2)
registers.  Every missing move of an original state is sent to a sink
that accepts everything, and final states get extra moves on the reserved
tag t_F into a dead state.  The two initial configurations are then
bisimilar iff the languages agree, and an Attacker win must end with a
t_F move, whose prefix is a word accepted by exactly one automaton.
"""

from dataclasses import dataclass

from .automata import RESERVED_TAG, Automaton, Configuration, known, local_fresh
from .errors import UsageError
from .symbolic import check_bisim, depth_bound

SINK = "_qs"
DEAD = "_q0"


@dataclass
class WordWitness:
    word: list           # [(tag, name)]
    accepted_by: str     # "A1" or "A2"

    def to_json(self):
        return {"word": [[t, d] for t, d in self.word], "accepted_by": self.accepted_by}


@dataclass
class LangVerdict:
    equivalent: bool
    witness: WordWitness = None
    stats: dict = None

    def to_json(self):
        out = {"verdict": "equivalent" if self.equivalent else "not equivalent",
               "equivalent": self.equivalent, "method": "langequiv"}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        out.update(self.stats or {})
        return out


def _check_input(A):
    if A.kind != "RA" or A.discipline not in ("S#0", "SF"):
        raise UsageError("language equivalence needs RA(S#0) (or RA(SF)), got %s(%s)" % (A.kind, A.discipline))
    if RESERVED_TAG in A.tags:
        raise UsageError("tag %s is reserved" % RESERVED_TAG)


def is_deterministic(A):
    """At most one transition per (state, tag, register read) and at most
    one locally fresh transition per (state, tag)."""
    seen = set()
    for t in A.transitions:
        if t.is_known:
            key = (t.source, t.tag, "known", t.write)
        elif t.is_local_fresh:
            key = (t.source, t.tag, "fresh")
        else:
            return False
        if key in seen:
            return False
        seen.add(key)
    return True


def _pad(regs, r):
    return tuple(regs) + (None,) * (r - len(regs))


def saturate(A1, A2):
    """The merged automaton with sink completion and t_F final moves.
    States of A1 and A2 are prefixed with 'A1.' and 'A2.'."""
    for A in (A1, A2):
        _check_input(A)
        if not is_deterministic(A):
            raise UsageError("automaton %s is not deterministic" % A.name)
    r = max(A1.registers, A2.registers)
    tags = sorted(set(A1.tags) | set(A2.tags))
    states, trans, finals = [], [], []
    for pre, A in (("A1.", A1), ("A2.", A2)):
        ren = {q: pre + q for q in A.states}
        states.extend(ren[q] for q in A.states)
        for t in A.transitions:
            trans.append(t.__class__(ren[t.source], t.tag, t.guard, t.write, t.erase, ren[t.target]))
        for q in A.states:
            have = {(t.tag, t.write if t.is_known else 0) for _, t in A.out(q)}
            for tag in tags:
                for i in range(1, r + 1):
                    if (tag, i) not in have:
                        trans.append(known(ren[q], tag, i, SINK))
                if (tag, 0) not in have:
                    trans.append(local_fresh(ren[q], tag, 1, SINK))
            if q in A.finals:
                finals.append(ren[q])
                for i in range(1, r + 1):
                    trans.append(known(ren[q], RESERVED_TAG, i, DEAD))
                trans.append(local_fresh(ren[q], RESERVED_TAG, 1, DEAD))
    for tag in tags:
        for i in range(1, r + 1):
            trans.append(known(SINK, tag, i, SINK))
        trans.append(local_fresh(SINK, tag, 1, SINK))
    states += [DEAD, SINK]
    B = Automaton("RA", "S#0", r, tuple(states), DEAD, (None,) * r, tuple(trans),
                  frozenset(finals), tuple(tags) + (RESERVED_TAG,), "sat(%s,%s)" % (A1.name, A2.name))
    return B.canonical()


def accepts(A, word):
    """Run a deterministic RA on a word of (tag, name) letters."""
    k = A.initial_config()
    for tag, d in word:
        nxt = None
        for _, t in A.out(k.state):
            if t.tag != tag:
                continue
            if t.is_known and k.regs[t.write - 1] == d:
                nxt = t
            elif t.is_local_fresh and d not in k.regs:
                nxt = t
            if nxt is not None:
                break
        if nxt is None:
            return False
        regs = list(k.regs)
        regs[nxt.write - 1] = d
        k = Configuration(nxt.target, tuple(regs))
    return k.state in A.finals


def lang_equiv(A1, A2):
    """Equivalence verdict, with a replay-checked distinguishing word."""
    B = saturate(A1, A2)
    r = B.registers
    k1 = Configuration("A1." + A1.initial, _pad(A1.assign, r))
    k2 = Configuration("A2." + A2.initial, _pad(A2.assign, r))
    v = check_bisim(B, k1, k2)
    stats = {"iterations": v.stats.get("iterations"), "bound": depth_bound(B), "attacker_depth": v.attacker_depth}
    if v.bisimilar:
        return LangVerdict(True, None, stats)
    word = []
    last = None
    for k in range(0, len(v.witness), 2):
        side, label, idx = v.witness[k]
        if B.transitions[idx].tag == RESERVED_TAG:
            last = side
            break
        word.append(label)
    if last is None:
        raise AssertionError("winning play does not end with a final move")
    w = WordWitness(word, "A1" if last == 1 else "A2")
    a1, a2 = accepts(A1, word), accepts(A2, word)
    if a1 == a2 or (a1 and w.accepted_by != "A1") or (a2 and w.accepted_by != "A2"):
        raise AssertionError("distinguishing word failed replay")
    stats["length"] = len(word)
    return LangVerdict(False, w, stats)
