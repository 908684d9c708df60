"""Register automata and fresh-register automata.

Names are non-negative integers, an empty register is None.  A transition
q -(t, X, i, Z)-> q' reads a name d, fires when X is exactly the set of
registers holding d (or, for the global-freshness guard STAR, when d is
absent from the history), writes d into register i unless i = 0, and then
erases the registers in Z.
"""

from dataclasses import dataclass, field

from .errors import UsageError

STAR = "*"
EMPTY = None

DISCIPLINES = ("SF", "S#0", "S#", "MF", "M#0", "M#")
KINDS = ("RA", "FRA")
RESERVED_TAG = "t_F"


@dataclass(frozen=True, order=True)
class Transition:
    source: str
    tag: str
    guard: object  # frozenset of register indices, or STAR
    write: int
    erase: frozenset
    target: str

    @property
    def is_global_fresh(self):
        return self.guard == STAR

    @property
    def is_local_fresh(self):
        return self.guard != STAR and not self.guard

    @property
    def is_known(self):
        """Shorthand form "i": reads the name currently held by register i."""
        return self.guard != STAR and self.guard == frozenset((self.write,)) and self.write > 0

    def sort_key(self):
        g = (1, ()) if self.guard == STAR else (0, tuple(sorted(self.guard)))
        return (self.source, self.tag, g, self.write, tuple(sorted(self.erase)), self.target)

    def spec(self):
        """Text form of the label part, using the shorthands when possible."""
        if not self.erase and self.write > 0:
            if self.is_known:
                return str(self.write)
            if self.is_local_fresh:
                return "%d*" % self.write
            if self.is_global_fresh:
                return "%d**" % self.write
        g = "*" if self.guard == STAR else "{" + ",".join(map(str, sorted(self.guard))) + "}"
        z = "{" + ",".join(map(str, sorted(self.erase))) + "}"
        return "X=%s i=%d Z=%s" % (g, self.write, z)

    def __str__(self):
        return "%s -> %s : %s, %s" % (self.source, self.target, self.tag, self.spec())


def known(source, tag, i, target):
    return Transition(source, tag, frozenset((i,)), i, frozenset(), target)


def local_fresh(source, tag, i, target):
    return Transition(source, tag, frozenset(), i, frozenset(), target)


def global_fresh(source, tag, i, target):
    return Transition(source, tag, STAR, i, frozenset(), target)


@dataclass(frozen=True)
class Configuration:
    state: str
    regs: tuple
    history: frozenset = None

    def names(self):
        return frozenset(d for d in self.regs if d is not None)

    def dom(self):
        return frozenset(k + 1 for k, d in enumerate(self.regs) if d is not None)

    def __str__(self):
        body = ",".join("%d=%s" % (k + 1, "#" if d is None else d) for k, d in enumerate(self.regs))
        s = "%s@%s" % (self.state, body) if body else self.state
        if self.history is not None:
            s += "+H=" + ",".join(map(str, sorted(self.history)))
        return s


@dataclass(frozen=True)
class Automaton:
    kind: str
    discipline: str
    registers: int
    states: tuple
    initial: str
    assign: tuple
    transitions: tuple
    finals: frozenset = frozenset()
    tags: tuple = ()
    name: str = "A"
    _out: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if not self.tags:
            tags = sorted({t.tag for t in self.transitions})
            object.__setattr__(self, "tags", tuple(tags))
        out = {q: [] for q in self.states}
        for idx, t in enumerate(self.transitions):
            out.setdefault(t.source, []).append((idx, t))
        object.__setattr__(self, "_out", out)

    @property
    def single(self):
        return self.discipline.startswith("S")

    @property
    def filled(self):
        return self.discipline.endswith("F")

    @property
    def no_erase(self):
        return self.discipline.endswith("F") or self.discipline.endswith("#0")

    def out(self, q):
        """(index, transition) pairs leaving q, in index order."""
        return self._out.get(q, ())

    def initial_config(self, history=None):
        if self.kind == "FRA" and history is None:
            history = frozenset(d for d in self.assign if d is not None)
        return Configuration(self.initial, tuple(self.assign), history)

    def canonical(self):
        return Automaton(self.kind, self.discipline, self.registers, tuple(self.states), self.initial,
                         tuple(self.assign), tuple(sorted(self.transitions, key=Transition.sort_key)),
                         frozenset(self.finals), tuple(self.tags), self.name)

    def replace(self, **kw):
        fields = dict(kind=self.kind, discipline=self.discipline, registers=self.registers,
                      states=self.states, initial=self.initial, assign=self.assign,
                      transitions=self.transitions, finals=self.finals, tags=self.tags, name=self.name)
        fields.update(kw)
        return Automaton(**fields)


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    message: str

    def __str__(self):
        return "%s: %s (%s)" % (self.where, self.rule, self.message)


def validate(A):
    """Every discipline violation in A, as a list (empty when A is valid)."""
    out = []
    r = A.registers
    if A.kind not in KINDS:
        out.append(Violation("unknown kind", "header", A.kind))
    if A.discipline not in DISCIPLINES:
        out.append(Violation("unknown discipline", "header", A.discipline))
        return out
    states = set(A.states)
    if A.initial not in states:
        out.append(Violation("unknown state", "initial", A.initial))
    for q in sorted(set(A.finals) - states):
        out.append(Violation("unknown state", "final", q))
    if len(A.assign) != r:
        out.append(Violation("assignment length", "assign", "expected %d slots" % r))
    out.extend(_assignment_violations(A, A.assign, "assign"))
    tags = set(A.tags)
    for idx, t in enumerate(A.transitions):
        where = "transition %d (%s)" % (idx, t)
        if t.source not in states or t.target not in states:
            out.append(Violation("unknown state", where, "source or target not declared"))
        if t.tag not in tags:
            out.append(Violation("unknown tag", where, t.tag))
        idxs = set(t.erase) | ({t.write} if t.write else set())
        if t.guard != STAR:
            idxs |= set(t.guard)
        if any(not (1 <= k <= r) for k in idxs) or not (0 <= t.write <= r):
            out.append(Violation("index out of range", where, "registers are 1..%d" % r))
        if t.write in t.erase:
            out.append(Violation("i in Z", where, "write target is also erased"))
        if A.single and t.guard != STAR and not set(t.guard) <= {t.write}:
            out.append(Violation("S requires X⊆{i} or ⊛", where, "guard %s" % sorted(t.guard)))
        if A.no_erase and t.erase:
            kind = "F" if A.filled else "#0"
            out.append(Violation("erase forbidden under %s" % kind, where, "Z must be empty"))
        if A.no_erase and t.write == 0:
            kind = "F" if A.filled else "#0"
            out.append(Violation("write to 0 forbidden under %s" % kind, where, "i must be nonzero"))
        if A.kind == "RA" and t.guard == STAR:
            out.append(Violation("⊛ forbidden in RA", where, "global freshness needs kind FRA"))
    return out


def _assignment_violations(A, regs, where):
    out = []
    names = [d for d in regs if d is not None]
    if A.single and len(set(names)) != len(names):
        out.append(Violation("S requires injective assignment", where, str(regs)))
    if A.filled and len(names) != len(regs):
        out.append(Violation("F forbids empty registers", where, str(regs)))
    if any(not isinstance(d, int) or d < 0 for d in names):
        out.append(Violation("names are non-negative integers", where, str(regs)))
    return out


def validate_config(A, k):
    """Violations of a configuration against A (state, assignment, history)."""
    out = []
    if k.state not in set(A.states):
        out.append(Violation("unknown state", "configuration", k.state))
    if len(k.regs) != A.registers:
        out.append(Violation("assignment length", "configuration", "expected %d slots" % A.registers))
    out.extend(_assignment_violations(A, k.regs, "configuration"))
    if A.kind == "FRA":
        if k.history is None:
            out.append(Violation("history required", "configuration", "kind FRA"))
        elif not k.names() <= k.history:
            out.append(Violation("history must contain registers", "configuration", str(k)))
    return out


def fire(t, regs, history, d):
    """Registers after firing t on name d, or None when t does not fire."""
    if t.guard == STAR:
        if history is None or d in history:
            return None
    else:
        holders = {k + 1 for k, v in enumerate(regs) if v == d}
        if holders != t.guard:
            return None
    if t.write == 0 and not t.erase:
        return regs
    new = list(regs)
    if t.write:
        new[t.write - 1] = d
    for z in t.erase:
        new[z - 1] = None
    return tuple(new)


def step(A, k, label):
    """(transition index, successor) pairs for the labelled move from k."""
    tag, d = label
    out = []
    for idx, t in A.out(k.state):
        if t.tag != tag:
            continue
        regs = fire(t, k.regs, k.history, d)
        if regs is None:
            continue
        hist = None if k.history is None else k.history | {d}
        out.append((idx, Configuration(t.target, regs, hist)))
    return out


def concrete_step(A, k, label):
    return {c for _, c in step(A, k, label)}


def least_unused(*sets):
    used = set()
    for s in sets:
        used.update(x for x in s if x is not None)
    n = 0
    while n in used:
        n += 1
    return n


def embed_ra_in_fra(A, k1, k2):
    """Read an RA as an FRA; both configurations get H = rng(rho1) | rng(rho2)."""
    if A.kind != "RA":
        raise UsageError("embed_ra_in_fra expects an RA")
    H = k1.names() | k2.names()
    B = A.replace(kind="FRA")
    return B, Configuration(k1.state, k1.regs, H), Configuration(k2.state, k2.regs, H)


def double_registers(A, k1, k2):
    """Simulate a single-assignment automaton with erasure by a 2r-register
    multiple-assignment automaton whose registers are always filled.

    Register k is represented by registers 2k-1 and 2k; they hold the same
    name exactly when register k is empty, otherwise 2k holds its content.
    Each transition becomes a chain that first performs the read and then,
    one register at a time, keeps or erases the simulated content.
    """
    if not A.single:
        raise UsageError("double_registers expects a single-assignment discipline")
    r = A.registers
    fillers = []
    used = set(A.assign) | set(k1.regs) | set(k2.regs)
    for k in (k1, k2):
        if k.history is not None:
            used |= k.history
    while len(fillers) < r:
        f = least_unused(used, fillers)
        fillers.append(f)

    def enc(regs):
        out = []
        for k in range(r):
            f = fillers[k]
            out.append(f)
            out.append(f if regs[k] is None else regs[k])
        return tuple(out)

    def conf(k):
        hist = None if k.history is None else k.history | set(fillers)
        return Configuration(k.state, enc(k.regs), hist)

    states = list(A.states)
    trans = []
    zero_write = False
    for idx, t in enumerate(A.transitions):
        chain = ["%s^%d.%d" % (t.source, idx, j) for j in range(1, r + 1)]
        states.extend(chain)
        if t.guard == STAR:
            guard = STAR
        else:
            guard = frozenset(2 * x for x in t.guard)
        if t.write == 0:
            zero_write = True
        trans.append(Transition(t.source, t.tag, guard, 2 * t.write, frozenset(), chain[0]))
        for j in range(1, r + 1):
            src = chain[j - 1]
            dst = t.target if j == r else chain[j]
            lo, hi = 2 * j - 1, 2 * j
            both = frozenset((lo, hi))
            if j in t.erase:
                trans.append(Transition(src, t.tag, frozenset((lo,)), hi, frozenset(), dst))
            else:
                trans.append(Transition(src, t.tag, frozenset((lo,)), lo, frozenset(), dst))
            trans.append(Transition(src, t.tag, both, lo, frozenset(), dst))
    B = Automaton(A.kind, "M#" if zero_write else "MF", 2 * r, tuple(states), A.initial,
                  enc(A.assign), tuple(trans), frozenset(A.finals), A.tags, A.name + "-doubled")
    return B, conf(k1), conf(k2)
