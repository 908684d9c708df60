"""Line-oriented text format for automata and configuration literals.

    automaton <name>
    kind: ra|fra
    discipline: SF|S#0|S#|MF|M#0|M#
    registers: <r>
    tags: <t1> <t2> ...
    states: <q...>   initial: <q>   final: <q...>
    assign: 1=<nat|#> 2=<nat|#> ...
    <q> -> <q'> : <tag>, <spec>

<spec> is "i" (read register i), "i*" (locally fresh into i), "i**"
(globally fresh into i, fra only) or "X={..} i=<0..r> Z={..}" with X
possibly "*".  A '#' at the start of a line or after whitespace starts a
comment.
"""

import re
from dataclasses import dataclass

from .automata import (DISCIPLINES, RESERVED_TAG, STAR, Automaton, Configuration, Transition, validate,
                       validate_config)
from .errors import UsageError

HEADER_KEYS = ("kind", "discipline", "registers", "tags", "states", "initial", "final", "assign")
_IDENT = re.compile(r"[A-Za-z0-9_.'^\-]+$")
_KEYWORD = re.compile(r"(?:^|(?<=\s))(kind|discipline|registers|tags|states|initial|final|assign):")
_TRANS = re.compile(r"^(?P<src>\S+)\s*->\s*(?P<dst>\S+)\s*:\s*(?P<tag>[^,\s]+)\s*,\s*(?P<spec>.+?)\s*$")
_GENERAL = re.compile(r"^X\s*=\s*(?P<X>\*|\{[^}]*\})\s+i\s*=\s*(?P<i>\d+)\s+Z\s*=\s*(?P<Z>\{[^}]*\})$")


@dataclass
class Diagnostic:
    line: int
    col: int
    rule: str
    message: str

    def __str__(self):
        return "%d:%d: %s: %s" % (self.line, self.col, self.rule, self.message)


class FormatError(UsageError):
    def __init__(self, diagnostics, source="<input>"):
        self.diagnostics = list(diagnostics)
        self.source = source
        super().__init__("\n".join("%s:%s" % (source, d) for d in self.diagnostics))


def _strip_comment(line):
    for k, ch in enumerate(line):
        if ch == "#" and (k == 0 or line[k - 1].isspace()):
            return line[:k]
    return line


def _index_set(text, where, diags, line, col):
    body = text.strip()[1:-1].strip()
    if not body:
        return frozenset()
    try:
        return frozenset(int(x) for x in body.split(","))
    except ValueError:
        diags.append(Diagnostic(line, col, "syntax", "bad index set %s in %s" % (text, where)))
        return frozenset()


def parse_spec(spec, line=0, col=0, diags=None):
    """(guard, write, erase) from a transition spec."""
    own = diags is None
    diags = [] if own else diags
    spec = spec.strip()
    out = None
    m = re.fullmatch(r"(\d+)(\*{0,2})", spec)
    if m:
        i = int(m.group(1))
        stars = len(m.group(2))
        guard = (frozenset((i,)), frozenset(), STAR)[stars]
        out = (guard, i, frozenset())
    else:
        m = _GENERAL.match(spec)
        if m:
            X = STAR if m.group("X") == "*" else _index_set(m.group("X"), spec, diags, line, col)
            out = (X, int(m.group("i")), _index_set(m.group("Z"), spec, diags, line, col))
        else:
            diags.append(Diagnostic(line, col, "syntax", "bad transition spec %r" % spec))
    if own and diags:
        raise FormatError(diags)
    return out


def _header_fields(text, line, diags):
    """Split a header line into (key, value, column) triples."""
    hits = list(_KEYWORD.finditer(text))
    if not hits or text[:hits[0].start()].strip():
        return None
    out = []
    for k, m in enumerate(hits):
        end = hits[k + 1].start() if k + 1 < len(hits) else len(text)
        out.append((m.group(1), text[m.end():end].strip(), m.start() + 1))
    return out


def parse(text, source="<input>", check=True):
    """Parse one automaton; raises FormatError with every diagnostic found."""
    diags = []
    name = None
    hdr = {}
    where = {}
    trans = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        col = len(line) - len(line.lstrip()) + 1
        body = line.strip()
        if body.startswith("automaton"):
            parts = body.split()
            if parts[0] != "automaton" or len(parts) != 2:
                diags.append(Diagnostic(ln, col, "syntax", "expected 'automaton <name>'"))
            elif name is not None:
                diags.append(Diagnostic(ln, col, "duplicate", "one automaton per file"))
            else:
                name = parts[1]
                where["automaton"] = (ln, col)
            continue
        fields = _header_fields(line, ln, diags)
        if fields is not None:
            for key, value, c in fields:
                if key in hdr:
                    diags.append(Diagnostic(ln, c, "duplicate", "header field %s given twice" % key))
                hdr[key] = value
                where[key] = (ln, c)
            continue
        m = _TRANS.match(body)
        if not m:
            diags.append(Diagnostic(ln, col, "syntax", "expected a header field or '<q> -> <q> : <tag>, <spec>'"))
            continue
        spec_col = col + body.index(m.group("spec"), m.start("spec"))
        sp = parse_spec(m.group("spec"), ln, spec_col, diags)
        if sp is not None:
            trans.append((ln, col, m.group("src"), m.group("tag"), sp, m.group("dst")))
    if name is None:
        diags.append(Diagnostic(1, 1, "missing", "no 'automaton <name>' line"))
    for key in ("kind", "discipline", "registers", "states", "initial"):
        if key not in hdr:
            diags.append(Diagnostic(where.get("automaton", (1, 1))[0], 1, "missing", "header field %s is required" % key))
    if diags:
        raise FormatError(diags, source)

    def at(key):
        return where[key]

    kind = hdr["kind"].strip().upper()
    if kind not in ("RA", "FRA"):
        diags.append(Diagnostic(*at("kind"), "syntax", "kind must be ra or fra"))
    disc = hdr["discipline"].strip()
    if disc not in DISCIPLINES:
        diags.append(Diagnostic(*at("discipline"), "syntax", "discipline must be one of %s" % " ".join(DISCIPLINES)))
    try:
        r = int(hdr["registers"])
        if r < 0:
            raise ValueError
    except ValueError:
        diags.append(Diagnostic(*at("registers"), "syntax", "registers must be a non-negative integer"))
        r = 0
    states = hdr["states"].split()
    for q in states:
        if not _IDENT.match(q):
            diags.append(Diagnostic(*at("states"), "syntax", "bad state name %r" % q))
    if len(set(states)) != len(states):
        diags.append(Diagnostic(*at("states"), "duplicate", "state declared twice"))
    initial = hdr["initial"].strip()
    finals = hdr.get("final", "").split()
    tags = hdr.get("tags", "").split()
    if RESERVED_TAG in tags:
        diags.append(Diagnostic(*at("tags"), "reserved tag", "%s is reserved" % RESERVED_TAG))
    assign = [None] * r
    if "assign" in hdr:
        seen = set()
        for item in hdr["assign"].split():
            m = re.fullmatch(r"(\d+)=(\d+|#)", item)
            if not m:
                diags.append(Diagnostic(*at("assign"), "syntax", "bad assignment item %r" % item))
                continue
            k = int(m.group(1))
            if not 1 <= k <= r or k in seen:
                diags.append(Diagnostic(*at("assign"), "syntax", "register %d out of range or repeated" % k))
                continue
            seen.add(k)
            assign[k - 1] = None if m.group(2) == "#" else int(m.group(2))
    tlist = []
    lines = []
    for ln, col, src, tag, (g, i, z), dst in trans:
        if tag == RESERVED_TAG:
            diags.append(Diagnostic(ln, col, "reserved tag", "%s is reserved" % RESERVED_TAG))
        tlist.append(Transition(src, tag, g, i, z, dst))
        lines.append((ln, col))
    if not tags:
        tags = sorted({t.tag for t in tlist})
    if diags:
        raise FormatError(diags, source)
    A = Automaton(kind, disc, r, tuple(states), initial, tuple(assign), tuple(tlist),
                  frozenset(finals), tuple(tags), name)
    if check:
        for v in validate(A):
            m = re.match(r"transition (\d+)", v.where)
            if m:
                ln, col = lines[int(m.group(1))]
            else:
                key = {"header": "discipline"}.get(v.where, v.where.split()[0])
                ln, col = where.get(key, where.get("states", (1, 1)))
            diags.append(Diagnostic(ln, col, v.rule, v.message))
        if diags:
            raise FormatError(diags, source)
    return A.canonical()


def _set_text(S):
    return "{" + ",".join(map(str, sorted(S))) + "}"


def serialize(A):
    """Canonical text: header in fixed order, transitions sorted."""
    A = A.canonical()
    out = ["automaton %s" % A.name,
           "kind: %s" % A.kind.lower(),
           "discipline: %s" % A.discipline,
           "registers: %d" % A.registers,
           "tags: %s" % " ".join(A.tags),
           "states: %s" % " ".join(A.states),
           "initial: %s" % A.initial,
           "final: %s" % " ".join(q for q in A.states if q in A.finals),
           "assign: %s" % " ".join("%d=%s" % (k + 1, "#" if d is None else d) for k, d in enumerate(A.assign))]
    for t in A.transitions:
        out.append(str(t))
    return "\n".join(line.rstrip() for line in out) + "\n"


def read_automaton(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e.strerror)) from None
    return parse(text, source=path)


# --- configuration literals -----------------------------------------------------

_CONFIG = re.compile(r"^(?P<q>[^@+\s]+)(?:@(?P<regs>[^+]*))?(?:\+H=(?P<H>[\d,\s]*))?$")


def parse_config(text, A=None):
    """'q@1=5,2=#' with an optional '+H=5,7' history.  Registers not listed
    are empty; an FRA configuration without +H gets its register names."""
    m = _CONFIG.match(text.strip())
    if not m:
        raise UsageError("bad configuration literal %r (expected q@1=5,2=#+H=5,7)" % text)
    r = A.registers if A is not None else 0
    regs = {}
    if m.group("regs"):
        for item in m.group("regs").split(","):
            mm = re.fullmatch(r"\s*(\d+)\s*=\s*(\d+|#)\s*", item)
            if not mm:
                raise UsageError("bad register item %r in %r" % (item, text))
            k = int(mm.group(1))
            if k in regs:
                raise UsageError("register %d given twice in %r" % (k, text))
            regs[k] = None if mm.group(2) == "#" else int(mm.group(2))
    if A is None:
        r = max(regs, default=0)
    if any(not 1 <= k <= r for k in regs):
        raise UsageError("register index out of range 1..%d in %r" % (r, text))
    vals = tuple(regs.get(k) for k in range(1, r + 1))
    H = None
    if m.group("H") is not None:
        H = frozenset(int(x) for x in m.group("H").replace(",", " ").split())
    if A is not None and A.kind == "FRA" and H is None:
        H = frozenset(d for d in vals if d is not None)
    if A is not None and A.kind == "RA" and H is not None:
        raise UsageError("history given for an RA configuration %r" % text)
    k = Configuration(m.group("q"), vals, H)
    if A is not None:
        problems = validate_config(A, k)
        if problems:
            raise UsageError("; ".join("%s: %s" % (v.rule, v.message) for v in problems))
    return k
