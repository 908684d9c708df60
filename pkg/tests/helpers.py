"""Replay of concrete witness traces against the transition relation."""

from regbisim.automata import Configuration, fire, step


def replay(A, k1, k2, witness):
    """True iff the trace is a legal play that the Defender cannot extend:
    attacker/defender pairs that fire the named transitions on the named
    labels, ending with an attacker move that has no answer."""
    c = [k1, k2]
    for pos in range(0, len(witness), 2):
        side, label, idx = witness[pos]
        att = c[side - 1]
        t = A.transitions[idx]
        if t.source != att.state or t.tag != label[0]:
            return False
        regs = fire(t, att.regs, att.history, label[1])
        if regs is None:
            return False
        hist = None if att.history is None else att.history | {label[1]}
        new_att = Configuration(t.target, regs, hist)
        dfn = c[2 - side]
        if pos + 1 == len(witness):
            return step(A, dfn, label) == []
        dside, dlabel, didx = witness[pos + 1]
        u = A.transitions[didx]
        if dside != 3 - side or dlabel != label or u.source != dfn.state or u.tag != label[0]:
            return False
        dregs = fire(u, dfn.regs, dfn.history, label[1])
        if dregs is None:
            return False
        c[side - 1] = new_att
        c[2 - side] = Configuration(u.target, dregs, hist)
    return False
