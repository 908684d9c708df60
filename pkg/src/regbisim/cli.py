"""Command line: regbisim <command> ...

Exit codes: 0 bisimilar / equivalent / valid, 1 not, 2 usage or format
error, 3 capacity exceeded.
"""

import argparse
import json
import sys
import time

from . import certs
from .errors import CapacityError, CertificateError, RegBisimError, UsageError
from .fileformat import parse_config, read_automaton, serialize

SYMBOLIC_OK = ("S#0", "SF")


def _configs(A, args):
    return parse_config(args.left, A), parse_config(args.right, A)


def _read_cert(path):
    try:
        with open(path, encoding="utf-8") as f:
            return certs.loads(f.read())
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e.strerror)) from None


def run_bisim(A, k1, k2, method=None, depth=None, cert=None):
    """Dispatch one bisimilarity query; returns a GameVerdict."""
    from . import fresh, oracle, reductions, symbolic
    if method is None:
        method = "cert" if cert is not None else ("symbolic" if A.discipline in SYMBOLIC_OK else "finite")
    if method in ("symbolic", "game") and A.discipline not in SYMBOLIC_OK:
        raise UsageError("method %s needs discipline S#0 or SF; use --method finite" % method)
    if method == "symbolic":
        return symbolic.check_bisim(A, k1, k2) if A.kind == "RA" else fresh.fresh_check(A, k1, k2)
    if method == "game":
        if A.kind == "RA":
            B = symbolic.depth_bound(A) if depth is None else depth
            v = symbolic.game_decide(A, symbolic.query_tuple(k1, k2, A.registers), B, (k1, k2))
        else:
            B = fresh.fresh_depth_bound(A) if depth is None else depth
            v = fresh.fresh_game_decide(A, k1, k2, B)
        v.stats["depth"] = B
        return v
    if method == "finite":
        return reductions.finite_check(A, k1, k2, materialize_limit=100000)
    if method == "oracle":
        return oracle.exact_bisim_ra(A, k1, k2, depth)
    if method == "cert":
        return certs.certify(A, k1, k2, cert)
    raise UsageError("unknown method %s" % method)


def _print_verdict(v, A, args, elapsed, positive, negative):
    if args.json:
        out = v.to_json()
        out["elapsed"] = round(elapsed, 6)
        print(json.dumps(out, sort_keys=True, default=str))
        return
    print(positive if v.bisimilar else negative)
    print("method: %s" % v.method)
    if v.attacker_depth is not None:
        print("attacker depth: %d" % v.attacker_depth)
    for k in ("iterations", "depth", "bound"):
        if k in v.stats:
            print("%s: %s" % (k, v.stats[k]))
    if v.witness:
        print("witness:")
        for side, label, tr in v.witness:
            lab = "(%s,%s)" % label if isinstance(label, tuple) else label
            via = "" if tr is None else "  via %s" % A.transitions[tr]
            print("  %s %s%s" % ("left " if side == 1 else "right", lab, via))
    print("elapsed: %.3fs" % elapsed)


def cmd_validate(args):
    A = read_automaton(args.file)
    print("%s: valid %s(%s), %d registers, %d states, %d transitions"
          % (A.name, A.kind, A.discipline, A.registers, len(A.states), len(A.transitions)))
    return 0


def cmd_bisim(args):
    A = read_automaton(args.file)
    k1, k2 = _configs(A, args)
    cert = _read_cert(args.cert) if args.cert else None
    if cert is not None and args.method not in (None, "cert"):
        raise UsageError("--cert only applies to --method cert")
    t0 = time.perf_counter()
    v = run_bisim(A, k1, k2, args.method, args.depth, cert)
    _print_verdict(v, A, args, time.perf_counter() - t0, "bisimilar", "not bisimilar")
    return 0 if v.bisimilar else 1


def cmd_langequiv(args):
    from .langequiv import lang_equiv
    A1, A2 = read_automaton(args.file1), read_automaton(args.file2)
    t0 = time.perf_counter()
    v = lang_equiv(A1, A2)
    elapsed = time.perf_counter() - t0
    if args.json:
        out = v.to_json()
        out["elapsed"] = round(elapsed, 6)
        print(json.dumps(out, sort_keys=True))
    else:
        print("equivalent" if v.equivalent else "not equivalent")
        if v.witness is not None:
            word = " ".join("(%s,%s)" % x for x in v.witness.word) or "(empty word)"
            print("word: %s" % word)
            print("accepted by: %s" % v.witness.accepted_by)
        print("elapsed: %.3fs" % elapsed)
    return 0 if v.equivalent else 1


def cmd_gensys(args):
    A = read_automaton(args.file)
    if args.action == "extract":
        text = certs.dumps(certs.extract_all(A))
        if args.cert:
            with open(args.cert, "w", encoding="utf-8") as f:
                f.write(text + "\n")
        else:
            print(text)
        return 0
    if not args.cert:
        raise UsageError("gensys verify needs --cert <file>")
    ok = certs.verify_gensys(A, _read_cert(args.cert))
    print("valid" if ok else "invalid: the certificate does not generate a bisimulation")
    return 0 if ok else 1


def cmd_reduce(args):
    from .automata import embed_ra_in_fra
    from .reductions import build_finite_game, to_aut
    A = read_automaton(args.file)
    k1, k2 = _configs(A, args)
    if A.kind == "RA":
        A, k1, k2 = embed_ra_in_fra(A, k1, k2)
    L, s1, s2 = build_finite_game(A, k1, k2, max_states=args.max_states)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(to_aut(L))
    print("wrote %s: %d states, %d transitions (start_L=%d, start_R=%d)"
          % (args.out, len(L.states), L.num_transitions(), s1, s2))
    return 0


def cmd_gen(args):
    from .reductions import evaluate, parse_qbf, tqbf_instance
    try:
        with open(args.file, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (args.file, e.strerror)) from None
    lines = [ln for ln in (x.split("#", 1)[0].strip() for x in text.splitlines()) if ln]
    phi = parse_qbf(" ".join(lines))
    A, k1, k2 = tqbf_instance(phi)
    out = "# left: %s\n# right: %s\n# formula value: %s\n" % (k1, k2, str(evaluate(phi)).lower())
    out += serialize(A)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_random(args):
    from .randgen import random_automaton
    A = random_automaton(args.seed, args.states, args.registers, args.discipline, args.kind.upper(),
                         args.tags, args.density)
    sys.stdout.write(serialize(A))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="regbisim", description="Bisimilarity for register automata.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and check discipline rules")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("bisim", help="decide bisimilarity of two configurations")
    s.add_argument("file")
    s.add_argument("--left", required=True, help="configuration, e.g. q0@1=5,2=#+H=5,7")
    s.add_argument("--right", required=True)
    s.add_argument("--method", choices=("symbolic", "game", "finite", "oracle", "cert"))
    s.add_argument("--depth", type=int, help="round bound for game and oracle")
    s.add_argument("--json", action="store_true")
    s.add_argument("--cert", help="certificate file for --method cert")
    s.set_defaults(func=cmd_bisim)

    s = sub.add_parser("langequiv", help="language equivalence of two deterministic RA(S#0)")
    s.add_argument("file1")
    s.add_argument("file2")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_langequiv)

    s = sub.add_parser("gensys", help="extract or verify a generating-system certificate (SF)")
    s.add_argument("action", choices=("extract", "verify"))
    s.add_argument("file")
    s.add_argument("--cert", help="output file for extract, input file for verify")
    s.set_defaults(func=cmd_gensys)

    s = sub.add_parser("reduce", help="export the finite reduction as an .aut LTS")
    s.add_argument("target", choices=("finite",))
    s.add_argument("file")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--max-states", type=int, default=1000000)
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("gen", help="generate hardness instances")
    s.add_argument("target", choices=("tqbf",))
    s.add_argument("file", help='QBF file, e.g. "forall x1 exists x2 : (x1 | !x2) & (x2)"')
    s.add_argument("--out")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("random", help="print a random automaton")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--states", type=int, required=True)
    s.add_argument("--registers", type=int, required=True)
    s.add_argument("--discipline", required=True)
    s.add_argument("--kind", required=True, type=str.lower, choices=("ra", "fra"))
    s.add_argument("--tags", type=int, default=1)
    s.add_argument("--density", type=float, default=0.3)
    s.set_defaults(func=cmd_random)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as e:
        print("capacity exceeded: %s" % e, file=sys.stderr)
        return 3
    except (UsageError, CertificateError) as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    except RegBisimError as e:
        print("error: %s" % e, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
