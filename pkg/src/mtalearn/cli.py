"""Command-line front end: file I/O and the benchmark runner.

Exit status is 0 on success, 1 on malformed input or usage errors and 2 when
a teacher's answers turn out to be inconsistent.
"""

from __future__ import annotations

import argparse
import contextlib
import random
import sys
from pathlib import Path
from typing import Optional

from .adversary import (AdversarialTeacher, HardFamilySpec, build_hard_automaton, parse_heavy,
                        query_lower_bound)
from .algebra import QQ, field_from_tag
from .automaton import Mta, format_mta, parse_mta, product, zero_automaton
from .circuits import (acit_random_test, acit_to_mta, equiv_to_acit, format_circuit, normalize_circuit,
                       parse_circuit, split_subtraction)
from .equivalence import brute_force_equiv, check_equiv
from .errors import FormatError
from .fixtures import (EXAMPLE_ALPHABET, RANK2_ALPHABET, example_automaton, padded_size_automaton,
                       random_layered_circuit, random_mta, size_automaton)
from .learner import SimulatedTeacher, TeacherInconsistency, lmta
from .trees import DagPool, chain_dag, format_dag, parse_dag


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for teacher inconsistency here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _field(args):
    return field_from_tag(args.field) if args.field else None


def _load_mta(path: str, args) -> Mta:
    return parse_mta(_read(path), source=path, field=_field(args))


def _load_pair(args) -> tuple[Mta, Mta]:
    a, b = _load_mta(args.a, args), _load_mta(args.b, args)
    if a.field != b.field:
        raise UsageError(f"field mismatch: {a.field.tag} vs {b.field.tag} (use --field)")
    if a.alphabet != b.alphabet:
        raise UsageError("the two automata have different alphabets")
    return a, b


@contextlib.contextmanager
def _transcript(args):
    if args.transcript:
        with open(args.transcript, "w") as fh:
            yield fh
    else:
        yield None


def _print_stats(args, stats, dim):
    line = stats.line(dim)
    # keep stdout parseable when the automaton itself goes there
    print(line, file=sys.stdout if args.output else sys.stderr)


# -- commands ---------------------------------------------------------------

def cmd_eval(args):
    a = _load_mta(args.a, args)
    g = parse_dag(_read(args.g), DagPool(), alphabet=a.alphabet, source=args.g)
    if g.is_context:
        raise UsageError("the DAG contains a hole; expected a tree")
    print(a.field.format(a.weight(g)))


def cmd_product(args):
    a, b = _load_pair(args)
    _emit(format_mta(product(a, b)), args.output)


def cmd_equiv(args):
    a, b = _load_pair(args)
    res = check_equiv(a, b, DagPool())
    if res.equivalent:
        print("equivalent")
    else:
        fmt = a.field.format
        z = res.counterexample
        summary = (f"not equivalent: {fmt(res.value_a)} vs {fmt(res.value_b)} "
                   f"on a counterexample of {z.size} nodes")
        if args.output:
            _emit(format_dag(z), args.output)
            print(summary)
        else:
            print(summary, file=sys.stderr)
            _emit(format_dag(z), None)
    if args.max_height is not None:
        same = brute_force_equiv(a, b, args.max_height)
        print(f"enumeration below height {args.max_height}: {'no difference' if same else 'differ'}",
              file=sys.stderr)


def cmd_equiv_rand(args):
    a, b = _load_pair(args)
    if a.field != QQ:
        raise UsageError("equiv-rand works over the rationals only")
    r = acit_random_test(equiv_to_acit(a, b), args.confidence, rng=random.Random(args.seed))
    if r.is_zero:
        print(f"equivalent (error<=2^-{args.confidence} trials={r.trials} prime_bits={r.prime_bits})")
    else:
        p, residue, _ = r.certificate
        print(f"not equivalent (difference circuit is {residue} mod {p})")


def _learn(args, target: Mta, write_stats: bool):
    with _transcript(args) as tr:
        h, stats = lmta(SimulatedTeacher(target), target.alphabet, check_invariants=args.check, transcript=tr)
    _emit(format_mta(h), args.output)
    if write_stats:
        _print_stats(args, stats, h.dim)


def cmd_learn(args):
    _learn(args, _load_mta(args.teacher, args), write_stats=True)


def cmd_minimize(args):
    _learn(args, _load_mta(args.a, args), write_stats=args.stats)


def cmd_to_acit(args):
    a, b = _load_pair(args)
    if a.field != QQ:
        raise UsageError("to-acit works over the rationals only")
    _emit(format_circuit(equiv_to_acit(a, b)), args.output)


def cmd_from_acit(args):
    c = parse_circuit(_read(args.c), source=args.c)
    if not c.variable_free:
        raise UsageError("circuit has variable gates; only variable-free circuits become automata")
    if args.height is not None and args.height % 2:
        raise UsageError("--height must be even")
    if not c.has_sub:
        nc = normalize_circuit(c, args.height)
        _emit(format_mta(acit_to_mta(nc)), args.output)
        print(f"height {nc.height}", file=sys.stderr)
        return
    if not args.output:
        raise UsageError("circuit has subtraction gates; give -o so both automata can be written")
    pos, neg = split_subtraction(c)
    np_, nn = normalize_circuit(pos), normalize_circuit(neg)
    h = max(np_.height, nn.height, args.height or 0)
    np_, nn = normalize_circuit(pos, h), normalize_circuit(neg, h)
    out = Path(args.output)
    neg_path = out.with_name(out.stem + ".neg" + (out.suffix or ".mta"))
    _emit(format_mta(acit_to_mta(np_)), str(out))
    _emit(format_mta(acit_to_mta(nn)), str(neg_path))
    print(f"height {h}: the circuit is zero iff {out} and {neg_path} are equivalent")


def cmd_acit_test(args):
    c = parse_circuit(_read(args.c), source=args.c)
    r = acit_random_test(c, args.confidence, rng=random.Random(args.seed))
    if r.is_zero:
        print(f"ZeroLikely error<=2^-{args.confidence} trials={r.trials} prime_bits={r.prime_bits}")
    else:
        p, residue, assignment = r.certificate
        xs = " ".join(f"x{k}={v}" for k, v in sorted(assignment.items()))
        print(f"NonZero modulus={p} residue={residue}" + (f" {xs}" if xs else ""))


def cmd_bench_adversary(args):
    spec = HardFamilySpec(args.n, parse_heavy(args.heavy), seed=args.seed)
    teacher = AdversarialTeacher(spec, seed=args.seed)
    with _transcript(args) as tr:
        h, stats = lmta(teacher, spec.alphabet, check_invariants=args.check, transcript=tr)
    correct = check_equiv(build_hard_automaton(teacher.committed_spec()), h, DagPool()).equivalent
    total = stats.eq + stats.mq
    print(f"queries={total} eq={stats.eq} mq={stats.mq} lower_bound={query_lower_bound(spec)} "
          f"entries={spec.entry_count()} revealed={len(teacher.revealed)} dim={h.dim} "
          f"correct={'yes' if correct else 'no'}")
    if args.stats:
        print(stats.line(h.dim))
    if args.output:
        _emit(format_mta(h), args.output)


def cmd_fixture(args):
    field = _field(args) or QQ
    kind = args.kind
    n = args.n
    if kind == "size":
        text = format_mta(size_automaton(field))
    elif kind == "padded-size":
        text = format_mta(padded_size_automaton(field))
    elif kind == "example":
        text = format_mta(example_automaton(n or 10, field))
    elif kind == "zero":
        alphabet = _load_mta(args.like, args).alphabet if args.like else EXAMPLE_ALPHABET
        text = format_mta(zero_automaton(alphabet, field))
    elif kind == "random":
        text = format_mta(random_mta(random.Random(args.seed), RANK2_ALPHABET, n or 2, field))
    elif kind == "hard":
        spec = HardFamilySpec(n or 2, parse_heavy(args.heavy), field=field, seed=args.seed).with_random_b()
        text = format_mta(build_hard_automaton(spec))
    elif kind == "chain-dag":
        text = format_dag(chain_dag(n or 10, DagPool()))
    elif kind == "layered-circuit":
        text = format_circuit(random_layered_circuit(random.Random(args.seed), n or 4))
    else:  # argparse restricts the choices
        raise UsageError(f"unknown fixture {kind!r}")
    _emit(text, args.output)


FIXTURES = ("size", "padded-size", "example", "zero", "random", "hard", "chain-dag", "layered-circuit")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", help="override the field: q or fp:<p>")
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    common.add_argument("--confidence", type=int, default=20, metavar="K",
                        help="randomized tests err with probability <= 2^-K")
    common.add_argument("--max-height", type=int, metavar="H",
                        help="equiv: also compare on every tree of height < H")
    common.add_argument("--stats", action="store_true", help="print EQ=.. MQ=.. S=.. DIM=..")
    common.add_argument("--transcript", metavar="PATH", help="log every query to PATH")
    common.add_argument("--check", action="store_true", help="re-verify learner invariants each round")
    common.add_argument("-o", "--output", metavar="PATH", help="write the result to PATH instead of stdout")

    ap = _Parser(prog="mtalearn", description="Multiplicity tree automata: evaluation, equivalence, "
                                              "learning and circuit reductions.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help, *positional):
        p = sub.add_parser(name, parents=[common], help=help)
        for arg, h in positional:
            p.add_argument(arg, help=h)
        p.set_defaults(fn=fn)
        return p

    add("eval", cmd_eval, "weight of a tree given as a DAG", ("a", "automaton (.mta)"), ("g", "tree (.dag)"))
    add("product", cmd_product, "product automaton", ("a", ".mta"), ("b", ".mta"))
    add("equiv", cmd_equiv, "exact equivalence with a DAG counterexample", ("a", ".mta"), ("b", ".mta"))
    add("equiv-rand", cmd_equiv_rand, "randomized equivalence through a circuit", ("a", ".mta"), ("b", ".mta"))
    p = add("learn", cmd_learn, "learn a minimal automaton from a simulated teacher")
    p.add_argument("--teacher", required=True, metavar="T.mta", help="target automaton")
    add("minimize", cmd_minimize, "minimal equivalent automaton", ("a", ".mta"))
    add("to-acit", cmd_to_acit, "circuit that is zero iff a and b are equivalent", ("a", ".mta"), ("b", ".mta"))
    p = add("from-acit", cmd_from_acit, "automaton whose weight on the layered tree is the circuit value",
            ("c", "circuit (.ac)"))
    p.add_argument("--height", type=int, help="lift the circuit to this even height")
    add("acit-test", cmd_acit_test, "randomized zero test of a circuit", ("c", "circuit (.ac)"))
    p = add("bench-adversary", cmd_bench_adversary, "learn against the adversarial teacher")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--heavy", default="f:2", help='heavy symbols, e.g. "f:2,g:1"')
    p = add("fixture", cmd_fixture, "write a standard automaton, DAG or circuit")
    p.add_argument("kind", choices=FIXTURES)
    p.add_argument("--n", type=int, help="dimension, size or height, depending on the fixture")
    p.add_argument("--heavy", default="f:2", help='heavy symbols for "hard", e.g. "f:2"')
    p.add_argument("--like", metavar="A.mta", help='"zero": copy the alphabet of this automaton')
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except TeacherInconsistency as e:
        print(f"teacher inconsistency: {e}", file=sys.stderr)
        return 2
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
