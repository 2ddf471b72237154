"""Arithmetic circuits: evaluation, randomized identity testing, and the two
reductions between automaton equivalence and circuit identity testing.

Gates are tuples ``("zero",)``, ``("one",)``, ``("var", i)``, ``("add", l, r)``,
``("mul", l, r)`` and ``("sub", l, r)``; operand ids always precede the gate.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Optional, Sequence

from .algebra import QQ, RationalField, is_prime
from .automaton import Mta, product
from .errors import FormatError
from .trees import DEFAULT_POOL, Dag, DagPool, RankedAlphabet, Tree, _tokens

OPS = ("add", "mul", "sub")
LEAVES = ("zero", "one", "var")
DEFAULT_BIT_BOUND = 1 << 20


class BitBoundExceeded(ArithmeticError):
    pass


class NotNormalized(ValueError):
    pass


@dataclass(frozen=True)
class Circuit:
    gates: tuple
    output: int

    def __post_init__(self):
        if not 0 <= self.output < len(self.gates):
            raise ValueError(f"output gate {self.output} does not exist")
        for i, g in enumerate(self.gates):
            op = g[0]
            if op in OPS:
                if len(g) != 3 or not (0 <= g[1] < i and 0 <= g[2] < i):
                    raise ValueError(f"gate {i}: operands must be earlier gates")
            elif op == "var":
                if len(g) != 2 or g[1] < 0:
                    raise ValueError(f"gate {i}: bad variable gate")
            elif op not in ("zero", "one") or len(g) != 1:
                raise ValueError(f"gate {i}: unknown gate {g!r}")

    def __len__(self):
        return len(self.gates)

    @property
    def variable_free(self) -> bool:
        return not any(g[0] == "var" for g in self.gates)

    @property
    def has_sub(self) -> bool:
        return any(g[0] == "sub" for g in self.gates)

    def variables(self) -> list[int]:
        return sorted({g[1] for g in self.gates if g[0] == "var"})

    def heights(self) -> list[int]:
        hs = []
        for g in self.gates:
            hs.append(1 + max(hs[g[1]], hs[g[2]]) if g[0] in OPS else 0)
        return hs

    @property
    def height(self) -> int:
        return self.heights()[self.output]


def trim(c: Circuit) -> Circuit:
    """Drop gates the output does not depend on, keeping relative order."""
    live = {c.output}
    for i in range(c.output, -1, -1):
        if i in live and c.gates[i][0] in OPS:
            live.update(c.gates[i][1:])
    ren = {}
    gates = []
    for i, g in enumerate(c.gates):
        if i in live:
            ren[i] = len(gates)
            gates.append((g[0], ren[g[1]], ren[g[2]]) if g[0] in OPS else g)
    return Circuit(tuple(gates), ren[c.output])


class Builder:
    """Hash-consing circuit builder.  Operands are never reordered.

    The ``fold`` variants simplify additions of 0 and multiplications by 0 or 1;
    the plain ones always emit a gate.
    """

    def __init__(self):
        self.gates: list[tuple] = []
        self._index: dict[tuple, int] = {}

    def gate(self, *g) -> int:
        g = tuple(g)
        gid = self._index.get(g)
        if gid is None:
            gid = len(self.gates)
            self.gates.append(g)
            self._index[g] = gid
        return gid

    def zero(self):
        return self.gate("zero")

    def one(self):
        return self.gate("one")

    def var(self, i):
        return self.gate("var", i)

    def add(self, l, r):
        return self.gate("add", l, r)

    def mul(self, l, r):
        return self.gate("mul", l, r)

    def sub(self, l, r):
        return self.gate("sub", l, r)

    def _is(self, gid, kind):
        return self.gates[gid] == (kind,)

    def fadd(self, l, r):
        if self._is(l, "zero"):
            return r
        if self._is(r, "zero"):
            return l
        return self.add(l, r)

    def fsub(self, l, r):
        if self._is(r, "zero"):
            return l
        return self.sub(l, r)

    def fmul(self, l, r):
        if self._is(l, "zero") or self._is(r, "one"):
            return l
        if self._is(r, "zero") or self._is(l, "one"):
            return r
        return self.mul(l, r)

    def const(self, v: int) -> int:
        """Integer constant from 0/1 inputs by binary doubling."""
        if v < 0:
            return self.sub(self.zero(), self.const(-v))
        if v == 0:
            return self.zero()
        one = self.one()
        x = one
        for bit in bin(v)[3:]:
            x = self.add(x, x)
            if bit == "1":
                x = self.add(x, one)
        return x

    def total(self, ids: Sequence[int]) -> int:
        """Balanced sum (zero for an empty list)."""
        ids = [i for i in ids if not self._is(i, "zero")]
        if not ids:
            return self.zero()
        while len(ids) > 1:
            nxt = [self.fadd(ids[i], ids[i + 1]) for i in range(0, len(ids) - 1, 2)]
            if len(ids) % 2:
                nxt.append(ids[-1])
            ids = nxt
        return ids[0]

    def prod(self, ids: Sequence[int]) -> int:
        """Balanced product (one for an empty list)."""
        ids = list(ids)
        if not ids:
            return self.one()
        while len(ids) > 1:
            nxt = [self.fmul(ids[i], ids[i + 1]) for i in range(0, len(ids) - 1, 2)]
            if len(ids) % 2:
                nxt.append(ids[-1])
            ids = nxt
        return ids[0]

    def build(self, output: int, keep_all=False) -> Circuit:
        c = Circuit(tuple(self.gates), output)
        return c if keep_all else trim(c)


# ---------------------------------------------------------------------------
# evaluation

def eval_circuit(c: Circuit, assignment: Optional[dict] = None, modulus: Optional[int] = None,
                 bit_bound: int = DEFAULT_BIT_BOUND) -> int:
    """Exact integer value, or the residue modulo ``modulus``.

    In exact mode a product whose operands together exceed ``bit_bound`` bits
    raises :class:`BitBoundExceeded` before it is computed.
    """
    assignment = assignment or {}
    vals: list[int] = []
    for i, g in enumerate(c.gates):
        op = g[0]
        if op == "zero":
            v = 0
        elif op == "one":
            v = 1
        elif op == "var":
            if g[1] not in assignment:
                raise KeyError(f"variable x{g[1]} is not assigned")
            v = assignment[g[1]]
        else:
            a, b = vals[g[1]], vals[g[2]]
            if op == "add":
                v = a + b
            elif op == "sub":
                v = a - b
            else:
                if modulus is None and a.bit_length() + b.bit_length() > bit_bound:
                    raise BitBoundExceeded(f"gate {i}: product would exceed {bit_bound} bits")
                v = a * b
        if modulus is not None:
            v %= modulus
        vals.append(v)
    return vals[c.output]


def magnitude_bits(c: Circuit) -> list[int]:
    """B with |coefficients| <= 2**B per gate: constants 0, + and - add one bit, x adds."""
    bits = []
    for g in c.gates:
        if g[0] in ("add", "sub"):
            bits.append(max(bits[g[1]], bits[g[2]]) + 1)
        elif g[0] == "mul":
            bits.append(bits[g[1]] + bits[g[2]])
        else:
            bits.append(0)
    return bits


def degrees(c: Circuit) -> list[int]:
    deg = []
    for g in c.gates:
        if g[0] in ("add", "sub"):
            deg.append(max(deg[g[1]], deg[g[2]]))
        elif g[0] == "mul":
            deg.append(deg[g[1]] + deg[g[2]])
        else:
            deg.append(1 if g[0] == "var" else 0)
    return deg


@dataclass(frozen=True)
class AcitResult:
    verdict: str  # "ZeroLikely" or "NonZero"
    trials: int
    planned_trials: int
    prime_bits: int
    trial_error_log2: float  # log2 of the per-trial false-zero bound
    certificate: Optional[tuple] = None  # (modulus, residue, assignment)

    @property
    def is_zero(self) -> bool:
        return self.verdict == "ZeroLikely"

    @property
    def error_log2(self) -> float:
        """log2 of the bound on a wrong ZeroLikely answer (-inf when the bound is 0)."""
        return self.planned_trials * self.trial_error_log2


def _log2_sum(xs) -> float:
    xs = [x for x in xs if x != -math.inf]
    if not xs:
        return -math.inf
    m = max(xs)
    return m + math.log2(sum(2.0 ** (x - m) for x in xs))


def trial_error_log2(bits: int, degree: int, prime_bits: int) -> float:
    """log2 of the per-trial chance that a nonzero circuit evaluates to 0 mod a random prime.

    A nonzero integer coefficient of magnitude <= 2**bits has at most
    bits/(L-1) prime divisors >= 2**(L-1); there are at least x/(3 ln 2x)
    primes in [x, 2x) with x = 2**(L-1).  A nonzero polynomial of total degree
    d vanishes at a uniform point mod p with probability <= d/p.
    """
    L = prime_bits
    x_log2 = L - 1
    primes_log2 = x_log2 - math.log2(3 * math.log(2) * L)
    terms = []
    divisors = bits // (L - 1)
    if divisors:
        terms.append(math.log2(divisors) - primes_log2)
    if degree:
        terms.append(math.log2(degree) - x_log2)
    return _log2_sum(terms)


def random_prime(rng: random.Random, bits: int) -> int:
    while True:
        p = rng.randrange(1 << (bits - 1), 1 << bits) | 1
        if is_prime(p):
            return p


def acit_random_test(c: Circuit, error_exponent: int = 20, seed: int = 0,
                     prime_bits: int = 63, rng: Optional[random.Random] = None) -> AcitResult:
    """Randomized zero test by evaluation modulo random primes.

    NonZero is always correct: the certificate holds a modulus and a nonzero
    residue.  ZeroLikely is wrong with probability at most 2**-error_exponent.
    The prime size grows until one trial fails with probability <= 2**-8.
    """
    rng = rng or random.Random(seed)
    bits = magnitude_bits(c)[c.output]
    deg = degrees(c)[c.output]
    L = prime_bits
    per = trial_error_log2(bits, deg, L)
    while per > -8:
        L += 8
        per = trial_error_log2(bits, deg, L)
    trials = 1 if per == -math.inf else max(1, math.ceil(error_exponent / -per))
    vs = c.variables()
    for t in range(1, trials + 1):
        p = random_prime(rng, L)
        assignment = {v: rng.randrange(p) for v in vs}
        r = eval_circuit(c, assignment, modulus=p)
        if r:
            return AcitResult("NonZero", t, trials, L, per, (p, r, assignment))
    return AcitResult("ZeroLikely", trials, trials, L, per)


# ---------------------------------------------------------------------------
# automaton -> circuit

class _Pairs:
    """Rationals as (numerator, denominator) gate pairs; denominators are positive."""

    def __init__(self, b: Builder):
        self.b = b

    def const(self, q: Fraction):
        q = Fraction(q)
        return (self.b.const(q.numerator), self.b.const(q.denominator))

    def is_zero(self, x):
        return self.b._is(x[0], "zero")

    def add(self, x, y):
        b = self.b
        if self.is_zero(x):
            return y
        if self.is_zero(y):
            return x
        if x[1] == y[1]:
            return (b.fadd(x[0], y[0]), x[1])
        return (b.fadd(b.fmul(x[0], y[1]), b.fmul(y[0], x[1])), b.fmul(x[1], y[1]))

    def sub(self, x, y):
        b = self.b
        if self.is_zero(y):
            return x
        if x[1] == y[1]:
            return (b.fsub(x[0], y[0]), x[1])
        return (b.fsub(b.fmul(x[0], y[1]), b.fmul(y[0], x[1])), b.fmul(x[1], y[1]))

    def mul(self, x, y):
        b = self.b
        if self.is_zero(x):
            return x
        if self.is_zero(y):
            return y
        return (b.fmul(x[0], y[0]), b.fmul(x[1], y[1]))

    def total(self, xs):
        xs = [x for x in xs if not self.is_zero(x)]
        if not xs:
            return (self.b.zero(), self.b.one())
        while len(xs) > 1:
            nxt = [self.add(xs[i], xs[i + 1]) for i in range(0, len(xs) - 1, 2)]
            if len(xs) % 2:
                nxt.append(xs[-1])
            xs = nxt
        return xs[0]

    def prod(self, xs):
        xs = list(xs)
        if not xs:
            return (self.b.one(), self.b.one())
        while len(xs) > 1:
            nxt = [self.mul(xs[i], xs[i + 1]) for i in range(0, len(xs) - 1, 2)]
            if len(xs) % 2:
                nxt.append(xs[-1])
            xs = nxt
        return xs[0]


def _series_pair(a: Mta, n: int, pairs: _Pairs):
    """(numerator, denominator) gates for the sum of a(t) over trees of height < n.

    g[j] holds the j-th entry of the sum of mu(t) over trees of the current
    height bound; each round applies g <- sum_k g^(x)k . S(k), where S(k) is
    the sum of the transition matrices of rank-k symbols.
    """
    if not isinstance(a.field, RationalField):
        raise ValueError("the circuit reduction needs an automaton over the rationals")
    if n < 1:
        return pairs.total([])
    r = a.dim
    ranks = sorted({rk for _, rk in a.alphabet})
    # s^k_{l, j}, as Fractions first so that cancelling entries vanish
    s = {}
    for k in ranks:
        acc = None
        for name, rk in a.alphabet:
            if rk == k:
                rows = a.mu(name).rows
                acc = [list(row) for row in rows] if acc is None else [
                    [x + y for x, y in zip(ra, rb)] for ra, rb in zip(acc, rows)]
        s[k] = acc
    sg = {k: [[pairs.const(x) for x in row] for row in s[k]] for k in ranks}
    g = [pairs.total([sg[0][0][j]]) if 0 in sg else pairs.total([]) for j in range(r)]
    for _ in range(n - 1):
        terms = [[] for _ in range(r)]
        for k in ranks:
            for pos, tup in enumerate(cartesian(range(r), repeat=k)):
                row = s[k][pos]
                if not any(row):
                    continue
                h = pairs.prod([g[l] for l in tup])
                if pairs.is_zero(h):
                    continue
                for j in range(r):
                    if row[j]:
                        terms[j].append(pairs.mul(h, sg[k][pos][j]))
        g = [pairs.total(t) for t in terms]
    gamma = [x for (x,) in a.final.rows]
    return pairs.total([pairs.mul(g[j], pairs.const(gamma[j])) for j in range(r) if gamma[j]])


def sum_series_pair(a: Mta, n: int) -> tuple[Circuit, Circuit]:
    """Numerator and denominator circuits whose ratio is the sum of a(t) over height < n."""
    b = Builder()
    num, den = _series_pair(a, n, _Pairs(b))
    return b.build(num), b.build(den)


def sum_series_circuit(a: Mta, n: int) -> Circuit:
    """Variable-free circuit for the sum of a(t) over trees of height < n.

    For integer automata the output equals that sum.  With fractional entries
    it is the numerator of the sum over a positive denominator, so it is zero
    exactly when the sum is.
    """
    return sum_series_pair(a, n)[0]


def equiv_to_acit(a: Mta, b: Mta) -> Circuit:
    """Circuit that is zero iff a and b are equivalent.

    It computes (the numerator of) the sum over trees of height < n1+n2 of
    (a(t) - b(t))**2 = (a x a)(t) + (b x b)(t) - 2 (a x b)(t).
    """
    if a.alphabet != b.alphabet or a.field != b.field:
        raise ValueError("automata must share alphabet and field")
    n = a.dim + b.dim
    bld = Builder()
    pairs = _Pairs(bld)
    saa = _series_pair(product(a, a), n, pairs)
    sbb = _series_pair(product(b, b), n, pairs)
    sab = _series_pair(product(a, b), n, pairs)
    two = pairs.const(Fraction(2))
    total = pairs.sub(pairs.add(saa, sbb), pairs.mul(two, sab))
    return bld.build(total[0])


# ---------------------------------------------------------------------------
# circuit -> automaton

def split_subtraction(c: Circuit) -> tuple[Circuit, Circuit]:
    """Circuits P, N over {+, x} with value(c) = value(P) - value(N)."""
    if not c.variable_free:
        raise ValueError("variable gates are not supported here; use acit_random_test")
    b = Builder()
    z = b.zero()
    track: list[tuple[int, int]] = []
    for g in c.gates:
        op = g[0]
        if op == "zero":
            track.append((z, z))
        elif op == "one":
            track.append((b.one(), z))
        else:
            (p1, n1), (p2, n2) = track[g[1]], track[g[2]]
            if op == "add":
                track.append((b.fadd(p1, p2), b.fadd(n1, n2)))
            elif op == "sub":
                track.append((b.fadd(p1, n2), b.fadd(n1, p2)))
            else:
                track.append((b.fadd(b.fmul(p1, p2), b.fmul(n1, n2)),
                              b.fadd(b.fmul(p1, n2), b.fmul(n1, p2))))
    p, n = track[c.output]
    return b.build(p), b.build(n)


@dataclass(frozen=True)
class NormalizedCircuit:
    circuit: Circuit
    heights: tuple

    @property
    def height(self) -> int:
        return self.heights[self.circuit.output]


def check_normalized(c: Circuit) -> tuple:
    """Heights if c is layered (+ even, x odd, children one level down, even output)."""
    if not c.variable_free or c.has_sub:
        raise NotNormalized("only variable-free circuits over + and x can be layered")
    hs = c.heights()
    for i, g in enumerate(c.gates):
        if g[0] in OPS:
            if hs[g[1]] != hs[i] - 1 or hs[g[2]] != hs[i] - 1:
                raise NotNormalized(f"gate {i}: operands are not one level down")
            if (g[0] == "add") != (hs[i] % 2 == 0):
                raise NotNormalized(f"gate {i}: {g[0]} at height {hs[i]}")
    if hs[c.output] % 2:
        raise NotNormalized("output gate has odd height")
    if c.output != len(c.gates) - 1 or any(h >= hs[c.output] for h in hs[:-1]):
        raise NotNormalized("the output must be the last gate and the only one at its height")
    return tuple(hs)


def normalize_circuit(c: Circuit, height: Optional[int] = None) -> NormalizedCircuit:
    """Value-preserving layering by relay gates x*1 and x+0.

    Every gate is placed at the lowest level of the right parity above its
    operands; operands are lifted with relays through a chain of per-level
    constants one_i and zero_i.  ``height`` (even) lifts the output further.
    """
    if not c.variable_free:
        raise ValueError("variable gates are not supported here; use acit_random_test")
    if c.has_sub:
        raise ValueError("subtraction gate present; use split_subtraction first")
    b = Builder()
    ones = [b.one()]
    zeros = [b.zero()]

    def const_at(level):
        while len(ones) <= level:
            i = len(ones)
            if i % 2:
                ones.append(b.mul(ones[-1], ones[-1]))
                zeros.append(b.mul(zeros[-1], zeros[-1]))
            else:
                ones.append(b.add(ones[-1], zeros[-1]))
                zeros.append(b.add(zeros[-1], zeros[-1]))
        return ones[level], zeros[level]

    def lift(gid, level, target):
        while level < target:
            one, zero = const_at(level)
            level += 1
            gid = b.mul(gid, one) if level % 2 else b.add(gid, zero)
        return gid

    placed: list[tuple[int, int]] = []
    for g in c.gates:
        op = g[0]
        if op == "zero":
            placed.append((zeros[0], 0))
        elif op == "one":
            placed.append((ones[0], 0))
        else:
            (l, hl), (r, hr) = placed[g[1]], placed[g[2]]
            lvl = max(hl, hr) + 1
            if (op == "add") != (lvl % 2 == 0):
                lvl += 1
            l = lift(l, hl, lvl - 1)
            r = lift(r, hr, lvl - 1)
            placed.append((b.gate(op, l, r), lvl))
    out, h = placed[c.output]
    if h % 2:
        out, h = lift(out, h, h + 1), h + 1
    if height is not None:
        if height < h or height % 2:
            raise ValueError(f"target height {height} must be even and at least {h}")
        out, h = lift(out, h, height), height
    raw = b.build(out)
    hs = raw.heights()
    order = sorted(range(len(raw.gates)), key=lambda i: (hs[i], i))
    ren = {old: new for new, old in enumerate(order)}
    gates = []
    for old in order:
        g = raw.gates[old]
        gates.append((g[0], ren[g[1]], ren[g[2]]) if g[0] in OPS else g)
    nc = Circuit(tuple(gates), ren[raw.output])
    return NormalizedCircuit(nc, check_normalized(nc))


CIRCUIT_ALPHABET = RankedAlphabet((("s0", 0), ("s1", 1), ("s2", 2)))


def layered_tree(h: int) -> Tree:
    """t_0 = s0; t_(i+1) = s2(t_i, t_i) for i even and s1(t_i) for i odd."""
    t = Tree("s0")
    for i in range(h):
        t = Tree("s2", (t, t)) if i % 2 == 0 else Tree("s1", (t,))
    return t


def layered_dag(h: int, pool: Optional[DagPool] = None) -> Dag:
    pool = pool or DEFAULT_POOL
    g = pool.leaf("s0")
    for i in range(h):
        g = pool.node("s2", [g, g]) if i % 2 == 0 else pool.node("s1", [g])
    return g


def acit_to_mta(nc) -> Mta:
    """Automaton over {s0/0, s1/1, s2/2} with one state per gate.

    Its weight on ``layered_tree(h)`` is the circuit value and it is 0 on every
    other tree.  Accepts a NormalizedCircuit or a Circuit that is already layered.
    """
    c = nc.circuit if isinstance(nc, NormalizedCircuit) else nc
    check_normalized(c)
    r = len(c.gates)
    z, o = QQ.zero, QQ.one
    s0 = [o if g[0] == "one" else z for g in c.gates]
    s1 = [[z] * r for _ in range(r)]
    s2 = [[z] * r for _ in range(r * r)]
    for i, g in enumerate(c.gates):
        if g[0] == "add":
            s1[g[1]][i] += 1
            s1[g[2]][i] += 1
        elif g[0] == "mul":
            s2[g[1] * r + g[2]][i] = o
    final = [z] * r
    final[c.output] = o
    return Mta(QQ, CIRCUIT_ALPHABET, r, {"s0": [s0], "s1": s1, "s2": s2}, final)


# ---------------------------------------------------------------------------
# .ac text format

def format_circuit(c: Circuit) -> str:
    lines = []
    for i, g in enumerate(c.gates):
        lines.append(" ".join(["gate", str(i), g[0]] + [str(x) for x in g[1:]]))
    lines.append(f"output {c.output}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, source: Optional[str] = None) -> Circuit:
    ids: dict[str, int] = {}
    gates: list[tuple] = []
    output = None
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _tokens(line)
        if not toks:
            continue
        if output is not None:
            raise FormatError("content after 'output' line", lineno, toks[0][1], source)
        kw, col = toks[0]
        if kw == "gate":
            if len(toks) < 3:
                raise FormatError("expected 'gate <id> <kind> ...'", lineno, col, source)
            gid, gcol = toks[1]
            kind, kcol = toks[2]
            if gid in ids:
                raise FormatError(f"duplicate gate id {gid!r}", lineno, gcol, source)
            args = toks[3:]
            if kind in ("zero", "one"):
                if args:
                    raise FormatError(f"{kind} takes no operands", lineno, args[0][1], source)
                gates.append((kind,))
            elif kind == "var":
                if len(args) != 1:
                    raise FormatError("expected 'var <index>'", lineno, kcol, source)
                try:
                    idx = int(args[0][0])
                    if idx < 0:
                        raise ValueError
                except ValueError:
                    raise FormatError(f"bad variable index {args[0][0]!r}", lineno, args[0][1], source) from None
                gates.append(("var", idx))
            elif kind in OPS:
                if len(args) != 2:
                    raise FormatError(f"expected '{kind} <left> <right>'", lineno, kcol, source)
                ops = []
                for a, acol in args:
                    if a not in ids:
                        raise FormatError(f"operand {a!r} is not defined earlier (cycle or bad order)",
                                          lineno, acol, source)
                    ops.append(ids[a])
                gates.append((kind, ops[0], ops[1]))
            else:
                raise FormatError(f"unknown gate kind {kind!r}", lineno, kcol, source)
            ids[gid] = len(gates) - 1
        elif kw == "output":
            if len(toks) != 2:
                raise FormatError("expected 'output <id>'", lineno, col, source)
            o, ocol = toks[1]
            if o not in ids:
                raise FormatError(f"unknown output gate {o!r}", lineno, ocol, source)
            output = ids[o]
        else:
            raise FormatError(f"unknown directive {kw!r}", lineno, col, source)
    if output is None:
        raise FormatError("missing 'output' line", None, None, source)
    return Circuit(tuple(gates), output)
