"""A family of automata that forces many queries, with an adversarial teacher.

For n >= 1 the automata have dimension 2n over symbols s0 (nullary), s1
(unary) and any number of "heavy" symbols sigma of rank k, each carrying a
free matrix B(sigma) of shape n**k x n:

    mu(s0) = [1 0] (x) e_1          mu(s1) = I_2 (x) P   (P: cyclic shift, e_i P = e_(i+1))
    mu(sigma) = [1 1] (x) ([I_n; -I_n]^(x)k . B(sigma))
    final = [1 0]^T (x) e_1^T

A tree with two or more heavy nodes has value 0, a pure chain s1^j(s0) has
value 1 iff j = 0 mod n, and s1^j(sigma(s1^i1(s0), ..., s1^ik(s0))) reads a
single entry of B(sigma).  A teacher can therefore reveal B one entry per query.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from itertools import product as cartesian
from typing import Optional, Union

from .algebra import Field, Matrix, QQ, flatten_index, kron, kron_all
from .automaton import Mta
from .equivalence import check_equiv
from .trees import Dag, DagPool, RankedAlphabet, Tree, dag_stats, stats


@dataclass
class HardFamilySpec:
    n: int
    heavy: tuple  # ((name, rank), ...)
    B: dict = dc_field(default_factory=dict)  # name -> Matrix (n**rank x n)
    field: Field = QQ
    nullary: str = "s0"
    unary: str = "s1"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        self.heavy = tuple((name, int(rk)) for name, rk in self.heavy)
        names = [self.nullary, self.unary] + [h for h, _ in self.heavy]
        if len(set(names)) != len(names):
            raise ValueError("symbol names must be distinct")

    @property
    def alphabet(self) -> RankedAlphabet:
        return RankedAlphabet(((self.nullary, 0), (self.unary, 1)) + self.heavy)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def entries(self):
        """All B entries as (symbol, 0-based row tuple, 0-based column), in a fixed order."""
        for name, rk in self.heavy:
            for rows in cartesian(range(self.n), repeat=rk):
                for col in range(self.n):
                    yield name, rows, col

    def entry_count(self) -> int:
        return sum(self.n ** (rk + 1) for _, rk in self.heavy)

    def with_random_b(self, seed: Optional[int] = None, lo: int = -5, hi: int = 5) -> "HardFamilySpec":
        rng = random.Random(self.seed if seed is None else seed)
        B = {}
        for name, rk in self.heavy:
            B[name] = Matrix(self.field, [[rng.randint(lo, hi) for _ in range(self.n)]
                                          for _ in range(self.n ** rk)])
        return HardFamilySpec(self.n, self.heavy, B, self.field, self.nullary, self.unary, self.seed)


def parse_heavy(text: str) -> tuple:
    """``"f:2,g:1"`` -> (("f", 2), ("g", 1))."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, sep, rk = part.partition(":")
        if not sep or not name:
            raise ValueError(f"bad heavy symbol {part!r}; expected name:rank")
        out.append((name, int(rk)))
    return tuple(out)


def _cycle(field, n) -> Matrix:
    return Matrix(field, [[1 if j == (i + 1) % n else 0 for j in range(n)] for i in range(n)])


def build_hard_automaton(spec: HardFamilySpec) -> Mta:
    f = spec.field
    n = spec.n
    e1 = Matrix.vector(f, [1] + [0] * (n - 1))
    trans = {
        spec.nullary: kron(Matrix.vector(f, [1, 0]), e1),
        spec.unary: kron(Matrix.identity(f, 2), _cycle(f, n)),
    }
    eye = Matrix.identity(f, n)
    split = Matrix(f, eye.rows + (-eye).rows)  # [I_n; -I_n]
    for name, rk in spec.heavy:
        b = spec.B.get(name)
        if b is None:
            raise ValueError(f"no B matrix for {name!r}")
        if b.shape != (n ** rk, n):
            raise ValueError(f"B({name}) must be {n ** rk}x{n}, got {b.nrows}x{b.ncols}")
        trans[name] = kron(Matrix.vector(f, [1, 1]), kron_all([split] * rk, f) @ b)
    final = kron(Matrix.column(f, [1, 0]), e1.T)
    return Mta(f, spec.alphabet, 2 * n, trans, final)


def classify(spec: HardFamilySpec, t: Union[Tree, Dag]):
    """('chain', j), ('heavy', name, (i1, .., ik), j) or ('multi',) for 2+ heavy nodes."""
    heavy_names = {h for h, _ in spec.heavy}
    counts = (dag_stats(t) if isinstance(t, Dag) else stats(t)).counts
    for label in counts:
        if label not in (spec.nullary, spec.unary) and label not in heavy_names:
            raise ValueError(f"symbol {label!r} is not in the family's alphabet")
    if sum(counts.get(h, 0) for h in heavy_names) >= 2:
        return ("multi",)

    def chain(u):
        j = 0
        while u.label == spec.unary:
            j += 1
            (u,) = u.children
        return j, u

    j, u = chain(t)
    if u.label == spec.nullary:
        return ("chain", j)
    idx = []
    for c in u.children:
        idx.append(chain(c)[0])
    return ("heavy", u.label, tuple(idx), j)


def entry_of(spec: HardFamilySpec, shape) -> tuple:
    """0-based (symbol, rows, column) of the B entry a single-heavy tree reads."""
    _, name, idx, j = shape
    n = spec.n
    return name, tuple(i % n for i in idx), (n - j % n) % n


def hard_series_value(spec: HardFamilySpec, t: Union[Tree, Dag]):
    """Closed-form value of the family member given by ``spec.B``."""
    shape = classify(spec, t)
    f = spec.field
    if shape[0] == "multi":
        return f.zero
    if shape[0] == "chain":
        return f.one if shape[1] % spec.n == 0 else f.zero
    name, rows, col = entry_of(spec, shape)
    rk = len(rows)
    return spec.B[name][flatten_index(rows, [spec.n] * rk), col]


def counterexample_tree(spec: HardFamilySpec, name: str, rows: tuple, col: int,
                        pool: Optional[DagPool] = None) -> Dag:
    """s1^(1+n-j)(sigma(s1^(i1-1)(s0), ...)) for the 1-based entry (i.., j) = (rows+1, col+1)."""
    pool = pool or DagPool()

    def chain(j, g):
        for _ in range(j):
            g = pool.node(spec.unary, [g])
        return g

    leaf = pool.leaf(spec.nullary)
    kids = [chain(i, leaf) for i in rows]
    return chain(1 + spec.n - (col + 1), pool.node(name, kids))


class AdversarialTeacher:
    """Answers without a fixed B: each unknown entry is drawn when first needed.

    Membership on a single-heavy tree reveals (draws and records) one entry;
    every other tree has a value common to the whole family.  An equivalence
    query names the first unrevealed entry (symbol order, then rows and column
    lexicographically), fixes its value to differ from the hypothesis, and
    returns the tree that reads it.  Once every entry is fixed, equivalence is
    answered truthfully against the committed automaton.
    """

    def __init__(self, spec: HardFamilySpec, seed: int = 0, lo: int = 1, hi: int = 9):
        self.spec = spec
        self.field = spec.field
        self.alphabet = spec.alphabet
        self.rng = random.Random(seed)
        self.lo, self.hi = lo, hi
        self.revealed: dict = {}
        self.pool = DagPool()
        self.membership_count = 0
        self.equivalence_count = 0

    def _draw(self, avoid=None):
        while True:
            v = self.field(self.rng.randint(self.lo, self.hi))
            if avoid is None or v != avoid:
                return v

    def membership(self, g: Union[Tree, Dag]):
        self.membership_count += 1
        shape = classify(self.spec, g)
        if shape[0] == "multi":
            return self.field.zero
        if shape[0] == "chain":
            return self.field.one if shape[1] % self.spec.n == 0 else self.field.zero
        key = entry_of(self.spec, shape)
        if key not in self.revealed:
            self.revealed[key] = self._draw()
        return self.revealed[key]

    def committed_spec(self) -> HardFamilySpec:
        """The family member with every revealed entry filled in (unrevealed entries are 0)."""
        n = self.spec.n
        B = {}
        for name, rk in self.spec.heavy:
            rows = [[self.field.zero] * n for _ in range(n ** rk)]
            for (s, idx, col), v in self.revealed.items():
                if s == name:
                    rows[flatten_index(idx, [n] * rk)][col] = v
            B[name] = Matrix(self.field, rows)
        sp = self.spec
        return HardFamilySpec(sp.n, sp.heavy, B, sp.field, sp.nullary, sp.unary, sp.seed)

    def all_revealed(self) -> bool:
        return len(self.revealed) == self.spec.entry_count()

    def equivalence(self, h: Mta) -> Optional[Dag]:
        self.equivalence_count += 1
        for key in self.spec.entries():
            if key not in self.revealed:
                z = counterexample_tree(self.spec, *key, pool=self.pool)
                self.revealed[key] = self._draw(avoid=h.weight(z))
                return z
        res = check_equiv(build_hard_automaton(self.committed_spec()), h, self.pool)
        return None if res.equivalent else res.counterexample


def adversarial_teacher(spec: HardFamilySpec, seed: int = 0) -> AdversarialTeacher:
    return AdversarialTeacher(spec, seed)


def query_lower_bound(spec: HardFamilySpec) -> int:
    """floor((sum_sigma r**(rk+1) - r**2 - r) / 2**(m+1)) with r = 2n, clamped at 0."""
    r = spec.dim
    alphabet = spec.alphabet
    m = alphabet.max_rank
    total = sum(r ** (rk + 1) for _, rk in alphabet) - r * r - r
    return max(0, total // 2 ** (m + 1))
