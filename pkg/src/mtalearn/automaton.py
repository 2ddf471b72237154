"""Multiplicity tree automata: evaluation on trees, DAGs and contexts, products.

An automaton of dimension n assigns to every symbol of rank k a matrix with
n**k rows and n columns.  A run maps a tree to a row vector of length n:

    mu(sigma(t1, ..., tk)) = (mu(t1) (x) ... (x) mu(tk)) . mu(sigma)

and the weight is mu(t) . final.  Rows of a rank-k matrix are indexed by
k-tuples of states flattened row-major, 0-based.
"""

from __future__ import annotations

from collections import Counter
from itertools import product as cartesian
from typing import Mapping, Optional, Union

from .algebra import Field, Matrix, PrimeField, QQ, field_from_tag, flatten_index, parse_scalar
from .errors import FieldMismatch, FormatError, ShapeError
from .trees import (HOLE, Dag, NotAContext, RankedAlphabet, Tree,
                    _tokens)


class Mta:
    """An n-dimensional automaton (n, alphabet, transitions, final) over an exact field."""

    def __init__(self, field: Field, alphabet: RankedAlphabet, dim: int,
                 transitions: Mapping[str, object], final):
        if dim < 0:
            raise ValueError("dimension must be non-negative")
        self.field = field
        self.alphabet = alphabet
        self.dim = dim
        trans = {}
        for name, rk in alphabet:
            if name not in transitions:
                raise ShapeError(f"missing transition matrix for {name!r}")
            m = transitions[name]
            if not isinstance(m, Matrix):
                m = Matrix(field, m, ncols=dim)
            elif m.field != field:
                raise FieldMismatch(f"transition {name!r} is over {m.field.tag}, automaton over {field.tag}")
            if m.shape != (dim ** rk, dim):
                raise ShapeError(f"transition {name!r} must be {dim ** rk}x{dim}, got {m.nrows}x{m.ncols}")
            trans[name] = m
        extra = set(transitions) - set(trans)
        if extra:
            raise ShapeError(f"transitions for symbols outside the alphabet: {sorted(extra)}")
        self.transitions = trans
        if not isinstance(final, Matrix):
            final = Matrix.column(field, final)
        elif final.field != field:
            raise FieldMismatch("final vector over a different field")
        if final.shape != (dim, 1):
            raise ShapeError(f"final vector must be {dim}x1, got {final.nrows}x{final.ncols}")
        self.final = final
        self._gamma = tuple(r[0] for r in final.rows)

    @property
    def size(self) -> int:
        """Total number of entries: sum over symbols of n**(rk+1), plus n."""
        n = self.dim
        return sum(n ** (rk + 1) for _, rk in self.alphabet) + n

    def mu(self, symbol: str) -> Matrix:
        return self.transitions[symbol]

    def __eq__(self, other):
        if not isinstance(other, Mta):
            return NotImplemented
        return (self.field == other.field and self.alphabet == other.alphabet and self.dim == other.dim
                and self.transitions == other.transitions and self.final == other.final)

    def __repr__(self):
        return f"Mta(dim={self.dim}, field={self.field.tag}, alphabet={self.alphabet})"

    # -- evaluation --------------------------------------------------------

    def _sparse(self, symbol: str) -> list:
        cache = self.__dict__.setdefault("_sparse_rows", {})
        rows = cache.get(symbol)
        if rows is None:
            rows = [[(j, y) for j, y in enumerate(r) if y] for r in self.transitions[symbol].rows]
            cache[symbol] = rows
        return rows

    def apply(self, symbol: str, children: list[tuple]) -> tuple:
        """(v1 (x) ... (x) vk) . mu(symbol) without forming the Kronecker product."""
        rows = self._sparse(symbol)
        n = self.dim
        acc = [self.field.zero] * n
        if not children:
            for j, y in rows[0]:
                acc[j] = y
            return tuple(acc)
        supports = [[(i, x) for i, x in enumerate(v) if x] for v in children]
        for combo in cartesian(*supports):
            (pos, coef), rest = combo[0], combo[1:]
            for i, x in rest:
                coef = coef * x
                pos = pos * n + i
            for j, y in rows[pos]:
                acc[j] += coef * y
        return tuple(acc)

    def dot_final(self, v: tuple):
        z = self.field.zero
        for x, g in zip(v, self._gamma):
            if x and g:
                z += x * g
        return z

    def weight(self, t: Union[Tree, Dag]):
        form = self._int_form()
        if form is not None:
            if isinstance(t, Dag):
                return self.field(_int_weight_dag(self, form, t))
            return self.field(_int_weight_tree(self, form, t))
        if isinstance(t, Dag):
            return self.dot_final(run_nodes(self, t)[t.root])
        return self.dot_final(run_tree(self, t))

    def _int_form(self):
        """Sparse rows, final vector and modulus over plain ints, or None.

        Available over GF(p) and over Q when every entry is an integer; plain
        int arithmetic is several times faster than Fraction or Residue.
        """
        if "_int_cache" in self.__dict__:
            return self._int_cache
        form = None
        entries = [x for m in self.transitions.values() for r in m.rows for x in r] + list(self._gamma)
        if isinstance(self.field, PrimeField):
            conv, mod = (lambda x: x.value), self.field.p
        elif self.field == QQ and all(x.denominator == 1 for x in entries):
            conv, mod = (lambda x: x.numerator), None
        else:
            conv = None
        if conv is not None:
            rows = {name: [[(j, conv(y)) for j, y in enumerate(r) if y] for r in m.rows]
                    for name, m in self.transitions.items()}
            form = (rows, [conv(g) for g in self._gamma], mod)
        self._int_cache = form
        return form


def _int_apply(rows, n, children, mod):
    acc = [0] * n
    k = len(children)
    if k == 0:
        for j, y in rows[0]:
            acc[j] = y
    elif k == 1:
        for i, x in enumerate(children[0]):
            if x:
                for j, y in rows[i]:
                    acc[j] += x * y
    elif k == 2:
        right = [(i, x) for i, x in enumerate(children[1]) if x]
        for i1, x1 in enumerate(children[0]):
            if x1:
                base = i1 * n
                for i2, x2 in right:
                    c = x1 * x2
                    for j, y in rows[base + i2]:
                        acc[j] += c * y
    else:
        supports = [[(i, x) for i, x in enumerate(v) if x] for v in children]
        for combo in cartesian(*supports):
            (pos, coef), rest = combo[0], combo[1:]
            for i, x in rest:
                coef *= x
                pos = pos * n + i
            for j, y in rows[pos]:
                acc[j] += coef * y
    if mod is not None:
        acc = [x % mod for x in acc]
    return acc


def _int_dot(v, gamma, mod):
    s = sum(x * g for x, g in zip(v, gamma))
    return s % mod if mod is not None else s


def _int_appliers(a: Mta, form) -> dict:
    """Per-symbol closures child vectors -> run vector, specialised by rank."""
    cached = a.__dict__.get("_int_appliers")
    if cached is not None:
        return cached
    rows, _, mod = form
    n = a.dim
    out = {}
    for name, rk in a.alphabet:
        r = rows[name]
        if rk == 0:
            leaf = [0] * n
            for j, y in r[0]:
                leaf[j] = y % mod if mod is not None else y
            out[name] = (rk, lambda kids, leaf=leaf: leaf)
        elif rk == 1 and mod is None:
            def apply1(kids, r=r):
                acc = [0] * n
                for i, x in enumerate(kids[0]):
                    if x:
                        for j, y in r[i]:
                            acc[j] += x * y
                return acc
            out[name] = (rk, apply1)
        elif rk == 2 and mod is None:
            def apply2(kids, r=r):
                acc = [0] * n
                left, right = kids
                for i1, x1 in enumerate(left):
                    if x1:
                        base = i1 * n
                        for i2, x2 in enumerate(right):
                            if x2:
                                c = x1 * x2
                                for j, y in r[base + i2]:
                                    acc[j] += c * y
                return acc
            out[name] = (rk, apply2)
        else:
            out[name] = (rk, lambda kids, r=r: _int_apply(r, n, kids, mod))
    a.__dict__["_int_appliers"] = out
    return out


def _int_weight_tree(a: Mta, form, t: Tree) -> int:
    _, gamma, mod = form
    appliers = _int_appliers(a, form)

    def go(u):
        kids = u.children
        rk, fn = appliers.get(u.label, (None, None))
        if rk != len(kids):
            raise ValueError(f"symbol {u.label!r}/{len(kids)} is not in the alphabet")
        return fn([go(c) for c in kids]) if kids else fn(())

    return _int_dot(go(t), gamma, mod)


def _int_weight_dag(a: Mta, form, g: Dag) -> int:
    _, gamma, mod = form
    appliers = _int_appliers(a, form)
    labels, succs = g.pool.labels, g.pool.succs
    out: dict[int, list] = {}
    for v in g.nodes():
        succ = succs[v]
        rk, fn = appliers.get(labels[v], (None, None))
        if rk != len(succ):
            raise ValueError(f"symbol {labels[v]!r}/{len(succ)} is not in the alphabet")
        out[v] = fn([out[s] for s in succ])
    return _int_dot(out[g.root], gamma, mod)


def run_tree(a: Mta, t: Tree) -> tuple:
    """mu(t) on an explicit tree, by plain recursion."""
    if t.label not in a.alphabet or a.alphabet.rank(t.label) != len(t.children):
        raise ValueError(f"symbol {t.label!r}/{len(t.children)} is not in the alphabet")
    return a.apply(t.label, [run_tree(a, c) for c in t.children])


def run_nodes(a: Mta, g: Dag, audit: Optional[Counter] = None) -> dict[int, tuple]:
    """mu at every node reachable from the root; each node is evaluated once."""
    pool = g.pool
    out: dict[int, tuple] = {}
    alphabet = a.alphabet
    for v in g.nodes():
        label = pool.labels[v]
        succ = pool.succs[v]
        if label not in alphabet or alphabet.rank(label) != len(succ):
            raise ValueError(f"symbol {label!r}/{len(succ)} is not in the alphabet")
        out[v] = a.apply(label, [out[s] for s in succ])
        if audit is not None:
            audit[v] += 1
    return out


def run_dag(a: Mta, g: Dag, audit: Optional[Counter] = None) -> Matrix:
    return Matrix._make(a.field, (run_nodes(a, g, audit)[g.root],), a.dim)


def weight(a: Mta, t: Union[Tree, Dag]):
    return a.weight(t)


def mu_tree(a: Mta, t: Union[Tree, Dag]) -> Matrix:
    v = run_nodes(a, t)[t.root] if isinstance(t, Dag) else run_tree(a, t)
    return Matrix._make(a.field, (v,), a.dim)


def mu_context(a: Mta, c: Dag) -> Matrix:
    """The n x n matrix M with mu(c[t]) = mu(t) . M for every tree t."""
    if not c.is_context:
        raise NotAContext("expected a context DAG with exactly one hole occurrence")
    pool = c.pool
    n = a.dim
    field = a.field
    vecs: dict[int, tuple] = {}
    mats: dict[int, list[tuple]] = {}
    for v in c.nodes():
        label = pool.labels[v]
        succ = pool.succs[v]
        if label == HOLE:
            mats[v] = [tuple(field.one if i == j else field.zero for j in range(n)) for i in range(n)]
            continue
        if label not in a.alphabet or a.alphabet.rank(label) != len(succ):
            raise ValueError(f"symbol {label!r}/{len(succ)} is not in the alphabet")
        path = [j for j, s in enumerate(succ) if s in mats]
        if not path:
            vecs[v] = a.apply(label, [vecs[s] for s in succ])
            continue
        (j,) = path  # exactly one hole occurrence below
        below = mats[succ[j]]
        rows = []
        for vec in below:
            kids = [vecs[s] if i != j else vec for i, s in enumerate(succ)]
            rows.append(a.apply(label, kids))
        mats[v] = rows
    return Matrix._make(field, tuple(mats[c.root]), n)


# ---------------------------------------------------------------------------
# constructions

def _check_compatible(a: Mta, b: Mta):
    if a.field != b.field:
        raise FieldMismatch(f"automata over {a.field.tag} and {b.field.tag}")
    if a.alphabet != b.alphabet:
        raise ValueError(f"alphabets differ: {a.alphabet} vs {b.alphabet}")


def product(a: Mta, b: Mta) -> Mta:
    """Automaton recognising the pointwise product of the two series.

    State (i, j) is flattened to i * b.dim + j.  Row ((i1,j1), ..., (ik,jk)) of
    the product transition is the Kronecker product of row (i1..ik) of a's
    matrix with row (j1..jk) of b's matrix.
    """
    _check_compatible(a, b)
    n1, n2 = a.dim, b.dim
    field = a.field
    trans = {}
    for name, rk in a.alphabet:
        ra, rb = a.mu(name).rows, b.mu(name).rows
        rows = []
        for pairs in cartesian(cartesian(range(n1), range(n2)), repeat=rk):
            i = flatten_index([p for p, _ in pairs], [n1] * rk)
            j = flatten_index([q for _, q in pairs], [n2] * rk)
            rows.append(tuple(x * y for x in ra[i] for y in rb[j]))
        trans[name] = Matrix._make(field, tuple(rows), n1 * n2)
    final = Matrix.column(field, [x * y for x in a._gamma for y in b._gamma])
    return Mta(field, a.alphabet, n1 * n2, trans, final)


def direct_sum(a: Mta, b: Mta, negate_second: bool = True) -> Mta:
    """Block-diagonal automaton of dimension n1 + n2 with final [g1; -g2].

    Its run vector on t is [mu_a(t), mu_b(t)], so its weight is a(t) - b(t).
    """
    _check_compatible(a, b)
    n1, n2 = a.dim, b.dim
    n = n1 + n2
    field = a.field
    z = field.zero
    trans = {}
    for name, rk in a.alphabet:
        ra, rb = a.mu(name).rows, b.mu(name).rows
        rows = []
        for tup in cartesian(range(n), repeat=rk):
            if rk == 0:
                row = ra[0] + rb[0]
            elif all(i < n1 for i in tup):
                row = ra[flatten_index(tup, [n1] * rk)] + (z,) * n2
            elif all(i >= n1 for i in tup):
                row = (z,) * n1 + rb[flatten_index([i - n1 for i in tup], [n2] * rk)]
            else:
                row = (z,) * n
            rows.append(row)
        trans[name] = Matrix._make(field, tuple(rows), n)
    g2 = [-x for x in b._gamma] if negate_second else list(b._gamma)
    return Mta(field, a.alphabet, n, trans, Matrix.column(field, list(a._gamma) + g2))


def zero_automaton(alphabet: RankedAlphabet, field: Field = QQ) -> Mta:
    """The 0-dimensional automaton; it recognises the zero series."""
    return Mta(field, alphabet, 0, {name: Matrix.zeros(field, 0 ** rk, 0) for name, rk in alphabet},
               Matrix.zeros(field, 0, 1))


def scale_final(a: Mta, c) -> Mta:
    return Mta(a.field, a.alphabet, a.dim, a.transitions, a.final.scale(c))


def change_field(a: Mta, field: Field) -> Mta:
    """Re-read every entry in another field (rationals must be integral for prime fields)."""
    trans = {name: Matrix(field, m.rows, ncols=a.dim) for name, m in a.transitions.items()}
    return Mta(field, a.alphabet, a.dim, trans, Matrix(field, a.final.rows, ncols=1))


# ---------------------------------------------------------------------------
# .mta text format

def format_mta(a: Mta) -> str:
    fmt = a.field.format
    lines = [f"mta {a.field.tag} {a.dim}"]
    for name, rk in a.alphabet:
        lines.append(f"sym {name} {rk}")
    for name, _ in a.alphabet:
        lines.append(f"trans {name}")
        for r in a.mu(name).rows:
            if r:
                lines.append(" ".join(fmt(x) for x in r))
    lines.append("final")
    if a.dim:
        lines.append(" ".join(fmt(x) for x in a._gamma))
    return "\n".join(lines) + "\n"


def parse_mta(text: str, source: Optional[str] = None, field: Optional[Field] = None) -> Mta:
    """Load a ``.mta`` file.  ``field`` overrides the header's field tag."""
    toks: list[tuple[str, int, int]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        toks.extend((tok, lineno, col) for tok, col in _tokens(line))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(toks):
            last = toks[-1] if toks else ("", 1, 1)
            raise FormatError(f"unexpected end of input, expected {what}", last[1], last[2], source)
        t = toks[pos]
        pos += 1
        return t

    def take_int(what):
        tok, line, col = take(what)
        try:
            v = int(tok)
        except ValueError:
            raise FormatError(f"expected {what}, got {tok!r}", line, col, source) from None
        if v < 0:
            raise FormatError(f"expected {what}, got {tok!r}", line, col, source)
        return v

    tok, line, col = take("'mta' header")
    if tok != "mta":
        raise FormatError(f"expected 'mta' header, got {tok!r}", line, col, source)
    tag, line, col = take("field tag")
    try:
        declared = field_from_tag(tag)
    except ValueError as exc:
        raise FormatError(str(exc), line, col, source) from None
    fld = field or declared
    n = take_int("dimension")

    symbols: list[tuple[str, int]] = []
    while pos < len(toks) and toks[pos][0] == "sym":
        take("sym")
        name, line, col = take("symbol name")
        rk = take_int("rank")
        if any(name == s for s, _ in symbols):
            raise FormatError(f"duplicate symbol {name!r}", line, col, source)
        symbols.append((name, rk))
    try:
        alphabet = RankedAlphabet(tuple(symbols))
    except ValueError as exc:
        line, col = (toks[pos][1], toks[pos][2]) if pos < len(toks) else (None, None)
        raise FormatError(str(exc), line, col, source) from None

    def scalars(count):
        out = []
        for _ in range(count):
            tok, line, col = take("scalar")
            if tok in ("trans", "final", "sym"):
                raise FormatError(f"expected scalar, got keyword {tok!r}", line, col, source)
            out.append(parse_scalar(fld, tok, line, col, source))
        return out

    trans = {}
    final = None
    while pos < len(toks):
        tok, line, col = take("'trans' or 'final'")
        if tok == "trans":
            name, nline, ncol = take("symbol name")
            if name not in alphabet:
                raise FormatError(f"transition for undeclared symbol {name!r}", nline, ncol, source)
            if name in trans:
                raise FormatError(f"duplicate transition for {name!r}", nline, ncol, source)
            rows = n ** alphabet.rank(name)
            vals = scalars(rows * n)
            trans[name] = Matrix._make(fld, tuple(tuple(vals[r * n:(r + 1) * n]) for r in range(rows)), n)
        elif tok == "final":
            if final is not None:
                raise FormatError("duplicate 'final' section", line, col, source)
            final = Matrix.column(fld, scalars(n))
        else:
            raise FormatError(f"expected 'trans' or 'final', got {tok!r}", line, col, source)
    missing = [s for s in alphabet.names if s not in trans]
    if missing:
        raise FormatError(f"missing transition for {missing[0]!r}", None, None, source)
    if final is None:
        raise FormatError("missing 'final' section", None, None, source)
    return Mta(fld, alphabet, n, trans, final)
