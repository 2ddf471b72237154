"""Exact scalars, dense matrices, Kronecker products and row-space elimination.

Two fields are supported: the rationals (backed by :class:`fractions.Fraction`)
and prime fields GF(p) (backed by :class:`Residue`).  Every :class:`Matrix`
carries its field explicitly and refuses to combine with a matrix over a
different field.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product as cartesian
from typing import Iterable, Optional, Sequence

from .errors import FieldMismatch, FormatError, LinAlgError, ShapeError

__all__ = [
    "Field", "RationalField", "PrimeField", "Residue", "QQ", "GF", "field_from_tag",
    "is_prime", "Matrix", "kron", "kron_all", "RowBasis", "express_in_basis",
    "solve_row_equation", "rank", "flatten_index",
]


# ---------------------------------------------------------------------------
# primality

_SMALL_LIMIT = 1 << 20
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Trial division below 2**20, Miller-Rabin with a fixed witness set above.

    The witness set is deterministic for every n < 3.3 * 10**24.
    """
    if n < 2:
        return False
    if n < _SMALL_LIMIT:
        if n % 2 == 0:
            return n == 2
        d = 3
        while d * d <= n:
            if n % d == 0:
                return False
            d += 2
        return True
    for p in _MR_WITNESSES:
        if n % p == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


# ---------------------------------------------------------------------------
# fields

class Field:
    """A field of scalars.  Calling the field converts an int or string."""

    tag: str

    def __call__(self, x):
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def contains(self, x) -> bool:
        raise NotImplementedError

    def parse(self, token: str):
        raise NotImplementedError

    def format(self, x) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"<field {self.tag}>"


class RationalField(Field):
    tag = "q"

    def __call__(self, x):
        if isinstance(x, Fraction):
            return x
        if isinstance(x, int):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, Residue):
            raise FieldMismatch(f"cannot use {x!r} as a rational")
        raise TypeError(f"cannot convert {type(x).__name__} to a rational")

    def contains(self, x) -> bool:
        return isinstance(x, Fraction)

    def parse(self, token: str) -> Fraction:
        num, sep, den = token.partition("/")
        try:
            n = int(num)
            d = int(den) if sep else 1
        except ValueError:
            raise ValueError(f"malformed rational {token!r}") from None
        if d == 0:
            raise ValueError(f"zero denominator in {token!r}")
        return Fraction(n, d)

    def format(self, x) -> str:
        x = self(x)
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"


QQ = RationalField()


class Residue:
    """An element of GF(p)."""

    __slots__ = ("value", "field")

    def __init__(self, value: int, field: "PrimeField"):
        self.value = value % field.p
        self.field = field

    def _coerce(self, other):
        if isinstance(other, Residue):
            if other.field.p != self.field.p:
                raise FieldMismatch(f"GF({self.field.p}) vs GF({other.field.p})")
            return other.value
        if isinstance(other, int) and not isinstance(other, bool):
            return other
        if isinstance(other, Fraction):
            raise FieldMismatch(f"GF({self.field.p}) vs rational {other}")
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.value + o, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.value - o, self.field)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(o - self.value, self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(self.value * o, self.field)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        o %= self.field.p
        if o == 0:
            raise ZeroDivisionError("division by zero in GF(%d)" % self.field.p)
        return Residue(self.value * pow(o, -1, self.field.p), self.field)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return Residue(o, self.field) / self

    def __neg__(self):
        return Residue(-self.value, self.field)

    def __pos__(self):
        return self

    def __bool__(self):
        return self.value != 0

    def __eq__(self, other):
        if isinstance(other, Residue):
            return self.field.p == other.field.p and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.field.p})"

    def __str__(self):
        return str(self.value)


class PrimeField(Field):
    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        self.p = p
        self.tag = f"fp:{p}"

    def __call__(self, x):
        if isinstance(x, Residue):
            if x.field.p != self.p:
                raise FieldMismatch(f"GF({x.field.p}) element used in GF({self.p})")
            return x
        if isinstance(x, int):
            return Residue(x, self)
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, Fraction):
            if x.denominator == 1:
                return Residue(x.numerator, self)
            raise FieldMismatch(f"rational {x} is not a GF({self.p}) element")
        raise TypeError(f"cannot convert {type(x).__name__} to GF({self.p})")

    def contains(self, x) -> bool:
        return isinstance(x, Residue) and x.field.p == self.p

    def parse(self, token: str) -> Residue:
        try:
            return Residue(int(token), self)
        except ValueError:
            raise ValueError(f"malformed residue {token!r}") from None

    def format(self, x) -> str:
        return str(self(x).value)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("fp", self.p))


@lru_cache(maxsize=None)
def GF(p: int) -> PrimeField:
    return PrimeField(p)


def field_from_tag(tag: str) -> Field:
    """Parse ``q`` or ``fp:<p>``."""
    if tag == "q":
        return QQ
    if tag.startswith("fp:"):
        try:
            p = int(tag[3:])
        except ValueError:
            raise ValueError(f"bad field tag {tag!r}") from None
        return GF(p)
    raise ValueError(f"unknown field {tag!r} (expected q or fp:<p>)")


# ---------------------------------------------------------------------------
# matrices

def flatten_index(index: Sequence[int], dims: Sequence[int]) -> int:
    """0-based position of the row tuple ``index`` under Kronecker flattening."""
    pos = 0
    for i, n in zip(index, dims):
        pos = pos * n + i
    return pos


class Matrix:
    """Immutable dense matrix over an exact field; vectors are 1xn or nx1."""

    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field: Field, rows: Iterable[Iterable], ncols: Optional[int] = None):
        conv = tuple(tuple(field(x) for x in r) for r in rows)
        if ncols is None:
            if not conv:
                raise ShapeError("ncols is required for a matrix with no rows")
            ncols = len(conv[0])
        for r in conv:
            if len(r) != ncols:
                raise ShapeError(f"ragged row: expected {ncols} entries, got {len(r)}")
        self.field = field
        self.nrows = len(conv)
        self.ncols = ncols
        self.rows = conv

    @classmethod
    def _make(cls, field, rows, ncols):
        m = object.__new__(cls)
        m.field = field
        m.rows = rows
        m.nrows = len(rows)
        m.ncols = ncols
        return m

    @classmethod
    def zeros(cls, field, nrows, ncols):
        z = field.zero
        return cls._make(field, tuple((z,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def identity(cls, field, n):
        z, o = field.zero, field.one
        return cls._make(field, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n)), n)

    @classmethod
    def vector(cls, field, values):
        """Row vector (1xn)."""
        vals = tuple(field(x) for x in values)
        return cls._make(field, (vals,), len(vals))

    @classmethod
    def column(cls, field, values):
        """Column vector (nx1)."""
        return cls._make(field, tuple((field(x),) for x in values), 1)

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i) -> "Matrix":
        return Matrix._make(self.field, (self.rows[i],), self.ncols)

    def col(self, j) -> "Matrix":
        return Matrix._make(self.field, tuple((r[j],) for r in self.rows), 1)

    def entries(self) -> list:
        """Row-major flat list of entries."""
        return [x for r in self.rows for x in r]

    def transpose(self) -> "Matrix":
        cols = tuple(zip(*self.rows)) if self.nrows else tuple(() for _ in range(self.ncols))
        return Matrix._make(self.field, cols, self.nrows)

    T = property(transpose)

    def _check(self, other):
        if not isinstance(other, Matrix):
            raise TypeError(f"expected Matrix, got {type(other).__name__}")
        if other.field != self.field:
            raise FieldMismatch(f"{self.field.tag} matrix combined with {other.field.tag} matrix")

    def __matmul__(self, other: "Matrix") -> "Matrix":
        self._check(other)
        if self.ncols != other.nrows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        z = self.field.zero
        orows = other.rows
        out = []
        for r in self.rows:
            acc = [z] * other.ncols
            for a, orow in zip(r, orows):
                if a:
                    for j, b in enumerate(orow):
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return Matrix._make(self.field, tuple(out), other.ncols)

    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot add {self.shape} and {other.shape}")
        return Matrix._make(self.field, tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.ncols)

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ShapeError(f"cannot subtract {self.shape} and {other.shape}")
        return Matrix._make(self.field, tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)), self.ncols)

    def __neg__(self):
        return Matrix._make(self.field, tuple(tuple(-a for a in r) for r in self.rows), self.ncols)

    def scale(self, c) -> "Matrix":
        c = self.field(c)
        return Matrix._make(self.field, tuple(tuple(c * a for a in r) for r in self.rows), self.ncols)

    def is_zero(self) -> bool:
        return not any(x for r in self.rows for x in r)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.nrows, self.ncols, self.rows))

    def __repr__(self):
        fmt = self.field.format
        body = "; ".join(" ".join(fmt(x) for x in r) for r in self.rows)
        return f"Matrix[{self.field.tag}]({self.nrows}x{self.ncols}: {body})"

    def tolist(self) -> list:
        return [list(r) for r in self.rows]


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; row (i1, i2) is flattened to i1 * b.nrows + i2."""
    a._check(b)
    rows = []
    for ra in a.rows:
        for rb in b.rows:
            rows.append(tuple(x * y for x in ra for y in rb))
    return Matrix._make(a.field, tuple(rows), a.ncols * b.ncols)


def kron_all(mats: Sequence[Matrix], field: Field = None) -> Matrix:
    """Left-to-right Kronecker product; the empty product is I_1."""
    if not mats:
        if field is None:
            raise ValueError("field is required for an empty Kronecker product")
        return Matrix.identity(field, 1)
    out = mats[0]
    for m in mats[1:]:
        out = kron(out, m)
    return out


# ---------------------------------------------------------------------------
# elimination

class RowBasis:
    """Linearly independent rows with an incrementally maintained echelon form.

    Each echelon entry is ``(pivot, reduced_row, combo)`` where
    ``reduced_row = combo . rows``, ``reduced_row[pivot] == 1`` and the row is
    zero at every earlier pivot.  Reduction walks the entries in insertion order.
    """

    def __init__(self, field: Field, width: int, rows: Iterable = ()):
        self.field = field
        self.width = width
        self.rows: list[tuple] = []
        self._echelon: list[tuple[int, list, list]] = []
        self.ops = 0
        for r in rows:
            if not self.add(r):
                raise LinAlgError("rows are linearly dependent")

    def __len__(self):
        return len(self.rows)

    @property
    def pivots(self) -> list[int]:
        return [p for p, _, _ in self._echelon]

    def _values(self, v) -> list:
        if isinstance(v, Matrix):
            if v.field != self.field:
                raise FieldMismatch(f"{v.field.tag} vector against {self.field.tag} basis")
            if v.nrows != 1:
                raise ShapeError(f"expected a row vector, got {v.shape}")
            v = v.rows[0]
        vals = [self.field(x) for x in v]
        if len(vals) != self.width:
            raise ShapeError(f"vector of length {len(vals)} against basis of width {self.width}")
        return vals

    def _reduce(self, vals: list) -> tuple[list, list]:
        """Return ``(residual, coeffs)`` with ``vals = coeffs . rows + residual``."""
        z = self.field.zero
        res = list(vals)
        coeffs = [z] * len(self.rows)
        for p, erow, combo in self._echelon:
            a = res[p]
            if not a:
                continue
            for j in range(p, self.width):
                e = erow[j]
                if e:
                    res[j] -= a * e
                    self.ops += 1
            for i, c in enumerate(combo):
                if c:
                    coeffs[i] += a * c
                    self.ops += 1
        return res, coeffs

    def express(self, v) -> Optional[list]:
        """Coefficients c with c . rows == v, or None if v is outside the span."""
        res, coeffs = self._reduce(self._values(v))
        if any(res):
            return None
        return coeffs

    def contains(self, v) -> bool:
        return self.express(v) is not None

    def add(self, v) -> bool:
        """Append v if it is independent of the current rows; report whether it was."""
        vals = self._values(v)
        res, coeffs = self._reduce(vals)
        pivot = next((j for j, x in enumerate(res) if x), None)
        if pivot is None:
            return False
        inv = self.field.one / res[pivot]
        erow = [x * inv for x in res]
        combo = [-c * inv for c in coeffs] + [inv]
        self.rows.append(tuple(vals))
        self._echelon.append((pivot, erow, combo))
        return True

    def matrix(self) -> Matrix:
        return Matrix._make(self.field, tuple(self.rows), self.width)


def rank(m: Matrix) -> int:
    basis = RowBasis(m.field, m.ncols)
    return sum(1 for r in m.rows if basis.add(r))


def express_in_basis(v: Matrix, basis) -> Optional[Matrix]:
    """Coefficient row vector c with c . rows(basis) = v, or None outside the span.

    ``basis`` is a :class:`RowBasis` or a matrix whose rows are independent.
    """
    if isinstance(basis, Matrix):
        basis = RowBasis(basis.field, basis.ncols, basis.rows)
    coeffs = basis.express(v)
    if coeffs is None:
        return None
    return Matrix._make(basis.field, (tuple(coeffs),), len(basis.rows))


def solve_row_equation(h_xy: Matrix, targets: Matrix) -> Matrix:
    """The unique M with ``M @ h_xy == targets`` for a full-row-rank ``h_xy``."""
    h_xy._check(targets)
    if targets.ncols != h_xy.ncols:
        raise ShapeError(f"targets have {targets.ncols} columns, system has {h_xy.ncols}")
    try:
        basis = RowBasis(h_xy.field, h_xy.ncols, h_xy.rows)
    except LinAlgError:
        raise LinAlgError("system matrix does not have full row rank") from None
    out = []
    for i, r in enumerate(targets.rows):
        c = basis.express(r)
        if c is None:
            raise LinAlgError(f"target row {i} lies outside the row space")
        out.append(tuple(c))
    return Matrix._make(h_xy.field, tuple(out), h_xy.nrows)


def coordinate_tuples(n: int, k: int):
    """All k-tuples over range(n) in lexicographic (= Kronecker row) order."""
    return cartesian(range(n), repeat=k)


def parse_scalar(field: Field, token: str, line=None, col=None, source=None):
    try:
        return field.parse(token)
    except ValueError as exc:
        raise FormatError(str(exc), line, col, source) from None
