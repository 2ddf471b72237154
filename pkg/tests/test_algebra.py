from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mtalearn.algebra import (GF, QQ, Matrix, RowBasis, express_in_basis, field_from_tag, flatten_index,
                              is_prime, kron, kron_all, rank, solve_row_equation)
from mtalearn.errors import FieldMismatch, LinAlgError, ShapeError

import oracles

small = st.integers(-4, 4)


def mat(rows, field=QQ):
    return Matrix(field, rows)


def matrices(r, c):
    return st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)


def test_kron_identity_and_vectors():
    a = mat([[1, 2, 3], [4, 5, 6]])
    assert kron(Matrix.identity(QQ, 1), a) == a
    assert kron(mat([[1, 0]]), mat([[0, 1]])) == mat([[0, 1, 0, 0]])


def test_kron_worked_example():
    a = mat([[1, 2], [0, 1]])
    b = mat([[1, 0], [1, 1]])
    expected = [[1, 0, 2, 0], [1, 1, 2, 2], [0, 0, 1, 0], [0, 0, 1, 1]]
    assert kron(a, b) == mat(expected)
    assert kron(a, b).tolist() == oracles.kron(a.tolist(), b.tolist())


@given(matrices(2, 3), matrices(3, 2))
def test_kron_matches_entry_law(a, b):
    assert kron(mat(a), mat(b)).tolist() == oracles.kron(a, b)


@given(matrices(2, 2), matrices(2, 2), matrices(2, 2), matrices(2, 2))
def test_mixed_product(a, b, c, d):
    A, B, C, D = map(mat, (a, b, c, d))
    assert kron(A, B) @ kron(C, D) == kron(A @ C, B @ D)


@given(st.integers(1, 3), st.data())
def test_k_fold_mixed_product(k, data):
    As = [mat(data.draw(matrices(2, 2))) for _ in range(k)]
    Bs = [mat(data.draw(matrices(2, 2))) for _ in range(k)]
    assert kron_all(As) @ kron_all(Bs) == kron_all([a @ b for a, b in zip(As, Bs)])


def test_kron_all_empty_is_one():
    assert kron_all([], QQ) == Matrix.identity(QQ, 1)


def test_flatten_index_row_major():
    assert flatten_index((1, 0, 1), (2, 2, 2)) == 5
    assert flatten_index((), ()) == 0


def test_express_examples():
    basis = RowBasis(QQ, 2, [(1, 0), (1, 1)])
    assert basis.express((0, 0)) == [0, 0]
    assert basis.express((1, 0)) == [1, 0]
    assert basis.express((2, 3)) == [-1, 3]
    assert oracles.solve2([(1, 0), (1, 1)], (2, 3)) == [-1, 3]
    c = express_in_basis(Matrix.vector(QQ, [2, 3]), mat([[1, 0], [1, 1]]))
    assert c == mat([[-1, 3]])


def test_express_outside_span():
    basis = RowBasis(QQ, 3, [(1, 0, 0)])
    assert basis.express((0, 1, 0)) is None
    assert not basis.contains((0, 1, 0))


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4), st.lists(small, min_size=3, max_size=3))
def test_express_iff_rank_unchanged(rows, v):
    basis = RowBasis(QQ, 3)
    kept = [r for r in rows if basis.add(r)]
    coeffs = basis.express(v)
    same_rank = oracles.rank(kept + [v]) == oracles.rank(kept)
    assert (coeffs is not None) == same_rank
    if coeffs is not None:
        assert [sum(c * r[j] for c, r in zip(coeffs, kept)) for j in range(3)] == v


@given(matrices(3, 4))
def test_rank_matches_oracle(rows):
    assert rank(mat(rows)) == oracles.rank(rows)


def test_solve_row_equation_examples():
    eye = Matrix.identity(QQ, 3)
    t = mat([[1, 2, 3], [4, 5, 6]])
    assert solve_row_equation(eye, t) == t
    assert solve_row_equation(mat([[2]]), mat([[6]])) == mat([[3]])
    assert solve_row_equation(mat([[1, 0], [1, 1]]), mat([[2, 3]])) == mat([[-1, 3]])


def test_solve_row_equation_errors():
    with pytest.raises(LinAlgError):
        solve_row_equation(mat([[1, 0], [2, 0]]), mat([[1, 0]]))
    with pytest.raises(LinAlgError):
        solve_row_equation(mat([[1, 0, 0]]), mat([[0, 1, 0]]))


@given(st.fractions(max_denominator=20), st.fractions(max_denominator=20))
def test_rationals_stay_normalized(x, y):
    for v in (x + y, x - y, x * y) + ((x / y,) if y else ()):
        assert QQ.contains(v)
        assert v == Fraction(v.numerator, v.denominator)
        assert QQ.parse(QQ.format(v)) == v


def test_prime_field_arithmetic():
    f = GF(7)
    assert f(3) * f(5) == f(1)
    assert f(3) / f(5) * f(5) == f(3)
    assert -f(2) == f(5)
    assert f.format(f(-1)) == "6"


def test_field_tags_and_mismatch():
    assert field_from_tag("q") is QQ
    assert field_from_tag("fp:13") == GF(13)
    with pytest.raises(ValueError):
        field_from_tag("fp:15")
    with pytest.raises(ValueError):
        field_from_tag("real")
    with pytest.raises(FieldMismatch):
        Matrix.identity(QQ, 2) @ Matrix.identity(GF(5), 2)
    with pytest.raises(ShapeError):
        Matrix.identity(QQ, 2) @ Matrix.identity(QQ, 3)


def test_is_prime():
    small_primes = [p for p in range(2, 200) if all(p % d for d in range(2, p))]
    assert [p for p in range(200) if is_prime(p)] == small_primes
    assert is_prime(2**61 - 1)
    assert not is_prime(2**61 + 1)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7
