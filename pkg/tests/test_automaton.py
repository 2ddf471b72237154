import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from mtalearn.algebra import GF, QQ, Matrix, kron, kron_all
from mtalearn.automaton import (Mta, change_field, direct_sum, format_mta, mu_context, mu_tree, parse_mta,
                                product, run_dag, run_nodes, run_tree, scale_final, zero_automaton)
from mtalearn.errors import FieldMismatch, FormatError, ShapeError
from mtalearn.fixtures import (EXAMPLE_ALPHABET, RANK2_ALPHABET, SIZE_ALPHABET, example_automaton,
                               padded_size_automaton, random_mta, random_tree, size_automaton)
from mtalearn.trees import DagPool, T, all_trees, canonicalize, chain_dag, perfect_tree

import oracles

FAA = T("f", T("a"), T("a"))


def test_zero_dim_automaton_weighs_zero():
    z = zero_automaton(RANK2_ALPHABET)
    assert z.dim == 0 and z.size == 0
    for t in all_trees(RANK2_ALPHABET, 3):
        assert z.weight(t) == 0


def test_example_automaton_on_g3():
    a = example_automaton(3)
    pool = DagPool()
    assert a.weight(chain_dag(3, pool)) == 1
    assert a.weight(pool.leaf("s0")) == 0


def test_example_automaton_only_accepts_t_n():
    a = example_automaton(3)
    for t in all_trees(EXAMPLE_ALPHABET, 4):
        assert a.weight(t) == (1 if t == perfect_tree(3) else 0)


def test_size_automaton_run():
    a = size_automaton()
    assert run_tree(a, FAA) == (3, 1)
    assert a.weight(FAA) == 3
    for t in all_trees(SIZE_ALPHABET, 4):
        assert a.weight(t) == t.size


def test_size_automaton_as_size_formula():
    # n**(rk+1) per symbol plus n for the final vector
    assert size_automaton().size == 2 + 8 + 2
    assert random_mta(random.Random(0), RANK2_ALPHABET, 3).size == 3 + 9 + 27 + 3


def test_mu_context_examples():
    a = size_automaton()
    pool = DagPool()
    assert mu_context(a, pool.hole()) == Matrix.identity(QQ, 2)
    c = pool.node("f", [pool.hole(), pool.leaf("a")])
    m = mu_context(a, c)
    assert m == Matrix(QQ, [[1, 0], [2, 1]])
    # hand oracle: (I2 (x) mu(a)) . mu(f)
    assert m == kron(Matrix.identity(QQ, 2), a.mu("a")) @ a.mu("f")
    assert a.mu("a") @ m == mu_tree(a, FAA) == Matrix(QQ, [[3, 1]])


def test_mu_context_hole_on_the_right():
    a = size_automaton()
    pool = DagPool()
    c = pool.node("f", [pool.leaf("a"), pool.hole()])
    assert mu_context(a, c) == kron(a.mu("a"), Matrix.identity(QQ, 2)) @ a.mu("f")


def test_product_examples():
    a = size_automaton()
    p = product(a, a)
    assert p.dim == 4
    assert p.final == kron(a.final, a.final)
    assert p.weight(FAA) == 9
    z = zero_automaton(SIZE_ALPHABET)
    assert product(a, z).dim == 0


def test_product_needs_same_field_and_alphabet():
    with pytest.raises(FieldMismatch):
        product(size_automaton(), size_automaton(GF(5)))
    with pytest.raises(ValueError):
        product(size_automaton(), example_automaton(2))


@given(st.integers(0, 10**6))
def test_product_law(seed):
    rng = random.Random(seed)
    a = random_mta(rng, RANK2_ALPHABET, 2, fractions=True)
    b = random_mta(rng, RANK2_ALPHABET, rng.randint(1, 2))
    p = product(a, b)
    for _ in range(20):
        t = random_tree(rng, RANK2_ALPHABET, 3)
        assert p.weight(t) == a.weight(t) * b.weight(t)


@given(st.integers(0, 10**6))
def test_direct_sum_is_difference(seed):
    rng = random.Random(seed)
    a = random_mta(rng, RANK2_ALPHABET, rng.randint(0, 2))
    b = random_mta(rng, RANK2_ALPHABET, rng.randint(0, 2))
    d = direct_sum(a, b)
    s = direct_sum(a, b, negate_second=False)
    for _ in range(20):
        t = random_tree(rng, RANK2_ALPHABET, 3)
        assert d.weight(t) == a.weight(t) - b.weight(t)
        assert s.weight(t) == a.weight(t) + b.weight(t)


@given(st.integers(0, 10**6))
def test_weight_matches_index_oracle(seed):
    rng = random.Random(seed)
    a = random_mta(rng, RANK2_ALPHABET, rng.randint(1, 3), fractions=True)
    for _ in range(10):
        t = random_tree(rng, RANK2_ALPHABET, 3)
        assert a.weight(t) == oracles.tree_weight(a, t)


@given(st.integers(0, 10**6))
def test_mu_extension_two_ways(seed):
    rng = random.Random(seed)
    a = random_mta(rng, RANK2_ALPHABET, 2)
    t = T("f", random_tree(rng, RANK2_ALPHABET, 2), random_tree(rng, RANK2_ALPHABET, 2))
    kids = [mu_tree(a, c) for c in t.children]
    assert mu_tree(a, t) == kron_all(kids) @ a.mu("f")


def test_dag_and_tree_runs_agree_on_fast_and_exact_paths():
    rng = random.Random(11)
    pool = DagPool()
    for field, frac in ((QQ, False), (QQ, True), (GF(7), False)):
        a = random_mta(rng, RANK2_ALPHABET, 2, field=field, fractions=frac)
        for _ in range(30):
            t = random_tree(rng, RANK2_ALPHABET, 4)
            g = canonicalize(t, pool)
            exact = a.dot_final(run_nodes(a, g)[g.root])
            assert a.weight(g) == a.weight(t) == exact == a.dot_final(run_tree(a, t))


def test_run_dag_visits_each_node_once():
    a = example_automaton(12)
    g = chain_dag(12, DagPool())
    audit = Counter()
    v = run_dag(a, g, audit)
    assert sum(audit.values()) == g.size == 12
    assert set(audit.values()) == {1}
    assert (v @ a.final)[0, 0] == 1


def test_weight_rejects_foreign_symbols():
    with pytest.raises(ValueError):
        size_automaton().weight(T("s0"))
    with pytest.raises(ValueError):
        size_automaton(GF(3)).weight(T("f", T("a")))


def test_constructor_validation():
    with pytest.raises(ShapeError):
        Mta(QQ, SIZE_ALPHABET, 2, {"a": [[1, 1]]}, [1, 0])
    with pytest.raises(ShapeError):
        Mta(QQ, SIZE_ALPHABET, 2, {"a": [[1, 1]], "f": [[1, 1]] * 3}, [1, 0])
    with pytest.raises(ShapeError):
        Mta(QQ, SIZE_ALPHABET, 2, {"a": [[1, 1]], "f": [[1, 1]] * 4}, [1])


def test_scale_and_change_field():
    a = size_automaton()
    assert scale_final(a, 2).weight(FAA) == 6
    b = change_field(a, GF(2))
    assert b.weight(FAA) == GF(2)(1)


@pytest.mark.parametrize("a", [size_automaton(), padded_size_automaton(), example_automaton(4),
                               zero_automaton(RANK2_ALPHABET), size_automaton(GF(101)),
                               random_mta(random.Random(2), RANK2_ALPHABET, 3, fractions=True)],
                         ids=["size", "padded", "example4", "zero", "gf101", "rational"])
def test_mta_format_roundtrip(a):
    assert parse_mta(format_mta(a)) == a


def test_parse_mta_field_override():
    a = parse_mta(format_mta(size_automaton()), field=GF(5))
    assert a.field == GF(5)


@pytest.mark.parametrize("text, line, col", [
    ("mta q 2\nsym a 0\ntrans a\n1 x\n", 4, 3),
    ("mtx q 1\n", 1, 1),
    ("mta q 1\nsym a 0\ntrans a\n1\nfinal\n", 5, 1),
    ("mta q 1\nsym a 0\ntrans a\n1 / 0\n", 4, 3),
])
def test_parse_mta_errors_have_positions(text, line, col):
    with pytest.raises(FormatError) as e:
        parse_mta(text, source="bad.mta")
    assert (e.value.line, e.value.col) == (line, col)
    assert str(e.value).startswith(f"bad.mta:{line}:{col}:")
