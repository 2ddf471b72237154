import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from mtalearn.algebra import GF, QQ
from mtalearn.automaton import Mta, zero_automaton
from mtalearn.equivalence import check_equiv, forward_basis, hankel_rank
from mtalearn.fixtures import (EXAMPLE_ALPHABET, RANK2_ALPHABET, SIZE_ALPHABET, example_automaton,
                               padded_size_automaton, random_mta, size_automaton)
from mtalearn.learner import (LEMMA_BAD_SUBTREE, LEMMA_NONZERO, ObservationState, SimulatedTeacher,
                              TeacherInconsistency, absorb_counterexample, build_hypothesis, find_bad_subtree,
                              lmta, membership_bound, minimize)
from mtalearn.trees import DagPool, T, chain_dag, perfect_tree, unfold


def learn_and_check(target, **kw):
    h, stats = lmta(SimulatedTeacher(target), target.alphabet, check_invariants=True, **kw)
    r = hankel_rank(target)
    assert check_equiv(h, target).equivalent
    assert h.dim == r
    assert stats.eq <= r + 1
    assert stats.iterations <= r
    assert stats.mq <= membership_bound(r, target.alphabet, stats.s)
    return h, stats


def test_zero_target():
    h, stats = lmta(SimulatedTeacher(zero_automaton(RANK2_ALPHABET)))
    assert h.dim == 0 and stats.eq == 1 and stats.mq == 0


def test_size_target():
    h, stats = learn_and_check(size_automaton())
    assert h.dim == 2 and stats.eq <= 3


def test_example_target():
    h, stats = learn_and_check(example_automaton(6))
    assert h.dim == 6
    assert h.weight(chain_dag(6, DagPool())) == 1


def test_learning_over_prime_field():
    learn_and_check(random_mta(random.Random(3), RANK2_ALPHABET, 3, field=GF(11), lo=0, hi=10))


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_random_targets(seed):
    rng = random.Random(seed)
    target = random_mta(rng, RANK2_ALPHABET, rng.randint(1, 3), density=rng.choice([0.5, 1.0]))
    learn_and_check(target)


def size_state():
    teacher = SimulatedTeacher(size_automaton())
    state = ObservationState(teacher, SIZE_ALPHABET)
    assert state.try_add_row(state.pool.leaf("a"))
    return state


def test_hypothesis_hand_trace():
    state = size_state()
    h = build_hypothesis(state)
    assert len(state.X) == 1 and state.h_xy.tolist() == [[1]]
    assert h.mu("a").tolist() == [[1]]
    assert h.mu("f").tolist() == [[3]]
    assert h.final.tolist() == [[1]]
    z = T("f", T("f", T("a"), T("a")), T("f", T("a"), T("a")))
    assert h.weight(z) == 27 and size_automaton().weight(z) == 7


def test_bad_subtree_and_absorb_hand_trace():
    state = size_state()
    h = build_hypothesis(state)
    pool = state.pool
    a = pool.leaf("a")
    faa = pool.node("f", [a, a])
    z = pool.node("f", [faa, faa])
    found = find_bad_subtree(h, state, z)
    assert (found.symbol, found.children, found.column) == ("f", (faa, faa), 0)
    added = absorb_counterexample(state, found)
    assert added == 1 and len(state.X) == 2
    assert [unfold(c) for c in state.Y[1:]] == [T("f", T("_"), unfold(faa)), T("f", T("a"), T("_"))]
    # rows over (hole, f(hole, f(a,a)), f(a, hole)) from the size series
    assert state.row(a) == (1, 5, 3)
    assert state.row(faa) == (3, 7, 5)


def test_bad_subtree_nullary():
    teacher = SimulatedTeacher(size_automaton())
    state = ObservationState(teacher, SIZE_ALPHABET)
    h = Mta(QQ, SIZE_ALPHABET, 1, {"a": [[1]], "f": [[0]]}, [2])
    a = state.pool.leaf("a")
    state.try_add_row(state.pool.node("f", [a, a]))
    found = find_bad_subtree(h, state, a)
    assert (found.symbol, found.children, found.column) == ("a", (), 0)
    before = len(state.Y)
    # the row of a is (1), a multiple of the row (3) of f(a,a), so nothing new is added
    assert absorb_counterexample(state, found) == 0
    assert len(state.Y) == before


def test_bad_subtree_on_a_non_counterexample():
    state = size_state()
    h = build_hypothesis(state)
    with pytest.raises(TeacherInconsistency) as e:
        find_bad_subtree(h, state, state.pool.leaf("a"))
    assert e.value.lemma == LEMMA_BAD_SUBTREE


class LyingTeacher(SimulatedTeacher):
    """Returns a tree the hypothesis already gets right."""

    def equivalence(self, h):
        self.equivalence_count += 1
        return self.pool.leaf("a")


def test_lying_teacher_is_reported():
    with pytest.raises(TeacherInconsistency) as e:
        lmta(LyingTeacher(size_automaton()))
    assert e.value.lemma == LEMMA_BAD_SUBTREE
    with pytest.raises(TeacherInconsistency) as e:
        lmta(LyingTeacher(Mta(QQ, SIZE_ALPHABET, 1, {"a": [[0]], "f": [[1]]}, [1])))
    assert e.value.lemma == LEMMA_NONZERO


def test_simulated_teacher():
    teacher = SimulatedTeacher(example_automaton(3))
    assert teacher.membership(chain_dag(3, DagPool())) == 1
    assert teacher.equivalence(example_automaton(3)) is None
    teacher = SimulatedTeacher(example_automaton(10))
    z = teacher.equivalence(zero_automaton(EXAMPLE_ALPHABET))
    assert z.size <= 10 and z.unfolded_size() == 1023
    assert unfold(z) == perfect_tree(10)


def test_minimize():
    a = size_automaton()
    m = minimize(a)
    assert m.dim == 2 and check_equiv(a, m).equivalent
    m = minimize(padded_size_automaton())
    assert m.dim == 2 and check_equiv(m, a).equivalent


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_minimize_properties(seed):
    rng = random.Random(seed)
    a = random_mta(rng, RANK2_ALPHABET, rng.randint(1, 3), density=0.7)
    m = minimize(a)
    assert m.dim <= a.dim
    assert m.dim == len(forward_basis(m, DagPool()))
    assert minimize(m).dim == m.dim
    # two learned minimal automata for the same series agree and share dimension
    m2 = lmta(SimulatedTeacher(m))[0]
    assert m2.dim == m.dim and check_equiv(m, m2).equivalent


def test_membership_cache_counts_distinct_entries():
    state = size_state()
    mq = state.stats.mq
    a = state.pool.leaf("a")
    state.row(a)
    assert state.stats.mq == mq


def test_transcript_lines():
    out = io.StringIO()
    h, stats = lmta(SimulatedTeacher(size_automaton()), transcript=out)
    lines = out.getvalue().splitlines()
    assert sum(l.startswith("MQ ") for l in lines) == stats.mq
    assert sum(l.startswith("EQ ") for l in lines) == stats.eq
    assert lines[0] == "EQ 0 -> CEX 1"
    assert lines[-1] == "EQ 2 -> YES"


def test_stats_line():
    h, stats = lmta(SimulatedTeacher(size_automaton()))
    assert stats.line(h.dim) == f"EQ={stats.eq} MQ={stats.mq} S={stats.s} DIM=2"
