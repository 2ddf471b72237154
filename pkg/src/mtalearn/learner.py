"""Exact learning of multiplicity tree automata from membership and
equivalence queries, with trees, contexts and counterexamples kept as DAGs.

The learner keeps rows X (trees) and columns Y (contexts, Y[0] is the hole)
of the Hankel matrix H[t, c] = f(c[t]).  Rows of H restricted to Y stay
linearly independent; each round closes X under the alphabet, solves for a
hypothesis, and on a counterexample adds columns and at least one row.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as cartesian
from typing import IO, Optional, Protocol

from .algebra import Field, Matrix, RowBasis
from .automaton import Mta, run_nodes, zero_automaton
from .equivalence import check_equiv
from .trees import Dag, DagPool, RankedAlphabet, concat, sub_dags


class TeacherInconsistency(RuntimeError):
    """The teacher's answers contradict a property every honest teacher satisfies."""

    def __init__(self, message: str, lemma: str):
        self.lemma = lemma
        super().__init__(f"{message} (violates: {lemma})")


LEMMA_RANK = "rows of H over the current columns stay linearly independent"
LEMMA_SOLVE = "each sigma(X, ..., X) row is a unique combination of the X rows"
LEMMA_BAD_SUBTREE = "every counterexample has a subtree whose Hankel row the hypothesis gets wrong"
LEMMA_GROWTH = "every counterexample adds at least one row"
LEMMA_NONZERO = "a counterexample to the zero automaton has a nonzero value"


class Teacher(Protocol):
    field: Field
    alphabet: RankedAlphabet
    membership_count: int
    equivalence_count: int

    def membership(self, g: Dag):
        ...

    def equivalence(self, h: Mta) -> Optional[Dag]:
        ...


@dataclass
class QueryStats:
    eq: int = 0
    mq: int = 0
    s: int = 0  # largest counterexample, in DAG nodes
    arith_ops: int = 0
    iterations: int = 0

    def line(self, dim: int) -> str:
        return f"EQ={self.eq} MQ={self.mq} S={self.s} DIM={dim}"


class SimulatedTeacher:
    """Answers queries from a known target automaton.

    Counterexamples come from :func:`check_equiv`: the first forward-basis
    witness of the difference automaton, a DAG of at most dim(target) + dim(h) nodes.
    """

    def __init__(self, target: Mta, pool: Optional[DagPool] = None):
        self.target = target
        self.field = target.field
        self.alphabet = target.alphabet
        self.pool = pool or DagPool()
        self.membership_count = 0
        self.equivalence_count = 0

    def membership(self, g: Dag):
        self.membership_count += 1
        return self.target.weight(g)

    def equivalence(self, h: Mta) -> Optional[Dag]:
        self.equivalence_count += 1
        res = check_equiv(self.target, h, self.pool)
        return None if res.equivalent else res.counterexample


def simulated_teacher(target: Mta) -> SimulatedTeacher:
    return SimulatedTeacher(target)


@dataclass(frozen=True)
class Found:
    """A violating subtree sigma(children) and the index of a column where it fails."""

    symbol: str
    children: tuple
    column: int
    node: Dag


class ObservationState:
    def __init__(self, teacher, alphabet: RankedAlphabet, pool: Optional[DagPool] = None,
                 stats: Optional[QueryStats] = None, transcript: Optional[IO] = None):
        self.teacher = teacher
        self.alphabet = alphabet
        self.field = teacher.field
        self.pool = pool or DagPool()
        self.stats = stats or QueryStats()
        self.transcript = transcript
        self.X: list[Dag] = []
        self.Y: list[Dag] = [self.pool.hole()]
        self._ykeys = {self.Y[0].root}
        self.cache: dict[int, object] = {}
        self.basis = RowBasis(self.field, 1)
        self._retired_ops = 0

    # -- Hankel entries ----------------------------------------------------

    def entry(self, t: Dag, c: Dag):
        g = concat(c, t)
        v = self.cache.get(g.root)
        if v is None:
            v = self.field(self.teacher.membership(g))
            self.cache[g.root] = v
            self.stats.mq += 1
            if self.transcript is not None:
                self.transcript.write(f"MQ {g.digest()} {self.field.format(v)}\n")
        return v

    def row(self, t: Dag) -> tuple:
        return tuple(self.entry(t, c) for c in self.Y)

    @property
    def h_xy(self) -> Matrix:
        return Matrix._make(self.field, tuple(self.basis.rows), len(self.Y))

    def ops(self) -> int:
        return self._retired_ops + self.basis.ops

    # -- mutation ----------------------------------------------------------

    def try_add_row(self, t: Dag) -> bool:
        """Add t to X iff its row over Y is independent of the current rows."""
        if self.basis.add(self.row(t)):
            self.X.append(t)
            return True
        return False

    def add_columns(self, contexts) -> int:
        added = 0
        for c in contexts:
            if c.root not in self._ykeys:
                self._ykeys.add(c.root)
                self.Y.append(c)
                added += 1
        if added:
            self._retired_ops += self.basis.ops
            basis = RowBasis(self.field, len(self.Y))
            for t in self.X:
                if not basis.add(self.row(t)):
                    raise TeacherInconsistency("a row became dependent after adding columns", LEMMA_RANK)
            self.basis = basis
        return added

    def check_full_rank(self):
        check = RowBasis(self.field, len(self.Y))
        for t in self.X:
            if not check.add(self.row(t)):
                raise TeacherInconsistency("rows of H are linearly dependent", LEMMA_RANK)


def close_rows(state: ObservationState) -> int:
    """Add sigma(t_i1, ..., t_ik) rows until every one lies in the span of the X rows.

    Symbols in declaration order, index tuples lexicographic, new rows appended
    in discovery order; passes repeat while X grows.
    """
    checked: set = set()
    added = 0
    while True:
        grew = False
        for name, rk in state.alphabet:
            for tup in cartesian(range(len(state.X)), repeat=rk):
                key = (name, tup)
                if key in checked:
                    continue
                checked.add(key)
                t = state.pool.node(name, [state.X[i] for i in tup])
                if state.try_add_row(t):
                    added += 1
                    grew = True
        if not grew:
            return added


def build_hypothesis(state: ObservationState, close: bool = True) -> Mta:
    """Close X, then set final = H[X, hole] and solve mu(sigma) . H[X,Y] = H[sigma(X..X), Y]."""
    if close:
        close_rows(state)
    n = len(state.X)
    field = state.field
    trans = {}
    for name, rk in state.alphabet:
        rows = []
        for tup in cartesian(range(n), repeat=rk):
            t = state.pool.node(name, [state.X[i] for i in tup])
            coeffs = state.basis.express(state.row(t))
            if coeffs is None:
                raise TeacherInconsistency(f"row of {name}{tup} is outside the span after closure", LEMMA_SOLVE)
            rows.append(tuple(coeffs))
        trans[name] = Matrix._make(field, tuple(rows), n)
    final = Matrix.column(field, [state.entry(t, state.Y[0]) for t in state.X])
    return Mta(field, state.alphabet, n, trans, final)


def find_bad_subtree(h: Mta, state: ObservationState, z: Dag) -> Found:
    """First sub-DAG tau of z (by height, then node id) with H[tau, Y] != mu_h(tau) . H[X, Y].

    Its children all passed the check earlier, since they are strictly lower.
    """
    mu = run_nodes(h, z)
    hx = state.basis.rows
    field = state.field
    ncols = len(state.Y)
    for tau in sub_dags(z):
        v = mu[tau.root]
        predicted = [field.zero] * ncols
        for coef, row in zip(v, hx):
            if coef:
                for j, x in enumerate(row):
                    if x:
                        predicted[j] += coef * x
                        state.stats.arith_ops += 1
        for j, c in enumerate(state.Y):
            if state.entry(tau, c) != predicted[j]:
                return Found(tau.label, tuple(tau.children), j, tau)
    raise TeacherInconsistency("no subtree of the counterexample disagrees with the hypothesis",
                               LEMMA_BAD_SUBTREE)


def absorb_counterexample(state: ObservationState, found: Found) -> int:
    """Add the contexts c[sigma(t_i1, .., t_i(j-1), hole, tau_(j+1), .., tau_k)], then each
    independent tau_j as a row.  Returns the number of rows added."""
    pool = state.pool
    c = state.Y[found.column]
    taus = list(found.children)
    k = len(taus)
    n = len(state.X)
    contexts = []
    for j in range(k):
        for prefix in cartesian(range(n), repeat=j):
            kids = [state.X[i] for i in prefix] + [pool.hole()] + taus[j + 1:]
            contexts.append(concat(c, pool.node(found.symbol, kids)))
    state.add_columns(contexts)
    added = sum(1 for tau in taus if state.try_add_row(tau))
    if k == 0:
        # a nullary subtree that fails is itself independent
        added += state.try_add_row(found.node)
    return added


def lmta(teacher, alphabet: Optional[RankedAlphabet] = None, check_invariants: bool = False,
         transcript: Optional[IO] = None, pool: Optional[DagPool] = None,
         max_iterations: int = 10_000) -> tuple[Mta, QueryStats]:
    """Learn a minimal automaton for the teacher's series."""
    alphabet = alphabet or teacher.alphabet
    state = ObservationState(teacher, alphabet, pool, transcript=transcript)
    stats = state.stats

    def ask(h: Mta) -> Optional[Dag]:
        stats.eq += 1
        z = teacher.equivalence(h)
        if z is not None:
            z = state.pool.import_dag(z)
            stats.s = max(stats.s, z.size)
        if transcript is not None:
            verdict = "YES" if z is None else f"CEX {z.size}"
            transcript.write(f"EQ {h.dim} -> {verdict}\n")
        return z

    h = zero_automaton(alphabet, teacher.field)
    z = ask(h)
    if z is None:
        stats.arith_ops = state.ops()
        return h, stats
    if not state.try_add_row(z):
        raise TeacherInconsistency("counterexample to the zero automaton has value 0", LEMMA_NONZERO)

    while True:
        stats.iterations += 1
        if stats.iterations > max_iterations:
            raise TeacherInconsistency("iteration limit reached", LEMMA_GROWTH)
        h = build_hypothesis(state)
        if check_invariants:
            state.check_full_rank()
        z = ask(h)
        if z is None:
            stats.arith_ops += state.ops()
            return h, stats
        found = find_bad_subtree(h, state, z)
        before = len(state.X)
        absorb_counterexample(state, found)
        if check_invariants:
            state.check_full_rank()
        if len(state.X) <= before:
            raise TeacherInconsistency("counterexample did not add a row", LEMMA_GROWTH)


def minimize(a: Mta) -> Mta:
    """A minimal automaton equivalent to ``a``, learned from a simulated teacher."""
    return lmta(SimulatedTeacher(a), a.alphabet)[0]


def membership_bound(r: int, alphabet: RankedAlphabet, s: int) -> int:
    """|A|**2 + |A| * s for a minimal representation of dimension r."""
    size = sum(r ** (rk + 1) for _, rk in alphabet) + r
    return size * size + size * s
