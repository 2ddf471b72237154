"""Equivalence checking with small DAG counterexamples, plus enumeration oracles."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import product as cartesian
from typing import Callable, Optional

from .algebra import Matrix, RowBasis, rank
from .automaton import Mta, direct_sum
from .trees import DEFAULT_POOL, Dag, DagPool, all_trees, count_trees


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class ForwardBasis:
    """Independent run vectors mu(t_i) with DAG witnesses t_i (subtree-closed)."""

    vectors: list[tuple] = dc_field(default_factory=list)
    witnesses: list[Dag] = dc_field(default_factory=list)
    basis: Optional[RowBasis] = None

    def __len__(self):
        return len(self.vectors)

    def matrix(self, field) -> Matrix:
        width = self.basis.width if self.basis is not None else 0
        return Matrix._make(field, tuple(self.vectors), width)


def forward_basis(a: Mta, pool: Optional[DagPool] = None,
                  stop: Optional[Callable[[tuple], bool]] = None) -> ForwardBasis:
    """Worklist fixpoint over run vectors.

    Symbols are tried in declaration order and child tuples (indices into the
    current basis) lexicographically.  After every addition the scan restarts,
    skipping (symbol, tuple) pairs that were already tried.  When ``stop``
    returns true for a newly added vector the search ends early; that vector is
    the last one in the result.
    """
    pool = pool or DEFAULT_POOL
    basis = RowBasis(a.field, a.dim)
    out = ForwardBasis(basis=basis)
    tried: set = set()
    while True:
        grown = False
        for name, rk in a.alphabet:
            for tup in cartesian(range(len(out.vectors)), repeat=rk):
                key = (name, tup)
                if key in tried:
                    continue
                tried.add(key)
                v = a.apply(name, [out.vectors[i] for i in tup])
                if basis.add(v):
                    out.vectors.append(v)
                    out.witnesses.append(pool.node(name, [out.witnesses[i] for i in tup]))
                    grown = True
                    break
            if grown:
                break
        if not grown:
            return out
        if stop is not None and stop(out.vectors[-1]):
            return out


@dataclass(frozen=True)
class EquivResult:
    equivalent: bool
    counterexample: Optional[Dag] = None
    value_a: object = None
    value_b: object = None

    def __bool__(self):
        return self.equivalent


def check_equiv(a: Mta, b: Mta, pool: Optional[DagPool] = None) -> EquivResult:
    """Decide a == b; otherwise return a counterexample DAG of at most dim(a)+dim(b) nodes.

    The run vector of the direct sum on t is [mu_a(t), mu_b(t)] and its weight
    is a(t) - b(t).  Every run vector lies in the span of the forward basis, so
    the two series agree everywhere iff every basis vector has weight zero.
    """
    diff = direct_sum(a, b)
    fb = forward_basis(diff, pool, stop=lambda v: bool(diff.dot_final(v)))
    if fb.vectors and diff.dot_final(fb.vectors[-1]):
        z = fb.witnesses[-1]
        return EquivResult(False, z, a.weight(z), b.weight(z))
    return EquivResult(True)


def backward_basis(a: Mta, fb: Optional[ForwardBasis] = None) -> list[tuple]:
    """Independent columns mu(c) . final over all contexts c (as row tuples).

    The column for c[sigma(t1, .., box, .., tk)] is M . w, where w is the
    column for c and M is the linear map v -> (mu(t1) x .. v .. x mu(tk)) . mu(sigma).
    By linearity the t_i range over forward-basis vectors only.
    """
    fb = fb or forward_basis(a, DagPool())
    n = a.dim
    field = a.field
    basis = RowBasis(field, n)
    cols: list[tuple] = []
    if basis.add(a._gamma):
        cols.append(a._gamma)
    unit = [tuple(field.one if i == j else field.zero for j in range(n)) for i in range(n)]
    done = 0
    while done < len(cols):
        w = cols[done]
        done += 1
        for name, rk in a.alphabet:
            for j in range(rk):
                for others in cartesian(range(len(fb)), repeat=rk - 1):
                    fixed = [fb.vectors[i] for i in others]
                    col = []
                    for e in unit:
                        row = a.apply(name, fixed[:j] + [e] + fixed[j:])
                        s = field.zero
                        for x, y in zip(row, w):
                            if x and y:
                                s += x * y
                        col.append(s)
                    col = tuple(col)
                    if basis.add(col):
                        cols.append(col)
    return cols


def hankel_rank(a: Mta) -> int:
    """Rank of the Hankel matrix of the series of ``a`` (= its minimal dimension)."""
    fb = forward_basis(a, DagPool())
    bb = backward_basis(a, fb)
    if not fb.vectors or not bb:
        return 0
    f = Matrix._make(a.field, tuple(fb.vectors), a.dim)
    b = Matrix._make(a.field, tuple(bb), a.dim).T
    return rank(f @ b)


def brute_force_equiv(a: Mta, b: Mta, height_bound: int, budget: int = 200_000,
                      grouped: bool = True) -> bool:
    """Compare a and b on every tree of height < height_bound.

    With ``grouped=False`` the trees are built explicitly.  With ``grouped=True``
    trees are enumerated level by level but merged by their joint run vector
    (mu_a(t), mu_b(t)); the weight of a tree depends only on that vector, so
    the verdict is the same while the work stays bounded over finite fields.
    ``budget`` caps the number of trees (or tree classes) built.
    """
    if a.alphabet != b.alphabet or a.field != b.field:
        raise ValueError("automata must share alphabet and field")
    if not grouped:
        if count_trees(a.alphabet, height_bound) > budget:
            raise BudgetExceeded(f"more than {budget} trees of height < {height_bound}")
        return all(a.weight(t) == b.weight(t) for t in all_trees(a.alphabet, height_bound))

    seen: set = set()
    classes: list = []  # seen, in discovery order
    frontier: list = []  # classes first reached at the previous level
    work = 0
    for h in range(height_bound):
        new = []
        avail = list(classes)
        front = set(frontier)
        for name, rk in a.alphabet:
            if rk == 0:
                combos = [()] if h == 0 else []
            else:
                combos = (c for c in cartesian(avail, repeat=rk) if any(x in front for x in c))
            for kids in combos:
                work += 1
                if work > budget:
                    raise BudgetExceeded(f"more than {budget} tree classes of height < {height_bound}")
                va = a.apply(name, [k[0] for k in kids])
                vb = b.apply(name, [k[1] for k in kids])
                if a.dot_final(va) != b.dot_final(vb):
                    return False
                key = (va, vb)
                if key not in seen:
                    new.append(key)
                    seen.add(key)
        classes.extend(new)
        frontier = new
        if not frontier:
            break
    return True
