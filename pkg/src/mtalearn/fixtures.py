"""Standard automata, random generators and enumerations used by tests, the
CLI ``fixture`` command and the benchmarks."""

from __future__ import annotations

import random
from itertools import product as cartesian
from typing import Optional

from .algebra import Field, QQ
from .automaton import Mta
from .circuits import OPS, Builder, Circuit, eval_circuit
from .trees import Dag, DagPool, RankedAlphabet, Tree, chain_dag, perfect_tree

SIZE_ALPHABET = RankedAlphabet((("a", 0), ("f", 2)))
RANK2_ALPHABET = RankedAlphabet((("a", 0), ("g", 1), ("f", 2)))
EXAMPLE_ALPHABET = RankedAlphabet((("s0", 0), ("s2", 2)))

__all__ = [
    "SIZE_ALPHABET", "RANK2_ALPHABET", "EXAMPLE_ALPHABET", "size_automaton", "padded_size_automaton",
    "example_automaton", "perfect_tree", "chain_dag", "random_mta", "random_tree", "enumerate_dags",
    "random_layered_circuit", "random_circuit", "mirror", "zero_circuit", "nonzero_circuit",
]


def size_automaton(field: Field = QQ) -> Mta:
    """Two states; the weight of t is its number of nodes."""
    return Mta(field, SIZE_ALPHABET, 2, {"a": [[1, 1]], "f": [[0, 0], [1, 0], [1, 0], [1, 1]]}, [1, 0])


def padded_size_automaton(field: Field = QQ) -> Mta:
    """The size automaton plus a third state that no tree reaches."""
    f_rows = []
    for i, j in cartesian(range(3), repeat=2):
        if i == 2 or j == 2:
            f_rows.append([0, 0, 1])
        else:
            f_rows.append([[0, 0], [1, 0], [1, 0], [1, 1]][i * 2 + j] + [0])
    return Mta(field, SIZE_ALPHABET, 3, {"a": [[1, 1, 0]], "f": f_rows}, [1, 0, 5])


def example_automaton(n: int, field: Field = QQ) -> Mta:
    """n states over {s0/0, s2/2}: weight 1 on perfect_tree(n) and 0 on every other tree.

    Leaves go to the last state; s2 maps the pair (i+1, i+1) to state i.
    """
    if n < 1:
        raise ValueError("n must be positive")
    z = field.zero
    s0 = [[1 if j == n - 1 else 0 for j in range(n)]]
    s2 = [[z] * n for _ in range(n * n)]
    for i in range(n - 1):
        s2[(i + 1) * n + (i + 1)][i] = field.one
    return Mta(field, EXAMPLE_ALPHABET, n, {"s0": s0, "s2": s2}, [1] + [0] * (n - 1))


def random_mta(rng: random.Random, alphabet: RankedAlphabet, dim: int, field: Field = QQ,
               lo: int = -2, hi: int = 2, density: float = 1.0, fractions: bool = False,
               nonzero: bool = False) -> Mta:
    """Integer entries in [lo, hi] (zeroed with probability 1 - density).

    With ``fractions`` some entries become p/q with small q; with ``nonzero``
    the draw skips 0, which makes dense targets minimal in practice.
    """
    values = [v for v in range(lo, hi + 1) if v or not nonzero]

    def entry():
        if rng.random() >= density:
            return 0
        v = rng.choice(values)
        if fractions and rng.random() < 0.3:
            return QQ(v) / rng.randint(2, 3)
        return v

    trans = {name: [[entry() for _ in range(dim)] for _ in range(dim ** rk)] for name, rk in alphabet}
    final = [entry() for _ in range(dim)]
    return Mta(field, alphabet, dim, trans, final)


def random_tree(rng: random.Random, alphabet: RankedAlphabet, max_height: int,
                leaf_bias: float = 0.3) -> Tree:
    leaves = alphabet.of_rank(0)
    inner = [(s, r) for s, r in alphabet if r > 0]
    if max_height <= 0 or not inner or rng.random() < leaf_bias:
        return Tree(rng.choice(leaves))
    name, rk = rng.choice(inner)
    return Tree(name, tuple(random_tree(rng, alphabet, max_height - 1, leaf_bias) for _ in range(rk)))


def enumerate_dags(alphabet: RankedAlphabet, max_nodes: int, pool: Optional[DagPool] = None) -> list[Dag]:
    """Every canonical DAG with at most ``max_nodes`` nodes, smallest first."""
    pool = pool or DagPool()
    found: dict[int, frozenset] = {}  # root -> reachable node set
    order: list[int] = []
    fresh: set = set()
    first = True
    while first or fresh:
        # children must leave room for the parent, and one must be new since the last pass
        roots = [v for v in order if len(found[v]) < max_nodes]
        prev, fresh = fresh, set()
        for name, rk in alphabet:
            if rk == 0:
                combos = [()] if first else []
            else:
                combos = (k for k in cartesian(roots, repeat=rk) if any(x in prev for x in k))
            for kids in combos:
                reach = frozenset().union(*(found[k] for k in kids)) if kids else frozenset()
                if len(reach) >= max_nodes:
                    continue
                nid = pool.node_id(name, kids)
                if nid in found:
                    continue
                found[nid] = reach | {nid}
                order.append(nid)
                fresh.add(nid)
        first = False
    order.sort(key=lambda v: (len(found[v]), v))
    return [Dag(pool, v) for v in order]


# ---------------------------------------------------------------------------
# circuits

def random_layered_circuit(rng: random.Random, height: int, width: int = 3,
                           zero_prob: float = 0.2) -> Circuit:
    """A circuit already in layered form: + on even levels, x on odd, one output gate."""
    if height % 2:
        raise ValueError("height must be even")
    b = Builder()
    level = [b.one()]
    if rng.random() < zero_prob:
        level.append(b.zero())
    for h in range(1, height + 1):
        op = "mul" if h % 2 else "add"
        size = 1 if h == height else rng.randint(1, width)
        nxt = []
        for _ in range(size):
            nxt.append(b.gate(op, rng.choice(level), rng.choice(level)))
        level = list(dict.fromkeys(nxt))
    c = b.build(level[0])
    hs = c.heights()
    order = sorted(range(len(c.gates)), key=lambda i: (hs[i], i))
    ren = {old: new for new, old in enumerate(order)}
    gates = tuple((c.gates[o][0], ren[c.gates[o][1]], ren[c.gates[o][2]]) if c.gates[o][0] in OPS
                  else c.gates[o] for o in order)
    return Circuit(gates, ren[c.output])


def _random_into(b: Builder, rng: random.Random, height: int, ops=("add", "mul", "sub"),
                 width: int = 3) -> int:
    pool = [b.one(), b.add(b.one(), b.one())]
    for _ in range(height):
        new = []
        for _ in range(rng.randint(1, width)):
            l, r = rng.choice(pool), rng.choice(pool)
            new.append(b.gate(rng.choice(ops), l, r))
        pool = pool[-width:] + new
    return pool[-1]


def random_circuit(rng: random.Random, height: int, ops=("add", "mul", "sub"), width: int = 3) -> Circuit:
    """Random variable-free circuit with at most ``height + 1`` levels of operations."""
    b = Builder()
    return b.build(_random_into(b, rng, height, ops, width))


def mirror(b: Builder, c: Circuit) -> int:
    """Copy c into b with the operands of every + and x swapped (same value)."""
    ids = []
    for g in c.gates:
        if g[0] in ("add", "mul"):
            ids.append(b.gate(g[0], ids[g[2]], ids[g[1]]))
        elif g[0] == "sub":
            ids.append(b.sub(ids[g[1]], ids[g[2]]))
        else:
            ids.append(b.gate(*g))
    return ids[c.output]


def _copy(b: Builder, c: Circuit) -> int:
    ids = []
    for g in c.gates:
        ids.append(b.gate(g[0], ids[g[1]], ids[g[2]]) if g[0] in OPS else b.gate(*g))
    return ids[c.output]


def zero_circuit(rng: random.Random, height: int = 10) -> Circuit:
    """C - mirror(C), of height at most ``height``: zero by commutativity alone."""
    c = random_circuit(rng, rng.randint(1, height - 2))
    b = Builder()
    return b.build(b.sub(_copy(b, c), mirror(b, c)))


def nonzero_circuit(rng: random.Random, height: int = 10) -> tuple[Circuit, int]:
    """(C - mirror(C)) + D, of height at most ``height``, with D of known nonzero value."""
    while True:
        d = random_circuit(rng, rng.randint(1, height - 2))
        v = eval_circuit(d)
        if v:
            break
    c = random_circuit(rng, rng.randint(1, height - 3))
    b = Builder()
    out = b.add(b.sub(_copy(b, c), mirror(b, c)), _copy(b, d))
    return b.build(out), v
