"""Ranked alphabets, explicit trees and contexts, and hash-consed DAGs.

All DAG nodes live in a :class:`DagPool`.  A pool never stores two nodes with
the same ``(label, successors)`` pair, so two DAGs in the same pool represent
the same tree exactly when their root ids coincide.  A :class:`Dag` is just a
pool plus a root id.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import FormatError

HOLE = "_"
"""Reserved label of the context placeholder (the box)."""

DEFAULT_UNFOLD_BOUND = 10**6


class UnfoldTooLarge(ValueError):
    pass


class NotAContext(ValueError):
    pass


@dataclass(frozen=True)
class RankedAlphabet:
    symbols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [s for s, _ in self.symbols]
        if len(set(names)) != len(names):
            raise ValueError("duplicate symbol names")
        if HOLE in names:
            raise ValueError(f"{HOLE!r} is reserved for the context hole")
        for name, r in self.symbols:
            if r < 0 or not name or any(c.isspace() for c in name):
                raise ValueError(f"bad symbol {name!r}/{r}")
        if not any(r == 0 for _, r in self.symbols):
            raise ValueError("alphabet needs at least one nullary symbol")
        object.__setattr__(self, "_ranks", dict(self.symbols))

    @classmethod
    def of(cls, *pairs) -> "RankedAlphabet":
        """``RankedAlphabet.of(("a", 0), ("f", 2))`` or ``RankedAlphabet.of("a/0", "f/2")``."""
        out = []
        for p in pairs:
            if isinstance(p, str):
                name, _, r = p.rpartition("/")
                out.append((name, int(r)))
            else:
                out.append((p[0], int(p[1])))
        return cls(tuple(out))

    def rank(self, name: str) -> int:
        return self._ranks[name]

    def __contains__(self, name) -> bool:
        return name in self._ranks

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    @property
    def names(self) -> list[str]:
        return [s for s, _ in self.symbols]

    @property
    def max_rank(self) -> int:
        return max(r for _, r in self.symbols)

    def of_rank(self, k: int) -> list[str]:
        return [s for s, r in self.symbols if r == k]

    def __str__(self):
        return "{" + ", ".join(f"{s}/{r}" for s, r in self.symbols) + "}"


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple["Tree", ...] = ()

    def __str__(self):
        if not self.children:
            return self.label
        return f"{self.label}({', '.join(map(str, self.children))})"

    @property
    def height(self) -> int:
        return stats(self).height

    @property
    def size(self) -> int:
        return stats(self).size


def T(label: str, *children: Tree) -> Tree:
    """Shorthand tree constructor."""
    return Tree(label, tuple(children))


@dataclass(frozen=True)
class TreeStats:
    height: int
    size: int
    counts: dict

    def count(self, symbol: str) -> int:
        return self.counts.get(symbol, 0)


def stats(t: Tree) -> TreeStats:
    """Height, size and per-symbol occurrence counts of an explicit tree."""
    counts: Counter = Counter()

    def go(u: Tree) -> tuple[int, int]:
        counts[u.label] += 1
        if not u.children:
            return 0, 1
        hs = [go(c) for c in u.children]
        return 1 + max(h for h, _ in hs), 1 + sum(s for _, s in hs)

    h, s = go(t)
    return TreeStats(h, s, dict(counts))


def check_tree(t: Tree, alphabet: RankedAlphabet, allow_hole=False) -> None:
    stack = [t]
    while stack:
        u = stack.pop()
        if u.label == HOLE and allow_hole:
            if u.children:
                raise ValueError("hole with children")
            continue
        if u.label not in alphabet:
            raise ValueError(f"unknown symbol {u.label!r}")
        if alphabet.rank(u.label) != len(u.children):
            raise ValueError(f"{u.label!r} has rank {alphabet.rank(u.label)}, got {len(u.children)} children")
        stack.extend(u.children)


def substitute(c: Tree, t: Tree) -> Tree:
    """Context concatenation c[t] on explicit trees."""
    if c.label == HOLE:
        return t
    return Tree(c.label, tuple(substitute(ch, t) for ch in c.children))


# ---------------------------------------------------------------------------
# hash-consed DAGs

class DagPool:
    """Intern table of DAG nodes.  Node ids are topologically ordered."""

    def __init__(self):
        self.labels: list[str] = []
        self.succs: list[tuple[int, ...]] = []
        self.heights: list[int] = []
        self._index: dict[tuple, int] = {}
        self._digest: dict[int, str] = {}
        self._reach: dict[int, tuple] = {}  # nodes never change, so reachable sets can be kept

    def __len__(self):
        return len(self.labels)

    def node_id(self, label: str, succ: Sequence[int] = ()) -> int:
        succ = tuple(succ)
        key = (label, succ)
        nid = self._index.get(key)
        if nid is not None:
            return nid
        n = len(self.labels)
        for s in succ:
            if not 0 <= s < n:
                raise ValueError(f"successor {s} does not exist")
        nid = n
        self.labels.append(label)
        self.succs.append(succ)
        self.heights.append(1 + max((self.heights[s] for s in succ), default=-1))
        self._index[key] = nid
        return nid

    def node(self, label: str, children: Sequence["Dag"] = ()) -> "Dag":
        return Dag(self, self.node_id(label, [self._own(c) for c in children]))

    def leaf(self, label: str) -> "Dag":
        return Dag(self, self.node_id(label))

    def hole(self) -> "Dag":
        return self.leaf(HOLE)

    def _own(self, g: "Dag") -> int:
        return g.root if g.pool is self else self.import_dag(g).root

    def import_dag(self, g: "Dag") -> "Dag":
        """Re-intern a DAG from another pool."""
        if g.pool is self:
            return g
        remap: dict[int, int] = {}
        for v in g.nodes():
            remap[v] = self.node_id(g.pool.labels[v], [remap[s] for s in g.pool.succs[v]])
        return Dag(self, remap[g.root])

    def from_tree(self, t: Tree) -> "Dag":
        memo: dict[int, int] = {}

        def go(u: Tree) -> int:
            key = id(u)
            if key in memo:
                return memo[key]
            nid = self.node_id(u.label, [go(c) for c in u.children])
            memo[key] = nid
            return nid

        return Dag(self, go(t))

    def digest(self, nid: int) -> str:
        """Structural hash of the tree rooted at ``nid``; stable across pools and runs."""
        if nid in self._digest:
            return self._digest[nid]
        for v in Dag(self, nid).nodes():
            if v in self._digest:
                continue
            h = hashlib.sha256(self.labels[v].encode())
            for s in self.succs[v]:
                h.update(b"(" + self._digest[s].encode() + b")")
            self._digest[v] = h.hexdigest()[:16]
        return self._digest[nid]


DEFAULT_POOL = DagPool()


@dataclass(frozen=True)
class Dag:
    pool: DagPool
    root: int

    @property
    def label(self) -> str:
        return self.pool.labels[self.root]

    @property
    def children(self) -> list["Dag"]:
        return [Dag(self.pool, s) for s in self.pool.succs[self.root]]

    @property
    def height(self) -> int:
        return self.pool.heights[self.root]

    def nodes(self) -> list[int]:
        """Ids of all nodes reachable from the root, ascending (children first)."""
        cached = self.pool._reach.get(self.root)
        if cached is not None:
            return list(cached)
        seen = {self.root}
        stack = [self.root]
        succs = self.pool.succs
        while stack:
            v = stack.pop()
            for s in succs[v]:
                if s not in seen:
                    seen.add(s)
                    stack.append(s)
        out = sorted(seen)
        self.pool._reach[self.root] = tuple(out)
        return out

    @property
    def size(self) -> int:
        return len(self.nodes())

    def hole_paths(self) -> int:
        """Number of root-to-hole paths, i.e. occurrences of the hole in the unfolding."""
        paths: dict[int, int] = {}
        for v in self.nodes():
            if self.pool.labels[v] == HOLE:
                paths[v] = 1
            else:
                paths[v] = sum(paths[s] for s in self.pool.succs[v])
        return paths[self.root]

    @property
    def is_context(self) -> bool:
        return self.hole_paths() == 1

    def unfolded_size(self) -> int:
        return dag_stats(self).size

    def digest(self) -> str:
        return self.pool.digest(self.root)

    def __str__(self):
        if self.unfolded_size() <= 200:
            return str(unfold(self))
        return f"<dag {self.digest()} size={self.size}>"


def canonicalize(t: Tree, pool: Optional[DagPool] = None) -> Dag:
    return (pool or DEFAULT_POOL).from_tree(t)


def dag_stats(g: Dag) -> TreeStats:
    """Stats of ``unfold(g)`` computed on the DAG (no unfolding)."""
    pool = g.pool
    size: dict[int, int] = {}
    counts: dict[int, Counter] = {}
    for v in g.nodes():
        ss = pool.succs[v]
        size[v] = 1 + sum(size[s] for s in ss)
        c = Counter({pool.labels[v]: 1})
        for s in ss:
            c.update(counts[s])
        counts[v] = c
    return TreeStats(pool.heights[g.root], size[g.root], dict(counts[g.root]))


def unfold(g: Dag, bound: int = DEFAULT_UNFOLD_BOUND) -> Tree:
    """Tree unfolding of ``g``; refuses when the result would exceed ``bound`` nodes."""
    predicted = dag_stats(g).size
    if predicted > bound:
        raise UnfoldTooLarge(f"unfolding has {predicted} nodes (bound {bound})")
    pool = g.pool
    built: dict[int, Tree] = {}
    for v in g.nodes():
        built[v] = Tree(pool.labels[v], tuple(built[s] for s in pool.succs[v]))
    return built[g.root]


def sub_dags(g: Dag) -> list[Dag]:
    """One sub-DAG per node, ordered by height, ties broken by node id."""
    pool = g.pool
    return [Dag(pool, v) for v in sorted(g.nodes(), key=lambda v: (pool.heights[v], v))]


def concat(k: Dag, g: Dag) -> Dag:
    """Substitute the root of ``g`` for the hole of context ``k``."""
    if not k.is_context:
        raise NotAContext("left operand is not a context DAG")
    pool = k.pool
    groot = pool._own(g)
    new: dict[int, int] = {}
    for v in k.nodes():
        label = pool.labels[v]
        if label == HOLE:
            new[v] = groot
        else:
            new[v] = pool.node_id(label, [new[s] for s in pool.succs[v]])
    return Dag(pool, new[k.root])


def check_dag(g: Dag, alphabet: RankedAlphabet, allow_hole=False) -> None:
    pool = g.pool
    for v in g.nodes():
        label = pool.labels[v]
        if label == HOLE:
            if not allow_hole:
                raise ValueError("unexpected hole in a tree DAG")
            continue
        if label not in alphabet:
            raise ValueError(f"unknown symbol {label!r}")
        if alphabet.rank(label) != len(pool.succs[v]):
            raise ValueError(f"{label!r} has rank {alphabet.rank(label)}, node has {len(pool.succs[v])} successors")


# ---------------------------------------------------------------------------
# tree enumeration

def all_trees(alphabet: RankedAlphabet, height_bound: int) -> list[Tree]:
    """Every tree of height < ``height_bound``, ordered by height then symbol and children."""
    from itertools import product as cartesian

    levels: list[list[Tree]] = []  # levels[h] = trees of height exactly h
    for h in range(height_bound):
        below = [t for lvl in levels for t in lvl]
        top = set(map(id, levels[-1])) if levels else set()
        cur = []
        for name, r in alphabet:
            if r == 0:
                if h == 0:
                    cur.append(Tree(name))
                continue
            if h == 0:
                continue
            for kids in cartesian(below, repeat=r):
                if any(id(k) in top for k in kids):
                    cur.append(Tree(name, kids))
        levels.append(cur)
    return [t for lvl in levels for t in lvl]


def count_trees(alphabet: RankedAlphabet, height_bound: int) -> int:
    """|T^{<height_bound}| without building the trees."""
    total = 0
    for _ in range(height_bound):
        total = sum(total ** r for _, r in alphabet)
    return total


# ---------------------------------------------------------------------------
# .dag text format

def format_dag(g: Dag) -> str:
    """Render as ``node <id> <label> <succ>...`` lines (topological) and ``root <id>``."""
    pool = g.pool
    nodes = g.nodes()
    ren = {v: i for i, v in enumerate(nodes)}
    lines = []
    for v in nodes:
        parts = ["node", str(ren[v]), pool.labels[v]] + [str(ren[s]) for s in pool.succs[v]]
        lines.append(" ".join(parts))
    lines.append(f"root {ren[g.root]}")
    return "\n".join(lines) + "\n"


def _tokens(line: str) -> list[tuple[str, int]]:
    out = []
    i = 0
    n = len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == "#":
            break
        j = i
        while j < n and not line[j].isspace():
            j += 1
        out.append((line[i:j], i + 1))
        i = j
    return out


def parse_dag(text: str, pool: Optional[DagPool] = None, alphabet: Optional[RankedAlphabet] = None,
              source: Optional[str] = None) -> Dag:
    """Load a ``.dag`` file into ``pool`` (re-interned, so the result is canonical)."""
    pool = pool or DEFAULT_POOL
    ids: dict[str, int] = {}
    arity: dict[str, int] = {}
    root = None
    for lineno, line in enumerate(text.splitlines(), 1):
        toks = _tokens(line)
        if not toks:
            continue
        if root is not None:
            raise FormatError("content after 'root' line", lineno, toks[0][1], source)
        kw, col = toks[0]
        if kw == "node":
            if len(toks) < 3:
                raise FormatError("expected 'node <id> <label> [<succ-id>...]'", lineno, col, source)
            nid, ncol = toks[1]
            label, lcol = toks[2]
            if nid in ids:
                raise FormatError(f"duplicate node id {nid!r}", lineno, ncol, source)
            succ = []
            for s, scol in toks[3:]:
                if s not in ids:
                    raise FormatError(f"successor {s!r} is not defined earlier (cycle or bad order)", lineno, scol, source)
                succ.append(ids[s])
            if label == HOLE and succ:
                raise FormatError("hole node cannot have successors", lineno, lcol, source)
            if alphabet is not None and label != HOLE:
                if label not in alphabet:
                    raise FormatError(f"unknown symbol {label!r}", lineno, lcol, source)
                if alphabet.rank(label) != len(succ):
                    raise FormatError(f"arity mismatch: {label!r} has rank {alphabet.rank(label)}, got {len(succ)} successors",
                                      lineno, lcol, source)
            if arity.setdefault(label, len(succ)) != len(succ):
                raise FormatError(f"arity mismatch: {label!r} used with {arity[label]} and {len(succ)} successors",
                                  lineno, lcol, source)
            ids[nid] = pool.node_id(label, succ)
        elif kw == "root":
            if len(toks) != 2:
                raise FormatError("expected 'root <id>'", lineno, col, source)
            r, rcol = toks[1]
            if r not in ids:
                raise FormatError(f"unknown root {r!r}", lineno, rcol, source)
            root = ids[r]
        else:
            raise FormatError(f"unknown directive {kw!r}", lineno, col, source)
    if root is None:
        raise FormatError("missing 'root' line", None, None, source)
    return Dag(pool, root)


def perfect_tree(n: int, leaf: str = "s0", binary: str = "s2") -> Tree:
    """The perfect binary tree t_n of height n - 1."""
    t = Tree(leaf)
    for _ in range(n - 1):
        t = Tree(binary, (t, t))
    return t


def chain_dag(n: int, pool: Optional[DagPool] = None, leaf: str = "s0", binary: str = "s2") -> Dag:
    """The n-node DAG G_n whose unfolding is ``perfect_tree(n)``."""
    pool = pool or DEFAULT_POOL
    g = pool.leaf(leaf)
    for _ in range(n - 1):
        g = pool.node(binary, [g, g])
    return g
