"""Stallings graphs of finitely generated subgroups of free groups.

Graphs carry positively labelled edges ``(source, generator, target)``;
reading ``x^-1`` traverses an ``x``-edge backwards.  Folded graphs are
renumbered canonically (breadth first from the base vertex, letters in
ShortLex order), so two folded rooted graphs are isomorphic exactly when
their vertex counts and edge sets coincide.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Optional, Sequence

from .words import Alphabet, Word, WordError, free_reduce, inverse, multiply

INFINITE = math.inf


class GraphError(ValueError):
    pass


class StallingsGraph:
    """A rooted graph labelled by the generators of a free group."""

    def __init__(self, alphabet: Alphabet, nvertices: int, edges: Iterable, base: int = 0):
        self.alphabet = alphabet
        self.nvertices = nvertices
        self.base = base
        self.edges = tuple(edges)
        ngens = len(alphabet)
        for s, gen, t in self.edges:
            if not (0 <= s < nvertices and 0 <= t < nvertices):
                raise GraphError(f"edge {(s, gen, t)} has an endpoint out of range")
            if not 0 <= gen < ngens:
                raise GraphError(f"edge {(s, gen, t)} has an invalid generator")
        if not 0 <= base < max(nvertices, 1):
            raise GraphError("base vertex out of range")
        self._delta = None

    def __repr__(self):
        return f"StallingsGraph({self.nvertices} vertices, {len(self.edges)} edges)"

    def __eq__(self, other):
        return (
            isinstance(other, StallingsGraph)
            and self.alphabet == other.alphabet
            and self.nvertices == other.nvertices
            and self.base == other.base
            and sorted(self.edges) == sorted(other.edges)
        )

    __hash__ = None

    def adjacency(self) -> list:
        """Per vertex, a dict from letter code to the list of neighbours."""
        adj = [dict() for _ in range(self.nvertices)]
        for s, gen, t in self.edges:
            adj[s].setdefault(2 * gen, []).append(t)
            adj[t].setdefault(2 * gen + 1, []).append(s)
        return adj

    @property
    def delta(self) -> list:
        """Deterministic transition table; only valid on folded graphs."""
        if self._delta is None:
            table = [dict() for _ in range(self.nvertices)]
            for v, d in enumerate(self.adjacency()):
                for x, targets in d.items():
                    if len(targets) != 1:
                        raise GraphError("graph is not folded")
                    table[v][x] = targets[0]
            self._delta = table
        return self._delta

    def is_folded(self) -> bool:
        return all(len(t) == 1 for d in self.adjacency() for t in d.values())

    def degree(self) -> list:
        deg = [0] * self.nvertices
        for s, _, t in self.edges:
            deg[s] += 1
            deg[t] += 1
        return deg

    def read(self, w: Sequence[int], start: Optional[int] = None) -> Optional[int]:
        """End vertex of the path labelled ``w``, or ``None`` if it falls off."""
        v = self.base if start is None else start
        delta = self.delta
        for x in w:
            v = delta[v].get(x)
            if v is None:
                return None
        return v

    def edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def to_dict(self) -> dict:
        names = self.alphabet.symbols
        return {
            "alphabet": list(names),
            "vertices": self.nvertices,
            "base": self.base,
            "edges": [[s, names[g], t] for s, g, t in sorted(self.edges)],
        }

    @classmethod
    def from_dict(cls, data: dict, alphabet: Optional[Alphabet] = None) -> "StallingsGraph":
        if alphabet is None:
            if "alphabet" not in data:
                raise GraphError("graph JSON has no alphabet and none was supplied")
            alphabet = Alphabet(data["alphabet"])
        edges = [(s, alphabet.index(g), t) for s, g, t in data["edges"]]
        return cls(alphabet, data["vertices"], edges, data.get("base", 0))

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for v in range(self.nvertices):
            shape = "doublecircle" if v == self.base else "circle"
            lines.append(f'  {v} [shape={shape}];')
        for s, g, t in sorted(self.edges):
            lines.append(f'  {s} -> {t} [label="{self.alphabet.symbols[g]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def bouquet(alphabet: Alphabet, generators: Iterable[Sequence[int]]) -> StallingsGraph:
    """One loop per generator at the base vertex, nothing identified yet."""
    n = 1
    edges = []
    for w in generators:
        w = alphabet.check(w)
        if not w:
            continue
        path = [0] + list(range(n, n + len(w) - 1)) + [0]
        n += len(w) - 1
        for i, x in enumerate(w):
            s, t = path[i], path[i + 1]
            if x & 1:
                s, t = t, s
            edges.append((s, x >> 1, t))
    return StallingsGraph(alphabet, n, edges)


def add_loop(alphabet: Alphabet, nvertices: int, edges: list, at: int, w: Sequence[int]) -> int:
    """Append a loop labelled ``w`` at vertex ``at``; returns the new vertex count."""
    if not w:
        return nvertices
    path = [at] + list(range(nvertices, nvertices + len(w) - 1)) + [at]
    for i, x in enumerate(w):
        s, t = path[i], path[i + 1]
        if x & 1:
            s, t = t, s
        edges.append((s, x >> 1, t))
    return nvertices + len(w) - 1


def canonical(g: StallingsGraph) -> StallingsGraph:
    """Renumber a folded graph breadth first from the base.

    Vertices not reachable from the base are dropped.
    """
    delta = g.delta
    order = {g.base: 0}
    queue = deque([g.base])
    nletters = g.alphabet.nletters
    while queue:
        v = queue.popleft()
        d = delta[v]
        for x in range(nletters):
            t = d.get(x)
            if t is not None and t not in order:
                order[t] = len(order)
                queue.append(t)
    edges = sorted(
        (order[s], gen, order[t]) for s, gen, t in g.edges if s in order
    )
    return StallingsGraph(g.alphabet, len(order), edges, 0)


def fold(g: StallingsGraph, order: Optional[Sequence[int]] = None) -> StallingsGraph:
    """Fold ``g`` completely, using union-find with small-into-large merging.

    ``order`` permutes the sequence in which edges are inserted; the result
    does not depend on it.  The output is canonically numbered.
    """
    n = g.nvertices
    parent = list(range(n))
    size = [1] * n
    out = [dict() for _ in range(n)]
    pending = []

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def insert(s, x, t):
        d = out[s]
        old = d.get(x)
        if old is None:
            d[x] = t
        else:
            pending.append((old, t))

    edges = g.edges if order is None else [g.edges[i] for i in order]
    for s, gen, t in edges:
        s, t = find(s), find(t)
        insert(s, 2 * gen, t)
        insert(t, 2 * gen + 1, s)
        while pending:
            u, v = pending.pop()
            u, v = find(u), find(v)
            if u == v:
                continue
            if size[u] < size[v]:
                u, v = v, u
            parent[v] = u
            size[u] += size[v]
            moved, out[v] = out[v], {}
            for x, t2 in moved.items():
                insert(u, x, t2)

    reps = {}
    for v in range(n):
        r = find(v)
        if r not in reps:
            reps[r] = len(reps)
    new_edges = set()
    for r, idx in reps.items():
        for x, t in out[r].items():
            if not x & 1:
                new_edges.add((idx, x >> 1, reps[find(t)]))
    folded = StallingsGraph(g.alphabet, len(reps), new_edges, reps[find(g.base)])
    return canonical(folded)


def fold_naive(g: StallingsGraph) -> StallingsGraph:
    """Quadratic reference folder: merge one offending pair at a time."""
    n = g.nvertices
    alive = set(range(n))
    edges = set(g.edges)
    base = g.base
    while True:
        pair = None
        elist = sorted(edges)
        for i, (s1, a1, t1) in enumerate(elist):
            for s2, a2, t2 in elist[i + 1:]:
                if a1 != a2:
                    continue
                if s1 == s2 and t1 != t2:
                    pair = (t1, t2)
                elif t1 == t2 and s1 != s2:
                    pair = (s1, s2)
                if pair:
                    break
            if pair:
                break
        if pair is None:
            break
        keep, drop = min(pair), max(pair)
        edges = {
            (keep if s == drop else s, a, keep if t == drop else t)
            for s, a, t in edges
        }
        alive.discard(drop)
        if base == drop:
            base = keep
    index = {v: i for i, v in enumerate(sorted(alive))}
    out = StallingsGraph(
        g.alphabet, len(index), [(index[s], a, index[t]) for s, a, t in edges], index[base]
    )
    return canonical(out)


def trim(g: StallingsGraph) -> StallingsGraph:
    """Delete non-base vertices of degree at most one until none remain."""
    deg = g.degree()
    incident = [[] for _ in range(g.nvertices)]
    for i, (s, _, t) in enumerate(g.edges):
        incident[s].append(i)
        if t != s:
            incident[t].append(i)
    dead_edge = [False] * len(g.edges)
    dead = [False] * g.nvertices
    queue = deque(v for v in range(g.nvertices) if v != g.base and deg[v] <= 1)
    while queue:
        v = queue.popleft()
        if dead[v]:
            continue
        dead[v] = True
        for i in incident[v]:
            if dead_edge[i]:
                continue
            dead_edge[i] = True
            s, _, t = g.edges[i]
            other = t if s == v else s
            deg[other] -= 1
            deg[v] -= 1
            if other != g.base and not dead[other] and deg[other] <= 1:
                queue.append(other)
    index = {}
    for v in range(g.nvertices):
        if not dead[v]:
            index[v] = len(index)
    edges = [
        (index[s], a, index[t])
        for i, (s, a, t) in enumerate(g.edges)
        if not dead_edge[i]
    ]
    out = StallingsGraph(g.alphabet, len(index), edges, index[g.base])
    return canonical(out) if out.is_folded() else out


def stallings_graph(alphabet: Alphabet, generators: Iterable[Sequence[int]]) -> StallingsGraph:
    """The Stallings graph of the subgroup generated by ``generators``."""
    gens = [free_reduce(alphabet.check(w)) for w in generators]
    return trim(fold(bouquet(alphabet, gens)))


def isomorphic(g1: StallingsGraph, g2: StallingsGraph) -> bool:
    """Rooted isomorphism of folded graphs."""
    if g1.alphabet != g2.alphabet:
        return False
    c1, c2 = canonical(g1), canonical(g2)
    return c1.nvertices == c2.nvertices and c1.edge_set() == c2.edge_set()


def membership_free(g: StallingsGraph, w: Sequence[int]) -> bool:
    """Whether the reduced word ``w`` labels a loop at the base vertex."""
    g.alphabet.check(w)
    return g.read(free_reduce(w)) == g.base


def _tree_paths(g: StallingsGraph, vertices=None, root=None):
    """Breadth-first spanning tree labels, letters in ShortLex order."""
    root = g.base if root is None else root
    delta = g.delta
    paths = {root: ()}
    tree = set()
    queue = deque([root])
    nletters = g.alphabet.nletters
    while queue:
        v = queue.popleft()
        for x in range(nletters):
            t = delta[v].get(x)
            if t is None or t in paths or (vertices is not None and t not in vertices):
                continue
            paths[t] = paths[v] + (x,)
            tree.add((v, x >> 1, t) if not x & 1 else (t, x >> 1, v))
            queue.append(t)
    return paths, tree


def rank_and_basis(g: StallingsGraph):
    """Rank of the subgroup and the free basis read off spanning-tree chords."""
    paths, tree = _tree_paths(g)
    basis = []
    for s, gen, t in sorted(g.edges):
        if (s, gen, t) in tree:
            continue
        basis.append(multiply(paths[s], (2 * gen,), inverse(paths[t])))
    rank = len(g.edges) - g.nvertices + 1
    assert rank == len(basis)
    return rank, basis


def index_free(g: StallingsGraph):
    """Index in the ambient free group: vertex count if complete, else infinite."""
    nletters = g.alphabet.nletters
    delta = g.delta
    if all(len(delta[v]) == nletters for v in range(g.nvertices)):
        return g.nvertices
    return INFINITE


def _check_same_alphabet(g1, g2):
    if g1.alphabet != g2.alphabet:
        raise GraphError(f"alphabet mismatch: {g1.alphabet!r} vs {g2.alphabet!r}")


def intersect_free(g1: StallingsGraph, g2: StallingsGraph) -> StallingsGraph:
    """Stallings graph of the intersection, via the pullback of the two graphs."""
    _check_same_alphabet(g1, g2)
    d1, d2 = g1.delta, g2.delta
    start = (g1.base, g2.base)
    index = {start: 0}
    queue = deque([start])
    edges = []
    while queue:
        p = queue.popleft()
        u, v = p
        for x, u2 in d1[u].items():
            if x & 1:
                continue
            v2 = d2[v].get(x)
            if v2 is None:
                continue
            q = (u2, v2)
            if q not in index:
                index[q] = len(index)
                queue.append(q)
            edges.append((index[p], x >> 1, index[q]))
        for x, u2 in d1[u].items():
            # reach pairs through inverse edges as well
            if not x & 1:
                continue
            v2 = d2[v].get(x)
            if v2 is None:
                continue
            q = (u2, v2)
            if q not in index:
                index[q] = len(index)
                queue.append(q)
    product = StallingsGraph(g1.alphabet, len(index), set(edges), 0)
    return canonical(trim(product))


def core(g: StallingsGraph):
    """Cyclic core: delete every vertex of degree at most one, base included.

    Returns ``(vertices, hair)`` where ``hair`` labels the path from the base
    to the core; ``vertices`` is empty for the trivial subgroup.
    """
    deg = g.degree()
    removed = set()
    queue = deque(v for v in range(g.nvertices) if deg[v] <= 1)
    adj = g.adjacency()
    while queue:
        v = queue.popleft()
        if v in removed:
            continue
        removed.add(v)
        for targets in adj[v].values():
            for t in targets:
                if t not in removed and t != v:
                    deg[t] -= 1
                    if deg[t] <= 1:
                        queue.append(t)
    vertices = frozenset(range(g.nvertices)) - removed
    if not vertices:
        return vertices, ()
    paths, _ = _tree_paths(g)
    nearest = min(vertices, key=lambda v: (len(paths[v]), paths[v]))
    return vertices, paths[nearest]


def _rooted_signature(g: StallingsGraph, vertices, root):
    delta = g.delta
    order = {root: 0}
    queue = deque([root])
    edges = []
    nletters = g.alphabet.nletters
    while queue:
        v = queue.popleft()
        for x in range(nletters):
            t = delta[v].get(x)
            if t is None or t not in vertices:
                continue
            if t not in order:
                order[t] = len(order)
                queue.append(t)
            if not x & 1:
                edges.append((order[v], x, order[t]))
    return len(order), frozenset(edges)


def conjugate_free(g1: StallingsGraph, g2: StallingsGraph) -> Optional[Word]:
    """A word ``x`` with ``x^-1 H1 x = H2``, or ``None`` if none exists."""
    _check_same_alphabet(g1, g2)
    core1, hair1 = core(g1)
    core2, hair2 = core(g2)
    if not core1 or not core2:
        return () if not core1 and not core2 else None
    if len(core1) != len(core2):
        return None
    c1 = g1.read(hair1)
    c2 = g2.read(hair2)
    target = _rooted_signature(g1, core1, c1)
    paths, _ = _tree_paths(g2, core2, c2)
    for v in sorted(core2, key=lambda v: (len(paths[v]), paths[v])):
        if _rooted_signature(g2, core2, v) == target:
            return multiply(hair1, inverse(paths[v]), inverse(hair2))
    return None


def subgroup_generators_from_strings(alphabet: Alphabet, texts: Iterable[str]) -> list:
    out = []
    for t in texts:
        t = t.strip()
        if t == "":
            continue
        out.append(alphabet.parse(t))
    return out


__all__ = [
    "INFINITE",
    "GraphError",
    "StallingsGraph",
    "WordError",
    "add_loop",
    "bouquet",
    "canonical",
    "conjugate_free",
    "core",
    "fold",
    "fold_naive",
    "index_free",
    "intersect_free",
    "isomorphic",
    "membership_free",
    "rank_and_basis",
    "stallings_graph",
    "trim",
]
