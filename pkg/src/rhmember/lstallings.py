"""Stallings graphs of subgroups relative to a language of representatives.

Given an automatic structure with language ``L`` (one representative per
group element) and words ``h_1, ..., h_k``, the procedure maintains a
folded graph whose base loops all map into ``H = <h_i>``.  Let ``Λ`` be the
set of ``L``-words reading base loops.  Once ``Λ`` contains the identity and
is closed under right multiplication by every ``h_i^±1`` (checked with the
multiplier automata), ``Λ`` is exactly the set of representatives of
``H``.  Until then, the ShortLex-least representative that escapes ``Λ`` is
glued in as a new base loop.  The loop halts precisely when ``Λ`` is
regular, i.e. when ``H`` is ``L``-quasi-convex.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import automata
from .automata import Fsa
from .autostruct import AutomaticStructure
from .stallings import StallingsGraph, add_loop, bouquet, fold, trim
from .words import Word, free_reduce, inverse, multiply


class LStallingsError(ValueError):
    pass


@dataclass
class Certified:
    pass


@dataclass
class Counterexample:
    witness: Word  # a word of the loop language
    generator: Word  # h, or h^-1
    image: Word  # representative of witness * generator, not in the loop language


@dataclass
class BudgetExhausted:
    spent: dict = field(default_factory=dict)

    verdict = "budget-exhausted"


class LStallingsGraph:
    """A folded graph over the structure's alphabet, certified or not."""

    def __init__(self, graph: StallingsGraph, structure: AutomaticStructure,
                 certified: bool = False, quasiconvexity_witness: Optional[int] = None):
        self.graph = graph
        self.structure = structure
        self.certified = certified
        self.quasiconvexity_witness = quasiconvexity_witness
        self._language = None

    def __repr__(self):
        state = "certified" if self.certified else "uncertified"
        return f"LStallingsGraph({self.graph.nvertices} vertices, {state})"

    @property
    def language(self) -> Fsa:
        if self._language is None:
            self._language = loop_language(self)
        return self._language


def _require_unique(structure: AutomaticStructure) -> None:
    if not structure.unique_reps:
        raise LStallingsError("structures without unique representatives are not supported")


def graph_fsa(graph: StallingsGraph) -> Fsa:
    """The graph read as a DFA from the base vertex back to itself."""
    names = graph.alphabet.letter_names()
    return Fsa.from_table(names, graph.delta, graph.base, {graph.base})


def loop_language(g: LStallingsGraph) -> Fsa:
    """L-words that label base loops, as a minimal DFA."""
    return automata.intersection(graph_fsa(g.graph), g.structure.acceptor)


def closure_certificate(g: LStallingsGraph, subgroup_generators: Sequence[Word]):
    """Certified, or the ShortLex-least escape from the loop language."""
    s = g.structure
    _require_unique(s)
    lang = g.language
    ident = s.identity_rep()
    if not lang.accepts(ident):
        return Counterexample(ident, (), ident)
    for h in subgroup_generators:
        h = free_reduce(h)
        if not h:
            continue
        for k in (h, inverse(h)):
            m = s.multiplier_for_word(k)
            ok, v = automata.subset(automata.image(m, lang), lang)
            if not ok:
                w = automata.apply(automata.swap(m), v)
                return Counterexample(w, k, v)
    return Certified()


def grow(g: LStallingsGraph, witness: Word, generator: Word) -> LStallingsGraph:
    """Glue the representative of ``witness * generator`` as a base loop."""
    s = g.structure
    v = s.representative(multiply(witness, generator))
    return LStallingsGraph(_glue(g.graph, [v]), s)


def _glue(graph: StallingsGraph, words) -> StallingsGraph:
    edges = list(graph.edges)
    n = graph.nvertices
    for w in words:
        n = add_loop(graph.alphabet, n, edges, graph.base, w)
    return trim(fold(StallingsGraph(graph.alphabet, n, edges, graph.base)))


def seed_graph(structure: AutomaticStructure, generators: Sequence[Word]) -> LStallingsGraph:
    """Loops for the representatives of all generators, folded and trimmed."""
    reps = [structure.representative(h) for h in generators]
    return LStallingsGraph(trim(fold(bouquet(structure.alphabet, reps))), structure)


def _spanned_fragment(g: LStallingsGraph, lang: Fsa) -> StallingsGraph:
    """The canonical fragment of the Schreier graph spanned by ``lang``.

    Keeps only the edges used by L-words reading base loops, then
    identifies vertices lying in the same coset and folds.  Both steps
    depend only on the set of representatives, not on how it was reached.
    """
    graph = g.graph
    s = g.structure
    delta = graph.delta
    acc = s.acceptor if s.acceptor.is_deterministic() else automata.determinize(s.acceptor)
    ltab = acc.table()
    start = (graph.base, acc.initial)
    index = {start: 0}
    states = [start]
    words = [()]
    succ = []
    i = 0
    while i < len(states):
        v, q = states[i]
        out = []
        for x, v2 in sorted(delta[v].items()):
            q2 = ltab[q].get(x)
            if q2 is None:
                continue
            t = (v2, q2)
            j = index.get(t)
            if j is None:
                j = index[t] = len(states)
                states.append(t)
                words.append(words[i] + (x,))
            out.append((x, j))
        succ.append(out)
        i += 1
    good = {i for i, (v, q) in enumerate(states) if v == graph.base and q in acc.accepting}
    rev = [[] for _ in states]
    for i, out in enumerate(succ):
        for _, j in out:
            rev[j].append(i)
    useful = set(good)
    stack = list(good)
    while stack:
        j = stack.pop()
        for i in rev[j]:
            if i not in useful:
                useful.add(i)
                stack.append(i)
    prefix = {graph.base: ()}
    edges = set()
    for i in sorted(useful):
        v = states[i][0]
        prefix.setdefault(v, words[i])
        for x, j in succ[i]:
            if j in useful:
                v2 = states[j][0]
                edges.add((v2, x >> 1, v) if x & 1 else (v, x >> 1, v2))
    # vertices p, p' lie in the same coset iff p p'^-1 is in H
    verts = sorted(prefix)
    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a in range(len(verts)):
        for b in range(a + 1, len(verts)):
            u, w = verts[a], verts[b]
            if find(u) == find(w):
                continue
            if lang.accepts(s.representative(multiply(prefix[u], inverse(prefix[w])))):
                parent[find(w)] = find(u)
    num = {}
    for v in verts:
        num.setdefault(find(v), len(num))
    merged = [(num[find(a)], x, num[find(b)]) for a, x, b in edges]
    out = StallingsGraph(graph.alphabet, len(num), merged, num[find(graph.base)])
    return fold(out)


def _radius(graph: StallingsGraph) -> int:
    delta = graph.delta
    dist = {graph.base: 0}
    queue = deque([graph.base])
    while queue:
        v = queue.popleft()
        for t in delta[v].values():
            if t not in dist:
                dist[t] = dist[v] + 1
                queue.append(t)
    return max(dist.values())


class LStallingsComputation:
    """Resumable certify-and-grow loop; one :meth:`step` is one iteration."""

    def __init__(self, structure: AutomaticStructure, generators: Sequence[Word]):
        _require_unique(structure)
        self.structure = structure
        self.generators = [free_reduce(structure.alphabet.check(h)) for h in generators]
        self.current = seed_graph(structure, self.generators)
        self.steps = 0
        self.result: Optional[LStallingsGraph] = None

    def step(self) -> Optional[LStallingsGraph]:
        if self.result is not None:
            return self.result
        self.steps += 1
        cert = closure_certificate(self.current, self.generators)
        if isinstance(cert, Certified):
            lang = self.current.language
            frag = _spanned_fragment(self.current, lang)
            out = LStallingsGraph(frag, self.structure, True, _radius(frag))
            out._language = lang
            self.result = out
            return out
        self.current = LStallingsGraph(_glue(self.current.graph, [cert.image]), self.structure)
        return None

    def run(self, budget: int):
        while self.result is None and self.steps < budget:
            self.step()
        if self.result is not None:
            return self.result
        return BudgetExhausted({"steps": self.steps, "vertices": self.current.graph.nvertices})


def compute_l_stallings(structure: AutomaticStructure, generators: Sequence[Word],
                        step_budget: int):
    """Certified graph of ``<generators>``, or BudgetExhausted."""
    return LStallingsComputation(structure, generators).run(step_budget)


def membership_l(g: LStallingsGraph, w: Word) -> bool:
    """Read the representative of ``w`` from the base of a certified graph."""
    if not g.certified:
        raise LStallingsError("membership needs a certified graph")
    rep = g.structure.representative(w)
    return g.graph.read(rep) == g.graph.base
