"""Independent membership oracles used to cross-check the engines.

None of these routines share code with the folding, automata or
completion engines beyond the word utilities:

* :func:`free_membership_enum` searches products of generators after a
  length-reducing Nielsen pass,
* :class:`CosetTable` is a plain HLT Todd-Coxeter coset enumeration,
* :func:`abelian_membership` works with exponent-sum vectors,
* :class:`FreeProductOracle` compares syllable normal forms in free
  products of free abelian groups.
"""

from __future__ import annotations

from typing import Sequence

from .lattice import hnf, lattice_membership
from .words import Presentation, Word, free_reduce, inverse, multiply


class NoOracle(ValueError):
    """The instance is outside every family this module can decide."""


# --------------------------------------------------------------- free groups

def nielsen_reduce(gens: Sequence[Word]) -> list:
    """Apply length-reducing Nielsen moves until none shortens the set.

    The result generates the same subgroup, contains no trivial word and
    satisfies ``|uv| >= max(|u|, |v|)`` for ``u, v`` in ``Y ∪ Y^-1`` with
    ``uv != 1``.
    """
    ys = [free_reduce(g) for g in gens]
    ys = [y for y in ys if y]
    changed = True
    while changed:
        changed = False
        ys = [y for y in ys if y]
        for i in range(len(ys)):
            for j in range(len(ys)):
                if i == j:
                    continue
                for u in (ys[j], inverse(ys[j])):
                    for cand in (multiply(ys[i], u), multiply(u, ys[i])):
                        if len(cand) < len(ys[i]):
                            ys[i] = cand
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break
            if changed:
                break
    return [y for y in ys if y]


def satisfies_n2(ys: Sequence[Word]) -> bool:
    """Each factor of a triple product keeps a nonempty middle part."""
    letters = list(ys) + [inverse(y) for y in ys]
    for u in letters:
        for v in letters:
            if v == inverse(u):
                continue
            for w in letters:
                if w == inverse(v):
                    continue
                if len(multiply(u, v, w)) <= len(u) - len(v) + len(w):
                    return False
    return True


def free_membership_enum(gens: Sequence[Word], w: Word, strict: bool = True):
    """Brute-force membership in a subgroup of a free group.

    After Nielsen reduction, every reduced product of ``n`` generators has
    length at least ``n``, so it suffices to enumerate reduced products
    of at most ``|w|`` factors, pruning any product whose stable part
    leaves the prefixes of ``w``.  If the reduced set fails the triple
    condition the bound is not guaranteed; with ``strict`` a
    :class:`NoOracle` is raised.
    """
    w = free_reduce(w)
    if not w:
        return True
    ys = nielsen_reduce(gens)
    if not ys:
        return False
    if not satisfies_n2(ys):
        if strict:
            raise NoOracle("generating set is not Nielsen reduced")
    letters = list(ys) + [inverse(y) for y in ys]
    inv_idx = {i: (i + len(ys)) % len(letters) for i in range(len(letters))}
    limit = len(w)
    # iterative DFS over reduced products, pruning on the prefix length
    stack = [((), -1, 0)]
    while stack:
        prefix, last, depth = stack.pop()
        if prefix == w:
            return True
        if depth == limit:
            continue
        for k, y in enumerate(letters):
            if last >= 0 and k == inv_idx[last]:
                continue
            p = multiply(prefix, y)
            # in a Nielsen-reduced product at most half of the newest factor
            # can still cancel, so everything before it is a prefix of w
            keep = len(p) - len(y) // 2
            if keep > len(w) or p[:keep] != w[:keep]:
                continue
            stack.append((p, k, depth + 1))
    return False


# ------------------------------------------------------------ finite groups

class CosetTable:
    """HLT coset enumeration of ``H`` in ``G = <A | R>``.

    Only intended for small finite indices; ``max_cosets`` bounds the work.
    """

    def __init__(self, presentation: Presentation, subgroup: Sequence[Word] = (),
                 max_cosets: int = 200000):
        self.nletters = presentation.alphabet.nletters
        self.max_cosets = max_cosets
        self._table = [[None] * self.nletters]
        self._parent = [0]
        for h in subgroup:
            h = free_reduce(h)
            if h:
                self._scan_and_fill(0, h)
        c = 0
        while c < len(self._table):
            for r in presentation.relators:
                if not self._live(c):
                    break
                self._scan_and_fill(c, r)
            if self._live(c):
                for x in range(self.nletters):
                    if self._table[c][x] is None:
                        self._define(c, x)
            c += 1
        self._compact()

    # enumeration internals
    def _live(self, c):
        return self._parent[c] == c

    def _rep(self, c):
        root = c
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[c] != root:
            self._parent[c], c = root, self._parent[c]
        return root

    def _define(self, c, x):
        if len(self._table) >= self.max_cosets:
            raise NoOracle("coset enumeration exceeded its limit")
        d = len(self._table)
        self._table.append([None] * self.nletters)
        self._parent.append(d)
        self._table[c][x] = d
        self._table[d][x ^ 1] = c

    def _scan_and_fill(self, c, w):
        t = self._table
        f, b = c, c
        i, j = 0, len(w) - 1
        while True:
            while i <= j and t[f][w[i]] is not None:
                f = t[f][w[i]]
                i += 1
            if i > j:
                if f != b:
                    self._coincidence(f, b)
                return
            while j >= i and t[b][w[j] ^ 1] is not None:
                b = t[b][w[j] ^ 1]
                j -= 1
            if j < i:
                self._coincidence(f, b)
                return
            if i == j:
                t[f][w[i]] = b
                t[b][w[i] ^ 1] = f
                return
            self._define(f, w[i])

    def _merge(self, k, l, queue):
        k, l = self._rep(k), self._rep(l)
        if k == l:
            return
        k, l = min(k, l), max(k, l)
        self._parent[l] = k
        queue.append(l)

    def _coincidence(self, a, b):
        t = self._table
        queue = []
        self._merge(a, b, queue)
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(self.nletters):
                f = t[e][x]
                if f is None:
                    continue
                t[f][x ^ 1] = None
                e1, f1 = self._rep(e), self._rep(f)
                if t[e1][x] is not None:
                    self._merge(f1, t[e1][x], queue)
                elif t[f1][x ^ 1] is not None:
                    self._merge(e1, t[f1][x ^ 1], queue)
                else:
                    t[e1][x] = f1
                    t[f1][x ^ 1] = e1

    def _compact(self):
        live = [c for c in range(len(self._table)) if self._live(c)]
        num = {c: i for i, c in enumerate(live)}
        self.table = [[num[self._rep(self._table[c][x])] for x in range(self.nletters)]
                      for c in live]

    @property
    def index(self) -> int:
        return len(self.table)

    def coset_of(self, w: Word, start: int = 0) -> int:
        c = start
        for x in w:
            c = self.table[c][x]
        return c

    def contains(self, w: Word) -> bool:
        return self.coset_of(w) == 0


def finite_group_order(presentation: Presentation, max_cosets: int = 200000) -> int:
    return CosetTable(presentation, (), max_cosets).index


# ------------------------------------------------------- free abelian groups

def exponent_vector(w: Word, rank: int) -> tuple:
    v = [0] * rank
    for x in w:
        v[x >> 1] += -1 if x & 1 else 1
    return tuple(v)


def abelian_membership(gens: Sequence[Word], w: Word, rank: int) -> bool:
    """Membership in ``Z^rank`` where letter ``i`` is the ``i``-th basis vector."""
    lat = hnf([exponent_vector(h, rank) for h in gens], rank)
    return lattice_membership(lat, exponent_vector(w, rank))


# ----------------------------------------------------------- free products

class FreeProductOracle:
    """Syllable normal forms in a free product of free abelian factors.

    ``factors`` lists, per factor, the generator indices it uses (in the
    ambient alphabet).  A factor with one generator is a copy of ``Z``.
    """

    def __init__(self, factors: Sequence[Sequence[int]], ngens: int):
        self.factors = [tuple(f) for f in factors]
        self.ngens = ngens
        self.owner = {}
        for k, f in enumerate(self.factors):
            for g in f:
                if g in self.owner:
                    raise ValueError(f"generator {g} is in two factors")
                self.owner[g] = k
        if sorted(self.owner) != list(range(ngens)):
            raise ValueError("factors must partition the generators")

    def syllables(self, w: Word) -> list:
        """Normal form as a list of ``(factor, vector)`` with nonzero vectors."""
        out = []
        for x in w:
            k = self.owner[x >> 1]
            pos = self.factors[k].index(x >> 1)
            step = -1 if x & 1 else 1
            if out and out[-1][0] == k:
                vec = list(out[-1][1])
                vec[pos] += step
                out.pop()
            else:
                vec = [0] * len(self.factors[k])
                vec[pos] = step
            if any(vec):
                out.append((k, tuple(vec)))
        return out

    def word_of(self, syllables) -> Word:
        out = []
        for k, vec in syllables:
            for pos, e in enumerate(vec):
                g = self.factors[k][pos]
                out.extend([2 * g + (1 if e < 0 else 0)] * abs(e))
        return tuple(out)

    def normal_form(self, w: Word) -> Word:
        return self.word_of(self.syllables(w))

    def equal(self, u: Word, v: Word) -> bool:
        return self.syllables(multiply(u, inverse(v))) == []

    def _split_conjugate(self, h: Word):
        """Write ``h = p s p^-1`` with ``s`` one syllable, or return None."""
        syl = self.syllables(h)
        if len(syl) % 2 == 0:
            return None
        k = len(syl) // 2
        head = syl[:k]
        tail = syl[k + 1:]
        inv_head = [(f, tuple(-e for e in v)) for f, v in reversed(head)]
        if tail != inv_head:
            return None
        return self.word_of(head), syl[k]

    def standard_form(self, gens: Sequence[Word], conjugator: Word = None):
        """Describe ``<gens>`` as ``x^-1 (*_k R_k) x`` with ``R_k`` in factor ``k``.

        Returns ``(x, lattices)`` or raises :class:`NoOracle`.
        """
        gens = [g for g in gens if self.syllables(g)]
        if conjugator is not None:
            candidates = [tuple(conjugator)]
        else:
            candidates = [()]
            for g in gens:
                split = self._split_conjugate(g)
                if split is None:
                    raise NoOracle("a generator is not conjugate into a factor")
                x = inverse(split[0])
                if x not in candidates:
                    candidates.append(x)
        for x in candidates:
            lattices = self._factor_lattices(gens, x)
            if lattices is not None:
                return x, lattices
        raise NoOracle("generators do not lie in a common conjugate of a factor product")

    def _factor_lattices(self, gens, x):
        vectors = {k: [] for k in range(len(self.factors))}
        for g in gens:
            syl = self.syllables(multiply(x, g, inverse(x)))
            if len(syl) != 1:
                return None
            k, vec = syl[0]
            vectors[k].append(vec)
        return {k: hnf(vs, len(self.factors[k])) for k, vs in vectors.items()}

    def membership(self, gens: Sequence[Word], w: Word, conjugator: Word = None) -> bool:
        """Decide ``w ∈ <gens>`` for subgroups in standard form."""
        x, lattices = self.standard_form(gens, conjugator)
        for k, vec in self.syllables(multiply(x, w, inverse(x))):
            if not lattice_membership(lattices[k], vec):
                return False
        return True
