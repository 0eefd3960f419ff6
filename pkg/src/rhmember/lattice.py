"""Subgroups of free abelian groups, and the peripheral structure.

Subgroups of Z^n are kept in row-style Hermite normal form: pivots are
positive, pivot columns strictly increase down the rows, and every entry
above a pivot lies in ``[0, pivot)``.  This makes the basis canonical.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .words import Alphabet, Word, WordError, free_reduce, letter

INFINITE = math.inf


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeSubgroup:
    ambient_rank: int
    basis: tuple  # HNF rows, each a tuple of ints

    @property
    def rank(self) -> int:
        return len(self.basis)

    def pivots(self) -> list:
        return [next(j for j, e in enumerate(row) if e) for row in self.basis]

    def __contains__(self, v) -> bool:
        return lattice_membership(self, v)


def hnf(vectors: Iterable[Sequence[int]], n: int = None) -> LatticeSubgroup:
    """Hermite normal form of the subgroup generated by ``vectors``."""
    rows = [list(v) for v in vectors]
    if n is None:
        if not rows:
            raise LatticeError("ambient rank is needed for an empty generating set")
        n = len(rows[0])
    for r in rows:
        if len(r) != n:
            raise LatticeError("vectors of different lengths")
    r = 0
    for col in range(n):
        # gcd elimination in this column among rows r..end
        while True:
            nonzero = [i for i in range(r, len(rows)) if rows[i][col]]
            if not nonzero:
                break
            piv = min(nonzero, key=lambda i: abs(rows[i][col]))
            rows[r], rows[piv] = rows[piv], rows[r]
            done = True
            p = rows[r][col]
            for i in range(r + 1, len(rows)):
                if rows[i][col]:
                    q = rows[i][col] // p
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
                    if rows[i][col]:
                        done = False
            if done:
                break
        if r < len(rows) and rows[r][col]:
            if rows[r][col] < 0:
                rows[r] = [-a for a in rows[r]]
            p = rows[r][col]
            for i in range(r):
                q = rows[i][col] // p
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], rows[r])]
            r += 1
    basis = tuple(tuple(row) for row in rows[:r])
    return LatticeSubgroup(n, basis)


def lattice_membership(s: LatticeSubgroup, v: Sequence[int]) -> bool:
    """Back-substitution against the HNF basis."""
    if len(v) != s.ambient_rank:
        raise LatticeError(f"expected a vector of length {s.ambient_rank}, got {len(v)}")
    v = list(v)
    col = 0
    for row, p in zip(s.basis, s.pivots()):
        if any(v[j] for j in range(col, p)):
            return False
        q, rem = divmod(v[p], row[p])
        if rem:
            return False
        if q:
            v = [a - q * b for a, b in zip(v, row)]
        col = p + 1
    return not any(v)


def finite_index_test(s: LatticeSubgroup):
    """Index in Z^n: the product of the pivots when the rank is full."""
    if s.rank < s.ambient_rank:
        return INFINITE
    return math.prod(row[p] for row, p in zip(s.basis, s.pivots()))


def _full_rank_hnfs(n: int, m: int) -> list:
    """Full-rank HNF matrices of size n whose largest entry is exactly m."""
    out = []
    for diag in itertools.product(range(1, m + 1), repeat=n):
        if max(diag) != m:
            continue
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for values in itertools.product(*[range(diag[j]) for _, j in slots]):
            mat = [[0] * n for _ in range(n)]
            for i in range(n):
                mat[i][i] = diag[i]
            for (i, j), val in zip(slots, values):
                mat[i][j] = val
            out.append(tuple(tuple(row) for row in mat))
    out.sort()
    return out


def enumerate_finite_index(n: int) -> Iterator[LatticeSubgroup]:
    """Every finite-index subgroup of Z^n exactly once.

    Ordered by largest entry of the canonical basis, then lexicographically.
    """
    if n == 0:
        yield LatticeSubgroup(0, ())
        return
    m = 1
    while True:
        for basis in _full_rank_hnfs(n, m):
            yield LatticeSubgroup(n, basis)
        m += 1


class FiniteIndexCursor:
    """Random access into :func:`enumerate_finite_index` with memoisation."""

    def __init__(self, n: int):
        self.n = n
        self._gen = enumerate_finite_index(n)
        self._seen = []

    def __getitem__(self, k: int) -> LatticeSubgroup:
        while len(self._seen) <= k:
            try:
                self._seen.append(next(self._gen))
            except StopIteration:
                raise IndexError(k) from None
        return self._seen[k]

    def has(self, k: int) -> bool:
        try:
            self[k]
        except IndexError:
            return False
        return True


class Peripheral:
    """A free abelian peripheral subgroup of rank ``n`` on its own alphabet.

    ``embedding`` maps each peripheral generator name to a word over the
    ambient alphabet ``A``.
    """

    def __init__(self, name: str, alphabet: Alphabet, embedding: dict, ambient: Alphabet):
        self.name = name
        self.alphabet = alphabet
        self.ambient = ambient
        self.embedding = {}
        for sym in alphabet:
            if sym not in embedding:
                raise LatticeError(f"peripheral {name}: no embedding for {sym!r}")
            w = ambient.check(embedding[sym])
            if free_reduce(w) != w:
                raise LatticeError(f"peripheral {name}: embedding of {sym!r} is not reduced")
            self.embedding[sym] = w

    @property
    def rank(self) -> int:
        return len(self.alphabet)

    def __repr__(self):
        return f"Peripheral({self.name!r}, rank={self.rank})"

    def word_to_vector(self, w: Sequence[int]) -> tuple:
        v = [0] * self.rank
        for x in w:
            if not 0 <= x < self.alphabet.nletters:
                raise LatticeError(f"letter {x!r} is not in the alphabet of {self.name}")
            v[x >> 1] += -1 if x & 1 else 1
        return tuple(v)

    def vector_to_word(self, v: Sequence[int]) -> Word:
        if len(v) != self.rank:
            raise LatticeError("vector length does not match the peripheral rank")
        out = []
        for i, e in enumerate(v):
            out.extend([letter(i, 1 if e > 0 else -1)] * abs(e))
        return tuple(out)

    def embed(self, w: Sequence[int]) -> Word:
        """Image in F(A) of a word over the peripheral alphabet."""
        out = []
        for x in w:
            img = self.embedding[self.alphabet.symbols[x >> 1]]
            out.extend(tuple(y ^ 1 for y in reversed(img)) if x & 1 else img)
        return free_reduce(out)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "alphabet": list(self.alphabet),
            "embedding": {k: self.ambient.format(w) for k, w in self.embedding.items()},
        }


def peripheral_word_to_vector(p: Peripheral, w: Sequence[int]) -> tuple:
    return p.word_to_vector(w)


def vector_to_word(p: Peripheral, v: Sequence[int]) -> Word:
    return p.vector_to_word(v)


class PeripheralStructure:
    """The finite collection of peripheral subgroups."""

    def __init__(self, peripherals: Sequence[Peripheral] = ()):
        self.peripherals = tuple(peripherals)
        seen = {}
        for p in self.peripherals:
            for sym in p.alphabet:
                if sym in seen:
                    raise LatticeError(
                        f"generator {sym!r} appears in peripherals {seen[sym]} and {p.name}"
                    )
                seen[sym] = p.name
                # names shared with A must denote that very generator
                if sym in p.ambient and p.embedding[sym] != (letter(p.ambient.index(sym)),):
                    raise LatticeError(
                        f"peripheral letter {sym!r} clashes with the ambient generator"
                    )

    def __len__(self):
        return len(self.peripherals)

    def __iter__(self):
        return iter(self.peripherals)

    def __getitem__(self, i):
        return self.peripherals[i]

    @classmethod
    def from_dict(cls, data: dict, ambient: Alphabet) -> "PeripheralStructure":
        out = []
        for entry in data.get("peripherals", ()):
            alphabet = Alphabet(entry["alphabet"])
            if "rank" in entry and entry["rank"] != len(alphabet):
                raise LatticeError(f"peripheral {entry.get('name')}: rank/alphabet mismatch")
            emb = {k: ambient.parse(v) for k, v in entry["embedding"].items()}
            out.append(Peripheral(entry.get("name", f"P{len(out) + 1}"), alphabet, emb, ambient))
        return cls(out)

    def to_dict(self) -> dict:
        return {"peripherals": [p.to_dict() for p in self.peripherals]}
