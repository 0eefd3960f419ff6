"""Automatic structures: word acceptor plus right-multiplier automata.

The builtin structures (free groups, free abelian groups, and free
products of these) are ShortLex structures.  Their multipliers are built
by the word-difference construction: a pair automaton that tracks the
states of the word acceptor on both tapes together with the group element
``prefix(u)^-1 prefix(v)``, the latter kept in normal form and bounded in
length.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

from . import automata
from .automata import AutomatonError, Fsa, PairFsa
from .words import Alphabet, Word, WordError, free_reduce, inverse


class StructureError(ValueError):
    """An automatic structure is inconsistent or unusable for the request."""


class AutomaticStructure:
    """Language of representatives plus one multiplier per letter.

    ``multipliers[x]`` recognises ``{(u, v) in L x L : u x = v}`` for the
    letter code ``x``; ``equality`` recognises ``u = v``.  ``normal_form``
    is an optional independent normal-form function (present on builtins)
    used only for validation and as a test oracle.
    """

    def __init__(
        self,
        alphabet: Alphabet,
        acceptor: Fsa,
        multipliers: dict,
        equality: PairFsa,
        unique_reps: bool = True,
        geodesic: bool = False,
        normal_form: Optional[Callable] = None,
        name: str = "structure",
    ):
        names = alphabet.letter_names()
        if acceptor.alphabet != names:
            raise StructureError("word acceptor alphabet does not match the structure")
        for x in range(alphabet.nletters):
            if x not in multipliers:
                raise StructureError(f"missing multiplier for {names[x]}")
            if multipliers[x].letters != names:
                raise StructureError(f"multiplier for {names[x]} has the wrong alphabet")
        if equality.letters != names:
            raise StructureError("equality multiplier has the wrong alphabet")
        self.alphabet = alphabet
        self.acceptor = acceptor
        self.multipliers = dict(multipliers)
        self.equality = equality
        self.unique_reps = unique_reps
        self.geodesic = geodesic
        self.normal_form = normal_form
        self.name = name
        self._word_mults = {(): equality}
        self._reps = {}
        self._identity = None

    def __repr__(self):
        return f"<AutomaticStructure {self.name} on {list(self.alphabet)}>"

    @property
    def letter_names(self) -> tuple:
        return self.alphabet.letter_names()

    def in_language(self, w: Sequence[int]) -> bool:
        return self.acceptor.accepts(w)

    def identity_rep(self) -> Word:
        if self._identity is None:
            self._identity = self._apply(self.equality, ())
        return self._identity

    def _apply(self, r: PairFsa, u) -> Word:
        try:
            return automata.apply(r, u)
        except AutomatonError as exc:
            raise StructureError(f"multiplier application failed: {exc}") from None

    def representative(self, w: Sequence[int]) -> Word:
        """The L-representative of ``w``, built one letter at a time from the identity."""
        w = self.alphabet.check(w)
        if len(self._reps) > 200_000:
            self._reps.clear()
        v = self._reps.get(w)
        if v is not None:
            return v
        # longest cached prefix
        i = len(w)
        while i > 0 and w[:i] not in self._reps:
            i -= 1
        v = self._reps[w[:i]] if i else self.identity_rep()
        for j in range(i, len(w)):
            v = self._apply(self.multipliers[w[j]], v)
            self._reps[w[:j + 1]] = v
        return v

    def word_problem(self, w: Sequence[int]) -> bool:
        """Whether ``w`` is the identity of the group."""
        return self.representative(w) == self.identity_rep()

    def equal(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.representative(u) == self.representative(v)

    def multiplier_for_word(self, h: Sequence[int]) -> PairFsa:
        """``{(u, v) in L x L : u h = v}``, composed from letter multipliers."""
        h = free_reduce(self.alphabet.check(h))
        m = self._word_mults.get(h)
        if m is None:
            prefix = self.multiplier_for_word(h[:-1]) if len(h) > 1 else None
            last = self.multipliers[h[-1]]
            m = last if prefix is None else automata.compose(prefix, last)
            self._word_mults[h] = m
        return m

    # -- bundle I/O ---------------------------------------------------------

    def save(self, directory) -> None:
        os.makedirs(directory, exist_ok=True)
        names = self.letter_names
        manifest = {
            "name": self.name,
            "alphabet": list(self.alphabet.symbols),
            "unique_reps": self.unique_reps,
            "geodesic": self.geodesic,
            "acceptor": "acceptor.json",
            "equality": "mult_eq.json",
            "multipliers": {names[x]: f"mult_{x}.json" for x in range(len(names))},
        }
        _dump(os.path.join(directory, "manifest.json"), manifest)
        _dump(os.path.join(directory, "acceptor.json"), self.acceptor.to_dict())
        _dump(os.path.join(directory, "mult_eq.json"), self.equality.to_dict())
        for x in range(len(names)):
            _dump(os.path.join(directory, f"mult_{x}.json"), self.multipliers[x].to_dict())

    @classmethod
    def load(cls, directory) -> "AutomaticStructure":
        path = directory
        if os.path.isdir(directory):
            path = os.path.join(directory, "manifest.json")
        directory = os.path.dirname(path)
        try:
            with open(path) as fh:
                manifest = json.load(fh)
            alphabet = Alphabet(manifest["alphabet"])
            acceptor = Fsa.from_dict(_load(os.path.join(directory, manifest["acceptor"])))
            equality = PairFsa.from_dict(_load(os.path.join(directory, manifest["equality"])))
            names = alphabet.letter_names()
            mults = {}
            for name, fname in manifest["multipliers"].items():
                if name not in names:
                    raise StructureError(f"multiplier for unknown letter {name!r}")
                mults[names.index(name)] = PairFsa.from_dict(_load(os.path.join(directory, fname)))
        except (KeyError, TypeError, AutomatonError, WordError) as exc:
            raise StructureError(f"invalid structure bundle: {exc}") from None
        return cls(
            alphabet, acceptor, mults, equality,
            unique_reps=bool(manifest.get("unique_reps", False)),
            geodesic=bool(manifest.get("geodesic", False)),
            name=manifest.get("name", "structure"),
        )


def _dump(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load(path):
    with open(path) as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# word-difference construction


def word_difference_multiplier(
    acceptor: Fsa, normal_form: Callable, target: Sequence[int], radius: int
) -> PairFsa:
    """Pair automaton for ``{(u, v) : u, v in L, u^-1 v = target}``.

    Only pairs whose prefix differences stay within ``radius`` (in normal
    form length) are recognised; ``validate`` checks that this loses nothing.
    """
    names = acceptor.alphabet
    k = len(names)
    pad = k
    k1 = k + 1
    table = acceptor.table()
    acc = acceptor.accepting
    end = -1
    goal = normal_form(tuple(target))

    @lru_cache(maxsize=None)
    def step(d, x, y):
        w = d
        if x != pad:
            w = (x ^ 1,) + w
        if y != pad:
            w = w + (y,)
        return normal_form(w)

    def moves(p):
        out = []
        if p != end:
            out.extend(table[p].items())
            if p in acc:
                out.append((pad, end))
        else:
            out.append((pad, end))
        return out

    start = (acceptor.initial, acceptor.initial, ())
    index = {start: 0}
    states = [start]
    delta = []
    i = 0
    while i < len(states):
        p, q, d = states[i]
        row = {}
        qm = moves(q)
        for x, p2 in moves(p):
            for y, q2 in qm:
                if x == pad and y == pad:
                    continue
                d2 = step(d, x, y)
                if len(d2) > radius:
                    continue
                t = (p2, q2, d2)
                j = index.get(t)
                if j is None:
                    j = index[t] = len(states)
                    states.append(t)
                row[x * k1 + y] = (j,)
        delta.append(row)
        i += 1
    accepting = {
        i for i, (p, q, d) in enumerate(states)
        if (p == end or p in acc) and (q == end or q in acc) and d == goal
    }
    fsa = Fsa.from_delta(automata.pair_alphabet(names), delta, 0, accepting)
    return PairFsa(names, automata.minimize(fsa))


def structure_from_normal_form(
    alphabet: Alphabet,
    acceptor: Fsa,
    normal_form: Callable,
    radius: int = 2,
    geodesic: bool = True,
    name: str = "structure",
) -> AutomaticStructure:
    acceptor = automata.minimize(acceptor)
    mults = {
        x: word_difference_multiplier(acceptor, normal_form, (x,), radius)
        for x in range(alphabet.nletters)
    }
    eq = word_difference_multiplier(acceptor, normal_form, (), radius)
    return AutomaticStructure(
        alphabet, acceptor, mults, eq,
        unique_reps=True, geodesic=geodesic, normal_form=normal_form, name=name,
    )


# ---------------------------------------------------------------------------
# builtins


def _as_alphabet(spec) -> Alphabet:
    if isinstance(spec, Alphabet):
        return spec
    if isinstance(spec, int):
        return Alphabet("abcdefghijklmnopqrstuvwxyz"[:spec]) if spec <= 26 else Alphabet(
            f"x{i + 1}" for i in range(spec)
        )
    return Alphabet(spec)


def builtin_shortlex_free(alphabet) -> AutomaticStructure:
    """Free group: L is every freely reduced word."""
    alphabet = _as_alphabet(alphabet)
    acceptor = automata.reduced_words_fsa(alphabet.letter_names())
    return structure_from_normal_form(
        alphabet, acceptor, free_reduce, radius=2, name=f"free({','.join(alphabet)})"
    )


def abelian_normal_form(ngens: int) -> Callable:
    def nf(w):
        exps = [0] * ngens
        for x in w:
            exps[x >> 1] += -1 if x & 1 else 1
        out = []
        for i, e in enumerate(exps):
            out.extend([2 * i + (e < 0)] * abs(e))
        return tuple(out)
    return nf


def abelian_acceptor(names) -> Fsa:
    """Sorted words ``x1^k1 ... xn^kn``: state ``c + 1`` means the last letter was ``c``."""
    k = len(names)
    table = [{x: x + 1 for x in range(k)}]
    for c in range(k):
        row = {c: c + 1}
        for x in range(k):
            if (x >> 1) > (c >> 1):
                row[x] = x + 1
        table.append(row)
    return Fsa.from_table(names, table, 0, range(k + 1))


def builtin_shortlex_abelian(rank_or_alphabet) -> AutomaticStructure:
    """Free abelian group of the given rank; L is the sorted normal forms."""
    alphabet = _as_alphabet(rank_or_alphabet)
    return structure_from_normal_form(
        alphabet,
        abelian_acceptor(alphabet.letter_names()),
        abelian_normal_form(len(alphabet)),
        radius=2,
        name=f"abelian({','.join(alphabet)})",
    )


def free_product_normal_form(factors: Sequence[tuple]) -> Callable:
    """Syllable normal form; ``factors`` is a list of ``(offset, nletters, nf)``."""

    def which(x):
        for f, (off, n, _) in enumerate(factors):
            if off <= x < off + n:
                return f
        raise WordError(f"letter {x} belongs to no factor")

    def nf(w):
        syllables = []
        for x in w:
            f = which(x)
            off, _, fnf = factors[f]
            if syllables and syllables[-1][0] == f:
                merged = fnf(syllables[-1][1] + (x - off,))
                if merged:
                    syllables[-1] = (f, merged)
                else:
                    syllables.pop()
            else:
                syllables.append((f, fnf((x - off,))))
        out = []
        for f, s in syllables:
            off = factors[f][0]
            out.extend(y + off for y in s)
        return tuple(out)

    return nf


def free_product_acceptor(names, factors: Sequence[tuple]) -> Fsa:
    """Words whose maximal one-factor runs are nonempty factor representatives.

    ``factors`` is a list of ``(offset, acceptor)`` with each acceptor a DFA.
    """
    owner = {}
    for f, (off, acc) in enumerate(factors):
        for x in range(acc.nletters):
            owner[x + off] = f
    start = ("start",)
    index = {start: 0}
    states = [start]
    table = []
    accepting = {0}
    i = 0
    while i < len(states):
        st = states[i]
        row = {}
        for x in range(len(names)):
            g = owner[x]
            off, acc = factors[g]
            nxt = None
            if st == start:
                t = acc.table()[acc.initial].get(x - off)
                nxt = None if t is None else (g, t)
            else:
                f, q = st
                if f == g:
                    t = acc.table()[q].get(x - off)
                    nxt = None if t is None else (g, t)
                elif q in factors[f][1].accepting:
                    t = acc.table()[acc.initial].get(x - off)
                    nxt = None if t is None else (g, t)
            if nxt is None:
                continue
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(states)
                states.append(nxt)
                if nxt[1] in factors[nxt[0]][1].accepting:
                    accepting.add(j)
            row[x] = j
        table.append(row)
        i += 1
    return automata.minimize(Fsa.from_table(names, table, 0, accepting))


def builtin_free_product(*structures: AutomaticStructure) -> AutomaticStructure:
    """Free product of builtin structures on disjoint alphabets."""
    symbols = []
    for s in structures:
        if s.normal_form is None or not s.unique_reps:
            raise StructureError("free products need builtin factors with unique representatives")
        for name in s.alphabet:
            if name in symbols:
                raise StructureError(f"alphabet collision on generator {name!r}")
            symbols.append(name)
    alphabet = Alphabet(symbols)
    names = alphabet.letter_names()
    off = 0
    nf_factors, acc_factors = [], []
    for s in structures:
        n = s.alphabet.nletters
        nf_factors.append((off, n, s.normal_form))
        acc_factors.append((off, automata.minimize(s.acceptor)))
        off += n
    nf = free_product_normal_form(nf_factors)
    acceptor = free_product_acceptor(names, acc_factors)
    return structure_from_normal_form(
        alphabet, acceptor, nf, radius=2,
        name=" * ".join(s.name for s in structures),
    )


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    depth: int
    checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self, alphabet: Optional[Alphabet] = None) -> dict:
        fmt = alphabet.format if alphabet else (lambda w: list(w))
        return {
            "depth": self.depth,
            "checked": self.checked,
            "ok": self.ok,
            "violations": [
                {"word": fmt(u), "letter": x if alphabet is None or x is None else alphabet.letter_name(x),
                 "problem": msg}
                for u, x, msg in self.violations
            ],
        }


def validate(s: AutomaticStructure, depth: int) -> ValidationReport:
    """Bounded-depth consistency check of the multipliers.

    For every L-word ``u`` with ``|u| <= depth`` and every letter ``x``:
    ``v = M_x(u)`` exists and lies in L, the inverse multiplier maps ``v``
    back to ``u``, ``u`` is its own representative, and (on builtins)
    ``v`` agrees with the independent normal form of ``u x``.
    """
    report = ValidationReport(depth)
    names = s.letter_names
    for u in automata.words_up_to(s.acceptor, depth):
        try:
            if s.representative(u) != u:
                report.violations.append((u, None, "L-word is not its own representative"))
        except StructureError as exc:
            report.violations.append((u, None, str(exc)))
        for x in range(len(names)):
            report.checked += 1
            try:
                v = automata.apply(s.multipliers[x], u)
            except AutomatonError as exc:
                report.violations.append((u, x, f"multiplier failed: {exc}"))
                continue
            if not s.acceptor.accepts(v):
                report.violations.append((u, x, "image is not in L"))
                continue
            try:
                back = automata.apply(s.multipliers[x ^ 1], v)
            except AutomatonError as exc:
                report.violations.append((u, x, f"inverse multiplier failed: {exc}"))
                continue
            if back != u:
                report.violations.append((u, x, "inverse multiplier does not return u"))
            if s.normal_form is not None and v != s.normal_form(tuple(u) + (x,)):
                report.violations.append((u, x, "image disagrees with the normal form"))
    return report
