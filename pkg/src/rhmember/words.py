"""Alphabets, words in free groups, and finite presentations.

A word is a plain tuple of integer letter codes.  Generator ``i`` is coded
as ``2*i`` and its inverse as ``2*i + 1``, so ``code ^ 1`` inverts a letter
and the natural integer order on codes is the ShortLex letter order
``a < a^-1 < b < b^-1 < ...``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Word = tuple  # tuple[int, ...]

EMPTY: Word = ()

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_POWER_RE = re.compile(r"^(?P<name>[A-Za-z_][A-Za-z0-9_]*)(\^(?P<exp>[+-]?\d+))?$")


class WordError(ValueError):
    """Malformed word, unknown generator, or invalid letter code."""


def inverse_letter(x: int) -> int:
    return x ^ 1


def generator_of(x: int) -> int:
    return x >> 1


def sign_of(x: int) -> int:
    return -1 if x & 1 else 1


def letter(gen: int, sign: int = 1) -> int:
    return 2 * gen + (1 if sign < 0 else 0)


class Alphabet:
    """An ordered list of generator names.

    The order fixes the ShortLex order on letters: each generator comes
    immediately before its own inverse.
    """

    __slots__ = ("symbols", "_index", "_single")

    def __init__(self, symbols: Iterable[str]):
        symbols = tuple(symbols)
        seen = set()
        for s in symbols:
            if not isinstance(s, str) or not _NAME_RE.match(s):
                raise WordError(f"invalid generator name {s!r}")
            if s in seen:
                raise WordError(f"duplicate generator name {s!r}")
            seen.add(s)
        self.symbols = symbols
        self._index = {s: i for i, s in enumerate(symbols)}
        # uppercase-as-inverse shorthand is only unambiguous for lowercase
        # single-letter alphabets
        self._single = bool(symbols) and all(
            len(s) == 1 and s.islower() for s in symbols
        )

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return f"Alphabet({list(self.symbols)!r})"

    @property
    def nletters(self) -> int:
        return 2 * len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise WordError(f"unknown generator {name!r}") from None

    def __contains__(self, name) -> bool:
        return name in self._index

    def letter_name(self, x: int) -> str:
        self.check_letter(x)
        name = self.symbols[x >> 1]
        return name + "^-1" if x & 1 else name

    def letter_names(self) -> tuple:
        return tuple(self.letter_name(x) for x in range(self.nletters))

    def check_letter(self, x: int) -> None:
        if not isinstance(x, int) or x < 0 or x >= self.nletters:
            raise WordError(f"invalid letter code {x!r} for {self!r}")

    def check(self, w: Sequence[int]) -> Word:
        for x in w:
            self.check_letter(x)
        return tuple(w)

    def parse(self, text: str, reduce: bool = True) -> Word:
        """Parse ``a*b^-1*c^2``-style syntax into a word.

        ``""`` and ``"1"`` denote the empty word.  For alphabets of
        lowercase single letters, a token such as ``abA`` is also accepted,
        uppercase standing for the inverse.
        """
        text = text.strip()
        if text in ("", "1"):
            return EMPTY
        out = []
        pos = 0
        for token in text.split("*"):
            stripped = token.strip()
            out.extend(self._parse_token(stripped, text, pos))
            pos += len(token) + 1
        w = tuple(out)
        return free_reduce(w) if reduce else w

    def _parse_token(self, token: str, text: str, pos: int) -> list:
        if not token:
            raise WordError(f"empty factor at position {pos} in {text!r}")
        m = _POWER_RE.match(token)
        if m and m.group("name") in self._index:
            x = letter(self._index[m.group("name")])
            exp = int(m.group("exp")) if m.group("exp") is not None else 1
            if exp < 0:
                x, exp = x ^ 1, -exp
            return [x] * exp
        if self._single and token.isalpha():
            out = []
            for i, ch in enumerate(token):
                if ch in self._index:
                    out.append(letter(self._index[ch]))
                elif ch.lower() in self._index:
                    out.append(letter(self._index[ch.lower()], -1))
                else:
                    raise WordError(
                        f"unknown generator {ch!r} at position {pos + i} in {text!r}"
                    )
            return out
        name = m.group("name") if m else token
        raise WordError(f"unknown generator {name!r} at position {pos} in {text!r}")

    def format(self, w: Sequence[int]) -> str:
        """Inverse of :meth:`parse`; the empty word formats as ``""``."""
        return "*".join(self.letter_name(x) for x in w)

    def to_json(self):
        return list(self.symbols)


def inverse(w: Sequence[int]) -> Word:
    return tuple(x ^ 1 for x in reversed(w))


def free_reduce(w: Sequence[int]) -> Word:
    """Cancel adjacent inverse pairs until none remain."""
    stack = []
    for x in w:
        if x < 0:
            raise WordError(f"invalid letter code {x!r}")
        if stack and stack[-1] == x ^ 1:
            stack.pop()
        else:
            stack.append(x)
    return tuple(stack)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != w[i + 1] ^ 1 for i in range(len(w) - 1))


def multiply(*words: Sequence[int]) -> Word:
    out = []
    for w in words:
        for x in w:
            if out and out[-1] == x ^ 1:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return power(inverse(w), -k)
    return multiply(*([tuple(w)] * k))


def conjugate(w: Sequence[int], x: Sequence[int]) -> Word:
    """``w^x = x^-1 w x``, the convention used throughout the package."""
    return multiply(inverse(x), w, x)


def commutator(u: Sequence[int], v: Sequence[int]) -> Word:
    return multiply(u, v, inverse(u), inverse(v))


def cyclic_reduce(w: Sequence[int]) -> tuple:
    """Split a freely reduced ``w`` as ``u c u^-1`` with ``c`` cyclically reduced.

    Returns ``(c, u)`` with ``u`` of maximal length.
    """
    w = tuple(w)
    if not is_reduced(w):
        raise WordError("cyclic_reduce expects a freely reduced word")
    i, j = 0, len(w) - 1
    while i < j and w[i] == w[j] ^ 1:
        i += 1
        j -= 1
    return w[i:j + 1], w[:i]


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and not (len(w) > 1 and w[0] == w[-1] ^ 1)


def shortlex_key(w: Sequence[int]):
    return (len(w), tuple(w))


def rotations(w: Sequence[int]) -> list:
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))] if w else []


def reduced_words(ngens: int, max_length: int, min_length: int = 0) -> Iterator[Word]:
    """All freely reduced words of the given length range, in ShortLex order."""
    nletters = 2 * ngens
    level = [EMPTY]
    for n in range(max_length + 1):
        if n >= min_length:
            yield from level
        if n == max_length:
            break
        nxt = []
        for w in level:
            for x in range(nletters):
                if w and w[-1] == x ^ 1:
                    continue
                nxt.append(w + (x,))
        level = nxt


def shortlex_words(ngens: int) -> Iterator[Word]:
    """Unbounded ShortLex enumeration of the free group on ``ngens`` generators."""
    n = 0
    while True:
        yield from reduced_words(ngens, n, n)
        n += 1
        if ngens == 0:
            return


def all_words(nletters: int, max_length: int) -> Iterator[Word]:
    """Every word over ``range(nletters)`` up to ``max_length``, ShortLex order."""
    level = [EMPTY]
    for n in range(max_length + 1):
        yield from level
        if n < max_length:
            level = [w + (x,) for w in level for x in range(nletters)]


def translate(w: Sequence[int], source: Alphabet, target: Alphabet) -> Word:
    """Re-encode a word by generator name; every name must exist in ``target``."""
    out = []
    for x in w:
        out.append(letter(target.index(source.symbols[x >> 1]), sign_of(x)))
    return tuple(out)


@dataclass(frozen=True)
class Presentation:
    """A finite presentation; relators are stored as given, not closed."""

    alphabet: Alphabet
    relators: tuple = ()

    def __post_init__(self):
        rels = []
        for r in self.relators:
            r = self.alphabet.check(r)
            if not r:
                raise WordError("relators must be nonempty")
            if not is_cyclically_reduced(r):
                raise WordError(
                    f"relator {self.alphabet.format(r)!r} is not cyclically reduced"
                )
            rels.append(r)
        object.__setattr__(self, "relators", tuple(rels))

    @classmethod
    def from_strings(cls, symbols, relators=()):
        alphabet = symbols if isinstance(symbols, Alphabet) else Alphabet(symbols)
        rels = []
        for text in relators:
            w = alphabet.parse(text)
            c, _ = cyclic_reduce(w)
            if not c:
                raise WordError(f"relator {text!r} is trivial in the free group")
            rels.append(c)
        return cls(alphabet, tuple(rels))

    @classmethod
    def from_dict(cls, data: dict) -> "Presentation":
        if "alphabet" not in data:
            raise WordError("presentation is missing 'alphabet'")
        return cls.from_strings(data["alphabet"], data.get("relators", ()))

    def to_dict(self) -> dict:
        return {
            "alphabet": self.alphabet.to_json(),
            "relators": [self.alphabet.format(r) for r in self.relators],
        }

    @classmethod
    def load(cls, path) -> "Presentation":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def format(self) -> str:
        rels = ", ".join(self.alphabet.format(r) for r in self.relators)
        return f"< {', '.join(self.alphabet)} | {rels} >"


def closure_of(relators: Iterable[Sequence[int]]) -> tuple:
    out = set()
    for r in relators:
        r = tuple(r)
        out.update(rotations(r))
        out.update(rotations(inverse(r)))
    return tuple(sorted(out, key=shortlex_key))


def relator_closure(p: Presentation) -> Presentation:
    """Close the relators under cyclic permutation and inversion."""
    return Presentation(p.alphabet, closure_of(p.relators))
