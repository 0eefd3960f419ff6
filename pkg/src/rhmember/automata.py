"""Finite automata over group alphabets and padded two-tape automata.

An :class:`Fsa` reads integer letter codes ``0 .. len(alphabet)-1``; the
alphabet is a tuple of letter names used for printing, JSON and for
checking that two automata are compatible.  Automata may be
nondeterministic; every operation that needs a DFA determinizes first.

A :class:`PairFsa` is an Fsa over pairs ``(x, y)`` of base letters or the
padding symbol, read synchronously.  The shorter word of a pair is padded
at the end, and ``(pad, pad)`` never occurs.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional, Sequence

PAD_NAME = "_"


class AutomatonError(ValueError):
    pass


class Fsa:
    """A finite automaton with one initial state."""

    __slots__ = ("alphabet", "nstates", "initial", "accepting", "delta", "_table")

    def __init__(self, alphabet, nstates: int, initial: int, accepting, transitions=()):
        alphabet = tuple(alphabet)
        delta = [dict() for _ in range(nstates)]
        k = len(alphabet)
        for p, x, q in transitions:
            if not (0 <= p < nstates and 0 <= q < nstates):
                raise AutomatonError(f"transition {(p, x, q)} has a state out of range")
            if not 0 <= x < k:
                raise AutomatonError(f"transition {(p, x, q)} has an invalid letter")
            delta[p].setdefault(x, set()).add(q)
        if not 0 <= initial < max(nstates, 1) or nstates == 0:
            raise AutomatonError("an automaton needs at least its initial state")
        accepting = frozenset(accepting)
        if any(not 0 <= q < nstates for q in accepting):
            raise AutomatonError("accepting state out of range")
        self._set(alphabet, tuple({x: tuple(sorted(t)) for x, t in d.items()} for d in delta),
                  initial, accepting)

    def _set(self, alphabet, delta, initial, accepting):
        self.alphabet = alphabet
        self.nstates = len(delta)
        self.initial = initial
        self.accepting = accepting
        self.delta = delta
        self._table = None

    @classmethod
    def from_delta(cls, alphabet, delta, initial, accepting) -> "Fsa":
        """Build from a list of ``{letter: tuple_of_targets}`` dicts, unchecked."""
        a = cls.__new__(cls)
        a._set(tuple(alphabet), tuple(delta), initial, frozenset(accepting))
        return a

    @classmethod
    def from_table(cls, alphabet, table, initial, accepting) -> "Fsa":
        """Build a DFA from a list of ``{letter: target}`` dicts."""
        delta = tuple({x: (t,) for x, t in d.items()} for d in table)
        return cls.from_delta(alphabet, delta, initial, accepting)

    def __repr__(self):
        kind = "DFA" if self.is_deterministic() else "NFA"
        return f"<{kind} {self.nstates} states, {len(self.accepting)} accepting>"

    @property
    def nletters(self) -> int:
        return len(self.alphabet)

    def transitions(self):
        for p, d in enumerate(self.delta):
            for x in sorted(d):
                for q in d[x]:
                    yield (p, x, q)

    def is_deterministic(self) -> bool:
        return all(len(t) == 1 for d in self.delta for t in d.values())

    def table(self) -> list:
        """``{letter: target}`` per state; the automaton must be deterministic."""
        if self._table is None:
            if not self.is_deterministic():
                raise AutomatonError("automaton is not deterministic")
            self._table = [{x: t[0] for x, t in d.items()} for d in self.delta]
        return self._table

    def accepts(self, word: Sequence[int]) -> bool:
        current = {self.initial}
        for x in word:
            nxt = set()
            for q in current:
                nxt.update(self.delta[q].get(x, ()))
            if not nxt:
                return False
            current = nxt
        return not self.accepting.isdisjoint(current)

    def to_dict(self) -> dict:
        names = self.alphabet
        return {
            "alphabet": list(names),
            "states": self.nstates,
            "initial": self.initial,
            "accepting": sorted(self.accepting),
            "transitions": [[p, names[x], q] for p, x, q in self.transitions()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Fsa":
        names = tuple(data["alphabet"])
        index = {n: i for i, n in enumerate(names)}
        trans = []
        for p, name, q in data["transitions"]:
            if name not in index:
                raise AutomatonError(f"unknown letter {name!r}")
            trans.append((p, index[name], q))
        return cls(names, data["states"], data.get("initial", 0), data["accepting"], trans)


def _check_alphabets(a: Fsa, b: Fsa):
    if a.alphabet != b.alphabet:
        raise AutomatonError("automata are over different alphabets")


def empty_fsa(alphabet) -> Fsa:
    return Fsa.from_delta(alphabet, ({},), 0, ())


def singleton(alphabet, word: Sequence[int]) -> Fsa:
    table = [{x: i + 1} for i, x in enumerate(word)] + [{}]
    return Fsa.from_table(alphabet, table, 0, {len(word)})


def finite_language(alphabet, words: Iterable[Sequence[int]]) -> Fsa:
    """Prefix-tree automaton of a finite set of words."""
    table = [{}]
    accepting = set()
    for w in words:
        q = 0
        for x in w:
            nxt = table[q].get(x)
            if nxt is None:
                nxt = len(table)
                table.append({})
                table[q][x] = nxt
            q = nxt
        accepting.add(q)
    return Fsa.from_table(alphabet, table, 0, accepting)


def universal(alphabet) -> Fsa:
    return Fsa.from_table(alphabet, [{x: 0 for x in range(len(alphabet))}], 0, {0})


def reduced_words_fsa(alphabet) -> Fsa:
    """All freely reduced words, for letter codes where ``x ^ 1`` is the inverse."""
    k = len(alphabet)
    if k % 2:
        raise AutomatonError("group alphabets have an even number of letters")
    # state 0: start; state x+1: last letter read was x
    table = [{x: x + 1 for x in range(k)}]
    for last in range(k):
        table.append({x: x + 1 for x in range(k) if x != last ^ 1})
    return Fsa.from_table(alphabet, table, 0, range(k + 1))


def _reachable(a: Fsa) -> set:
    seen = {a.initial}
    stack = [a.initial]
    while stack:
        p = stack.pop()
        for targets in a.delta[p].values():
            for q in targets:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
    return seen


def _coreachable(a: Fsa) -> set:
    preds = [[] for _ in range(a.nstates)]
    for p, d in enumerate(a.delta):
        for targets in d.values():
            for q in targets:
                preds[q].append(p)
    seen = set(a.accepting)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in preds[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def trim(a: Fsa) -> Fsa:
    """Keep only states that are reachable and can reach an accepting state."""
    useful = _reachable(a) & _coreachable(a)
    if a.initial not in useful:
        return empty_fsa(a.alphabet)
    order = {a.initial: 0}
    queue = deque([a.initial])
    while queue:
        p = queue.popleft()
        d = a.delta[p]
        for x in sorted(d):
            for q in d[x]:
                if q in useful and q not in order:
                    order[q] = len(order)
                    queue.append(q)
    delta = [None] * len(order)
    for p, i in order.items():
        nd = {}
        for x, targets in a.delta[p].items():
            t = tuple(sorted(order[q] for q in targets if q in order))
            if t:
                nd[x] = t
        delta[i] = nd
    accepting = {order[q] for q in a.accepting if q in order}
    return Fsa.from_delta(a.alphabet, delta, 0, accepting)


def determinize(a: Fsa) -> Fsa:
    """Subset construction restricted to reachable subsets."""
    start = frozenset([a.initial])
    index = {start: 0}
    subsets = [start]
    table = []
    i = 0
    while i < len(subsets):
        s = subsets[i]
        moves = {}
        for p in s:
            for x, targets in a.delta[p].items():
                moves.setdefault(x, set()).update(targets)
        row = {}
        for x in sorted(moves):
            t = frozenset(moves[x])
            j = index.get(t)
            if j is None:
                j = index[t] = len(subsets)
                subsets.append(t)
            row[x] = j
        table.append(row)
        i += 1
    accepting = {i for i, s in enumerate(subsets) if not a.accepting.isdisjoint(s)}
    return Fsa.from_table(a.alphabet, table, 0, accepting)


def _as_dfa(a: Fsa) -> Fsa:
    return a if a.is_deterministic() else determinize(a)


def complete(a: Fsa) -> Fsa:
    """A deterministic automaton with a transition for every letter."""
    a = _as_dfa(a)
    k = a.nletters
    table = [dict(row) for row in a.table()]
    sink = None
    for row in table:
        if len(row) < k:
            if sink is None:
                sink = len(table)
            for x in range(k):
                row.setdefault(x, sink)
    if sink is not None:
        table.append({x: sink for x in range(k)})
    return Fsa.from_table(a.alphabet, table, a.initial, a.accepting)


def _hopcroft(table: list, nletters: int, accepting: frozenset) -> list:
    """Block id per state for the coarsest congruence of a complete DFA."""
    n = len(table)
    inv = [[[] for _ in range(n)] for _ in range(nletters)]
    for p, row in enumerate(table):
        for x, q in row.items():
            inv[x][q].append(p)
    blocks = [set(s) for s in (accepting, set(range(n)) - accepting) if s]
    block_of = [0] * n
    for b, s in enumerate(blocks):
        for q in s:
            block_of[q] = b
    work = set(range(len(blocks)))
    while work:
        splitter = set(blocks[work.pop()])
        for x in range(nletters):
            inv_x = inv[x]
            pre = set()
            for q in splitter:
                pre.update(inv_x[q])
            if not pre:
                continue
            touched = {}
            for p in pre:
                touched.setdefault(block_of[p], set()).add(p)
            for b, inside in touched.items():
                block = blocks[b]
                if len(inside) == len(block):
                    continue
                outside = block - inside
                blocks[b] = inside
                nb = len(blocks)
                blocks.append(outside)
                for q in outside:
                    block_of[q] = nb
                if b in work:
                    work.add(nb)
                else:
                    work.add(b if len(inside) <= len(outside) else nb)
    return block_of


def minimize(a: Fsa) -> Fsa:
    """Minimal trim DFA, canonically numbered breadth first from the initial state."""
    a = trim(_as_dfa(trim(a)))
    if not a.accepting:
        return empty_fsa(a.alphabet)
    c = complete(a)
    block_of = _hopcroft(c.table(), c.nletters, c.accepting)
    table = c.table()
    # quotient, then drop the dead block and renumber canonically
    nblocks = max(block_of) + 1
    qtable = [dict() for _ in range(nblocks)]
    for p, row in enumerate(table):
        b = block_of[p]
        for x, q in row.items():
            qtable[b][x] = block_of[q]
    qaccept = {block_of[q] for q in c.accepting}
    quotient = Fsa.from_table(a.alphabet, qtable, block_of[c.initial], qaccept)
    return trim(quotient)


def union(a: Fsa, b: Fsa) -> Fsa:
    return _product(a, b, lambda x, y: x or y)


def intersection(a: Fsa, b: Fsa) -> Fsa:
    return _product(a, b, lambda x, y: x and y)


def difference(a: Fsa, b: Fsa) -> Fsa:
    return _product(a, b, lambda x, y: x and not y)


def complement(a: Fsa, universe: Optional[Fsa] = None) -> Fsa:
    """Complement relative to ``universe`` (default: all freely reduced words)."""
    if universe is None:
        universe = reduced_words_fsa(a.alphabet)
    return difference(universe, a)


def _product(a: Fsa, b: Fsa, combine) -> Fsa:
    _check_alphabets(a, b)
    ca, cb = complete(a), complete(b)
    ta, tb = ca.table(), cb.table()
    start = (ca.initial, cb.initial)
    index = {start: 0}
    pairs = [start]
    table = []
    i = 0
    k = a.nletters
    while i < len(pairs):
        p, q = pairs[i]
        row = {}
        for x in range(k):
            t = (ta[p][x], tb[q][x])
            j = index.get(t)
            if j is None:
                j = index[t] = len(pairs)
                pairs.append(t)
            row[x] = j
        table.append(row)
        i += 1
    accepting = {
        i for i, (p, q) in enumerate(pairs)
        if combine(p in ca.accepting, q in cb.accepting)
    }
    return minimize(Fsa.from_table(a.alphabet, table, 0, accepting))


def is_empty(a: Fsa) -> bool:
    return _reachable(a).isdisjoint(a.accepting)


def is_finite(a: Fsa) -> bool:
    """No cycle passes through a useful state."""
    t = trim(a)
    if not t.accepting:
        return True
    color = [0] * t.nstates
    for root in range(t.nstates):
        if color[root]:
            continue
        stack = [(root, iter([q for ts in t.delta[root].values() for q in ts]))]
        color[root] = 1
        while stack:
            p, it = stack[-1]
            q = next(it, None)
            if q is None:
                color[p] = 2
                stack.pop()
            elif color[q] == 1:
                return False
            elif color[q] == 0:
                color[q] = 1
                stack.append((q, iter([r for ts in t.delta[q].values() for r in ts])))
    return True


def enumerate_words(a: Fsa, n: int, max_length: Optional[int] = None) -> list:
    """The ``n`` ShortLex-least accepted words (fewer if the language is smaller)."""
    d = minimize(a)
    if not d.accepting or n <= 0:
        return []
    table = d.table()
    finite = is_finite(d)
    limit = d.nstates - 1 if finite else None
    if max_length is not None:
        limit = max_length if limit is None else min(limit, max_length)
    out = []
    # live[k]: states from which an accepting state is reachable in exactly k steps
    live = [set(d.accepting)]
    length = 0
    while len(out) < n and (limit is None or length <= limit):
        while len(live) <= length:
            prev = live[-1]
            live.append({p for p, row in enumerate(table) if any(q in prev for q in row.values())})
        if d.initial in live[length]:
            _collect(table, d.initial, length, live, (), out, n)
        length += 1
    return out


def _collect(table, q, remaining, live, prefix, out, n):
    if len(out) >= n:
        return
    if remaining == 0:
        out.append(prefix)
        return
    row = table[q]
    for x in sorted(row):
        t = row[x]
        if t in live[remaining - 1]:
            _collect(table, t, remaining - 1, live, prefix + (x,), out, n)
            if len(out) >= n:
                return


def subset(a: Fsa, b: Fsa):
    """``(True, None)`` if L(a) is contained in L(b), else ``(False, witness)``.

    The witness is the ShortLex-least word of L(a) outside L(b).
    """
    diff = difference(a, b)
    words = enumerate_words(diff, 1)
    if words:
        return False, words[0]
    return True, None


def equivalent(a: Fsa, b: Fsa) -> bool:
    return subset(a, b)[0] and subset(b, a)[0]


def words_up_to(a: Fsa, max_length: int) -> list:
    """All accepted words of length at most ``max_length``, ShortLex order."""
    out = []
    d = _as_dfa(a)
    table = d.table()
    level = [((), d.initial)]
    for n in range(max_length + 1):
        out.extend(w for w, q in level if q in d.accepting)
        if n == max_length:
            break
        level = [
            (w + (x,), row[x])
            for w, q in level
            for row in (table[q],)
            for x in sorted(row)
        ]
    return out


# ---------------------------------------------------------------------------
# padded pair automata


def pair_alphabet(letters) -> tuple:
    """Names of pair letters; code ``x*(k+1)+y`` with ``k`` the pad code."""
    names = tuple(letters) + (PAD_NAME,)
    k = len(letters)
    out = []
    for x in range(k + 1):
        for y in range(k + 1):
            out.append(f"{names[x]},{names[y]}")
    return tuple(out)


def pad_pair(u: Sequence[int], v: Sequence[int], k: int) -> list:
    n = max(len(u), len(v))
    u = list(u) + [k] * (n - len(u))
    v = list(v) + [k] * (n - len(v))
    return [x * (k + 1) + y for x, y in zip(u, v)]


class PairFsa:
    """A synchronous two-tape automaton over ``letters`` with end padding."""

    __slots__ = ("letters", "fsa", "_dfa", "_by_first")

    def __init__(self, letters, fsa: Fsa):
        self.letters = tuple(letters)
        if fsa.alphabet != pair_alphabet(self.letters):
            raise AutomatonError("pair automaton alphabet does not match its letters")
        bad = self.pad * (self.pad + 1) + self.pad
        if any(x == bad for _, x, _ in fsa.transitions()):
            raise AutomatonError("(pad, pad) transitions are not allowed")
        self.fsa = fsa
        self._dfa = None
        self._by_first = None

    def __repr__(self):
        return f"<PairFsa {self.fsa.nstates} states>"

    @property
    def pad(self) -> int:
        return len(self.letters)

    def code(self, x: int, y: int) -> int:
        return x * (self.pad + 1) + y

    def decode(self, c: int):
        return divmod(c, self.pad + 1)

    @property
    def dfa(self) -> Fsa:
        if self._dfa is None:
            self._dfa = _as_dfa(self.fsa)
        return self._dfa

    def accepts(self, u: Sequence[int], v: Sequence[int]) -> bool:
        if not u and not v:
            return self.fsa.initial in self.fsa.accepting
        return self.fsa.accepts(pad_pair(u, v, self.pad))

    def pairs(self, max_length: int) -> list:
        """Accepted pairs whose padded length is at most ``max_length``."""
        out = []
        for w in words_up_to(self.fsa, max_length):
            u = tuple(x for x, _ in map(self.decode, w) if x != self.pad)
            v = tuple(y for _, y in map(self.decode, w) if y != self.pad)
            out.append((u, v))
        return out

    def to_dict(self) -> dict:
        names = self.letters + (PAD_NAME,)
        return {
            "alphabet": list(self.letters),
            "states": self.fsa.nstates,
            "initial": self.fsa.initial,
            "accepting": sorted(self.fsa.accepting),
            "transitions": [
                [p, [names[a], names[b]], q]
                for p, x, q in self.fsa.transitions()
                for a, b in (self.decode(x),)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PairFsa":
        letters = tuple(data["alphabet"])
        index = {n: i for i, n in enumerate(letters)}
        index[PAD_NAME] = len(letters)
        k = len(letters)
        trans = []
        for p, (a, b), q in data["transitions"]:
            if a not in index or b not in index:
                raise AutomatonError(f"unknown letter pair {[a, b]!r}")
            trans.append((p, index[a] * (k + 1) + index[b], q))
        fsa = Fsa(pair_alphabet(letters), data["states"], data.get("initial", 0),
                  data["accepting"], trans)
        return cls(letters, fsa)

    def first_index(self):
        """Per DFA state: ``{x: [(y, target), ...]}`` grouped by first tape."""
        if self._by_first is None:
            k1 = self.pad + 1
            out = []
            for row in self.dfa.table():
                d = {}
                for c, q in row.items():
                    x, y = divmod(c, k1)
                    d.setdefault(x, []).append((y, q))
                out.append(d)
            self._by_first = out
        return self._by_first


def _pair_minimize(letters, delta, accepting, initial=0) -> PairFsa:
    fsa = Fsa.from_delta(pair_alphabet(letters), delta, initial, accepting)
    return PairFsa(letters, minimize(fsa))


def _eps_accepting(n_states, eps_edges, base_accepting) -> set:
    """States from which an accepting state is reachable by epsilon moves."""
    rev = {}
    for p, targets in eps_edges.items():
        for q in targets:
            rev.setdefault(q, []).append(p)
    seen = set(base_accepting)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for p in rev.get(q, ()):
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def diagonal(a: Fsa) -> PairFsa:
    """The identity relation on L(a)."""
    k = a.nletters
    delta = [{x * (k + 1) + x: t for x, t in d.items()} for d in a.delta]
    return _pair_minimize(a.alphabet, delta, a.accepting, a.initial)


def swap(r: PairFsa) -> PairFsa:
    """The inverse relation."""
    k1 = r.pad + 1
    delta = []
    for d in r.fsa.delta:
        nd = {}
        for c, t in d.items():
            x, y = divmod(c, k1)
            nd[y * k1 + x] = t
        delta.append(nd)
    fsa = Fsa.from_delta(r.fsa.alphabet, delta, r.fsa.initial, r.fsa.accepting)
    return PairFsa(r.letters, minimize(fsa))


_TAIL = -1


def _tape_moves(r: PairFsa):
    """Moves per state, with a (pad, pad) tail appended after acceptance."""
    pad = r.pad
    k1 = pad + 1
    fsa = r.fsa
    cache = {}

    def moves(p):
        m = cache.get(p)
        if m is None:
            m = []
            if p == _TAIL:
                m.append((pad, pad, _TAIL))
            else:
                for c, targets in fsa.delta[p].items():
                    x, y = divmod(c, k1)
                    for q in targets:
                        m.append((x, y, q))
                if p in fsa.accepting:
                    m.append((pad, pad, _TAIL))
            cache[p] = m
        return m

    def accepting(p):
        return p == _TAIL or p in fsa.accepting

    return moves, accepting


def compose(r: PairFsa, s: PairFsa) -> PairFsa:
    """``{(u, w) : (u, v) in r and (v, w) in s for some v}``."""
    if r.letters != s.letters:
        raise AutomatonError("relations are over different alphabets")
    pad = r.pad
    k1 = pad + 1
    rmoves, racc = _tape_moves(r)
    smoves, sacc = _tape_moves(s)
    s_by_first = {}

    def s_index(q):
        d = s_by_first.get(q)
        if d is None:
            d = {}
            for y, z, q2 in smoves(q):
                d.setdefault(y, []).append((z, q2))
            s_by_first[q] = d
        return d

    start = (r.fsa.initial, s.fsa.initial)
    index = {start: 0}
    states = [start]
    delta = []
    eps = {}
    i = 0
    while i < len(states):
        p, q = states[i]
        row = {}
        sidx = s_index(q)
        for x, y, p2 in rmoves(p):
            for z, q2 in sidx.get(y, ()):
                t = (p2, q2)
                j = index.get(t)
                if j is None:
                    j = index[t] = len(states)
                    states.append(t)
                if x == pad and z == pad:
                    eps.setdefault(i, set()).add(j)
                else:
                    row.setdefault(x * k1 + z, set()).add(j)
        delta.append({c: tuple(sorted(t)) for c, t in row.items()})
        i += 1
    base = {i for i, (p, q) in enumerate(states) if racc(p) and sacc(q)}
    accepting = _eps_accepting(len(states), eps, base)
    return _pair_minimize(r.letters, delta, accepting)


def image(r: PairFsa, a: Fsa) -> Fsa:
    """``{v : (u, v) in r for some u in L(a)}`` as a minimal DFA."""
    if a.alphabet != r.letters:
        raise AutomatonError("automaton and relation are over different alphabets")
    pad = r.pad
    k1 = pad + 1
    rdelta = r.fsa.delta
    start = (a.initial, r.fsa.initial)
    index = {start: 0}
    states = [start]
    delta = []
    eps = {}
    i = 0
    while i < len(states):
        p, q = states[i]
        row = {}
        for c, targets in rdelta[q].items():
            x, y = divmod(c, k1)
            if x == pad:
                if p == _TAIL or p in a.accepting:
                    nexts = (_TAIL,)
                else:
                    continue
            elif p == _TAIL:
                continue
            else:
                nexts = a.delta[p].get(x, ())
            for p2 in nexts:
                for q2 in targets:
                    t = (p2, q2)
                    j = index.get(t)
                    if j is None:
                        j = index[t] = len(states)
                        states.append(t)
                    if y == pad:
                        eps.setdefault(i, set()).add(j)
                    else:
                        row.setdefault(y, set()).add(j)
        delta.append({y: tuple(sorted(t)) for y, t in row.items()})
        i += 1
    base = {
        i for i, (p, q) in enumerate(states)
        if (p == _TAIL or p in a.accepting) and q in r.fsa.accepting
    }
    accepting = _eps_accepting(len(states), eps, base)
    return minimize(Fsa.from_delta(a.alphabet, delta, 0, accepting))


def apply(r: PairFsa, u: Sequence[int]):
    """The unique ``v`` with ``(u, v)`` in ``r``.

    Raises :class:`AutomatonError` when there is no such ``v`` or more than one.
    """
    pad = r.pad
    u = tuple(u)
    n = len(u)
    by_first = r.first_index()
    table = r.dfa.table()
    accepting = r.dfa.accepting
    k1 = pad + 1

    acc_memo = {}

    def accepts_here(q, j):
        # finish by reading (u_j, pad), ..., (u_{n-1}, pad)
        key = (q, j)
        if key not in acc_memo:
            p = q
            for i in range(j, n):
                p = table[p].get(u[i] * k1 + pad)
                if p is None:
                    break
            acc_memo[key] = p is not None and p in accepting
        return acc_memo[key]

    # nodes (q, j): j letters of v read, j capped at n once u is exhausted
    start = (r.dfa.initial, 0)
    succ = {}
    order = [start]
    seen = {start}
    i = 0
    while i < len(order):
        q, j = order[i]
        x = u[j] if j < n else pad
        out = []
        for y, q2 in by_first[q].get(x, ()):
            if y == pad:
                continue
            t = (q2, min(j + 1, n))
            out.append((y, t))
            if t not in seen:
                seen.add(t)
                order.append(t)
        succ[(q, j)] = out
        i += 1
    good = {node for node in order if accepts_here(*node)}
    # nodes that can reach a good node
    rev = {}
    for node, out in succ.items():
        for _, t in out:
            rev.setdefault(t, []).append(node)
    useful = set(good)
    stack = list(good)
    while stack:
        node = stack.pop()
        for p in rev.get(node, ()):
            if p not in useful:
                useful.add(p)
                stack.append(p)
    if start not in useful:
        raise AutomatonError("word is outside the domain of the relation")
    # walk the unique accepted path, rejecting any branching
    v = []
    node = start
    visited = set()
    while True:
        if node in visited:
            raise AutomatonError("relation is not functional (infinitely many images)")
        visited.add(node)
        options = [(y, t) for y, t in succ[node] if t in useful]
        if node in good:
            if options:
                raise AutomatonError("relation is not functional")
            return tuple(v)
        if len(options) != 1:
            raise AutomatonError("relation is not functional")
        y, node = options[0]
        v.append(y)


def domain(r: PairFsa) -> Fsa:
    """``{u : (u, v) in r for some v}``."""
    return image(swap(r), universal(r.letters))
