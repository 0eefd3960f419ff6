"""Shared generators and small independent oracles for the test suite."""

import random

from rhmember.automata import Fsa, PairFsa, pad_pair, pair_alphabet
from rhmember.words import Alphabet, free_reduce, inverse, multiply, all_words


def random_reduced(rng, nletters, max_length, min_length=0):
    while True:
        w = free_reduce([rng.randrange(nletters) for _ in range(rng.randint(min_length, max_length))])
        if len(w) >= min_length:
            return w


def random_generators(rng, ngens_alpha, count, max_length):
    return [random_reduced(rng, 2 * ngens_alpha, max_length, 1) for _ in range(count)]


def random_product(rng, gens, factors):
    pool = list(gens) + [inverse(g) for g in gens]
    return multiply(*[rng.choice(pool) for _ in range(factors)]) if pool else ()


def nfa_language(a: Fsa, max_length):
    """Accepted words up to ``max_length`` by direct subset simulation on a trie."""
    out = set()
    level = [((), frozenset([a.initial]))]
    for n in range(max_length + 1):
        nxt = []
        for w, states in level:
            if states & a.accepting:
                out.add(w)
            if n == max_length:
                continue
            for x in range(len(a.alphabet)):
                t = frozenset(q for p in states for q in a.delta[p].get(x, ()))
                if t:
                    nxt.append((w + (x,), t))
        level = nxt
    return out


def random_fsa(rng, letters, max_states=6, density=0.35):
    n = rng.randint(1, max_states)
    trans = [
        (p, x, q)
        for p in range(n)
        for x in range(len(letters))
        for q in range(n)
        if rng.random() < density / n * 2
    ]
    accepting = [q for q in range(n) if rng.random() < 0.4]
    return Fsa(letters, n, 0, accepting, trans)


def relation_from_pairs(letters, pairs):
    """Pair automaton of a finite relation, as a prefix tree over padded strings."""
    k = len(letters)
    table = [{}]
    accepting = set()
    for u, v in pairs:
        q = 0
        for c in pad_pair(u, v, k):
            nxt = table[q].get(c)
            if nxt is None:
                nxt = len(table)
                table.append({})
                table[q][c] = nxt
            q = nxt
        accepting.add(q)
    return PairFsa(letters, Fsa.from_table(pair_alphabet(letters), table, 0, accepting))


def random_relation(rng, letters, max_length=3, size=6):
    words = list(all_words(len(letters), max_length))
    return {(rng.choice(words), rng.choice(words)) for _ in range(rng.randint(0, size))}


def compose_sets(r, s):
    return {(u, w) for u, v in r for v2, w in s if v == v2}


AB = Alphabet("ab")
ABC = Alphabet("abc")
