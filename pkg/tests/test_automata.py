import json
import random

import pytest

from helpers import compose_sets, nfa_language, random_fsa, random_relation, relation_from_pairs
from rhmember.automata import (
    AutomatonError,
    Fsa,
    PairFsa,
    apply,
    complement,
    compose,
    determinize,
    diagonal,
    difference,
    empty_fsa,
    enumerate_words,
    finite_language,
    image,
    intersection,
    is_empty,
    is_finite,
    minimize,
    singleton,
    subset,
    swap,
    union,
    universal,
    words_up_to,
)
from rhmember.autostruct import builtin_shortlex_free
from rhmember.words import Alphabet, free_reduce

AB = Alphabet("ab")
P = AB.parse
NAMES = AB.letter_names()
TWO = ("a", "b")  # plain two-letter alphabet for the set-level checks


def lang(a, n=8):
    return nfa_language(a, n)


def test_determinize_examples():
    # NFA for words over {a, b} containing an a
    nfa = Fsa(TWO, 2, 0, [1], [(0, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)])
    d = determinize(nfa)
    assert d.is_deterministic() and d.nstates == 2
    assert lang(d, 6) == lang(nfa, 6)
    empty = determinize(Fsa(TWO, 3, 0, [], [(0, 0, 1)]))
    assert minimize(empty).nstates == 1 and not minimize(empty).accepting
    dfa = finite_language(TWO, [(0,), (0, 1)])
    assert lang(determinize(dfa)) == lang(dfa)


def test_boolean_examples():
    starts_a = Fsa(TWO, 2, 0, [1], [(0, 0, 1), (1, 0, 1), (1, 1, 1)])
    ends_b = Fsa(TWO, 2, 0, [1], [(0, 0, 0), (0, 1, 1), (1, 0, 0), (1, 1, 1)])
    both = intersection(starts_a, ends_b)
    expected = {w for n in range(5) for w in _plain_words(n) if w and w[0] == 0 and w[-1] == 1}
    assert lang(both, 4) == expected
    assert is_empty(intersection(starts_a, complement(starts_a, universal(TWO))))
    assert lang(union(starts_a, empty_fsa(TWO))) == lang(starts_a)
    with pytest.raises(AutomatonError):
        union(starts_a, empty_fsa(("a", "b", "c")))


def _plain_words(n):
    if n == 0:
        yield ()
        return
    for w in _plain_words(n - 1):
        yield w + (0,)
        yield w + (1,)


def test_emptiness_finiteness_enumeration_examples():
    eps = singleton(TWO, ())
    assert not is_empty(eps) and is_finite(eps) and enumerate_words(eps, 1) == [()]
    a_star = Fsa(TWO, 1, 0, [0], [(0, 0, 0)])
    assert not is_finite(a_star)
    three = finite_language(TWO, [(0, 1), (1,), (0,)])
    assert enumerate_words(three, 3) == [(0,), (1,), (0, 1)]
    assert enumerate_words(three, 10) == [(0,), (1,), (0, 1)]


def test_complement_is_relative_to_reduced_words():
    c = complement(empty_fsa(NAMES))
    assert c.accepts(P("a*b")) and not c.accepts(AB.parse("a*a^-1", reduce=False))


def test_subset_examples():
    a = finite_language(TWO, [(0,), (0, 1)])
    assert subset(a, a) == (True, None)
    assert subset(a, singleton(TWO, (0,))) == (False, (0, 1))
    assert subset(empty_fsa(TWO), singleton(TWO, ()))[0]


def test_compose_examples():
    s = builtin_shortlex_free(AB)
    r = s.multipliers[0]
    ident = diagonal(s.acceptor)
    assert set(compose(ident, r).pairs(4)) == set(r.pairs(4))
    back = compose(s.multipliers[0], s.multipliers[1])
    for u, v in back.pairs(4):
        assert u == v
    assert {u for u, _ in back.pairs(4)} == set(words_up_to(s.acceptor, 4))
    empty = PairFsa(NAMES, empty_fsa(r.dfa.alphabet))
    assert compose(r, empty).pairs(4) == []


def test_image_and_apply_examples():
    s = builtin_shortlex_free(AB)
    a = finite_language(NAMES, [P("a"), P("b^-1")])
    ident = diagonal(s.acceptor)
    assert lang(image(ident, a)) == lang(a)
    assert apply(s.multipliers[2], P("a*b^-1")) == P("a")
    assert is_empty(image(s.multipliers[0], empty_fsa(NAMES)))
    with pytest.raises(AutomatonError):
        apply(relation_from_pairs(TWO, {((0,), (0,)), ((0,), (1,))}), (0,))
    with pytest.raises(AutomatonError):
        apply(relation_from_pairs(TWO, {((0,), (0,))}), (1,))


def test_free_multiplier_against_reduction():
    s = builtin_shortlex_free(AB)
    for x in range(4):
        for u in words_up_to(s.acceptor, 4):
            assert apply(s.multipliers[x], u) == free_reduce(u + (x,))


def test_determinize_and_minimize_preserve_language():
    rng = random.Random(1)
    for _ in range(150):
        a = random_fsa(rng, TWO)
        ref = lang(a)
        d = determinize(a)
        assert d.is_deterministic()
        assert lang(d) == ref
        assert lang(minimize(a)) == ref


def test_de_morgan():
    rng = random.Random(2)
    u = universal(TWO)
    for _ in range(100):
        a, b = random_fsa(rng, TWO), random_fsa(rng, TWO)
        left = complement(union(a, b), u)
        right = intersection(complement(a, u), complement(b, u))
        assert lang(left) == lang(right)
        assert lang(union(a, b)) == lang(a) | lang(b)
        assert lang(intersection(a, b)) == lang(a) & lang(b)
        assert lang(difference(a, b)) == lang(a) - lang(b)


def test_subset_agrees_with_difference_emptiness():
    rng = random.Random(3)
    for _ in range(150):
        a, b = random_fsa(rng, TWO, 4), random_fsa(rng, TWO, 4)
        ok, witness = subset(a, b)
        assert ok == is_empty(difference(a, b))
        if not ok:
            assert a.accepts(witness) and not b.accepts(witness)
            # nothing ShortLex-smaller is a counterexample
            smaller = [w for w in lang(a, len(witness)) - lang(b, len(witness))]
            assert min(smaller, key=lambda w: (len(w), w)) == witness


def test_compose_matches_relation_composition():
    rng = random.Random(4)
    for _ in range(60):
        r, s = random_relation(rng, TWO), random_relation(rng, TWO)
        composed = compose(relation_from_pairs(TWO, r), relation_from_pairs(TWO, s))
        assert set(composed.pairs(3)) == compose_sets(r, s)


def test_compose_associative():
    rng = random.Random(5)
    for _ in range(40):
        r, s, t = (random_relation(rng, TWO) for _ in range(3))
        R, S, T = (relation_from_pairs(TWO, x) for x in (r, s, t))
        left = compose(compose(R, S), T)
        right = compose(R, compose(S, T))
        assert set(left.pairs(3)) == set(right.pairs(3)) == compose_sets(compose_sets(r, s), t)


def test_swap_and_image():
    rng = random.Random(6)
    for _ in range(60):
        r = random_relation(rng, TWO)
        R = relation_from_pairs(TWO, r)
        assert set(swap(R).pairs(3)) == {(v, u) for u, v in r}
        dom = {u for u, _ in r}
        keep = {u for u in dom if rng.random() < 0.5}
        img = image(R, finite_language(TWO, keep))
        assert lang(img, 3) == {v for u, v in r if u in keep}


def test_pair_padding_rejects_bad_strings():
    r = relation_from_pairs(TWO, {((0, 1), (0,))})
    assert r.accepts((0, 1), (0,))
    assert not r.accepts((0,), (0, 1))
    with pytest.raises(AutomatonError):
        PairFsa(TWO, Fsa(r.dfa.alphabet, 2, 0, [1], [(0, 8, 1)]))


def test_json_roundtrip():
    rng = random.Random(7)
    a = random_fsa(rng, TWO)
    assert lang(Fsa.from_dict(a.to_dict())) == lang(a)
    s = builtin_shortlex_free(AB)
    m = s.multipliers[1]
    data = m.to_dict()
    assert '"_"' in json.dumps(data)
    assert set(PairFsa.from_dict(data).pairs(3)) == set(m.pairs(3))
