"""End-to-end acceptance suite.

Each criterion runs as one test and records a PASS/FAIL line with its
runtime; the lines are printed at the end of the pytest run (see
conftest.py) and by ``python tests/test_acceptance.py``.
"""

import json
import os
import random
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from helpers import (  # noqa: E402
    compose_sets,
    nfa_language,
    random_fsa,
    random_generators,
    random_product,
    random_reduced,
    random_relation,
    relation_from_pairs,
)
from rhmember import automata  # noqa: E402
from rhmember.autostruct import builtin_shortlex_abelian, builtin_shortlex_free  # noqa: E402
from rhmember.completion import Member as CMember  # noqa: E402
from rhmember.completion import completion_step, initial_state, run_completion  # noqa: E402
from rhmember.lattice import (  # noqa: E402
    INFINITE,
    enumerate_finite_index,
    finite_index_test,
    hnf,
)
from rhmember.lstallings import BudgetExhausted as LBudget  # noqa: E402
from rhmember.lstallings import compute_l_stallings, membership_l  # noqa: E402
from rhmember.oracles import (  # noqa: E402
    CosetTable,
    FreeProductOracle,
    NoOracle,
    abelian_membership,
    free_membership_enum,
)
from rhmember.relhyp import (  # noqa: E402
    DEFAULT_BUDGET,
    Member,
    NonMember,
    SoundnessPanic,
    certificate_to_dict,
    decide_membership,
    load_instance,
    verify_certificate,
)
from rhmember.stallings import (  # noqa: E402
    bouquet,
    fold,
    index_free,
    isomorphic,
    membership_free,
    rank_and_basis,
    stallings_graph,
)
from rhmember.words import Alphabet, Presentation, multiply, reduced_words  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
INSTANCE = os.path.join(HERE, "..", "instances", "z2_free_z.json")

RESULTS = {}


def record(number, name, limit, fn):
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except AssertionError as exc:
        ok, detail = False, f"assertion: {exc}"
    elapsed = time.perf_counter() - start
    within = elapsed < limit
    status = "PASS" if ok and within else "FAIL"
    line = (f"[{status}] criterion {number} {name}: {detail} "
            f"({elapsed:.1f} s, limit {limit} s)")
    RESULTS[number] = line
    print(line)
    return ok and within, line


# ------------------------------------------------------------ criterion 1

def free_group_suite():
    rng = random.Random(2024)
    instances = 0
    queries = 0
    ns_checked = 0
    redrawn = 0
    while instances < 200:
        k = rng.randint(1, 3)
        alphabet = Alphabet("abc"[:k])
        gens = random_generators(rng, k, rng.randint(1, 4), 6)
        words = []
        for _ in range(10):
            if rng.random() < 0.5:
                w = random_product(rng, gens, rng.randint(1, 3))
                if len(w) > 8:
                    w = random_reduced(rng, 2 * k, 8)
            else:
                w = random_reduced(rng, 2 * k, 8)
            words.append(w)
        try:
            truth = [free_membership_enum(gens, w) for w in words]
        except NoOracle:
            redrawn += 1
            continue
        g = stallings_graph(alphabet, gens)
        for w, t in zip(words, truth):
            assert membership_free(g, w) == t, (gens, w)
            queries += 1
        rank, basis = rank_and_basis(g)
        assert rank == len(basis)
        n = index_free(g)
        if n != INFINITE:
            assert rank == 1 + n * (k - 1), (gens, rank, n)
            ns_checked += 1
        raw = bouquet(alphabet, gens)
        for _ in range(5):
            order = list(range(len(raw.edges)))
            rng.shuffle(order)
            assert isomorphic(fold(raw, order), g)
        instances += 1
    return True, (f"{instances} instances, {queries} oracle queries, "
                  f"{ns_checked} finite-index rank checks, {redrawn} redrawn (no oracle)")


# ------------------------------------------------------------ criterion 2

FINITE = [
    ("a", ["a^2"]),
    ("a", ["a^3"]),
    ("ab", ["a^2", "b^2", "a*b*a*b"]),
    ("ab", ["a^2", "b^3", "a*b*a*b"]),
    ("ab", ["a^2", "b^4", "a*b*a*b"]),
    ("ab", ["a^4", "a*a*b^-1*b^-1", "b^-1*a*b*a"]),
    ("ab", ["a^2", "b^3", "a*b*a*b*a*b"]),
]
Z2 = ("ab", ["a*b*a^-1*b^-1"])


def _commute_shuffle(rng, w):
    # a word equal to w in Z^2: same letters, random order
    w = list(w)
    rng.shuffle(w)
    return tuple(w)


def completion_suite():
    rng = random.Random(7)
    positives = 0
    negatives = 0
    false_positive_rounds = 0
    while positives < 30 or negatives < 30:
        use_z2 = rng.random() < 0.3
        gens_s, rels = Z2 if use_z2 else rng.choice(FINITE)
        pres = Presentation.from_strings(gens_s, rels)
        k = len(gens_s)
        gens = random_generators(rng, k, rng.randint(1, 2), 3)
        if use_z2:
            member = lambda w: abelian_membership(gens, w, 2)  # noqa: E731
            if rng.random() < 0.5:
                g = _commute_shuffle(rng, random_product(rng, gens, rng.randint(1, 2)))
            else:
                g = random_reduced(rng, 4, 5)
        else:
            table = CosetTable(pres, gens)
            member = table.contains
            if rng.random() < 0.5:
                g = multiply(random_product(rng, gens, rng.randint(1, 2)),
                             random_product(rng, [tuple(r) for r in pres.relators], 1))
            else:
                g = random_reduced(rng, 2 * k, 5)
        truth = member(g)
        if truth and positives >= 30 or not truth and negatives >= 30:
            continue
        result = run_completion(pres, gens, g, 15)
        if truth:
            assert isinstance(result, CMember), (gens_s, rels, gens, g)
            positives += 1
        else:
            assert not isinstance(result, CMember)
            negatives += 1
        # no round may put a non-member on a base loop
        s = initial_state(pres, gens, g)
        for _ in range(6):
            for w in reduced_words(k, 5):
                if s.graph.read(w) == s.graph.base and not member(w):
                    false_positive_rounds += 1
            s = completion_step(s)
    assert false_positive_rounds == 0
    return True, (f"{positives} oracle-positive queries all Member within 15 rounds, "
                  f"{negatives} negatives never Member, 0 false positives over all rounds")


# ------------------------------------------------------------ criterion 3

def relative_stallings_suite():
    rng = random.Random(11)
    ab = Alphabet("ab")
    free = builtin_shortlex_free(ab)
    for _ in range(20):
        gens = random_generators(rng, 2, rng.randint(1, 3), 5)
        g = compute_l_stallings(free, gens, 200)
        assert not isinstance(g, LBudget)
        assert isomorphic(g.graph, stallings_graph(ab, gens)), gens
    z2 = builtin_shortlex_abelian(2)
    P = z2.alphabet.parse
    h = [P("a^2"), P("b")]
    g = compute_l_stallings(z2, h, 50)
    assert not isinstance(g, LBudget)
    assert g.graph.nvertices == 2
    assert g.graph.edge_set() == {(0, 0, 1), (1, 0, 0), (0, 1, 0)}
    words = 0
    for w in reduced_words(2, 8):
        assert membership_l(g, w) == abelian_membership(h, w, 2), w
        words += 1
    assert isinstance(compute_l_stallings(z2, [P("a^2*b")], 30), LBudget)
    return True, (f"20 free tuples isomorphic, <a^2,b> certified with 2 vertices and "
                  f"{words} words matching, <a^2*b> exhausted 30 steps")


# ------------------------------------------------------------ criterion 4

MEMBER_QUERIES = [
    ("t", "t^3"), ("t", "t^-2"), ("t", ""), ("t", "t^5"),
    ("a", "a^4"), ("a", "b*a*b^-1"), ("a", "b^2*a^-3*b^-2"), ("a", "a^-1"),
    ("a^2,b,t", "b*a^2*b^-1*t"), ("a^2,b,t", "t*a^2*t^-1*b"), ("a^2,b,t", "a^-2*b^3*t^-1"),
    ("a^2,b,t", "a^2*t*a^-2"), ("a^2,b,t", "b*a*b*a*t*t"),
]
NONMEMBER_QUERIES = [
    ("t", "a"), ("t", "a*t*a^-1"), ("t", "t*b"), ("t", "b^2*t"),
    ("a", "b"), ("a", "t"), ("a", "a*b"), ("a", "t*a*t^-1"),
    ("a^2,b,t", "a"), ("a^2,b,t", "t*a*t^-1"), ("a^2,b,t", "a^3*b"), ("a^2,b,t", "b*a*t"),
]


def end_to_end_suite():
    inst = load_instance(INSTANCE)
    A = inst.A
    oracle = FreeProductOracle([(0, 1), (2,)], 3)
    panics = 0
    members = 0
    nonmembers = 0
    for expected, queries in ((Member, MEMBER_QUERIES), (NonMember, NONMEMBER_QUERIES)):
        for h, g in queries:
            gens = [A.parse(x) for x in h.split(",")]
            w = A.parse(g)
            truth = oracle.membership(gens, w)
            assert truth == (expected is Member), (h, g)
            try:
                v = decide_membership(inst, gens, w, budget=DEFAULT_BUDGET)
            except SoundnessPanic:
                panics += 1
                continue
            assert isinstance(v, expected), (h, g, v)
            if expected is NonMember:
                data = json.loads(json.dumps(certificate_to_dict(inst, w, v.certificate)))
                assert verify_certificate(inst, gens, w, data), (h, g)
                nonmembers += 1
            else:
                members += 1
    assert panics == 0
    assert members >= 10 and nonmembers >= 10
    return True, (f"{members} Member and {nonmembers} NonMember verdicts, all oracle-confirmed, "
                  f"certificates re-verified, budget {DEFAULT_BUDGET}, 0 panics")


# ------------------------------------------------------------ criterion 5

def lattice_suite():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.randint(1, 3)
        gens = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(rng.randint(1, 4))]
        ref = hnf(gens, n)
        mixed = [list(g) for g in gens]
        for _ in range(10):
            i, j = rng.randrange(len(mixed)), rng.randrange(len(mixed))
            if i != j:
                c = rng.randint(-3, 3)
                mixed[i] = [a + c * b for a, b in zip(mixed[i], mixed[j])]
            else:
                mixed[i] = [-a for a in mixed[i]]
            rng.shuffle(mixed)
        assert hnf(mixed, n) == ref
    indices = 0
    while indices < 60:
        b = [[rng.randint(-6, 6) for _ in range(2)] for _ in range(2)]
        det = abs(b[0][0] * b[1][1] - b[0][1] * b[1][0])
        if not 0 < det <= 20:
            continue
        lat = hnf(b)
        # count cosets over residues with an independent rational solve
        classes = []
        for x in range(det):
            for y in range(det):
                if not any(_in_lattice(b, (x - p, y - q)) for p, q in classes):
                    classes.append((x, y))
        assert finite_index_test(lat) == len(classes)
        indices += 1
    for n in (1, 2, 3):
        first = []
        for s in enumerate_finite_index(n):
            first.append(s)
            if len(first) == 200:
                break
        assert len({s.basis for s in first}) == 200
        assert all(finite_index_test(s) != INFINITE for s in first)
    return True, ("100 remixed HNFs canonical, 60 index checks, "
                  "200 enumerated tuples distinct for n = 1, 2, 3")


def _in_lattice(b, v):
    det = b[0][0] * b[1][1] - b[0][1] * b[1][0]
    c0 = v[0] * b[1][1] - v[1] * b[1][0]
    c1 = b[0][0] * v[1] - b[0][1] * v[0]
    return c0 % det == 0 and c1 % det == 0


# ------------------------------------------------------------ criterion 6

def automata_suite():
    rng = random.Random(6)
    letters = ("a", "b")
    universe = automata.universal(letters)
    for _ in range(100):
        a, b = random_fsa(rng, letters), random_fsa(rng, letters)
        la, lb = nfa_language(a, 8), nfa_language(b, 8)
        assert nfa_language(automata.determinize(a), 8) == la
        assert nfa_language(automata.union(a, b), 8) == la | lb
        assert nfa_language(automata.intersection(a, b), 8) == la & lb
        assert nfa_language(automata.difference(a, b), 8) == la - lb
        left = automata.complement(automata.union(a, b), universe)
        right = automata.intersection(automata.complement(a, universe),
                                      automata.complement(b, universe))
        assert nfa_language(left, 8) == nfa_language(right, 8)
        ok, _ = automata.subset(a, b)
        assert ok == automata.is_empty(automata.difference(a, b))
        r, s, t = (random_relation(rng, letters) for _ in range(3))
        R, S, T = (relation_from_pairs(letters, x) for x in (r, s, t))
        lhs = automata.compose(automata.compose(R, S), T)
        rhs = automata.compose(R, automata.compose(S, T))
        expected = compose_sets(compose_sets(r, s), t)
        assert set(lhs.pairs(8)) == set(rhs.pairs(8)) == expected
    return True, "100 random automata: determinize, boolean ops, De Morgan, subset, compose"


CRITERIA = [
    (1, "free-group suite", 10, free_group_suite),
    (2, "completion suite", 30, completion_suite),
    (3, "relative Stallings suite", 30, relative_stallings_suite),
    (4, "Z^2 * Z end-to-end membership", 300, end_to_end_suite),
    (5, "lattice suite", 5, lattice_suite),
    (6, "automata suite", 10, automata_suite),
]


def _run(number):
    for n, name, limit, fn in CRITERIA:
        if n == number:
            ok, line = record(n, name, limit, fn)
            assert ok, line


def test_criterion_1_free_groups():
    _run(1)


def test_criterion_2_completion():
    _run(2)


def test_criterion_3_relative_stallings():
    _run(3)


def test_criterion_4_end_to_end():
    _run(4)


def test_criterion_5_lattices():
    _run(5)


def test_criterion_6_automata():
    _run(6)


if __name__ == "__main__":
    failures = 0
    for n, name, limit, fn in CRITERIA:
        ok, _ = record(n, name, limit, fn)
        failures += not ok
    sys.exit(1 if failures else 0)
