"""Membership in relatively quasi-convex subgroups of toral groups.

Two semi-decision procedures are interleaved until one of them halts:

* the positive side runs relator gluing and folding over the defining
  presentation (with the peripheral commutators added) and halts when
  ``g`` reads as a base loop, proving ``g ∈ H``;
* the negative side enumerates augmentations
  ``H1 = <H, g_1^{x_1}, ..., g_l^{x_l}>`` where each ``g_i`` generates a
  finite-index subgroup of a peripheral subgroup, and for each one runs a
  budgeted relative Stallings graph computation.  A certified graph of
  ``H1`` in which ``g`` does not read proves ``g ∉ H1 ⊇ H``.

Both sides are budgeted in logical steps and scheduled deterministically,
so the verdict only depends on the step at which an answer appears.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from . import completion, lstallings
from .autostruct import (
    AutomaticStructure,
    StructureError,
    builtin_free_product,
    builtin_shortlex_abelian,
    builtin_shortlex_free,
)
from .lattice import FiniteIndexCursor, PeripheralStructure, finite_index_test, hnf
from .stallings import StallingsGraph, rank_and_basis
from .words import (
    Alphabet,
    Presentation,
    Word,
    closure_of,
    commutator,
    cyclic_reduce,
    free_reduce,
    inverse,
    multiply,
    reduced_words,
    translate,
)

#: default number of logical steps for :func:`decide_membership`
DEFAULT_BUDGET = 400


class SoundnessPanic(RuntimeError):
    """Both semi-algorithms produced opposite verdicts; this is a bug."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or {}


class InstanceError(ValueError):
    """Inconsistent presentation, peripherals and structure."""


# ----------------------------------------------------------------- instance

class RelHypInstance:
    """Presentation on ``A``, peripherals, and an automatic structure on ``X``.

    ``x_translation`` sends every generator of ``X`` outside ``A`` to a word
    over ``A`` equal to it in the group.
    """

    def __init__(self, presentation: Presentation, peripherals: PeripheralStructure,
                 structure: AutomaticStructure, x_translation: Optional[dict] = None,
                 max_search_length: int = 8):
        self.presentation = presentation
        self.peripherals = peripherals
        self.structure = structure
        A, X = presentation.alphabet, structure.alphabet
        for sym in A:
            if sym not in X:
                raise InstanceError(f"generator {sym!r} is missing from the structure")
        for p in peripherals:
            for sym in p.alphabet:
                if sym not in X:
                    raise InstanceError(f"peripheral letter {sym!r} is missing from the structure")
        self.x_translation = dict(x_translation or {})
        for sym in X:
            if sym in A or sym in self.x_translation:
                continue
            self.x_translation[sym] = find_u_x(self, sym, max_search_length)
        for sym, u in self.x_translation.items():
            x = (2 * X.index(sym),)
            if not structure.word_problem(multiply(x, inverse(self.to_x(u)))):
                raise InstanceError(f"translation of {sym!r} is wrong")
        self._conjugators = []
        self._conj_iter = None
        self._cursors = [FiniteIndexCursor(p.rank) for p in peripherals]

    @property
    def A(self) -> Alphabet:
        return self.presentation.alphabet

    @property
    def X(self) -> Alphabet:
        return self.structure.alphabet

    def to_x(self, w: Word) -> Word:
        """Re-encode a word over ``A`` in the structure alphabet."""
        return translate(w, self.A, self.X)

    def peripheral_to_x(self, i: int, w: Word) -> Word:
        return translate(w, self.peripherals[i].alphabet, self.X)

    def positive_presentation(self) -> Presentation:
        """``<A | R>`` with the commutators of every peripheral added."""
        have = set(closure_of(self.presentation.relators))
        rels = list(self.presentation.relators)
        for p in self.peripherals:
            gens = [p.embed((2 * i,)) for i in range(p.rank)]
            for u, v in itertools.combinations(gens, 2):
                c, _ = cyclic_reduce(commutator(u, v))
                if c and c not in have:
                    rels.append(c)
                    have.update(closure_of([c]))
        return Presentation(self.A, tuple(rels))

    def conjugator(self, k: int) -> Word:
        """The ``k``-th reduced word over ``A`` in ShortLex order."""
        if self._conj_iter is None:
            self._conj_iter = _shortlex(len(self.A))
        while len(self._conjugators) <= k:
            self._conjugators.append(next(self._conj_iter))
        return self._conjugators[k]

    def finite_index_basis(self, p: int, k: int):
        return self._cursors[p][k]

    @classmethod
    def from_dict(cls, data: dict, structure) -> "RelHypInstance":
        pres = Presentation.from_dict(data)
        periph = PeripheralStructure.from_dict(data, pres.alphabet)
        if structure is None or structure == "builtin":
            structure = builtin_toral_structure(pres, periph)
        translation = {
            k: pres.alphabet.parse(v) for k, v in data.get("translation", {}).items()
        }
        return cls(pres, periph, structure, translation)


def _shortlex(ngens: int) -> Iterator[Word]:
    n = 0
    while True:
        yield from reduced_words(ngens, n, n)
        n += 1
        if ngens == 0:
            return


def find_u_x(instance: RelHypInstance, sym: str, max_length: Optional[int] = None) -> Word:
    """ShortLex-least word over ``A`` equal in the group to the letter ``sym``."""
    A, X = instance.presentation.alphabet, instance.structure.alphabet
    x = (2 * X.index(sym),)
    for u in _shortlex(len(A)):
        if max_length is not None and len(u) > max_length:
            break
        if instance.structure.word_problem(multiply(x, inverse(translate(u, A, X)))):
            return u
    raise InstanceError(f"no word over the presentation alphabet equals {sym!r}")


def build_r_x(instance: RelHypInstance) -> Presentation:
    """Relators of ``G`` over ``X``: ``R`` plus ``x u_x^-1``, closed."""
    rels = [instance.to_x(r) for r in instance.presentation.relators]
    X = instance.X
    for sym, u in instance.x_translation.items():
        rels.append(multiply((2 * X.index(sym),), inverse(instance.to_x(u))))
    rels = [cyclic_reduce(free_reduce(r))[0] for r in rels]
    return Presentation(X, closure_of([r for r in rels if r]))


def builtin_toral_structure(presentation: Presentation,
                            peripherals: PeripheralStructure) -> AutomaticStructure:
    """Structure for a free product of the peripherals and a free group.

    Only available when every peripheral letter is a generator of the
    presentation and the relators are exactly the peripheral commutators.
    """
    A = presentation.alphabet
    used = []
    factors = []
    expected = []
    for p in peripherals:
        for sym in p.alphabet:
            if sym not in A or p.embedding[sym] != (2 * A.index(sym),):
                raise StructureError(
                    "builtin structures need peripherals spanned by presentation generators"
                )
            used.append(sym)
        factors.append(builtin_shortlex_abelian(Alphabet(p.alphabet)))
        letters = [(2 * A.index(s),) for s in p.alphabet]
        for u, v in itertools.combinations(letters, 2):
            expected.append(commutator(u, v))
    if set(closure_of(presentation.relators)) != set(closure_of(expected)):
        raise StructureError(
            "builtin structures need the relators to be exactly the peripheral commutators"
        )
    rest = [s for s in A if s not in used]
    if rest:
        factors.append(builtin_shortlex_free(Alphabet(rest)))
    if len(factors) == 1:
        return factors[0]
    return builtin_free_product(*factors)


# --------------------------------------------------------------- candidates

@dataclass(frozen=True)
class CandidateTerm:
    conjugator: int  # index into ShortLex F(A)
    peripheral: int
    basis: int  # index into the finite-index enumeration of that peripheral

    def key(self):
        return (self.conjugator, self.peripheral, self.basis)


@dataclass(frozen=True)
class CandidateAugmentation:
    terms: tuple = ()

    @property
    def ell(self) -> int:
        return len(self.terms)

    def weight(self) -> int:
        return self.ell + sum(t.conjugator + t.basis for t in self.terms)

    def key(self):
        return (self.ell, tuple(t.key() for t in self.terms))


def _term_sets(total: int, ell: int, nperiph: int):
    """Sorted tuples of ``ell`` distinct terms whose indices sum to ``total``."""
    pool = [
        CandidateTerm(x, p, s - x)
        for s in range(total + 1)
        for x in range(s + 1)
        for p in range(nperiph)
    ]
    pool.sort(key=CandidateTerm.key)

    def rec(start, left, remaining):
        if left == 0:
            if remaining == 0:
                yield ()
            return
        for i in range(start, len(pool)):
            t = pool[i]
            cost = t.conjugator + t.basis
            if cost > remaining:
                continue
            for rest in rec(i + 1, left - 1, remaining - cost):
                yield (t,) + rest

    yield from rec(0, ell, total)


def enumerate_candidates(instance: RelHypInstance) -> Iterator[CandidateAugmentation]:
    """Every finite augmentation exactly once, by increasing weight.

    The weight of a candidate is ``l`` plus the conjugator and basis indices
    of its terms; each weight class is finite.  ``l = 0`` comes first.
    """
    nperiph = len(instance.peripherals)
    yield CandidateAugmentation(())
    if nperiph == 0:
        return
    weight = 1
    while True:
        batch = set()
        for ell in range(1, weight + 1):
            for terms in _term_sets(weight - ell, ell, nperiph):
                batch.add(CandidateAugmentation(terms))
        yield from sorted(batch, key=CandidateAugmentation.key)
        weight += 1


class CandidateCursor:
    """Resumable random access into :func:`enumerate_candidates`."""

    def __init__(self, instance: RelHypInstance):
        self._gen = enumerate_candidates(instance)
        self._seen = []

    def __getitem__(self, k: int) -> CandidateAugmentation:
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


def term_words(instance: RelHypInstance, term: CandidateTerm):
    """``(conjugator over A, lattice, generator words over X_P)`` of a term."""
    lat = instance.finite_index_basis(term.peripheral, term.basis)
    p = instance.peripherals[term.peripheral]
    words = [p.vector_to_word(row) for row in lat.basis]
    return instance.conjugator(term.conjugator), lat, words


def augment(instance: RelHypInstance, generators: Sequence[Word],
            c: CandidateAugmentation) -> list:
    """Generators of ``H1`` over ``X``: those of ``H`` and each ``w^x = x^-1 w x``."""
    out = [instance.to_x(free_reduce(h)) for h in generators]
    for term in c.terms:
        x, _, words = term_words(instance, term)
        xx = instance.to_x(x)
        for w in words:
            out.append(multiply(inverse(xx), instance.peripheral_to_x(term.peripheral, w), xx))
    return out


# ----------------------------------------------------------------- verdicts

@dataclass
class Member:
    trace: dict = field(default_factory=dict)

    verdict = "member"


@dataclass
class Certificate:
    candidate: CandidateAugmentation
    subgroup_generators: list  # generators of H1 over X
    graph: lstallings.LStallingsGraph
    steps: int = 0


@dataclass
class NonMember:
    certificate: Certificate
    trace: dict = field(default_factory=dict)

    verdict = "non-member"


@dataclass
class BudgetExhausted:
    spent: dict = field(default_factory=dict)

    verdict = "budget-exhausted"


SCHEDULES = ("diag", "alt")


def _pairs_diagonal():
    """Cantor order on ``(candidate, step)`` pairs."""
    for n in itertools.count():
        for c in range(n + 1):
            yield c, n - c


def decide_membership(instance: RelHypInstance, generators: Sequence[Word], g: Word,
                      schedule: str = "diag", budget: int = DEFAULT_BUDGET,
                      lstallings_steps: Optional[int] = None):
    """Interleave both sides for at most ``budget`` logical steps.

    ``generators`` and ``g`` are words over ``A``.  With the ``diag``
    schedule, stage ``n`` runs one positive round and then advances each of
    the candidates ``0..n`` by one certification step.  With ``alt``, a
    positive round alternates with a single negative step, the negative
    steps walking the ``(candidate, step)`` grid diagonally.  Positive
    answers win ties inside a stage.  ``lstallings_steps`` optionally caps
    the steps given to any one candidate.
    """
    if schedule not in SCHEDULES:
        raise ValueError(f"unknown schedule {schedule!r}")
    A = instance.A
    generators = [free_reduce(A.check(h)) for h in generators]
    g = free_reduce(A.check(g))
    g_x = instance.to_x(g)
    pos = completion.initial_state(instance.positive_presentation(), generators, g)
    cursor = CandidateCursor(instance)
    runs = {}  # candidate index -> LStallingsComputation
    done = set()  # candidates that certified with g inside, or ran out
    certified = []  # (index, graph) of certified candidates, for the panic check
    spent = {"positive_rounds": 0, "negative_steps": 0, "candidates": 0}

    def budget_left():
        return spent["positive_rounds"] + spent["negative_steps"] < budget

    def positive_round():
        nonlocal pos
        if completion.check_target(pos):
            return True
        pos = completion.completion_step(pos)
        spent["positive_rounds"] += 1
        return completion.check_target(pos)

    def negative_step(k):
        """Advance candidate ``k``; returns a NonMember verdict or None."""
        if k in done or not cursor.has(k):
            return None
        run = runs.get(k)
        if run is None:
            cand = cursor[k]
            gens = augment(instance, generators, cand)
            run = runs[k] = lstallings.LStallingsComputation(instance.structure, gens)
            run.candidate = cand
            spent["candidates"] = max(spent["candidates"], k + 1)
        if lstallings_steps is not None and run.steps >= lstallings_steps:
            done.add(k)
            return None
        spent["negative_steps"] += 1
        graph = run.step()
        if graph is None:
            return None
        done.add(k)
        certified.append((k, graph))
        if lstallings.membership_l(graph, g_x):
            return None  # g lies in the augmented subgroup, which proves nothing
        cert = Certificate(run.candidate, run.generators, graph, run.steps)
        return NonMember(cert, {"candidate_index": k, **spent})

    def finish_member():
        # a certified H1 graph rejecting g would contradict the positive side
        for k, graph in certified:
            if not lstallings.membership_l(graph, g_x):
                raise SoundnessPanic("positive and negative sides disagree",
                                     {"candidate_index": k, **spent})
        return Member({"rounds": pos.round, "vertices": pos.graph.nvertices, **spent})

    def finish_nonmember(v):
        if completion.check_target(pos):
            raise SoundnessPanic("positive and negative sides disagree", dict(spent))
        # every base loop of the positive graph lies in H, hence in H1
        graph = v.certificate.graph
        for w in rank_and_basis(pos.graph)[1]:
            if not lstallings.membership_l(graph, instance.to_x(w)):
                raise SoundnessPanic(
                    "a word proved to lie in H is rejected by the certified H1 graph",
                    {"word": A.format(w), **v.trace},
                )
        return v

    # with no peripherals the only candidate is H itself
    finite = len(instance.peripherals) == 0

    def negative_idle():
        return finite and 0 in done

    if completion.check_target(pos):
        return finish_member()
    if schedule == "diag":
        for n in itertools.count():
            if not budget_left():
                break
            if positive_round():
                return finish_member()
            for k in range(n + 1):
                if not budget_left() or negative_idle():
                    break
                v = negative_step(k)
                if v is not None:
                    return finish_nonmember(v)
    else:
        grid = _pairs_diagonal()
        while budget_left():
            if positive_round():
                return finish_member()
            if not budget_left() or negative_idle():
                continue
            # next grid cell whose candidate still needs work
            while True:
                k, _ = next(grid)
                if k in done or (finite and k > 0):
                    continue
                v = negative_step(k)
                if v is not None:
                    return finish_nonmember(v)
                break
    return BudgetExhausted(dict(spent))


# ------------------------------------------------------------- certificates

def certificate_to_dict(instance: RelHypInstance, g: Word, cert: Certificate) -> dict:
    X = instance.X
    terms = []
    for term in cert.candidate.terms:
        x, lat, words = term_words(instance, term)
        p = instance.peripherals[term.peripheral]
        terms.append({
            "conjugator": instance.A.format(x),
            "peripheral": p.name,
            "vectors": [list(row) for row in lat.basis],
            "generators": [p.alphabet.format(w) for w in words],
        })
    return {
        "verdict": "non-member",
        "element": instance.A.format(g),
        "candidate": {"ell": cert.candidate.ell, "terms": terms},
        "subgroup_generators": [X.format(w) for w in cert.subgroup_generators],
        "steps": cert.steps,
        "graph": cert.graph.graph.to_dict(),
    }


def verify_certificate(instance: RelHypInstance, generators: Sequence[Word], g: Word,
                       data: dict) -> bool:
    """Re-check a non-membership certificate from its JSON form.

    Checks that every peripheral tuple has finite index, that the graph is
    closed under the augmented generators (so it is the full relative
    Stallings graph of ``H1``), that every generator of ``H`` reads in it and
    that ``g`` does not.
    """
    X = instance.X
    names = [p.name for p in instance.peripherals]
    h1 = [instance.to_x(free_reduce(h)) for h in generators]
    for term in data["candidate"]["terms"]:
        p = instance.peripherals[names.index(term["peripheral"])]
        vectors = [tuple(v) for v in term["vectors"]]
        if finite_index_test(hnf(vectors, p.rank)) == float("inf"):
            return False
        x = instance.to_x(instance.A.parse(term["conjugator"]))
        for v in vectors:
            w = translate(p.vector_to_word(v), p.alphabet, X)
            h1.append(multiply(inverse(x), w, x))
    graph = StallingsGraph.from_dict(data["graph"], X)
    if not graph.is_folded():
        return False
    candidate = lstallings.LStallingsGraph(graph, instance.structure)
    if not isinstance(lstallings.closure_certificate(candidate, h1),
                      lstallings.Certified):
        return False
    checked = lstallings.LStallingsGraph(graph, instance.structure, certified=True)
    if not all(lstallings.membership_l(checked, h) for h in h1):
        return False
    return not lstallings.membership_l(checked, instance.to_x(free_reduce(g)))


def load_instance(path: str, structure=None) -> RelHypInstance:
    with open(path) as fh:
        data = json.load(fh)
    return RelHypInstance.from_dict(data, structure)
