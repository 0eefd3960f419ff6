"""Relator gluing plus folding: a semi-decision procedure for ``g ∈ H``.

Starting from the Stallings graph of ``H`` in the free group, each round
glues a loop labelled by every relator at every vertex and folds.  Base
loops always map into ``H``, and every element of ``H`` eventually
becomes readable, so a target that reads as a base loop is a member.
Running out of rounds says nothing.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .stallings import StallingsGraph, add_loop, fold, stallings_graph
from .words import Presentation, Word, closure_of, free_reduce


@dataclass
class Member:
    rounds: int
    trace: dict = field(default_factory=dict)

    verdict = "member"


@dataclass
class BudgetExhausted:
    spent: dict = field(default_factory=dict)

    verdict = "budget-exhausted"


@dataclass
class CompletionState:
    graph: StallingsGraph
    round: int
    presentation: Presentation
    target: Word
    glue_closure: bool = False

    def relators(self) -> tuple:
        if self.glue_closure:
            return closure_of(self.presentation.relators)
        return self.presentation.relators

    def to_dict(self) -> dict:
        """Checkpoint: the graph and the round number."""
        return {"round": self.round, "graph": self.graph.to_dict()}


def initial_state(presentation: Presentation, generators: Sequence[Word], target: Word,
                  glue_closure: bool = False) -> CompletionState:
    alphabet = presentation.alphabet
    graph = stallings_graph(alphabet, [alphabet.check(h) for h in generators])
    return CompletionState(graph, 0, presentation, free_reduce(alphabet.check(target)),
                           glue_closure)


def completion_step(s: CompletionState) -> CompletionState:
    """Glue every relator at every vertex of the current graph, then fold."""
    g = s.graph
    relators = s.relators()
    if not relators:
        return CompletionState(g, s.round + 1, s.presentation, s.target, s.glue_closure)
    edges = list(g.edges)
    n = g.nvertices
    for v in range(g.nvertices):
        for r in relators:
            n = add_loop(g.alphabet, n, edges, v, r)
    folded = fold(StallingsGraph(g.alphabet, n, edges, g.base))
    return CompletionState(folded, s.round + 1, s.presentation, s.target, s.glue_closure)


def check_target(s: CompletionState) -> bool:
    """Whether the target labels a loop at the base vertex."""
    return s.graph.read(s.target) == s.graph.base


def run_completion(presentation: Presentation, generators: Sequence[Word], target: Word,
                   budget: int, glue_closure: bool = False, trace_dir: Optional[str] = None):
    """Run at most ``budget`` rounds; Member as soon as the target reads."""
    s = initial_state(presentation, generators, target, glue_closure)
    while True:
        if trace_dir is not None:
            _dump_round(s, trace_dir)
        if check_target(s):
            return Member(s.round, {"vertices": s.graph.nvertices})
        if s.round >= budget:
            return BudgetExhausted({"rounds": s.round, "vertices": s.graph.nvertices})
        s = completion_step(s)


def _dump_round(s: CompletionState, trace_dir: str) -> None:
    os.makedirs(trace_dir, exist_ok=True)
    path = os.path.join(trace_dir, f"round_{s.round:03d}.dot")
    with open(path, "w") as fh:
        fh.write(s.graph.to_dot(f"round{s.round}"))
