"""Command-line front end.

Exit codes: 0 member / success, 1 non-member / negative answer, 2 budget
exhausted, 3 parse error, 4 invalid bundle, 5 soundness panic, 6 no oracle.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import random
import re
import sys
from dataclasses import dataclass, field

from . import automata, autostruct, completion, lstallings, oracles, relhyp, stallings
from .autostruct import AutomaticStructure, StructureError
from .lattice import LatticeError, PeripheralStructure
from .relhyp import InstanceError, SoundnessPanic
from .stallings import GraphError
from .words import Alphabet, Presentation, WordError, closure_of, commutator, free_reduce

EXIT_MEMBER = 0
EXIT_NONMEMBER = 1
EXIT_BUDGET = 2
EXIT_PARSE = 3
EXIT_BUNDLE = 4
EXIT_PANIC = 5
EXIT_NO_ORACLE = 6


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    subcommand: str
    json: bool = False
    trace_dir: str = None
    seed: int = 0
    options: dict = field(default_factory=dict)


# ----------------------------------------------------------------- helpers

def infer_alphabet(texts) -> Alphabet:
    """Generator names used in ``texts``; single letters, uppercase = inverse."""
    names = set()
    for text in texts:
        for token in text.replace(",", "*").split("*"):
            token = token.strip()
            if not token or token == "1":
                continue
            m = re.match(r"^([A-Za-z_][A-Za-z0-9_]*)(\^[+-]?\d+)?$", token)
            if m is None:
                raise CliError(EXIT_PARSE, f"cannot parse factor {token!r}")
            if m.group(2) is None and token.isalpha():
                # shorthand such as abA: one generator per letter
                names.update(ch.lower() for ch in token)
            else:
                names.add(m.group(1))
    if not names:
        names = {"a", "b"}
    return Alphabet(sorted(names))


def split_words(text: str) -> list:
    if text is None or not text.strip():
        return []
    return [t.strip() for t in text.split(",")]


def parse_words(alphabet: Alphabet, texts) -> list:
    return [alphabet.parse(t) for t in texts]


def alphabet_for(args, *word_lists) -> Alphabet:
    if getattr(args, "alphabet", None):
        return Alphabet([s.strip() for s in args.alphabet.split(",") if s.strip()])
    texts = [t for ws in word_lists for t in ws]
    return infer_alphabet(texts)


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise CliError(EXIT_BUNDLE, f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: invalid JSON ({exc})") from None


def load_presentation(path: str):
    data = load_json(path)
    pres = Presentation.from_dict(data)
    periph = PeripheralStructure.from_dict(data, pres.alphabet)
    return data, pres, periph


def load_structure(spec: str, presentation_path: str = None) -> AutomaticStructure:
    """A bundle path, ``free:a,b``, ``abelian:a,b`` or ``builtin``."""
    if spec.startswith("free:"):
        return autostruct.builtin_shortlex_free(Alphabet(spec[5:].split(",")))
    if spec.startswith("abelian:"):
        return autostruct.builtin_shortlex_abelian(Alphabet(spec[8:].split(",")))
    if spec == "builtin":
        if presentation_path is None:
            raise CliError(EXIT_BUNDLE, "--structure builtin needs --presentation")
        _, pres, periph = load_presentation(presentation_path)
        return relhyp.builtin_toral_structure(pres, periph)
    if not os.path.exists(spec):
        raise CliError(EXIT_BUNDLE, f"no such structure bundle: {spec}")
    return AutomaticStructure.load(spec)


def graph_summary(g) -> dict:
    rank, basis = stallings.rank_and_basis(g)
    index = stallings.index_free(g)
    return {
        "vertices": g.nvertices,
        "edges": len(g.edges),
        "rank": rank,
        "index": "infinite" if index == stallings.INFINITE else index,
        "basis": [g.alphabet.format(w) for w in basis],
    }


def write_text(path, text):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def emit(config: RunConfig, report: dict, human: str) -> None:
    if config.json:
        print(json.dumps(report, sort_keys=True, indent=1))
    else:
        print(human)


def _fmt_index(x):
    return "∞" if x == "infinite" else str(x)


# ------------------------------------------------------------- subcommands

def cmd_fold(args, config):
    texts = split_words(args.gens)
    alphabet = alphabet_for(args, texts)
    g = stallings.stallings_graph(alphabet, parse_words(alphabet, texts))
    report = {"command": "fold", "alphabet": list(alphabet), **graph_summary(g),
              "graph": g.to_dict()}
    if args.dot:
        write_text(args.dot, g.to_dot())
    if args.out:
        write_text(args.out, json.dumps(g.to_dict(), sort_keys=True, indent=1) + "\n")
    if config.trace_dir:
        write_text(os.path.join(config.trace_dir, "fold.dot"), g.to_dot())
    emit(config, report,
         f"{report['vertices']} vertices, {report['edges']} edges, "
         f"rank {report['rank']}, index {_fmt_index(report['index'])}")
    return 0


def cmd_rank(args, config):
    texts = split_words(args.gens)
    alphabet = alphabet_for(args, texts)
    g = stallings.stallings_graph(alphabet, parse_words(alphabet, texts))
    s = graph_summary(g)
    emit(config, {"command": "rank", "rank": s["rank"], "basis": s["basis"]},
         f"rank {s['rank']}: " + ", ".join(s["basis"] or ["(trivial)"]))
    return 0


def cmd_index(args, config):
    texts = split_words(args.gens)
    alphabet = alphabet_for(args, texts)
    g = stallings.stallings_graph(alphabet, parse_words(alphabet, texts))
    s = graph_summary(g)
    emit(config, {"command": "index", "index": s["index"]}, f"index {_fmt_index(s['index'])}")
    return 0


def cmd_intersect(args, config):
    t1, t2 = split_words(args.gens1), split_words(args.gens2)
    alphabet = alphabet_for(args, t1, t2)
    g1 = stallings.stallings_graph(alphabet, parse_words(alphabet, t1))
    g2 = stallings.stallings_graph(alphabet, parse_words(alphabet, t2))
    g = stallings.intersect_free(g1, g2)
    s = graph_summary(g)
    if args.dot:
        write_text(args.dot, g.to_dot())
    emit(config, {"command": "intersect", **s, "graph": g.to_dict()},
         f"intersection: rank {s['rank']}, generators " + ", ".join(s["basis"] or ["(trivial)"]))
    return 0


def cmd_conjugate(args, config):
    t1, t2 = split_words(args.gens1), split_words(args.gens2)
    alphabet = alphabet_for(args, t1, t2)
    g1 = stallings.stallings_graph(alphabet, parse_words(alphabet, t1))
    g2 = stallings.stallings_graph(alphabet, parse_words(alphabet, t2))
    x = stallings.conjugate_free(g1, g2)
    if x is None:
        emit(config, {"command": "conjugate", "conjugate": False}, "not conjugate")
        return EXIT_NONMEMBER
    emit(config, {"command": "conjugate", "conjugate": True, "conjugator": alphabet.format(x)},
         f"conjugate by {alphabet.format(x) or '1'}")
    return 0


def cmd_complete(args, config):
    _, pres, _ = load_presentation(args.presentation)
    A = pres.alphabet
    gens = parse_words(A, split_words(args.subgroup))
    g = A.parse(args.element)
    trace = config.trace_dir
    result = completion.run_completion(pres, gens, g, args.rounds,
                                       glue_closure=args.glue_closure, trace_dir=trace)
    if isinstance(result, completion.Member):
        emit(config, {"command": "complete", "verdict": "member", "rounds": result.rounds},
             f"member (after {result.rounds} rounds)")
        return EXIT_MEMBER
    emit(config, {"command": "complete", "verdict": "budget-exhausted", **result.spent},
         f"no answer after {result.spent['rounds']} rounds")
    return EXIT_BUDGET


def cmd_l_stallings(args, config):
    s = load_structure(args.structure, args.presentation)
    gens = parse_words(s.alphabet, split_words(args.subgroup))
    result = lstallings.compute_l_stallings(s, gens, args.budget)
    if isinstance(result, lstallings.BudgetExhausted):
        emit(config, {"command": "l-stallings", "certified": False, **result.spent},
             f"not certified after {result.spent['steps']} steps")
        return EXIT_BUDGET
    g = result.graph
    if args.emit_dot:
        write_text(args.emit_dot, g.to_dot())
    if config.trace_dir:
        write_text(os.path.join(config.trace_dir, "l_stallings.dot"), g.to_dot())
    report = {"command": "l-stallings", "certified": True, "vertices": g.nvertices,
              "edges": len(g.edges), "graph": g.to_dict()}
    if args.element is not None:
        report["member"] = lstallings.membership_l(result, s.alphabet.parse(args.element))
    human = f"certified: {g.nvertices} vertices, {len(g.edges)} edges"
    if "member" in report:
        human += "; element is " + ("a member" if report["member"] else "not a member")
    emit(config, report, human)
    if "member" in report and not report["member"]:
        return EXIT_NONMEMBER
    return 0


def cmd_member(args, config):
    data, pres, periph = load_presentation(args.presentation)
    structure = load_structure(args.structure, args.presentation)
    translation = {k: pres.alphabet.parse(v) for k, v in data.get("translation", {}).items()}
    instance = relhyp.RelHypInstance(pres, periph, structure, translation)
    A = pres.alphabet
    gens = parse_words(A, split_words(args.subgroup))
    g = A.parse(args.element)
    verdict = relhyp.decide_membership(instance, gens, g, schedule=args.schedule,
                                       budget=args.budget)
    report = {"command": "member", "verdict": verdict.verdict,
              "element": A.format(g), "subgroup": [A.format(h) for h in gens],
              "schedule": args.schedule, "budget": args.budget, "seed": config.seed}
    if isinstance(verdict, relhyp.Member):
        report["spent"] = verdict.trace
        emit(config, report, "member")
        return EXIT_MEMBER
    if isinstance(verdict, relhyp.NonMember):
        report["spent"] = verdict.trace
        cert = relhyp.certificate_to_dict(instance, g, verdict.certificate)
        if args.certificate:
            write_text(args.certificate, json.dumps(cert, sort_keys=True, indent=1) + "\n")
            report["certificate"] = args.certificate
        else:
            report["certificate"] = cert
        emit(config, report, "non-member")
        return EXIT_NONMEMBER
    report["spent"] = verdict.spent
    emit(config, report, "budget exhausted: no verdict")
    return EXIT_BUDGET


def _oracle_answer(args):
    family = args.family
    if args.presentation:
        _, pres, periph = load_presentation(args.presentation)
        A = pres.alphabet
    else:
        pres, periph = None, PeripheralStructure(())
        A = alphabet_for(args, split_words(args.subgroup), [args.element])
    gens = parse_words(A, split_words(args.subgroup))
    g = A.parse(args.element)
    if not free_reduce(g):
        return family, True
    if family == "auto":
        family = _guess_family(pres, periph)
    if family == "free":
        if pres is not None and pres.relators:
            raise oracles.NoOracle("the free oracle needs a presentation without relators")
        return family, oracles.free_membership_enum(gens, g)
    if family == "abelian":
        if pres is not None:
            letters = [(2 * i,) for i in range(len(A))]
            comms = [commutator(u, v) for u, v in itertools.combinations(letters, 2)]
            if set(closure_of(pres.relators)) != set(closure_of(comms)):
                raise oracles.NoOracle("presentation is not free abelian")
        return family, oracles.abelian_membership(gens, g, len(A))
    if family == "free-product":
        if pres is None:
            raise oracles.NoOracle("the free-product oracle needs a presentation")
        try:
            relhyp.builtin_toral_structure(pres, periph)
        except StructureError as exc:
            raise oracles.NoOracle(str(exc)) from None
        factors = [tuple(A.index(s) for s in p.alphabet) for p in periph]
        used = {i for f in factors for i in f}
        factors += [(i,) for i in range(len(A)) if i not in used]
        fp = oracles.FreeProductOracle(factors, len(A))
        conj = A.parse(args.conjugator) if args.conjugator is not None else None
        return family, fp.membership(gens, g, conj)
    if family == "finite":
        if pres is None:
            raise oracles.NoOracle("the coset-enumeration oracle needs a presentation")
        table = oracles.CosetTable(pres, gens, max_cosets=args.max_cosets)
        return family, table.contains(g)
    raise oracles.NoOracle(f"unknown oracle family {family!r}")


def _guess_family(pres, periph):
    if pres is None or not pres.relators:
        return "free"
    try:
        relhyp.builtin_toral_structure(pres, periph)
        return "free-product"
    except StructureError:
        return "finite"


def cmd_oracle(args, config):
    try:
        family, answer = _oracle_answer(args)
    except oracles.NoOracle as exc:
        raise CliError(EXIT_NO_ORACLE, f"no oracle: {exc}") from None
    emit(config, {"command": "oracle", "family": family,
                  "verdict": "member" if answer else "non-member"},
         "member" if answer else "non-member")
    return EXIT_MEMBER if answer else EXIT_NONMEMBER


def cmd_validate_structure(args, config):
    s = load_structure(args.structure, args.presentation)
    report = autostruct.validate(s, args.depth)
    if args.export:
        s.save(args.export)
    out = {"command": "validate-structure", "name": s.name, **report.to_dict(s.alphabet)}
    emit(config, out,
         f"{s.name}: {report.checked} checks, "
         + ("ok" if report.ok else f"{len(report.violations)} violations"))
    return 0 if report.ok else EXIT_BUNDLE


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    def global_flags(defaults: bool):
        # subcommand copies must not overwrite flags given before the subcommand
        g = argparse.ArgumentParser(add_help=False)
        kw = {} if defaults else {"default": argparse.SUPPRESS}
        g.add_argument("--json", action="store_true", help="print a JSON report", **kw)
        g.add_argument("--trace-dir", help="directory for per-step DOT dumps", **kw)
        g.add_argument("--seed", type=int, help="seed for randomised steps",
                       **(kw or {"default": 0}))
        return g

    common = global_flags(False)
    p = argparse.ArgumentParser(prog="rhmember", parents=[global_flags(True)],
                                description="Subgroup membership tools for free, "
                                "automatic and relatively hyperbolic groups.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    for name, text in (("fold", "Stallings graph of a subgroup of a free group"),
                       ("rank", "rank and free basis of a subgroup"),
                       ("index", "index of a subgroup of a free group")):
        q = add(name, text)
        q.add_argument("--gens", required=True, help='comma-separated words, e.g. "a*a,a*b"')
        q.add_argument("--alphabet", help="comma-separated generator names")
        if name == "fold":
            q.add_argument("--dot", help="write the graph as DOT")
            q.add_argument("--out", help="write the graph as JSON")

    for name, text in (("intersect", "intersection of two subgroups"),
                       ("conjugate", "whether two subgroups are conjugate")):
        q = add(name, text)
        q.add_argument("--gens1", required=True)
        q.add_argument("--gens2", required=True)
        q.add_argument("--alphabet")
        if name == "intersect":
            q.add_argument("--dot")

    q = add("complete", "relator gluing and folding (positive side only)")
    q.add_argument("--presentation", required=True)
    q.add_argument("--subgroup", default="")
    q.add_argument("--element", required=True)
    q.add_argument("--rounds", type=int, default=10)
    q.add_argument("--glue-closure", action="store_true",
                   help="glue all cyclic permutations and inverses of the relators")

    q = add("l-stallings", "Stallings graph relative to an automatic structure")
    q.add_argument("--structure", required=True,
                   help="bundle directory/manifest, free:a,b, abelian:a,b or builtin")
    q.add_argument("--presentation", help="presentation for --structure builtin")
    q.add_argument("--subgroup", default="")
    q.add_argument("--element", help="also test membership of this word")
    q.add_argument("--budget", type=int, default=50)
    q.add_argument("--emit-dot")

    q = add("member", "decide membership in a relatively hyperbolic group")
    q.add_argument("--presentation", required=True)
    q.add_argument("--structure", default="builtin")
    q.add_argument("--subgroup", default="")
    q.add_argument("--element", required=True)
    q.add_argument("--budget", type=int, default=relhyp.DEFAULT_BUDGET)
    q.add_argument("--schedule", choices=relhyp.SCHEDULES, default="diag")
    q.add_argument("--certificate", help="write the non-membership certificate here")

    q = add("oracle", "independent brute-force membership oracles")
    q.add_argument("--family", default="auto",
                   choices=["auto", "free", "abelian", "free-product", "finite"])
    q.add_argument("--presentation")
    q.add_argument("--alphabet")
    q.add_argument("--subgroup", default="")
    q.add_argument("--element", required=True)
    q.add_argument("--conjugator", help="common conjugator for the free-product oracle")
    q.add_argument("--max-cosets", type=int, default=100000)

    q = add("validate-structure", "bounded check of an automatic structure")
    q.add_argument("--structure", required=True)
    q.add_argument("--presentation")
    q.add_argument("--depth", type=int, default=4)
    q.add_argument("--export", help="write the structure as a bundle directory")
    return p


COMMANDS = {
    "fold": cmd_fold,
    "rank": cmd_rank,
    "index": cmd_index,
    "intersect": cmd_intersect,
    "conjugate": cmd_conjugate,
    "complete": cmd_complete,
    "l-stallings": cmd_l_stallings,
    "member": cmd_member,
    "oracle": cmd_oracle,
    "validate-structure": cmd_validate_structure,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name in ("budget", "rounds", "depth"):
        if getattr(args, name, 0) is not None and getattr(args, name, 0) < 0:
            parser.error(f"--{name} must be non-negative")
    config = RunConfig(args.subcommand, args.json, args.trace_dir, args.seed, vars(args))
    random.seed(config.seed)
    try:
        return COMMANDS[args.subcommand](args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except WordError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SoundnessPanic as exc:
        print(f"internal soundness panic: {exc}", file=sys.stderr)
        print(json.dumps(exc.trace, sort_keys=True), file=sys.stderr)
        return EXIT_PANIC
    except (StructureError, InstanceError, LatticeError, GraphError,
            automata.AutomatonError, lstallings.LStallingsError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_BUNDLE


if __name__ == "__main__":
    sys.exit(main())
