"""
Command-line front door for the workbench.

Reports go to stdout and are deterministic for fixed inputs; logs go to
stderr. Exit codes: 0 affirmative verdict, 1 negative verdict, 2 usage or
input error, 3 internal invariant violation.
"""

import argparse
import dataclasses
import logging
import os
import sys

from app.logic.atomic import (
    Derivable,
    NotDerivable,
    Saturate,
    TopDown,
    check_trace,
    derive,
    trace_lines,
)
from app.logic.errors import (
    InadmissibleBase,
    InvariantViolation,
    OpenAtomError,
    TransformError,
    UnknownDemo,
    UsageError,
    WorkbenchError,
)
from app.logic.flatten import (
    audit,
    compile_hilbert_to_base,
    dump_base,
    extract_hilbert_from_base,
    flat_table,
)
from app.logic.hilbert import SYSTEMS, NotFound, check_hilbert, identity_proof, search
from app.logic.natded import ND_SYSTEMS, PAIRED, check_nd, hilbert_to_nd, nd_to_hilbert
from app.logic.parser import (
    detect_kind,
    parse_base,
    parse_formula,
    parse_formula_list,
    parse_hilbert_proof,
    parse_nd_proof,
    parse_universe,
    print_atom,
    print_base,
    print_formula,
    print_hilbert_proof,
    print_nd_proof,
    print_universe,
)
from app.logic.support import (
    Fails,
    Policy,
    SupportEvaluator,
    recheck,
    supports,
    supports_consequence,
    witness_lines,
)
from app.logic.syntax import Atom, Pred, Signature, expand
from app.logic.utils import get_default, read_source

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

DEMOS = ("aristotle", "tammy", "dne-counterexample", "completeness-roundtrip")


def configure_logging(verbose=False):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


class Report:
    """Collects report lines; ``tsv`` rows are tab-separated key/value pairs."""

    def __init__(self, out, fmt="text"):
        self.out = out
        self.fmt = fmt

    def line(self, text=""):
        if self.fmt == "text":
            self.out.write(f"{text}\n")

    def lines(self, texts):
        for text in texts:
            self.line(text)

    def field(self, key, value):
        if self.fmt == "tsv":
            self.out.write(f"{key}\t{value}\n")
        else:
            self.out.write(f"{key}: {value}\n")

    def raw(self, text):
        self.out.write(f"{text}\n")


# Input helpers


def _read_input(value):
    """File contents when ``value`` names a file, else ``value`` itself."""
    if os.path.isfile(value):
        with open(value, "r", encoding="utf-8") as file:
            return file.read(), value
    return value, "<argument>"


def _load_base(value, sig):
    text, source = read_source(value, "base")
    if detect_kind(text) == "universe":
        _, bases = parse_universe(text, sig=sig, source=source)
        if not bases:
            raise UsageError(f"{source} declares no base")
        return next(iter(bases.values()))
    return parse_base(text, sig=sig, source=source)


def _load_universe(args, sig):
    name = args.universe or get_default("universe", "dne")
    text, source = read_source(name, "universe")
    universe, bases = parse_universe(text, sig=sig, source=source)
    changes = {}
    if args.policy:
        changes["policy"] = Policy(args.policy)
    if args.depth is not None:
        changes["depth"] = args.depth
    return dataclasses.replace(universe, **changes), bases


def _atoms(formulas, what):
    for phi in formulas:
        if not isinstance(phi, Atom):
            raise OpenAtomError(f"{what} must be an atom, got {print_formula(phi)}")
    return formulas


def _load_proof(value):
    """``(kind, system, proof)`` for a Hilbert or ND script given as a file or text."""
    text, source = _read_input(value)
    kind = detect_kind(text)
    if kind == "hilbert":
        proof = parse_hilbert_proof(text, source=source)
        return kind, proof.system, proof
    if kind == "nd":
        system, tree = parse_nd_proof(text, source=source)
        return kind, system, tree
    raise UsageError(f"{source} is a {kind}, not a proof script")


# Commands


def cmd_parse(args, report):
    text, source = _read_input(args.input)
    kind = detect_kind(text)
    if kind == "base":
        report.raw(print_base(parse_base(text, source=source)))
    elif kind == "universe":
        universe, bases = parse_universe(text, source=source)
        report.raw(print_universe(universe, bases.values()))
    elif kind == "hilbert":
        report.raw(print_hilbert_proof(parse_hilbert_proof(text, source=source)))
    elif kind == "nd":
        system, tree = parse_nd_proof(text, source=source)
        report.raw(print_nd_proof(tree, system))
    else:
        phi = parse_formula(text.strip(), source=source)
        report.field("formula", print_formula(phi))
        report.field("expanded", print_formula(expand(phi)))
    return 0


def cmd_derive(args, report):
    if not args.goal:
        raise UsageError("derive needs --goal")
    sig = Signature()
    base = _load_base(args.base or "aristotle", sig)
    goal = _atoms([parse_formula(args.goal, sig=sig, source="--goal")], "the goal")[0]
    hyps = _atoms(parse_formula_list(args.hyps or "", sig=sig, source="--hyps"), "a hypothesis")
    mode = TopDown(args.depth) if args.depth is not None else Saturate()
    verdict = derive(base, hyps, goal, mode)
    hyp_text = ", ".join(print_atom(h) for h in hyps)
    report.field("query", f"{hyp_text + ' ' if hyp_text else ''}|-_{base.name} {print_atom(goal)}")
    if isinstance(verdict, Derivable):
        if not check_trace(base, verdict.trace):
            raise InvariantViolation("derivation trace fails check_trace")
        report.field("verdict", "Derivable")
        report.field("trace size", verdict.trace.size())
        report.lines(trace_lines(verdict.trace))
        return 0
    if isinstance(verdict, NotDerivable):
        report.field("verdict", "NotDerivable")
    else:
        report.field("verdict", f"Unknown ({verdict.reason})")
    return 1


def cmd_check(args, report):
    kind, declared, proof = _load_proof(args.input)
    system = args.system or declared
    if kind == "hilbert":
        if system not in SYSTEMS:
            raise UsageError(f"a Hilbert script is checked in HI or HC, not {system}")
        result = check_hilbert(system, proof)
    else:
        if system not in ND_SYSTEMS:
            raise UsageError(f"an ND script is checked in NI or NC, not {system}")
        result = check_nd(system, proof)
    report.field("system", system)
    if report.fmt == "tsv":
        report.field("verdict", "ok" if result.ok else f"{len(result.issues)} issue(s)")
    report.lines(result.lines)
    return 0 if result.ok else 1


def cmd_prove(args, report):
    if not args.goal:
        raise UsageError("prove needs --goal")
    system = args.system or "HI"
    calculus = system if system in SYSTEMS else PAIRED[system]
    phi = parse_formula(args.goal, source="--goal")
    hyps = parse_formula_list(args.hyps or "", source="--hyps")
    depth = args.depth if args.depth is not None else get_default("search_depth", 8)
    found = search(calculus, hyps, phi, depth, seed=args.seed)
    if isinstance(found, NotFound):
        report.field("verdict", str(found))
        return 1
    if not check_hilbert(calculus, found).ok:
        raise InvariantViolation("search returned a proof that does not check")
    report.raw(print_hilbert_proof(found))
    if system in ND_SYSTEMS:
        report.raw(print_nd_proof(hilbert_to_nd(found, system), system))
    report.field("verdict", f"proved in {len(found.steps)} step(s)")
    return 0


def cmd_translate(args, report):
    kind, declared, proof = _load_proof(args.input)
    if kind == "hilbert":
        if not check_hilbert(declared, proof).ok:
            raise TransformError("the Hilbert proof does not check; nothing to translate")
        target = args.system or PAIRED[declared]
        target = target if target in ND_SYSTEMS else PAIRED[target]
        if not check_hilbert(PAIRED[target], proof).ok:
            raise UsageError(
                f"the {declared} proof does not check in {PAIRED[target]}; cannot translate to {target}"
            )
        tree = hilbert_to_nd(proof, target)
        report.raw(print_nd_proof(tree, target))
        report.field("verdict", "ok" if check_nd(target, tree).ok else "FAIL")
        return 0
    if not check_nd(declared, proof).ok:
        raise TransformError("the ND proof does not check; nothing to translate")
    target = args.system or PAIRED[declared]
    target = target if target in SYSTEMS else PAIRED[target]
    if not check_nd(PAIRED[target], proof).ok:
        raise UsageError(
            f"the {declared} proof does not check in {PAIRED[target]}; cannot translate to {target}"
        )
    translated = nd_to_hilbert(proof, target)
    report.raw(print_hilbert_proof(translated))
    report.field("verdict", "ok" if check_hilbert(translated.system, translated).ok else "FAIL")
    return 0


def _compile(value):
    kind, system, proof = _load_proof(value)
    if kind != "hilbert":
        raise UsageError("flattening takes a Hilbert proof script")
    if not check_hilbert(system, proof).ok:
        raise TransformError("the Hilbert proof does not check; nothing to compile")
    sim, trace = compile_hilbert_to_base(proof)
    problems = audit(sim)
    if problems:
        raise InvariantViolation(f"simulation base audit: {problems[0]}")
    return proof, sim, trace


def cmd_flatten(args, report):
    _, sim, trace = _compile(args.input)
    if report.fmt == "tsv":
        report.raw(flat_table(sim.fmap))
        return 0
    report.raw(dump_base(sim))
    report.line()
    report.lines(trace_lines(trace))
    report.field("rules", len(sim.rules))
    report.field("trace size", trace.size())
    return 0


def cmd_extract(args, report):
    proof, sim, trace = _compile(args.input)
    extracted = extract_hilbert_from_base(sim, trace)
    result = check_hilbert(extracted.system, extracted)
    report.raw(print_hilbert_proof(extracted))
    report.field("verdict", "ok" if result.ok else f"{len(result.issues)} issue(s)")
    same = expand(extracted.conclusion) == expand(proof.conclusion)
    report.field("conclusion preserved", "yes" if same else "no")
    if not (result.ok and same):
        raise InvariantViolation("extracted proof does not reproduce the compiled one")
    return 0


def cmd_support(args, report):
    if not args.goal:
        raise UsageError("support needs --goal")
    sig = Signature()
    universe, bases = _load_universe(args, sig)
    phi = parse_formula(args.goal, sig=sig, source="--goal")
    hyps = parse_formula_list(args.hyps or "", sig=sig, source="--hyps")
    report.field("universe", f"{universe.name} (policy {universe.policy.value}, budget {universe.budget})")
    if args.base:
        base = bases.get(args.base) or _load_base(args.base, sig)
        if hyps:
            engine = SupportEvaluator(universe)
            rules = engine.check_base(base)
            premises = tuple(expand(h) for h in hyps)
            verdict = engine.consequence(rules, premises, expand(phi), universe.depth)
        else:
            verdict = supports(base, phi, universe)
        report.field("query", f"|-_{base.name} {print_formula(phi)}")
    else:
        verdict = supports_consequence(hyps, phi, universe)
        hyp_text = ", ".join(print_formula(h) for h in hyps)
        report.field("query", f"{hyp_text + ' ' if hyp_text else ''}|= {print_formula(phi)}")
    if report.fmt == "tsv":
        report.field("verdict", type(verdict).__name__)
    else:
        report.lines(witness_lines(verdict))
    if isinstance(verdict, Fails):
        if not recheck(verdict, universe):
            raise InvariantViolation("Fails witness does not re-evaluate to Fails")
        report.field("witness rechecked", "yes")
        return 1
    return 0


# Demos


def demo_aristotle(report):
    sig = Signature()
    base = _load_base("aristotle", sig)
    goal = parse_formula("M(s)", sig=sig)
    report.raw(print_base(base))
    report.field("query", f"|-_{base.name} {print_atom(goal)}")
    verdict = derive(base, (), goal)
    if not isinstance(verdict, Derivable) or not check_trace(base, verdict.trace):
        raise InvariantViolation("aristotle: M(s) is not derived")
    report.lines(trace_lines(verdict.trace))
    report.field("verdict", "Derivable")
    return 0


def demo_tammy(report):
    sig = Signature()
    base = _load_base("tammy", sig)
    report.raw(print_base(base))
    v, fe, fo = (parse_formula(t, sig=sig) for t in ("V(t)", "Fe(t)", "Fo(t)"))
    queries = [((v,), fe), ((v,), fo), ((fe, fo), v)]
    for hyps, goal in queries:
        verdict = derive(base, hyps, goal)
        hyp_text = ", ".join(print_atom(h) for h in hyps)
        report.field("query", f"{hyp_text} |-_{base.name} {print_atom(goal)}")
        if not isinstance(verdict, Derivable) or not check_trace(base, verdict.trace):
            raise InvariantViolation(f"tammy: {print_atom(goal)} is not derived")
        report.lines(trace_lines(verdict.trace))
    report.field("verdict", "Derivable (all three)")
    return 0


def demo_dne_counterexample(report):
    sig = Signature()
    text, source = read_source("dne", "universe")
    universe, bases = parse_universe(text, sig=sig, source=source)
    base = bases["counterexample"]
    a, b = parse_formula("A", sig=sig), parse_formula("B", sig=sig)
    stable = parse_formula("~~A -> A", sig=sig)
    report.raw(print_universe(universe, [base]))
    for goal in (a, b):
        verdict = derive(base, (), goal)
        report.field(f"|-_{base.name} {print_atom(goal)}", type(verdict).__name__)
        if not isinstance(verdict, NotDerivable):
            raise InvariantViolation(f"{print_atom(goal)} should not be derivable")
    double_negation = parse_formula("~~A", sig=sig)
    report.field(f"{base.name} supports ~~A", type(supports(base, double_negation, universe)).__name__)

    intuitionistic = supports_consequence((), stable, universe.with_policy(Policy.I))
    report.field("policy I: |= ~~A -> A", type(intuitionistic).__name__)
    report.lines(witness_lines(intuitionistic))
    if not isinstance(intuitionistic, Fails) or not recheck(intuitionistic, universe.with_policy(Policy.I)):
        raise InvariantViolation("policy I should refute ~~A -> A with a checkable witness")

    classical = universe.with_policy(Policy.C)
    verdict = supports_consequence((), stable, classical)
    report.field("policy C: |= ~~A -> A", type(verdict).__name__)
    if isinstance(verdict, Fails):
        raise InvariantViolation("policy C should find no counterexample to ~~A -> A")
    try:
        supports(base, stable, classical)
    except InadmissibleBase as exc:
        report.field("policy C", str(exc))
    return 0


def demo_completeness_roundtrip(report):
    p = Atom(Pred("P", 0))
    proof = identity_proof(p, "HI")
    report.raw(print_hilbert_proof(proof))
    report.field("HI check", "ok" if check_hilbert("HI", proof).ok else "FAIL")
    tree = hilbert_to_nd(proof)
    report.raw(print_nd_proof(tree, "NI"))
    report.field("NI check", "ok" if check_nd("NI", tree).ok else "FAIL")
    sim, trace = compile_hilbert_to_base(proof)
    report.raw(dump_base(sim))
    report.lines(trace_lines(trace))
    report.field(f"{sim.name} trace check", "ok" if check_trace(sim.as_base(), trace) else "FAIL")
    extracted = extract_hilbert_from_base(sim, trace)
    report.raw(print_hilbert_proof(extracted))
    result = check_hilbert("HI", extracted)
    report.field("extracted HI check", "ok" if result.ok else "FAIL")
    if not result.ok or expand(extracted.conclusion) != expand(proof.conclusion):
        raise InvariantViolation("round trip lost the theorem")
    return 0


DEMO_RUNNERS = {
    "aristotle": demo_aristotle,
    "tammy": demo_tammy,
    "dne-counterexample": demo_dne_counterexample,
    "completeness-roundtrip": demo_completeness_roundtrip,
}


def demo(name, report):
    """Run a canned walkthrough, printing every intermediate object."""
    runner = DEMO_RUNNERS.get(name)
    if runner is None:
        raise UnknownDemo(f"unknown demo {name}; choose one of {', '.join(DEMOS)}")
    logger.info(f"🚀 demo {name}: Starting...")
    code = runner(report)
    logger.info(f"✅ demo {name}: Completed")
    return code


def cmd_demo(args, report):
    return demo(args.name, report)


COMMANDS = {
    "parse": cmd_parse,
    "derive": cmd_derive,
    "check": cmd_check,
    "prove": cmd_prove,
    "translate": cmd_translate,
    "flatten": cmd_flatten,
    "extract": cmd_extract,
    "support": cmd_support,
    "demo": cmd_demo,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "tsv"), default="text")
    common.add_argument("--verbose", action="store_true", help="INFO logging to stderr")
    common.add_argument("--seed", type=int, default=get_default("seed", 0))
    common.add_argument("--depth", type=int, default=None)

    parser = argparse.ArgumentParser(prog="workbench", description="Base-extension semantics workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse and print canonically")
    p.add_argument("input", help="file or literal text")

    p = sub.add_parser("derive", parents=[common], help="atomic derivability in a base")
    p.add_argument("--base")
    p.add_argument("--goal")
    p.add_argument("--hyps")

    p = sub.add_parser("check", parents=[common], help="check a Hilbert or ND proof script")
    p.add_argument("input")
    p.add_argument("--system", choices=SYSTEMS + ND_SYSTEMS)

    p = sub.add_parser("prove", parents=[common], help="bounded Hilbert proof search")
    p.add_argument("--goal")
    p.add_argument("--hyps")
    p.add_argument("--system", choices=SYSTEMS + ND_SYSTEMS)

    p = sub.add_parser("translate", parents=[common], help="Hilbert <-> natural deduction")
    p.add_argument("input")
    p.add_argument("--system", choices=SYSTEMS + ND_SYSTEMS)

    for name, text in (("flatten", "compile a proof to a simulation base"), ("extract", "compile then extract")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("input")

    p = sub.add_parser("support", parents=[common], help="bounded support check")
    p.add_argument("--universe")
    p.add_argument("--base")
    p.add_argument("--goal")
    p.add_argument("--hyps")
    p.add_argument("--policy", choices=[policy.value for policy in Policy])

    p = sub.add_parser("demo", parents=[common], help="canned walkthroughs")
    p.add_argument("name")
    return parser


def run(argv=None, out=None):
    """
    Dispatch one command.

    Returns:
        int: the exit code
    """
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    configure_logging(args.verbose)
    report = Report(out, args.format)
    try:
        return COMMANDS[args.command](args, report)
    except InvariantViolation as exc:
        logger.error(f"❌ {args.command}: {exc}", exc_info=True)
        return 3
    except (WorkbenchError, FileNotFoundError, ValueError) as exc:
        logger.error(f"❌ {args.command}: {exc}")
        return 2
    except Exception as exc:
        logger.error(f"❌ {args.command}: unexpected {type(exc).__name__}: {exc}", exc_info=True)
        return 3


def main():
    sys.exit(run())
