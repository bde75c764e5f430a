"""
Bounded evaluation of support over finite frames.

A SupportUniverse fixes the candidate rules (units), the constant and
predicate slices that quantifiers range over, a budget of eigen witnesses
and the basis policy. Extensions of a base are the base joined with any
admissible set of units. Verdicts never overclaim: a clause whose
quantifier ranges over an infinite domain yields at best BoundedHolds, and
every Fails carries a base and formula that re-evaluate to Fails.
"""

import itertools
from dataclasses import dataclass
from enum import Enum

from app.logic.atomic import Base, Derivable, derive
from app.logic.engine_base import ProofEngine
from app.logic.errors import InadmissibleBase
from app.logic.hilbert import instantiate_axiom
from app.logic.syntax import (
    And,
    Atom,
    Bot,
    Const,
    ExistsEncoding,
    ExistsI,
    ExistsP,
    ForallI,
    ForallP,
    Imp,
    Or,
    Pred,
    PVar,
    Var,
    expand,
    free_ivars,
    free_pvars,
    subst_ind,
    subst_pred,
)


class Policy(Enum):
    """Basis policy: C admits zero- and first-level rules, I also second-level ones."""

    C = "C"
    I = "I"  # noqa: E741

    def admits(self, rule):
        return rule.level() <= (1 if self is Policy.C else 2)


@dataclass(frozen=True)
class SupportUniverse:
    """Finite enumeration frame for support checks."""

    name: str
    units: tuple = ()
    consts: tuple = ()
    preds: tuple = ()
    budget: int = 1
    policy: Policy = Policy.I
    depth: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(self, "consts", tuple(self.consts))
        object.__setattr__(self, "preds", tuple(self.preds))
        if self.budget < 0:
            raise ValueError("witness budget must be non-negative")

    def with_policy(self, policy):
        return SupportUniverse(self.name, self.units, self.consts, self.preds, self.budget, policy, self.depth)

    def eigen_consts(self):
        return [Const(f"$e{i}") for i in range(1, self.budget + 1)]

    def eigen_preds(self, arity):
        return [Pred(f"$E{i}", arity) for i in range(1, self.budget + 1)]

    def terms(self):
        """Constants the first-order quantifier ranges over."""
        return list(self.consts) + self.eigen_consts()

    def predicates(self, arity):
        """Predicates of ``arity`` the second-order quantifier ranges over."""
        return [p for p in self.preds if p.arity == arity] + self.eigen_preds(arity)

    def atom_pool(self):
        """0-ary atoms that template units range over."""
        pool = {Atom(p) for p in self.predicates(0)}
        for unit in self.units:
            if not unit.is_template:
                pool.update(a for a in unit.atoms() if a.pred.arity == 0)
        return frozenset(pool)

    def ground(self, rules):
        """Concrete rules denoted by ``rules`` (templates expanded over the atom pool)."""
        pool = self.atom_pool()
        out = set()
        for rule in rules:
            out.update(rule.instances(pool))
        return frozenset(out)

    def family(self):
        """Ground rule sets of every admissible set of units, smallest first."""
        admissible = [u for u in self.units if self.policy.admits(u)]
        seen = {}
        for size in range(len(admissible) + 1):
            for chosen in itertools.combinations(admissible, size):
                rules = self.ground(chosen)
                seen.setdefault(rules, chosen)
        return list(seen)


# Verdicts


@dataclass(frozen=True)
class Holds:
    """Supported, with no truncated quantifier involved."""

    def __bool__(self):
        return True


@dataclass(frozen=True)
class BoundedHolds:
    """No counterexample within the frame; bounded evidence only."""

    reason: str = "quantifier truncated to the frame"

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Fails:
    """
    Counterexample: ``formula`` is not supported at ``extension``.

    ``cause`` is the failure one level further in, if any.
    """

    extension: Base
    formula: object
    cause: object = None
    note: str = ""

    def __bool__(self):
        return False

    def chain(self):
        node = self
        while node is not None:
            yield node
            node = node.cause


def _meet(verdicts):
    """Conjunction of verdicts: the first Fails, else the weakest positive one."""
    bounded = None
    for verdict in verdicts:
        if isinstance(verdict, Fails):
            return verdict
        if isinstance(verdict, BoundedHolds) and bounded is None:
            bounded = verdict
    return bounded or Holds()


def _base_key(rules):
    return frozenset(rules)


class SupportEvaluator(ProofEngine):
    """Memoized evaluation of the support clauses within one universe."""

    def __init__(self, universe):
        super().__init__("support", f"{universe.name}/{universe.policy.value}")
        self.universe = universe
        self.family = universe.family()
        self.memo = {}
        self.atoms = {}

    def check_base(self, base):
        """
        Ground rules of ``base``.

        Raises:
            InadmissibleBase: if a rule breaks the policy or is not an instance
                of the universe's units.
        """
        from app.logic.parser import print_rule

        for rule in base.rules:
            if not self.universe.policy.admits(rule):
                raise InadmissibleBase(
                    f"base {base.name} has a level-{rule.level()} rule, "
                    f"inadmissible under policy {self.universe.policy.value}"
                )
        rules = self.universe.ground(base.rules)
        stray = sorted(print_rule(r) for r in rules - self.universe.ground(self.universe.units))
        if stray:
            raise InadmissibleBase(f"base {base.name} is not within universe {self.universe.name}: {stray[0]}")
        return rules

    def extensions(self, rules):
        """Every base ``rules | F`` for F in the admissible family, ``rules`` itself first."""
        seen = {rules: None}
        for extra in self.family:
            seen.setdefault(rules | extra, None)
        return list(seen)

    def as_base(self, rules):
        return Base(f"ext{len(rules)}", rules)

    def derivable(self, rules, atom):
        key = (rules, atom)
        if key not in self.atoms:
            self.atoms[key] = isinstance(derive(Base("frame", rules), (), atom), Derivable)
        return self.atoms[key]

    def run(self, base, phi):
        self.log_start(f"support of {phi} at base {base.name}")
        rules = self.check_base(base)
        verdict = self.evaluate(rules, expand(phi), self.universe.depth)
        self.log_complete(type(verdict).__name__)
        return verdict

    def evaluate(self, rules, phi, depth=None):
        rules = _base_key(rules)
        key = (rules, phi, depth)
        if key not in self.memo:
            self.memo[key] = self._evaluate(rules, phi, depth)
        return self.memo[key]

    def _evaluate(self, rules, phi, depth):
        ivars, pvars = sorted(free_ivars(phi)), sorted(free_pvars(phi))
        if ivars:
            x = ivars[0]
            return self._instances(rules, phi, depth, [(x, t) for t in self.universe.terms()], subst_ind)
        if pvars:
            X = pvars[0]
            return self._instances(
                rules, phi, depth, [(X, p) for p in self.universe.predicates(X.arity)], subst_pred
            )

        if isinstance(phi, Atom):
            if self.derivable(rules, phi):
                return Holds()
            return Fails(self.as_base(rules), phi, note="not derivable")
        if isinstance(phi, ForallI):
            pairs = [(phi.var, t) for t in self.universe.terms()]
            return self._instances(rules, phi.body, depth, pairs, subst_ind)
        if isinstance(phi, ForallP):
            pairs = [(phi.var, p) for p in self.universe.predicates(phi.var.arity)]
            return self._instances(rules, phi.body, depth, pairs, subst_pred)
        if isinstance(phi, Imp):
            return self.consequence(rules, (phi.left,), phi.right, depth)
        raise ValueError(f"cannot evaluate {type(phi).__name__}")

    def _instances(self, rules, body, depth, pairs, subst):
        verdicts = []
        for var, symbol in pairs:
            instance = subst(body, var, symbol)
            verdict = self.evaluate(rules, instance, depth)
            if isinstance(verdict, Fails):
                return Fails(self.as_base(rules), instance, verdict, f"instance {var.name} := {symbol.name}")
            verdicts.append(verdict)
        return _meet(verdicts + [BoundedHolds("instances truncated to the frame")])

    def consequence(self, rules, premises, conclusion, depth=None):
        """The (Inf) clause: every extension supporting ``premises`` supports ``conclusion``."""
        rules = _base_key(rules)
        if conclusion in premises:
            return Holds()
        if depth == 0:
            candidates, reason = [rules], "extension depth exhausted"
        else:
            candidates, reason = self.extensions(rules), "extensions truncated to the frame"
        inner = None if depth is None else depth - 1
        verdicts = [BoundedHolds(reason)]
        for extension in candidates:
            assumed = _meet(self.evaluate(extension, p, inner) for p in premises)
            if isinstance(assumed, Fails):
                continue
            verdict = self.evaluate(extension, conclusion, inner)
            if isinstance(verdict, Fails):
                return Fails(self.as_base(extension), conclusion, verdict, "extension supports the premises")
            verdicts.append(verdict)
        return _meet(verdicts)


def supports(base, phi, universe):
    """
    Evaluate ``|-_base phi`` within ``universe``.

    Free variables are read universally over the frame's constants and
    predicates.

    Returns:
        Holds, BoundedHolds or Fails

    Raises:
        InadmissibleBase: if a rule of ``base`` breaks the universe's policy or
            lies outside its units.
    """
    return SupportEvaluator(universe).run(base, phi)


def supports_consequence(hyps, phi, universe):
    """
    Evaluate ``hyps |= phi`` by quantifying over every admissible base of the frame.

    Returns:
        Holds when ``phi`` is among ``hyps``; otherwise BoundedHolds or a Fails
        whose extension is the offending base.
    """
    engine = SupportEvaluator(universe)
    hyps = tuple(expand(h) for h in hyps)
    phi = expand(phi)
    engine.log_start(f"consequence {len(hyps)} hypothesis(es) |= {phi}")
    if phi in hyps:
        engine.log_complete("reflexive")
        return Holds()
    for rules in engine.family:
        verdict = engine.consequence(rules, hyps, phi, universe.depth) if hyps else engine.evaluate(
            rules, phi, universe.depth
        )
        if isinstance(verdict, Fails):
            engine.log_complete(f"fails at a base of {len(rules)} rule(s)")
            return Fails(engine.as_base(rules), phi, verdict, "base of the frame")
    engine.log_complete("no counterexample in the frame")
    return BoundedHolds("every base of the frame checked; the basis is infinite")


def empty_base_reduction(hyps, phi, universe):
    """True iff consequence over all bases and (Inf) at the empty base agree within ``universe``."""
    engine = SupportEvaluator(universe)
    everywhere = supports_consequence(hyps, phi, universe)
    hyps = tuple(expand(h) for h in hyps)
    at_empty = engine.consequence(frozenset(), hyps, expand(phi), universe.depth)
    return isinstance(everywhere, Fails) == isinstance(at_empty, Fails)


# Derived clauses

CONNECTIVES = ("bot", "and", "or", "ex", "ex2")


def _sugar(connective, args):
    if connective == "bot":
        return Bot()
    if connective == "and":
        return And(*args)
    if connective == "or":
        return Or(*args)
    if connective == "ex":
        return ExistsI(*args)
    return ExistsP(*args)


class DerivedClauses:
    """Direct evaluation of the derived clauses for the abbreviations."""

    def __init__(self, engine):
        self.engine = engine
        self.universe = engine.universe

    def atoms0(self):
        return [Atom(p) for p in self.universe.predicates(0)]

    def holds(self, rules, phi):
        return bool(self.engine.evaluate(rules, expand(phi), self.universe.depth))

    def entails(self, rules, premises, atom):
        """``premises |=_rules atom`` through every extension."""
        for extension in self.engine.extensions(rules):
            if all(self.holds(extension, p) for p in premises) and not self.engine.derivable(extension, atom):
                return False
        return True

    def eliminates(self, rules, condition):
        """For every extension C and 0-ary P: ``condition(C, P)`` implies ``|-_C P``."""
        for extension in self.engine.extensions(rules):
            for atom in self.atoms0():
                if condition(extension, atom) and not self.engine.derivable(extension, atom):
                    return False
        return True

    def evaluate(self, rules, connective, args):
        if connective == "bot":
            return all(self.engine.derivable(rules, atom) for atom in self.atoms0())
        if connective == "and":
            phi, psi = args
            return self.eliminates(rules, lambda c, p: self.entails(c, (phi, psi), p))
        if connective == "or":
            phi, psi = args
            return self.eliminates(
                rules, lambda c, p: self.entails(c, (phi,), p) and self.entails(c, (psi,), p)
            )
        var, body = args
        if connective == "ex":
            instances = [subst_ind(body, var, t) for t in self.universe.terms()]
        else:
            instances = [subst_pred(body, var, q) for q in self.universe.predicates(var.arity)]
        return self.eliminates(rules, lambda c, p: all(self.entails(c, (i,), p) for i in instances))


def derived_clause_check(base, connective, args, universe, exists=ExistsEncoding.CONVENTIONAL):
    """
    Compare support of the expanded abbreviation with its derived clause.

    Args:
        base: Base of the frame
        connective: One of bot, and, or, ex, ex2
        args: () for bot, (phi, psi) for and/or, (var, body) for ex/ex2
        universe: SupportUniverse
        exists: Encoding used to expand the existential quantifiers

    Returns:
        bool: True when both sides agree within the frame.
    """
    if connective not in CONNECTIVES:
        raise ValueError(f"unknown connective {connective}")
    if connective in ("ex", "ex2") and not isinstance(args[0], Var if connective == "ex" else PVar):
        raise ValueError(f"{connective} takes a bound variable and a body")
    engine = SupportEvaluator(universe)
    rules = engine.check_base(base)
    encoded = engine.evaluate(rules, expand(_sugar(connective, args), exists), universe.depth)
    direct = DerivedClauses(engine).evaluate(rules, connective, args)
    agree = bool(encoded) == direct
    if not agree:
        engine.log_warning(f"{connective}: encoding says {type(encoded).__name__}, clause says {direct}")
    return agree


# Spot checks


def axiom_instances(universe, classical=False):
    """Instances of the Hilbert axioms over the frame's slice, as ``(tag, formula)`` pairs."""
    atoms = [Atom(p) for p in universe.preds if p.arity == 0]
    if not atoms:
        return []
    a, b = atoms[0], atoms[min(1, len(atoms) - 1)]
    c = atoms[min(2, len(atoms) - 1)]
    pairs = [
        ("K", instantiate_axiom("K", a, b)),
        ("S", instantiate_axiom("S", a, b, c)),
        ("NegI", instantiate_axiom("NegI", a, b)),
        ("EFQ", instantiate_axiom("EFQ", a, b)),
        ("PiE", instantiate_axiom("PiE", Atom(PVar("?Y", 0)), var=PVar("?Y", 0), term=a.pred)),
    ]
    unary = [p for p in universe.preds if p.arity == 1]
    if unary and universe.consts:
        x = Var("?x")
        pairs.append(("AllE", instantiate_axiom("AllE", Atom(unary[0], (x,)), var=x, term=universe.consts[0])))
    if classical:
        pairs.append(("DNE", instantiate_axiom("DNE", a)))
    return pairs


def spot_check_axioms(universe):
    """
    Bounded soundness spot-check: the empty theory against each axiom instance.

    The DNE instance is checked only under policy C.

    Returns:
        list of ``(tag, formula, verdict)``
    """
    classical = universe.policy is Policy.C
    return [(tag, phi, supports_consequence((), phi, universe)) for tag, phi in axiom_instances(universe, classical)]


def witness_lines(verdict):
    """Text lines describing a verdict and, for Fails, its chain of counterexamples."""
    from app.logic.parser import print_base, print_formula

    if not isinstance(verdict, Fails):
        reason = f" ({verdict.reason})" if isinstance(verdict, BoundedHolds) else ""
        return [f"verdict: {type(verdict).__name__}{reason}"]
    lines = ["verdict: Fails"]
    for depth, node in enumerate(verdict.chain()):
        pad = "  " * depth
        note = f"  [{node.note}]" if node.note else ""
        lines.append(f"{pad}not supported: {print_formula(node.formula)}{note}")
        lines.extend(f"{pad}  {line}" for line in print_base(node.extension).splitlines())
    return lines


def recheck(verdict, universe):
    """True iff every link of a Fails witness re-evaluates to Fails."""
    engine = SupportEvaluator(universe)
    for node in verdict.chain():
        again = engine.evaluate(frozenset(node.extension.rules), expand(node.formula), universe.depth)
        if not isinstance(again, Fails):
            return False
    return True
