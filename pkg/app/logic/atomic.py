"""
Atomic systems and derivability between closed atoms.

A base is a finite set of atomic rules. Rules whose atoms mention 0-ary
predicate variables are templates (``B => ?C``); they stand for every
instance over the 0-ary atoms relevant to a query.
"""

import itertools
import random
from dataclasses import dataclass, field

from app.logic.engine_base import ProofEngine
from app.logic.errors import OpenAtomError
from app.logic.syntax import Atom, Const, Pred, PVar


@dataclass(frozen=True)
class Premise:
    """One premise ``[hyps] => goal`` of an atomic rule."""

    hyps: frozenset
    goal: Atom

    def __post_init__(self):
        object.__setattr__(self, "hyps", frozenset(self.hyps))


@dataclass(frozen=True)
class AtomicRule:
    """
    Rule ``{[H1] => P1, ..., [Hn] => Pn} => P`` over closed atoms.

    Atoms may use 0-ary predicate variables, which makes the rule a template.
    """

    conclusion: Atom
    premises: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        for atom in self.atoms():
            _check_rule_atom(atom)

    def atoms(self):
        yield self.conclusion
        for premise in self.premises:
            yield from premise.hyps
            yield premise.goal

    def level(self):
        if not self.premises:
            return 0
        if all(not p.hyps for p in self.premises):
            return 1
        return 2

    @property
    def pvars(self):
        return sorted({a.pred for a in self.atoms() if isinstance(a.pred, PVar)})

    @property
    def is_template(self):
        return bool(self.pvars)

    def instantiate(self, mapping):
        """Replace template variables by the atoms in ``mapping``."""

        def sub(atom):
            return mapping.get(atom.pred, atom) if isinstance(atom.pred, PVar) else atom

        premises = tuple(Premise(frozenset(sub(h) for h in p.hyps), sub(p.goal)) for p in self.premises)
        return AtomicRule(sub(self.conclusion), premises)

    def instances(self, pool):
        """Every instance of this template over the 0-ary atoms in ``pool``."""
        variables = self.pvars
        if not variables:
            return [self]
        ordered = sorted(pool, key=_atom_key)
        return [
            self.instantiate(dict(zip(variables, choice)))
            for choice in itertools.product(ordered, repeat=len(variables))
        ]


def level(rule):
    """0 for axioms, 1 for rules without discharge, 2 otherwise."""
    return rule.level()


def _check_rule_atom(atom):
    if isinstance(atom.pred, PVar) and atom.pred.arity != 0:
        raise OpenAtomError(f"rule template variable {atom.pred.name} must be 0-ary")
    if any(not isinstance(t, Const) for t in atom.args):
        raise OpenAtomError(f"rule atom {atom.pred.name} has a free individual variable")


def _check_closed(atom):
    if not isinstance(atom, Atom) or not isinstance(atom.pred, Pred):
        raise OpenAtomError(f"{atom} is not a closed atom")
    if any(not isinstance(t, Const) for t in atom.args):
        raise OpenAtomError(f"{atom} is not a closed atom")


def _atom_key(atom):
    return (atom.pred.name, atom.pred.arity, tuple(t.name for t in atom.args))


@dataclass(frozen=True)
class Base:
    """Named finite set of atomic rules plus an optional template slice."""

    name: str
    rules: frozenset = field(default_factory=frozenset)
    slice: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "rules", frozenset(self.rules))
        object.__setattr__(self, "slice", frozenset(self.slice))

    @property
    def concrete(self):
        return frozenset(r for r in self.rules if not r.is_template)

    @property
    def templates(self):
        return frozenset(r for r in self.rules if r.is_template)

    def union(self, rules, name=None):
        return Base(name or self.name, self.rules | frozenset(rules), self.slice)

    def template_pool(self, hyps=(), goal=None):
        """0-ary atoms templates range over for a query."""
        if self.slice:
            return frozenset(a for a in self.slice if a.pred.arity == 0)
        pool = {a for r in self.concrete for a in r.atoms() if a.pred.arity == 0}
        pool.update(a for a in hyps if a.pred.arity == 0)
        if goal is not None and goal.pred.arity == 0:
            pool.add(goal)
        return frozenset(pool)

    def ground_rules(self, hyps=(), goal=None):
        """Concrete rules plus every template instance over the query's pool."""
        pool = self.template_pool(hyps, goal)
        rules = set(self.concrete)
        for template in self.templates:
            rules.update(template.instances(pool))
        return sorted(rules, key=_rule_key)


def _rule_key(rule):
    premises = tuple(
        (tuple(sorted(_atom_key(h) for h in p.hyps)), _atom_key(p.goal)) for p in rule.premises
    )
    return (_atom_key(rule.conclusion), premises)


# Traces and verdicts


@dataclass(frozen=True)
class DerivationTrace:
    """Sequent ``hyps |- goal`` justified by Ref (``rule`` is None) or App."""

    hyps: frozenset
    goal: Atom
    rule: AtomicRule | None = None
    children: tuple = ()

    def size(self):
        return 1 + sum(child.size() for child in self.children)


@dataclass(frozen=True)
class Derivable:
    trace: DerivationTrace


@dataclass(frozen=True)
class NotDerivable:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str = "search budget exhausted"


@dataclass(frozen=True)
class Saturate:
    """Complete least-fixpoint decision procedure."""


@dataclass(frozen=True)
class TopDown:
    """Goal-directed search; ``depth`` None means unbounded with loop detection."""

    depth: int | None = None


def atom_slice(base, hyps, goal):
    """
    Smallest atom set containing ``hyps`` and ``goal`` that is closed under
    the rules touching it.
    """
    hyps = frozenset(hyps)
    rules = [(r, frozenset(r.atoms())) for r in base.ground_rules(hyps, goal)]
    closure = set(hyps) | {goal}
    changed = True
    while changed:
        changed = False
        for _, atoms in rules:
            if atoms & closure and not atoms <= closure:
                closure |= atoms
                changed = True
    return frozenset(closure)


class SaturationEngine(ProofEngine):
    """Decides ``hyps |- goal`` by saturating sequents over reachable contexts."""

    def __init__(self, base):
        super().__init__("saturate", base.name)
        self.base = base

    def _contexts(self, start, rules):
        contexts = {start}
        frontier = [start]
        while frontier:
            context = frontier.pop()
            for rule in rules:
                for premise in rule.premises:
                    extended = context | premise.hyps
                    if extended not in contexts:
                        contexts.add(extended)
                        frontier.append(extended)
        return contexts

    def run(self, hyps, goal):
        hyps = frozenset(hyps)
        scope = atom_slice(self.base, hyps, goal)
        rules = [r for r in self.base.ground_rules(hyps, goal) if set(r.atoms()) <= scope]
        contexts = self._contexts(hyps, rules)
        self.log_step(f"{len(rules)} rule(s), {len(contexts)} context(s), {len(scope)} atom(s)")

        established = {}
        for context in contexts:
            for atom in sorted(context, key=_atom_key):
                established[(context, atom)] = DerivationTrace(context, atom)
        changed = True
        while changed:
            changed = False
            for context in sorted(contexts, key=lambda c: (len(c), sorted(map(_atom_key, c)))):
                for rule in rules:
                    key = (context, rule.conclusion)
                    if key in established:
                        continue
                    children = []
                    for premise in rule.premises:
                        child = established.get((context | premise.hyps, premise.goal))
                        if child is None:
                            break
                        children.append(child)
                    else:
                        established[key] = DerivationTrace(context, rule.conclusion, rule, tuple(children))
                        changed = True

        trace = established.get((hyps, goal))
        return Derivable(trace) if trace else NotDerivable()


class TopDownEngine(ProofEngine):
    """Backward search from the goal, returning a trace or Unknown."""

    def __init__(self, base, depth=None):
        super().__init__("topdown", base.name)
        self.base = base
        self.depth = depth

    def run(self, hyps, goal):
        hyps = frozenset(hyps)
        self.rules = self.base.ground_rules(hyps, goal)
        self.succeeded = {}
        self.failed = set()
        trace, _ = self._prove(hyps, goal, self.depth, frozenset())
        if trace is None:
            return Unknown(f"no derivation found (depth {self.depth})")
        return Derivable(trace)

    def _prove(self, context, goal, depth, visiting):
        """Return ``(trace or None, whether a cut-off influenced the answer)``."""
        key = (context, goal)
        if goal in context:
            return DerivationTrace(context, goal), False
        if key in self.succeeded:
            return self.succeeded[key], False
        if key in self.failed:
            return None, False
        if key in visiting or depth == 0:
            return None, True
        cut = False
        for rule in self.rules:
            if rule.conclusion != goal:
                continue
            children = []
            for premise in rule.premises:
                child, child_cut = self._prove(
                    context | premise.hyps,
                    premise.goal,
                    None if depth is None else depth - 1,
                    visiting | {key},
                )
                cut = cut or child_cut
                if child is None:
                    break
                children.append(child)
            else:
                trace = DerivationTrace(context, goal, rule, tuple(children))
                self.succeeded[key] = trace
                return trace, False
        if not cut:
            self.failed.add(key)
        return None, cut


def derive(base, hyps, goal, mode=Saturate()):
    """
    Decide or search for ``hyps |- goal`` in ``base``.

    Args:
        base: The atomic system
        hyps: Iterable of closed atoms
        goal: Closed atom
        mode: Saturate() (complete) or TopDown(depth)

    Returns:
        Derivable, NotDerivable (Saturate only) or Unknown (TopDown only)

    Raises:
        OpenAtomError: if a hypothesis or the goal is not a closed atom.
    """
    hyps = frozenset(hyps)
    for atom in (*hyps, goal):
        _check_closed(atom)
    if isinstance(mode, TopDown):
        return TopDownEngine(base, mode.depth).run(hyps, goal)
    return SaturationEngine(base).run(hyps, goal)


def _admits(base, rule):
    if rule in base.concrete:
        return True
    pool = frozenset(a for a in rule.atoms() if a.pred.arity == 0)
    return any(rule in template.instances(pool) for template in base.templates)


def check_trace(base, trace):
    """True iff every node of ``trace`` is a correct Ref or App step in ``base``."""
    if trace.rule is None:
        return trace.goal in trace.hyps and not trace.children
    rule = trace.rule
    if rule.is_template or not _admits(base, rule) or rule.conclusion != trace.goal:
        return False
    if len(trace.children) != len(rule.premises):
        return False
    for premise, child in zip(rule.premises, trace.children):
        if child.hyps != trace.hyps | premise.hyps or child.goal != premise.goal:
            return False
        if not check_trace(base, child):
            return False
    return True


def trace_lines(trace, indent=0):
    """Indented export, one sequent per line with its justification tag."""
    from app.logic.parser import print_atom, print_rule

    hyps = ", ".join(sorted(print_atom(a) for a in trace.hyps))
    head = f"{'  ' * indent}{hyps + ' ' if hyps else ''}|- {print_atom(trace.goal)}"
    tag = "(ref)" if trace.rule is None else f"(app: {print_rule(trace.rule)})"
    lines = [f"{head}   {tag}"]
    for child in trace.children:
        lines.extend(trace_lines(child, indent + 1))
    return lines


def gen_base(seed, atoms=6, rules=8, max_level=2, name="random"):
    """
    Deterministic random base over 0-ary atoms ``A0 .. A{atoms-1}``.

    Returns:
        tuple: (Base, list of its atoms)
    """
    rng = random.Random(seed)
    pool = [Atom(Pred(f"A{i}", 0)) for i in range(atoms)]
    generated = set()
    for _ in range(rules):
        arity = rng.randint(0, 3)
        premises = []
        for _ in range(arity):
            hyps = rng.sample(pool, rng.randint(0, 2)) if max_level >= 2 else []
            premises.append(Premise(frozenset(hyps), rng.choice(pool)))
        if max_level == 0:
            premises = []
        generated.add(AtomicRule(rng.choice(pool), tuple(premises)))
    return Base(name, frozenset(generated)), pool
