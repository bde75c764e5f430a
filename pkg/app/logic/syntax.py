"""
Terms, formulas, free variables, the two substitution operators and the
second-order abbreviations.

Every value here is an immutable dataclass, so formulas hash, compare
syntactically and can be shared freely between engines.
"""

import random
from dataclasses import dataclass
from enum import Enum

from app.logic.errors import ArityMismatch, CaptureError

EIGEN_CONST_PREFIX = "$e"
EIGEN_PRED_PREFIX = "$E"
FLAT_PREFIX = "$F"


class ExistsEncoding(Enum):
    """The two readings of the existential abbreviations."""

    LITERAL = "literal"
    CONVENTIONAL = "conventional"


# Symbols


@dataclass(frozen=True, order=True)
class Const:
    """Individual constant."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Var:
    """Individual variable, written ``?x``."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class Pred:
    """Predicate constant with its arity."""

    name: str
    arity: int = 0

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class PVar:
    """Predicate variable with its arity, written ``?X``."""

    name: str
    arity: int = 0

    def __str__(self):
        return self.name


# Formulas


class Formula:
    """Common base of core and sugared formula nodes."""

    def __str__(self):
        from app.logic.parser import print_formula

        return print_formula(self)


@dataclass(frozen=True)
class Atom(Formula):
    pred: Pred | PVar
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if self.pred.arity < 0:
            raise ArityMismatch(f"{self.pred.name} has negative arity")
        if len(self.args) != self.pred.arity:
            raise ArityMismatch(
                f"{self.pred.name} has arity {self.pred.arity} but got {len(self.args)} argument(s)"
            )


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class ForallI(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class ForallP(Formula):
    var: PVar
    body: Formula


@dataclass(frozen=True)
class Bot(Formula):
    """Falsum; expands to ``ALL ?X:0. ?X``."""


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class ExistsI(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class ExistsP(Formula):
    var: PVar
    body: Formula


SUGAR = (Bot, And, Or, Not, ExistsI, ExistsP)
BINARY = (Imp, And, Or)
IND_BINDERS = (ForallI, ExistsI)
PRED_BINDERS = (ForallP, ExistsP)


class Signature:
    """
    Arity table for predicate constants plus the symbol slice used by generators.

    Arities are declared up front or inferred at first use, and never change
    afterwards.
    """

    def __init__(self, arities=None, constants=(), ivars=(), pvars=()):
        self.arities = dict(arities or {})
        self.constants = tuple(Const(c) if isinstance(c, str) else c for c in constants)
        self.ivars = tuple(Var(v) if isinstance(v, str) else v for v in ivars)
        self.pvars = tuple(pvars)

    def pred(self, name, arity):
        """Return the predicate constant ``name``, freezing its arity on first use."""
        known = self.arities.setdefault(name, arity)
        if known != arity:
            raise ArityMismatch(f"{name} has arity {known} but is used with arity {arity}")
        return Pred(name, arity)

    def predicates(self, arity=None):
        """Declared predicate constants, optionally restricted to one arity."""
        return tuple(
            Pred(name, n)
            for name, n in sorted(self.arities.items())
            if arity is None or n == arity
        )

    def copy(self):
        return Signature(self.arities, self.constants, self.ivars, self.pvars)


DEFAULT_SLICE = Signature(
    {"P": 0, "Q": 0, "R": 1, "S": 2},
    constants=("a", "b"),
    ivars=("?x", "?y"),
    pvars=(PVar("?X", 0), PVar("?Y", 1)),
)


# Free variables and symbol harvesting


def _walk(phi):
    """Yield every node of a formula, outermost first."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, BINARY):
            stack.extend((node.right, node.left))
        elif isinstance(node, (Not,) + IND_BINDERS + PRED_BINDERS):
            stack.append(node.body)


def free_ivars(phi):
    """Individual variables with a free occurrence in ``phi``."""
    if isinstance(phi, Atom):
        return frozenset(t for t in phi.args if isinstance(t, Var))
    if isinstance(phi, BINARY):
        return free_ivars(phi.left) | free_ivars(phi.right)
    if isinstance(phi, Not) or isinstance(phi, PRED_BINDERS):
        return free_ivars(phi.body)
    if isinstance(phi, IND_BINDERS):
        return free_ivars(phi.body) - {phi.var}
    return frozenset()


def free_pvars(phi):
    """Predicate variables with a free occurrence in ``phi``."""
    if isinstance(phi, Atom):
        return frozenset([phi.pred]) if isinstance(phi.pred, PVar) else frozenset()
    if isinstance(phi, BINARY):
        return free_pvars(phi.left) | free_pvars(phi.right)
    if isinstance(phi, Not) or isinstance(phi, IND_BINDERS):
        return free_pvars(phi.body)
    if isinstance(phi, PRED_BINDERS):
        return free_pvars(phi.body) - {phi.var}
    return frozenset()


def free_ivars_of(formulas):
    """Pointwise extension of ``free_ivars`` to a collection of formulas."""
    return frozenset().union(*(free_ivars(f) for f in formulas))


def free_pvars_of(formulas):
    """Pointwise extension of ``free_pvars`` to a collection of formulas."""
    return frozenset().union(*(free_pvars(f) for f in formulas))


def is_closed(phi):
    return not free_ivars(phi) and not free_pvars(phi)


def constants(phi):
    """Individual constants occurring in ``phi``."""
    return frozenset(
        t for node in _walk(phi) if isinstance(node, Atom) for t in node.args if isinstance(t, Const)
    )


def predicates(phi):
    """Predicate constants occurring in ``phi``."""
    return frozenset(
        node.pred for node in _walk(phi) if isinstance(node, Atom) and isinstance(node.pred, Pred)
    )


def symbol_names(phi):
    """Every symbol name occurring in ``phi``, bound or free."""
    names = set()
    for node in _walk(phi):
        if isinstance(node, Atom):
            names.add(node.pred.name)
            names.update(t.name for t in node.args)
        elif isinstance(node, IND_BINDERS + PRED_BINDERS):
            names.add(node.var.name)
    return names


def is_core(phi):
    """True when ``phi`` contains no abbreviation nodes."""
    return not any(isinstance(node, SUGAR) for node in _walk(phi))


def subformulas(phi):
    """All subformulas of ``phi`` (including ``phi``), in walk order, without repeats."""
    seen = {}
    for node in _walk(phi):
        seen.setdefault(node, None)
    return list(seen)


# Substitution


def _rebuild(phi, recurse):
    """Apply ``recurse`` to the immediate subformulas of a non-atomic node."""
    if isinstance(phi, BINARY):
        return type(phi)(recurse(phi.left), recurse(phi.right))
    if isinstance(phi, Not):
        return Not(recurse(phi.body))
    if isinstance(phi, IND_BINDERS + PRED_BINDERS):
        return type(phi)(phi.var, recurse(phi.body))
    return phi


def subst_ind(phi, x, t):
    """
    Replace the free occurrences of individual variable ``x`` by term ``t``.

    Raises:
        CaptureError: if ``t`` is a variable that a binder would capture.
    """
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(t if a == x else a for a in phi.args))
    if isinstance(phi, IND_BINDERS):
        if phi.var == x:
            return phi
        if t == phi.var and x in free_ivars(phi.body):
            raise CaptureError(f"substituting {t} for {x} under the binder of {phi.var}")
        return type(phi)(phi.var, subst_ind(phi.body, x, t))
    return _rebuild(phi, lambda sub: subst_ind(sub, x, t))


def subst_pred(phi, X, P):
    """
    Replace the free occurrences of predicate variable ``X`` by predicate ``P``.

    Raises:
        ArityMismatch: if the arities of ``X`` and ``P`` differ.
        CaptureError: if ``P`` is a predicate variable that a binder would capture.
    """
    if X.arity != P.arity:
        raise ArityMismatch(f"cannot substitute {P.name}/{P.arity} for {X.name}/{X.arity}")
    return _subst_pred(phi, X, P)


def _subst_pred(phi, X, P):
    if isinstance(phi, Atom):
        return Atom(P, phi.args) if phi.pred == X else phi
    if isinstance(phi, PRED_BINDERS):
        if phi.var == X:
            return phi
        if P == phi.var and X in free_pvars(phi.body):
            raise CaptureError(f"substituting {P} for {X} under the binder of {phi.var}")
        return type(phi)(phi.var, _subst_pred(phi.body, X, P))
    return _rebuild(phi, lambda sub: _subst_pred(sub, X, P))


def rename_const(phi, c, x):
    """
    Reverse renaming ``phi[c ↦ x]``: every occurrence of constant ``c`` becomes ``x``.

    Raises:
        CaptureError: if an occurrence of ``c`` sits under a binder for ``x``.
    """
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(x if a == c else a for a in phi.args))
    if isinstance(phi, IND_BINDERS) and phi.var == x and c in constants(phi.body):
        raise CaptureError(f"renaming {c} to {x} under the binder of {x}")
    return _rebuild(phi, lambda sub: rename_const(sub, c, x))


def rename_pred(phi, P, X):
    """
    Reverse renaming ``phi[P ↦ X]`` for predicate constants.

    Raises:
        ArityMismatch: if the arities differ.
        CaptureError: if an occurrence of ``P`` sits under a binder for ``X``.
    """
    if P.arity != X.arity:
        raise ArityMismatch(f"cannot rename {P.name}/{P.arity} to {X.name}/{X.arity}")
    return _rename_pred(phi, P, X)


def _rename_pred(phi, P, X):
    if isinstance(phi, Atom):
        return Atom(X, phi.args) if phi.pred == P else phi
    if isinstance(phi, PRED_BINDERS) and phi.var == X and P in predicates(phi.body):
        raise CaptureError(f"renaming {P} to {X} under the binder of {X}")
    return _rebuild(phi, lambda sub: _rename_pred(sub, P, X))


# Abbreviations


def _bound_pvar(*formulas, avoid=()):
    """A 0-ary predicate variable whose name is free in none of ``formulas``."""
    taken = {v.name for v in free_pvars_of(formulas)} | set(avoid)
    name, n = "?X", 0
    while name in taken:
        n += 1
        name = f"?X{n}"
    return PVar(name, 0)


def bottom():
    """The core formula ``ALL ?X:0. ?X``."""
    X = PVar("?X", 0)
    return ForallP(X, Atom(X))


def expand(phi, exists=ExistsEncoding.LITERAL):
    """
    Replace every abbreviation node by its second-order encoding.

    Idempotent on core formulas. ``exists`` selects the reading of the two
    existential quantifiers.
    """
    if isinstance(phi, Atom):
        return phi
    if isinstance(phi, Bot):
        return bottom()
    if isinstance(phi, Not):
        return Imp(expand(phi.body, exists), bottom())
    if isinstance(phi, (And, Or)):
        left, right = expand(phi.left, exists), expand(phi.right, exists)
        X = _bound_pvar(left, right)
        goal = Atom(X)
        if isinstance(phi, And):
            return ForallP(X, Imp(Imp(left, Imp(right, goal)), goal))
        return ForallP(X, Imp(Imp(left, goal), Imp(Imp(right, goal), goal)))
    if isinstance(phi, ExistsI):
        body = expand(phi.body, exists)
        X = _bound_pvar(body)
        goal = Atom(X)
        if exists is ExistsEncoding.CONVENTIONAL:
            return ForallP(X, Imp(ForallI(phi.var, Imp(body, goal)), goal))
        return ForallP(X, Imp(Imp(ForallI(phi.var, body), goal), goal))
    if isinstance(phi, ExistsP):
        body = expand(phi.body, exists)
        X = _bound_pvar(body, avoid=(phi.var.name,))
        goal = Atom(X)
        if exists is ExistsEncoding.CONVENTIONAL:
            return ForallP(X, Imp(ForallP(phi.var, Imp(body, goal)), goal))
        return ForallP(X, Imp(Imp(ForallP(phi.var, body), goal), goal))
    return _rebuild(phi, lambda sub: expand(sub, exists))


def same_formula(a, b):
    """Syntactic equality after expanding abbreviations."""
    return a == b or expand(a) == expand(b)


def close(phi):
    """Universal closure over the free individual and predicate variables of ``phi``."""
    for x in sorted(free_ivars(phi), reverse=True):
        phi = ForallI(x, phi)
    for X in sorted(free_pvars(phi), reverse=True):
        phi = ForallP(X, phi)
    return phi


# Eigen pools


def is_internal(name):
    """Names in the reserved ``$`` namespace never come from user input."""
    return name.startswith("$")


def _fresh_name(prefix, avoid):
    n = 1
    while f"{prefix}{n}" in avoid:
        n += 1
    return f"{prefix}{n}"


def fresh_eigen_const(avoid=()):
    """An eigen constant whose name is not in ``avoid`` (names or symbols)."""
    taken = {getattr(a, "name", a) for a in avoid}
    return Const(_fresh_name(EIGEN_CONST_PREFIX, taken))


def fresh_eigen_pred(arity=0, avoid=()):
    """An eigen predicate of the given arity whose name is not in ``avoid``."""
    taken = {getattr(a, "name", a) for a in avoid}
    return Pred(_fresh_name(EIGEN_PRED_PREFIX, taken), arity)


# Generation


def _gen_atom(rng, sig, scope_i, scope_p):
    preds = list(sig.predicates()) + list(scope_p)
    pred = rng.choice(preds)
    terms = list(sig.constants) + list(scope_i) + list(sig.ivars)
    return Atom(pred, tuple(rng.choice(terms) for _ in range(pred.arity)))


def _gen(rng, depth, sig, scope_i, scope_p, sugar):
    if depth <= 1:
        return _gen_atom(rng, sig, scope_i, scope_p)
    kinds = ["atom", "imp", "imp", "all", "ALL"]
    if sugar:
        kinds += ["and", "or", "not", "ex", "EX", "bot"]
    kind = rng.choice(kinds)
    if kind == "atom":
        return _gen_atom(rng, sig, scope_i, scope_p)
    if kind == "bot":
        return Bot()
    if kind in ("imp", "and", "or"):
        left = _gen(rng, depth - 1, sig, scope_i, scope_p, sugar)
        right = _gen(rng, depth - 1, sig, scope_i, scope_p, sugar)
        return {"imp": Imp, "and": And, "or": Or}[kind](left, right)
    if kind == "not":
        return Not(_gen(rng, depth - 1, sig, scope_i, scope_p, sugar))
    if kind in ("all", "ex") and sig.ivars:
        x = rng.choice(sig.ivars)
        body = _gen(rng, depth - 1, sig, scope_i | {x}, scope_p, sugar)
        return (ForallI if kind == "all" else ExistsI)(x, body)
    if kind in ("ALL", "EX") and sig.pvars:
        X = rng.choice(sig.pvars)
        body = _gen(rng, depth - 1, sig, scope_i, scope_p | {X}, sugar)
        return (ForallP if kind == "ALL" else ExistsP)(X, body)
    return _gen_atom(rng, sig, scope_i, scope_p)


def gen_formula(seed, depth, slice=None, sugar=False):
    """
    Deterministic pseudo-random well-formed formula over ``slice``.

    Args:
        seed: Random seed; equal seeds give equal formulas.
        depth: Maximum nesting depth (>= 1); depth 1 always yields an atom.
        slice: Signature supplying predicates, constants and variables.
        sugar: Also draw abbreviation nodes.

    Returns:
        Formula
    """
    if depth < 1:
        raise ValueError("depth bound must be at least 1")
    sig = slice or DEFAULT_SLICE
    # Scopes are tuples so rng.choice sees a stable order.
    rng = random.Random(seed)
    return _gen(rng, depth, sig, _Scope(), _Scope(), sugar)


class _Scope(tuple):
    """Ordered, duplicate-free scope of bound symbols."""

    def __or__(self, other):
        return _Scope(tuple(self) + tuple(s for s in other if s not in self))
