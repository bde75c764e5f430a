"""
Hilbert calculi HI and HC.

HI has the axiom schemas K, S, AllE, PiE, NegI and EFQ; HC adds DNE. Both
close under modus ponens and the two generalization rules. Formulas are
compared after expanding abbreviations, so ``~A`` and ``A -> bot`` are the
same step formula.
"""

import itertools
import random
from dataclasses import dataclass

from app.logic.engine_base import ProofEngine
from app.logic.errors import (
    ArityMismatch,
    CaptureError,
    FreshnessError,
    InvariantViolation,
    TransformError,
)
from app.logic.syntax import (
    DEFAULT_SLICE,
    Atom,
    Const,
    ForallI,
    ForallP,
    Formula,
    Imp,
    PVar,
    Var,
    bottom,
    close,
    constants,
    expand,
    free_ivars,
    free_ivars_of,
    free_pvars,
    free_pvars_of,
    gen_formula,
    predicates,
    rename_const,
    rename_pred,
    subformulas,
    subst_ind,
    subst_pred,
)

SYSTEMS = ("HI", "HC")
AXIOM_TAGS = ("K", "S", "AllE", "PiE", "NegI", "EFQ", "DNE")

# Slots each propositional schema takes; AllE and PiE also take var and term.
_SLOTS = {
    "K": ("phi", "psi"),
    "S": ("phi", "psi", "chi"),
    "NegI": ("phi", "psi"),
    "EFQ": ("phi", "psi"),
    "DNE": ("phi",),
}
SLOT_NAMES = dict(_SLOTS, AllE=("phi", "var", "term"), PiE=("phi", "var", "term"))


def neg(phi):
    """``phi -> bot`` with falsum expanded."""
    return Imp(phi, bottom())


def top():
    """The closed theorem ``bot -> bot`` used to carry generalizations."""
    return Imp(bottom(), bottom())


# Proof objects


@dataclass(frozen=True)
class Axiom:
    """Axiom step; ``slots`` optionally pins the instance as ``(name, value)`` pairs."""

    tag: str
    slots: tuple = ()

    def instance(self):
        return instantiate_axiom(self.tag, **dict(self.slots))


@dataclass(frozen=True)
class Hyp:
    pass


@dataclass(frozen=True)
class MP:
    """Modus ponens: step ``major`` proves ``A -> B`` and step ``minor`` proves ``A``."""

    major: int
    minor: int


@dataclass(frozen=True)
class Gen1:
    premise: int
    var: Var


@dataclass(frozen=True)
class Gen2:
    premise: int
    var: PVar


@dataclass(frozen=True)
class Step:
    formula: Formula
    justification: object


@dataclass(frozen=True)
class HilbertProof:
    """Numbered steps (1-based citations) proving ``conclusion`` from ``hyps``."""

    system: str
    hyps: tuple
    steps: tuple
    conclusion: Formula

    def __post_init__(self):
        object.__setattr__(self, "hyps", tuple(self.hyps))
        object.__setattr__(self, "steps", tuple(self.steps))

    def __str__(self):
        from app.logic.parser import print_hilbert_proof

        return print_hilbert_proof(self)


def _as_imp(phi):
    if isinstance(phi, Imp):
        return phi
    phi = expand(phi)
    return phi if isinstance(phi, Imp) else None


def derived_formula(just, formulas):
    """
    Formula an MP, generalization or slotted axiom step proves.

    Returns None for hypotheses, axioms without slots, slots that do not
    instantiate, or when the cited step is not an implication.
    """
    if isinstance(just, Axiom):
        if not just.slots:
            return None
        try:
            return just.instance()
        except (ArityMismatch, CaptureError, ValueError):
            return None
    if isinstance(just, MP):
        major = _as_imp(formulas[just.major - 1])
        return major.right if major else None
    if isinstance(just, (Gen1, Gen2)):
        premise = _as_imp(formulas[just.premise - 1])
        if premise is None:
            return None
        binder = ForallI if isinstance(just, Gen1) else ForallP
        return Imp(premise.left, binder(just.var, premise.right))
    return None


# Axioms


def instantiate_axiom(tag, phi, psi=None, chi=None, var=None, term=None):
    """
    Instance of an axiom schema.

    Args:
        tag: One of K, S, AllE, PiE, NegI, EFQ, DNE
        phi, psi, chi: Formula slots used by the schema
        var: Bound variable for AllE (Var) or PiE (PVar)
        term: Instantiating term for AllE, predicate for PiE

    Returns:
        Formula: ``AllE`` gives ``all x. phi -> phi[x := t]`` and ``PiE`` gives
        ``ALL X. phi -> phi[X := P]``.

    Raises:
        ArityMismatch: if the PiE predicate has the wrong arity.
        CaptureError: if the AllE term would be captured.
    """
    if tag == "K":
        return Imp(phi, Imp(psi, phi))
    if tag == "S":
        return Imp(Imp(phi, Imp(psi, chi)), Imp(Imp(phi, psi), Imp(phi, chi)))
    if tag == "AllE":
        return Imp(ForallI(var, phi), subst_ind(phi, var, term))
    if tag == "PiE":
        return Imp(ForallP(var, phi), subst_pred(phi, var, term))
    if tag == "NegI":
        return Imp(Imp(phi, psi), Imp(Imp(phi, neg(psi)), neg(phi)))
    if tag == "EFQ":
        return Imp(neg(phi), Imp(phi, psi))
    if tag == "DNE":
        return Imp(neg(neg(phi)), phi)
    raise ValueError(f"unknown axiom schema {tag}")


def _atoms(phi):
    return [node for node in subformulas(phi) if isinstance(node, Atom)]


def _candidates(tag, f):
    """Slot guesses read off the shape of ``f``; each is verified by instantiation."""
    if not isinstance(f, Imp):
        return []
    left, right = f.left, f.right
    if tag == "K" and isinstance(right, Imp):
        return [dict(phi=left, psi=right.left)]
    if tag == "S" and isinstance(left, Imp) and isinstance(left.right, Imp):
        return [dict(phi=left.left, psi=left.right.left, chi=left.right.right)]
    if tag == "NegI" and isinstance(left, Imp):
        return [dict(phi=left.left, psi=left.right)]
    if tag == "EFQ" and isinstance(left, Imp) and isinstance(right, Imp):
        return [dict(phi=left.left, psi=right.right)]
    if tag == "DNE":
        return [dict(phi=right)]
    if tag == "AllE" and isinstance(left, ForallI):
        terms = {t for atom in _atoms(right) for t in atom.args}
        ordered = [left.var] + sorted(terms - {left.var}, key=lambda t: (type(t).__name__, t.name))
        return [dict(phi=left.body, var=left.var, term=t) for t in ordered]
    if tag == "PiE" and isinstance(left, ForallP):
        X = left.var
        preds = {a.pred for a in _atoms(right) if a.pred.arity == X.arity}
        ordered = [X] + sorted(preds - {X}, key=lambda p: (type(p).__name__, p.name))
        return [dict(phi=left.body, var=X, term=p) for p in ordered]
    return []


def match_axiom(tag, formula):
    """Slots making ``formula`` an instance of schema ``tag``, or None."""
    f = expand(formula)
    for slots in _candidates(tag, f):
        try:
            if instantiate_axiom(tag, **slots) == f:
                return slots
        except (ArityMismatch, CaptureError):
            continue
    return None


# Checking


@dataclass(frozen=True)
class Issue:
    """One problem found by a checker, located by step number or node path."""

    where: str
    message: str

    def __str__(self):
        return f"{self.where}: {self.message}"


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    issues: tuple = ()
    lines: tuple = ()

    def __bool__(self):
        return self.ok

    def text(self):
        return "\n".join(self.lines)


def describe(just):
    if isinstance(just, Axiom):
        return f"axiom {just.tag}"
    if isinstance(just, Hyp):
        return "hyp"
    if isinstance(just, MP):
        return f"mp {just.major} {just.minor}"
    if isinstance(just, Gen1):
        return f"gen1 {just.premise} {just.var.name}"
    return f"gen2 {just.premise} {just.var.name}:{just.var.arity}"


class HilbertChecker(ProofEngine):
    """Checks every step of a Hilbert proof and reports per step."""

    def __init__(self, system):
        if system not in SYSTEMS:
            raise ValueError(f"unknown Hilbert system {system}")
        super().__init__("check", system)

    def run(self, proof):
        from app.logic.parser import print_formula

        self.log_start(f"checking {len(proof.steps)} step(s)")
        hyps = {expand(h) for h in proof.hyps}
        formulas, issues, lines = [], [], []
        for number, step in enumerate(proof.steps, start=1):
            f = expand(step.formula)
            problem = self._check_step(number, step.justification, f, formulas, hyps)
            formulas.append(f)
            line = f"{number}. {describe(step.justification)}  {print_formula(step.formula)}"
            if problem:
                issues.append(Issue(f"step {number}", problem))
                lines.append(f"{line}  FAIL: {problem}")
            else:
                lines.append(f"{line}  ok")

        if not proof.steps:
            issues.append(Issue("proof", "no steps"))
        elif formulas[-1] != expand(proof.conclusion):
            issues.append(Issue("conclusion", "last step differs from the declared conclusion"))
            lines.append("conclusion: FAIL: last step differs from the declared conclusion")

        if issues:
            self.log_warning(f"{len(issues)} issue(s)")
            lines.append(f"verdict: {len(issues)} issue(s)")
        else:
            self.log_complete("proof checks")
            lines.append("verdict: ok")
        return CheckReport(not issues, tuple(issues), tuple(lines))

    def _check_step(self, number, just, f, formulas, hyps):
        """Return the problem with one step, or None."""
        for cited in _cited(just):
            if not 1 <= cited < number:
                return f"cites step {cited}, which is not an earlier step"

        if isinstance(just, Axiom):
            if just.tag not in AXIOM_TAGS:
                return f"unknown axiom schema {just.tag}"
            if just.tag == "DNE" and self.system == "HI":
                return "DNE not in HI"
            if just.slots:
                return self._check_slots(just, f)
            if match_axiom(just.tag, f) is None:
                return f"not an instance of {just.tag}"
            return None

        if isinstance(just, Hyp):
            return None if f in hyps else "not among the hypotheses"

        if isinstance(just, MP):
            if formulas[just.major - 1] != Imp(formulas[just.minor - 1], f):
                return f"bad MP: step {just.major} is not step {just.minor} -> this formula"
            return None

        premise = formulas[just.premise - 1]
        if not isinstance(premise, Imp):
            return f"step {just.premise} is not an implication"
        gen1 = isinstance(just, Gen1)
        binder, free, free_of = (
            (ForallI, free_ivars, free_ivars_of) if gen1 else (ForallP, free_pvars, free_pvars_of)
        )
        if f != Imp(premise.left, binder(just.var, premise.right)):
            return f"not the generalization of step {just.premise} over {just.var.name}"
        if just.var in free(premise.left):
            return f"eigenvariable violation: {just.var.name} is free in the antecedent"
        # every declared hypothesis counts, used or not
        if just.var in free_of(hyps):
            return f"eigenvariable violation: {just.var.name} is free in a hypothesis"
        return None

    @staticmethod
    def _check_slots(just, f):
        expected = SLOT_NAMES[just.tag]
        if sorted(name for name, _ in just.slots) != sorted(expected):
            return f"{just.tag} takes the slots {', '.join(expected)}"
        try:
            instance = expand(just.instance())
        except (ArityMismatch, CaptureError) as exc:
            return str(exc)
        if instance != f:
            return f"not the {just.tag} instance its slots give"
        return None


def _cited(just):
    if isinstance(just, MP):
        return (just.major, just.minor)
    if isinstance(just, (Gen1, Gen2)):
        return (just.premise,)
    return ()


def check_hilbert(system, proof):
    """Check ``proof`` in ``system`` (HI or HC); returns a CheckReport."""
    return HilbertChecker(system).run(proof)


# Building proofs


class ProofBuilder:
    """Accumulates core steps; axiom and hypothesis steps are shared by formula."""

    def __init__(self):
        self.steps = []
        self.shared = {}

    def formula(self, n):
        return self.steps[n - 1].formula

    def add(self, formula, just):
        self.steps.append(Step(formula, just))
        return len(self.steps)

    def _shared(self, formula, just):
        if formula not in self.shared:
            self.shared[formula] = self.add(formula, just)
        return self.shared[formula]

    def axiom(self, tag, **slots):
        return self._shared(instantiate_axiom(tag, **slots), Axiom(tag))

    def axiom_formula(self, formula, tag):
        return self._shared(formula, Axiom(tag))

    def hyp(self, formula):
        return self._shared(formula, Hyp())

    def mp(self, major, minor):
        imp = self.formula(major)
        if not isinstance(imp, Imp) or imp.left != self.formula(minor):
            raise InvariantViolation(f"MP {major} {minor} does not apply")
        return self.add(imp.right, MP(major, minor))

    def gen(self, premise, var):
        imp = self.formula(premise)
        if isinstance(var, Var):
            return self.add(Imp(imp.left, ForallI(var, imp.right)), Gen1(premise, var))
        return self.add(Imp(imp.left, ForallP(var, imp.right)), Gen2(premise, var))

    def identity(self, phi):
        """Five steps proving ``phi -> phi``."""
        k1 = self.axiom("K", phi=phi, psi=Imp(phi, phi))
        s = self.axiom("S", phi=phi, psi=Imp(phi, phi), chi=phi)
        m = self.mp(s, k1)
        k2 = self.axiom("K", phi=phi, psi=phi)
        return self.mp(m, k2)

    def weaken(self, n, phi):
        """From step ``n`` proving ``theta``, a step proving ``phi -> theta``."""
        k = self.axiom("K", phi=self.formula(n), psi=phi)
        return self.mp(k, n)

    def splice(self, proof):
        """Copy another proof's steps; returns the index of its last step."""
        index = {}
        for number, step in enumerate(proof.steps, start=1):
            f, just = expand(step.formula), step.justification
            if isinstance(just, Axiom):
                index[number] = self.axiom_formula(f, just.tag)
            elif isinstance(just, Hyp):
                index[number] = self.hyp(f)
            elif isinstance(just, MP):
                index[number] = self.mp(index[just.major], index[just.minor])
            else:
                index[number] = self.gen(index[just.premise], just.var)
        return index[len(proof.steps)]

    def build(self, system, hyps, conclusion, final):
        """Proof ending at step ``final`` (re-stated last if shared earlier)."""
        steps = list(self.steps)
        if final != len(steps):
            steps.append(steps[final - 1])
        return HilbertProof(system, tuple(hyps), tuple(steps), conclusion)


def identity_proof(phi, system="HI"):
    """The five-step proof of ``phi -> phi``."""
    out = ProofBuilder()
    core = expand(phi)
    final = out.identity(core)
    return out.build(system, (), Imp(phi, phi), final)


# Transformations


class DeductionIntro(ProofEngine):
    """Turns a proof of psi from {phi} + rest into a proof of phi -> psi from rest."""

    def __init__(self, system):
        super().__init__("deduction", system)

    def run(self, proof, phi, rest):
        target = expand(phi)
        self.log_start(f"discharging {phi} over {len(proof.steps)} step(s)")
        out = ProofBuilder()
        formulas = [expand(s.formula) for s in proof.steps]
        remaining = {expand(h) for h in rest}
        plain, lifted, depends, seen = {}, {}, [], {}

        def lift(k):
            if k not in lifted:
                lifted[k] = out.weaken(plain[k], target)
            return lifted[k]

        def available(a):
            """Step proving ``target -> a`` when ``a`` is at hand, else None."""
            if a == target:
                return out.identity(target)
            if a in seen:
                return lift(seen[a])
            if a in remaining:
                return out.weaken(out.hyp(a), target)
            tag = self._axiom_tag(a)
            if tag is not None:
                return out.weaken(out.axiom_formula(a, tag), target)
            if isinstance(a, Imp) and a.left == a.right:
                return out.weaken(out.identity(a.left), target)
            return None

        for k, step in enumerate(proof.steps, start=1):
            f, just = formulas[k - 1], step.justification
            if isinstance(just, Hyp) and f == target:
                dependent = True
                lifted[k] = out.identity(target)
            elif isinstance(just, Axiom):
                dependent = False
                plain[k] = out.axiom_formula(f, just.tag)
            elif isinstance(just, Hyp):
                dependent = False
                plain[k] = out.hyp(f)
            elif isinstance(just, MP):
                i, j = just.major, just.minor
                dependent = depends[i - 1] or depends[j - 1]
                if dependent:
                    s = out.axiom("S", phi=target, psi=formulas[j - 1], chi=f)
                    lifted[k] = out.mp(out.mp(s, lift(i)), lift(j))
                else:
                    plain[k] = out.mp(plain[i], plain[j])
            else:
                i = just.premise
                dependent = depends[i - 1]
                if dependent:
                    lifted[k] = self._commute(out, target, formulas[i - 1], just.var, lift(i), available)
                else:
                    plain[k] = out.gen(plain[i], just.var)
            depends.append(dependent)
            seen.setdefault(f, k)

        final = lift(len(proof.steps))
        result = out.build(proof.system, rest, Imp(phi, proof.conclusion), final)
        self.log_complete(f"{len(proof.steps)} step(s) became {len(result.steps)}")
        return result

    def _axiom_tag(self, formula):
        for tag in AXIOM_TAGS:
            if tag == "DNE" and self.system == "HI":
                continue
            if match_axiom(tag, formula) is not None:
                return tag
        return None

    def _commute(self, out, target, premise, var, lifted, available):
        """
        From ``target -> (A -> B)`` derive ``target -> (A -> ALL v. B)``.

        When v is not free in B, ``B -> ALL v. B`` is composed under both
        antecedents. Otherwise A must be at hand (see ``available``): the
        antecedent is cut, the generalization made under ``target`` alone,
        and A put back by K. Anything else needs the quantifier shift, which
        is not a theorem here.
        """
        individual = isinstance(var, Var)
        free, binder = (free_ivars, ForallI) if individual else (free_pvars, ForallP)
        a, b = premise.left, premise.right
        if var in free(target):
            raise TransformError(f"{var.name} is free in the discharged hypothesis")

        if var not in free(b):
            closure = out.gen(out.identity(b), var)
            s = out.axiom("S", phi=a, psi=b, chi=binder(var, b))
            shift = out.mp(s, out.weaken(closure, a))
            s = out.axiom("S", phi=target, psi=premise, chi=Imp(a, binder(var, b)))
            return out.mp(out.mp(s, out.weaken(shift, target)), lifted)

        antecedent = available(a)
        if antecedent is None:
            raise TransformError(
                f"generalization over {var.name} under antecedent {a} cannot commute with the discharge"
            )
        s = out.axiom("S", phi=target, psi=a, chi=b)
        collapsed = out.mp(out.mp(s, lifted), antecedent)
        return self._lift_consequent(out, target, out.gen(collapsed, var), a)

    @staticmethod
    def _lift_consequent(out, target, n, a):
        """From step ``n`` proving ``target -> C``, prove ``target -> (a -> C)``."""
        c = out.formula(n).right
        k = out.weaken(out.axiom("K", phi=c, psi=a), target)
        s = out.axiom("S", phi=target, psi=c, chi=Imp(a, c))
        return out.mp(out.mp(s, k), n)


def deduction_intro(proof, phi=None):
    """
    Discharge hypothesis ``phi`` (default: the first hypothesis).

    Raises:
        TransformError: if a generalization depending on ``phi`` binds a
            variable free in its consequent, under an antecedent that is
            neither ``phi`` nor otherwise at hand in the proof.
    """
    if phi is None:
        if not proof.hyps:
            raise TransformError("proof has no hypothesis to discharge")
        phi = proof.hyps[0]
    target = expand(phi)
    rest = tuple(h for h in proof.hyps if expand(h) != target)
    return DeductionIntro(proof.system).run(proof, phi, rest)


def deduction_elim(proof):
    """
    Proof of psi from {phi} + hyps out of a proof of ``phi -> psi``.

    Raises:
        TransformError: if the conclusion is not an implication, or if a
            generalization step binds a variable free in a new ``phi``.
    """
    imp = _as_imp(proof.conclusion)
    if imp is None:
        raise TransformError("conclusion is not an implication")
    phi, psi = imp.left, imp.right
    if isinstance(proof.conclusion, Imp):
        phi, psi = proof.conclusion.left, proof.conclusion.right
    n = len(proof.steps)
    steps = proof.steps + (Step(phi, Hyp()), Step(psi, MP(n, n + 1)))
    if expand(phi) in {expand(h) for h in proof.hyps}:
        return HilbertProof(proof.system, proof.hyps, steps, psi)
    blocked = free_ivars(expand(phi)) | free_pvars(expand(phi))
    for number, step in enumerate(proof.steps, start=1):
        just = step.justification
        if isinstance(just, (Gen1, Gen2)) and just.var in blocked:
            raise TransformError(f"step {number} generalizes over {just.var.name}, which is free in {phi}")
    return HilbertProof(proof.system, (phi,) + proof.hyps, steps, psi)


def _unslotted(just):
    return Axiom(just.tag) if isinstance(just, Axiom) else just


def rename_eigen(proof, old, new):
    """
    Replace eigen symbol ``old`` by variable ``new`` in every step.

    Args:
        proof: A checking Hilbert proof
        old: Eigen constant (Const) or eigen predicate (Pred)
        new: Individual variable (Var) or predicate variable (PVar)

    Raises:
        FreshnessError: if ``old`` occurs in the hypotheses, ``new`` is free in
            them, or the renamed proof no longer checks.
    """
    if isinstance(old, Const):
        occurs, free_of = constants, free_ivars_of

        def rename(f):
            return rename_const(f, old, new)

    else:
        occurs, free_of = predicates, free_pvars_of

        def rename(f):
            return rename_pred(f, old, new)

    if any(old in occurs(h) for h in proof.hyps):
        raise FreshnessError(f"{old.name} occurs in the hypotheses")
    if new in free_of(proof.hyps):
        raise FreshnessError(f"{new.name} is free in the hypotheses")
    try:
        # renamed axiom steps are recognized from their formulas again
        steps = tuple(Step(rename(s.formula), _unslotted(s.justification)) for s in proof.steps)
        conclusion = rename(proof.conclusion)
    except (CaptureError, ArityMismatch) as exc:
        raise FreshnessError(str(exc)) from exc
    renamed = HilbertProof(proof.system, proof.hyps, steps, conclusion)
    report = check_hilbert(proof.system, renamed)
    if not report.ok:
        raise FreshnessError(f"renaming {old.name} to {new.name}: {report.issues[0]}")
    return renamed


# Search


@dataclass(frozen=True)
class Meta(Formula):
    """Search placeholder for a not-yet-determined formula."""

    id: int


@dataclass(frozen=True)
class NotFound:
    """No proof within the bound; bounded evidence, not a non-provability claim."""

    depth: int

    def __str__(self):
        return f"NotFound: no proof within {self.depth} step(s) (bounded evidence only)"


def _has_meta(f):
    if isinstance(f, Meta):
        return True
    if isinstance(f, Imp):
        return _has_meta(f.left) or _has_meta(f.right)
    if isinstance(f, (ForallI, ForallP)):
        return _has_meta(f.body)
    return False


def _resolve(f, s, ground=False):
    if isinstance(f, Meta):
        if f.id in s:
            return _resolve(s[f.id], s, ground)
        return bottom() if ground else f
    if isinstance(f, Imp):
        return Imp(_resolve(f.left, s, ground), _resolve(f.right, s, ground))
    if isinstance(f, (ForallI, ForallP)):
        return type(f)(f.var, _resolve(f.body, s, ground))
    return f


def _occurs(m, f, s):
    f = _deref(f, s)
    if f == m:
        return True
    if isinstance(f, Imp):
        return _occurs(m, f.left, s) or _occurs(m, f.right, s)
    if isinstance(f, (ForallI, ForallP)):
        return _occurs(m, f.body, s)
    return False


def _deref(f, s):
    while isinstance(f, Meta) and f.id in s:
        f = s[f.id]
    return f


def _unify(a, b, s):
    a, b = _deref(a, s), _deref(b, s)
    if a == b:
        return s
    if isinstance(a, Meta):
        return None if _occurs(a, b, s) else {**s, a.id: b}
    if isinstance(b, Meta):
        return None if _occurs(b, a, s) else {**s, b.id: a}
    if type(a) is not type(b):
        return None
    if isinstance(a, Imp):
        s = _unify(a.left, b.left, s)
        return None if s is None else _unify(a.right, b.right, s)
    if isinstance(a, (ForallI, ForallP)) and a.var == b.var:
        return _unify(a.body, b.body, s)
    return None


def _ground_tree(tree, s):
    kind = tree[0]
    if kind == "hyp":
        return tree
    if kind == "axiom":
        return ("axiom", tree[1], _resolve(tree[2], s, ground=True))
    if kind == "mp":
        return ("mp", _resolve(tree[1], s, True), _ground_tree(tree[2], s), _ground_tree(tree[3], s))
    return (kind, _resolve(tree[1], s, True), tree[2], _ground_tree(tree[3], s))


def _tree_ok(tree):
    """Recheck generalization side conditions once metavariables are grounded."""
    kind = tree[0]
    if kind == "mp":
        return _tree_ok(tree[2]) and _tree_ok(tree[3])
    if kind in ("gen1", "gen2"):
        free = free_ivars if kind == "gen1" else free_pvars
        return tree[2] not in free(tree[1].left) and _tree_ok(tree[3])
    return True


class HilbertSearch(ProofEngine):
    """
    Iterative deepening over proof size with schema unification.

    Modus ponens introduces a metavariable for the cut formula; goals that
    are fully determined are solved once at their smallest size and cached.
    """

    def __init__(self, system, hyps=(), seed=0):
        super().__init__("search", system)
        rng = random.Random(seed)
        self.given = tuple(hyps)
        self.hyps = [expand(h) for h in hyps]
        rng.shuffle(self.hyps)
        self.tags = [t for t in _SLOTS if system == "HC" or t != "DNE"]
        rng.shuffle(self.tags)
        self.hyp_ivars = free_ivars_of(self.hyps)
        self.hyp_pvars = free_pvars_of(self.hyps)
        self.counter = itertools.count()
        self.solved = {}
        self.failed = {}

    def _fresh(self):
        return Meta(next(self.counter))

    def run(self, goal, depth):
        if depth < 1:
            raise ValueError("search depth must be at least 1")
        self.log_start(f"searching for {goal} within {depth} step(s)")
        core = expand(goal)
        found = self._prove_ground(core, depth)
        if found is None:
            self.log_complete(f"nothing within {depth} step(s)")
            return NotFound(depth)
        out = ProofBuilder()
        final = self._emit(found[0], out)
        proof = out.build(self.system, self.given, goal, final)
        if not check_hilbert(self.system, proof).ok:
            raise InvariantViolation("search produced a proof that does not check")
        self.log_complete(f"found a {len(proof.steps)}-step proof")
        return proof

    def _prove(self, goal, budget, s):
        goal = _resolve(goal, s)
        if budget < 1:
            return
        if not _has_meta(goal):
            found = self._prove_ground(goal, budget)
            if found is not None:
                yield s, found[0], found[1]
            return
        yield from self._alternatives(goal, budget, s)

    def _prove_ground(self, goal, budget):
        if goal in self.solved:
            tree, size = self.solved[goal]
            return (tree, size) if size <= budget else None
        for n in range(self.failed.get(goal, 0) + 1, budget + 1):
            for s, tree, size in self._alternatives(goal, n, {}):
                tree = _ground_tree(tree, s)
                if _tree_ok(tree):
                    self.solved[goal] = (tree, size)
                    return tree, size
            self.failed[goal] = n
        return None

    def _alternatives(self, goal, budget, s):
        for h in self.hyps:
            unified = _unify(goal, h, s)
            if unified is not None:
                yield unified, ("hyp", h), 1

        if isinstance(goal, Meta):
            # any theorem will do; bind it to a K instance
            inst = instantiate_axiom("K", phi=self._fresh(), psi=self._fresh())
            yield _unify(goal, inst, s), ("axiom", "K", inst), 1
            return

        for tag in self.tags:
            inst = instantiate_axiom(tag, **{slot: self._fresh() for slot in _SLOTS[tag]})
            unified = _unify(goal, inst, s)
            if unified is not None:
                yield unified, ("axiom", tag, inst), 1
        if not _has_meta(goal):
            for tag in ("AllE", "PiE"):
                if match_axiom(tag, goal) is not None:
                    yield s, ("axiom", tag, goal), 1

        if budget >= 2 and isinstance(goal, Imp):
            body = goal.right
            if isinstance(body, ForallI) and body.var not in free_ivars(goal.left) | self.hyp_ivars:
                for unified, tree, size in self._prove(Imp(goal.left, body.body), budget - 1, s):
                    yield unified, ("gen1", goal, body.var, tree), size + 1
            if isinstance(body, ForallP) and body.var not in free_pvars(goal.left) | self.hyp_pvars:
                for unified, tree, size in self._prove(Imp(goal.left, body.body), budget - 1, s):
                    yield unified, ("gen2", goal, body.var, tree), size + 1

        if budget >= 3:
            cut = self._fresh()
            for s1, major, size1 in self._prove(Imp(cut, goal), budget - 2, s):
                for s2, minor, size2 in self._prove(cut, budget - 1 - size1, s1):
                    yield s2, ("mp", goal, major, minor), size1 + size2 + 1

    def _emit(self, tree, out):
        kind = tree[0]
        if kind == "hyp":
            return out.hyp(tree[1])
        if kind == "axiom":
            return out.axiom_formula(tree[2], tree[1])
        if kind == "mp":
            major = self._emit(tree[2], out)
            minor = self._emit(tree[3], out)
            return out.mp(major, minor)
        return out.gen(self._emit(tree[3], out), tree[2])


def search(system, hyps, phi, depth, seed=0):
    """
    Bounded proof search.

    Returns:
        HilbertProof that passes check_hilbert, or NotFound(depth).
    """
    return HilbertSearch(system, hyps, seed).run(phi, depth)


# Random proofs


def gen_hilbert_proof(seed, length=8, system="HI", slice=None, generalize=True):
    """
    Deterministic random proof that checks in ``system``.

    Args:
        seed: Random seed
        length: Number of building moves (the proof may be a little longer)
        system: HI or HC
        slice: Signature for the slot formulas
        generalize: Whether Gen1/Gen2 steps may appear

    Returns:
        HilbertProof
    """
    rng = random.Random(seed)
    sig = slice or DEFAULT_SLICE
    pool = [expand(gen_formula(rng.randrange(1 << 30), rng.randint(1, 3), sig)) for _ in range(4)]
    hyps = tuple(close(f) for f in rng.sample(pool, rng.randint(0, 2)))
    out = ProofBuilder()
    tags = ["K", "S", "NegI", "EFQ"] + (["DNE"] if system == "HC" else [])

    def pick():
        proven = [s.formula for s in out.steps]
        return rng.choice(pool + proven) if proven and rng.random() < 0.5 else rng.choice(pool)

    last = None
    for _ in range(length):
        moves = ["axiom", "axiom", "mp", "mp", "mp"] + (["hyp"] if hyps else [])
        if generalize:
            moves.append("gen")
        move = rng.choice(moves)
        if move == "hyp":
            last = out.hyp(expand(rng.choice(hyps)))
        elif move == "mp" and out.steps:
            pairs = [
                (i, j)
                for i in range(1, len(out.steps) + 1)
                for j in range(1, len(out.steps) + 1)
                if isinstance(out.formula(i), Imp) and out.formula(i).left == out.formula(j)
            ]
            if pairs:
                last = out.mp(*rng.choice(pairs))
                continue
            k = rng.randrange(1, len(out.steps) + 1)
            last = out.mp(out.axiom("K", phi=out.formula(k), psi=pick()), k)
        elif move == "gen" and out.steps:
            i = rng.randrange(1, len(out.steps) + 1)
            premise = out.formula(i)
            if not isinstance(premise, Imp):
                continue
            var = rng.choice(list(sig.ivars) + list(sig.pvars))
            free, free_of = (
                (free_ivars, free_ivars_of) if isinstance(var, Var) else (free_pvars, free_pvars_of)
            )
            if var in free(premise.left) or var in free_of(hyps):
                continue
            last = out.gen(i, var)
        else:
            tag = rng.choice(tags)
            last = out.axiom(tag, **{slot: pick() for slot in _SLOTS[tag]})
    if last is None:
        last = out.axiom("K", phi=pool[0], psi=pool[-1])
    return out.build(system, hyps, out.formula(last), last)
