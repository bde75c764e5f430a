"""
Natural deduction systems NI and NC, their checker, and the translations
to and from the Hilbert calculi.
"""

import itertools
from dataclasses import dataclass

from app.logic.engine_base import ProofEngine
from app.logic.errors import ArityMismatch, CaptureError, InvariantViolation
from app.logic.hilbert import (
    MP,
    SYSTEMS,
    CheckReport,
    Gen1,
    Gen2,
    HilbertProof,
    Hyp,
    Issue,
    ProofBuilder,
    check_hilbert,
    deduction_intro,
    match_axiom,
    neg,
    top,
)
from app.logic.syntax import (
    Const,
    ForallI,
    ForallP,
    Formula,
    Imp,
    Pred,
    PVar,
    Var,
    bottom,
    expand,
    free_ivars_of,
    free_pvars_of,
    subst_ind,
    subst_pred,
)

ND_RULES = ("hyp", "impI", "impE", "allI", "allE", "piI", "piE", "efq", "dne")
ND_SYSTEMS = ("NI", "NC")
PAIRED = {"HI": "NI", "HC": "NC", "NI": "HI", "NC": "HC"}


@dataclass(frozen=True)
class NDProof:
    """
    Proof tree node.

    ``label`` names the discharge label of ``hyp`` leaves and ``impI`` nodes;
    ``param`` is the variable of ``allI``/``piI`` or the instance of
    ``allE``/``piE``.
    """

    rule: str
    conclusion: Formula
    premises: tuple = ()
    label: str | None = None
    param: object = None

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))

    def __str__(self):
        from app.logic.parser import print_nd_proof

        return print_nd_proof(self)

    def size(self):
        return 1 + sum(p.size() for p in self.premises)


def _leaves(tree):
    """Open ``(label, formula)`` leaves of ``tree``."""
    if tree.rule == "hyp":
        return [(tree.label, expand(tree.conclusion))]
    leaves = [leaf for premise in tree.premises for leaf in _leaves(premise)]
    if tree.rule == "impI":
        leaves = [leaf for leaf in leaves if leaf[0] != tree.label]
    return leaves


def open_hypotheses(tree):
    """Formulas of the undischarged leaves, in first-occurrence order."""
    return tuple(dict.fromkeys(formula for _, formula in _leaves(tree)))


# Checking

_PREMISES = {"hyp": 0, "impE": 2}


class NDChecker(ProofEngine):
    """Checks every node of an ND tree; issues are located by node path."""

    def __init__(self, system):
        if system not in ND_SYSTEMS:
            raise ValueError(f"unknown natural deduction system {system}")
        super().__init__("ndcheck", system)

    def run(self, tree):
        self.log_start(f"checking a {tree.size()}-node tree")
        self.issues, self.lines = [], []
        self.assumptions = open_hypotheses(tree)
        self._visit(tree, "root")
        if self.issues:
            self.log_warning(f"{len(self.issues)} issue(s)")
            self.lines.append(f"verdict: {len(self.issues)} issue(s)")
        else:
            self.log_complete("tree checks")
            self.lines.append("verdict: ok")
        return CheckReport(not self.issues, tuple(self.issues), tuple(self.lines))

    def _visit(self, node, path):
        from app.logic.parser import print_formula

        for k, premise in enumerate(node.premises):
            self._visit(premise, f"{path}.{k}")
        problem = self._problem(node)
        line = f"{path} {node.rule}  {print_formula(node.conclusion)}"
        if problem:
            self.issues.append(Issue(path, problem))
            self.lines.append(f"{line}  FAIL: {problem}")
        else:
            self.lines.append(f"{line}  ok")

    def _problem(self, node):
        rule = node.rule
        if rule not in ND_RULES:
            return f"unknown rule {rule}"
        expected = _PREMISES.get(rule, 1)
        if len(node.premises) != expected:
            return f"{rule} takes {expected} premise(s), got {len(node.premises)}"
        c = expand(node.conclusion)
        p = [expand(premise.conclusion) for premise in node.premises]

        if rule == "hyp":
            return None
        if rule == "impI":
            if node.label is None:
                return "impI needs a discharge label"
            if not isinstance(c, Imp) or c.right != p[0]:
                return "conclusion is not an implication into the premise"
            for label, formula in _leaves(node.premises[0]):
                if label == node.label and formula != c.left:
                    return f"leaf labelled {label} is not the antecedent"
            return None
        if rule == "impE":
            if p[0] != Imp(p[1], c):
                return "major premise is not minor premise -> conclusion"
            return None
        if rule in ("allI", "piI"):
            individual = rule == "allI"
            kind, binder, free_of = (Var, ForallI, free_ivars_of) if individual else (PVar, ForallP, free_pvars_of)
            if not isinstance(node.param, kind):
                return f"{rule} needs a {'variable' if individual else 'predicate variable'}"
            if c != binder(node.param, p[0]):
                return f"conclusion is not the generalization of the premise over {node.param.name}"
            if node.param in free_of(open_hypotheses(node.premises[0])):
                return f"eigenvariable violation: {node.param.name} is free in an open hypothesis"
            # open assumptions at the root count as well
            if node.param in free_of(self.assumptions):
                return f"eigenvariable violation: {node.param.name} is free in an assumption of the derivation"
            return None
        if rule == "allE":
            if not isinstance(p[0], ForallI) or not isinstance(node.param, (Const, Var)):
                return "allE needs a universal premise and a term"
            try:
                instance = subst_ind(p[0].body, p[0].var, node.param)
            except CaptureError as exc:
                return str(exc)
            return None if c == instance else "conclusion is not the instance of the premise"
        if rule == "piE":
            if not isinstance(p[0], ForallP) or not isinstance(node.param, (Pred, PVar)):
                return "piE needs a second-order universal premise and a predicate"
            try:
                instance = subst_pred(p[0].body, p[0].var, node.param)
            except (CaptureError, ArityMismatch) as exc:
                return str(exc)
            return None if c == instance else "conclusion is not the instance of the premise"
        if rule == "efq":
            return None if p[0] == bottom() else "premise is not bot"
        if self.system == "NI":
            return "DNE not in NI"
        return None if p[0] == neg(neg(c)) else "premise is not the double negation of the conclusion"


def check_nd(system, tree):
    """Check ``tree`` in NI or NC; returns a CheckReport."""
    return NDChecker(system).run(tree)


# Hilbert to ND


def _hyp(formula, label=None):
    return NDProof("hyp", formula, (), label)


class HilbertToND(ProofEngine):
    """Rule-for-rule translation; axioms become fixed introduction trees."""

    def __init__(self, system):
        super().__init__("to-nd", system)

    def run(self, proof):
        self.log_start(f"translating {len(proof.steps)} step(s)")
        self.labels = itertools.count(1)
        formulas = [expand(s.formula) for s in proof.steps]
        trees = []
        for step, f in zip(proof.steps, formulas):
            trees.append(self._step(step.justification, f, formulas, trees))
        tree = trees[-1]
        report = check_nd(self.system, tree)
        if not report.ok:
            raise InvariantViolation(f"translated tree does not check: {report.issues[0]}")
        self.log_complete(f"{tree.size()}-node tree")
        return tree

    def _label(self):
        return f"u{next(self.labels)}"

    def _step(self, just, f, formulas, trees):
        if isinstance(just, Hyp):
            return _hyp(f)
        if isinstance(just, MP):
            return NDProof("impE", f, (trees[just.major - 1], trees[just.minor - 1]))
        if isinstance(just, (Gen1, Gen2)):
            premise = formulas[just.premise - 1]
            u = self._label()
            rule, binder = ("allI", ForallI) if isinstance(just, Gen1) else ("piI", ForallP)
            body = NDProof("impE", premise.right, (trees[just.premise - 1], _hyp(premise.left, u)))
            general = NDProof(rule, binder(just.var, premise.right), (body,), param=just.var)
            return NDProof("impI", f, (general,), u)
        return self._axiom(just.tag, f, match_axiom(just.tag, f))

    def _axiom(self, tag, f, slots):
        phi, psi, chi = slots.get("phi"), slots.get("psi"), slots.get("chi")
        u, v, w = self._label(), self._label(), self._label()
        if tag == "K":
            inner = NDProof("impI", Imp(psi, phi), (_hyp(phi, u),), v)
            return NDProof("impI", f, (inner,), u)
        if tag == "S":
            chi_from = NDProof("impE", Imp(psi, chi), (_hyp(Imp(phi, Imp(psi, chi)), u), _hyp(phi, w)))
            psi_from = NDProof("impE", psi, (_hyp(Imp(phi, psi), v), _hyp(phi, w)))
            body = NDProof("impE", chi, (chi_from, psi_from))
            third = NDProof("impI", Imp(phi, chi), (body,), w)
            second = NDProof("impI", Imp(Imp(phi, psi), Imp(phi, chi)), (third,), v)
            return NDProof("impI", f, (second,), u)
        if tag in ("AllE", "PiE"):
            rule = "allE" if tag == "AllE" else "piE"
            binder = ForallI if tag == "AllE" else ForallP
            instance = NDProof(rule, f.right, (_hyp(binder(slots["var"], phi), u),), param=slots["term"])
            return NDProof("impI", f, (instance,), u)
        if tag == "NegI":
            not_psi = NDProof("impE", neg(psi), (_hyp(Imp(phi, neg(psi)), v), _hyp(phi, w)))
            yes_psi = NDProof("impE", psi, (_hyp(Imp(phi, psi), u), _hyp(phi, w)))
            falsum = NDProof("impE", bottom(), (not_psi, yes_psi))
            third = NDProof("impI", neg(phi), (falsum,), w)
            second = NDProof("impI", Imp(Imp(phi, neg(psi)), neg(phi)), (third,), v)
            return NDProof("impI", f, (second,), u)
        if tag == "EFQ":
            falsum = NDProof("impE", bottom(), (_hyp(neg(phi), u), _hyp(phi, w)))
            anything = NDProof("efq", psi, (falsum,))
            second = NDProof("impI", Imp(phi, psi), (anything,), w)
            return NDProof("impI", f, (second,), u)
        # DNE
        classical = NDProof("dne", phi, (_hyp(neg(neg(phi)), u),))
        return NDProof("impI", f, (classical,), u)


def hilbert_to_nd(proof, system=None):
    """
    Translate a checking Hilbert proof into an ND tree (HI to NI, HC to NC).

    The tree proves the expanded conclusion from the proof's hypotheses.
    """
    if system is None or system in SYSTEMS:
        system = PAIRED[system or proof.system]
    return HilbertToND(system).run(proof)


# ND to Hilbert


class NDToHilbert(ProofEngine):
    """
    Syntactic translation: impI by the deduction transformation, allI and
    piI through the closed theorem ``bot -> bot`` as a carrier antecedent.
    """

    def __init__(self, system):
        super().__init__("to-hilbert", system)

    def run(self, tree):
        self.log_start(f"translating a {tree.size()}-node tree")
        proof = self._translate(tree)
        result = HilbertProof(self.system, open_hypotheses(tree), proof.steps, tree.conclusion)
        report = check_hilbert(self.system, result)
        if not report.ok:
            raise InvariantViolation(f"translated proof does not check: {report.issues[0]}")
        self.log_complete(f"{len(result.steps)} step(s)")
        return result

    def _translate(self, node):
        f = expand(node.conclusion)
        hyps = open_hypotheses(node)
        if node.rule == "impI":
            sub = self._translate(node.premises[0])
            if f.left in {expand(h) for h in sub.hyps}:
                return deduction_intro(sub, f.left)
            out = ProofBuilder()
            final = out.weaken(out.splice(sub), f.left)
            return out.build(self.system, hyps, f, final)

        out = ProofBuilder()
        if node.rule == "hyp":
            final = out.hyp(f)
        elif node.rule == "impE":
            major = out.splice(self._translate(node.premises[0]))
            minor = out.splice(self._translate(node.premises[1]))
            final = out.mp(major, minor)
        else:
            sub = out.splice(self._translate(node.premises[0]))
            final = self._unary(out, node, f, sub)
        return out.build(self.system, hyps, f, final)

    def _unary(self, out, node, f, sub):
        if node.rule in ("allI", "piI"):
            carried = out.weaken(sub, top())
            general = out.gen(carried, node.param)
            return out.mp(general, out.identity(bottom()))
        if node.rule in ("allE", "piE"):
            premise = out.formula(sub)
            tag = "AllE" if node.rule == "allE" else "PiE"
            axiom = out.axiom(tag, phi=premise.body, var=premise.var, term=node.param)
            return out.mp(axiom, sub)
        if node.rule == "efq":
            carried = out.weaken(sub, top())
            axiom = out.axiom("EFQ", phi=top(), psi=f)
            return out.mp(out.mp(axiom, carried), out.identity(bottom()))
        axiom = out.axiom("DNE", phi=f)
        return out.mp(axiom, sub)


def nd_to_hilbert(tree, system="NI"):
    """
    Translate a checking ND tree (NI to HI, NC to HC).

    Every generalization the translation emits sits under the closed carrier
    ``bot -> bot``, so discharging an implication always commutes with it.

    Raises:
        InvariantViolation: only for a tree that fails check_nd.
    """
    return NDToHilbert(system if system in SYSTEMS else PAIRED[system]).run(tree)
