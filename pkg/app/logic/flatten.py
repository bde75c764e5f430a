"""
Flattening of second-order formulas into 0-ary atoms and the simulation
bases J (intuitionistic) and K (classical) built from it.

A Hilbert proof compiles step for step into an atomic derivation over the
flattened formulas; a derivation in a simulation base extracts back into a
Hilbert proof of the unflattened sequent.
"""

from dataclasses import dataclass, field

from app.logic.atomic import AtomicRule, Base, DerivationTrace, Premise, check_trace
from app.logic.engine_base import ProofEngine
from app.logic.errors import (
    ArityMismatch,
    CaptureError,
    FragmentError,
    InvariantViolation,
    TransformError,
    UnknownRule,
)
from app.logic.hilbert import (
    AXIOM_TAGS,
    MP,
    Axiom,
    Gen1,
    Gen2,
    HilbertProof,
    Hyp,
    ProofBuilder,
    check_hilbert,
    instantiate_axiom,
    match_axiom,
    rename_eigen,
)
from app.logic.syntax import (
    EIGEN_CONST_PREFIX,
    EIGEN_PRED_PREFIX,
    FLAT_PREFIX,
    Atom,
    Const,
    ForallI,
    ForallP,
    Imp,
    Pred,
    Var,
    constants,
    expand,
    free_ivars,
    free_pvars,
    fresh_eigen_const,
    fresh_eigen_pred,
    is_closed,
    predicates,
    rename_const,
    rename_pred,
    subformulas,
    subst_ind,
    subst_pred,
    symbol_names,
)

SIMULATION_SYSTEMS = ("J", "K")
CALCULUS = {"J": "HI", "K": "HC"}
SIMULATION = {"HI": "J", "HC": "K"}


def _is_eigen_const(c):
    return c.name.startswith(EIGEN_CONST_PREFIX)


def _is_eigen_pred(p):
    return p.name.startswith(EIGEN_PRED_PREFIX)


@dataclass(frozen=True)
class Fragment:
    """
    Predicates harvested from a goal theory plus the names eigen symbols avoid.

    The closed language over these predicates (and the eigen predicates) is
    the domain of the flattening map.
    """

    preds: frozenset
    taken: frozenset = frozenset()

    @classmethod
    def harvest(cls, formulas):
        formulas = [expand(f) for f in formulas]
        preds = frozenset(p for f in formulas for p in predicates(f) if not _is_eigen_pred(p))
        taken = frozenset(name for f in formulas for name in symbol_names(f))
        return cls(preds, taken)

    def contains(self, phi):
        return self.problem(phi) is None

    def problem(self, phi):
        phi = expand(phi)
        if not is_closed(phi):
            return "formula is not closed"
        for p in predicates(phi):
            if p.name.startswith(FLAT_PREFIX):
                return f"{p.name} is a flat atom"
            if not _is_eigen_pred(p) and p not in self.preds:
                return f"predicate {p.name}/{p.arity} is outside the fragment"
        return None

    def eigen_const(self, avoid=()):
        return fresh_eigen_const(self.taken | {getattr(a, "name", a) for a in avoid})

    def eigen_pred(self, arity, avoid=()):
        return fresh_eigen_pred(arity, self.taken | {getattr(a, "name", a) for a in avoid})


class FlatMap:
    """
    Growable injection from closed fragment formulas to 0-ary atoms.

    The map is the identity on 0-ary atoms of the fragment; every other
    formula gets a fresh ``$F<n>`` atom on first use. Not thread-safe: one
    owner extends it.
    """

    def __init__(self, fragment=None):
        self.fragment = fragment
        self.forward = {}
        self.backward = {}

    def __len__(self):
        return len(self.forward)

    def flat(self, phi):
        phi = expand(phi)
        if phi in self.forward:
            return self.forward[phi]
        problem = self.fragment.problem(phi) if self.fragment else None
        if problem is None and not is_closed(phi):
            problem = "formula is not closed"
        if problem:
            raise FragmentError(f"cannot flatten: {problem}")
        if isinstance(phi, Atom) and phi.pred.arity == 0:
            return phi
        atom = Atom(Pred(f"{FLAT_PREFIX}{len(self.forward) + 1}", 0))
        self.forward[phi] = atom
        self.backward[atom] = phi
        return atom

    def nat(self, atom):
        return self.backward.get(atom, atom)

    def items(self):
        return sorted(self.backward.items(), key=lambda item: int(item[0].pred.name[len(FLAT_PREFIX):]))


def flat(fmap, phi):
    """
    Flat atom of ``phi``, extending the table on first use.

    Raises:
        FragmentError: if ``phi`` is open or mentions a predicate outside the fragment.
    """
    return fmap.flat(phi)


def nat(fmap, atom):
    """Formula flattened to ``atom``; atoms outside the image map to themselves."""
    return fmap.nat(atom)


@dataclass(frozen=True)
class GenRecord:
    """Side-condition record of one generalization rule instance."""

    rule: AtomicRule
    kind: str
    eigen: object
    var: object


@dataclass
class SimulationBase:
    """Finite set of simulation rule instances generated so far."""

    system: str
    fmap: FlatMap
    rules: set = field(default_factory=set)
    records: list = field(default_factory=list)

    def __post_init__(self):
        if self.system not in SIMULATION_SYSTEMS:
            raise ValueError(f"unknown simulation base {self.system}")

    @property
    def name(self):
        return self.system

    @property
    def calculus(self):
        return CALCULUS[self.system]

    def as_base(self):
        return Base(self.system, frozenset(self.rules))

    def axiom(self, formula):
        rule = AtomicRule(self.fmap.flat(formula))
        self.rules.add(rule)
        return rule

    def mp(self, antecedent, implication):
        rule = AtomicRule(
            self.fmap.flat(implication.right),
            (Premise(frozenset(), self.fmap.flat(antecedent)), Premise(frozenset(), self.fmap.flat(implication))),
        )
        self.rules.add(rule)
        return rule

    def generalize(self, premise, conclusion, eigen, var):
        """
        Rule ``flat(A -> B) => flat(A -> all x. B[e := x])``; None when the side
        condition fails.
        """
        binder = conclusion.right
        if var in (free_ivars(premise.left) if isinstance(var, Var) else free_pvars(premise.left)):
            return None
        if _occurs(eigen, premise.left):
            return None
        rule = AtomicRule(self.fmap.flat(conclusion), (Premise(frozenset(), self.fmap.flat(premise)),))
        kind = "all" if isinstance(binder, ForallI) else "pi"
        if rule not in self.rules:
            self.rules.add(rule)
            self.records.append(GenRecord(rule, kind, eigen, var))
        return rule


def _occurs(eigen, phi):
    if isinstance(eigen, Const):
        return eigen in constants(phi)
    return eigen in predicates(phi)


def _unname(phi, eigen, var):
    """``phi[e := x]``, or None on capture."""
    try:
        if isinstance(eigen, Const):
            return rename_const(phi, eigen, var)
        return rename_pred(phi, eigen, var)
    except (CaptureError, ArityMismatch):
        return None


def simulation_base(system, fragment=None):
    """Empty simulation base J or K over a fresh flattening map."""
    return SimulationBase(system, FlatMap(fragment))


# Instantiation


def _pool(needed, fragment):
    consts, preds = set(), set()
    for phi in needed:
        for node in subformulas(phi):
            if isinstance(node, Atom):
                consts.update(t for t in node.args if isinstance(t, Const))
                if isinstance(node.pred, Pred):
                    preds.add(node.pred)
    if fragment:
        preds.update(fragment.preds)
    return sorted(consts, key=lambda c: c.name), sorted(preds, key=lambda p: (p.arity, p.name))


def instantiate_rules(sim, needed):
    """
    Add every simulation rule instance whose slots come from ``needed``.

    Axiom rows are filled from ``needed`` (AllE terms from the constants
    occurring there, PiE predicates from the fragment and the eigen
    predicates there); modus ponens pairs each formula with each needed
    implication; generalization instances are read off needed formulas of
    the shape ``A -> all x. B`` with eigen symbols drawn from ``needed`` plus
    one fresh symbol per kind. DNE rows are added only to K.

    Returns:
        The same SimulationBase, extended.
    """
    needed = sorted({expand(phi) for phi in needed}, key=str)
    fragment = sim.fmap.fragment
    for phi in needed:
        sim.fmap.flat(phi)
    consts, preds = _pool(needed, fragment)
    tags = [t for t in AXIOM_TAGS if t != "DNE" or sim.system == "K"]

    def add_axiom(tag, **slots):
        try:
            formula = instantiate_axiom(tag, **slots)
        except (CaptureError, ArityMismatch):
            return
        if formula_ok(formula):
            sim.axiom(formula)

    def formula_ok(formula):
        return (fragment is None or fragment.contains(formula)) and is_closed(formula)

    for a in needed:
        if "DNE" in tags:
            add_axiom("DNE", phi=a)
        for b in needed:
            add_axiom("K", phi=a, psi=b)
            add_axiom("NegI", phi=a, psi=b)
            add_axiom("EFQ", phi=a, psi=b)
            for c in needed:
                add_axiom("S", phi=a, psi=b, chi=c)
        if isinstance(a, ForallI):
            for t in consts:
                add_axiom("AllE", phi=a.body, var=a.var, term=t)
        if isinstance(a, ForallP):
            for p in preds:
                if p.arity == a.var.arity:
                    add_axiom("PiE", phi=a.body, var=a.var, term=p)

    for imp in needed:
        if isinstance(imp, Imp) and imp.left in needed:
            sim.mp(imp.left, imp)

    eigen_consts = [c for c in consts if _is_eigen_const(c)]
    eigen_preds = [p for p in preds if _is_eigen_pred(p)]
    avoid = {name for phi in needed for name in symbol_names(phi)}
    for conclusion in needed:
        if not isinstance(conclusion, Imp) or not isinstance(conclusion.right, (ForallI, ForallP)):
            continue
        binder = conclusion.right
        if isinstance(binder, ForallI):
            pool = eigen_consts + [fresh_eigen_const(avoid)]
        else:
            pool = [p for p in eigen_preds if p.arity == binder.var.arity]
            pool.append(fresh_eigen_pred(binder.var.arity, avoid))
        for eigen in pool:
            if _occurs(eigen, conclusion):
                continue
            body = subst_ind(binder.body, binder.var, eigen) if isinstance(binder, ForallI) else subst_pred(
                binder.body, binder.var, eigen
            )
            sim.generalize(Imp(conclusion.left, body), conclusion, eigen, binder.var)
    return sim


# Compilation


class HilbertCompiler(ProofEngine):
    """
    Compiles a checking Hilbert proof into a derivation in J (HI) or K (HC).

    Free variables of intermediate steps are named by eigen symbols, one per
    variable, so every step formula is closed.
    """

    def __init__(self, system):
        super().__init__("compile", system)

    def run(self, proof):
        self.log_start(f"compiling {len(proof.steps)} step(s)")
        report = check_hilbert(proof.system, proof)
        if not report.ok:
            raise TransformError(f"compile needs a checking proof: {report.issues[0]}")
        for phi in (*proof.hyps, proof.conclusion):
            if not is_closed(expand(phi)):
                raise FragmentError(f"{phi} is not closed")

        formulas = [expand(s.formula) for s in proof.steps]
        fragment = Fragment.harvest([*formulas, *proof.hyps, proof.conclusion])
        naming = self._naming(proof, formulas, fragment)
        closed = [self._close(f, naming) for f in formulas]
        sim = SimulationBase(SIMULATION[proof.system], FlatMap(fragment))
        context = frozenset(sim.fmap.flat(h) for h in proof.hyps)

        traces = []
        for step, f in zip(proof.steps, closed):
            traces.append(self._step(sim, context, step.justification, f, closed, traces, naming))
        trace = traces[-1]
        if not check_trace(sim.as_base(), trace):
            raise InvariantViolation("compiled trace does not check against its simulation base")
        self.log_complete(f"{len(sim.rules)} rule(s), trace of {trace.size()} node(s)")
        return sim, trace

    @staticmethod
    def _naming(proof, formulas, fragment):
        """Eigen symbol for every variable free in some step or generalized over."""
        ivars, pvars = set(), set()
        for f in formulas:
            ivars |= free_ivars(f)
            pvars |= free_pvars(f)
        for step in proof.steps:
            just = step.justification
            if isinstance(just, Gen1):
                ivars.add(just.var)
            elif isinstance(just, Gen2):
                pvars.add(just.var)
        naming, used = {}, set()
        for x in sorted(ivars):
            naming[x] = fragment.eigen_const(used)
            used.add(naming[x].name)
        for X in sorted(pvars, key=lambda v: (v.arity, v.name)):
            naming[X] = fragment.eigen_pred(X.arity, used)
            used.add(naming[X].name)
        return naming

    @staticmethod
    def _close(phi, naming):
        for x in sorted(free_ivars(phi)):
            phi = subst_ind(phi, x, naming[x])
        for X in sorted(free_pvars(phi), key=lambda v: (v.arity, v.name)):
            phi = subst_pred(phi, X, naming[X])
        return phi

    def _step(self, sim, context, just, f, closed, traces, naming):
        if isinstance(just, Hyp):
            return DerivationTrace(context, sim.fmap.flat(f))
        if isinstance(just, Axiom):
            return DerivationTrace(context, sim.fmap.flat(f), sim.axiom(f))
        if isinstance(just, MP):
            rule = sim.mp(closed[just.minor - 1], closed[just.major - 1])
            children = (traces[just.minor - 1], traces[just.major - 1])
            return DerivationTrace(context, sim.fmap.flat(f), rule, children)
        premise = closed[just.premise - 1]
        rule = sim.generalize(premise, f, naming[just.var], just.var)
        if rule is None:
            raise InvariantViolation(f"generalization over {just.var.name} fails its side condition")
        return DerivationTrace(context, sim.fmap.flat(f), rule, (traces[just.premise - 1],))


def compile_hilbert_to_base(proof):
    """
    Simulation base and derivation of ``flat(hyps) |- flat(conclusion)``.

    Returns:
        tuple: (SimulationBase, DerivationTrace); J for HI proofs, K for HC.

    Raises:
        FragmentError: if a hypothesis or the conclusion is not closed.
    """
    return HilbertCompiler(proof.system).run(proof)


# Extraction


def _refs(trace):
    if trace.rule is None:
        return {trace.goal}
    return set().union(*(_refs(child) for child in trace.children))


class BaseExtractor(ProofEngine):
    """Reads a Hilbert proof off a derivation in a simulation base."""

    def __init__(self, sim):
        super().__init__("extract", sim.calculus)
        self.sim = sim
        self.base = sim.as_base()

    def run(self, trace):
        self.log_start(f"extracting from a trace of {trace.size()} node(s)")
        if not check_trace(self.base, trace):
            raise InvariantViolation("trace does not check against the simulation base")
        sub = self._extract(trace)
        hyps = tuple(self.sim.fmap.nat(a) for a in sorted(trace.hyps, key=lambda a: a.pred.name))
        proof = HilbertProof(self.system, hyps, sub.steps, sub.conclusion)
        report = check_hilbert(self.system, proof)
        if not report.ok:
            raise InvariantViolation(f"extracted proof does not check: {report.issues[0]}")
        self.log_complete(f"{len(proof.steps)} step(s)")
        return proof

    def _extract(self, trace):
        nat = self.sim.fmap.nat
        goal = nat(trace.goal)
        hyps = tuple(nat(a) for a in sorted(_refs(trace), key=lambda a: a.pred.name))
        out = ProofBuilder()
        if trace.rule is None:
            return out.build(self.system, hyps, goal, out.hyp(goal))

        rule = trace.rule
        if not rule.premises:
            tag = self._axiom_tag(goal)
            return out.build(self.system, hyps, goal, out.axiom_formula(goal, tag))
        if len(rule.premises) == 2:
            left, right = (nat(p.goal) for p in rule.premises)
            if right == Imp(left, goal):
                minor = out.splice(self._extract(trace.children[0]))
                major = out.splice(self._extract(trace.children[1]))
                return out.build(self.system, hyps, goal, out.mp(major, minor))
        if len(rule.premises) == 1:
            premise = nat(rule.premises[0].goal)
            found = self._generalization(premise, goal)
            if found is not None:
                eigen, var = found
                sub = self._extract(trace.children[0])
                if eigen is not None:
                    sub = rename_eigen(sub, eigen, var)
                final = out.gen(out.splice(sub), var)
                return out.build(self.system, hyps, goal, final)
        raise UnknownRule(f"rule with conclusion {goal} is not a simulation rule of {self.sim.system}")

    def _axiom_tag(self, formula):
        for tag in AXIOM_TAGS:
            if tag == "DNE" and self.sim.system == "J":
                continue
            if match_axiom(tag, formula) is not None:
                return tag
        raise UnknownRule(f"{formula} is not a flattened axiom of {self.sim.system}")

    @staticmethod
    def _generalization(premise, conclusion):
        """``(eigen or None, var)`` when ``premise => conclusion`` is a generalization rule."""
        if not (isinstance(premise, Imp) and isinstance(conclusion, Imp)):
            return None
        if premise.left != conclusion.left or not isinstance(conclusion.right, (ForallI, ForallP)):
            return None
        binder = conclusion.right
        var, body = binder.var, binder.body
        individual = isinstance(binder, ForallI)
        if var in (free_ivars(premise.left) if individual else free_pvars(premise.left)):
            return None
        if premise.right == body and var not in (free_ivars(body) if individual else free_pvars(body)):
            return None, var
        if individual:
            pool = sorted(c for c in constants(premise.right) if _is_eigen_const(c))
        else:
            pool = sorted(
                (p for p in predicates(premise.right) if _is_eigen_pred(p) and p.arity == var.arity),
                key=lambda p: p.name,
            )
        for eigen in pool:
            if _occurs(eigen, premise.left):
                continue
            if _unname(premise.right, eigen, var) == body:
                return eigen, var
        return None


def extract_hilbert_from_base(sim, trace):
    """
    Hilbert proof of ``nat(goal)`` from ``nat(hyps)``: HI for J, HC for K.

    Raises:
        UnknownRule: if the trace applies a rule that is not a simulation rule.
        FreshnessError: if an eigen symbol of a generalization occurs in a used hypothesis.
    """
    return BaseExtractor(sim).run(trace)


# Export and audit


def dump_base(sim):
    """Simulation base in the base file syntax, preceded by its flat table as comments."""
    from app.logic.parser import print_base

    lines = [f"# {line}" for line in flat_table(sim.fmap).splitlines()]
    lines.append(print_base(sim.as_base()))
    return "\n".join(lines)


def flat_table(fmap):
    """Two-column text export: flat atom, formula."""
    from app.logic.parser import print_atom, print_formula

    return "\n".join(f"{print_atom(atom)}\t{print_formula(phi)}" for atom, phi in fmap.items())


def audit(sim):
    """
    Independent recheck of every generalization instance and of system separation.

    Returns:
        list of problem strings, empty when every instance is sound.
    """
    problems = []
    for record in sim.records:
        premise = sim.fmap.nat(record.rule.premises[0].goal)
        conclusion = sim.fmap.nat(record.rule.conclusion)
        var, eigen = record.var, record.eigen
        free = free_ivars if isinstance(var, Var) else free_pvars
        if var in free(premise.left):
            problems.append(f"{var.name} is free in the antecedent {premise.left}")
        if _occurs(eigen, premise.left):
            problems.append(f"{eigen.name} occurs in the antecedent {premise.left}")
        binder = ForallI if record.kind == "all" else ForallP
        if conclusion != Imp(premise.left, binder(var, _unname(premise.right, eigen, var) or premise.right)):
            problems.append(f"{conclusion} is not the generalization of {premise} through {eigen.name}")
    tags = [t for t in AXIOM_TAGS if t != "DNE" or sim.system == "K"]
    for rule in sim.rules:
        if rule.premises:
            continue
        formula = sim.fmap.nat(rule.conclusion)
        if not any(match_axiom(t, formula) is not None for t in tags):
            problems.append(f"{formula} is not a flattened axiom of {sim.calculus}")
    return problems

