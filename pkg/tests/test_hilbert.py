"""Unit tests for the Hilbert calculi: schemas, checking, transformations and search."""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from app.logic.errors import CaptureError, FreshnessError, ParseError, TransformError
from app.logic.hilbert import (
    MP,
    Gen1,
    Gen2,
    HilbertProof,
    NotFound,
    Step,
    check_hilbert,
    deduction_elim,
    deduction_intro,
    gen_hilbert_proof,
    identity_proof,
    instantiate_axiom,
    match_axiom,
    neg,
    rename_eigen,
    search,
)
from app.logic.parser import parse_formula, parse_hilbert_proof, print_hilbert_proof
from app.logic.syntax import (
    Atom,
    Const,
    ForallI,
    Imp,
    Pred,
    PVar,
    Var,
    expand,
    free_ivars,
    free_pvars,
)
from app.logic.utils import get_corpus
from conftest import exhaustive

P = Atom(Pred("P", 0))
Q = Atom(Pred("Q", 0))
R = Pred("R", 1)
S2 = Pred("S", 2)
a = Const("a")
x, y = Var("?x"), Var("?y")


def _proof(text):
    return parse_hilbert_proof(text, internal=True)


def _corpus(system):
    return [(entry["name"], parse_hilbert_proof(entry["proof"])) for entry in get_corpus(system)]


# Q |- T -> all ?x. (R(?x) -> Q), generalizing under T
_UNDER_T = (
    'hilbert HI proof of "T -> all ?x. (R(?x) -> Q)" from "Q"\n'
    '1. hyp "Q"\n'
    '2. axiom K "Q -> (R(?x) -> Q)"\n'
    "3. mp 2 1\n"
    '4. axiom K "(R(?x) -> Q) -> (T -> (R(?x) -> Q))"\n'
    "5. mp 4 3\n"
    "6. gen1 5 ?x"
)


def _shifted_generalization(proof, antecedent):
    """Whether a generalization binds a variable free in its consequent under another antecedent."""
    target = expand(antecedent)
    formulas = [expand(s.formula) for s in proof.steps]
    for step in proof.steps:
        just = step.justification
        if isinstance(just, (Gen1, Gen2)):
            premise = formulas[just.premise - 1]
            free = free_ivars if isinstance(just, Gen1) else free_pvars
            if just.var in free(premise.right) and premise.left != target:
                return True
    return False


def _generalizes_over(proof, phi):
    core = expand(phi)
    bound = free_ivars(core) | free_pvars(core)
    return any(
        isinstance(s.justification, (Gen1, Gen2)) and s.justification.var in bound for s in proof.steps
    )


class TestSchemas(unittest.TestCase):
    """Test axiom instantiation and matching."""

    def test_k_instance(self):
        """Test: K with P and Q is P -> (Q -> P)."""
        self.assertEqual(instantiate_axiom("K", P, Q), Imp(P, Imp(Q, P)))

    def test_universal_instance(self):
        """Test: AllE gives all ?x. R(?x) -> R(a)."""
        body = Atom(R, (x,))
        self.assertEqual(instantiate_axiom("AllE", body, var=x, term=a), Imp(ForallI(x, body), Atom(R, (a,))))

    def test_universal_instance_capture(self):
        """Test: AllE refuses a term that the body would capture."""
        with self.assertRaises(CaptureError):
            instantiate_axiom("AllE", ForallI(y, Atom(S2, (x, y))), var=x, term=y)

    def test_match_recovers_slots(self):
        """Test: matching S finds its three slots; K does not match an S instance."""
        formula = instantiate_axiom("S", P, Q, P)
        self.assertEqual(match_axiom("S", formula), {"phi": P, "psi": Q, "chi": P})
        self.assertIsNone(match_axiom("K", formula))

    def test_match_on_sugar(self):
        """Test: DNE matches ~~P -> P written with negation sugar."""
        self.assertEqual(match_axiom("DNE", parse_formula("~~P -> P")), {"phi": P})

    def test_unknown_schema(self):
        """Test: an unknown tag is a ValueError."""
        with self.assertRaises(ValueError):
            instantiate_axiom("Peirce", P)


class TestChecker(unittest.TestCase):
    """Test the step checker on the corpus and on broken proofs."""

    def test_corpus_checks(self):
        """Test: every corpus proof checks in its own system."""
        for system in ("HI", "HC"):
            for name, proof in _corpus(system):
                with self.subTest(name=name):
                    report = check_hilbert(system, proof)
                    self.assertTrue(report.ok, report.text())
                    self.assertEqual(report.lines[-1], "verdict: ok")

    def test_corpus_sizes(self):
        """Test: the corpus carries at least twenty HI and five HC proofs."""
        self.assertGreaterEqual(len(get_corpus("HI")), 20)
        self.assertGreaterEqual(len(get_corpus("HC")), 5)

    def test_dne_rejected_in_intuitionistic_system(self):
        """Test: the classical corpus fails in HI only at its DNE steps."""
        for name, proof in _corpus("HC"):
            with self.subTest(name=name):
                report = check_hilbert("HI", proof)
                self.assertFalse(report.ok)
                self.assertTrue(all(issue.message == "DNE not in HI" for issue in report.issues))

    def test_bad_modus_ponens(self):
        """Test: MP with the premises swapped is reported at its step."""
        proof = _proof('hilbert HI proof of "Q" from "P, P -> Q"\n1. hyp "P"\n2. hyp "P -> Q"\n3. mp 1 2 "Q"')
        report = check_hilbert("HI", proof)
        self.assertFalse(report)
        self.assertEqual(report.issues[0].where, "step 3")
        self.assertEqual(report.lines[-1], "verdict: 1 issue(s)")

    def test_forward_citation(self):
        """Test: a step object citing a later step is reported, not raised."""
        proof = HilbertProof("HI", (P,), (Step(P, MP(2, 1)),), P)
        report = check_hilbert("HI", proof)
        self.assertIn("not an earlier step", report.issues[0].message)

    def test_hypothesis_must_be_declared(self):
        """Test: a hyp step outside the declared hypotheses fails."""
        report = check_hilbert("HI", _proof('hilbert HI proof of "P"\n1. hyp "P"'))
        self.assertEqual(report.issues[0].message, "not among the hypotheses")

    def test_conclusion_mismatch(self):
        """Test: the last step must prove the declared conclusion."""
        report = check_hilbert("HI", _proof('hilbert HI proof of "Q"\n1. axiom K "P -> (Q -> P)"'))
        self.assertEqual(report.issues[-1].where, "conclusion")

    def test_eigenvariable_in_hypothesis(self):
        """Test: generalizing over a variable free in a hypothesis is rejected."""
        proof = _proof(
            'hilbert HI proof of "P -> all ?x. R(?x)" from "P -> R(?x)"\n'
            '1. hyp "P -> R(?x)"\n'
            "2. gen1 1 ?x"
        )
        report = check_hilbert("HI", proof)
        self.assertIn("free in a hypothesis", report.issues[0].message)

    def test_eigenvariable_in_antecedent(self):
        """Test: generalizing over a variable free in the antecedent is rejected."""
        proof = _proof(
            'hilbert HI proof of "R(?x) -> all ?x. (Q -> R(?x))"\n'
            '1. axiom K "R(?x) -> (Q -> R(?x))"\n'
            "2. gen1 1 ?x"
        )
        report = check_hilbert("HI", proof)
        self.assertIn("free in the antecedent", report.issues[0].message)

    def test_eigenvariable_in_unused_hypothesis(self):
        """Test: a hypothesis counts for generalization even when the premise does not use it."""
        text = (
            'hilbert HI proof of "Q -> all ?x. (Q -> Q)" from "R(?x)"\n'
            '1. axiom K "Q -> (Q -> Q)"\n'
            "2. gen1 1 ?x"
        )
        report = check_hilbert("HI", _proof(text))
        self.assertEqual(report.issues[0].where, "step 2")
        self.assertIn("free in a hypothesis", report.issues[0].message)
        closed = _proof(text.replace('"R(?x)"', '"R(a)"'))
        self.assertTrue(check_hilbert("HI", closed).ok)

    def test_slotted_axiom(self):
        """Test: an axiom step given by its slots checks and prints its slots back."""
        proof = _proof(
            'hilbert HI proof of "(all ?x. R(?x)) -> R(a)"\n'
            '1. axiom AllE phi="R(?x)" var=?x term=a'
        )
        self.assertEqual(proof.steps[0].formula, parse_formula("(all ?x. R(?x)) -> R(a)"))
        self.assertTrue(check_hilbert("HI", proof).ok)
        self.assertIn('1. axiom AllE phi="R(?x)" var=?x term=a', print_hilbert_proof(proof))

    def test_slots_must_give_the_formula(self):
        """Test: slots that instantiate to a different formula are reported."""
        proof = _proof('hilbert HI proof of "P -> (Q -> P)"\n1. axiom K phi="P" psi="P" "P -> (Q -> P)"')
        report = check_hilbert("HI", proof)
        self.assertEqual(report.issues[0].message, "not the K instance its slots give")

    def test_unknown_slot(self):
        """Test: a slot the schema does not take is a parse error."""
        with self.assertRaises(ParseError):
            _proof('hilbert HI proof of "P -> (Q -> P)"\n1. axiom K phi="P" chi="Q"')

    def test_unknown_system(self):
        """Test: only HI and HC are Hilbert systems."""
        with self.assertRaises(ValueError):
            check_hilbert("NI", identity_proof(P))

    def test_identity_proof(self):
        """Test: the identity proof has five steps and checks in both systems."""
        proof = identity_proof(P)
        self.assertEqual(len(proof.steps), 5)
        self.assertTrue(check_hilbert("HI", proof).ok)
        self.assertTrue(check_hilbert("HC", proof).ok)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=2**30), st.sampled_from(["HI", "HC"]))
    def test_generated_proofs_check(self, seed, system):
        """Test: generated proofs check in the system they were built for."""
        proof = gen_hilbert_proof(seed, system=system)
        self.assertTrue(check_hilbert(system, proof).ok)


class TestDeduction(unittest.TestCase):
    """Test the deduction transformation and its inverse."""

    def test_discharge_modus_ponens(self):
        """Test: discharging P from P, P -> Q |- Q gives P -> Q |- P -> Q."""
        proof = _proof('hilbert HI proof of "Q" from "P, P -> Q"\n1. hyp "P"\n2. hyp "P -> Q"\n3. mp 2 1')
        result = deduction_intro(proof)
        self.assertEqual(result.conclusion, Imp(P, Q))
        self.assertEqual(result.hyps, (Imp(P, Q),))
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_discharge_named_hypothesis(self):
        """Test: the second hypothesis can be discharged instead of the first."""
        proof = _proof('hilbert HI proof of "Q" from "P, P -> Q"\n1. hyp "P"\n2. hyp "P -> Q"\n3. mp 2 1')
        result = deduction_intro(proof, Imp(P, Q))
        self.assertEqual(result.hyps, (P,))
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_generalization_under_discharged_antecedent(self):
        """Test: a generalization whose antecedent is the discharged formula commutes."""
        proof = _proof(
            'hilbert HI proof of "Q -> all ?x. Q" from "Q"\n'
            '1. hyp "Q"\n'
            '2. axiom K "Q -> (Q -> Q)"\n'
            "3. mp 2 1\n"
            "4. gen1 3 ?x"
        )
        self.assertTrue(check_hilbert("HI", proof).ok)
        result = deduction_intro(proof)
        self.assertEqual(result.hyps, ())
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_generalization_of_closed_consequent(self):
        """Test: Q -> all ?x. P built from the hypothesis P discharges into a checking proof."""
        proof = _proof(
            'hilbert HI proof of "Q -> all ?x. P" from "P"\n'
            '1. hyp "P"\n'
            '2. axiom K "P -> (Q -> P)"\n'
            "3. mp 2 1\n"
            "4. gen1 3 ?x"
        )
        self.assertTrue(check_hilbert("HI", proof).ok)
        result = deduction_intro(proof)
        self.assertEqual(result.hyps, ())
        self.assertEqual(result.conclusion, parse_formula("P -> (Q -> all ?x. P)"))
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_generalization_under_remaining_hypothesis(self):
        """Test: a dependent generalization under an antecedent that is still a hypothesis commutes."""
        proof = _proof(_UNDER_T.replace('from "Q"', 'from "Q, T"'))
        self.assertTrue(check_hilbert("HI", proof).ok)
        result = deduction_intro(proof)
        self.assertEqual(result.hyps, (Atom(Pred("T", 0)),))
        self.assertEqual(result.conclusion, parse_formula("Q -> (T -> all ?x. (R(?x) -> Q))"))
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_generalization_needing_quantifier_shift(self):
        """Test: a dependent generalization over a free consequent under an unproved antecedent raises."""
        proof = _proof(_UNDER_T)
        self.assertTrue(check_hilbert("HI", proof).ok)
        with self.assertRaises(TransformError):
            deduction_intro(proof)

    def test_nothing_to_discharge(self):
        """Test: a proof without hypotheses raises TransformError."""
        with self.assertRaises(TransformError):
            deduction_intro(identity_proof(P))

    def test_elimination(self):
        """Test: P -> P becomes P |- P."""
        result = deduction_elim(identity_proof(P))
        self.assertEqual((result.hyps, result.conclusion), ((P,), P))
        self.assertTrue(check_hilbert("HI", result).ok)

    def test_elimination_needs_implication(self):
        """Test: a conclusion that is not an implication raises TransformError."""
        proof = _proof('hilbert HI proof of "P" from "P"\n1. hyp "P"')
        with self.assertRaises(TransformError):
            deduction_elim(proof)

    def test_intro_after_elim(self):
        """Test: eliminating then discharging again proves the original conclusion."""
        for name, proof in _corpus("HI"):
            if not isinstance(expand(proof.conclusion), Imp) or proof.hyps:
                continue
            with self.subTest(name=name):
                again = deduction_intro(deduction_elim(proof))
                self.assertEqual(expand(again.conclusion), expand(proof.conclusion))
                self.assertTrue(check_hilbert("HI", again).ok)


class TestEigenRenaming(unittest.TestCase):
    """Test replacing eigen symbols by variables."""

    def test_constant_to_variable(self):
        """Test: R($e1) -> R($e1) renames to R(?x) -> R(?x)."""
        e = Atom(R, (Const("$e1"),))
        renamed = rename_eigen(identity_proof(e), Const("$e1"), x)
        self.assertEqual(renamed.conclusion, Imp(Atom(R, (x,)), Atom(R, (x,))))
        self.assertTrue(check_hilbert("HI", renamed).ok)

    def test_predicate_to_variable(self):
        """Test: an eigen predicate renames to a predicate variable."""
        e = Atom(Pred("$E1", 0))
        renamed = rename_eigen(identity_proof(e), Pred("$E1", 0), PVar("?X", 0))
        X = Atom(PVar("?X", 0))
        self.assertEqual(renamed.conclusion, Imp(X, X))

    def test_eigen_in_hypotheses(self):
        """Test: renaming a constant that occurs in a hypothesis raises FreshnessError."""
        proof = deduction_elim(identity_proof(Atom(R, (Const("$e1"),))))
        with self.assertRaises(FreshnessError):
            rename_eigen(proof, Const("$e1"), x)

    def test_variable_free_in_hypotheses(self):
        """Test: the new variable must not be free in a hypothesis."""
        base = identity_proof(Atom(R, (Const("$e1"),)))
        proof = HilbertProof("HI", (Atom(R, (x,)),), base.steps, base.conclusion)
        with self.assertRaises(FreshnessError):
            rename_eigen(proof, Const("$e1"), x)

    def test_capture(self):
        """Test: renaming under a binder for the same variable raises FreshnessError."""
        phi = ForallI(x, Atom(S2, (Const("$e1"), x)))
        with self.assertRaises(FreshnessError):
            rename_eigen(identity_proof(phi), Const("$e1"), x)


class TestGeneratedTransformations(unittest.TestCase):
    """Test the transformations on generated proofs."""

    def assert_transforms(self, proof):
        system = proof.system
        if proof.hyps:
            try:
                intro = deduction_intro(proof)
            except TransformError:
                self.assertTrue(_shifted_generalization(proof, proof.hyps[0]))
                intro = None
            if intro is not None:
                self.assertTrue(check_hilbert(system, intro).ok)
                self.assertEqual(expand(intro.conclusion), expand(Imp(proof.hyps[0], proof.conclusion)))
                self.assertNotIn(expand(proof.hyps[0]), {expand(h) for h in intro.hyps})
                back = deduction_elim(intro)
                self.assertTrue(check_hilbert(system, back).ok)
                self.assertEqual({expand(h) for h in back.hyps}, {expand(h) for h in proof.hyps})
                self.assertEqual(expand(back.conclusion), expand(proof.conclusion))
        elif isinstance(expand(proof.conclusion), Imp):
            try:
                back = deduction_elim(proof)
            except TransformError:
                self.assertTrue(_generalizes_over(proof, expand(proof.conclusion).left))
            else:
                self.assertTrue(check_hilbert(system, back).ok)
        self.assertEqual(rename_eigen(proof, Const("$e9"), Var("?z")), proof)

    @exhaustive
    def test_generated_round_trips_exhaustive(self):
        """Test: a thousand generated proofs survive discharge, elimination and an idle renaming."""
        for seed in range(1000):
            system = ("HI", "HC")[seed % 2]
            with self.subTest(seed=seed, system=system):
                self.assert_transforms(gen_hilbert_proof(seed, system=system))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=2**30), st.sampled_from(["HI", "HC"]))
    def test_generated_round_trips(self, seed, system):
        """Test: generated proofs survive discharge, elimination and an idle renaming."""
        self.assert_transforms(gen_hilbert_proof(seed, system=system))

    def test_elimination_blocked_by_generalization(self):
        """Test: eliminating an antecedent whose free variable is generalized raises TransformError."""
        proof = _proof(
            'hilbert HI proof of "R(?x) -> (Q -> all ?x. (Q -> Q))"\n'
            "1. axiom K \"(Q -> all ?x. (Q -> Q)) -> (R(?x) -> (Q -> all ?x. (Q -> Q)))\"\n"
            '2. axiom K "Q -> (Q -> Q)"\n'
            "3. gen1 2 ?x\n"
            "4. mp 1 3"
        )
        self.assertTrue(check_hilbert("HI", proof).ok)
        with self.assertRaises(TransformError):
            deduction_elim(proof)


class TestSearch(unittest.TestCase):
    """Test bounded proof search."""

    def test_identity_needs_five_steps(self):
        """Test: P -> P is found within 5 steps and not within 4."""
        self.assertIsInstance(search("HI", [], Imp(P, P), 4), NotFound)
        proof = search("HI", [], Imp(P, P), 5)
        self.assertTrue(check_hilbert("HI", proof).ok)

    def test_modus_ponens_from_hypotheses(self):
        """Test: Q from P and P -> Q takes three steps."""
        proof = search("HI", [P, Imp(P, Q)], Q, 3)
        self.assertEqual(proof.hyps, (P, Imp(P, Q)))
        self.assertTrue(check_hilbert("HI", proof).ok)

    def test_classical_search(self):
        """Test: ~~P -> P is a DNE instance in HC."""
        goal = parse_formula("~~P -> P")
        proof = search("HC", [], goal, 2)
        self.assertEqual(proof.conclusion, goal)
        self.assertTrue(check_hilbert("HC", proof).ok)

    def test_intuitionistic_search_is_bounded_evidence(self):
        """Test: HI finds no proof of ~~P -> P and says so only for the bound."""
        result = search("HI", [], Imp(neg(neg(P)), P), 4)
        self.assertEqual(result, NotFound(4))
        self.assertEqual(str(result), "NotFound: no proof within 4 step(s) (bounded evidence only)")

    def test_generalization_search(self):
        """Test: Q -> all ?x. (Q -> Q) is found through a generalization step."""
        proof = search("HI", [], parse_formula("Q -> all ?x. (Q -> Q)"), 6)
        self.assertTrue(check_hilbert("HI", proof).ok)

    def test_depth_must_be_positive(self):
        """Test: depth 0 is a ValueError."""
        with self.assertRaises(ValueError):
            search("HI", [], P, 0)

    @exhaustive
    def test_intuitionistic_search_exhaustive(self):
        """Test: no HI proof of ~~P -> P within 8 steps."""
        self.assertIsInstance(search("HI", [], Imp(neg(neg(P)), P), 8), NotFound)


if __name__ == "__main__":
    unittest.main()
