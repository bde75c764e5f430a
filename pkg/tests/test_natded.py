"""Unit tests for natural deduction checking and the translations to and from Hilbert proofs."""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from app.logic.hilbert import check_hilbert, gen_hilbert_proof, identity_proof
from app.logic.natded import NDProof, check_nd, hilbert_to_nd, nd_to_hilbert, open_hypotheses
from app.logic.parser import parse_hilbert_proof, parse_nd_proof
from app.logic.syntax import Atom, Const, ForallI, Imp, Pred, Var, bottom, expand
from app.logic.utils import get_corpus
from conftest import exhaustive

P = Atom(Pred("P", 0))
Q = Atom(Pred("Q", 0))
x = Var("?x")
Rx = Atom(Pred("R", 1), (x,))


def _corpus(system):
    return [(entry["name"], parse_hilbert_proof(entry["proof"])) for entry in get_corpus(system)]


def _there_and_back(proof):
    """Hilbert to ND and back; returns the tree and the recovered proof."""
    tree = hilbert_to_nd(proof)
    return tree, nd_to_hilbert(tree, {"HI": "NI", "HC": "NC"}[proof.system])


class TestChecker(unittest.TestCase):
    """Test the ND checker on hand-written trees."""

    def test_k_shaped_tree(self):
        """Test: P -> (Q -> P) with a vacuous inner discharge checks."""
        system, tree = parse_nd_proof(
            'nd NI proof\n(impI [u] "P -> (Q -> P)"\n  (impI [v] "Q -> P"\n    (hyp [u] "P")))'
        )
        report = check_nd(system, tree)
        self.assertTrue(report.ok, report.text())
        self.assertEqual(open_hypotheses(tree), ())

    def test_missing_label(self):
        """Test: impI without a discharge label is reported at the root."""
        tree = NDProof("impI", Imp(P, P), (NDProof("hyp", P, (), "u"),))
        report = check_nd("NI", tree)
        self.assertEqual([(i.where, i.message) for i in report.issues], [("root", "impI needs a discharge label")])

    def test_leaf_must_match_antecedent(self):
        """Test: a leaf carrying the discharge label must be the antecedent."""
        tree = NDProof("impI", Imp(P, Q), (NDProof("hyp", Q, (), "u"),), "u")
        self.assertIn("not the antecedent", check_nd("NI", tree).issues[0].message)

    def test_eigenvariable_violation(self):
        """Test: generalizing over a variable free in an open hypothesis fails."""
        tree = NDProof("allI", ForallI(x, Rx), (NDProof("hyp", Rx, (), "u"),), param=x)
        report = check_nd("NI", tree)
        self.assertIn("eigenvariable violation", report.issues[0].message)

    def test_eigenvariable_in_root_assumption(self):
        """Test: generalizing over a variable free in an undischarged leaf elsewhere in the tree fails."""
        text = (
            'nd NI proof\n(impE "all ?x. (Q -> Q)"\n'
            '  (impI [w] "R(?x) -> all ?x. (Q -> Q)"\n'
            '    (allI ?x "all ?x. (Q -> Q)" (impI [u] "Q -> Q" (hyp [u] "Q"))))\n'
            '  (hyp [v] "R(?x)"))'
        )
        system, tree = parse_nd_proof(text)
        self.assertIn("assumption of the derivation", check_nd(system, tree).issues[0].message)
        system, tree = parse_nd_proof(text.replace("R(?x)", "R(a)"))
        self.assertTrue(check_nd(system, tree).ok)
        proof = nd_to_hilbert(tree, system)
        self.assertEqual(proof.hyps, (Atom(Pred("R", 1), (Const("a"),)),))
        self.assertTrue(check_hilbert("HI", proof).ok)

    def test_efq_needs_falsum(self):
        """Test: efq from P is rejected."""
        tree = NDProof("efq", Q, (NDProof("hyp", P, (), "u"),))
        self.assertEqual(check_nd("NI", tree).issues[0].message, "premise is not bot")

    def test_premise_count(self):
        """Test: impE with one premise is rejected."""
        tree = NDProof("impE", Q, (NDProof("hyp", Imp(P, Q), (), "u"),))
        self.assertIn("takes 2 premise(s)", check_nd("NI", tree).issues[0].message)

    def test_dne_only_classical(self):
        """Test: the dne rule checks in NC and is rejected in NI."""
        notnot = Imp(Imp(P, bottom()), bottom())
        tree = NDProof("impI", Imp(notnot, P), (NDProof("dne", P, (NDProof("hyp", notnot, (), "u"),)),), "u")
        self.assertTrue(check_nd("NC", tree).ok)
        self.assertEqual(check_nd("NI", tree).issues[0].message, "DNE not in NI")

    def test_open_hypotheses(self):
        """Test: a discharged leaf is not open; an undischarged one is."""
        inner = NDProof("impE", Q, (NDProof("hyp", Imp(P, Q), (), "v"), NDProof("hyp", P, (), "u")))
        tree = NDProof("impI", Imp(P, Q), (inner,), "u")
        self.assertEqual(open_hypotheses(tree), (Imp(P, Q),))
        self.assertTrue(check_nd("NI", tree).ok)

    def test_unknown_system(self):
        """Test: only NI and NC are ND systems."""
        with self.assertRaises(ValueError):
            check_nd("HI", NDProof("hyp", P))


class TestTranslations(unittest.TestCase):
    """Test both translations on the corpus and on generated proofs."""

    def test_corpus_to_nd(self):
        """Test: every corpus proof becomes a checking tree in the paired system."""
        for system, paired in (("HI", "NI"), ("HC", "NC")):
            for name, proof in _corpus(system):
                with self.subTest(name=name):
                    tree = hilbert_to_nd(proof)
                    self.assertTrue(check_nd(paired, tree).ok)
                    self.assertEqual(expand(tree.conclusion), expand(proof.conclusion))
                    self.assertLessEqual(set(open_hypotheses(tree)), {expand(h) for h in proof.hyps})

    def test_corpus_round_trip(self):
        """Test: the translated trees translate back into checking Hilbert proofs."""
        for system in ("HI", "HC"):
            for name, proof in _corpus(system):
                with self.subTest(name=name):
                    _, back = _there_and_back(proof)
                    self.assertEqual(back.system, system)
                    self.assertTrue(check_hilbert(system, back).ok)
                    self.assertEqual(expand(back.conclusion), expand(proof.conclusion))

    def test_classical_tree_fails_intuitionistic_check(self):
        """Test: the classical corpus translates to trees NI rejects."""
        for name, proof in _corpus("HC"):
            with self.subTest(name=name):
                self.assertFalse(check_nd("NI", hilbert_to_nd(proof)).ok)

    def test_identity_tree(self):
        """Test: the identity proof becomes a tree with no open hypotheses."""
        tree = hilbert_to_nd(identity_proof(P))
        self.assertEqual(open_hypotheses(tree), ())
        self.assertEqual(tree.conclusion, Imp(P, P))

    def test_explicit_target_system(self):
        """Test: naming the Hilbert source system picks the paired ND system."""
        proof = identity_proof(P, "HC")
        self.assertTrue(check_nd("NC", hilbert_to_nd(proof, "HC")).ok)

    def test_discharge_over_generalization(self):
        """Test: discharging a hypothesis the generalized subproof uses translates to a closed proof."""
        system, tree = parse_nd_proof(
            'nd NI proof\n(impI [u] "Q -> all ?x. (R(?x) -> Q)"\n'
            '  (allI ?x "all ?x. (R(?x) -> Q)" (impI [v] "R(?x) -> Q" (hyp [u] "Q"))))'
        )
        self.assertTrue(check_nd(system, tree).ok)
        proof = nd_to_hilbert(tree, system)
        self.assertEqual(proof.hyps, ())
        self.assertEqual(expand(proof.conclusion), expand(tree.conclusion))
        self.assertTrue(check_hilbert("HI", proof).ok)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=2**30), st.sampled_from(["HI", "HC"]))
    def test_generated_round_trip(self, seed, system):
        """Test: generated proofs survive the trip to ND and back."""
        proof = gen_hilbert_proof(seed, length=6, system=system)
        tree, back = _there_and_back(proof)
        self.assertEqual(expand(tree.conclusion), expand(proof.conclusion))
        self.assertTrue(check_hilbert(system, back).ok)

    @exhaustive
    def test_generated_round_trip_exhaustive(self):
        """Test: 250 generated proofs in each system survive the trip to ND and back."""
        for system in ("HI", "HC"):
            for seed in range(250):
                with self.subTest(system=system, seed=seed):
                    _, back = _there_and_back(gen_hilbert_proof(seed, system=system))
                    self.assertTrue(check_hilbert(system, back).ok)


if __name__ == "__main__":
    unittest.main()
