"""Unit tests for the text syntax: parsing, printing and their round trip."""

import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from app.logic.atomic import gen_base
from app.logic.errors import ArityMismatch, DanglingReference, ParseError
from app.logic.hilbert import MP, gen_hilbert_proof, identity_proof
from app.logic.natded import hilbert_to_nd
from app.logic.parser import (
    detect_kind,
    parse_base,
    parse_formula,
    parse_formula_list,
    parse_hilbert_proof,
    parse_nd_proof,
    parse_universe,
    print_base,
    print_formula,
    print_hilbert_proof,
    print_nd_proof,
    print_universe,
)
from app.logic.support import Policy
from app.logic.syntax import (
    And,
    Atom,
    Bot,
    Const,
    ForallI,
    ForallP,
    Imp,
    Not,
    Or,
    Pred,
    PVar,
    Var,
    gen_formula,
)
from app.logic.utils import get_universe_text
from conftest import exhaustive

P = Atom(Pred("P", 0))
Q = Atom(Pred("Q", 0))
R = Pred("R", 1)
x = Var("?x")

seeds = st.integers(min_value=0, max_value=2**30)


class TestFormulaSyntax(unittest.TestCase):
    """Test formula parsing precedence and errors."""

    def test_implication_is_right_associative(self):
        """Test: P -> Q -> P reads P -> (Q -> P)."""
        self.assertEqual(parse_formula("P -> Q -> P"), Imp(P, Imp(Q, P)))

    def test_connective_precedence(self):
        """Test: ~ binds tighter than &, which binds tighter than |."""
        self.assertEqual(parse_formula("~P & Q | P"), Or(And(Not(P), Q), P))

    def test_quantifier_scope_extends_right(self):
        """Test: all ?x. R(?x) -> P quantifies the whole implication."""
        phi = parse_formula("all ?x. R(?x) -> P")
        self.assertEqual(phi, ForallI(x, Imp(Atom(R, (x,)), P)))

    def test_unicode_notation(self):
        """Test: the unicode connectives parse like their ASCII forms."""
        self.assertEqual(parse_formula("∀ ?x. R(?x) → ⊥"), ForallI(x, Imp(Atom(R, (x,)), Bot())))
        self.assertEqual(parse_formula("Π ?X:0. ?X"), parse_formula("ALL ?X:0. ?X"))

    def test_second_order_binder(self):
        """Test: ALL ?X:1. ?X(a) binds a unary predicate variable."""
        X1 = PVar("?X", 1)
        self.assertEqual(parse_formula("ALL ?X:1. ?X(a)"), ForallP(X1, Atom(X1, (Const("a"),))))

    def test_syntax_error_carries_span(self):
        """Test: a dangling arrow raises ParseError with a span in the named source."""
        with self.assertRaises(ParseError) as ctx:
            parse_formula("P -> ", source="goal.txt")
        self.assertEqual(ctx.exception.span.file, "goal.txt")
        self.assertIn("goal.txt", str(ctx.exception))

    def test_reserved_names_need_internal(self):
        """Test: $-names are rejected unless internal=True."""
        with self.assertRaises(ParseError):
            parse_formula("$F1 -> P")
        self.assertEqual(parse_formula("$F1", internal=True), Atom(Pred("$F1", 0)))

    def test_predicate_arity_is_consistent(self):
        """Test: one predicate used with two arities raises ArityMismatch."""
        with self.assertRaises(ArityMismatch):
            parse_formula("R(a) -> R(a, b)")

    def test_predicate_variable_arity_is_consistent(self):
        """Test: a predicate variable bound at arity 0 but applied to a term is rejected."""
        with self.assertRaises(ArityMismatch):
            parse_formula("ALL ?X:0. ?X(a)")

    def test_formula_list(self):
        """Test: comma-separated lists, including the empty list."""
        self.assertEqual(parse_formula_list(""), ())
        self.assertEqual(parse_formula_list("P, P -> Q"), (P, Imp(P, Q)))

    def test_printer_parenthesizes_left_implications(self):
        """Test: (P -> Q) -> P prints with parentheses on the left only."""
        self.assertEqual(print_formula(Imp(Imp(P, Q), P)), "(P -> Q) -> P")
        self.assertEqual(print_formula(Imp(ForallI(x, Atom(R, (x,))), P)), "(all ?x. R(?x)) -> P")

    def test_detect_kind(self):
        """Test: the first keyword decides the object kind."""
        self.assertEqual(detect_kind("# comment\nbase b { }"), "base")
        self.assertEqual(detect_kind("hilbert HI proof of \"P\""), "hilbert")
        self.assertEqual(detect_kind("P -> P"), "formula")


class TestBaseSyntax(unittest.TestCase):
    """Test bases, universes and rule templates."""

    def test_aristotle_base(self):
        """Test: a zero-level and a first-level rule."""
        base = parse_base("base aristotle {\n  => H(s)\n  H(s) => M(s)\n}")
        self.assertEqual(base.name, "aristotle")
        self.assertEqual(sorted(rule.level() for rule in base.rules), [0, 1])

    def test_discharge_premise_and_template(self):
        """Test: ([A] => B) => B is second-level and B => ?C is a template."""
        base = parse_base("base c {\n  ([A] => B) => B\n  B => ?C\n  slice A, B, C\n}")
        levels = {rule.is_template: rule.level() for rule in base.rules}
        self.assertEqual(levels, {False: 2, True: 1})
        self.assertEqual(len(base.slice), 3)

    def test_universe_with_named_base(self):
        """Test: the counterexample universe carries its units, slice and base."""
        universe, bases = parse_universe(get_universe_text("dne"))
        self.assertEqual(universe.name, "dne")
        self.assertEqual(len(universe.units), 4)
        self.assertEqual(universe.policy, Policy.I)
        self.assertEqual(universe.budget, 1)
        self.assertIn("counterexample", bases)

    def test_universe_defaults(self):
        """Test: an anonymous universe gets the default name, budget and policy."""
        universe, bases = parse_universe("universe { rules { => P } }")
        self.assertEqual((universe.name, universe.budget, universe.policy), ("universe", 1, Policy.I))
        self.assertIsNone(universe.depth)
        self.assertEqual(bases, {})

    def test_unknown_policy(self):
        """Test: only policies I and C are accepted."""
        with self.assertRaises(ParseError):
            parse_universe("universe { policy X }")

    def test_universe_round_trip(self):
        """Test: print then parse reproduces a universe and its bases."""
        universe, bases = parse_universe(get_universe_text("dne"))
        again = parse_universe(print_universe(universe, bases.values()))
        self.assertEqual(again, (universe, bases))


class TestProofScripts(unittest.TestCase):
    """Test Hilbert and ND proof scripts."""

    SCRIPT = (
        'hilbert HI proof of "Q" from "P, P -> Q"\n'
        '1. hyp "P"\n'
        '2. hyp "P -> Q"\n'
        "3. mp 2 1\n"
    )

    def test_omitted_formula_is_computed(self):
        """Test: an MP step without a formula proves the consequent of its major."""
        proof = parse_hilbert_proof(self.SCRIPT)
        self.assertEqual(proof.steps[2].formula, Q)
        self.assertEqual(proof.steps[2].justification, MP(2, 1))
        self.assertEqual(proof.hyps, (P, Imp(P, Q)))

    def test_dangling_reference(self):
        """Test: citing a later step raises DanglingReference."""
        with self.assertRaises(DanglingReference) as ctx:
            parse_hilbert_proof('hilbert HI proof of "P"\n1. mp 2 1 "P"\n')
        self.assertEqual(ctx.exception.cited, 2)

    def test_step_numbers_in_order(self):
        """Test: step numbers must count up from 1."""
        with self.assertRaises(ParseError):
            parse_hilbert_proof('hilbert HI proof of "P"\n2. hyp "P"\n')

    def test_unknown_system(self):
        """Test: Hilbert scripts name HI or HC."""
        with self.assertRaises(ParseError):
            parse_hilbert_proof('hilbert NI proof of "P"\n1. hyp "P"\n')

    def test_slotted_axiom_round_trip(self):
        """Test: an axiom line naming its slots computes the instance and prints the slots back."""
        text = (
            'hilbert HI proof of "(all ?x. R(?x)) -> R(a)"\n'
            '1. axiom AllE phi="R(?x)" var=?x term=a\n'
        )
        proof = parse_hilbert_proof(text)
        self.assertEqual(proof.steps[0].formula, parse_formula("(all ?x. R(?x)) -> R(a)"))
        self.assertIn('1. axiom AllE phi="R(?x)" var=?x term=a', print_hilbert_proof(proof))
        self.assertEqual(parse_hilbert_proof(print_hilbert_proof(proof)), proof)

    def test_missing_slot(self):
        """Test: a slotted axiom line names every slot of its schema."""
        with self.assertRaises(ParseError):
            parse_hilbert_proof('hilbert HI proof of "P -> (Q -> P)"\n1. axiom K phi="P"\n')

    def test_slot_of_the_wrong_kind(self):
        """Test: the var slot of AllE takes an individual variable."""
        with self.assertRaises(ParseError):
            parse_hilbert_proof('hilbert HI proof of "(all ?x. R(?x)) -> R(a)"\n1. axiom AllE phi="R(?x)" var=a term=a\n')

    def test_nd_script(self):
        """Test: an impI node discharging a labelled leaf."""
        system, tree = parse_nd_proof('nd NI proof\n(impI [u] "P -> P"\n  (hyp [u] "P"))')
        self.assertEqual(system, "NI")
        self.assertEqual((tree.rule, tree.label), ("impI", "u"))
        self.assertEqual(tree.premises[0].conclusion, P)

    def test_unknown_nd_rule(self):
        """Test: ND nodes must use a known rule name."""
        with self.assertRaises(ParseError):
            parse_nd_proof('nd NI proof\n(cut "P")')

    def test_nd_round_trip(self):
        """Test: print then parse reproduces a translated ND tree."""
        tree = hilbert_to_nd(identity_proof(P))
        self.assertEqual(parse_nd_proof(print_nd_proof(tree, "NI")), ("NI", tree))


class TestRoundTrip(unittest.TestCase):
    """Test parse after print is the identity."""

    @settings(max_examples=200, deadline=None)
    @given(seeds)
    def test_formula_round_trip(self, seed):
        """Test: parse(print(phi)) == phi for generated formulas with abbreviations."""
        phi = gen_formula(seed, 5, sugar=True)
        self.assertEqual(parse_formula(print_formula(phi)), phi)

    @settings(max_examples=50, deadline=None)
    @given(seeds)
    def test_base_round_trip(self, seed):
        """Test: parse(print(base)) == base for generated bases."""
        base, _ = gen_base(seed, atoms=6, rules=8)
        self.assertEqual(parse_base(print_base(base)), base)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.sampled_from(["HI", "HC"]))
    def test_hilbert_round_trip(self, seed, system):
        """Test: parse(print(proof)) == proof for generated proofs."""
        proof = gen_hilbert_proof(seed, length=6, system=system)
        self.assertEqual(parse_hilbert_proof(print_hilbert_proof(proof)), proof)

    @exhaustive
    def test_round_trip_exhaustive(self):
        """Test: 1000 formulas, 200 bases and 100 proof scripts survive print then parse."""
        for seed in range(1000):
            phi = gen_formula(seed, 6, sugar=True)
            self.assertEqual(parse_formula(print_formula(phi)), phi, seed)
        for seed in range(200):
            base, _ = gen_base(seed, atoms=8, rules=12)
            self.assertEqual(parse_base(print_base(base)), base, seed)
        for seed in range(100):
            proof = gen_hilbert_proof(seed, system="HC" if seed % 2 else "HI")
            self.assertEqual(parse_hilbert_proof(print_hilbert_proof(proof)), proof, seed)


if __name__ == "__main__":
    unittest.main()
