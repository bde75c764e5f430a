"""Unit tests for atomic bases and the two derivability engines."""

import random
import unittest

from hypothesis import given, settings
from hypothesis import strategies as st

from app.logic.atomic import (
    AtomicRule,
    Derivable,
    DerivationTrace,
    NotDerivable,
    Premise,
    TopDown,
    Unknown,
    atom_slice,
    check_trace,
    derive,
    gen_base,
    trace_lines,
)
from app.logic.errors import OpenAtomError
from app.logic.syntax import Atom, Const, Pred, PVar, Var
from app.logic.utils import get_base
from conftest import exhaustive


def _atom(name, *args):
    return Atom(Pred(name, len(args)), tuple(Const(a) for a in args))


A, B, C = _atom("A"), _atom("B"), _atom("C")
H, M = _atom("H", "s"), _atom("M", "s")
V, Fe, Fo = _atom("V", "t"), _atom("Fe", "t"), _atom("Fo", "t")

seeds = st.integers(min_value=0, max_value=2**30)


def _engines_agree(seed, queries=6):
    """Saturation and unbounded top-down search agree, and both traces check."""
    base, pool = gen_base(seed)
    rng = random.Random(seed)
    for _ in range(queries):
        hyps = frozenset(rng.sample(pool, rng.randint(0, 2)))
        goal = rng.choice(pool)
        complete = derive(base, hyps, goal)
        searched = derive(base, hyps, goal, TopDown())
        if isinstance(complete, Derivable) != isinstance(searched, Derivable):
            return False
        for verdict in (complete, searched):
            if isinstance(verdict, Derivable) and not check_trace(base, verdict.trace):
                return False
    return True


def _monotone(seed, queries=6):
    """Derivations survive a larger base and extra hypotheses."""
    base, pool = gen_base(seed)
    extra, _ = gen_base(seed + 1, rules=4)
    bigger = base.union(extra.rules)
    rng = random.Random(seed)
    for _ in range(queries):
        hyps = frozenset(rng.sample(pool, rng.randint(0, 2)))
        goal = rng.choice(pool)
        if not isinstance(derive(base, hyps, goal), Derivable):
            continue
        more = hyps | {rng.choice(pool)}
        if not isinstance(derive(bigger, hyps, goal), Derivable):
            return False
        if not isinstance(derive(base, more, goal), Derivable):
            return False
    return True


class TestRules(unittest.TestCase):
    """Test rule levels, templates and closedness."""

    def test_levels(self):
        """Test: axioms are level 0, plain rules level 1, discharging rules level 2."""
        self.assertEqual(AtomicRule(A).level(), 0)
        self.assertEqual(AtomicRule(B, (Premise(frozenset(), A),)).level(), 1)
        self.assertEqual(AtomicRule(B, (Premise(frozenset([A]), B),)).level(), 2)

    def test_template_instances(self):
        """Test: B => ?C has one instance per pool atom."""
        template = AtomicRule(Atom(PVar("?C", 0)), (Premise(frozenset(), B),))
        self.assertTrue(template.is_template)
        instances = template.instances([A, B, C])
        self.assertEqual(len(instances), 3)
        self.assertIn(AtomicRule(C, (Premise(frozenset(), B),)), instances)

    def test_rule_atoms_must_be_closed(self):
        """Test: a rule mentioning an individual variable raises OpenAtomError."""
        with self.assertRaises(OpenAtomError):
            AtomicRule(Atom(Pred("R", 1), (Var("?x"),)))

    def test_template_variables_are_nullary(self):
        """Test: a unary predicate variable in a rule raises OpenAtomError."""
        with self.assertRaises(OpenAtomError):
            AtomicRule(Atom(PVar("?Y", 1), (Const("a"),)))

    def test_open_query(self):
        """Test: deriving an open goal raises OpenAtomError."""
        with self.assertRaises(OpenAtomError):
            derive(get_base("aristotle"), [], Atom(Pred("M", 1), (Var("?x"),)))


class TestSaturation(unittest.TestCase):
    """Test the complete decision procedure on the registry bases."""

    def test_aristotle(self):
        """Test: M(s) is derivable from nothing in the aristotle base."""
        base = get_base("aristotle")
        verdict = derive(base, [], M)
        self.assertIsInstance(verdict, Derivable)
        self.assertTrue(check_trace(base, verdict.trace))
        self.assertEqual(
            trace_lines(verdict.trace),
            ["|- M(s)   (app: H(s) => M(s))", "  |- H(s)   (app: => H(s))"],
        )

    def test_tammy(self):
        """Test: the vixen rules run forwards and back but not from one conjunct."""
        base = get_base("tammy")
        self.assertIsInstance(derive(base, [V], Fe), Derivable)
        self.assertIsInstance(derive(base, [Fe, Fo], V), Derivable)
        self.assertIsInstance(derive(base, [Fe], V), NotDerivable)

    def test_hypothesis_is_a_reference(self):
        """Test: a goal among the hypotheses is closed by a reference step."""
        verdict = derive(get_base("tammy"), [Fe], Fe)
        self.assertIsNone(verdict.trace.rule)
        self.assertEqual(verdict.trace.size(), 1)

    def test_counterexample_base(self):
        """Test: neither A nor B is derivable, while B yields every atom."""
        base = get_base("counterexample")
        self.assertIsInstance(derive(base, [], A), NotDerivable)
        self.assertIsInstance(derive(base, [], B), NotDerivable)
        self.assertIsInstance(derive(base, [A], B), NotDerivable)
        verdict = derive(base, [B], C)
        self.assertIsInstance(verdict, Derivable)
        self.assertTrue(check_trace(base, verdict.trace))

    def test_atom_slice(self):
        """Test: the slice of V(t) pulls in both conjuncts."""
        self.assertEqual(atom_slice(get_base("tammy"), [V], Fe), frozenset([V, Fe, Fo]))

    def test_check_trace_rejects_foreign_rule(self):
        """Test: a trace applying a rule outside the base does not check."""
        foreign = AtomicRule(M, (Premise(frozenset(), V),))
        trace = DerivationTrace(frozenset([V]), M, foreign, (DerivationTrace(frozenset([V]), V),))
        self.assertFalse(check_trace(get_base("aristotle"), trace))


class TestTopDown(unittest.TestCase):
    """Test the goal-directed engine and its agreement with saturation."""

    def test_depth_bound(self):
        """Test: M(s) needs two levels of rule applications."""
        base = get_base("aristotle")
        self.assertIsInstance(derive(base, [], M, TopDown(depth=1)), Unknown)
        self.assertIsInstance(derive(base, [], M, TopDown(depth=2)), Derivable)

    def test_no_negative_answers(self):
        """Test: a failed search reports Unknown, never NotDerivable."""
        verdict = derive(get_base("counterexample"), [], A, TopDown())
        self.assertIsInstance(verdict, Unknown)

    def test_generator_is_deterministic(self):
        """Test: equal seeds give equal bases."""
        self.assertEqual(gen_base(11), gen_base(11))

    def test_level_cap(self):
        """Test: max_level=1 bases have no discharging rules."""
        base, _ = gen_base(3, max_level=1)
        self.assertTrue(all(rule.level() <= 1 for rule in base.rules))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_engines_agree(self, seed):
        """Test: both engines find a derivation for the same queries."""
        self.assertTrue(_engines_agree(seed))

    @exhaustive
    def test_engines_agree_exhaustive(self):
        """Test: agreement on 500 seeded bases."""
        for seed in range(500):
            with self.subTest(seed=seed):
                self.assertTrue(_engines_agree(seed, queries=10))

    @settings(max_examples=40, deadline=None)
    @given(seeds)
    def test_derivability_is_monotone(self, seed):
        """Test: adding rules or hypotheses keeps a derivable atom derivable."""
        self.assertTrue(_monotone(seed))

    @exhaustive
    def test_derivability_is_monotone_exhaustive(self):
        """Test: monotonicity on 500 seeded bases."""
        for seed in range(500):
            with self.subTest(seed=seed):
                self.assertTrue(_monotone(seed, queries=10))


if __name__ == "__main__":
    unittest.main()
