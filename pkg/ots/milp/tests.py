import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from core.exceptions import ValidationError
from ots.milp.backend import get_backend, solve
from ots.milp.model import (
    Integrality, ModelBuilder, Relation, Sense, SolveControls, SolveStatus,
)


CONTROLS = SolveControls(time_limit=30, rel_gap=0.0)


def knapsack(sense=Sense.MAX):
    builder = ModelBuilder('knapsack')
    for name in ('a', 'b', 'c'):
        builder.add_variable(name, 0, 1, Integrality.BINARY)
    builder.add_constraint('weight', {'a': 4, 'b': 3, 'c': 2}, Relation.LE, 5)
    builder.set_objective(sense, {'a': 5, 'b': 4, 'c': 3})
    return builder.build()


class TestModelSpec(SimpleTestCase):

    def test_undeclared_variable_rejected(self):
        builder = ModelBuilder('bad')
        builder.add_variable('y')
        builder.add_constraint('c', {'z': 1.0}, Relation.LE, 1)
        with self.assertRaisesMessage(ValidationError, 'undeclared'):
            builder.build()

    def test_inverted_bounds_rejected(self):
        builder = ModelBuilder('bad')
        builder.add_variable('y', 2.0, 1.0)
        with self.assertRaises(ValidationError):
            builder.build()

    def test_zero_coefficients_dropped(self):
        builder = ModelBuilder('m')
        builder.add_variable('y')
        builder.add_variable('z')
        builder.add_constraint('c', {'y': 1.0, 'z': 0.0}, Relation.GE, 0)
        self.assertEqual(dict(builder.build().constraint('c').coefficients), {'y': 1.0})

    def test_relaxed_keeps_selected_binaries(self):
        m = knapsack().relaxed(keep_binary=['a'])
        self.assertEqual(m.binary_names, ('a',))
        self.assertTrue(knapsack().is_mip)
        self.assertFalse(knapsack().relaxed().is_mip)

    def test_fixed_pins_bounds(self):
        var = knapsack().fixed({'b': 1.0}).variable('b')
        self.assertEqual((var.lb, var.ub), (1.0, 1.0))

    def test_controls_validated(self):
        with self.assertRaises(ValidationError):
            SolveControls(time_limit=0)
        with self.assertRaises(ValidationError):
            SolveControls(time_limit=1, rel_gap=-1)


class TestCbcBackend(SimpleTestCase):

    def test_maximization(self):
        outcome = solve(knapsack(), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(outcome.objective, 7.0)
        self.assertAlmostEqual(outcome.dual_bound, 7.0, places=4)
        self.assertEqual(round(outcome.value('b')) + round(outcome.value('c')), 2)

    def test_minimization_of_lp(self):
        builder = ModelBuilder('lp')
        builder.add_variable('y', 0, 10)
        builder.add_constraint('floor', {'y': 1.0}, Relation.GE, 2.5)
        builder.set_objective(Sense.MIN, {'y': 2.0})
        outcome = solve(builder.build(), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(outcome.objective, 5.0)
        self.assertAlmostEqual(outcome.dual_bound, 5.0)

    def test_infeasible(self):
        builder = ModelBuilder('infeasible')
        builder.add_variable('y', 0, 1)
        builder.add_constraint('above', {'y': 1.0}, Relation.GE, 2)
        outcome = solve(builder.build(), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.INFEASIBLE)
        self.assertFalse(outcome.has_primal)

    def test_empty_constraint_violated(self):
        builder = ModelBuilder('empty')
        builder.add_variable('y', 0, 1)
        builder.add_constraint('nothing', {'y': 0.0}, Relation.GE, 1)
        self.assertEqual(solve(builder.build(), CONTROLS).status, SolveStatus.INFEASIBLE)

    def test_unbounded(self):
        builder = ModelBuilder('unbounded')
        builder.add_variable('y', 0, math.inf)
        builder.add_constraint('floor', {'y': 1.0}, Relation.GE, 1)
        builder.set_objective(Sense.MAX, {'y': 1.0})
        self.assertIn(solve(builder.build(), CONTROLS).status, (SolveStatus.UNBOUNDED, SolveStatus.INFEASIBLE))

    def test_identity_names_solver(self):
        self.assertIn('CBC', get_backend().identity())
        self.assertFalse(get_backend().supports_indicators)

    def test_export_writes_lp_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'knapsack.lp'
            get_backend().export(knapsack(), str(path))
            self.assertTrue(path.exists())

    def test_export_rejects_unknown_format(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'knapsack.txt'
            with self.assertRaisesMessage(ValidationError, '.lp or .mps'):
                get_backend().export(knapsack(), str(path))
            self.assertFalse(path.exists())
