from django.test import SimpleTestCase

from core.exceptions import InconsistentFixing, MissingBounds, UnknownLine, ValidationError
from core.models import Instance, baseline_instance
from core.utils.samples import load_sample
from ots.formulation import builders
from ots.formulation.bounds import Bounds, CostCap, LineBounds, RelaxationSpec
from ots.formulation.builders import Target, build_bounding, build_dcopf_fixed, build_ots
from ots.milp.backend import solve
from ots.milp.model import Sense, SolveControls, SolveStatus
from ots.tighten.services.pipeline import initial_bounds


CONTROLS = SolveControls(time_limit=30, rel_gap=0.0)


class TestBounds(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')
        self.bounds = initial_bounds(self.net)

    def test_initial_bounds_of_triangle(self):
        for line_id in self.net.line_ids:
            self.assertEqual(self.bounds[line_id], LineBounds(-40.0, 40.0, -80.0, 80.0))

    def test_initial_bounds_of_path(self):
        self.assertEqual(initial_bounds(load_sample('path5'))[2].m_hi, 300.0)

    def test_missing_line(self):
        partial = Bounds({1: self.bounds[1]})
        with self.assertRaises(MissingBounds):
            partial[2]
        with self.assertRaises(MissingBounds):
            partial.covers(self.net)

    def test_bounds_outside_thermal_limits(self):
        with self.assertRaisesMessage(ValidationError, 'line 1'):
            self.bounds.updated(1, f_hi=60.0).validate(self.net)

    def test_strictly_positive_flow_bound_is_valid(self):
        self.bounds.updated(1, f_lo=20.0).validate(self.net)

    def test_updated_leaves_original(self):
        self.bounds.updated(3, m_hi=10.0)
        self.assertEqual(self.bounds[3].m_hi, 80.0)

    def test_fixing_twice(self):
        relax = RelaxationSpec.all_relaxed({1: 0})
        self.assertEqual(relax.with_fixed(1, 0).fixed, {1: 0})
        with self.assertRaises(InconsistentFixing):
            relax.with_fixed(1, 1)

    def test_fixing_value_checked(self):
        with self.assertRaises(InconsistentFixing):
            RelaxationSpec.all_relaxed({1: 2})

    def test_unknown_line_in_relaxation(self):
        with self.assertRaises(UnknownLine):
            RelaxationSpec.around([7]).validate(self.net)


class TestOtsModel(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')
        self.inst = baseline_instance(self.net)
        self.bounds = initial_bounds(self.net)

    def test_variable_and_constraint_names(self):
        m = build_ots(self.net, self.inst, self.bounds, RelaxationSpec.all_binary(self.net))
        self.assertEqual(m.binary_names, ('x_1', 'x_2', 'x_3'))
        for name in ('kirchhoff_1', 'balance_2', 'bigm_lo_3', 'bigm_hi_3', 'flow_lo_2', 'flow_hi_2'):
            m.constraint(name)
        self.assertEqual(m.variable('theta_1').ub, 0.0)

    def test_exact_optimum(self):
        outcome = solve(build_ots(self.net, self.inst, self.bounds, RelaxationSpec.all_binary(self.net)), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(outcome.objective, 50.0, places=5)

    def test_relaxation_is_a_lower_bound(self):
        outcome = solve(build_ots(self.net, self.inst, self.bounds, RelaxationSpec.all_relaxed()), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertLessEqual(outcome.objective, 50.0 + 1e-6)

    def test_relaxed_model_has_no_binaries(self):
        m = build_ots(self.net, self.inst, self.bounds, RelaxationSpec.around([2]))
        self.assertEqual(m.binary_names, ('x_2',))

    def test_fixed_status(self):
        m = build_ots(self.net, self.inst, self.bounds, RelaxationSpec.all_binary(self.net, {3: 0}))
        outcome = solve(m, CONTROLS)
        self.assertAlmostEqual(outcome.objective, 140.0, places=5)
        self.assertAlmostEqual(outcome.value('x_3'), 0.0)

    def test_cost_cap_constraint(self):
        m = build_ots(self.net, self.inst, self.bounds, RelaxationSpec.all_binary(self.net), CostCap(40.0))
        self.assertEqual(solve(m, CONTROLS).status, SolveStatus.INFEASIBLE)

    def test_missing_bounds(self):
        with self.assertRaises(MissingBounds):
            build_ots(self.net, self.inst, Bounds({1: self.bounds[1]}), RelaxationSpec.all_relaxed())


class TestBoundingModel(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('two_bus')
        self.inst = Instance('two_bus', (0.0, 10.0))
        self.bounds = Bounds({1: LineBounds(-60.0, 60.0, -25.0, 25.0)})
        self.cap = CostCap(1e6, 'incumbent')

    def test_dummy_flow_maximum_is_big_m(self):
        m = build_bounding(self.net, self.inst, self.bounds, 1, Target.DUMMY, Sense.MAX,
                           RelaxationSpec.all_binary(self.net), self.cap)
        outcome = solve(m, CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(outcome.objective, 25.0, places=5)
        self.assertEqual(m.variable('x_1').lb, 0.0)
        self.assertEqual(m.variable('x_1').ub, 0.0)

    def test_flow_minimum_serves_demand(self):
        m = build_bounding(self.net, self.inst, self.bounds, 1, Target.FLOW, Sense.MIN,
                           RelaxationSpec.all_binary(self.net), self.cap)
        outcome = solve(m, CONTROLS)
        self.assertAlmostEqual(outcome.objective, 0.0, places=5)

    def test_cap_required(self):
        with self.assertRaises(ValidationError):
            build_bounding(self.net, self.inst, self.bounds, 1, Target.FLOW, Sense.MAX,
                           RelaxationSpec.all_binary(self.net), CostCap())

    def test_pinned_to_other_side(self):
        with self.assertRaises(InconsistentFixing):
            build_bounding(self.net, self.inst, self.bounds, 1, Target.DUMMY, Sense.MIN,
                           RelaxationSpec.all_binary(self.net, {1: 1}), self.cap)


class TestDcopf(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')
        self.inst = baseline_instance(self.net)

    def test_all_closed(self):
        outcome = solve(build_dcopf_fixed(self.net, self.inst, (1, 1, 1)), CONTROLS)
        self.assertEqual(outcome.status, SolveStatus.OPTIMAL)
        self.assertAlmostEqual(outcome.objective, 50.0, places=5)
        self.assertAlmostEqual(outcome.value(builders.f(1)), 100.0 / 3.0, places=4)

    def test_all_open(self):
        self.assertEqual(solve(build_dcopf_fixed(self.net, self.inst, (0, 0, 0)), CONTROLS).status,
                         SolveStatus.INFEASIBLE)

    def test_redispatch_when_a_line_opens(self):
        outcome = solve(build_dcopf_fixed(self.net, self.inst, {1: 1, 2: 1, 3: 0}), CONTROLS)
        self.assertAlmostEqual(outcome.objective, 140.0, places=5)

    def test_no_big_m_rows(self):
        m = build_dcopf_fixed(self.net, self.inst, (1, 0, 1))
        self.assertFalse(m.is_mip)
        self.assertEqual(m.variable('f_2').ub, 0.0)
        with self.assertRaises(KeyError):
            m.constraint('kirchhoff_2')

    def test_status_vector_checked(self):
        with self.assertRaises(ValidationError):
            build_dcopf_fixed(self.net, self.inst, (1, 1))
        with self.assertRaises(ValidationError):
            build_dcopf_fixed(self.net, self.inst, (1, 2, 1))
