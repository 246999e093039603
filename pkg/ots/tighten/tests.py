import math
import tempfile
from pathlib import Path

from django.test import SimpleTestCase
from hypothesis import given, strategies as st

from core.exceptions import HeuristicError, ParseError, ValidationError
from core.models import Instance, baseline_instance
from core.utils.samples import load_sample
from core.utils.topo import build_line_graph, neighborhood
from ots.formulation.bounds import CostCap, LineBounds, RelaxationSpec
from ots.milp.model import Sense, SolveControls, SolveOutcome, SolveStatus
from ots.oracle.services import brute_force, verify_bounds
from ots.tighten.config import Action, Mode, Propagation, TightenConfig
from ots.tighten.reports import load_report, save_report
from ots.tighten.services.bounding import BoundingService, TighteningState, candidate_bound
from ots.tighten.services.heuristic import HeuristicService
from ots.tighten.services.pipeline import (
    baseline_report, initial_bounds, percent_gap, run_sbt, run_tbt, run_tightening, solve_ots,
)


CONTROLS = SolveControls(time_limit=30, rel_gap=0.0)


def tbt(k, **overrides):
    values = {'per_problem_time_limit': 10, 'heuristic_budget': 10}
    values.update(overrides)
    return TightenConfig.tbt(k, **values)


class TestConfig(SimpleTestCase):

    def test_labels(self):
        self.assertEqual(tbt(2).label, 'TBT-2')
        self.assertEqual(TightenConfig.sbt(25).label, 'SBT-25')
        self.assertEqual(TightenConfig.sbt(0.5).label, 'SBT-0.5')

    def test_sbt_budget_in_seconds(self):
        self.assertEqual(TightenConfig.sbt(250).per_problem_time_limit, 0.25)

    def test_invalid_values(self):
        with self.assertRaises(ValidationError):
            tbt(-1)
        with self.assertRaises(ValidationError):
            TightenConfig(mode=Mode.SBT)
        with self.assertRaises(ValidationError):
            tbt(1, passes=0)

    def test_bounding_problems_solved_to_zero_gap(self):
        self.assertEqual(tbt(1, rel_gap=0.01).problem_controls().rel_gap, 0.0)

    def test_wrong_runner(self):
        net = load_sample('triangle')
        with self.assertRaises(ValidationError):
            run_tbt(net, baseline_instance(net), TightenConfig.sbt(10))
        with self.assertRaises(ValidationError):
            run_sbt(net, baseline_instance(net), tbt(0))


class TestCandidateBound(SimpleTestCase):

    def test_optimal_uses_objective(self):
        self.assertEqual(candidate_bound(SolveOutcome(SolveStatus.OPTIMAL, {}, 12.0, 12.0)), 12.0)

    def test_time_limit_uses_dual_bound(self):
        self.assertEqual(candidate_bound(SolveOutcome(SolveStatus.FEASIBLE_AT_LIMIT, {}, 12.0, 15.0)), 15.0)
        self.assertEqual(candidate_bound(SolveOutcome(SolveStatus.NO_SOLUTION_AT_LIMIT, None, None, 9.0)), 9.0)

    def test_nothing_proven(self):
        self.assertIsNone(candidate_bound(SolveOutcome(SolveStatus.NO_SOLUTION_AT_LIMIT, None, None, math.inf)))
        self.assertIsNone(candidate_bound(SolveOutcome(SolveStatus.INFEASIBLE)))


class TestClamp(SimpleTestCase):

    def setUp(self):
        self.service = BoundingService(CONTROLS, improvement_epsilon=1e-6)
        self.current = LineBounds(-40.0, 40.0, -80.0, 80.0)

    def test_improvement_accepted(self):
        self.assertEqual(self.service.clamp(self.current, 'f_lo', Sense.MIN, 10.0), (10.0, True))
        self.assertEqual(self.service.clamp(self.current, 'm_hi', Sense.MAX, 30.0), (30.0, True))

    def test_tiny_improvement_ignored(self):
        self.assertEqual(self.service.clamp(self.current, 'f_hi', Sense.MAX, 40.0 - 1e-9), (40.0, False))

    def test_clamped_against_opposite_bound(self):
        self.assertEqual(self.service.clamp(self.current, 'f_lo', Sense.MIN, 55.0), (40.0, True))

    @given(candidate=st.floats(min_value=-1e4, max_value=1e4))
    def test_never_widens(self, candidate):
        for attr, sense in (('f_lo', Sense.MIN), ('f_hi', Sense.MAX), ('m_lo', Sense.MIN), ('m_hi', Sense.MAX)):
            value, _ = self.service.clamp(self.current, attr, sense, candidate)
            if sense is Sense.MIN:
                self.assertGreaterEqual(value, getattr(self.current, attr))
            else:
                self.assertLessEqual(value, getattr(self.current, attr))


class TestPercentGap(SimpleTestCase):

    def test_values(self):
        self.assertAlmostEqual(percent_gap(100.0, 90.0), 10.0)
        self.assertEqual(percent_gap(100.0, 101.0), 0.0)
        self.assertEqual(percent_gap(100.0, -math.inf), math.inf)
        self.assertIsNone(percent_gap(None, 5.0))
        self.assertEqual(percent_gap(0.0, 0.0), 0.0)


class TestHeuristic(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')

    def test_incumbent_cap(self):
        cap = HeuristicService().upper_bound_cost(self.net, baseline_instance(self.net), 10)
        self.assertEqual(cap.source, 'incumbent')
        self.assertAlmostEqual(cap.cap, 50.0, places=5)

    def test_fallback_cap(self):
        # Bus 2 can receive at most 80 MW over its two lines.
        inst = Instance('triangle', (0.0, 150.0, 0.0))
        cap = HeuristicService().upper_bound_cost(self.net, inst, 5)
        self.assertEqual(cap, CostCap(1500.0, 'fallback'))

    def test_budget_must_be_positive(self):
        with self.assertRaises(HeuristicError):
            HeuristicService().upper_bound_cost(self.net, baseline_instance(self.net), 0)


class TestBoundingService(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')
        self.inst = baseline_instance(self.net)
        self.state = TighteningState(self.net, self.inst, initial_bounds(self.net), CostCap(50.0, 'incumbent'))
        self.service = BoundingService(CONTROLS)

    def test_open_side_infeasible_fixes_line_closed(self):
        update = self.service.tighten_line(self.state, 2, RelaxationSpec.all_relaxed())
        self.assertEqual(update.fixed, 1)
        self.assertEqual([log.action for log in update.logs[2:]], [Action.INFEASIBLE, Action.INFEASIBLE])
        self.assertEqual(update.bounds.m_hi, 80.0)

    def test_pinned_line_skips_other_side(self):
        state = TighteningState(self.net, self.inst, self.state.bounds, self.state.cap, {1: 1})
        update = self.service.tighten_line(state, 1, RelaxationSpec.all_relaxed())
        self.assertEqual([log.action for log in update.logs[2:]], [Action.SKIPPED_FIXED, Action.SKIPPED_FIXED])
        self.assertIsNone(update.fixed)

    def test_input_bounds_untouched(self):
        self.service.tighten_line(self.state, 1, RelaxationSpec.all_binary(self.net))
        self.assertEqual(self.state.bounds[1], LineBounds(-40.0, 40.0, -80.0, 80.0))


class TestWidthMonotonicity(SimpleTestCase):
    """Keeping more statuses binary never yields a wider candidate on the same inputs."""

    levels = range(4)

    def candidate_widths(self, update):
        values = {}
        for log in update.logs:
            if log.status == SolveStatus.INFEASIBLE.value:
                values[(log.target, log.sense)] = math.inf if log.sense == Sense.MIN.value else -math.inf
            else:
                self.assertEqual(log.status, SolveStatus.OPTIMAL.value)
                values[(log.target, log.sense)] = log.objective
        return {
            target: values[(target, Sense.MAX.value)] - values[(target, Sense.MIN.value)]
            for target in ('flow', 'dummy')
        }

    def check_network(self, name):
        net = load_sample(name)
        inst = baseline_instance(net)
        optimum = brute_force(net, inst).cost
        cap = CostCap(optimum + 1e-6 * max(1.0, abs(optimum)), 'incumbent')
        state = TighteningState(net, inst, initial_bounds(net), cap)
        g = build_line_graph(net)
        service = BoundingService(CONTROLS)
        for line_id in net.line_ids:
            previous = None
            for k in self.levels:
                update = service.tighten_line(state, line_id, RelaxationSpec.around(neighborhood(g, line_id, k)))
                widths = self.candidate_widths(update)
                if previous is not None:
                    for target, width in widths.items():
                        limit = previous[target]
                        if math.isfinite(limit):
                            limit += 1e-6 * max(1.0, abs(limit))
                        self.assertLessEqual(width, limit, msg=f'{name} line {line_id} {target} k={k}')
                previous = widths

    def test_five_bus(self):
        self.check_network('five_bus')

    def test_six_bus(self):
        self.check_network('six_bus')


class TestPipeline(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.net = load_sample('triangle')
        cls.inst = baseline_instance(cls.net)

    def test_tbt_zero(self):
        report = run_tbt(self.net, self.inst, tbt(0))
        self.assertAlmostEqual(report.cap.cap, 50.0, places=5)
        self.assertEqual(report.fixed_lines, {1: 1, 2: 1, 3: 1})
        self.assertEqual(report.approach, 'TBT-0')
        b = report.bounds[1]
        self.assertGreaterEqual(b.f_lo, 10.0 - 1e-6)
        self.assertLessEqual(b.f_lo, 100.0 / 3.0 + 1e-6)
        self.assertGreaterEqual(b.f_hi, 100.0 / 3.0 - 1e-6)
        self.assertGreater(report.t_bound, report.t_heuristic)
        self.assertEqual(len(report.per_line_log), 12)
        self.assertIsNone(verify_bounds(self.net, self.inst, report.bounds, report.cap))

    def test_tbt_one_is_exact_on_triangle(self):
        report = run_tbt(self.net, self.inst, tbt(1))
        self.assertAlmostEqual(report.bounds[1].f_lo, 100.0 / 3.0, places=3)
        self.assertAlmostEqual(report.bounds[1].f_hi, 100.0 / 3.0, places=3)

    def test_bounds_only_shrink(self):
        report = run_tbt(self.net, self.inst, tbt(1, passes=2))
        for line_id in self.net.line_ids:
            before, after = report.bounds0[line_id], report.bounds[line_id]
            self.assertGreaterEqual(after.f_lo, before.f_lo)
            self.assertLessEqual(after.f_hi, before.f_hi)
            self.assertGreaterEqual(after.m_lo, before.m_lo)
            self.assertLessEqual(after.m_hi, before.m_hi)

    def test_batch_propagation(self):
        cfg = tbt(1, jobs=3).with_propagation(Propagation.BATCH)
        report = run_tightening(self.net, self.inst, cfg)
        self.assertEqual(report.fixed_lines, {1: 1, 2: 1, 3: 1})
        self.assertIsNone(verify_bounds(self.net, self.inst, report.bounds, report.cap))

    def test_sbt(self):
        report = run_sbt(self.net, self.inst, TightenConfig.sbt(5000, heuristic_budget=10))
        self.assertEqual(report.approach, 'SBT-5000')
        self.assertIsNone(verify_bounds(self.net, self.inst, report.bounds, report.cap))

    def test_solve_after_tightening(self):
        report = run_tbt(self.net, self.inst, tbt(0))
        solution = solve_ots(self.net, self.inst, report, CONTROLS)
        self.assertEqual(solution.status, SolveStatus.OPTIMAL.value)
        self.assertAlmostEqual(solution.cost, 50.0, places=5)
        self.assertEqual(solution.x, {1: 1, 2: 1, 3: 1})
        self.assertAlmostEqual(sum(solution.dispatch.values()), 50.0, places=5)

    def test_baseline_report(self):
        report = baseline_report(self.net, self.inst)
        self.assertEqual((report.approach, report.t_bound, report.fixed_lines), ('MIP', 0.0, {}))
        self.assertFalse(report.cap.present)
        self.assertAlmostEqual(solve_ots(self.net, self.inst, report, CONTROLS).cost, 50.0, places=5)

    def test_baseline_on_two_bus(self):
        net = load_sample('two_bus')
        solution = solve_ots(net, baseline_instance(net), baseline_report(net, baseline_instance(net)), CONTROLS)
        self.assertEqual(solution.x, {1: 1})

    def test_model_dump(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'ots.lp'
            solve_ots(self.net, self.inst, baseline_report(self.net, self.inst), CONTROLS, dump_model=str(path))
            self.assertTrue(path.exists())


class TestReportFile(SimpleTestCase):

    def test_saved_report_reloads(self):
        net = load_sample('triangle')
        report = run_tbt(net, baseline_instance(net), tbt(0))
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'report.json'
            save_report(report, path)
            loaded = load_report(path)
        self.assertEqual(loaded.bounds, report.bounds)
        self.assertEqual(loaded.fixed_lines, report.fixed_lines)
        self.assertEqual(loaded.cap, report.cap)

    def test_baseline_report_has_no_cap(self):
        net = load_sample('two_bus')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'report.json'
            save_report(baseline_report(net, baseline_instance(net)), path)
            self.assertFalse(load_report(path).cap.present)

    def test_broken_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'report.json'
            path.write_text('{"network": "triangle"}')
            with self.assertRaises(ParseError):
                load_report(path)
