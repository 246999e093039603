import io
import json
import tempfile
from dataclasses import replace
from pathlib import Path

from django.core.management import call_command
from django.test import SimpleTestCase, tag
from hypothesis import given, strategies as st

from core.exceptions import InfeasibleEverywhere, TooLarge
from core.models import Instance, baseline_instance
from core.utils.demand import generate_instances
from core.utils.samples import load_sample
from ots.bench.approaches import parse_approaches
from ots.formulation.bounds import CostCap
from ots.milp.model import SolveControls
from ots.oracle.services import OracleService, brute_force, gray_code, is_better, verify_bounds
from ots.tighten.config import Propagation
from ots.tighten.reports import save_report
from ots.tighten.services.pipeline import baseline_report, initial_bounds, run_tightening, solve_ots


class TestEnumeration(SimpleTestCase):

    @given(n=st.integers(min_value=0, max_value=8))
    def test_gray_code_visits_every_vector_once(self, n):
        vectors = list(gray_code(n))
        self.assertEqual(len(set(vectors)), 2 ** n)
        for a, b in zip(vectors, vectors[1:]):
            self.assertEqual(sum(u != v for u, v in zip(a, b)), 1)

    def test_ties_prefer_larger_topology(self):
        self.assertTrue(is_better(10.0, (1, 1), 10.0, (1, 0)))
        self.assertFalse(is_better(10.0, (0, 1), 10.0, (1, 0)))
        self.assertTrue(is_better(9.0, (0, 0), 10.0, (1, 1)))
        self.assertTrue(is_better(10.0, (0, 0), None, None))


class TestBruteForce(SimpleTestCase):

    def test_triangle(self):
        net = load_sample('triangle')
        result = brute_force(net, baseline_instance(net))
        self.assertAlmostEqual(result.cost, 50.0, places=5)
        self.assertEqual(result.x_opt, {1: 1, 2: 1, 3: 1})
        self.assertEqual((result.n_feasible, result.n_topologies), (2, 8))
        self.assertAlmostEqual(result.flows[1], 100.0 / 3.0, places=4)

    def test_parallel_workers_agree(self):
        net = load_sample('five_bus')
        inst = baseline_instance(net)
        serial = OracleService(jobs=1).brute_force(net, inst)
        parallel = OracleService(jobs=4).brute_force(net, inst)
        self.assertAlmostEqual(serial.cost, parallel.cost, places=6)
        self.assertEqual(serial.x_opt, parallel.x_opt)
        self.assertEqual(serial.n_feasible, parallel.n_feasible)

    def test_two_bus_keeps_its_line(self):
        net = load_sample('two_bus')
        self.assertEqual(brute_force(net, baseline_instance(net)).x_opt, {1: 1})

    def test_too_large(self):
        with self.assertRaises(TooLarge):
            brute_force(load_sample('six_bus'), baseline_instance(load_sample('six_bus')), max_lines=4)

    def test_inadequate_generation(self):
        net = load_sample('triangle')
        with self.assertRaises(InfeasibleEverywhere):
            brute_force(net, Instance('triangle', (0.0, 500.0, 0.0)))

    def test_no_feasible_topology(self):
        net = load_sample('triangle')
        with self.assertRaises(InfeasibleEverywhere):
            brute_force(net, Instance('triangle', (0.0, 150.0, 0.0)))


class TestVerifyBounds(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('triangle')
        self.inst = baseline_instance(self.net)
        self.bounds = initial_bounds(self.net)

    def test_initial_bounds_are_valid(self):
        self.assertIsNone(verify_bounds(self.net, self.inst, self.bounds))

    def test_cut_off_optimum_is_reported(self):
        # Holding line 1 to 20 MW forces 40 MW out of the expensive unit at bus 3.
        bounds = self.bounds.updated(1, f_hi=20.0)
        violation = verify_bounds(self.net, self.inst, bounds, CostCap(50.0, 'incumbent'))
        self.assertEqual(violation.reason, 'cost-raised')
        self.assertAlmostEqual(violation.model_cost, 410.0, places=4)
        self.assertEqual(violation.line, 1)
        self.assertEqual(violation.x, {1: 1, 2: 1, 3: 1})
        self.assertAlmostEqual(violation.oracle_cost, 50.0, places=5)

    def test_topologies_above_cap_ignored(self):
        # (1, 1, 0) costs 140 and leaves an angle gap of 30 across the open line 3.
        bounds = self.bounds.updated(3, m_lo=-10.0, m_hi=10.0)
        self.assertIsNone(verify_bounds(self.net, self.inst, bounds, CostCap(50.0, 'incumbent')))
        self.assertIsNotNone(verify_bounds(self.net, self.inst, bounds))


class TestOracleCommand(SimpleTestCase):

    def test_prints_optimum_and_verifies_report(self):
        net = load_sample('triangle')
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'report.json'
            save_report(baseline_report(net, baseline_instance(net)), path)
            out = io.StringIO()
            call_command('oracle', network='triangle', verify_report=str(path), stdout=out)
        payload = json.loads(out.getvalue())
        self.assertAlmostEqual(payload['cost'], 50.0, places=5)
        self.assertEqual(payload['x_opt'], {'1': 1, '2': 1, '3': 1})
        self.assertTrue(payload['bounds_valid'])
        self.assertIsNone(payload['violation'])


@tag('oracle')
class TestOracleEquivalence(SimpleTestCase):
    """Every approach reaches the enumerated optimum on the small networks."""

    controls = SolveControls(time_limit=60, rel_gap=0.0)
    overrides = {'per_problem_time_limit': 10, 'heuristic_budget': 10}
    instances_per_network = 13

    def tightening_runs(self, approach):
        cfg = approach.tighten_config(**self.overrides)
        yield cfg
        yield replace(cfg, jobs=2).with_propagation(Propagation.BATCH)

    def check_network(self, name):
        net = load_sample(name)
        approaches = parse_approaches('mip,tbt-0,tbt-1,tbt-2,tbt-3,sbt-100')
        for inst in generate_instances(net, self.instances_per_network, seed=2024):
            optimum = brute_force(net, inst).cost
            for approach in approaches:
                if approach.tightens:
                    reports = []
                    for cfg in self.tightening_runs(approach):
                        report = run_tightening(net, inst, cfg)
                        self.assertIsNone(verify_bounds(net, inst, report.bounds, report.cap),
                                          msg=f'{approach.name} {cfg.propagation.value}')
                        reports.append((cfg.propagation.value, report))
                else:
                    reports = [('none', baseline_report(net, inst))]
                for propagation, report in reports:
                    cost = solve_ots(net, inst, report, self.controls).cost
                    self.assertAlmostEqual(cost, optimum, delta=1e-6 * max(1.0, abs(optimum)),
                                           msg=f'{name}/{inst.index} {approach.name} {propagation}')

    def test_triangle(self):
        self.check_network('triangle')

    def test_five_bus(self):
        self.check_network('five_bus')

    def test_six_bus(self):
        self.check_network('six_bus')

    def test_tree(self):
        self.check_network('path5')
