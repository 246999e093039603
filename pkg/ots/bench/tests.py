import io
import math
import tempfile
from pathlib import Path

import pandas as pd
from django.core.management import call_command
from django.test import SimpleTestCase
from pandas.testing import assert_frame_equal

from core.exceptions import MissingBounds, NoIncumbent, ParseError, ValidationError, ZeroWidth
from core.models import Instance
from core.utils.demand import generate_instances
from core.utils.samples import load_sample
from ots.bench.approaches import Approach, Kind, parse_approaches
from ots.bench.metrics import compute_bound_metrics, compute_solution_metrics, relative_pct
from ots.bench.profiles import performance_profile, profiles_by_split
from ots.bench.runner import ERROR, UNSUPPORTED, BenchmarkRecord, run_benchmark
from ots.bench.summary import (
    FLOAT_FORMAT, RESULT_COLUMNS, read_results, records_frame, split_instances, summarize, summarize_splits,
    write_results,
)
from ots.formulation.bounds import Bounds, LineBounds
from ots.milp.model import SolveControls
from ots.tighten.services.pipeline import initial_bounds


def results(rows):
    return records_frame(BenchmarkRecord(*row) for row in rows)


class TestApproaches(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(Approach.parse('mip'), Approach('MIP', Kind.MIP))
        self.assertEqual(Approach.parse('TBT-2'), Approach('TBT-2', Kind.TBT, k=2))
        self.assertEqual(Approach.parse('sbt-25'), Approach('SBT-25', Kind.SBT, t_ms=25.0))
        self.assertEqual(Approach.parse('sbt-0.5').name, 'SBT-0.5')

    def test_rejected_tokens(self):
        for token in ('tbt', 'mip-3', 'tbt-1.5', 'sbt-0', 'lp'):
            with self.assertRaises(ValidationError, msg=token):
                Approach.parse(token)

    def test_list(self):
        names = [a.name for a in parse_approaches('mip, tbt-0,sbt-25')]
        self.assertEqual(names, ['MIP', 'TBT-0', 'SBT-25'])
        with self.assertRaises(ValidationError):
            parse_approaches('tbt-1,TBT-1')
        with self.assertRaises(ValidationError):
            parse_approaches(' , ')

    def test_tighten_config(self):
        self.assertIsNone(Approach.parse('mip').tighten_config())
        self.assertEqual(Approach.parse('tbt-3').tighten_config().label, 'TBT-3')
        self.assertEqual(Approach.parse('sbt-40').tighten_config().per_problem_time_limit, 0.04)


class TestMetrics(SimpleTestCase):

    def setUp(self):
        self.bounds0 = initial_bounds(load_sample('triangle'))

    def test_no_change(self):
        self.assertEqual(compute_bound_metrics(self.bounds0, self.bounds0), (0.0, 0.0))

    def test_halved_widths(self):
        halved = Bounds({l: LineBounds(-20.0, 20.0, -40.0, 40.0) for l in (1, 2, 3)})
        self.assertEqual(compute_bound_metrics(self.bounds0, halved), (50.0, 50.0))

    def test_one_line_collapsed(self):
        tightened = self.bounds0.updated(1, f_lo=10.0, f_hi=10.0)
        df, dm = compute_bound_metrics(self.bounds0, tightened)
        self.assertAlmostEqual(df, 100.0 / 3.0)
        self.assertEqual(dm, 0.0)

    def test_zero_initial_width(self):
        bounds = initial_bounds(load_sample('two_bus'))
        with self.assertRaises(ZeroWidth):
            compute_bound_metrics(bounds, bounds)

    def test_mismatched_lines(self):
        with self.assertRaises(MissingBounds):
            compute_bound_metrics(self.bounds0, Bounds({1: self.bounds0[1]}))

    def test_solution_metrics(self):
        gap, sub, dif = compute_solution_metrics(110.0, 99.0, 100.0, 110.0)
        self.assertAlmostEqual(gap, 10.0)
        self.assertAlmostEqual(sub, 10.0)
        self.assertEqual(dif, 0.0)
        self.assertEqual(compute_solution_metrics(100.0, 100.0, None, None)[1:], (None, None))

    def test_solution_metrics_need_incumbent(self):
        with self.assertRaises(NoIncumbent):
            compute_solution_metrics(None, 10.0, 10.0, 10.0)

    def test_relative_pct_at_zero(self):
        self.assertEqual(relative_pct(0.0, 0.0), 0.0)
        self.assertEqual(relative_pct(1.0, 0.0), math.inf)


class TestRunner(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.net = load_sample('triangle')
        cls.instances = generate_instances(cls.net, 2, seed=9, spread=0.05)
        cls.records = run_benchmark(
            cls.net, cls.instances, parse_approaches('tbt-0,mip,ind,sbt-2000'),
            SolveControls(time_limit=30, rel_gap=0.0),
            {'per_problem_time_limit': 10, 'heuristic_budget': 10},
        )

    def test_rows_sorted(self):
        keys = [(r.instance, r.approach) for r in self.records]
        self.assertEqual(keys, sorted(keys))
        self.assertEqual(len(keys), 8)

    def test_indicator_rows_unsupported(self):
        rows = [r for r in self.records if r.approach == 'IND']
        self.assertEqual({r.status for r in rows}, {UNSUPPORTED})
        self.assertTrue(all(r.cost is None and r.tT_s is None for r in rows))

    def test_mip_rows(self):
        for r in self.records:
            if r.approach == 'MIP':
                self.assertEqual((r.dF_pct, r.dM_pct, r.tB_s), (0.0, 0.0, 0.0))
                self.assertEqual(r.tT_s, r.tO_s)

    def test_solved_rows(self):
        for r in self.records:
            if r.approach == 'IND':
                continue
            self.assertEqual(r.status, 'Optimal')
            self.assertAlmostEqual(r.sub_pct, 0.0, places=4)
            self.assertAlmostEqual(r.dif_pct, 0.0, places=4)
            self.assertAlmostEqual(r.tT_s, r.tB_s + r.tO_s)

    def test_tightening_rows_shrink_bounds(self):
        for r in self.records:
            if r.approach.startswith(('TBT', 'SBT')):
                self.assertGreaterEqual(r.dF_pct, 0.0)
                self.assertGreater(r.tB_s, 0.0)

    def test_failed_row_is_recorded(self):
        broken = Instance('triangle', (1.0, 2.0), index=7)
        records = run_benchmark(self.net, [broken], parse_approaches('mip'), SolveControls(time_limit=10))
        self.assertEqual((records[0].instance, records[0].status, records[0].cost), (7, ERROR, None))

    def test_infeasible_instance_row(self):
        inst = Instance('triangle', (0.0, 150.0, 0.0), index=3)
        records = run_benchmark(self.net, [inst], parse_approaches('tbt-0'), SolveControls(time_limit=10),
                                {'heuristic_budget': 5})
        self.assertEqual(records[0].status, 'Infeasible')
        self.assertIsNone(records[0].dif_pct)


class TestDeterminism(SimpleTestCase):

    timing_columns = ['tB_s', 'tO_s', 'tT_s']

    def results_csv(self, net):
        records = run_benchmark(
            net, generate_instances(net, 3, seed=31), parse_approaches('mip,tbt-0,tbt-1'),
            SolveControls(time_limit=30, rel_gap=0.0, threads=1),
            {'per_problem_time_limit': 10, 'heuristic_budget': 10, 'threads': 1},
        )
        frame = records_frame(records).drop(columns=self.timing_columns)
        return frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep='')

    def test_repeated_run_writes_same_csv(self):
        net = load_sample('five_bus')
        first = self.results_csv(net)
        self.assertEqual(first, self.results_csv(net))
        self.assertEqual(first.count('\n'), 1 + 3 * 3)


class TestSummary(SimpleTestCase):

    def setUp(self):
        self.frame = results([
            (0, 'MIP', 'Optimal', 100.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 8.0, 8.0),
            (0, 'TBT-1', 'Optimal', 100.0, 0.0, 0.0, 0.0, 40.0, 60.0, 1.0, 2.0, 3.0),
            (1, 'MIP', 'FeasibleAtLimit', 210.0, 5.0, 5.0, 0.0, 0.0, 0.0, 0.0, 60.0, 60.0),
            (1, 'TBT-1', 'Optimal', 200.0, 0.0, 0.0, 0.0, 20.0, 30.0, 2.0, 4.0, 6.0),
            (2, 'MIP', 'NoSolutionAtLimit', None, None, None, None, 0.0, 0.0, 0.0, 60.0, 60.0),
            (2, 'TBT-1', 'Optimal', 50.0, 0.0, 0.0, 0.0, 30.0, 30.0, 1.0, 0.5, 1.5),
        ])

    def test_summary_table(self):
        summary = summarize(self.frame).set_index('approach')
        self.assertEqual(summary.loc['MIP', 'n_TL'], 2)
        self.assertEqual(summary.loc['TBT-1', 'n_TL'], 0)
        self.assertAlmostEqual(summary.loc['TBT-1', 'dF_pct'], 30.0)
        self.assertAlmostEqual(summary.loc['MIP', 'gap_pct_mean'], 2.5)
        self.assertAlmostEqual(summary.loc['MIP', 'gap_pct_max'], 5.0)
        self.assertAlmostEqual(summary.loc['TBT-1', 'tT_s'], 3.5)

    def test_csv_reproduces_summary(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'results.csv'
            write_results(self.frame, path)
            self.assertEqual(path.read_text().splitlines()[0], ','.join(RESULT_COLUMNS))
            reread = read_results(path)
        assert_frame_equal(summarize(reread), summarize(self.frame), check_dtype=False)

    def test_missing_column(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'results.csv'
            self.frame.drop(columns=['tT_s']).to_csv(path, index=False)
            with self.assertRaises(ParseError):
                read_results(path)

    def test_split_by_total_time(self):
        split = split_instances(self.frame, 1 / 3)
        self.assertEqual(split, {'hard': [1], 'easy': [0]})

    def test_split_keeps_one_instance(self):
        self.assertEqual(split_instances(self.frame, 0.1), {'hard': [1], 'easy': [0]})

    def test_split_fraction_checked(self):
        for fraction in (0.0, 0.6):
            with self.assertRaises(ValidationError):
                split_instances(self.frame, fraction)

    def test_split_summaries(self):
        table = summarize_splits(self.frame, 1 / 3)
        self.assertEqual(sorted(set(table['split'])), ['easy', 'hard'])
        self.assertEqual(len(table), 4)


class TestProfiles(SimpleTestCase):

    def setUp(self):
        self.frame = results([
            (0, 'MIP', 'Optimal', 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 5.0),
            (1, 'MIP', 'FeasibleAtLimit', 1.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 60.0, 60.0),
            (0, 'TBT-0', 'Optimal', 1.0, 0.0, 0.0, 0.0, 9.0, 9.0, 1.0, 1.0, 2.0),
            (1, 'TBT-0', 'Optimal', 1.0, 0.0, 0.0, 0.0, 9.0, 9.0, 1.0, 3.0, 4.0),
        ])

    def test_step_curves(self):
        profile = performance_profile(self.frame, 60.0)
        tbt = profile[profile['approach'] == 'TBT-0']
        self.assertEqual(list(zip(tbt['time_s'], tbt['solved'])), [(0.0, 0), (2.0, 1), (4.0, 2), (60.0, 2)])
        mip = profile[profile['approach'] == 'MIP']
        self.assertEqual(list(zip(mip['time_s'], mip['solved'])), [(0.0, 0), (5.0, 1), (60.0, 1)])

    def test_curve_ends_after_last_solve(self):
        profile = performance_profile(self.frame, 3.0)
        self.assertEqual(profile.iloc[-1]['time_s'], 4.0)

    def test_empty_results(self):
        with self.assertRaises(ValidationError):
            performance_profile(self.frame.iloc[0:0], 60.0)

    def test_profiles_by_split(self):
        profiles = profiles_by_split(self.frame, 60.0, 0.5)
        self.assertEqual(list(profiles.columns), ['split', 'approach', 'time_s', 'solved'])
        self.assertEqual(list(pd.unique(profiles['split'])), ['all', 'hard', 'easy'])


class TestBenchCommand(SimpleTestCase):

    def test_bench_then_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            instances, csv, profiles = tmp / 'inst.json', tmp / 'results.csv', tmp / 'profiles.csv'
            call_command('gen', network='triangle', count=2, seed=3, out=str(instances), stderr=io.StringIO())
            out = io.StringIO()
            call_command('bench', network='triangle', instances=str(instances), approaches='mip,tbt-1',
                         time_limit=30, heuristic_budget=5, out=str(csv), profiles=str(profiles),
                         split_fraction=0.5, stdout=out, stderr=io.StringIO())
            frame = read_results(csv)
            self.assertEqual(list(frame['approach']), ['MIP', 'TBT-1', 'MIP', 'TBT-1'])
            self.assertIn('TBT-1', out.getvalue())
            self.assertTrue(profiles.exists())

            report_out = io.StringIO()
            call_command('report', results=str(csv), split_fraction=0.5, format='csv', stdout=report_out)
            self.assertTrue(report_out.getvalue().startswith('approach,n,'))
