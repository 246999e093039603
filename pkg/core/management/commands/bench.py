from django.conf import settings

from core.management.base import OtsCommand, positive_float, positive_int
from core.utils.generics import hardware_summary
from ots.bench.approaches import parse_approaches
from ots.bench.profiles import profiles_by_split, write_profile
from ots.bench.runner import run_benchmark
from ots.bench.summary import records_frame, render_summaries, write_results
from ots.milp.model import SolveControls
from ots.tighten.config import Propagation


class Command(OtsCommand):
    help = 'Run every approach on every instance and write results.csv with its summaries.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        parser.add_argument('--instances', required=True, help='Instance JSON file.')
        parser.add_argument('--approaches', default='mip,tbt-0,tbt-2,sbt-25',
                            help='Comma separated list of mip, ind, tbt-K and sbt-T.')
        parser.add_argument('--time-limit', type=positive_float, default=settings.OTS_TIME_LIMIT)
        parser.add_argument('--gap', type=float, default=settings.OTS_REL_GAP)
        parser.add_argument('--threads', type=positive_int, default=settings.OTS_THREADS)
        parser.add_argument('--problem-time-limit', type=positive_float, default=settings.OTS_TBT_PROBLEM_LIMIT)
        parser.add_argument('--heuristic-budget', type=positive_float, default=settings.OTS_HEURISTIC_BUDGET)
        parser.add_argument('--propagation', choices=[p.value for p in Propagation],
                            default=Propagation.SEQUENTIAL.value)
        parser.add_argument('--passes', type=positive_int, default=1)
        parser.add_argument('--jobs', type=positive_int, default=settings.OTS_JOBS)
        parser.add_argument('--split-fraction', type=float, default=settings.OTS_SPLIT_FRACTION)
        parser.add_argument('--out', required=True, help='results.csv path.')
        parser.add_argument('--profiles', help='Performance profile CSV path.')

    def handle(self, *args, **options):
        net = self.load_network(options)
        instances = self.load_instances(options['instances'], net)
        approaches = parse_approaches(options['approaches'])
        controls = SolveControls(time_limit=options['time_limit'], rel_gap=options['gap'], threads=options['threads'])
        overrides = {
            'per_problem_time_limit': options['problem_time_limit'],
            'heuristic_budget': options['heuristic_budget'],
            'propagation': Propagation(options['propagation']),
            'passes': options['passes'],
            'threads': options['threads'],
            'rel_gap': options['gap'],
        }
        self.stderr.write(f'hardware {hardware_summary()}')

        records = run_benchmark(net, instances, approaches, controls, overrides, options['jobs'])
        frame = records_frame(records)
        write_results(frame, options['out'])
        if options['profiles']:
            write_profile(profiles_by_split(frame, options['time_limit'], options['split_fraction']),
                          options['profiles'])

        self.stdout.write(render_summaries(frame, options['split_fraction']))
        self.success(f"{len(frame)} rows written to {options['out']}.")
