from django.conf import settings
from django.core.management.base import CommandError

from core.exceptions import EXIT_USAGE
from core.management.base import OtsCommand, non_negative_int, positive_float, positive_int
from core.utils.topo import build_line_graph
from ots.formulation.builders import Target, build_bounding
from ots.milp.backend import get_backend
from ots.milp.model import Sense
from ots.tighten.config import Mode, Propagation, TightenConfig
from ots.tighten.reports import save_report
from ots.tighten.services.pipeline import TighteningPipeline, run_tightening


class Command(OtsCommand):
    help = 'Tighten flow and big-M bounds of one instance and write the report as JSON.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        self.add_instance_arguments(parser)
        parser.add_argument('--mode', choices=[mode.value for mode in Mode], default=Mode.TBT.value)
        parser.add_argument('--k', type=non_negative_int, default=0, help='Closeness level of tbt.')
        parser.add_argument('--t-ms', type=positive_float, help='Per-problem budget of sbt in milliseconds.')
        parser.add_argument('--passes', type=positive_int, default=1)
        parser.add_argument('--propagation', choices=[p.value for p in Propagation],
                            default=Propagation.SEQUENTIAL.value)
        parser.add_argument('--problem-time-limit', type=positive_float, default=settings.OTS_TBT_PROBLEM_LIMIT)
        parser.add_argument('--heuristic-budget', type=positive_float, default=settings.OTS_HEURISTIC_BUDGET)
        parser.add_argument('--jobs', type=positive_int, default=settings.OTS_JOBS)
        parser.add_argument('--threads', type=positive_int, default=settings.OTS_THREADS)
        parser.add_argument('--out', required=True, help='Report JSON file to write.')
        parser.add_argument('--dump-model', help='LP file for the first bounding problem of the lowest line id.')

    def config(self, options) -> TightenConfig:
        common = {
            'heuristic_budget': options['heuristic_budget'],
            'propagation': Propagation(options['propagation']),
            'passes': options['passes'],
            'jobs': options['jobs'],
            'threads': options['threads'],
        }
        if options['mode'] == Mode.SBT.value:
            if options['t_ms'] is None:
                raise CommandError('--mode sbt needs --t-ms.', returncode=EXIT_USAGE)
            return TightenConfig.sbt(options['t_ms'], **common)
        return TightenConfig.tbt(options['k'], per_problem_time_limit=options['problem_time_limit'], **common)

    def handle(self, *args, **options):
        net = self.load_network(options)
        inst = self.load_instance(options, net)
        cfg = self.config(options)
        report = run_tightening(net, inst, cfg)
        save_report(report, options['out'])

        if options['dump_model']:
            line_id = min(net.line_ids)
            line_graph = build_line_graph(net) if cfg.mode is Mode.TBT else None
            relax = TighteningPipeline(cfg).relaxation_for(line_graph, line_id, net, {})
            model = build_bounding(net, inst, report.bounds0, line_id, Target.FLOW, Sense.MIN,
                                   relax, report.cap)
            get_backend().export(model, options['dump_model'])

        self.success(f"{report.approach} on {net.name}/{inst.index}: cap {report.cap.cap:.6f} "
                     f"({report.cap.source}), {len(report.fixed_lines)} lines fixed, "
                     f"T^B {report.t_bound:.3f}s; report written to {options['out']}.")
