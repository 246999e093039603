from django.conf import settings

from core.exceptions import ValidationError
from core.management.base import OtsCommand, positive_float, positive_int
from core.utils.netio import write_json
from ots.milp.model import SolveControls
from ots.tighten.reports import load_report
from ots.tighten.serializers import SolutionSerializer
from ots.tighten.services.pipeline import baseline_report, solve_ots


class Command(OtsCommand):
    help = 'Solve the switching problem, with the bounds of a tightening report when given.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        self.add_instance_arguments(parser)
        parser.add_argument('--report', help='Tightening report JSON. Initial bounds are used when omitted.')
        parser.add_argument('--time-limit', type=positive_float, default=settings.OTS_TIME_LIMIT)
        parser.add_argument('--gap', type=float, default=settings.OTS_REL_GAP)
        parser.add_argument('--threads', type=positive_int, default=settings.OTS_THREADS)
        parser.add_argument('--out', help='Solution JSON file. Printed to stdout when omitted.')
        parser.add_argument('--dump-model', help='LP or MPS file of the final model.')

    def handle(self, *args, **options):
        net = self.load_network(options)
        inst = self.load_instance(options, net)
        if options['report']:
            report = load_report(options['report'])
            if report.network != net.name or report.instance != inst.index:
                raise ValidationError(f"report {options['report']} belongs to {report.network}/{report.instance}, "
                                      f"not {net.name}/{inst.index}.")
        else:
            report = baseline_report(net, inst)

        controls = SolveControls(time_limit=options['time_limit'], rel_gap=options['gap'], threads=options['threads'])
        solution = solve_ots(net, inst, report, controls, dump_model=options['dump_model'])
        payload = dict(SolutionSerializer(solution).data)
        payload.update({'instance': inst.index, 'approach': report.approach, 'tB_s': report.t_bound})
        if options['out']:
            write_json(options['out'], payload)
            self.success(f"{solution.status} cost {solution.cost}; solution written to {options['out']}.")
        else:
            self.write_json(payload)
