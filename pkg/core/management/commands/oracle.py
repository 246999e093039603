from django.conf import settings

from core.management.base import OtsCommand, positive_int
from ots.oracle.serializers import BoundsViolationSerializer, OracleResultSerializer
from ots.oracle.services import OracleService
from ots.tighten.reports import load_report


class Command(OtsCommand):
    help = 'Enumerate every line topology and print the exact optimum.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        self.add_instance_arguments(parser)
        parser.add_argument('--max-lines', type=positive_int, default=settings.OTS_ORACLE_MAX_LINES)
        parser.add_argument('--jobs', type=positive_int, default=settings.OTS_JOBS)
        parser.add_argument('--verify-report', help='Also check the bounds and cap of a tightening report.')

    def handle(self, *args, **options):
        net = self.load_network(options)
        inst = self.load_instance(options, net)
        oracle = OracleService(options['max_lines'], options['jobs'])

        payload = OracleResultSerializer(oracle.brute_force(net, inst)).data
        if options['verify_report']:
            report = load_report(options['verify_report'])
            violation = oracle.verify_bounds(net, inst, report.bounds, report.cap)
            payload['bounds_valid'] = violation is None
            payload['violation'] = BoundsViolationSerializer(violation).data if violation else None
        self.write_json(payload)
