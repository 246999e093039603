from django.conf import settings

from core.management.base import OtsCommand, positive_int
from core.utils.demand import generate_instances
from core.utils.netio import save_instances


class Command(OtsCommand):
    help = 'Generate demand instances by uniform perturbation of the baseline demand.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        parser.add_argument('--count', type=positive_int, required=True)
        parser.add_argument('--seed', type=int, required=True)
        parser.add_argument('--spread', type=float, default=settings.OTS_DEMAND_SPREAD)
        parser.add_argument('--out', required=True, help='Instance JSON file to write.')

    def handle(self, *args, **options):
        net = self.load_network(options)
        instances = generate_instances(net, options['count'], options['seed'], options['spread'])
        save_instances(instances, options['out'])
        self.success(f"{len(instances)} instances of {net.name} written to {options['out']} "
                     f"(seed {options['seed']}, spread {options['spread']}).")
