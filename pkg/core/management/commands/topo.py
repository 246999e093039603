from core.management.base import OtsCommand, non_negative_int
from core.utils.topo import build_line_graph, neighborhood


class Command(OtsCommand):
    help = 'Print the lines within line-graph distance k of a line.'

    def add_arguments(self, parser):
        self.add_network_argument(parser)
        parser.add_argument('--line', type=int, required=True)
        parser.add_argument('--k', type=non_negative_int, required=True)

    def handle(self, *args, **options):
        net = self.load_network(options)
        lines = neighborhood(build_line_graph(net), options['line'], options['k'])
        self.write_json({'line': options['line'], 'k': options['k'], 'neighborhood': sorted(lines)})
