from django.conf import settings

from core.management.base import OtsCommand, positive_float
from ots.bench.profiles import profiles_by_split, write_profile
from ots.bench.summary import read_results, render_summaries


class Command(OtsCommand):
    help = 'Summarize a results.csv: per-approach table, hard/easy split table and optional profiles.'

    def add_arguments(self, parser):
        parser.add_argument('--results', required=True, help='results.csv written by bench.')
        parser.add_argument('--split-fraction', type=float, default=settings.OTS_SPLIT_FRACTION)
        parser.add_argument('--time-limit', type=positive_float, default=settings.OTS_TIME_LIMIT,
                            help='End point of the profile curves.')
        parser.add_argument('--profiles', help='Performance profile CSV path.')
        parser.add_argument('--format', choices=['table', 'csv'], default='table')

    def handle(self, *args, **options):
        frame = read_results(options['results'])
        self.stdout.write(render_summaries(frame, options['split_fraction'], options['format']))
        if options['profiles']:
            write_profile(profiles_by_split(frame, options['time_limit'], options['split_fraction']),
                          options['profiles'])
            self.success(f"profiles written to {options['profiles']}.")
