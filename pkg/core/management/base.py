import argparse
import json
import logging
from typing import List

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import EXIT_USAGE, OtsError, ValidationError
from core.models import Instance, Network, baseline_instance
from core.utils.netio import load_instances, load_network


logger = logging.getLogger('core.management')

# Options Django adds to every command; they are not echoed.
DJANGO_OPTIONS = {'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color', 'skip_checks'}


def non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f'expected a non-negative integer, got {text}')
    return value


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {text}')
    return value


def positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f'expected a positive number, got {text}')
    return value


class OtsCommand(BaseCommand):
    """Base of the ``ots`` subcommands.

    Domain errors become ``CommandError`` with the exit code of the error class;
    argument errors exit with the usage code. Data goes to stdout or files,
    messages to stderr.
    """
    requires_system_checks = []
    requires_migrations_checks = False

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        argparse_exit = parser.exit

        def exit(status=0, message=None):
            argparse_exit(EXIT_USAGE if status else status, message)

        parser.exit = exit
        return parser

    def execute(self, *args, **options):
        echo = ' '.join(f'{key}={value}' for key, value in sorted(options.items())
                        if key not in DJANGO_OPTIONS and key not in ('stdout', 'stderr'))
        logger.info('event=config command=%s %s', self.name, echo)
        try:
            return super().execute(*args, **options)
        except OtsError as e:
            logger.error('event=failed command=%s error_type=%s error="%s"', self.name, type(e).__name__, e)
            raise CommandError(str(e), returncode=e.exit_code) from e

    @property
    def name(self) -> str:
        return type(self).__module__.rsplit('.', 1)[-1]

    def add_network_argument(self, parser):
        parser.add_argument('--network', required=True, help='Network JSON path or bundled network name.')

    def add_instance_arguments(self, parser):
        parser.add_argument('--instance', help='Instance JSON file. The baseline demand is used when omitted.')
        parser.add_argument('--index', type=int, default=0, help='Instance index inside the file.')

    def load_network(self, options) -> Network:
        return load_network(options['network'])

    def load_instance(self, options, net: Network) -> Instance:
        if options.get('instance'):
            source = options['instance']
            chosen = [inst for inst in load_instances(source, net) if inst.index == options['index']]
            if not chosen:
                raise ValidationError(f"{source}: no instance with index {options['index']}.")
            inst = chosen[0]
        else:
            source, inst = 'baseline', baseline_instance(net)
        self.log_instance(net, inst, source)
        return inst

    def load_instances(self, path, net: Network) -> List[Instance]:
        instances = load_instances(path, net)
        for inst in instances:
            self.log_instance(net, inst, path)
        return instances

    def log_instance(self, net: Network, inst: Instance, source) -> None:
        logger.info('event=instance command=%s network=%s seed=%s index=%d source=%s',
                    self.name, net.name, inst.seed, inst.index, source)

    def write_json(self, payload) -> None:
        self.stdout.write(json.dumps(payload, indent=2))

    def success(self, message: str) -> None:
        self.stderr.write(message, style_func=self.style.SUCCESS)
