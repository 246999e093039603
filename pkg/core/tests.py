import io
import json
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from django.apps import apps
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from core.exceptions import (
    EXIT_DATA, EXIT_OK, EXIT_USAGE, DisconnectedError, ParseError, UnknownLine, ValidationError,
)
from core.models import Bus, Instance, Line, Network, baseline_instance
from core.utils.demand import generate_instances
from core.utils.netio import load_instances, load_network, save_instances, save_network
from core.utils.samples import SMALL_NETWORKS, load_sample
from core.utils.topo import build_line_graph, neighborhood
from otsbench.cli import main


def bus(id, cost=1.0, p_max=100.0, d_base=0.0):
    return Bus(id=id, cost=cost, p_min=0.0, p_max=p_max, d_base=d_base)


def line(id, a, b, limit=40.0):
    return Line(id=id, from_bus=a, to_bus=b, susceptance=1.0, f_min=-limit, f_max=limit)


class TestNetworkModel(SimpleTestCase):

    def test_bundled_networks_load(self):
        for name in SMALL_NETWORKS + ('two_bus', 'ieee118'):
            net = load_sample(name)
            self.assertEqual(net.name, name)
            self.assertEqual(net.reference_bus, min(net.bus_ids))

    def test_ieee118_size(self):
        net = load_sample('ieee118')
        self.assertEqual(len(net.buses), 118)
        self.assertEqual(len(net.lines), 186)

    def test_self_loop_rejected(self):
        with self.assertRaisesMessage(ValidationError, 'line 4'):
            line(4, 2, 2)

    def test_inverted_thermal_limits_rejected(self):
        with self.assertRaises(ValidationError):
            Line(id=1, from_bus=1, to_bus=2, susceptance=1.0, f_min=10.0, f_max=20.0)

    def test_generator_bounds_rejected(self):
        with self.assertRaisesMessage(ValidationError, 'bus 3'):
            Bus(id=3, cost=1.0, p_min=50.0, p_max=10.0, d_base=0.0)

    def test_unknown_endpoint_rejected(self):
        with self.assertRaisesMessage(ValidationError, 'endpoint bus 9'):
            Network('bad', (bus(1), bus(2)), (line(1, 1, 9),))

    def test_disconnected_network_rejected(self):
        with self.assertRaises(DisconnectedError):
            Network('islands', (bus(1), bus(2), bus(3), bus(4)), (line(1, 1, 2), line(2, 3, 4)))

    def test_parallel_lines_kept_apart(self):
        net = Network('parallel', (bus(1), bus(2)), (line(1, 1, 2), line(2, 1, 2)))
        self.assertEqual(net.line_ids, (1, 2))
        self.assertEqual(net.graph.number_of_edges(1, 2), 2)

    def test_instance_length_checked(self):
        net = load_sample('triangle')
        with self.assertRaises(ValidationError):
            Instance('triangle', (1.0, 2.0)).validate_for(net)

    def test_inadequate_instance(self):
        net = load_sample('triangle')
        inst = Instance('triangle', (0.0, 500.0, 0.0))
        with self.assertRaisesMessage(ValidationError, 'exceeds capacity'):
            inst.validate_for(net)
        inst.validate_for(net, adequacy=False)

    def test_baseline_instance(self):
        self.assertEqual(baseline_instance(load_sample('triangle')).demand, (0.0, 50.0, 0.0))


class TestNetworkFiles(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_network_file_keeps_keys(self):
        path = self.dir / 'net.json'
        save_network(load_sample('five_bus'), path)
        payload = json.loads(path.read_text())
        self.assertEqual(set(payload['lines'][0]), {'id', 'from', 'to', 'b', 'f_min', 'f_max'})
        self.assertEqual(load_network(path), load_sample('five_bus'))

    def test_missing_file(self):
        with self.assertRaises(ParseError):
            load_network(self.dir / 'nope.json')

    def test_truncated_file(self):
        path = self.dir / 'broken.json'
        path.write_text('{"name": "x", "buses": [')
        with self.assertRaises(ParseError):
            load_network(path)

    def test_wrong_field_type(self):
        path = self.dir / 'typed.json'
        path.write_text(json.dumps({'name': 'x', 'buses': [{'id': 'one'}], 'lines': []}))
        with self.assertRaises(ParseError):
            load_network(path)

    def test_instances_not_a_list(self):
        path = self.dir / 'inst.json'
        path.write_text('{}')
        with self.assertRaises(ParseError):
            load_instances(path)


class TestDemandGenerator(SimpleTestCase):

    def setUp(self):
        self.net = load_sample('five_bus')

    def test_same_seed_same_instances(self):
        self.assertEqual(generate_instances(self.net, 3, 42), generate_instances(self.net, 3, 42))

    def test_instance_independent_of_batch_size(self):
        self.assertEqual(generate_instances(self.net, 2, 7)[1].demand, generate_instances(self.net, 5, 7)[1].demand)

    def test_different_seeds_differ(self):
        self.assertNotEqual(generate_instances(self.net, 1, 1)[0].demand, generate_instances(self.net, 1, 2)[0].demand)

    def test_zero_spread_is_baseline(self):
        inst = generate_instances(self.net, 1, 3, spread=0.0)[0]
        self.assertEqual(inst.demand, baseline_instance(self.net).demand)

    def test_bad_arguments(self):
        with self.assertRaises(ValidationError):
            generate_instances(self.net, 0, 1)
        with self.assertRaises(ValidationError):
            generate_instances(self.net, 1, 1, spread=1.5)

    @hypothesis_settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=-2 ** 63, max_value=2 ** 64 - 1),
           spread=st.floats(min_value=0.0, max_value=1.0))
    def test_demand_within_spread(self, seed, spread):
        for inst in generate_instances(self.net, 2, seed, spread):
            for value, b in zip(inst.demand, self.net.buses):
                self.assertGreaterEqual(value, (1 - spread) * b.d_base - 1e-9)
                self.assertLessEqual(value, (1 + spread) * b.d_base + 1e-9)

    def test_file_round_trip(self):
        instances = generate_instances(self.net, 3, 11)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'inst.json'
            save_instances(instances, path)
            self.assertEqual(load_instances(path, self.net), instances)


class TestLineGraph(SimpleTestCase):

    def setUp(self):
        self.path = build_line_graph(load_sample('path5'))

    def test_zero_is_empty(self):
        self.assertEqual(neighborhood(self.path, 2, 0), frozenset())

    def test_rings_on_a_path(self):
        self.assertEqual(neighborhood(self.path, 1, 1), {2})
        self.assertEqual(neighborhood(self.path, 1, 2), {2, 3})
        self.assertEqual(neighborhood(self.path, 2, 1), {1, 3})

    def test_large_k_covers_everything_else(self):
        self.assertEqual(neighborhood(self.path, 1, 50), {2, 3, 4})
        self.assertEqual(self.path.eccentricity(1), 3)

    def test_triangle_lines_all_adjacent(self):
        g = build_line_graph(load_sample('triangle'))
        self.assertEqual(neighborhood(g, 1, 1), {2, 3})

    def test_parallel_lines_adjacent(self):
        net = Network('parallel', (bus(1), bus(2)), (line(1, 1, 2), line(2, 1, 2)))
        self.assertEqual(neighborhood(build_line_graph(net), 1, 1), {2})

    def test_unknown_line(self):
        with self.assertRaises(UnknownLine):
            neighborhood(self.path, 99, 1)

    def test_nested_rings_on_ieee118(self):
        g = build_line_graph(load_sample('ieee118'))
        for line_id in (1, 50, 100, 186):
            previous = frozenset()
            for k in range(7):
                current = neighborhood(g, line_id, k)
                self.assertTrue(previous <= current)
                previous = current

    @hypothesis_settings(max_examples=30, deadline=None)
    @given(line_id=st.integers(min_value=1, max_value=8), k=st.integers(min_value=0, max_value=6))
    def test_monotone_in_k(self, line_id, k):
        g = build_line_graph(load_sample('six_bus'))
        smaller, larger = neighborhood(g, line_id, k), neighborhood(g, line_id, k + 1)
        self.assertTrue(smaller <= larger)
        self.assertNotIn(line_id, larger)


class TestCommandLine(SimpleTestCase):

    def run_cli(self, *argv):
        return main(['ots', *argv])

    def test_topo_prints_neighborhood(self):
        out = io.StringIO()
        call_command('topo', network='path5', line=1, k=2, stdout=out)
        self.assertEqual(json.loads(out.getvalue()), {'line': 1, 'k': 2, 'neighborhood': [2, 3]})

    def test_domain_error_exit_code(self):
        self.assertEqual(self.run_cli('topo', '--network', 'path5', '--line', '99', '--k', '1'), EXIT_DATA)

    def test_usage_error_exit_code(self):
        self.assertEqual(self.run_cli('topo', '--network', 'path5', '--line', '1', '--k', '-1'), EXIT_USAGE)
        self.assertEqual(self.run_cli('topo', '--network', 'path5'), EXIT_USAGE)

    def test_command_error_carries_exit_code(self):
        with self.assertRaises(CommandError) as ctx:
            call_command('gen', network='missing-network', count=1, seed=1, out='unused.json')
        self.assertEqual(ctx.exception.returncode, EXIT_DATA)

    def test_gen_writes_instances(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / 'inst.json'
            call_command('gen', network='triangle', count=4, seed=5, out=str(out), stderr=io.StringIO())
            self.assertEqual([inst.index for inst in load_instances(out)], [0, 1, 2, 3])

    def test_loaded_instance_seed_is_logged(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'inst.json'
            call_command('gen', network='triangle', count=2, seed=5, out=str(path), stderr=io.StringIO())
            with self.assertLogs('core.management', 'INFO') as logs:
                call_command('oracle', network='triangle', instance=str(path), index=1, stdout=io.StringIO())
        self.assertTrue(any('event=instance command=oracle' in line and 'seed=5 index=1' in line
                            for line in logs.output))

    def test_unsupported_model_dump_is_a_data_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            code = self.run_cli('solve', '--network', 'triangle', '--dump-model', str(Path(tmp) / 'model.txt'))
        self.assertEqual(code, EXIT_DATA)

    def test_version(self):
        out = io.StringIO()
        with redirect_stdout(out):
            self.assertEqual(self.run_cli('--version'), EXIT_OK)
        self.assertTrue(out.getvalue().startswith('ots '))
        self.assertIn('CBC', out.getvalue())


class TestSettings(SimpleTestCase):

    def test_no_database_or_auth(self):
        self.assertEqual(settings.DATABASES, {})
        self.assertFalse(apps.is_installed('django.contrib.auth'))
        self.assertFalse(apps.is_installed('django.contrib.contenttypes'))
        self.assertTrue(apps.is_installed('rest_framework'))
