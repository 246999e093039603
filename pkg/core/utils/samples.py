"""Bundled reference networks.

``triangle``, ``two_bus``, ``path5`` (a tree), ``five_bus`` (6 lines, cycles),
``six_bus`` (8 lines, cycles) and ``ieee118`` live in ``settings.OTS_DATA_DIR``.
"""
from django.conf import settings

from core.models import Network
from core.utils.netio import load_network


SMALL_NETWORKS = ('triangle', 'five_bus', 'six_bus', 'path5')


def sample_path(name: str):
    return settings.OTS_DATA_DIR / f'{name}.json'


def load_sample(name: str) -> Network:
    return load_network(sample_path(name))
