import json
import logging
from pathlib import Path
from typing import Iterable, List, Union

from django.conf import settings
from rest_framework import serializers

from core.exceptions import ParseError
from core.models import Instance, Network
from core.serializers import InstanceSerializer, NetworkSerializer


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def resolve_network_path(name: PathLike) -> Path:
    """Resolve a network argument.

    A path that exists is used as is. Otherwise the name is looked up in
    ``settings.OTS_DATA_DIR``, with or without its ``.json`` suffix, so that
    ``ieee118`` and ``ieee118.json`` both find the bundled file.

    Args:
        name (str): Path or bundled network name.

    Returns:
        Path: The resolved path. It may not exist; loading reports that.
    """
    path = Path(name)
    if path.exists():
        return path
    data_dir = Path(settings.OTS_DATA_DIR)
    for candidate in (data_dir / path.name, data_dir / f'{path.name}.json'):
        if candidate.exists():
            return candidate
    return path


def read_json(path: PathLike):
    """Read a JSON document.

    Raises:
        ParseError: The file is missing or is not valid JSON.
    """
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ParseError(f'{path}: file not found.') from e
    except json.JSONDecodeError as e:
        raise ParseError(f'{path}: malformed JSON ({e}).') from e


def write_json(path: PathLike, payload) -> None:
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2)
        f.write('\n')


def deserialize(serializer: serializers.Serializer, origin: str):
    if not serializer.is_valid():
        raise ParseError(f'{origin}: {json.dumps(serializer.errors)}')
    return serializer.save()


def load_network(path: PathLike) -> Network:
    """Load and validate a network file.

    Args:
        path (str): Network JSON path or the name of a bundled network.

    Returns:
        Network: The validated network.

    Raises:
        ParseError: Malformed JSON or fields.
        ValidationError: A bus or line invariant is violated.
        DisconnectedError: The line graph is not connected.
    """
    path = resolve_network_path(path)
    net = deserialize(NetworkSerializer(data=read_json(path)), str(path))
    logger.debug('event=network-loaded path=%s buses=%d lines=%d', path, len(net.buses), len(net.lines))
    return net


def save_network(net: Network, path: PathLike) -> None:
    write_json(path, NetworkSerializer(net).data)


def load_instances(path: PathLike, net: Network = None) -> List[Instance]:
    """Load an instance file.

    Args:
        path (str): Instance JSON path.
        net (Network): When given, every instance is validated against it.

    Raises:
        ParseError: Truncated or malformed file.
        ValidationError: Demand vector does not fit the network.
    """
    payload = read_json(path)
    if not isinstance(payload, list):
        raise ParseError(f'{path}: expected a list of instances.')
    instances = deserialize(InstanceSerializer(data=payload, many=True), str(path))
    if net is not None:
        for inst in instances:
            inst.validate_for(net)
    return instances


def save_instances(instances: Iterable[Instance], path: PathLike) -> None:
    write_json(path, InstanceSerializer(list(instances), many=True).data)
