from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Tuple

import networkx as nx

from core.exceptions import DisconnectedError, ValidationError


@dataclass(frozen=True)
class Bus:
    """A grid node equipped with a generator and a load.

    Buses without a generating unit are represented with ``p_min = p_max = 0``.

    Attributes:
        id (int): 1-based bus index. The lowest id is the angle reference.
        cost (float): Marginal generation cost (currency/MWh).
        p_min (float): Minimum output (MW).
        p_max (float): Maximum output (MW).
        d_base (float): Baseline demand (MW).
    """
    id: int
    cost: float
    p_min: float
    p_max: float
    d_base: float

    def __post_init__(self):
        if self.id < 1:
            raise ValidationError(f'bus {self.id}: ids are 1-based.')
        if self.p_min < 0:
            raise ValidationError(f'bus {self.id}: p_min must be non-negative.')
        if self.p_min > self.p_max:
            raise ValidationError(f'bus {self.id}: p_min {self.p_min} exceeds p_max {self.p_max}.')
        if self.d_base < 0:
            raise ValidationError(f'bus {self.id}: d_base must be non-negative.')
        if self.cost < 0:
            raise ValidationError(f'bus {self.id}: cost must be non-negative.')


@dataclass(frozen=True)
class Line:
    """A switchable transmission line.

    Flow is positive in the ``from_bus -> to_bus`` direction.
    """
    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    f_min: float
    f_max: float

    def __post_init__(self):
        if self.from_bus == self.to_bus:
            raise ValidationError(f'line {self.id}: both endpoints are bus {self.from_bus}.')
        if self.susceptance <= 0:
            raise ValidationError(f'line {self.id}: susceptance must be positive.')
        if not self.f_min < 0 < self.f_max:
            raise ValidationError(f'line {self.id}: thermal limits must satisfy f_min < 0 < f_max.')

    @property
    def endpoints(self) -> Tuple[int, int]:
        return self.from_bus, self.to_bus


@dataclass(frozen=True)
class Network:
    """Immutable grid description.

    Construction validates every invariant: unique ids, existing endpoints and a
    connected graph over all lines. Parallel lines are allowed and kept apart by
    their ids.
    """
    name: str
    buses: Tuple[Bus, ...]
    lines: Tuple[Line, ...]

    def __post_init__(self):
        object.__setattr__(self, 'buses', tuple(self.buses))
        object.__setattr__(self, 'lines', tuple(self.lines))
        if not self.buses:
            raise ValidationError(f'network {self.name}: no buses.')

        bus_ids = [bus.id for bus in self.buses]
        if len(set(bus_ids)) != len(bus_ids):
            raise ValidationError(f'network {self.name}: duplicate bus ids.')
        line_ids = [line.id for line in self.lines]
        if len(set(line_ids)) != len(line_ids):
            raise ValidationError(f'network {self.name}: duplicate line ids.')

        known = set(bus_ids)
        for line in self.lines:
            for end in line.endpoints:
                if end not in known:
                    raise ValidationError(f'line {line.id}: endpoint bus {end} does not exist.')

        if not nx.is_connected(self.graph):
            islands = sorted(sorted(c) for c in nx.connected_components(self.graph))
            raise DisconnectedError(f'network {self.name}: line graph is not connected, islands {islands}.')

    @cached_property
    def graph(self) -> nx.MultiGraph:
        """Bus graph with one edge per line, keyed by line id."""
        g = nx.MultiGraph()
        g.add_nodes_from(bus.id for bus in self.buses)
        for line in self.lines:
            g.add_edge(line.from_bus, line.to_bus, key=line.id)
        return g

    @cached_property
    def bus_map(self) -> Dict[int, Bus]:
        return {bus.id: bus for bus in self.buses}

    @cached_property
    def line_map(self) -> Dict[int, Line]:
        return {line.id: line for line in self.lines}

    @property
    def bus_ids(self) -> Tuple[int, ...]:
        return tuple(bus.id for bus in self.buses)

    @property
    def line_ids(self) -> Tuple[int, ...]:
        return tuple(line.id for line in self.lines)

    @property
    def reference_bus(self) -> int:
        return min(self.bus_ids)

    @property
    def total_capacity(self) -> float:
        return sum(bus.p_max for bus in self.buses)

    def line(self, line_id: int) -> Line:
        return self.line_map[line_id]

    def bus(self, bus_id: int) -> Bus:
        return self.bus_map[bus_id]


@dataclass(frozen=True)
class Instance:
    """One demand realization over the buses of a network.

    Attributes:
        network_name (str): Name of the network the demand belongs to.
        demand (tuple): Demand per bus (MW), in the network's bus order.
        seed (int): Generator seed, or None for hand-made instances.
        index (int): Position in the generated batch. Used as the instance id.
    """
    network_name: str
    demand: Tuple[float, ...]
    seed: Optional[int] = None
    index: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'demand', tuple(float(d) for d in self.demand))
        for position, value in enumerate(self.demand):
            if value < 0:
                raise ValidationError(f'instance {self.index}: negative demand at position {position}.')

    @property
    def total_demand(self) -> float:
        return sum(self.demand)

    def demand_at(self, net: Network) -> Dict[int, float]:
        """Demand keyed by bus id."""
        return dict(zip(net.bus_ids, self.demand))

    def validate_for(self, net: Network, adequacy: bool = True) -> None:
        """Check the instance against the network it is meant for.

        Args:
            net (Network): The network.
            adequacy (bool): Also require total demand within total capacity.

        Raises:
            ValidationError: Wrong vector length or inadequate generation.
        """
        if len(self.demand) != len(net.buses):
            raise ValidationError(
                f'instance {self.index}: {len(self.demand)} demand values for {len(net.buses)} buses.')
        if adequacy and self.total_demand > net.total_capacity + 1e-9:
            raise ValidationError(
                f'instance {self.index}: total demand {self.total_demand:.3f} exceeds capacity '
                f'{net.total_capacity:.3f}.')


def baseline_instance(net: Network) -> Instance:
    """The instance whose demand is the baseline demand of every bus."""
    return Instance(network_name=net.name, demand=tuple(bus.d_base for bus in net.buses))
