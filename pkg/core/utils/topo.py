import threading
from collections import defaultdict
from typing import Dict, FrozenSet

import networkx as nx

from core.exceptions import UnknownLine
from core.models import Network


class LineGraph(object):
    """Line adjacency of a network.

    Two lines are adjacent when they share at least one endpoint bus, so
    parallel lines are adjacent to each other. Neighborhood queries are
    memoized per ``(line, k)``; the cache is guarded so concurrent readers of a
    batch run can share one instance.

    Attributes:
        adjacency (dict): Line id -> frozenset of adjacent line ids.
    """

    def __init__(self, adjacency: Dict[int, FrozenSet[int]]):
        self.adjacency = {line: frozenset(adj) for line, adj in adjacency.items()}
        self.graph = nx.Graph()
        self.graph.add_nodes_from(self.adjacency)
        self.graph.add_edges_from((line, other) for line, adj in self.adjacency.items() for other in adj)
        self._cache = {}
        self._lock = threading.Lock()

    def __contains__(self, line_id: int) -> bool:
        return line_id in self.adjacency

    def adjacent(self, line_id: int) -> FrozenSet[int]:
        if line_id not in self.adjacency:
            raise UnknownLine(f'line {line_id} is not in the network.')
        return self.adjacency[line_id]

    def eccentricity(self, line_id: int) -> int:
        """Largest line-graph distance from ``line_id`` to any other line."""
        self.adjacent(line_id)
        return max(nx.single_source_shortest_path_length(self.graph, line_id).values())


def build_line_graph(net: Network) -> LineGraph:
    incident = defaultdict(set)
    for line in net.lines:
        for bus in line.endpoints:
            incident[bus].add(line.id)

    adjacency = {line.id: set() for line in net.lines}
    for line in net.lines:
        for bus in line.endpoints:
            adjacency[line.id] |= incident[bus]
        adjacency[line.id].discard(line.id)
    return LineGraph(adjacency)


def neighborhood(g: LineGraph, line_id: int, k: int) -> FrozenSet[int]:
    """Lines within line-graph distance ``k`` of ``line_id``, excluding it.

    ``k = 0`` gives the empty set; rings are added by breadth-first expansion.

    Raises:
        UnknownLine: ``line_id`` is not a line of the graph.
    """
    if k < 0:
        raise ValueError(f'k must be non-negative, got {k}.')
    g.adjacent(line_id)

    key = (line_id, k)
    with g._lock:
        cached = g._cache.get(key)
    if cached is not None:
        return cached

    distances = nx.single_source_shortest_path_length(g.graph, line_id, cutoff=k)
    result = frozenset(other for other in distances if other != line_id)
    with g._lock:
        g._cache[key] = result
    return result
