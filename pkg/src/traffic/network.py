"""
Grid road networks built from directed links.

Nodes are (row, col) tuples. Intersections occupy 0 <= row < rows and
0 <= col < cols; boundary stubs sit one step outside the grid on each side
(row -1 / rows, col -1 / cols), corners excluded.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx

logger = logging.getLogger(__name__)

NodeId = Tuple[int, int]


class TrafficError(Exception):
    """Base error for the traffic simulation package."""
    pass


class InvalidScenarioError(TrafficError):
    """Raised when a network, demand or accident definition is inconsistent."""
    pass


class UnknownLinkError(TrafficError):
    """Raised when a link id does not exist in the network."""
    pass


class PhaseGroup(Enum):
    """Signal phase group serving a pair of opposing approaches."""
    NS = "NS"
    EW = "EW"


@dataclass(frozen=True)
class DirectedLink:
    """One-way road segment between two nodes."""
    id: int
    from_node: NodeId
    to_node: NodeId
    length_m: float
    lanes: int
    free_speed_mps: float

    def __post_init__(self):
        """Validate link geometry."""
        if self.length_m <= 0:
            raise InvalidScenarioError(f"Link {self.id}: length must be positive")
        if self.lanes < 1:
            raise InvalidScenarioError(f"Link {self.id}: needs at least one lane")
        if self.free_speed_mps <= 0:
            raise InvalidScenarioError(f"Link {self.id}: free speed must be positive")

    @property
    def traversal_s(self) -> int:
        """Free-flow traversal time in whole ticks, at least one."""
        return max(1, round(self.length_m / self.free_speed_mps))

    @property
    def phase_group(self) -> PhaseGroup:
        """Phase group of the approach this link forms at its downstream node."""
        return PhaseGroup.NS if self.from_node[0] != self.to_node[0] else PhaseGroup.EW


@dataclass
class RoadNetwork:
    """
    Directed grid network with boundary entries and exits.

    Attributes:
        rows: Intersection rows
        cols: Intersection columns
        links: All directed links, index == id
        entries: Ids of links leaving a boundary stub
        intersections: For each intersection, its incoming links per phase group
    """
    rows: int
    cols: int
    links: List[DirectedLink]
    entries: List[int]
    intersections: Dict[NodeId, Dict[PhaseGroup, List[int]]]
    _graph: Optional[nx.DiGraph] = field(default=None, init=False, repr=False, compare=False)
    _routes: Dict[int, Tuple[int, ...]] = field(default_factory=dict, init=False, repr=False, compare=False)

    def link(self, link_id: int) -> DirectedLink:
        """
        Look up a link by id.

        Raises:
            UnknownLinkError: If the id is out of range
        """
        if not 0 <= link_id < len(self.links):
            raise UnknownLinkError(f"Link {link_id} does not exist")
        return self.links[link_id]

    def has_link(self, link_id: int) -> bool:
        return 0 <= link_id < len(self.links)

    def is_intersection(self, node: NodeId) -> bool:
        return node in self.intersections

    @property
    def exits(self) -> List[int]:
        """Ids of links ending at a boundary stub."""
        return [link.id for link in self.links if not self.is_intersection(link.to_node)]

    @property
    def approaches(self) -> List[int]:
        """Ids of links ending at an intersection, in id order."""
        return [link.id for link in self.links if self.is_intersection(link.to_node)]

    def graph(self) -> nx.DiGraph:
        """Node-level directed graph; each edge carries its link id and length."""
        if self._graph is None:
            graph = nx.DiGraph()
            for link in self.links:
                graph.add_edge(link.from_node, link.to_node,
                               link_id=link.id, length_m=link.length_m)
            self._graph = graph
        return self._graph

    def opposite_exit_node(self, entry_id: int) -> NodeId:
        """Boundary stub straight across the grid from an entry's stub."""
        row, col = self.link(entry_id).from_node
        if row == -1:
            return (self.rows, col)
        if row == self.rows:
            return (-1, col)
        if col == -1:
            return (row, self.cols)
        return (row, -1)

    def route_for(self, entry_id: int) -> Tuple[int, ...]:
        """
        Shortest route from an entry to the exit opposite it.

        Ties between equal-length paths are broken by the lexicographically
        lowest sequence of link ids.

        Args:
            entry_id: Id of an entry link

        Returns:
            Link ids from the entry link to the exit link inclusive

        Raises:
            InvalidScenarioError: If the id is not an entry or no route exists
        """
        if entry_id in self._routes:
            return self._routes[entry_id]
        if entry_id not in self.entries:
            raise InvalidScenarioError(f"Link {entry_id} is not an entry link")

        graph = self.graph()
        source = self.link(entry_id).from_node
        target = self.opposite_exit_node(entry_id)
        try:
            node_paths = list(nx.all_shortest_paths(graph, source, target, weight="length_m"))
        except nx.NetworkXNoPath:
            raise InvalidScenarioError(f"No route from entry {entry_id} to {target}")

        candidates = [
            tuple(graph.edges[a, b]["link_id"] for a, b in zip(path, path[1:]))
            for path in node_paths
        ]
        route = min(candidates)
        self._routes[entry_id] = route
        return route

    def validate(self) -> None:
        """
        Check structural invariants of the network.

        Raises:
            InvalidScenarioError: On duplicate ids, bad entries or missing connectivity
        """
        for index, link in enumerate(self.links):
            if link.id != index:
                raise InvalidScenarioError(f"Link ids must be dense; found {link.id} at {index}")
        seen = set()
        for link in self.links:
            key = (link.from_node, link.to_node)
            if key in seen:
                raise InvalidScenarioError(f"Duplicate link {key}")
            seen.add(key)

        for entry_id in self.entries:
            if self.is_intersection(self.link(entry_id).from_node):
                raise InvalidScenarioError(f"Entry {entry_id} does not start at the boundary")

        graph = self.graph()
        exit_nodes = sorted({self.link(exit_id).to_node for exit_id in self.exits})
        for entry_id in self.entries:
            source = self.link(entry_id).from_node
            for target in exit_nodes:
                if not nx.has_path(graph, source, target):
                    raise InvalidScenarioError(
                        f"Exit node {target} unreachable from entry {entry_id}")


def build_grid(rows: int, cols: int, link_length_m: float = 500.0, lanes: int = 3,
               free_speed_mps: float = 13.9) -> RoadNetwork:
    """
    Build a rows x cols signalised grid with a boundary stub on every edge road.

    Link ids are assigned by scanning nodes row-major; for each node the east
    then south neighbour pair is linked forward then backward.

    Args:
        rows: Intersection rows (>= 1)
        cols: Intersection columns (>= 1)
        link_length_m: Length of every link
        lanes: Lane count of every link
        free_speed_mps: Free-flow speed of every link

    Returns:
        Validated RoadNetwork

    Raises:
        InvalidScenarioError: If dimensions or link attributes are invalid
    """
    if rows < 1 or cols < 1:
        raise InvalidScenarioError(f"Grid must be at least 1x1, got {rows}x{cols}")

    def is_inside(node: NodeId) -> bool:
        return 0 <= node[0] < rows and 0 <= node[1] < cols

    def exists(node: NodeId) -> bool:
        row, col = node
        if is_inside(node):
            return True
        # boundary stubs only, no corners
        return (row in (-1, rows)) != (col in (-1, cols)) and -1 <= row <= rows and -1 <= col <= cols

    links: List[DirectedLink] = []

    def add(a: NodeId, b: NodeId) -> None:
        links.append(DirectedLink(len(links), a, b, link_length_m, lanes, free_speed_mps))

    for row in range(-1, rows + 1):
        for col in range(-1, cols + 1):
            node = (row, col)
            if not exists(node):
                continue
            for neighbour in ((row, col + 1), (row + 1, col)):
                if not exists(neighbour):
                    continue
                if not is_inside(node) and not is_inside(neighbour):
                    continue
                add(node, neighbour)
                add(neighbour, node)

    intersections: Dict[NodeId, Dict[PhaseGroup, List[int]]] = {}
    for row in range(rows):
        for col in range(cols):
            intersections[(row, col)] = {PhaseGroup.NS: [], PhaseGroup.EW: []}
    for link in links:
        if link.to_node in intersections:
            intersections[link.to_node][link.phase_group].append(link.id)

    entries = [link.id for link in links if not is_inside(link.from_node)]
    network = RoadNetwork(rows=rows, cols=cols, links=links, entries=entries,
                          intersections=intersections)
    network.validate()
    logger.debug("Built %dx%d grid with %d links and %d entries",
                 rows, cols, len(links), len(entries))
    return network
