from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from grid_planning.network.model import GridNetwork, GridValidationError

# Edge index used for the transformer branch in the edge list.
TRANSFORMER_EDGE = -1
BUSBAR_BRANCH = -1  # branch_of value of a busbar behind the transformer


@dataclass(frozen=True)
class Branch:
    """One subtree hanging off the transformer's LV bus."""

    index: int
    root: int  # first bus below the LV bus
    buses: Tuple[int, ...]
    segments: Tuple[int, ...]


@dataclass(frozen=True)
class Edge:
    segment: int  # index into grid.segments, or TRANSFORMER_EDGE
    upstream: int
    downstream: int


class Topology:
    """
    Rooted view of a radial grid.

    ``incidence`` is the branch-to-bus matrix K (edges x non-slack buses):
    K[k, i] = 1 when bus i lies downstream of edge k. Branch currents are
    -K @ I_injected and bus voltage drops are K.T @ (Z * J).
    """

    def __init__(
        self,
        grid: GridNetwork,
        graph: nx.Graph,
        parent_edge: Dict[int, int],
        edges: List[Edge],
        order: List[int],
    ) -> None:
        self.grid = grid
        self.graph = graph
        self.parent_edge = parent_edge  # bus id -> index into edges
        self.edges = edges
        self.order = order  # BFS order from the slack
        slack = grid.slack.id
        self.slack = slack
        self.nonslack = np.array([b.id for b in grid.buses if b.id != slack], dtype=int)
        self.position = {int(b): i for i, b in enumerate(self.nonslack)}
        self._children: Dict[int, List[int]] = {b.id: [] for b in grid.buses}
        for edge in edges:
            self._children[edge.upstream].append(edge.downstream)

        k_mat = np.zeros((len(edges), self.nonslack.size))
        for bus in self.nonslack:
            col = self.position[int(bus)]
            node = int(bus)
            while node != slack:
                e = parent_edge[node]
                k_mat[e, col] = 1.0
                node = edges[e].upstream
        k_mat.setflags(write=False)
        self.incidence = k_mat

        z = np.array([self._edge_impedance(e) for e in edges], dtype=complex)
        z.setflags(write=False)
        self.edge_impedance = z  # p.u.

    @classmethod
    def build(cls, grid: GridNetwork) -> "Topology":
        validate_grid(grid)
        slack = grid.slack.id
        lv = grid.transformer.lv_bus

        graph = nx.Graph()
        graph.add_nodes_from(b.id for b in grid.buses)
        for k, seg in enumerate(grid.segments):
            graph.add_edge(seg.from_bus, seg.to_bus, segment=k)
        if lv != slack:
            graph.add_edge(slack, lv, segment=TRANSFORMER_EDGE)

        edges: List[Edge] = []
        parent_edge: Dict[int, int] = {}
        order = [slack]
        for up, down in nx.bfs_edges(graph, slack):
            parent_edge[down] = len(edges)
            edges.append(Edge(graph.edges[up, down]["segment"], up, down))
            order.append(down)
        return cls(grid, graph, parent_edge, edges, order)

    def _edge_impedance(self, edge: Edge) -> complex:
        if edge.segment == TRANSFORMER_EDGE:
            t = self.grid.transformer
            return complex(t.resistance_ohm, t.reactance_ohm) / self.grid.z_base
        return self.grid.segment_impedance_pu(edge.segment)

    def segment_edges(self) -> np.ndarray:
        """Edge positions of the line segments, ordered by segment index."""
        pos = np.empty(len(self.grid.segments), dtype=int)
        for e, edge in enumerate(self.edges):
            if edge.segment != TRANSFORMER_EDGE:
                pos[edge.segment] = e
        return pos

    def children(self, bus: int) -> List[int]:
        return sorted(self._children[bus])

    def subtree(self, bus: int) -> List[int]:
        out = [bus]
        stack = self.children(bus)
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(self.children(node))
        return sorted(out)


# ---------------- Validation ----------------


def validate_grid(grid: GridNetwork) -> None:
    ids = [b.id for b in grid.buses]
    seen: set[int] = set()
    for i in ids:
        if i in seen:
            raise GridValidationError(f"duplicate bus id: {i}")
        seen.add(i)
    if sorted(ids) != list(range(len(ids))):
        raise GridValidationError(
            f"bus ids must be contiguous from 0 (got {sorted(ids)[:5]}...)"
        )

    slacks = [b.id for b in grid.buses if b.kind == "slack"]
    if len(slacks) != 1:
        raise GridValidationError(f"exactly one slack bus required (found {len(slacks)})")
    slack = slacks[0]

    _validate_catalog(grid)

    for seg in grid.segments:
        grid.line_type(seg.line_type)  # raises on unknown type
        for b in (seg.from_bus, seg.to_bus):
            if b not in seen:
                raise GridValidationError(
                    f"segment {seg.from_bus}-{seg.to_bus}: unknown bus {b}"
                )
        if seg.from_bus == seg.to_bus:
            raise GridValidationError(f"segment {seg.from_bus}-{seg.to_bus}: self loop")

    lv = grid.transformer.lv_bus
    if lv not in seen:
        raise GridValidationError(f"transformer lv_bus {lv} is not a bus")

    graph = nx.MultiGraph()
    graph.add_nodes_from(ids)
    for seg in grid.segments:
        graph.add_edge(seg.from_bus, seg.to_bus)
    if lv != slack:
        graph.add_edge(slack, lv)

    n_edges = graph.number_of_edges()
    if n_edges != len(ids) - 1 or not nx.is_tree(nx.Graph(graph)):
        cycle = _find_cycle(graph)
        detail = f" (loop through buses {cycle})" if cycle else ""
        raise GridValidationError(
            f"non-radial topology: {len(ids)} buses, {n_edges} branches{detail}"
        )


def _validate_catalog(grid: GridNetwork) -> None:
    names = [lt.name for lt in grid.catalog]
    if len(set(names)) != len(names):
        raise GridValidationError("duplicate line type name in catalog")
    by_r = sorted(grid.catalog, key=lambda lt: -lt.r_per_km)
    for smaller, larger in zip(by_r, by_r[1:]):
        if not (larger.r_per_km < smaller.r_per_km and larger.ampacity > smaller.ampacity):
            raise GridValidationError(
                f"catalog ordering: {larger.name!r} must have lower resistance "
                f"and higher ampacity than {smaller.name!r}"
            )


def _find_cycle(graph: nx.MultiGraph) -> Optional[List[int]]:
    try:
        cycle = nx.find_cycle(graph)
    except nx.NetworkXNoCycle:
        return None
    return [int(u) for u, *_ in cycle]


# ---------------- Queries ----------------


def branches(grid: GridNetwork) -> List[Branch]:
    """One branch per child subtree of the transformer's LV bus, ordered by root id."""
    topo = grid.topology
    out: List[Branch] = []
    lv = grid.transformer.lv_bus
    for i, root in enumerate(topo.children(lv)):
        buses = topo.subtree(root)
        segs = sorted(
            topo.edges[topo.parent_edge[b]].segment
            for b in buses
            if topo.edges[topo.parent_edge[b]].segment != TRANSFORMER_EDGE
        )
        out.append(Branch(i, root, tuple(buses), tuple(segs)))
    return out


def path_to_slack(grid: GridNetwork, bus: int) -> List[int]:
    """Segment indices on the unique path between ``bus`` and the slack, slack first."""
    topo = grid.topology
    if bus not in topo.graph:
        raise KeyError(f"unknown bus id: {bus}")
    path: List[int] = []
    node = bus
    while node != topo.slack:
        edge = topo.edges[topo.parent_edge[node]]
        if edge.segment != TRANSFORMER_EDGE:
            path.append(edge.segment)
        node = edge.upstream
    path.reverse()
    return path


def leaves(grid: GridNetwork) -> List[int]:
    topo = grid.topology
    return [b for b in topo.order if b != topo.slack and not topo.children(b)]


def branch_of(grid: GridNetwork) -> Dict[int, int]:
    """
    Map non-slack bus id -> branch index. A busbar modelled behind the
    transformer (``lv_bus`` != slack) is the common root of every branch and
    maps to ``BUSBAR_BRANCH``; every other non-slack bus has exactly one branch.
    """
    out: Dict[int, int] = {}
    for br in branches(grid):
        for b in br.buses:
            out[b] = br.index
    lv = grid.transformer.lv_bus
    if lv != grid.slack.id:
        out[lv] = BUSBAR_BRANCH
    return out
