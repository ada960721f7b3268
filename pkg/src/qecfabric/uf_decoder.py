"""Union-find decoding of space-time syndromes, plus a minimum-weight oracle.

The decoder follows the standard union-find scheme: clusters seeded on
defect vertices grow by half edges, merge through a disjoint-set forest,
freeze once their parity is even or they touch the open boundary, and are
then peeled leaf-first along a spanning forest to extract the correction.
All tie-breaks (growth order, fusion order, peeling order) use fixed
vertex/edge-id order, so decoding is a pure function of (graph, syndrome).

``oracle_decode`` is an independent reference: exhaustive minimum-weight
search on small graphs, shortest-path defect pairing on small syndromes.
It shares no code with the cluster decoder beyond the graph structures.
"""

from __future__ import annotations

import itertools
from collections import defaultdict, deque
from dataclasses import dataclass, field

from .code_model import (
    BOUNDARY,
    SPACELIKE,
    CodeLayout,
    DecodingGraph,
    ErrorPattern,
    SyndromeRounds,
    pattern_from_fault_ids,
    syndrome_of,
)

HALF = 1
FULL = 2


class OracleCapError(ValueError):
    """Instance too large for the brute-force oracle."""


@dataclass(frozen=True, eq=False)
class Correction:
    """Edge set selected by a decoder for one sector.

    ``data_faults``/``measurement_faults`` mirror ErrorPattern so residuals
    can be formed by XOR.  ``graph`` is the decoding graph the fault ids
    refer to.
    """

    sector: str
    fault_ids: frozenset
    data_faults: frozenset
    measurement_faults: frozenset
    graph: DecodingGraph = field(repr=False)

    @property
    def weight(self) -> int:
        return len(self.fault_ids)


def _correction_from_ids(graph: DecodingGraph, fault_ids) -> Correction:
    pat = pattern_from_fault_ids(graph, fault_ids)
    return Correction(
        sector=graph.sector,
        fault_ids=frozenset(int(i) for i in fault_ids),
        data_faults=pat.data_faults,
        measurement_faults=pat.measurement_faults,
        graph=graph,
    )


@dataclass
class DecodeStats:
    growth_iterations: int = 0
    fusions: int = 0
    clusters: int = 0


class ClusterState:
    """Disjoint-set forest over graph vertices with cluster growth state.

    Tracks per-cluster defect parity, a boundary-touch flag, per-edge growth
    meters (0 / half / full) and the list of candidate growth edges.  A
    cluster is frozen (stops growing) once its parity is even or it touches
    the boundary.
    """

    def __init__(self, graph: DecodingGraph, defects):
        self.graph = graph
        n = graph.n_vertices
        self.parent = list(range(n))
        self.rank = [0] * n
        self.parity = [0] * n
        self.touches_boundary = [False] * n
        self.growth = [0] * graph.n_edges
        self.defect = [False] * n
        self._edge_lists = {}
        for v in defects:
            self.parity[v] = 1
            self.defect[v] = True
            self._edge_lists[v] = list(graph.incident_edges[v])

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:  # path compression
            self.parent[v], v = root, self.parent[v]
        return root

    def _edges_of(self, root: int):
        lst = self._edge_lists.get(root)
        if lst is None:
            lst = list(self.graph.incident_edges[root])
            self._edge_lists[root] = lst
        return lst

    def union(self, a: int, b: int) -> int:
        """Merge the clusters of a and b; never splits. Returns the new root."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        elif self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.parent[rb] = ra
        self.parity[ra] ^= self.parity[rb]
        self.touches_boundary[ra] = self.touches_boundary[ra] or self.touches_boundary[rb]
        self._edges_of(ra).extend(self._edges_of(rb))
        self._edge_lists.pop(rb, None)
        return ra

    def active_roots(self):
        """Roots of odd-parity clusters not touching the boundary, id order."""
        roots = set()
        for v, pr in self._edge_lists.items():
            r = self.find(v)
            if self.parity[r] == 1 and not self.touches_boundary[r]:
                roots.add(r)
        return sorted(roots)

    def grow(self, stats: DecodeStats):
        """One parallel growth step of every active cluster.

        Every candidate edge of every active cluster gains half an edge of
        growth; edges reaching full growth trigger fusions (in edge-id
        order).  Returns True while any cluster is still active.
        """
        active = self.active_roots()
        if not active:
            return False
        stats.growth_iterations += 1
        fused = set()
        for root in active:
            lst = self._edge_lists[root]
            keep = []
            for e_id in lst:
                g = self.growth[e_id]
                if g >= FULL:
                    continue
                g += HALF
                self.growth[e_id] = g
                if g >= FULL:
                    fused.add(e_id)
                else:
                    keep.append(e_id)
            lst[:] = keep
        for e_id in sorted(fused):
            stats.fusions += 1
            e = self.graph.edges[e_id]
            if e.v == BOUNDARY:
                self.touches_boundary[self.find(e.u)] = True
            else:
                self.union(e.u, e.v)
        return True


def _peel_cluster(graph, verts, defect, interior_full, boundary_full, touches_boundary):
    """Leaf-first peeling of one frozen cluster; returns selected edge ids."""
    adjacency = defaultdict(list)
    for e_id in interior_full:
        e = graph.edges[e_id]
        adjacency[e.u].append((e_id, e.v))
        adjacency[e.v].append((e_id, e.u))
    for v in adjacency:
        adjacency[v].sort()

    if touches_boundary:
        root_edge = min(boundary_full)
        tree_root = graph.edges[root_edge].u
    else:
        root_edge = None
        tree_root = min(verts)

    order = [tree_root]
    parent_of = {tree_root: (None, None)}
    queue = deque([tree_root])
    while queue:
        v = queue.popleft()
        for e_id, w in adjacency[v]:
            if w not in parent_of:
                parent_of[w] = (v, e_id)
                order.append(w)
                queue.append(w)

    selected = []
    live = dict((v, defect[v]) for v in order)
    for v in reversed(order[1:]):
        if live[v]:
            pv, pe = parent_of[v]
            selected.append(pe)
            live[pv] = not live[pv]
    if live[tree_root]:
        if root_edge is None:
            raise AssertionError("even-parity cluster left an unpaired defect")
        selected.append(root_edge)
    return selected


def decode_with_stats(graph: DecodingGraph, syndrome: SyndromeRounds):
    """Union-find decode returning the correction and growth statistics."""
    defects = syndrome.defect_vertices(graph)
    stats = DecodeStats()
    if not defects:
        return _correction_from_ids(graph, ()), stats

    state = ClusterState(graph, defects)
    while state.grow(stats):
        pass

    members = defaultdict(list)
    for v in range(graph.n_vertices):
        members[state.find(v)].append(v)
    interior_full = defaultdict(list)
    boundary_full = defaultdict(list)
    for e_id, g in enumerate(state.growth):
        if g >= FULL:
            e = graph.edges[e_id]
            root = state.find(e.u)
            if e.v == BOUNDARY:
                boundary_full[root].append(e_id)
            else:
                interior_full[root].append(e_id)

    selected = []
    for root in sorted(members):
        verts = members[root]
        if not any(state.defect[v] for v in verts):
            continue
        stats.clusters += 1
        selected.extend(
            _peel_cluster(
                graph,
                verts,
                state.defect,
                interior_full[root],
                boundary_full[root],
                state.touches_boundary[root],
            )
        )
    return _correction_from_ids(graph, selected), stats


def decode(graph: DecodingGraph, syndrome: SyndromeRounds) -> Correction:
    """Decode one sector's syndrome; the correction always annihilates it."""
    correction, _ = decode_with_stats(graph, syndrome)
    return correction


def _edge_masks(graph: DecodingGraph):
    masks = []
    for e in graph.edges:
        m = 1 << e.u
        if e.v != BOUNDARY:
            m ^= 1 << e.v
        masks.append(m)
    return masks


def _pairing_decode(graph: DecodingGraph, defects):
    """Minimum shortest-path pairing of defects (boundary allowed)."""
    n_b = graph.n_vertices  # pseudo-vertex standing in for the boundary
    adjacency = defaultdict(list)
    for e_id, e in enumerate(graph.edges):
        v = n_b if e.v == BOUNDARY else e.v
        adjacency[e.u].append((v, e_id))
        adjacency[v].append((e.u, e_id))

    def bfs(src):
        dist = {src: 0}
        pred = {src: None}  # vertex -> (prev vertex, edge id)
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w, e_id in sorted(adjacency[u], key=lambda x: x[1]):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    pred[w] = (u, e_id)
                    queue.append(w)
        return dist, pred

    info = {d: bfs(d) for d in defects}

    def path_edges(src, dst):
        _, pred = info[src]
        out = []
        v = dst
        while pred[v] is not None:
            u, e_id = pred[v]
            out.append(e_id)
            v = u
        return out

    best = {"cost": None, "pairs": None}

    def search(remaining, cost, pairs):
        if best["cost"] is not None and cost >= best["cost"]:
            return
        if not remaining:
            best["cost"], best["pairs"] = cost, list(pairs)
            return
        d0 = remaining[0]
        rest = remaining[1:]
        dist0 = info[d0][0]
        for k, dj in enumerate(rest):
            if dj in dist0:
                pairs.append((d0, dj))
                search(rest[:k] + rest[k + 1 :], cost + dist0[dj], pairs)
                pairs.pop()
        if n_b in dist0:
            pairs.append((d0, n_b))
            search(rest, cost + dist0[n_b], pairs)
            pairs.pop()

    search(sorted(defects), 0, [])
    if best["pairs"] is None:
        raise OracleCapError("no pairing annihilates the syndrome")
    chosen = set()
    for a, b in best["pairs"]:
        chosen ^= set(path_edges(a, b))
    return chosen


def oracle_decode(
    graph: DecodingGraph,
    syndrome: SyndromeRounds,
    exhaustive_edge_cap: int = 40,
    defect_cap: int = 12,
    max_weight: int = 6,
) -> Correction:
    """Minimum-weight correction by brute force, for small-instance checks.

    Graphs with at most ``exhaustive_edge_cap`` edges are searched by
    increasing subset weight; larger instances fall back to shortest-path
    pairing of at most ``defect_cap`` defects.  Raises OracleCapError beyond
    those caps.
    """
    defects = syndrome.defect_vertices(graph)
    if not defects:
        return _correction_from_ids(graph, ())
    if graph.n_edges <= exhaustive_edge_cap:
        target = 0
        for v in defects:
            target ^= 1 << v
        masks = _edge_masks(graph)
        ids = range(graph.n_edges)
        for w in range(max_weight + 1):
            for combo in itertools.combinations(ids, w):
                acc = 0
                for e_id in combo:
                    acc ^= masks[e_id]
                if acc == target:
                    return _correction_from_ids(graph, combo)
        raise OracleCapError(f"no solution of weight <= {max_weight} found")
    if len(defects) <= defect_cap:
        return _correction_from_ids(graph, _pairing_decode(graph, defects))
    raise OracleCapError(
        f"instance too large: {graph.n_edges} edges, {len(defects)} defects"
    )


def count_min_weight_solutions(graph: DecodingGraph, syndrome: SyndromeRounds, weight: int) -> int:
    """How many edge sets of exactly `weight` annihilate the syndrome."""
    target = 0
    for v in syndrome.defect_vertices(graph):
        target ^= 1 << v
    masks = _edge_masks(graph)
    count = 0
    for combo in itertools.combinations(range(graph.n_edges), weight):
        acc = 0
        for e_id in combo:
            acc ^= masks[e_id]
        if acc == target:
            count += 1
    return count


def is_valid(correction: Correction, syndrome: SyndromeRounds, graph: DecodingGraph) -> bool:
    """True iff the correction's edge parity reproduces the sector syndrome."""
    flipped = bytearray(graph.n_vertices)
    for e_id in correction.fault_ids:
        e = graph.edges[e_id]
        flipped[e.u] ^= 1
        if e.v != BOUNDARY:
            flipped[e.v] ^= 1
    sector_bits = syndrome.sector_bits(graph.sector)
    if sector_bits.shape != (graph.rounds, graph.n_stabilizers):
        raise ValueError("syndrome dimensions do not match graph")
    for v, f in enumerate(flipped):
        t, s = divmod(v, graph.n_stabilizers)
        if int(sector_bits[t, s]) != f:
            return False
    return True


def is_logical_failure(pattern: ErrorPattern, correction: Correction, layout: CodeLayout) -> bool:
    """True iff the residual error crosses the sector's logical chain oddly.

    The residual is pattern XOR correction; only its spacelike support
    matters (measurement faults never touch the data).  Rejects corrections
    that do not annihilate the pattern's syndrome.
    """
    graph = correction.graph
    if not is_valid(correction, syndrome_of(pattern, graph), graph):
        raise ValueError("correction does not annihilate the pattern's syndrome")
    chain = layout.crossing_chain[pattern.sector]
    residual = pattern.data_faults ^ correction.data_faults
    crossings = sum(1 for qubit, _ in residual if qubit in chain)
    return crossings % 2 == 1
