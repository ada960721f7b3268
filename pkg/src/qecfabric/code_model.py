"""Rotated surface code layout, space-time decoding graphs, and noise sampling.

The code is laid out on a d x d grid of data qubits with (d^2 - 1) ancilla
qubits split evenly between an X sector and a Z sector (2*d^2 - 1 qubits in
total).  Each sector is decoded independently on its own space-time graph:
vertices are detectors (stabilizer, round), spacelike edges are data-qubit
faults, timelike edges are measurement faults, and a single virtual BOUNDARY
vertex absorbs chains that terminate on the open boundary.

Noise is phenomenological: every edge of a decoding graph fails
independently with probability p.  Sampling is counter-based (Philox) so a
given (seed, stream) always reproduces the same pattern.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

SECTOR_X = "X"
SECTOR_Z = "Z"
SECTORS = (SECTOR_X, SECTOR_Z)

SPACELIKE = "spacelike"
TIMELIKE = "timelike"

#: Vertex id of the virtual boundary vertex.
BOUNDARY = -1


def rng_stream(seed, *stream):
    """A counter-based generator for the given seed and stream indices.

    Identical (seed, stream) tuples always yield identical draws, which keeps
    parallel Monte-Carlo campaigns reproducible regardless of scheduling.
    """
    return Generator(Philox(SeedSequence((int(seed),) + tuple(int(s) for s in stream))))


@dataclass(frozen=True)
class CodeLayout:
    """Static geometry of one rotated surface code patch.

    Data qubits are indexed row-major on the d x d grid (qubit = row*d + col).
    Ancilla qubits follow: X-sector ancillas first, then Z-sector, each
    row-major by plaquette coordinate.  ``x_stabilizers[i]`` / ``z_stabilizers[i]``
    list the 2 or 4 data qubits checked by that stabilizer.

    ``crossing_chain[sector]`` is the support of the logical operator whose
    odd overlap with a residual error of that sector signals a logical
    failure (a middle column for the X sector, a middle row for Z).
    """

    distance: int
    x_stabilizers: tuple
    z_stabilizers: tuple
    crossing_chain: dict = field(compare=False)

    @property
    def data_qubit_count(self) -> int:
        return self.distance * self.distance

    @property
    def stabilizer_count_per_sector(self) -> int:
        return (self.distance * self.distance - 1) // 2

    @property
    def total_qubits(self) -> int:
        return 2 * self.distance * self.distance - 1

    @property
    def syndrome_bits_per_round(self) -> int:
        return self.distance * self.distance - 1

    def stabilizers(self, sector):
        if sector == SECTOR_X:
            return self.x_stabilizers
        if sector == SECTOR_Z:
            return self.z_stabilizers
        raise ValueError(f"unknown sector {sector!r}")

    def sector_adjacency(self, sector):
        """For each data qubit, the incident stabilizer indices of one sector."""
        adj = [[] for _ in range(self.data_qubit_count)]
        for s, qubits in enumerate(self.stabilizers(sector)):
            for q in qubits:
                adj[q].append(s)
        return [tuple(a) for a in adj]

    def to_records(self):
        """Layout as one structured text record per line (debug export)."""
        lines = [f"layout distance={self.distance} total_qubits={self.total_qubits}"]
        for sector in SECTORS:
            for s, qubits in enumerate(self.stabilizers(sector)):
                qs = ",".join(str(q) for q in qubits)
                lines.append(f"stabilizer sector={sector} id={s} qubits={qs}")
        for sector in SECTORS:
            qs = ",".join(str(q) for q in sorted(self.crossing_chain[sector]))
            lines.append(f"logical sector={sector} qubits={qs}")
        return lines


def build_layout(distance: int) -> CodeLayout:
    """Build the rotated surface code layout for an odd distance.

    Plaquettes sit on the (d+1) x (d+1) dual grid; interior plaquettes
    alternate X/Z in a checkerboard, weight-2 X plaquettes close the top and
    bottom boundaries, and weight-2 Z plaquettes close the left and right.
    """
    if distance < 1 or distance % 2 == 0:
        raise ValueError(f"distance must be an odd integer >= 1, got {distance}")
    d = distance
    x_stabs = []
    z_stabs = []
    for i in range(-1, d):
        for j in range(-1, d):
            corners = [
                (r, c)
                for r, c in ((i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1))
                if 0 <= r < d and 0 <= c < d
            ]
            if len(corners) not in (2, 4):
                continue
            stype = SECTOR_X if (i + j) % 2 == 0 else SECTOR_Z
            if i in (-1, d - 1) and stype != SECTOR_X:
                continue
            if j in (-1, d - 1) and stype != SECTOR_Z:
                continue
            qubits = tuple(r * d + c for r, c in corners)
            (x_stabs if stype == SECTOR_X else z_stabs).append(qubits)

    mid = (d - 1) // 2
    crossing = {
        # Z-type residuals run left-right; a column crosses them once.
        SECTOR_X: frozenset(r * d + mid for r in range(d)),
        # X-type residuals run top-bottom; a row crosses them once.
        SECTOR_Z: frozenset(mid * d + c for c in range(d)),
    }
    layout = CodeLayout(
        distance=d,
        x_stabilizers=tuple(x_stabs),
        z_stabilizers=tuple(z_stabs),
        crossing_chain=crossing,
    )
    assert len(x_stabs) == layout.stabilizer_count_per_sector
    assert len(z_stabs) == layout.stabilizer_count_per_sector
    return layout


@dataclass(frozen=True)
class Edge:
    """One elementary fault mechanism of a decoding graph.

    ``u`` is always a real vertex id; ``v`` is a vertex id or BOUNDARY.
    Spacelike edges carry the data ``qubit`` they live on; timelike edges
    carry the ``stab`` whose measurement they corrupt.
    """

    kind: str
    u: int
    v: int
    qubit: int | None
    stab: int | None
    round: int


class DecodingGraph:
    """Space-time decoding graph of one error sector.

    Vertices are (stabilizer, round) pairs with id = round * n_stabilizers +
    stabilizer.  The edge list order is fixed (per-round spacelike edges in
    data-qubit order, then timelike edges), and the position of an edge in
    the list is its fault id.
    """

    def __init__(self, layout: CodeLayout, sector: str, rounds: int):
        if rounds < 1:
            raise ValueError(f"rounds must be >= 1, got {rounds}")
        if sector not in SECTORS:
            raise ValueError(f"unknown sector {sector!r}")
        self.layout = layout
        self.sector = sector
        self.rounds = rounds
        self.n_stabilizers = layout.stabilizer_count_per_sector

        adj = layout.sector_adjacency(sector)
        edges = []
        for t in range(rounds):
            base = t * self.n_stabilizers
            for q in range(layout.data_qubit_count):
                stabs = adj[q]
                if len(stabs) == 2:
                    edges.append(Edge(SPACELIKE, base + stabs[0], base + stabs[1], q, None, t))
                elif len(stabs) == 1:
                    edges.append(Edge(SPACELIKE, base + stabs[0], BOUNDARY, q, None, t))
                # a qubit touching no stabilizer of this sector (d=1 only)
                # contributes no edge
        for t in range(rounds - 1):
            for s in range(self.n_stabilizers):
                edges.append(
                    Edge(TIMELIKE, t * self.n_stabilizers + s, (t + 1) * self.n_stabilizers + s, None, s, t)
                )
        self.edges = tuple(edges)

        self._spacelike_ids = {}
        self._timelike_ids = {}
        incident = [[] for _ in range(self.n_vertices)]
        for e_id, e in enumerate(self.edges):
            incident[e.u].append(e_id)
            if e.v != BOUNDARY:
                incident[e.v].append(e_id)
            if e.kind == SPACELIKE:
                self._spacelike_ids[(e.qubit, e.round)] = e_id
            else:
                self._timelike_ids[(e.stab, e.round)] = e_id
        self.incident_edges = tuple(tuple(ids) for ids in incident)

        self._incidence = None

    @property
    def n_vertices(self) -> int:
        return self.n_stabilizers * self.rounds

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_id(self, stab: int, round: int) -> int:
        return round * self.n_stabilizers + stab

    def fault_id_of(self, entry, kind) -> int:
        """Fault id for a (qubit, round) data fault or (stab, round) measurement fault."""
        table = self._spacelike_ids if kind == SPACELIKE else self._timelike_ids
        try:
            return table[entry]
        except KeyError:
            raise ValueError(f"unknown {kind} fault {entry!r} for this graph") from None

    def incidence_matrix(self) -> np.ndarray:
        """Edge-by-vertex 0/1 incidence (boundary column omitted), cached."""
        if self._incidence is None:
            mat = np.zeros((self.n_edges, self.n_vertices), dtype=np.uint8)
            for e_id, e in enumerate(self.edges):
                mat[e_id, e.u] = 1
                if e.v != BOUNDARY:
                    mat[e_id, e.v] = 1
            mat.flags.writeable = False
            self._incidence = mat
        return self._incidence

    def to_records(self):
        """Graph as one structured text record per line (debug export)."""
        lines = [
            f"graph sector={self.sector} rounds={self.rounds} "
            f"vertices={self.n_vertices} edges={self.n_edges}"
        ]
        for v in range(self.n_vertices):
            s = v % self.n_stabilizers
            t = v // self.n_stabilizers
            lines.append(f"vertex id={v} stab={s} round={t}")
        for e_id, e in enumerate(self.edges):
            v = "boundary" if e.v == BOUNDARY else str(e.v)
            src = f"qubit={e.qubit}" if e.kind == SPACELIKE else f"stab={e.stab}"
            lines.append(f"edge id={e_id} kind={e.kind} u={e.u} v={v} {src} round={e.round}")
        return lines


def build_decoding_graph(layout: CodeLayout, sector: str, rounds: int) -> DecodingGraph:
    """Space-time graph of `rounds` measurement rounds for one sector."""
    return DecodingGraph(layout, sector, rounds)


@dataclass(frozen=True)
class ErrorPattern:
    """A concrete set of faults on one sector's decoding graph.

    ``data_faults`` holds (data qubit, round) entries (spacelike edges) and
    ``measurement_faults`` holds (stabilizer, round) entries (timelike
    edges, rounds 0..r-2 since the final round is read out perfectly).
    """

    sector: str
    data_faults: frozenset
    measurement_faults: frozenset
    rng_seed: int = 0

    @property
    def weight(self) -> int:
        return len(self.data_faults) + len(self.measurement_faults)

    def fault_ids(self, graph: DecodingGraph) -> frozenset:
        """Resolve the pattern to fault ids; rejects entries foreign to graph."""
        if graph.sector != self.sector:
            raise ValueError(f"pattern sector {self.sector} does not match graph {graph.sector}")
        ids = set()
        for entry in self.data_faults:
            ids.add(graph.fault_id_of(entry, SPACELIKE))
        for entry in self.measurement_faults:
            ids.add(graph.fault_id_of(entry, TIMELIKE))
        return frozenset(ids)

    def __xor__(self, other: "ErrorPattern") -> "ErrorPattern":
        if other.sector != self.sector:
            raise ValueError("cannot combine patterns from different sectors")
        return ErrorPattern(
            sector=self.sector,
            data_faults=self.data_faults ^ other.data_faults,
            measurement_faults=self.measurement_faults ^ other.measurement_faults,
            rng_seed=self.rng_seed,
        )


def pattern_from_fault_ids(graph: DecodingGraph, fault_ids, rng_seed: int = 0) -> ErrorPattern:
    """Inverse of ErrorPattern.fault_ids."""
    data, meas = set(), set()
    for e_id in fault_ids:
        e = graph.edges[e_id]
        if e.kind == SPACELIKE:
            data.add((e.qubit, e.round))
        else:
            meas.add((e.stab, e.round))
    return ErrorPattern(graph.sector, frozenset(data), frozenset(meas), rng_seed)


def sample_errors(graph: DecodingGraph, p: float, seed: int, stream=()) -> ErrorPattern:
    """Sample one fault pattern: each edge fails independently with probability p.

    ``stream`` extends the seed into independent substreams, e.g. (shot,
    sector_index) during a campaign.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be a probability, got {p}")
    rng = rng_stream(seed, *stream)
    hits = np.nonzero(rng.random(graph.n_edges) < p)[0]
    return pattern_from_fault_ids(graph, hits.tolist(), rng_seed=seed)


@dataclass(frozen=True, eq=False)
class SyndromeRounds:
    """Detector outcomes for r rounds, both sectors side by side.

    ``bits`` is an r x (d^2 - 1) uint8 matrix; columns [0, split) belong to
    the X sector and [split, d^2 - 1) to the Z sector, each row-major by
    plaquette coordinate.  Bits follow the detector convention (XOR of
    consecutive raw ancilla measurements).
    """

    bits: np.ndarray
    split: int

    def __post_init__(self):
        self.bits.flags.writeable = False

    @property
    def rounds(self) -> int:
        return self.bits.shape[0]

    def sector_bits(self, sector: str) -> np.ndarray:
        if sector == SECTOR_X:
            return self.bits[:, : self.split]
        if sector == SECTOR_Z:
            return self.bits[:, self.split :]
        raise ValueError(f"unknown sector {sector!r}")

    def defect_vertices(self, graph: DecodingGraph):
        """Vertex ids of nonzero detectors in the given graph's sector."""
        sb = self.sector_bits(graph.sector)
        if sb.shape != (graph.rounds, graph.n_stabilizers):
            raise ValueError(
                f"syndrome shape {sb.shape} does not match graph "
                f"({graph.rounds}, {graph.n_stabilizers})"
            )
        ts, ss = np.nonzero(sb)
        return [int(t) * graph.n_stabilizers + int(s) for t, s in zip(ts, ss)]

    @property
    def total_weight(self) -> int:
        return int(self.bits.sum())

    def __xor__(self, other: "SyndromeRounds") -> "SyndromeRounds":
        if self.split != other.split or self.bits.shape != other.bits.shape:
            raise ValueError("syndrome dimensions differ")
        return SyndromeRounds(self.bits ^ other.bits, self.split)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SyndromeRounds)
            and self.split == other.split
            and self.bits.shape == other.bits.shape
            and bool((self.bits == other.bits).all())
        )


def empty_syndrome(layout: CodeLayout, rounds: int) -> SyndromeRounds:
    bits = np.zeros((rounds, layout.syndrome_bits_per_round), dtype=np.uint8)
    return SyndromeRounds(bits, layout.stabilizer_count_per_sector)


def syndrome_from_defects(graph: DecodingGraph, defect_vertices) -> SyndromeRounds:
    """Syndrome with the given vertices of one sector flipped."""
    syn = empty_syndrome(graph.layout, graph.rounds)
    bits = np.array(syn.bits)
    offset = 0 if graph.sector == SECTOR_X else syn.split
    for v in defect_vertices:
        t, s = divmod(v, graph.n_stabilizers)
        bits[t, offset + s] ^= 1
    return SyndromeRounds(bits, syn.split)


def syndrome_of(pattern: ErrorPattern, graph: DecodingGraph) -> SyndromeRounds:
    """Detector outcomes of a fault pattern: vertex bit = parity of incident faults.

    The virtual boundary absorbs parity silently.  Only the graph's own
    sector columns are populated; combine sectors with XOR.
    """
    ids = pattern.fault_ids(graph)
    flipped = np.zeros(graph.n_vertices, dtype=np.uint8)
    for e_id in ids:
        e = graph.edges[e_id]
        flipped[e.u] ^= 1
        if e.v != BOUNDARY:
            flipped[e.v] ^= 1
    return syndrome_from_defects(graph, np.nonzero(flipped)[0].tolist())
