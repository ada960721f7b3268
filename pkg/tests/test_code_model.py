import numpy as np
import pytest

from qecfabric import code_model as cm


@pytest.mark.parametrize(
    "d,total,bits",
    [(1, 1, 0), (3, 17, 8), (5, 49, 24), (7, 97, 48), (21, 881, 440)],
)
def test_layout_counts(d, total, bits):
    layout = cm.build_layout(d)
    assert layout.total_qubits == total
    assert layout.syndrome_bits_per_round == bits
    assert layout.data_qubit_count == d * d
    assert len(layout.x_stabilizers) == layout.stabilizer_count_per_sector
    assert len(layout.z_stabilizers) == layout.stabilizer_count_per_sector


@pytest.mark.parametrize("d", [0, 2, 4, -3])
def test_layout_rejects_bad_distance(d):
    with pytest.raises(ValueError):
        cm.build_layout(d)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_stabilizer_geometry(d):
    layout = cm.build_layout(d)
    for sector in cm.SECTORS:
        adjacency = layout.sector_adjacency(sector)
        assert all(1 <= len(stabs) <= 2 for stabs in adjacency)
        for qubits in layout.stabilizers(sector):
            assert len(qubits) in (2, 4)
            if len(qubits) == 4:
                # a weight-4 stabilizer's qubits form a 2x2 plaquette
                rows = sorted({q // d for q in qubits})
                cols = sorted({q % d for q in qubits})
                assert len(rows) == 2 and rows[1] - rows[0] == 1
                assert len(cols) == 2 and cols[1] - cols[0] == 1


def test_layout_deterministic():
    assert cm.build_layout(5) == cm.build_layout(5)


def test_crossing_chains_commute_with_opposite_sector():
    # the crossing chain must overlap every opposite-sector stabilizer evenly
    for d in (3, 5, 7):
        layout = cm.build_layout(d)
        for sector, opposite in ((cm.SECTOR_X, cm.SECTOR_Z), (cm.SECTOR_Z, cm.SECTOR_X)):
            chain = layout.crossing_chain[sector]
            assert len(chain) == d
            for qubits in layout.stabilizers(opposite):
                assert len(chain & set(qubits)) % 2 == 0


def test_graph_counts_d3():
    layout = cm.build_layout(3)
    graph = cm.build_decoding_graph(layout, cm.SECTOR_X, 3)
    assert graph.n_vertices == 12
    timelike = [e for e in graph.edges if e.kind == cm.TIMELIKE]
    assert len(timelike) == 8


def test_graph_single_round_has_no_timelike_edges():
    layout = cm.build_layout(3)
    graph = cm.build_decoding_graph(layout, cm.SECTOR_Z, 1)
    assert all(e.kind == cm.SPACELIKE for e in graph.edges)


def test_graph_counts_d5():
    graph = cm.build_decoding_graph(cm.build_layout(5), cm.SECTOR_X, 5)
    assert graph.n_vertices == 60  # (25-1)/2 stabilizers x 5 rounds


@pytest.mark.parametrize("d,rounds", [(3, 1), (3, 3), (5, 2)])
def test_graph_edge_structure(d, rounds):
    layout = cm.build_layout(d)
    for sector in cm.SECTORS:
        graph = cm.build_decoding_graph(layout, sector, rounds)
        spacelike = [e for e in graph.edges if e.kind == cm.SPACELIKE]
        timelike = [e for e in graph.edges if e.kind == cm.TIMELIKE]
        # one spacelike (or boundary) edge per data qubit per round
        assert len(spacelike) == layout.data_qubit_count * rounds
        assert len(timelike) == graph.n_stabilizers * (rounds - 1)
        # each fault maps to exactly one edge and back
        for e_id, e in enumerate(graph.edges):
            if e.kind == cm.SPACELIKE:
                assert graph.fault_id_of((e.qubit, e.round), cm.SPACELIKE) == e_id
            else:
                assert graph.fault_id_of((e.stab, e.round), cm.TIMELIKE) == e_id
                assert e.v == e.u + graph.n_stabilizers


def test_graph_rejects_bad_arguments():
    layout = cm.build_layout(3)
    with pytest.raises(ValueError):
        cm.build_decoding_graph(layout, cm.SECTOR_X, 0)
    with pytest.raises(ValueError):
        cm.build_decoding_graph(layout, "Y", 1)


def test_sample_errors_trivial_rates():
    graph = cm.build_decoding_graph(cm.build_layout(3), cm.SECTOR_X, 3)
    empty = cm.sample_errors(graph, 0.0, seed=1)
    assert empty.weight == 0
    full = cm.sample_errors(graph, 1.0, seed=1)
    assert full.weight == graph.n_edges


def test_sample_errors_reproducible():
    graph = cm.build_decoding_graph(cm.build_layout(5), cm.SECTOR_Z, 5)
    a = cm.sample_errors(graph, 0.05, seed=123, stream=(4, 1))
    b = cm.sample_errors(graph, 0.05, seed=123, stream=(4, 1))
    c = cm.sample_errors(graph, 0.05, seed=123, stream=(4, 2))
    assert a.data_faults == b.data_faults
    assert a.measurement_faults == b.measurement_faults
    assert (a.data_faults, a.measurement_faults) != (c.data_faults, c.measurement_faults)


def test_sample_errors_concentration():
    # ~1e6 edges at p=0.001: empirical fraction within 5 sigma of p
    layout = cm.build_layout(21)
    graph = cm.build_decoding_graph(layout, cm.SECTOR_X, 21)
    p = 0.001
    draws = 0
    hits = 0
    shot = 0
    while draws < 1_000_000:
        pattern = cm.sample_errors(graph, p, seed=77, stream=(shot,))
        hits += pattern.weight
        draws += graph.n_edges
        shot += 1
    sigma = (draws * p * (1 - p)) ** 0.5
    assert abs(hits - draws * p) < 5 * sigma


def test_syndrome_of_empty_pattern():
    graph = cm.build_decoding_graph(cm.build_layout(3), cm.SECTOR_X, 3)
    pattern = cm.ErrorPattern(cm.SECTOR_X, frozenset(), frozenset())
    assert cm.syndrome_of(pattern, graph).total_weight == 0


def test_syndrome_single_fault_weights():
    layout = cm.build_layout(3)
    for sector in cm.SECTORS:
        graph = cm.build_decoding_graph(layout, sector, 3)
        for e_id, e in enumerate(graph.edges):
            syn = cm.syndrome_of(cm.pattern_from_fault_ids(graph, [e_id]), graph)
            if e.v == cm.BOUNDARY:
                assert syn.total_weight == 1
            else:
                assert syn.total_weight == 2
            if e.kind == cm.TIMELIKE:
                # a measurement fault at (s, t) flips detectors t and t+1
                bits = syn.sector_bits(sector)
                assert bits[e.round, e.stab] == 1
                assert bits[e.round + 1, e.stab] == 1


def test_syndrome_rejects_foreign_fault():
    layout = cm.build_layout(3)
    graph = cm.build_decoding_graph(layout, cm.SECTOR_X, 2)
    bad = cm.ErrorPattern(cm.SECTOR_X, frozenset(), frozenset({(0, 1)}))  # t=1 has no edge
    with pytest.raises(ValueError):
        cm.syndrome_of(bad, graph)
    wrong_sector = cm.ErrorPattern(cm.SECTOR_Z, frozenset({(0, 0)}), frozenset())
    with pytest.raises(ValueError):
        cm.syndrome_of(wrong_sector, graph)


def test_syndrome_linearity():
    graph = cm.build_decoding_graph(cm.build_layout(5), cm.SECTOR_X, 3)
    for shot in range(50):
        a = cm.sample_errors(graph, 0.08, seed=5, stream=(shot, 0))
        b = cm.sample_errors(graph, 0.08, seed=5, stream=(shot, 1))
        combined = cm.syndrome_of(a ^ b, graph)
        assert combined == cm.syndrome_of(a, graph) ^ cm.syndrome_of(b, graph)


def test_total_bits_transported():
    for d, r in ((3, 3), (5, 2), (7, 7)):
        layout = cm.build_layout(d)
        syn = cm.empty_syndrome(layout, r)
        assert syn.bits.size == (d * d - 1) * r


def test_records_export():
    layout = cm.build_layout(3)
    graph = cm.build_decoding_graph(layout, cm.SECTOR_X, 2)
    layout_lines = layout.to_records()
    graph_lines = graph.to_records()
    assert layout_lines[0].startswith("layout distance=3")
    assert sum(1 for l in layout_lines if l.startswith("stabilizer")) == 8
    assert sum(1 for l in graph_lines if l.startswith("vertex")) == graph.n_vertices
    assert sum(1 for l in graph_lines if l.startswith("edge")) == graph.n_edges
