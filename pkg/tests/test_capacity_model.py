from fractions import Fraction

import pytest

from qecfabric import capacity_model as cap
from qecfabric.code_model import build_layout
from qecfabric.link_layer import LinkModel


def test_required_qubits_identities():
    assert cap.required_qubits(3) == 17
    assert cap.required_qubits(17) == 577
    assert cap.required_qubits(21) == 881
    with pytest.raises(ValueError):
        cap.required_qubits(4)


def test_required_qubits_matches_layout():
    for d in range(3, 23, 2):
        assert cap.required_qubits(d) == build_layout(d).total_qubits


def test_max_qubits_identities():
    vcu = cap.get_profile("vcu129")
    zcu = cap.get_profile("zcu216")
    assert cap.max_qubits(vcu, 0) == 476
    assert cap.max_qubits(zcu, 0) == 56
    assert cap.max_qubits(vcu, 1) == 34 * 29 * 14  # 13804


def test_unknown_profile_rejected():
    with pytest.raises(ValueError):
        cap.get_profile("vu9p")


def test_router_layers_needed():
    vcu = cap.get_profile("vcu129")
    assert cap.router_layers_needed(vcu, 15) == 0  # 449 <= 476
    assert cap.router_layers_needed(vcu, 17) == 1  # 577 > 476
    assert cap.router_layers_needed(vcu, 21) == 1


def test_decode_latency_anchors_and_interpolation():
    table = cap.DEFAULT_DECODE_TABLE
    assert cap.decode_latency_ps(table, 3) == (56_000, True)
    assert cap.decode_latency_ps(table, 13) == (250_000, True)
    # linear between the d=7 and d=13 anchors
    assert cap.decode_latency_ps(table, 9) == (143_333, False)
    assert cap.decode_latency_ps(table, 11) == (196_667, False)
    # clamped beyond the last anchor
    assert cap.decode_latency_ps(table, 15) == (250_000, False)
    assert cap.decode_latency_ps(table, 21) == (250_000, False)


def test_estimate_latency_reference_points():
    vcu = cap.get_profile("vcu129")
    assert cap.estimate_latency(3, vcu) == 446_000  # base 390 + decode 56
    step = cap.estimate_latency(17, vcu) - cap.estimate_latency(15, vcu)
    assert step == 357_000  # the router layer's 45 + 312 ns
    assert cap.estimate_latency(21, vcu) < 1_000_000


def test_estimate_latency_monotone_in_distance():
    vcu = cap.get_profile("vcu129")
    values = [cap.estimate_latency(d, vcu) for d in range(3, 23, 2)]
    assert values == sorted(values)


def test_decoder_peak_throughput():
    peak = cap.decoder_peak_throughput()
    assert peak == Fraction(440 * 10**12, 11_500)
    assert round(float(peak) / 1e9, 2) == 38.26


def test_syndrome_rate_required():
    assert cap.syndrome_rate_required(3) == Fraction(8_000_000)  # 8 Mb/s
    assert cap.syndrome_rate_required(21) == Fraction(440_000_000)


def test_throughput_margin_d21():
    link = LinkModel(10_000_000_000, lanes=4)
    margin = cap.throughput_margin(21, link)
    assert round(float(margin)) == 87
    # the decoder, not the network, limits throughput here
    assert cap.decoder_peak_throughput() < cap.effective_throughput(link)


def test_capacity_estimate_rows():
    vcu = cap.get_profile("vcu129")
    est15 = cap.capacity_estimate(15, vcu)
    est17 = cap.capacity_estimate(17, vcu)
    est21 = cap.capacity_estimate(21, vcu)
    assert est15.router_layers == 0 and est17.router_layers == 1
    assert est17.predicted_latency_ps - est15.predicted_latency_ps == 357_000
    assert est21.feasible
    assert est21.predicted_latency_ps < 1_000_000
    assert est17.leaves_needed == 42
    assert est15.max_qubits == 476 and est17.max_qubits == 13_804


def test_extrapolation_table_shape():
    zcu = cap.get_profile("zcu216")
    rows = cap.extrapolation_table(range(3, 9, 2), zcu)
    assert [r.distance for r in rows] == [3, 5, 7]
    assert rows[0].predicted_latency_ps == 446_000
    # the prototype root holds 56 qubits: d=5 (49) fits, d=7 (97) needs a layer
    assert rows[1].router_layers == 0
    assert rows[2].router_layers == 1
