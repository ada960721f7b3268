"""Distributed real-time QEC control-fabric simulator.

Library layout:

- ``code_model``: rotated surface code layouts, space-time decoding graphs,
  phenomenological noise sampling and syndrome extraction.
- ``uf_decoder``: union-find decoder plus a brute-force minimum-weight
  oracle and logical-failure checks.
- ``fabric_sim``: deterministic discrete-event engine, tree topologies,
  per-node clocks and the timer-alignment procedure.
- ``link_layer``: 64B/66B framed link model (throughput, serialization,
  latency, jitter).
- ``qec_pipeline``: the timed end-to-end decoding-feedback loop, campaign
  statistics and Monte-Carlo logical-error-rate estimation.
- ``capacity_model``: closed-form capacity, latency extrapolation and
  throughput margins.
- ``config`` / ``cli``: experiment configuration and the command-line tool.
"""

from .capacity_model import (
    DEFAULT_DECODE_TABLE,
    PROFILES,
    CapacityEstimate,
    PlatformProfile,
    capacity_estimate,
    decode_latency_ps,
    decoder_peak_throughput,
    estimate_latency,
    extrapolation_table,
    max_qubits,
    required_qubits,
    throughput_margin,
)
from .code_model import (
    BOUNDARY,
    SECTOR_X,
    SECTOR_Z,
    SECTORS,
    CodeLayout,
    DecodingGraph,
    ErrorPattern,
    SyndromeRounds,
    build_decoding_graph,
    build_layout,
    sample_errors,
    syndrome_of,
)
from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .fabric_sim import (
    Clock,
    Event,
    Fabric,
    NodeState,
    Simulator,
    SyncError,
    TopologyConfig,
    global_sync,
    ptp_sync,
)
from .link_layer import (
    LinkEndpoint,
    LinkModel,
    effective_throughput,
    effective_throughput_gbps,
    serialization_delay,
)
from .qec_pipeline import (
    CampaignResult,
    CapacityError,
    LeafMap,
    LerEstimate,
    Pipeline,
    ShotReport,
    StageLatency,
    StageLatencyConfig,
    assign_qubits_to_leaves,
    ler_campaign,
    run_campaign,
    run_shot,
    wilson_interval,
    worst_case_d3_syndrome,
)
from .uf_decoder import (
    Correction,
    OracleCapError,
    decode,
    is_logical_failure,
    is_valid,
    oracle_decode,
)

__version__ = "0.1.0"
