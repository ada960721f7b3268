"""Experiment configuration: defaults, JSON loading, validation and hashing.

A config file is a single JSON document; every omitted field takes the
documented default (the reference prototype's measured values).  The
canonical JSON form of the fully resolved config is hashed into every
report so reruns are attributable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from . import capacity_model
from .link_layer import LinkModel
from .qec_pipeline import ROUTER_STAGE_NAMES, STAGE_NAMES, StageLatency, StageLatencyConfig

TOOL_VERSION = "0.1.0"

_SYNDROME_SOURCES = ("auto", "worst_case", "sampled")


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def _default_uplink():
    return LinkModel(10_000_000_000, 1, 157_000, 16_000)


def _default_downlink():
    return LinkModel(10_000_000_000, 1, 155_000, 9_000)


def _default_sync_link():
    # timer-alignment frames ride the raw link latency, symmetric both ways
    return LinkModel(10_000_000_000, 1, 156_000, 0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a campaign needs; defaults reproduce the d=3 reference run."""

    distance: int = 3
    rounds: int | None = None  # None -> one round per unit of distance
    error_rate: float = 0.001
    shots: int = 10_000
    seed: int = 1
    jobs: int = 1
    profile: str = "zcu216"
    qubits_per_leaf: int = 14
    router_layers: int = 0
    syndrome_source: str = "auto"
    zero_jitter: bool = False
    cycle_time_ps: int = 1_000_000
    clock_offset_bound_ps: int = 1_000_000
    drift_ppm: int = 0
    sync_at_start: bool = True
    stage_latency: StageLatencyConfig = field(default_factory=StageLatencyConfig)
    uplink: LinkModel = field(default_factory=_default_uplink)
    downlink: LinkModel = field(default_factory=_default_downlink)
    sync_uplink: LinkModel = field(default_factory=_default_sync_link)
    sync_downlink: LinkModel = field(default_factory=_default_sync_link)

    def validate(self) -> "ExperimentConfig":
        if self.distance < 1 or self.distance % 2 == 0:
            raise ConfigError(f"distance must be an odd integer >= 1, got {self.distance}")
        if self.rounds is not None and self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ConfigError("error_rate must be a probability")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.router_layers < 0:
            raise ConfigError("router_layers must be >= 0")
        if self.qubits_per_leaf < 1:
            raise ConfigError("qubits_per_leaf must be >= 1")
        if self.cycle_time_ps < 1:
            raise ConfigError("cycle_time_ps must be >= 1")
        if self.syndrome_source not in _SYNDROME_SOURCES:
            raise ConfigError(
                f"syndrome_source must be one of {_SYNDROME_SOURCES}, got {self.syndrome_source!r}"
            )
        if self.syndrome_source == "worst_case" and self.distance != 3:
            raise ConfigError("the worst_case syndrome source is defined for distance 3 only")
        try:
            capacity_model.get_profile(self.profile)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def to_dict(self) -> dict:
        def link_dict(l):
            return {
                "line_rate_bps": l.line_rate_bps,
                "lanes": l.lanes,
                "one_way_latency_ps": l.one_way_latency_ps,
                "jitter_half_width_ps": l.jitter_half_width_ps,
            }

        stage = {
            name: {
                "mean_ps": self.stage_latency.stage(name).mean_ps,
                "jitter_ps": self.stage_latency.stage(name).jitter_ps,
            }
            for name in STAGE_NAMES + ROUTER_STAGE_NAMES
            if name != "decode"
        }
        stage["decode_table"] = {
            str(d): int(v) for d, v in sorted(self.stage_latency.decode_table.items())
        }
        stage["decode_jitter_ps"] = self.stage_latency.decode_jitter_ps
        return {
            "distance": self.distance,
            "rounds": self.rounds,
            "error_rate": self.error_rate,
            "shots": self.shots,
            "seed": self.seed,
            "jobs": self.jobs,
            "profile": self.profile,
            "qubits_per_leaf": self.qubits_per_leaf,
            "router_layers": self.router_layers,
            "syndrome_source": self.syndrome_source,
            "zero_jitter": self.zero_jitter,
            "cycle_time_ps": self.cycle_time_ps,
            "clock": {
                "offset_bound_ps": self.clock_offset_bound_ps,
                "drift_ppm": self.drift_ppm,
                "sync_at_start": self.sync_at_start,
            },
            "stage_latency": stage,
            "links": {
                "uplink": link_dict(self.uplink),
                "downlink": link_dict(self.downlink),
                "sync_uplink": link_dict(self.sync_uplink),
                "sync_downlink": link_dict(self.sync_downlink),
            },
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def _take(data: dict, key, kind, path, default):
    if key not in data:
        return default
    value = data.pop(key)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}{key}: expected a boolean, got {value!r}")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}{key}: expected an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}{key}: expected a number, got {value!r}")
        return float(value)
    if kind is str:
        if not isinstance(value, str):
            raise ConfigError(f"{path}{key}: expected a string, got {value!r}")
        return value
    if kind is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{path}{key}: expected an object, got {value!r}")
        return value
    raise AssertionError(kind)


def _reject_unknown(data: dict, path: str):
    if data:
        raise ConfigError(f"unknown config key(s) {sorted(data)} at {path or 'top level'}")


def _link_from_dict(data: dict, path: str, default: LinkModel) -> LinkModel:
    data = dict(data)
    link = LinkModel(
        line_rate_bps=_take(data, "line_rate_bps", int, path, default.line_rate_bps),
        lanes=_take(data, "lanes", int, path, default.lanes),
        one_way_latency_ps=_take(data, "one_way_latency_ps", int, path, default.one_way_latency_ps),
        jitter_half_width_ps=_take(
            data, "jitter_half_width_ps", int, path, default.jitter_half_width_ps
        ),
    )
    _reject_unknown(data, path)
    return link


def _stage_from_dict(data: dict) -> StageLatencyConfig:
    data = dict(data)
    defaults = StageLatencyConfig()
    kwargs = {}
    for name in STAGE_NAMES + ROUTER_STAGE_NAMES:
        if name == "decode":
            continue
        if name in data:
            entry = _take(data, name, dict, "stage_latency.", None)
            entry = dict(entry)
            base = defaults.stage(name)
            kwargs[name] = StageLatency(
                mean_ps=_take(entry, "mean_ps", int, f"stage_latency.{name}.", base.mean_ps),
                jitter_ps=_take(entry, "jitter_ps", int, f"stage_latency.{name}.", base.jitter_ps),
            )
            _reject_unknown(entry, f"stage_latency.{name}")
    if "decode_table" in data:
        table = _take(data, "decode_table", dict, "stage_latency.", None)
        parsed = {}
        for key, value in table.items():
            try:
                d = int(key)
            except (TypeError, ValueError):
                raise ConfigError(f"stage_latency.decode_table: bad distance key {key!r}") from None
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"stage_latency.decode_table[{key}]: expected integer ps")
            parsed[d] = value
        kwargs["decode_table"] = parsed
    if "decode_jitter_ps" in data:
        kwargs["decode_jitter_ps"] = _take(data, "decode_jitter_ps", int, "stage_latency.", 0)
    _reject_unknown(data, "stage_latency")
    try:
        return replace(defaults, **kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a validated config; unknown keys anywhere are rejected."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    data = dict(data)
    base = ExperimentConfig()
    rounds = data.pop("rounds", base.rounds)
    if rounds is not None and (isinstance(rounds, bool) or not isinstance(rounds, int)):
        raise ConfigError(f"rounds: expected an integer or null, got {rounds!r}")

    clock = dict(_take(data, "clock", dict, "", {}))
    offset_bound = _take(clock, "offset_bound_ps", int, "clock.", base.clock_offset_bound_ps)
    drift = _take(clock, "drift_ppm", int, "clock.", base.drift_ppm)
    sync_at_start = _take(clock, "sync_at_start", bool, "clock.", base.sync_at_start)
    _reject_unknown(clock, "clock")

    links = dict(_take(data, "links", dict, "", {}))
    uplink = _link_from_dict(dict(_take(links, "uplink", dict, "links.", {})), "links.uplink.", base.uplink)
    downlink = _link_from_dict(
        dict(_take(links, "downlink", dict, "links.", {})), "links.downlink.", base.downlink
    )
    sync_up = _link_from_dict(
        dict(_take(links, "sync_uplink", dict, "links.", {})), "links.sync_uplink.", base.sync_uplink
    )
    sync_down = _link_from_dict(
        dict(_take(links, "sync_downlink", dict, "links.", {})),
        "links.sync_downlink.",
        base.sync_downlink,
    )
    _reject_unknown(links, "links")

    stage = _stage_from_dict(dict(_take(data, "stage_latency", dict, "", {})))

    config = ExperimentConfig(
        distance=_take(data, "distance", int, "", base.distance),
        rounds=rounds,
        error_rate=_take(data, "error_rate", float, "", base.error_rate),
        shots=_take(data, "shots", int, "", base.shots),
        seed=_take(data, "seed", int, "", base.seed),
        jobs=_take(data, "jobs", int, "", base.jobs),
        profile=_take(data, "profile", str, "", base.profile),
        qubits_per_leaf=_take(data, "qubits_per_leaf", int, "", base.qubits_per_leaf),
        router_layers=_take(data, "router_layers", int, "", base.router_layers),
        syndrome_source=_take(data, "syndrome_source", str, "", base.syndrome_source),
        zero_jitter=_take(data, "zero_jitter", bool, "", base.zero_jitter),
        cycle_time_ps=_take(data, "cycle_time_ps", int, "", base.cycle_time_ps),
        clock_offset_bound_ps=offset_bound,
        drift_ppm=drift,
        sync_at_start=sync_at_start,
        stage_latency=stage,
        uplink=uplink,
        downlink=downlink,
        sync_uplink=sync_up,
        sync_downlink=sync_down,
    )
    _reject_unknown(data, "")
    return config.validate()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    return config_from_dict(data)


#: Human-readable provenance of every default, printed by --show-defaults.
DEFAULT_PROVENANCE = [
    ("stage_latency.leaf_agg", "29000 +- 3000 ps", "measured leaf-side syndrome aggregation"),
    ("stage_latency.uplink", "157000 +- 16000 ps", "measured leaf-to-root network transfer"),
    ("stage_latency.root_agg", "20000 +- 10000 ps", "measured root aggregation and pre-decode"),
    ("stage_latency.decode_table[3]", "56000 ps", "measured decode, worst-case d=3 pattern"),
    ("stage_latency.decode_table[5]", "65000 ps", "measured standalone decode, pre-sampled d=5 syndromes"),
    ("stage_latency.decode_table[7]", "90000 ps", "measured standalone decode, pre-sampled d=7 syndromes"),
    ("stage_latency.decode_table[13]", "250000 ps", "reported decoder latency at d=13"),
    ("stage_latency.root_dist", "25000 +- 3000 ps", "measured root-side error distribution"),
    ("stage_latency.downlink", "155000 +- 9000 ps", "measured root-to-leaf network transfer"),
    ("stage_latency.leaf_dist", "9000 +- 1000 ps", "measured leaf-side error distribution"),
    ("stage_latency.router_proc", "45000 ps", "router on-board processing add-on per layer"),
    ("stage_latency.router_net", "312000 ps", "router round-trip network add-on per layer"),
    ("links.uplink/downlink", "157/155 ns, 10 Gb/s", "per-direction link latencies; the raw link achieves ~156 ns one way"),
    ("links.sync_*", "156 ns symmetric", "timer-alignment frames on the raw link"),
    ("error_rate", "0.001", "physical error rate typical of current superconducting qubits"),
    ("cycle_time_ps", "1000000", "typical 1 us measurement cycle"),
    ("profile.zcu216", "4 root ports x 14 qubits", "prototype root board, 4 x 10 Gb/s transceivers"),
    ("profile.vcu129", "34 root ports x 14 qubits", "high-port-count root option (476 qubits direct)"),
    ("profile.router", "29 children, +45 ns proc, +312 ns net", "router board option per added layer"),
    ("capacity.base_latency_ps", "390000", "quoted total of all non-decoder components (stage means sum to 395000)"),
]
