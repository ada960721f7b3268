"""Deterministic discrete-event engine for the tree control fabric.

Time is integer picoseconds throughout; events at equal times fire in
schedule order, so a whole run is a pure function of (config, seed).  Each
node carries a local clock (offset + linear ppm drift against ideal time)
that the timer-alignment procedure corrects via a two-message, four-
timestamp exchange.
"""

from __future__ import annotations

import hashlib
import heapq
from collections import deque
from dataclasses import dataclass, field

from .code_model import rng_stream
from .link_layer import LinkEndpoint, LinkModel

ROLE_LEAF = "LEAF"
ROLE_ROUTER = "ROUTER"
ROLE_ROOT = "ROOT"

#: Timer-alignment frames carry four 64-bit timestamps at most; one frame.
PTP_FRAME_BITS = 64

# RNG stream tags (first index after the master seed)
_STREAM_CLOCK = 101


class SyncError(RuntimeError):
    """A timer-alignment round lost one of its timestamps."""


def _half_even_div2(n: int) -> int:
    """n / 2 rounded half to even, exact integer arithmetic."""
    q, r = divmod(n, 2)
    return q + (1 if r and q % 2 else 0)


class Clock:
    """Node-local timer: local(t) = t + offset + drift_ppm * t / 1e6."""

    def __init__(self, offset_ps: int = 0, drift_ppm: int = 0):
        self.offset_ps = int(offset_ps)
        self.drift_ppm = int(drift_ppm)

    def local(self, t: int) -> int:
        return t + self.offset_ps + (self.drift_ppm * t) // 1_000_000

    def adjust(self, delta_ps: int):
        self.offset_ps += int(delta_ps)


@dataclass
class NodeState:
    """One fabric node: role, tree links, clock and role-specific state."""

    node_id: int
    role: str
    parent: int | None = None
    children: tuple = ()
    clock: Clock = field(default_factory=Clock)
    inbox: deque = field(default_factory=deque)
    state: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Event:
    fire_time: int
    seq: int
    node: int
    kind: str
    payload: object = field(compare=False, default=None)


class Simulator:
    """Event queue with deterministic (time, sequence) ordering."""

    def __init__(self, trace: bool = False):
        self.now = 0
        self._heap = []
        self._seq = 0
        self._handlers = {}
        self.trace = [] if trace else None

    def on(self, kind: str, handler):
        self._handlers[kind] = handler

    def schedule(self, fire_time: int, node: int, kind: str, payload=None) -> Event:
        if fire_time < self.now:
            raise ValueError(f"cannot schedule into the past ({fire_time} < {self.now})")
        ev = Event(int(fire_time), self._seq, node, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, (ev.fire_time, ev.seq, ev))
        return ev

    def _dispatch(self, ev: Event):
        self.now = ev.fire_time
        if self.trace is not None:
            self.trace.append(f"t={ev.fire_time} node={ev.node} {ev.kind}")
        handler = self._handlers.get(ev.kind)
        if handler is not None:
            handler(ev)

    def run_until(self, t: int) -> int:
        """Process every event with fire time <= t; returns the count."""
        count = 0
        while self._heap and self._heap[0][0] <= t:
            _, _, ev = heapq.heappop(self._heap)
            self._dispatch(ev)
            count += 1
        self.now = max(self.now, t)
        return count

    def run_all(self) -> int:
        count = 0
        while self._heap:
            _, _, ev = heapq.heappop(self._heap)
            self._dispatch(ev)
            count += 1
        return count

    def trace_hash(self) -> str:
        if self.trace is None:
            raise ValueError("simulator was created without trace recording")
        h = hashlib.sha256()
        for line in self.trace:
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()


@dataclass(frozen=True)
class TopologyConfig:
    """Shape and physical parameters of the control tree.

    ``router_layers`` inserts that many aggregation levels between the root
    and the leaves; every non-leaf node is limited to ``root_ports`` or
    ``router_children`` downstream ports.  Data and timer-sync traffic may
    use different link parameters (sync frames are tiny control frames).
    """

    n_leaves: int
    root_ports: int = 4
    router_children: int = 29
    router_layers: int = 0
    uplink: LinkModel = LinkModel(10_000_000_000, 1, 157_000, 16_000)
    downlink: LinkModel = LinkModel(10_000_000_000, 1, 155_000, 9_000)
    sync_uplink: LinkModel = LinkModel(10_000_000_000, 1, 156_000, 0)
    sync_downlink: LinkModel = LinkModel(10_000_000_000, 1, 156_000, 0)
    clock_offset_bound_ps: int = 0
    drift_ppm: int = 0


class Fabric:
    """Instantiated node tree with per-edge link endpoints."""

    def __init__(self, config: TopologyConfig, seed: int = 0):
        if config.n_leaves < 1:
            raise ValueError("need at least one leaf")
        self.config = config
        self.nodes = {}
        self.root_id = 0

        # Group leaves under routers level by level until the root's fan-out
        # fits its port budget; exactly router_layers levels are built.
        levels = [config.n_leaves]
        for _ in range(config.router_layers):
            levels.append(-(-levels[-1] // config.router_children))
        if levels[-1] > config.root_ports:
            raise ValueError(
                f"{levels[-1]} top-level nodes exceed the root's {config.root_ports} ports"
            )

        next_id = 0
        self.nodes[next_id] = NodeState(next_id, ROLE_ROOT)
        next_id += 1
        parent_row = [self.root_id]
        for depth in range(config.router_layers, 0, -1):
            count = levels[depth]
            row = []
            for _ in range(count):
                self.nodes[next_id] = NodeState(next_id, ROLE_ROUTER)
                row.append(next_id)
                next_id += 1
            self._attach(parent_row, row)
            parent_row = row
        leaf_row = []
        for _ in range(config.n_leaves):
            self.nodes[next_id] = NodeState(next_id, ROLE_LEAF)
            leaf_row.append(next_id)
            next_id += 1
        self._attach(parent_row, leaf_row)
        self.leaf_ids = tuple(leaf_row)

        self._init_clocks(seed)
        self._endpoints = {}
        for node in self.nodes.values():
            for child in node.children:
                self._endpoints[(node.node_id, child)] = {
                    "data_down": LinkEndpoint(config.downlink),
                    "data_up": LinkEndpoint(config.uplink),
                    "sync_down": LinkEndpoint(config.sync_downlink),
                    "sync_up": LinkEndpoint(config.sync_uplink),
                }

    def _attach(self, parents, children):
        limit = (
            self.config.root_ports
            if parents == [self.root_id]
            else self.config.router_children
        )
        fanout = -(-len(children) // len(parents))
        if fanout > limit:
            raise ValueError(f"fan-out {fanout} exceeds port limit {limit}")
        for k, child in enumerate(children):
            parent = parents[k // fanout]
            self.nodes[child].parent = parent
            self.nodes[parent].children = self.nodes[parent].children + (child,)

    def _init_clocks(self, seed):
        bound = self.config.clock_offset_bound_ps
        if bound > 0:
            rng = rng_stream(seed, _STREAM_CLOCK)
            offsets = rng.integers(-bound, bound + 1, size=len(self.nodes))
        else:
            offsets = [0] * len(self.nodes)
        for node_id in sorted(self.nodes):
            self.nodes[node_id].clock = Clock(int(offsets[node_id]), self.config.drift_ppm)

    def endpoint(self, parent: int, child: int, key: str) -> LinkEndpoint:
        return self._endpoints[(parent, child)][key]

    def edges_top_down(self):
        """(parent, child) pairs in BFS order from the root."""
        out = []
        queue = deque([self.root_id])
        while queue:
            n = queue.popleft()
            for child in self.nodes[n].children:
                out.append((n, child))
                queue.append(child)
        return out

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def depth(self) -> int:
        return 1 + self.config.router_layers

    def path_to_root(self, node_id: int):
        out = []
        n = node_id
        while self.nodes[n].parent is not None:
            out.append((self.nodes[n].parent, n))
            n = self.nodes[n].parent
        return out


def ptp_sync(sim: Simulator, fabric: Fabric, parent_id: int, child_id: int, rng=None) -> int:
    """One two-message timer-alignment exchange along a tree edge.

    The child applies correction ((t2-t1) - (t4-t3)) / 2 (round half to
    even) to its offset and the correction is returned.  With symmetric
    link delay and zero drift the child lands exactly on the parent's
    timeline; a delay asymmetry of D leaves a residual of D/2.
    """
    parent = fabric.nodes[parent_id]
    child = fabric.nodes[child_id]
    down = fabric.endpoint(parent_id, child_id, "sync_down")
    up = fabric.endpoint(parent_id, child_id, "sync_up")

    stamps = dict.fromkeys(("t1", "t2", "t3", "t4"))
    t_send = sim.now
    stamps["t1"] = parent.clock.local(t_send)
    t_arrive = down.transfer(PTP_FRAME_BITS, t_send, rng)
    sim.schedule(t_arrive, child_id, "sync_request")
    sim.run_until(t_arrive)
    stamps["t2"] = child.clock.local(sim.now)
    stamps["t3"] = child.clock.local(sim.now)  # immediate turnaround
    t_back = up.transfer(PTP_FRAME_BITS, sim.now, rng)
    sim.schedule(t_back, parent_id, "sync_response")
    sim.run_until(t_back)
    stamps["t4"] = parent.clock.local(sim.now)

    if any(v is None for v in stamps.values()):
        missing = [k for k, v in stamps.items() if v is None]
        raise SyncError(f"sync round lost timestamps {missing}")
    correction = _half_even_div2((stamps["t2"] - stamps["t1"]) - (stamps["t4"] - stamps["t3"]))
    child.clock.adjust(-correction)
    return correction


def global_sync(sim: Simulator, fabric: Fabric, rng=None) -> dict:
    """Align every node top-down; returns node -> residual offset vs the root.

    Residuals are measured on the local clocks at the time the sweep
    finishes, so with zero drift they equal the remaining offset errors.
    """
    for parent_id, child_id in fabric.edges_top_down():
        ptp_sync(sim, fabric, parent_id, child_id, rng)
    t = sim.now
    root_local = fabric.nodes[fabric.root_id].clock.local(t)
    return {
        node_id: node.clock.local(t) - root_local
        for node_id, node in sorted(fabric.nodes.items())
    }
