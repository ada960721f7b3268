"""Point-to-point link model with 64B/66B framing.

Captures the rate/overhead consequences of the line code (64 payload bits
carried in 66 wire bits, 3.03% overhead) plus a fixed one-way latency with
uniform jitter.  Scrambling, alignment and CRC internals are not modeled;
links are lossless and FIFO.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

PAYLOAD_BITS_PER_FRAME = 64
WIRE_BITS_PER_FRAME = 66
PS_PER_SECOND = 10**12


@dataclass(frozen=True)
class LinkModel:
    """One direction of a serial link.

    ``line_rate_bps`` is per lane; ``one_way_latency_ps`` is the mean
    propagation+processing latency and ``jitter_half_width_ps`` the half
    width of its uniform min-max spread.
    """

    line_rate_bps: int
    lanes: int = 1
    one_way_latency_ps: int = 1
    jitter_half_width_ps: int = 0

    def __post_init__(self):
        if self.one_way_latency_ps <= 0:
            raise ValueError("one-way latency mean must be positive")
        if self.lanes < 1 or self.line_rate_bps < 0 or self.jitter_half_width_ps < 0:
            raise ValueError("bad link parameters")

    @property
    def aggregate_rate_bps(self) -> int:
        return self.lanes * self.line_rate_bps


def effective_throughput(link: LinkModel) -> Fraction:
    """Usable payload bits per second: lanes x line rate x 64/66, exact."""
    return Fraction(link.aggregate_rate_bps * PAYLOAD_BITS_PER_FRAME, WIRE_BITS_PER_FRAME)


def effective_throughput_gbps(link: LinkModel, decimals: int = 3) -> float:
    """Effective throughput in Gb/s rounded to `decimals` places."""
    return round(float(effective_throughput(link)) / 1e9, decimals)


def frames_needed(payload_bits: int) -> int:
    if payload_bits < 0:
        raise ValueError("payload_bits must be >= 0")
    return -(-payload_bits // PAYLOAD_BITS_PER_FRAME)


def serialization_delay(payload_bits: int, link: LinkModel) -> int:
    """Picoseconds to clock the framed payload onto the wire (rounded up)."""
    wire_bits = frames_needed(payload_bits) * WIRE_BITS_PER_FRAME
    if wire_bits == 0:
        return 0
    rate = link.aggregate_rate_bps
    if rate <= 0:
        raise ValueError("cannot serialize on a zero-rate link")
    return -(-wire_bits * PS_PER_SECOND // rate)


def excess_serialization_delay(payload_bits: int, link: LinkModel) -> int:
    """Serialization beyond the first frame.

    Measured per-hop latencies already include clocking out a single frame,
    so only payloads spilling into extra frames add delay on top of them.
    """
    extra_frames = max(0, frames_needed(payload_bits) - 1)
    if extra_frames == 0:
        return 0
    return -(-extra_frames * WIRE_BITS_PER_FRAME * PS_PER_SECOND // link.aggregate_rate_bps)


def draw_jitter(link: LinkModel, rng) -> int:
    """Uniform integer jitter in [-half_width, +half_width], inclusive."""
    hw = link.jitter_half_width_ps
    if hw == 0:
        return 0
    return int(rng.integers(-hw, hw + 1))


class LinkEndpoint:
    """Stateful sender side of one link direction, enforcing FIFO delivery."""

    def __init__(self, link: LinkModel):
        self.link = link
        self._last_delivery = 0

    def transfer(self, payload_bits: int, now: int, rng=None) -> int:
        """Delivery time for a message handed to the link at `now`.

        delivery = now + serialization + one-way mean + jitter, clamped so
        that deliveries on one link never reorder.
        """
        delay = (
            serialization_delay(payload_bits, self.link)
            + self.link.one_way_latency_ps
            + (draw_jitter(self.link, rng) if rng is not None else 0)
        )
        t = max(now + delay, self._last_delivery)
        self._last_delivery = t
        return t
