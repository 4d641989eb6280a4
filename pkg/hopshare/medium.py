"""
A deterministic, slotted broadcast medium with per-cell collision detection and passive
eavesdroppers.

A cell is one (slot, channel) pair. A cell that receives exactly one packet delivers it; two or
more packets in the same cell are all dropped and logged as a collision. A SYNC flood occupies
every channel of its slot.
"""
import enum
import logging
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Any, DefaultDict, Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

from hopshare.constants import ALL_CHANNELS, CAPTURED
from hopshare.exceptions import BadChannel
from hopshare.settings import get_settings_value
from hopshare.signals import emit, packet_captured, packet_transmitted

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


class TransmitOutcome(enum.Enum):
    DELIVERED = 'delivered'
    COLLIDED = 'collided'
    LOST = 'lost'


class Transmission:
    """
    One packet handed to the medium. ``outcome`` is final once the slot is over; a later packet
    in the same cell can turn an earlier DELIVERED into COLLIDED.
    """
    __slots__ = ('slot', 'channel', 'packet', 'outcome')

    def __init__(self, slot: int, channel: int, packet: bytes, outcome: TransmitOutcome) -> None:
        self.slot = slot
        self.channel = channel
        self.packet = packet
        self.outcome = outcome

    def __repr__(self) -> str:
        return "Transmission<slot={} channel={} {}>".format(self.slot, self.channel, self.outcome.value)


@dataclass(frozen=True)
class TraceEvent:
    slot: int
    channel: int
    event: str
    packet_hex: str
    detail: str = ''


class Medium:
    """
    The simulated band. Holds the per-slot grid, the collision log and the event trace.
    """

    def __init__(
        self,
        channel_count: Optional[int] = None,
        loss_probability: Optional[float] = None,
        seed: int = 0,
    ) -> None:
        self.channel_count: int = channel_count if channel_count is not None else get_settings_value('channel_count')
        self.loss_probability: float = (
            loss_probability if loss_probability is not None else get_settings_value('loss_probability')
        )
        if self.channel_count < 1:
            raise BadChannel("Medium needs at least one channel")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must be within [0, 1]")
        self.rng = random.Random(seed)
        self.slot = 0
        self.grid: DefaultDict[int, DefaultDict[int, List[Transmission]]] = defaultdict(lambda: defaultdict(list))
        self.floods: DefaultDict[int, List[Transmission]] = defaultdict(list)
        self.collision_log: List[Tuple[int, int]] = []
        self._log: List[Union[Transmission, TraceEvent]] = []

    def __repr__(self) -> str:
        return "Medium<channels={} slot={}>".format(self.channel_count, self.slot)

    def _check_channel(self, channel: int) -> None:
        if not 0 <= channel < self.channel_count:
            raise BadChannel("Channel {} outside [0, {})".format(channel, self.channel_count))

    def _slot_occupants(self, slot: int) -> Iterator[Transmission]:
        for cell in self.grid[slot].values():
            yield from cell
        yield from self.floods[slot]

    def _enter(self, transmission: Transmission, occupants: List[Transmission]) -> None:
        if occupants:
            for other in occupants:
                if other.outcome is TransmitOutcome.DELIVERED:
                    other.outcome = TransmitOutcome.COLLIDED
                    emit(packet_transmitted, self, slot=other.slot, channel=other.channel,
                         packet=other.packet, outcome=other.outcome)
            transmission.outcome = TransmitOutcome.COLLIDED
            cell = (transmission.slot, transmission.channel)
            # one record per collided cell
            if cell not in self.collision_log:
                self.collision_log.append(cell)
                log.info("Collision in slot %d on channel %d", *cell)

    def transmit(self, channel: int, packet: bytes, slot: Optional[int] = None) -> Transmission:
        """
        Puts ``packet`` on ``channel`` in ``slot`` (default: the current slot).
        """
        self._check_channel(channel)
        slot = self.slot if slot is None else slot
        transmission = Transmission(slot, channel, packet, TransmitOutcome.DELIVERED)
        if self.loss_probability and self.rng.random() < self.loss_probability:
            transmission.outcome = TransmitOutcome.LOST
        else:
            self._enter(transmission, self.grid[slot][channel] + self.floods[slot])
            self.grid[slot][channel].append(transmission)
        self._log.append(transmission)
        emit(packet_transmitted, self, slot=slot, channel=channel, packet=packet, outcome=transmission.outcome)
        return transmission

    def flood(self, packet: bytes, slot: Optional[int] = None) -> Transmission:
        """
        Puts ``packet`` on every channel of ``slot``. Loss on a flood is decided per listener,
        see :meth:`listen_flood`.
        """
        slot = self.slot if slot is None else slot
        transmission = Transmission(slot, ALL_CHANNELS, packet, TransmitOutcome.DELIVERED)
        self._enter(transmission, list(self._slot_occupants(slot)))
        self.floods[slot].append(transmission)
        self._log.append(transmission)
        emit(packet_transmitted, self, slot=slot, channel=ALL_CHANNELS, packet=packet, outcome=transmission.outcome)
        return transmission

    def listen(self, channels: Iterable[int], slot: int) -> List[Tuple[int, bytes]]:
        """
        Packets delivered on ``channels`` in ``slot``, ordered by channel. Read-only.
        """
        wanted = sorted(set(channels))
        for channel in wanted:
            self._check_channel(channel)
        floods = [t.packet for t in self.floods.get(slot, []) if t.outcome is TransmitOutcome.DELIVERED]
        cells = self.grid.get(slot, {})
        heard = []
        for channel in wanted:
            for transmission in cells.get(channel, []):
                if transmission.outcome is TransmitOutcome.DELIVERED:
                    heard.append((channel, transmission.packet))
            heard.extend((channel, packet) for packet in floods)
        return heard

    def listen_flood(self, slot: int) -> List[bytes]:
        """
        Flooded packets one listener hears in ``slot``; each is dropped independently with the
        medium's loss probability.
        """
        heard = []
        for transmission in self.floods.get(slot, []):
            if transmission.outcome is not TransmitOutcome.DELIVERED:
                continue
            if self.loss_probability and self.rng.random() < self.loss_probability:
                continue
            heard.append(transmission.packet)
        return heard

    def delivered(self, slot: int) -> List[Transmission]:
        """
        Per-channel transmissions delivered in ``slot``, ordered by channel.
        """
        cells = self.grid.get(slot, {})
        return [
            t for channel in sorted(cells) for t in cells[channel]
            if t.outcome is TransmitOutcome.DELIVERED
        ]

    def advance(self) -> int:
        self.slot += 1
        return self.slot

    def record_event(self, slot: int, channel: int, event: str, packet: bytes = b'', detail: str = '') -> None:
        self._log.append(TraceEvent(slot, channel, event, packet.hex(), detail))

    def outcome_counts(self) -> Counter:
        return Counter(entry.outcome for entry in self._log if isinstance(entry, Transmission))

    def trace_records(self) -> List[Dict[str, Any]]:
        """
        The event trace in the order things happened, with final transmission outcomes.
        """
        records = []
        for entry in self._log:
            if isinstance(entry, Transmission):
                records.append({
                    'slot': entry.slot, 'channel': entry.channel,
                    'event': entry.outcome.value, 'packet_hex': entry.packet.hex(), 'detail': '',
                })
            else:
                records.append({
                    'slot': entry.slot, 'channel': entry.channel,
                    'event': entry.event, 'packet_hex': entry.packet_hex, 'detail': entry.detail,
                })
        return records


@dataclass(frozen=True)
class IndependentPerPacket:
    """
    Captures each delivered packet independently with probability ``q``.
    """
    q: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 1.0:
            raise ValueError("Capture probability must be within [0, 1], got {}".format(self.q))


@dataclass(frozen=True)
class FixedChannelSet:
    """
    Tunes ``m`` distinct channels for a whole session and captures whatever is delivered on them.
    """
    m: int

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("Channel set size must be non-negative, got {}".format(self.m))


AdversaryMode = Union[IndependentPerPacket, FixedChannelSet]


class Capture(NamedTuple):
    slot: int
    channel: int
    packet: bytes


@dataclass
class Adversary:
    mode: AdversaryMode
    captured: List[Capture] = field(default_factory=list)
    channels: Optional[FrozenSet[int]] = None

    def tune(self, channel_count: int, rng: random.Random) -> FrozenSet[int]:
        """
        Chooses the observed channel set once per session (fixed mode only).
        """
        if self.channels is None:
            assert isinstance(self.mode, FixedChannelSet)
            if self.mode.m > channel_count:
                raise BadChannel("Cannot tune {} channels out of {}".format(self.mode.m, channel_count))
            if self.mode.m == channel_count:
                self.channels = frozenset(range(channel_count))
            else:
                self.channels = frozenset(rng.sample(range(channel_count), self.mode.m))
        return self.channels

    def new_session(self) -> None:
        self.captured.clear()
        self.channels = None

    @property
    def captured_channels(self) -> FrozenSet[int]:
        return frozenset(c.channel for c in self.captured)


def adversary_observe(adv: Adversary, medium: Medium, slot: int, rng: random.Random) -> List[Capture]:
    """
    Applies the adversary's mode to every packet delivered on a channel in ``slot``.

    Observation is passive: the grid is only read.
    """
    if isinstance(adv.mode, FixedChannelSet):
        tuned = adv.tune(medium.channel_count, rng)
        picked = [t for t in medium.delivered(slot) if t.channel in tuned]
    else:
        q = adv.mode.q
        picked = [t for t in medium.delivered(slot) if rng.random() < q]
    captures = [Capture(t.slot, t.channel, t.packet) for t in picked]
    for capture in captures:
        medium.record_event(capture.slot, capture.channel, CAPTURED, capture.packet)
        emit(packet_captured, medium, slot=capture.slot, channel=capture.channel, packet=capture.packet)
    adv.captured.extend(captures)
    return captures
