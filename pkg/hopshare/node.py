"""
Transceiver logic: the master's send pipeline, the slaves that transmit one share stream each,
the receive pipeline and the max-clock SYNC round.

Send:    plain -> hex digest -> ROT13 -> length frame -> k-of-n sharing -> packets -> hop schedule
Receive: hop schedule replay -> reading pipes -> packets by countdown -> reconstruct -> unframe
         -> ROT13 -> bytes
"""
import logging
import random
import struct
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from more_itertools import chunked

from hopshare.codec import scramble, unscramble
from hopshare.constants import (
    ALL_CHANNELS, CHANNEL_COUNT, DEFAULT_T_MAX, DEVICE_ID_BITS, ELEMENTS_PER_PACKET, FIELD_PRIME,
    LENGTH_PREFIX_BYTES, MAX_PACKETS_PER_STREAM, SYNC_REPLY,
)
from hopshare.exceptions import (
    CodecError, EmptyMessage, FrameCorrupt, InsufficientShares, MediumRejected, NotReady,
    PacketError, StreamTooLong, UnsyncedNodes,
)
from hopshare.gfshare import ShareStream, reconstruct_message, share_message
from hopshare.hopping import (
    HopSchedule, LfsrState, check_part_count, frequency_to_channel, schedule_from_state,
)
from hopshare.medium import Medium, Transmission, TransmitOutcome
from hopshare.packet import DataPacket, PacketKind, SyncPacket, classify, decode_data, decode_sync
from hopshare.signals import emit, sync_flooded, sync_replied

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

PipeData = Dict[int, List[bytes]]

_ELEMENT = struct.Struct('>H')


@dataclass
class NodeState:
    """
    One transceiver. A single state hosts both the master and the slave roles; the intra-device
    buses are plain function calls.

    ``enforce_part_band`` keeps ``n_parts`` inside the 5..10 operating band; analysis scenarios
    lift it to sample the one-part-per-threshold capture model.
    """
    device_id: int
    hop_seed: int
    share_rng_seed: int
    k: int
    n_parts: int
    channel_count: int = CHANNEL_COUNT
    t_max: int = DEFAULT_T_MAX
    local_clock: int = 0
    skew_ppm: int = 0
    enforce_part_band: bool = True
    lfsr: Optional[LfsrState] = None
    share_rng: random.Random = field(init=False, repr=False, compare=False)
    master_buffer: List[ShareStream] = field(default_factory=list)
    outgoing_buffer: List[Tuple[int, bytes]] = field(default_factory=list)
    ready_flag: bool = False
    reading_pipes: FrozenSet[int] = frozenset()
    receive_schedule: Optional[HopSchedule] = None
    sessions: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.device_id < (1 << DEVICE_ID_BITS):
            raise ValueError("Device id {} does not fit in 32 bits".format(self.device_id))
        if not 1 <= self.channel_count <= CHANNEL_COUNT:
            raise ValueError("Channel count {} outside [1, {}]".format(self.channel_count, CHANNEL_COUNT))
        self.share_rng = random.Random(self.share_rng_seed)


@dataclass
class SlaveDevice:
    """
    A slave transmitter. Its data receiver logic splits the (frequency, packet) pairs handed
    over by the master into a frequency register and a data buffer.
    """
    index: int
    frequency: Optional[int] = None
    data_buffer: Deque[bytes] = field(default_factory=deque)
    success_flag: bool = False

    def load(self, pairs: Iterable[Tuple[int, bytes]]) -> None:
        for frequency, packet in pairs:
            if self.frequency is not None and frequency != self.frequency:
                raise NotReady("Slave {} got packets for two frequencies".format(self.index))
            self.frequency = frequency
            self.data_buffer.append(packet)
        self.success_flag = not self.data_buffer

    @property
    def channel(self) -> int:
        if self.frequency is None:
            raise NotReady("Slave {} has no frequency".format(self.index))
        return frequency_to_channel(self.frequency)

    def transmit_next(self, medium: Medium, slot: int) -> Optional[Transmission]:
        if self.success_flag:
            return None
        transmission = medium.transmit(self.channel, self.data_buffer.popleft(), slot)
        if not self.data_buffer:
            self.success_flag = True
        return transmission


@dataclass
class SessionPlan:
    """
    One session: stream ``j`` is bound to ``schedule.channels[j]`` for the whole session.
    """
    schedule: HopSchedule
    streams: List[ShareStream]
    packets_per_stream: int
    packets: List[List[bytes]]
    slaves: List[SlaveDevice]

    @property
    def frequencies(self) -> Tuple[int, ...]:
        return self.schedule.frequencies

    @property
    def ready(self) -> bool:
        return bool(self.slaves) and all(slave.frequency is not None for slave in self.slaves)

    @property
    def done(self) -> bool:
        return all(slave.success_flag for slave in self.slaves)


@dataclass(frozen=True)
class SyncOutcome:
    adopted_clock: int
    source_device: int
    node_id: int


@dataclass(frozen=True)
class SimulationResult:
    recovered: bytes
    plan: SessionPlan
    pipes_data: PipeData
    slots: Tuple[int, int]


def frame(rot_text: str) -> bytes:
    """
    4-byte big-endian length prefix followed by the ASCII rot-text.
    """
    body = rot_text.encode('ascii')
    return len(body).to_bytes(LENGTH_PREFIX_BYTES, 'big') + body


def unframe(framed: bytes) -> str:
    if len(framed) < LENGTH_PREFIX_BYTES:
        raise FrameCorrupt("Frame shorter than its length prefix")
    length = int.from_bytes(framed[:LENGTH_PREFIX_BYTES], 'big')
    end = LENGTH_PREFIX_BYTES + length
    if end > len(framed):
        raise FrameCorrupt("Length prefix {} exceeds the {} received bytes".format(length, len(framed)))
    tail = framed[end:]
    if len(tail) >= ELEMENTS_PER_PACKET or any(tail):
        raise FrameCorrupt("Length prefix {} leaves {} unexplained trailing bytes".format(length, len(tail)))
    try:
        return framed[LENGTH_PREFIX_BYTES:end].decode('ascii')
    except UnicodeDecodeError as e:
        raise FrameCorrupt("Frame body is not ASCII", cause=e)


def packets_needed(element_count: int) -> int:
    return -(-element_count // ELEMENTS_PER_PACKET)


def packetize(stream: ShareStream, device_id: int) -> List[bytes]:
    """
    Five 16-bit share elements per 10-byte payload; the last payload is zero-filled.
    """
    total = packets_needed(stream.length)
    if total > MAX_PACKETS_PER_STREAM:
        raise StreamTooLong("Stream needs {} packets".format(total))
    packets = []
    for position, chunk in enumerate(chunked(stream.values, ELEMENTS_PER_PACKET)):
        padded = list(chunk) + [0] * (ELEMENTS_PER_PACKET - len(chunk))
        payload = b''.join(_ELEMENT.pack(v) for v in padded)
        packets.append(DataPacket(countdown=total - position, device_id=device_id, payload=payload).encode())
    return packets


def _next_schedule(state: NodeState) -> HopSchedule:
    if state.enforce_part_band:
        check_part_count(state.n_parts)
    if state.lfsr is None:
        state.lfsr = LfsrState.from_seed(state.hop_seed)
    schedule = schedule_from_state(state.lfsr, state.n_parts, state.channel_count)
    state.lfsr = schedule.state
    state.sessions += 1
    return schedule


def reset_session_chain(state: NodeState) -> None:
    """
    Rewinds the hop register to the provisioned seed.
    """
    state.lfsr = None
    state.sessions = 0


def master_prepare(plain: bytes, state: NodeState) -> SessionPlan:
    """
    Runs the master's send pipeline and hands every stream to its slave.
    """
    if not plain:
        raise EmptyMessage()
    framed = frame(scramble(plain))
    per_stream = packets_needed(len(framed))
    if per_stream > MAX_PACKETS_PER_STREAM:
        raise StreamTooLong("Message needs {} packets per stream, the limit is {}".format(
            per_stream, MAX_PACKETS_PER_STREAM))

    state.ready_flag = False
    streams = share_message(framed, state.n_parts, state.k, state.share_rng)
    packets = [packetize(stream, state.device_id) for stream in streams]
    state.master_buffer = streams
    schedule = _next_schedule(state)

    frequencies = schedule.frequencies
    state.outgoing_buffer = [
        (frequency, packet) for frequency, stream_packets in zip(frequencies, packets) for packet in stream_packets
    ]
    slaves = []
    for index, (frequency, stream_packets) in enumerate(zip(frequencies, packets)):
        slave = SlaveDevice(index)
        slave.load((frequency, packet) for packet in stream_packets)
        slaves.append(slave)
    state.ready_flag = len(state.outgoing_buffer) == per_stream * state.n_parts
    log.debug("Prepared session %d for device %d: %d streams x %d packets on %s",
              state.sessions, state.device_id, len(streams), per_stream, list(schedule.channels))
    return SessionPlan(
        schedule=schedule, streams=streams, packets_per_stream=per_stream, packets=packets, slaves=slaves,
    )


def slave_transmit(plan: SessionPlan, medium: Medium, slot: int) -> List[Transmission]:
    """
    Every slave that still holds data sends its next packet on its channel in ``slot``.
    """
    if not plan.ready:
        raise NotReady()
    transmissions = [t for t in (slave.transmit_next(medium, slot) for slave in plan.slaves) if t is not None]
    collided = [t.channel for t in transmissions if t.outcome is TransmitOutcome.COLLIDED]
    if collided:
        raise MediumRejected(slot, collided)
    return transmissions


def transmit_session(plan: SessionPlan, medium: Medium, start_slot: Optional[int] = None) -> Tuple[int, int]:
    """
    Drives the slaves slot by slot until every success flag is up. Returns the half-open slot
    range used and leaves ``medium.slot`` just after it.
    """
    slot = medium.slot if start_slot is None else start_slot
    first = slot
    while not plan.done:
        slave_transmit(plan, medium, slot)
        slot += 1
    medium.slot = max(medium.slot, slot)
    return first, slot


def receiver_open(state: NodeState) -> FrozenSet[int]:
    """
    Replays the sender's hop schedule from the shared seed and opens one reading pipe per part.
    """
    schedule = _next_schedule(state)
    state.receive_schedule = schedule
    state.reading_pipes = frozenset(schedule.frequencies)
    return state.reading_pipes


def receiver_collect(state: NodeState, medium: Medium, slots: Iterable[int]) -> PipeData:
    """
    Reads every open pipe over ``slots``; SYNC traffic is ignored.
    """
    if state.receive_schedule is None:
        raise NotReady("Receiver has no open pipes")
    by_channel = {frequency_to_channel(f): f for f in state.receive_schedule.frequencies}
    pipes: PipeData = {f: [] for f in state.receive_schedule.frequencies}
    for slot in slots:
        for channel, raw in medium.listen(by_channel, slot):
            if raw and classify(raw) is PacketKind.DATA:
                pipes[by_channel[channel]].append(raw)
    return pipes


def _stream_from_packets(x: int, raw_packets: Sequence[bytes]) -> Optional[ShareStream]:
    by_countdown: Dict[int, DataPacket] = {}
    for raw in raw_packets:
        try:
            packet = decode_data(raw)
        except PacketError as e:
            log.info("Dropping undecodable packet on stream %d: %s", x, e)
            continue
        by_countdown.setdefault(packet.countdown, packet)
    if not by_countdown:
        return None
    total = max(by_countdown)
    if sorted(by_countdown) != list(range(1, total + 1)):
        log.info("Stream %d is incomplete: %d of %d packets", x, len(by_countdown), total)
        return None
    values: List[int] = []
    for countdown in range(total, 0, -1):
        payload = by_countdown[countdown].payload
        values.extend(v for (v,) in _ELEMENT.iter_unpack(payload))
    if any(v >= FIELD_PRIME for v in values):
        log.info("Stream %d carries values outside the field", x)
        return None
    return ShareStream(x=x, values=tuple(values))


def receiver_assemble(pipes_data: Mapping[int, Sequence[bytes]], k: int, frequencies: Sequence[int]) -> bytes:
    """
    Rebuilds the plain text from the packets heard on each pipe.

    :param frequencies: the pipes in schedule order; the pipe at position ``j`` carries share
        index ``j + 1``
    """
    streams = []
    for x, frequency in enumerate(frequencies, start=1):
        stream = _stream_from_packets(x, pipes_data.get(frequency, ()))
        if stream is not None:
            streams.append(stream)
    # a stream that lost its leading packets still counts down to 1 but comes up short
    longest = max((stream.length for stream in streams), default=0)
    short = [stream.x for stream in streams if stream.length < longest]
    if short:
        log.info("Streams %s are missing leading packets", short)
        streams = [stream for stream in streams if stream.length == longest]
    if len(streams) < k:
        raise InsufficientShares("{} complete streams, threshold is {}".format(len(streams), k))
    framed = reconstruct_message(streams, k)
    rot_text = unframe(framed)
    try:
        return unscramble(rot_text)
    except CodecError as e:
        raise FrameCorrupt("Frame body is not a scrambled hex digest", cause=e)


def simulate(
    plain: bytes,
    sender: NodeState,
    receiver: NodeState,
    medium: Medium,
    drop_streams: Iterable[int] = (),
) -> SimulationResult:
    """
    One full session over ``medium``. Streams whose indices are in ``drop_streams`` are discarded
    at the receiver.
    """
    plan = master_prepare(plain, sender)
    slots = transmit_session(plan, medium)
    receiver_open(receiver)
    assert receiver.receive_schedule is not None
    pipes = receiver_collect(receiver, medium, range(*slots))
    frequencies = receiver.receive_schedule.frequencies
    for index in drop_streams:
        pipes.pop(frequencies[index], None)
    recovered = receiver_assemble(pipes, receiver.k, frequencies)
    return SimulationResult(recovered=recovered, plan=plan, pipes_data=pipes, slots=slots)


def sync_round(nodes: Sequence[NodeState], medium: Medium, slot: Optional[int] = None,
               strict: bool = True) -> List[SyncOutcome]:
    """
    Every node floods its SYNC packet in its own slot, then adopts the largest clock it heard
    (its own included) and replies with the id of the packet that set its time.
    """
    start = medium.slot if slot is None else slot
    for offset, node in enumerate(nodes):
        medium.flood(SyncPacket(node_id=node.device_id, clock_count=node.local_clock).encode(), start + offset)
        emit(sync_flooded, node, slot=start + offset, node_id=node.device_id, clock=node.local_clock)

    reply_slot = start + len(nodes)
    outcomes = []
    for index, node in enumerate(nodes):
        best_clock, best_source = node.local_clock, node.device_id
        for offset in range(len(nodes)):
            if offset == index:
                continue
            for raw in medium.listen_flood(start + offset):
                packet = decode_sync(raw)
                if packet.clock_count > best_clock:
                    best_clock, best_source = packet.clock_count, packet.node_id
        if best_clock > node.local_clock:
            log.info("Node %d adopts clock %d from device %d", node.device_id, best_clock, best_source)
        node.local_clock = best_clock
        outcome = SyncOutcome(adopted_clock=best_clock, source_device=best_source, node_id=node.device_id)
        outcomes.append(outcome)
        medium.record_event(reply_slot, ALL_CHANNELS, SYNC_REPLY,
                            detail='node={} source={}'.format(node.device_id, best_source))
        emit(sync_replied, node, slot=reply_slot, node_id=node.device_id, source_device=best_source)
    medium.slot = max(medium.slot, reply_slot + 1)

    clocks = [node.local_clock for node in nodes]
    spread = max(clocks) - min(clocks) if clocks else 0
    if spread:
        log.info("Sync round left a spread of %d pulses", spread)
        if strict:
            raise UnsyncedNodes(outcomes, spread)
    return outcomes


def reached_t_max(node: NodeState) -> bool:
    return node.local_clock >= node.t_max


def advance_clocks(nodes: Iterable[NodeState], pulses: int) -> None:
    """
    Advances every local clock by ``pulses`` global pulses scaled by its skew.
    """
    for node in nodes:
        node.local_clock += pulses * (1_000_000 + node.skew_ppm) // 1_000_000


@dataclass(frozen=True)
class SyncRun:
    global_pulses: int
    clocks_before: Tuple[int, ...]
    outcomes: Tuple[SyncOutcome, ...]


def run_until_sync(nodes: Sequence[NodeState], medium: Medium, pulses_per_tick: int = 1000,
                   strict: bool = True) -> SyncRun:
    """
    Ticks the global clock until every node has reached its T_max, then runs one sync round.
    """
    if pulses_per_tick < 1:
        raise ValueError("pulses_per_tick must be positive")
    if any(pulses_per_tick * (1_000_000 + node.skew_ppm) // 1_000_000 < 1 for node in nodes):
        raise ValueError("A node's clock would not advance at this skew and tick size")
    global_pulses = 0
    while not all(reached_t_max(node) for node in nodes):
        advance_clocks(nodes, pulses_per_tick)
        global_pulses += pulses_per_tick
    clocks_before = tuple(node.local_clock for node in nodes)
    outcomes = sync_round(nodes, medium, strict=strict)
    return SyncRun(global_pulses=global_pulses, clocks_before=clocks_before, outcomes=tuple(outcomes))
