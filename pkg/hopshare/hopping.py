"""
LFSR-driven channel hopping over the 2.4-2.5 GHz band.

The register is a 17-bit Fibonacci LFSR with feedback polynomial x^17 + x^14 + 1, so every
nonzero 17-bit value occurs exactly once per period of 131071 steps. Sender and receiver that
share a seed draw identical channel sequences.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, NewType, Tuple

from hopshare.constants import (
    BASE_FREQUENCY_HZ, CHANNEL_COUNT, CHANNEL_WIDTH_HZ, LFSR_PERIOD, LFSR_TAPS, LFSR_WIDTH, MAX_PARTS,
    MIN_PARTS,
)
from hopshare.exceptions import BadPartCount, HoppingError, OutOfRange, ZeroSeed

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

ChannelIndex = NewType('ChannelIndex', int)

# tap t reads the bit that is (width - t) places above the output end of the register
_TAP_SHIFTS = tuple(LFSR_WIDTH - tap for tap in LFSR_TAPS)
_TOP_BIT = LFSR_WIDTH - 1


@dataclass(frozen=True)
class LfsrState:
    register: int
    seed: int
    steps: int = 0

    def __post_init__(self) -> None:
        if self.register == 0:
            raise ZeroSeed()
        if not 0 < self.register <= LFSR_PERIOD:
            raise HoppingError("Register {} does not fit in {} bits".format(self.register, LFSR_WIDTH))

    @classmethod
    def from_seed(cls, seed: int) -> 'LfsrState':
        if seed == 0:
            raise ZeroSeed()
        return cls(register=seed, seed=seed)


def _step(register: int) -> int:
    feedback = 0
    for shift in _TAP_SHIFTS:
        feedback ^= register >> shift
    return (register >> 1) | ((feedback & 1) << _TOP_BIT)


def lfsr_next(state: LfsrState) -> Tuple[LfsrState, int]:
    """
    Advances the register one step and returns the new register value, in ``[1, 131071]``.
    """
    register = _step(state.register)
    return LfsrState(register=register, seed=state.seed, steps=state.steps + 1), register


def _acceptance_bound(channel_count: int) -> int:
    if not 1 <= channel_count <= LFSR_PERIOD:
        raise OutOfRange("Channel count {} outside [1, {}]".format(channel_count, LFSR_PERIOD))
    return channel_count * (LFSR_PERIOD // channel_count)


def draw_channel(state: LfsrState, channel_count: int = CHANNEL_COUNT) -> Tuple[LfsrState, ChannelIndex]:
    """
    Rejection-samples one channel index.

    Outputs above the largest multiple of ``channel_count`` are discarded; an accepted output
    ``v`` maps to ``(v - 1) % channel_count``. For the full 10^5-channel band this accepts
    ``v <= 100000`` and returns ``v - 1``.
    """
    bound = _acceptance_bound(channel_count)
    while True:
        state, value = lfsr_next(state)
        if value <= bound:
            return state, ChannelIndex((value - 1) % channel_count)


@dataclass(frozen=True)
class HopSchedule:
    """
    The distinct channels of one session, in stream order.

    ``state`` is the register after the last draw; the next session continues from it.
    """
    channels: Tuple[ChannelIndex, ...]
    session_seed: int
    draw_count: int
    state: LfsrState

    def __len__(self) -> int:
        return len(self.channels)

    @property
    def frequencies(self) -> Tuple[int, ...]:
        return tuple(channel_to_frequency(c) for c in self.channels)


def check_part_count(n_parts: int) -> None:
    if not MIN_PARTS <= n_parts <= MAX_PARTS:
        raise BadPartCount("Number of parts must be between {} and {}, got {}".format(MIN_PARTS, MAX_PARTS, n_parts))


def schedule_from_state(state: LfsrState, n_parts: int, channel_count: int = CHANNEL_COUNT) -> HopSchedule:
    """
    Draws channels from ``state`` until ``n_parts`` distinct ones are collected.

    Unlike :func:`build_schedule` this does not enforce the 5..10 operating band; it only needs
    ``1 <= n_parts <= channel_count``.
    """
    if not 1 <= n_parts <= channel_count:
        raise BadPartCount("Cannot pick {} distinct channels out of {}".format(n_parts, channel_count))
    start_steps = state.steps
    channels = []
    seen = set()
    draws = 0
    while len(channels) < n_parts:
        state, channel = draw_channel(state, channel_count)
        draws += 1
        if channel in seen:
            log.debug("Re-drawing duplicate channel %d", channel)
            continue
        seen.add(channel)
        channels.append(channel)
    log.debug("Drew schedule %s in %d draws (%d register steps)", channels, draws, state.steps - start_steps)
    return HopSchedule(channels=tuple(channels), session_seed=state.seed, draw_count=draws, state=state)


def build_schedule(seed: int, n_parts: int, channel_count: int = CHANNEL_COUNT) -> HopSchedule:
    check_part_count(n_parts)
    return schedule_from_state(LfsrState.from_seed(seed), n_parts, channel_count)


def channel_to_frequency(c: int) -> int:
    """
    Frequency in Hz of a channel: 2.4 GHz plus 1 kHz per channel index.
    """
    if not 0 <= c < CHANNEL_COUNT:
        raise OutOfRange("Channel index {} outside [0, {})".format(c, CHANNEL_COUNT))
    return BASE_FREQUENCY_HZ + c * CHANNEL_WIDTH_HZ


def frequency_to_channel(hz: int) -> ChannelIndex:
    offset = hz - BASE_FREQUENCY_HZ
    if offset % CHANNEL_WIDTH_HZ:
        raise OutOfRange("Frequency {} Hz is not on the 1 kHz channel grid".format(hz))
    channel = offset // CHANNEL_WIDTH_HZ
    if not 0 <= channel < CHANNEL_COUNT:
        raise OutOfRange("Frequency {} Hz outside the band".format(hz))
    return ChannelIndex(channel)


def frequency_table(channel_count: int = CHANNEL_COUNT) -> Iterator[Tuple[int, int]]:
    """
    Yields ``(index, hz)`` for the first ``channel_count`` channels.
    """
    for index in range(channel_count):
        yield index, channel_to_frequency(index)
