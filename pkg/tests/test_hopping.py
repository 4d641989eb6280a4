import random
from collections import Counter

import pytest

from hopshare.constants import LFSR_PERIOD
from hopshare.exceptions import BadPartCount, OutOfRange, ZeroSeed
from hopshare.hopping import (
    LfsrState, build_schedule, channel_to_frequency, draw_channel, frequency_table, frequency_to_channel,
    lfsr_next, schedule_from_state,
)
from tests.reference import reference_lfsr


def _scripted(mocker, *outputs):
    """
    Makes ``lfsr_next`` return ``outputs`` in order.
    """
    values = iter(outputs)

    def fake_next(state):
        return LfsrState(register=state.register, seed=state.seed, steps=state.steps + 1), next(values)

    return mocker.patch('hopshare.hopping.lfsr_next', side_effect=fake_next)


class TestLfsr:

    def test_zero_seed(self):
        with pytest.raises(ZeroSeed):
            LfsrState.from_seed(0)

    def test_first_step_from_seed_one(self):
        _, value = lfsr_next(LfsrState.from_seed(1))
        assert value == reference_lfsr(1, 1)[0] == 65536

    def test_matches_reference_oracle(self):
        state = LfsrState.from_seed(1)
        values = []
        for _ in range(100):
            state, value = lfsr_next(state)
            values.append(value)
        assert values == reference_lfsr(1, 100)

    @pytest.mark.slow
    def test_full_period(self):
        state = LfsrState.from_seed(1)
        seen = set()
        for step in range(1, LFSR_PERIOD + 1):
            state, value = lfsr_next(state)
            seen.add(value)
            if value == 1:
                break
        assert step == LFSR_PERIOD
        assert len(seen) == LFSR_PERIOD
        assert state.steps == LFSR_PERIOD

    def test_deterministic(self):
        a = b = LfsrState.from_seed(0x1ACE)
        for _ in range(1000):
            a, va = lfsr_next(a)
            b, vb = lfsr_next(b)
            assert va == vb
        assert a == b


class TestDrawChannel:

    @pytest.mark.parametrize('outputs, expected', [
        ((1,), 0),
        ((100000,), 99999),
        ((130000, 5), 4),
    ])
    def test_rejection_rule(self, mocker, outputs, expected):
        fake = _scripted(mocker, *outputs)
        state, channel = draw_channel(LfsrState.from_seed(1))
        assert channel == expected
        assert fake.call_count == len(outputs)
        assert state.steps == len(outputs)

    @pytest.mark.slow
    def test_small_band_folds_uniformly(self):
        # 16 channels accept v <= 131056, so each index is hit 131056 / 16 times per period
        counts = Counter()
        state = LfsrState.from_seed(1)
        while state.steps < LFSR_PERIOD:
            state, channel = draw_channel(state, 16)
            counts[channel] += 1
        assert sorted(counts) == list(range(16))
        assert set(counts.values()) == {8191}

    @pytest.mark.slow
    def test_every_index_once_per_period(self):
        state = LfsrState.from_seed(1)
        counts = Counter()
        while state.steps < LFSR_PERIOD:
            state, channel = draw_channel(state)
            counts[channel] += 1
        assert len(counts) == 100000
        assert set(counts.values()) == {1}


class TestSchedule:

    def test_distinct(self):
        schedule = build_schedule(1, 5)
        assert len(schedule) == 5
        assert len(set(schedule.channels)) == 5

    def test_replay(self):
        rng = random.Random(3)
        for _ in range(1000):
            seed = rng.randint(1, LFSR_PERIOD)
            n = rng.randint(5, 10)
            assert build_schedule(seed, n) == build_schedule(seed, n)

    @pytest.mark.parametrize('n_parts', [4, 11])
    def test_part_band(self, n_parts):
        with pytest.raises(BadPartCount):
            build_schedule(1, n_parts)

    def test_duplicate_forces_redraw(self):
        # first seed whose first five register outputs are all accepted and repeat a channel
        def repeats(seed):
            values = reference_lfsr(seed, 5)
            return max(values) <= 131056 and len({(v - 1) % 16 for v in values}) < 5

        seed = next(s for s in range(1, LFSR_PERIOD) if repeats(s))
        schedule = schedule_from_state(LfsrState.from_seed(seed), 5, 16)
        assert len(set(schedule.channels)) == 5
        assert schedule.draw_count > 5

    def test_scripted_duplicate(self, mocker):
        _scripted(mocker, 3, 3, 7, 1, 9, 2)
        schedule = schedule_from_state(LfsrState.from_seed(1), 5)
        assert schedule.channels == (2, 6, 0, 8, 1)
        assert schedule.draw_count == 6

    def test_sessions_chain(self):
        first = build_schedule(77, 5)
        second = schedule_from_state(first.state, 5)
        assert second.state.steps > first.state.steps
        assert second.channels != first.channels

    def test_too_many_parts_for_band(self):
        with pytest.raises(BadPartCount):
            schedule_from_state(LfsrState.from_seed(1), 17, 16)


class TestFrequencies:

    @pytest.mark.parametrize('channel, hz', [
        (0, 2_400_000_000),
        (99_999, 2_499_999_000),
        (50_000, 2_450_000_000),
    ])
    def test_mapping(self, channel, hz):
        assert channel_to_frequency(channel) == hz
        assert frequency_to_channel(hz) == channel

    @pytest.mark.parametrize('channel', [-1, 100000])
    def test_out_of_band(self, channel):
        with pytest.raises(OutOfRange):
            channel_to_frequency(channel)

    def test_off_grid(self):
        with pytest.raises(OutOfRange):
            frequency_to_channel(2_400_000_500)

    def test_table(self):
        table = list(frequency_table())
        assert len(table) == 100000
        assert table[0] == (0, 2_400_000_000)
        assert table[-1] == (99_999, 2_499_999_000)
        assert all(b - a == 1000 for (_, a), (_, b) in zip(table, table[1:]))
