import random
from pathlib import Path

import pytest

from hopshare.exceptions import (
    BadPacketLength, BadPayloadLength, DirtyPadding, EmptyPacket, FieldOverflow, WrongType, ZeroCountdown,
)
from hopshare.packet import (
    DataPacket, PacketKind, SyncPacket, classify, decode_data, decode_sync, encode_data, encode_sync,
)
from tests.reference import bit_string

VECTORS = Path(__file__).parent / 'vectors'


def vector(name):
    return bytes.fromhex((VECTORS / name).read_text().strip())


class TestDataPacket:

    def test_all_zero_fields(self):
        # countdown 0 cannot be encoded as a packet, only packed as raw fields
        raw = DataPacket.pack_fields(countdown=0, device_id=0, payload=bytes(10))
        assert raw == vector('data_zero_fields.hex') == b'\x80' + bytes(15)
        with pytest.raises(ZeroCountdown):
            decode_data(raw)

    def test_countdown_one(self):
        raw = encode_data(DataPacket(countdown=1, device_id=0, payload=bytes(10)))
        assert raw == vector('data_countdown_one.hex')
        assert raw == bit_string('1', format(1, '08b'), '0' * 32, '0' * 80)

    def test_all_ones(self):
        raw = encode_data(DataPacket(countdown=255, device_id=0xFFFFFFFF, payload=b'\xff' * 10))
        assert raw == vector('data_all_ones.hex') == bit_string('1' * 121)
        assert raw[0] == 0xFF
        assert raw[-1] == 0x80

    def test_round_trip(self):
        rng = random.Random(121)
        for _ in range(10000):
            packet = DataPacket(
                countdown=rng.randint(1, 255),
                device_id=rng.getrandbits(32),
                payload=rng.randbytes(10),
            )
            raw = encode_data(packet)
            assert len(raw) == 16
            assert decode_data(raw) == packet

    @pytest.mark.parametrize('payload', [bytes(9), bytes(11)])
    def test_payload_length(self, payload):
        with pytest.raises(BadPayloadLength):
            encode_data(DataPacket(countdown=1, device_id=0, payload=payload))

    def test_zero_countdown(self):
        with pytest.raises(ZeroCountdown):
            encode_data(DataPacket(countdown=0, device_id=0, payload=bytes(10)))

    @pytest.mark.parametrize('countdown, device_id', [(256, 0), (1, 1 << 32), (1, -1)])
    def test_field_overflow(self, countdown, device_id):
        with pytest.raises(FieldOverflow):
            encode_data(DataPacket(countdown=countdown, device_id=device_id, payload=bytes(10)))

    def test_dirty_padding(self):
        raw = bytearray(vector('data_countdown_one.hex'))
        raw[-1] |= 0x01
        with pytest.raises(DirtyPadding):
            decode_data(bytes(raw))

    def test_wrong_type(self):
        with pytest.raises(WrongType):
            decode_data(bytes(16))

    @pytest.mark.parametrize('raw, error', [(b'', EmptyPacket), (b'\x80' * 15, BadPacketLength)])
    def test_bad_length(self, raw, error):
        with pytest.raises(error):
            decode_data(raw)


class TestSyncPacket:

    def test_all_zero(self):
        raw = encode_sync(SyncPacket(node_id=0, clock_count=0))
        assert raw == vector('sync_zero.hex') == bytes(9)

    def test_bit_positions(self):
        raw = encode_sync(SyncPacket(node_id=1, clock_count=1))
        assert raw == vector('sync_node1_clock1.hex')
        bits = format(int.from_bytes(raw, 'big'), '072b')
        assert [i for i, bit in enumerate(bits) if bit == '1'] == [32, 64]

    def test_round_trip(self):
        rng = random.Random(65)
        for _ in range(10000):
            packet = SyncPacket(node_id=rng.getrandbits(32), clock_count=rng.getrandbits(32))
            assert decode_sync(encode_sync(packet)) == packet

    def test_clock_does_not_fit(self):
        with pytest.raises(FieldOverflow) as exc:
            encode_sync(SyncPacket(node_id=1, clock_count=1 << 32))
        assert exc.value.field_name == 'clock_count'

    def test_data_is_not_sync(self):
        with pytest.raises(WrongType):
            decode_sync(vector('data_countdown_one.hex')[:9])


@pytest.mark.parametrize('raw, kind', [
    (b'\x80' + bytes(15), PacketKind.DATA),
    (bytes(9), PacketKind.SYNC),
    (b'\xff', PacketKind.DATA),
])
def test_classify(raw, kind):
    assert classify(raw) is kind


def test_classify_empty():
    with pytest.raises(EmptyPacket):
        classify(b'')
