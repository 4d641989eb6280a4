"""
Bit-exact data and SYNC packet codecs.

Fields are packed MSB-first in declaration order, multi-byte fields big-endian, and the bit
string is padded with zero bits up to the next byte boundary:

========  ====  ==========  =========  ============  =====
packet    type  field 2     field 3    field 4       bytes
========  ====  ==========  =========  ============  =====
data      1     countdown   device_id  payload       16
          1b    8b          32b        80b
sync      0     node_id     clock                    9
          1b    32b         32b
========  ====  ==========  =========  ============  =====
"""
import enum
import logging
from dataclasses import dataclass
from typing import Any, ClassVar, Dict, NamedTuple, Tuple, Type, TypeVar

from hopshare.constants import (
    CLOCK_COUNT_BITS, COUNTDOWN_BITS, DATA_PACKET_BITS, DATA_PACKET_BYTES, DATA_TYPE_BIT, DEVICE_ID_BITS,
    NODE_ID_BITS, PAYLOAD_BITS, PAYLOAD_BYTES, SYNC_PACKET_BITS, SYNC_PACKET_BYTES, SYNC_TYPE_BIT,
)
from hopshare.exceptions import (
    BadPacketLength, BadPayloadLength, DirtyPadding, EmptyPacket, FieldOverflow, WrongType, ZeroCountdown,
)

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

_P = TypeVar('_P', bound='_Packet')


class PacketKind(enum.Enum):
    DATA = 'data'
    SYNC = 'sync'


class BitField(NamedTuple):
    """
    One fixed-width field of a wire layout.
    """
    name: str
    width: int
    is_bytes: bool = False

    def serialize(self, value: Any) -> int:
        if self.is_bytes:
            value = int.from_bytes(value, 'big')
        if not 0 <= value < (1 << self.width):
            raise FieldOverflow(self.name, self.width, value)
        return value

    def deserialize(self, value: int) -> Any:
        if self.is_bytes:
            return value.to_bytes(self.width // 8, 'big')
        return value


TYPE_FIELD = BitField('type_bit', 1)


class _Packet:
    """
    Generic packer driven by the subclass's ``LAYOUT``.
    """
    LAYOUT: ClassVar[Tuple[BitField, ...]]
    TYPE_BIT: ClassVar[int]
    BITS: ClassVar[int]
    SIZE: ClassVar[int]

    def _validate(self) -> None:
        pass

    def encode(self) -> bytes:
        self._validate()
        return self.pack_fields(**{field.name: getattr(self, field.name) for field in self.LAYOUT})

    @classmethod
    def pack_fields(cls, **values: Any) -> bytes:
        """
        Packs raw field values, checking only that each fits its width.
        """
        acc = cls.TYPE_BIT
        for field in cls.LAYOUT:
            acc = (acc << field.width) | field.serialize(values[field.name])
        acc <<= cls.SIZE * 8 - cls.BITS
        return acc.to_bytes(cls.SIZE, 'big')

    @classmethod
    def decode(cls: Type[_P], raw: bytes) -> _P:
        if not raw:
            raise EmptyPacket()
        if len(raw) != cls.SIZE:
            raise BadPacketLength("{} needs {} bytes, got {}".format(cls.__name__, cls.SIZE, len(raw)))
        acc = int.from_bytes(raw, 'big')
        pad = cls.SIZE * 8 - cls.BITS
        if acc & ((1 << pad) - 1):
            raise DirtyPadding()
        acc >>= pad
        values: Dict[str, Any] = {}
        for field in reversed(cls.LAYOUT):
            values[field.name] = field.deserialize(acc & ((1 << field.width) - 1))
            acc >>= field.width
        if acc != cls.TYPE_BIT:
            raise WrongType("Expected type bit {}, got {}".format(cls.TYPE_BIT, acc))
        packet = cls(**values)
        packet._validate()
        return packet


@dataclass(frozen=True)
class DataPacket(_Packet):
    """
    A data packet. ``countdown`` is the number of packets still to come in this stream,
    this one included, so the first packet of a stream also announces the stream length.
    """
    countdown: int
    device_id: int
    payload: bytes

    LAYOUT: ClassVar[Tuple[BitField, ...]] = (
        BitField('countdown', COUNTDOWN_BITS),
        BitField('device_id', DEVICE_ID_BITS),
        BitField('payload', PAYLOAD_BITS, is_bytes=True),
    )
    TYPE_BIT: ClassVar[int] = DATA_TYPE_BIT
    BITS: ClassVar[int] = DATA_PACKET_BITS
    SIZE: ClassVar[int] = DATA_PACKET_BYTES

    @property
    def type_bit(self) -> int:
        return self.TYPE_BIT

    def _validate(self) -> None:
        if len(self.payload) != PAYLOAD_BYTES:
            raise BadPayloadLength("Payload has {} bytes".format(len(self.payload)))
        if self.countdown < 1:
            raise ZeroCountdown()


@dataclass(frozen=True)
class SyncPacket(_Packet):
    node_id: int
    clock_count: int

    LAYOUT: ClassVar[Tuple[BitField, ...]] = (
        BitField('node_id', NODE_ID_BITS),
        BitField('clock_count', CLOCK_COUNT_BITS),
    )
    TYPE_BIT: ClassVar[int] = SYNC_TYPE_BIT
    BITS: ClassVar[int] = SYNC_PACKET_BITS
    SIZE: ClassVar[int] = SYNC_PACKET_BYTES

    @property
    def type_bit(self) -> int:
        return self.TYPE_BIT


def encode_data(p: DataPacket) -> bytes:
    return p.encode()


def decode_data(raw: bytes) -> DataPacket:
    if raw and classify(raw) is not PacketKind.DATA:
        raise WrongType("First bit is 0, not a data packet")
    return DataPacket.decode(raw)


def encode_sync(p: SyncPacket) -> bytes:
    return p.encode()


def decode_sync(raw: bytes) -> SyncPacket:
    if raw and classify(raw) is not PacketKind.SYNC:
        raise WrongType("First bit is 1, not a SYNC packet")
    return SyncPacket.decode(raw)


def classify(raw: bytes) -> PacketKind:
    """
    Looks at the first bit only.
    """
    if not raw:
        raise EmptyPacket()
    return PacketKind.DATA if raw[0] & 0x80 else PacketKind.SYNC
