"""
hopshare exceptions
"""
from typing import Any, List, Optional


class HopShareException(Exception):
    """
    Base class for all hopshare exceptions.
    """

    msg: str = "hopshare error"

    def __init__(self, msg: Optional[str] = None, cause: Optional[Exception] = None) -> None:
        self.msg = msg if msg is not None else self.msg
        self.cause = cause
        super(HopShareException, self).__init__(self.msg)

    @property
    def cause_message(self) -> Optional[str]:
        """
        The message of the lower-level error this one wraps, if any.
        """
        if self.cause is None:
            return None
        return str(self.cause)


class FieldError(HopShareException):
    """
    A base class for prime field arithmetic errors
    """
    msg = "Field arithmetic error"


class ZeroInverse(FieldError):
    """
    Raised when the multiplicative inverse of zero is requested
    """
    msg = "Zero has no multiplicative inverse"


class SharingError(HopShareException):
    """
    A base class for secret sharing errors
    """
    msg = "Secret sharing error"


class BadThreshold(SharingError):
    """
    Raised when a threshold and share count do not satisfy 1 <= k <= n <= 256
    """
    msg = "Threshold must satisfy 1 <= k <= n <= 256"


class InsufficientShares(SharingError):
    """
    Raised when fewer than k shares with distinct indices are available
    """
    msg = "Not enough distinct shares to reconstruct"


class NotAByte(SharingError):
    """
    Raised when a reconstructed value does not fit in a byte, which means the shares were corrupted
    """
    msg = "Reconstructed value is not a byte"


class EmptyMessage(SharingError):
    """
    Raised when an empty message is handed to the sharing or send pipeline
    """
    msg = "Message is empty"


class LengthMismatch(SharingError):
    """
    Raised when share streams of one message have different lengths
    """
    msg = "Share streams differ in length"


class DuplicateShareIndex(SharingError):
    """
    Raised when two share streams carry the same x index
    """
    msg = "Share streams must have distinct indices"


class CodecError(HopShareException):
    """
    A base class for hex digest errors
    """
    msg = "Digest codec error"


class OddLength(CodecError):
    msg = "Hex digest has odd length"


class NonHexChar(CodecError):
    msg = "Hex digest contains a non-hex character"


class HoppingError(HopShareException):
    """
    A base class for channel hopping errors
    """
    msg = "Channel hopping error"


class ZeroSeed(HoppingError):
    """
    Raised when an LFSR is seeded with zero, the one state it can never leave
    """
    msg = "LFSR seed must be nonzero"


class BadPartCount(HoppingError):
    msg = "Number of parts must be between 5 and 10"


class OutOfRange(HoppingError):
    """
    Raised when a channel index or frequency falls outside the band
    """
    msg = "Channel outside the band"


class PacketError(HopShareException):
    """
    A base class for wire format errors
    """
    msg = "Packet codec error"


class BadPayloadLength(PacketError):
    msg = "Data packet payload must be exactly 10 bytes"


class ZeroCountdown(PacketError):
    msg = "Data packet countdown must be at least 1"


class WrongType(PacketError):
    """
    Raised when the type bit does not match the packet being decoded
    """
    msg = "Unexpected packet type bit"


class DirtyPadding(PacketError):
    msg = "Packet pad bits must be zero"


class EmptyPacket(PacketError):
    msg = "Packet is empty"


class BadPacketLength(PacketError):
    msg = "Packet has the wrong number of bytes"


class FieldOverflow(PacketError):
    """
    Raised when a value does not fit in its wire field
    """
    def __init__(self, field_name: str, width: int, value: Any) -> None:
        self.field_name = field_name
        msg = "Value {!r} does not fit in the {}-bit field `{}`".format(value, width, field_name)
        super(FieldOverflow, self).__init__(msg)


class NodeError(HopShareException):
    """
    A base class for transceiver errors
    """
    msg = "Transceiver error"


class StreamTooLong(NodeError):
    msg = "Share stream needs more than 255 packets"


class FrameCorrupt(NodeError):
    """
    Raised when the received data does not decode to a well-formed length-framed message
    """
    msg = "Received frame is corrupt"


class NotReady(NodeError):
    """
    Raised when slaves are asked to transmit before the master has filled the outgoing buffer
    """
    msg = "Session plan is not ready for transmission"


class UnsyncedNodes(NodeError):
    """
    Raised when a sync round over a lossy medium leaves clocks unequal.
    """
    def __init__(self, outcomes: List[Any], spread: int) -> None:
        self.outcomes = outcomes
        self.spread = spread
        msg = "Sync round left a clock spread of {} pulses".format(spread)
        super(UnsyncedNodes, self).__init__(msg)


class MediumError(HopShareException):
    """
    A base class for simulated medium errors
    """
    msg = "Medium error"


class BadChannel(MediumError):
    msg = "Channel index outside the medium"


class MediumRejected(MediumError):
    """
    Raised when the medium reports a collision for a transmitted packet
    """
    def __init__(self, slot: int, channels: List[int]) -> None:
        self.slot = slot
        self.channels = channels
        msg = "Collision in slot {} on channel(s) {}".format(slot, ', '.join(map(str, channels)))
        super(MediumRejected, self).__init__(msg)


class AnalysisError(HopShareException):
    msg = "Analysis error"


class BadN(AnalysisError):
    msg = "Channel count must be at least 2"


class ConfigError(HopShareException):
    """
    Raised when a scenario configuration is invalid
    """
    msg = "Invalid configuration"
