"""
Prime field arithmetic and byte-wise k-of-n secret sharing over GF(257).
"""
import logging
import random
import struct
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple, Union

from hopshare.constants import FIELD_PRIME, MAX_SHARES
from hopshare.exceptions import (
    BadThreshold, DuplicateShareIndex, EmptyMessage, InsufficientShares, LengthMismatch, NotAByte,
    SharingError, ZeroInverse,
)

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

_Operand = Union['FieldElement', int]

_STREAM_HEADER = struct.Struct('>BI')


@dataclass(frozen=True)
class FieldElement:
    """
    An element of GF(p). The modulus is fixed at 257 so every byte value is a field element.
    """
    value: int
    p: int = FIELD_PRIME

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.p:
            raise ValueError("Field element {} outside [0, {})".format(self.value, self.p))

    def _coerce(self, other: _Operand) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError("Cannot mix elements of GF({}) and GF({})".format(self.p, other.p))
            return other.value
        return other % self.p

    def __add__(self, other: _Operand) -> 'FieldElement':
        return FieldElement((self.value + self._coerce(other)) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other: _Operand) -> 'FieldElement':
        return FieldElement((self.value - self._coerce(other)) % self.p, self.p)

    def __rsub__(self, other: _Operand) -> 'FieldElement':
        return FieldElement((self._coerce(other) - self.value) % self.p, self.p)

    def __mul__(self, other: _Operand) -> 'FieldElement':
        return FieldElement((self.value * self._coerce(other)) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> 'FieldElement':
        return FieldElement(-self.value % self.p, self.p)

    def __truediv__(self, other: _Operand) -> 'FieldElement':
        return self * field_inverse(FieldElement(self._coerce(other), self.p))

    def __int__(self) -> int:
        return self.value

    def inverse(self) -> 'FieldElement':
        return field_inverse(self)


@dataclass(frozen=True)
class SharePoint:
    """
    One evaluation (x, f(x)) of a sharing polynomial.
    """
    x: FieldElement
    y: FieldElement

    def __post_init__(self) -> None:
        if self.x.value == 0:
            raise SharingError("Share index 0 would expose the secret")


@dataclass(frozen=True)
class ShareStream:
    """
    All shares held at one index ``x``, one field value per message byte.
    """
    x: int
    values: Tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.x <= MAX_SHARES:
            raise SharingError("Share index {} outside [1, {}]".format(self.x, MAX_SHARES))

    @property
    def length(self) -> int:
        return len(self.values)

    def serialize(self) -> bytes:
        """
        1 byte x, 4-byte big-endian length, then one big-endian 16-bit word per value.

        x is stored modulo 256, so index 256 serializes as 0.
        """
        header = _STREAM_HEADER.pack(self.x % 256, self.length)
        return header + struct.pack('>{}H'.format(self.length), *self.values)

    @classmethod
    def deserialize(cls, raw: bytes) -> 'ShareStream':
        if len(raw) < _STREAM_HEADER.size:
            raise SharingError("Share stream dump shorter than its header")
        x, length = _STREAM_HEADER.unpack_from(raw)
        body = raw[_STREAM_HEADER.size:]
        if len(body) != 2 * length:
            raise LengthMismatch("Share stream dump declares {} values but carries {} bytes".format(length, len(body)))
        values = struct.unpack('>{}H'.format(length), body)
        if any(v >= FIELD_PRIME for v in values):
            raise SharingError("Share stream dump holds a value outside GF({})".format(FIELD_PRIME))
        return cls(x=x or MAX_SHARES, values=values)


def field_inverse(a: FieldElement) -> FieldElement:
    """
    Multiplicative inverse by Fermat's little theorem.
    """
    if a.value == 0:
        raise ZeroInverse()
    return FieldElement(pow(a.value, a.p - 2, a.p), a.p)


def _check_threshold(n: int, k: int) -> None:
    if not 1 <= k <= n <= MAX_SHARES:
        raise BadThreshold("Threshold must satisfy 1 <= k <= n <= {}, got k={}, n={}".format(MAX_SHARES, k, n))


def _evaluate(secret: int, coeffs: Sequence[int], x: int) -> int:
    # Horner, highest degree first
    acc = 0
    for c in reversed(coeffs):
        acc = (acc + c) * x % FIELD_PRIME
    return (acc + secret) % FIELD_PRIME


def share_byte(secret: int, n: int, k: int, coeffs: Sequence[Union[FieldElement, int]]) -> List[SharePoint]:
    """
    Splits one byte into ``n`` points of a degree ``k - 1`` polynomial with ``f(0) = secret``.

    :param coeffs: the ``k - 1`` non-constant coefficients, lowest degree first
    """
    _check_threshold(n, k)
    if not 0 <= secret < 256:
        raise SharingError("Secret {} is not a byte".format(secret))
    if len(coeffs) != k - 1:
        raise BadThreshold("Expected {} coefficients for k={}, got {}".format(k - 1, k, len(coeffs)))
    raw = [int(c) % FIELD_PRIME for c in coeffs]
    return [
        SharePoint(FieldElement(x), FieldElement(_evaluate(secret, raw, x)))
        for x in range(1, n + 1)
    ]


def lagrange_weights_at_zero(xs: Sequence[int]) -> List[int]:
    """
    Weights w_i with f(0) = sum(w_i * f(x_i)) for every polynomial of degree < len(xs).
    """
    weights = []
    for i, x_i in enumerate(xs):
        num, den = 1, 1
        for j, x_j in enumerate(xs):
            if i == j:
                continue
            num = num * x_j % FIELD_PRIME
            den = den * (x_j - x_i) % FIELD_PRIME
        weights.append(num * field_inverse(FieldElement(den)).value % FIELD_PRIME)
    return weights


def _distinct_by_x(points: Iterable[Tuple[int, int]]) -> Dict[int, int]:
    by_x: Dict[int, int] = {}
    for x, y in points:
        by_x.setdefault(x, y)
    return by_x


def reconstruct_byte(points: Sequence[SharePoint], k: int) -> int:
    """
    Interpolates f(0) from the first ``k`` points with distinct x.
    """
    if k < 1:
        raise BadThreshold()
    by_x = _distinct_by_x((pt.x.value, pt.y.value) for pt in points)
    if len(by_x) < k:
        raise InsufficientShares("Need {} distinct shares, got {}".format(k, len(by_x)))
    xs = list(by_x)[:k]
    weights = lagrange_weights_at_zero(xs)
    secret = sum(w * by_x[x] for w, x in zip(weights, xs)) % FIELD_PRIME
    if secret >= 256:
        raise NotAByte("Reconstructed value {} is not a byte".format(secret))
    return secret


def share_message(msg: bytes, n: int, k: int, rng: random.Random) -> List[ShareStream]:
    """
    Shares every byte of ``msg`` with a fresh random polynomial and returns one stream per index.

    Coefficients are drawn from ``rng`` byte by byte, lowest degree first.
    """
    if not msg:
        raise EmptyMessage()
    _check_threshold(n, k)
    columns: List[List[int]] = [[] for _ in range(n)]
    xs = range(1, n + 1)
    for secret in msg:
        coeffs = [rng.randrange(FIELD_PRIME) for _ in range(k - 1)]
        for column, x in zip(columns, xs):
            column.append(_evaluate(secret, coeffs, x))
    log.debug("Shared %d bytes into %d streams with threshold %d", len(msg), n, k)
    return [ShareStream(x=x, values=tuple(column)) for x, column in zip(xs, columns)]


def reconstruct_message(streams: Sequence[ShareStream], k: int) -> bytes:
    """
    Rebuilds a message from at least ``k`` share streams, byte by byte.
    """
    if k < 1:
        raise BadThreshold()
    seen = set()
    for stream in streams:
        if stream.x in seen:
            raise DuplicateShareIndex("Share index {} appears twice".format(stream.x))
        seen.add(stream.x)
    if len(streams) < k:
        raise InsufficientShares("Need {} share streams, got {}".format(k, len(streams)))
    lengths = {stream.length for stream in streams}
    if len(lengths) != 1:
        raise LengthMismatch("Share stream lengths differ: {}".format(sorted(lengths)))

    chosen = list(streams)[:k]
    weights = lagrange_weights_at_zero([stream.x for stream in chosen])
    out = bytearray()
    for column in zip(*(stream.values for stream in chosen)):
        secret = sum(w * y for w, y in zip(weights, column)) % FIELD_PRIME
        if secret >= 256:
            raise NotAByte("Reconstructed value {} at offset {} is not a byte".format(secret, len(out)))
        out.append(secret)
    return bytes(out)
