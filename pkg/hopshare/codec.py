"""
Hex digest conversion and the ROT13 scramble applied to the digest.
"""
import string
from typing import NewType

from hopshare.exceptions import NonHexChar, OddLength

HexDigest = NewType('HexDigest', str)
RotText = NewType('RotText', str)

HEX_ALPHABET = frozenset('0123456789abcdef')
ROT_HEX_ALPHABET = frozenset('0123456789nopqrs')

_ROT13_TABLE = str.maketrans(
    string.ascii_lowercase + string.ascii_uppercase,
    string.ascii_lowercase[13:] + string.ascii_lowercase[:13]
    + string.ascii_uppercase[13:] + string.ascii_uppercase[:13],
)


def to_hex_digest(plain: bytes) -> HexDigest:
    """
    Two lowercase hex characters per byte, high nibble first.
    """
    return HexDigest(plain.hex())


def from_hex_digest(digest: str) -> bytes:
    if len(digest) % 2:
        raise OddLength("Hex digest of length {} is odd".format(len(digest)))
    for position, char in enumerate(digest):
        if char not in HEX_ALPHABET:
            raise NonHexChar("Character {!r} at {} is not lowercase hex".format(char, position))
    return bytes.fromhex(digest)


def rot13(s: str) -> str:
    """
    Shifts ASCII letters 13 places, keeping case. Everything else passes through, so
    ``rot13(rot13(s)) == s``.
    """
    return s.translate(_ROT13_TABLE)


def is_hex_digest(s: str) -> bool:
    return len(s) % 2 == 0 and all(c in HEX_ALPHABET for c in s)


def is_rot_text(s: str) -> bool:
    return len(s) % 2 == 0 and all(c in ROT_HEX_ALPHABET for c in s)


def scramble(plain: bytes) -> RotText:
    """
    The sender's text stage: hex digest first, then ROT13.
    """
    return RotText(rot13(to_hex_digest(plain)))


def unscramble(text: str) -> bytes:
    """
    Inverse of :func:`scramble`.
    """
    return from_hex_digest(rot13(text))
