"""
hopshare constants
"""
from typing import Final

# Finite field
FIELD_PRIME: Final = 257
MAX_SHARES: Final = 256
SHARE_ELEMENT_BYTES: Final = 2

# Band plan
CHANNEL_COUNT: Final = 100000
BASE_FREQUENCY_HZ: Final = 2_400_000_000
CHANNEL_WIDTH_HZ: Final = 1_000

# Hopping register
LFSR_WIDTH: Final = 17
LFSR_TAPS: Final = (17, 14)
LFSR_MASK: Final = (1 << LFSR_WIDTH) - 1
LFSR_PERIOD: Final = (1 << LFSR_WIDTH) - 1

# Parts per session
MIN_PARTS: Final = 5
MAX_PARTS: Final = 10

# Wire formats
DATA_TYPE_BIT: Final = 1
SYNC_TYPE_BIT: Final = 0
COUNTDOWN_BITS: Final = 8
DEVICE_ID_BITS: Final = 32
NODE_ID_BITS: Final = 32
CLOCK_COUNT_BITS: Final = 32
PAYLOAD_BYTES: Final = 10
PAYLOAD_BITS: Final = PAYLOAD_BYTES * 8
DATA_PACKET_BITS: Final = 1 + COUNTDOWN_BITS + DEVICE_ID_BITS + PAYLOAD_BITS
DATA_PACKET_BYTES: Final = 16
SYNC_PACKET_BITS: Final = 1 + NODE_ID_BITS + CLOCK_COUNT_BITS
SYNC_PACKET_BYTES: Final = 9
ELEMENTS_PER_PACKET: Final = PAYLOAD_BYTES // SHARE_ELEMENT_BYTES
MAX_PACKETS_PER_STREAM: Final = (1 << COUNTDOWN_BITS) - 1

# Message framing
LENGTH_PREFIX_BYTES: Final = 4

# Clock
DEFAULT_T_MAX: Final = 10 ** 6

# Trace event kinds
DELIVERED: Final = 'delivered'
COLLIDED: Final = 'collided'
LOST: Final = 'lost'
CAPTURED: Final = 'captured'
SYNC_REPLY: Final = 'sync-reply'

# Pseudo channel used in traces for events that occupy the whole band
ALL_CHANNELS: Final = -1

# CLI
SIMULATE: Final = 'simulate'
ATTACK: Final = 'attack'
ANALYZE: Final = 'analyze'
SYNC: Final = 'sync'
DUMP_FREQ_TABLE: Final = 'dump-freq-table'
COMMANDS: Final = (SIMULATE, ATTACK, ANALYZE, SYNC, DUMP_FREQ_TABLE)

JSON: Final = 'json'
CSV: Final = 'csv'
TEXT: Final = 'text'
OUTPUT_FORMATS: Final = (JSON, CSV, TEXT)

INDEPENDENT: Final = 'independent'
FIXED: Final = 'fixed'
ADVERSARY_MODES: Final = (INDEPENDENT, FIXED)

# Claims printed in the source security analysis, in bits
PAPER_P1_BITS: Final = 18
PAPER_P2_BITS: Final = {10: 160, 5: 128}

DEFAULT_ENCODING: Final = 'utf-8'
