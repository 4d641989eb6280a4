import csv
import enum
import json
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Sequence, TextIO

from hopshare.constants import CSV, JSON, TEXT

Record = Mapping[str, Any]


def to_hex(raw: bytes) -> str:
    return raw.hex()


def simple_value(value: Any) -> Any:
    """
    Converts report values into JSON/CSV friendly primitives.
    """
    if isinstance(value, Fraction):
        return "{}/{}".format(value.numerator, value.denominator)
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, (list, tuple)):
        return [simple_value(v) for v in value]
    if isinstance(value, dict):
        return {k: simple_value(v) for k, v in value.items()}
    if isinstance(value, enum.Enum):
        return value.value
    return value


def simple_record(record: Record) -> Dict[str, Any]:
    return {key: simple_value(value) for key, value in record.items()}


def _columns(records: Sequence[Record]) -> List[str]:
    columns: List[str] = []
    for record in records:
        for key in record:
            if key not in columns:
                columns.append(key)
    return columns


def write_json_lines(records: Iterable[Record], stream: TextIO) -> None:
    for record in records:
        stream.write(json.dumps(simple_record(record), sort_keys=False))
        stream.write('\n')


def write_csv(records: Sequence[Record], stream: TextIO) -> None:
    writer = csv.DictWriter(stream, fieldnames=_columns(records), lineterminator='\n')
    writer.writeheader()
    for record in records:
        row = simple_record(record)
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})


def write_text(records: Sequence[Record], stream: TextIO) -> None:
    for index, record in enumerate(records):
        if index:
            stream.write('\n')
        row = simple_record(record)
        width = max((len(key) for key in row), default=0)
        for key, value in row.items():
            stream.write('{}: {}\n'.format(key.ljust(width), value))


def write_records(records: Sequence[Record], fmt: str, stream: TextIO) -> None:
    if fmt == JSON:
        write_json_lines(records, stream)
    elif fmt == CSV:
        write_csv(records, stream)
    elif fmt == TEXT:
        write_text(records, stream)
    else:
        raise ValueError("Unknown output format: {}".format(fmt))
