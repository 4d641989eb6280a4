"""
Command-line entry point.

Every flag has a scenario-file equivalent: the :class:`ScenarioConfig` field it sets. Values
resolve as flags > ``--config`` file > library settings.
"""
import argparse
import dataclasses
import logging
import random
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Callable, Dict, IO, Iterator, List, Mapping, Optional, Sequence, Tuple

from hopshare import __version__
from hopshare._util import write_csv, write_records
from hopshare.analysis import CaptureScenario, analysis_report, monte_carlo, theorem_rows
from hopshare.constants import (
    ADVERSARY_MODES, ANALYZE, ATTACK, CHANNEL_COUNT, COMMANDS, DEFAULT_ENCODING, DUMP_FREQ_TABLE, FIXED,
    INDEPENDENT, LFSR_PERIOD, MAX_PARTS, MIN_PARTS, OUTPUT_FORMATS, SIMULATE, SYNC,
)
from hopshare.exceptions import ConfigError, HopShareException
from hopshare.hopping import frequency_table
from hopshare.medium import AdversaryMode, FixedChannelSet, IndependentPerPacket, Medium
from hopshare.node import NodeState, run_until_sync, simulate, sync_round
from hopshare.settings import effective_settings

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

Record = Dict[str, Any]


def _int_tuple(value: Any) -> Tuple[int, ...]:
    if isinstance(value, str):
        value = value.replace(',', ' ').split()
    return tuple(int(v) for v in value)


def _bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ('1', 'true', 'yes', 'on')
    return bool(value)


def _optional_int(value: Any) -> Optional[int]:
    if value is None or value == '':
        return None
    return int(value)


def _optional_str(value: Any) -> Optional[str]:
    return None if value in (None, '') else str(value)


@dataclass
class ScenarioConfig:
    """
    One run of the command line. Field names double as scenario-file keys.
    """
    command: str
    message: Optional[str] = None
    message_file: Optional[str] = None
    n_parts: int = 5
    parts: Optional[int] = None
    k: int = 3
    ks: Tuple[int, ...] = ()
    hop_seed: int = 1
    share_seed: int = 1
    adversary_seed: int = 1
    sync_seed: int = 1
    device_id: int = 1
    channel_count: int = 100000
    trials: int = 10000
    capture_tolerance: float = 0.01
    t_max: int = 1000000
    skew_ppm: int = 50
    loss_probability: float = 0.0
    mode: str = INDEPENDENT
    q: float = 0.25
    m: int = 1
    nodes: int = 3
    clocks: Tuple[int, ...] = ()
    drop_streams: Tuple[int, ...] = ()
    theorem: Optional[int] = None
    parallel: bool = False
    output: Optional[str] = None
    output_format: str = 'text'
    deterministic: bool = False
    verbose: bool = False


_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    'command': str,
    'message': _optional_str,
    'message_file': _optional_str,
    'n_parts': int,
    'parts': _optional_int,
    'k': int,
    'ks': _int_tuple,
    'hop_seed': int,
    'share_seed': int,
    'adversary_seed': int,
    'sync_seed': int,
    'device_id': int,
    'channel_count': int,
    'trials': int,
    'capture_tolerance': float,
    't_max': int,
    'skew_ppm': int,
    'loss_probability': float,
    'mode': str,
    'q': float,
    'm': int,
    'nodes': int,
    'clocks': _int_tuple,
    'drop_streams': _int_tuple,
    'theorem': _optional_int,
    'parallel': _bool,
    'output': _optional_str,
    'output_format': str,
    'deterministic': _bool,
    'verbose': _bool,
}


def read_scenario_file(path: str) -> Dict[str, Any]:
    """
    Parses a flat ``key=value`` file. Blank lines and ``#`` comments are skipped.
    """
    values: Dict[str, Any] = {}
    try:
        with open(path, encoding=DEFAULT_ENCODING) as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise ConfigError("Cannot read scenario file {}".format(path), cause=e)
    for number, line in enumerate(lines, start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError("{}:{}: expected key=value, got {!r}".format(path, number, line))
        key, value = (part.strip() for part in line.split('=', 1))
        values[key.replace('-', '_')] = value
    return values


def _convert(values: Mapping[str, Any], source: str) -> Dict[str, Any]:
    converted = {}
    for key, value in values.items():
        if key not in _CONVERTERS:
            raise ConfigError("Unknown {} key `{}`".format(source, key))
        try:
            converted[key] = _CONVERTERS[key](value)
        except (TypeError, ValueError) as e:
            raise ConfigError("Bad value {!r} for `{}` in {}".format(value, key, source), cause=e)
    return converted


def build_config(
    command: str,
    flags: Mapping[str, Any],
    file_values: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Mapping[str, Any]] = None,
) -> ScenarioConfig:
    """
    Layers settings defaults, scenario-file values and flags, then validates the result.
    """
    merged: Dict[str, Any] = {'command': command}
    settings = effective_settings() if defaults is None else defaults
    merged.update({key: value for key, value in settings.items() if key in _CONVERTERS})
    merged.update(_convert(file_values or {}, 'scenario file'))
    merged.update(_convert({k: v for k, v in flags.items() if v is not None}, 'flag'))
    merged['command'] = command
    config = ScenarioConfig(**merged)
    validate(config)
    return config


def validate(config: ScenarioConfig) -> None:
    if config.command not in COMMANDS:
        raise ConfigError("Unknown command `{}`".format(config.command))
    if config.output_format not in OUTPUT_FORMATS:
        raise ConfigError("format must be one of {}".format(', '.join(OUTPUT_FORMATS)))
    if config.channel_count < 2:
        raise ConfigError("channels must be at least 2")
    if config.command != ANALYZE and config.channel_count > CHANNEL_COUNT:
        raise ConfigError("channels must be at most {} for {}, got {}".format(
            CHANNEL_COUNT, config.command, config.channel_count))
    for name in ('hop_seed', 'share_seed', 'adversary_seed', 'sync_seed'):
        if getattr(config, name) == 0:
            raise ConfigError("{} must be nonzero".format(name.replace('_', '-')))
    if not 0 < config.hop_seed <= LFSR_PERIOD:
        raise ConfigError("hop-seed must be within [1, {}]".format(LFSR_PERIOD))
    if not 0.0 <= config.loss_probability <= 1.0:
        raise ConfigError("loss must be within [0, 1]")

    if config.command == SIMULATE:
        if not MIN_PARTS <= config.n_parts <= MAX_PARTS:
            raise ConfigError("n must be between {} and {}, got {}".format(MIN_PARTS, MAX_PARTS, config.n_parts))
        if not 1 <= config.k <= config.n_parts:
            raise ConfigError("k must satisfy 1 <= k <= n, got k={} n={}".format(config.k, config.n_parts))
        if config.message is None and config.message_file is None:
            raise ConfigError("simulate needs --message or --message-file")
        bad = [i for i in config.drop_streams if not 0 <= i < config.n_parts]
        if bad:
            raise ConfigError("drop indices {} outside [0, {})".format(bad, config.n_parts))
    elif config.command == ATTACK:
        parts = config.parts if config.parts is not None else config.k
        if not 1 <= config.k <= parts <= config.channel_count:
            raise ConfigError("Need 1 <= k <= n <= channels, got k={} n={}".format(config.k, parts))
        if config.mode not in ADVERSARY_MODES:
            raise ConfigError("mode must be one of {}".format(', '.join(ADVERSARY_MODES)))
        if config.mode == INDEPENDENT and not 0.0 <= config.q <= 1.0:
            raise ConfigError("q must be within [0, 1]")
        if config.mode == FIXED and not 0 <= config.m <= config.channel_count:
            raise ConfigError("m must be within [0, channels]")
        if config.trials < 1:
            raise ConfigError("trials must be at least 1")
    elif config.command == ANALYZE:
        if any(k < 1 for k in config.ks):
            raise ConfigError("every k must be at least 1")
        if config.theorem is not None and not 1 <= config.theorem <= 64:
            raise ConfigError("theorem must be within [1, 64]")
    elif config.command == SYNC:
        if config.clocks and len(config.clocks) < 2 or not config.clocks and config.nodes < 2:
            raise ConfigError("sync needs at least two nodes")
        if any(c < 0 for c in config.clocks):
            raise ConfigError("clocks must be non-negative")
        if config.t_max < 1:
            raise ConfigError("t-max must be positive")


def _stamp(records: List[Record], config: ScenarioConfig) -> List[Record]:
    if not config.deterministic:
        generated_at = datetime.now(timezone.utc).isoformat()
        for record in records:
            record['generated_at'] = generated_at
    return records


def _message(config: ScenarioConfig) -> bytes:
    if config.message_file is not None:
        try:
            with open(config.message_file, 'rb') as f:
                return f.read()
        except OSError as e:
            raise ConfigError("Cannot read message file {}".format(config.message_file), cause=e)
    assert config.message is not None
    return config.message.encode(DEFAULT_ENCODING)


def _node(config: ScenarioConfig, device_id: int, **kwargs: Any) -> NodeState:
    return NodeState(
        device_id=device_id,
        hop_seed=config.hop_seed,
        share_rng_seed=config.share_seed,
        k=config.k,
        n_parts=config.n_parts,
        channel_count=config.channel_count,
        t_max=config.t_max,
        **kwargs,
    )


def run_simulate(config: ScenarioConfig) -> Tuple[int, List[Record]]:
    plain = _message(config)
    medium = Medium(channel_count=config.channel_count, loss_probability=config.loss_probability,
                    seed=config.share_seed)
    sender = _node(config, config.device_id)
    receiver = _node(config, config.device_id + 1)
    result = simulate(plain, sender, receiver, medium, drop_streams=config.drop_streams)
    ok = result.recovered == plain
    summary: Record = {
        'verdict': 'OK' if ok else 'MISMATCH',
        'recovered': result.recovered.decode(DEFAULT_ENCODING, errors='replace'),
        'n_parts': config.n_parts,
        'k': config.k,
        'channels': list(result.plan.schedule.channels),
        'slots': list(result.slots),
    }
    return (0 if ok else 2), [summary] + medium.trace_records()


def adversary_mode(config: ScenarioConfig) -> AdversaryMode:
    if config.mode == FIXED:
        return FixedChannelSet(config.m)
    return IndependentPerPacket(config.q)


def run_attack(config: ScenarioConfig) -> Tuple[int, List[Record]]:
    scenario = CaptureScenario(
        channel_count=config.channel_count, k=config.k, mode=adversary_mode(config), n_parts=config.parts,
        device_id=config.device_id,
    )
    if config.parallel:
        import anyio

        from hopshare.asyncio.analysis import monte_carlo as async_monte_carlo
        stats = anyio.run(async_monte_carlo, scenario, config.trials, config.adversary_seed)
    else:
        stats = monte_carlo(scenario, config.trials, config.adversary_seed)
    within = stats.within(config.capture_tolerance)
    records = [dict(record, within_tolerance=within) for record in stats.as_records()]
    return 0, records


def run_analyze(config: ScenarioConfig) -> Tuple[int, List[Record]]:
    ks = config.ks or tuple(range(1, 11))
    records: List[Record] = [dict(row, table='capture') for row in analysis_report(config.channel_count, ks)]
    if config.theorem is not None:
        for row in theorem_rows(config.theorem):
            row['root_W2_ge_root_W1'] = row['root_W2'] >= row['root_W1']
            records.append(dict(row, table='theorem'))
    return 0, records


def run_sync(config: ScenarioConfig) -> Tuple[int, List[Record]]:
    rng = random.Random(config.sync_seed)
    medium = Medium(channel_count=config.channel_count, loss_probability=config.loss_probability,
                    seed=config.sync_seed)
    if config.clocks:
        nodes = [_node(config, i, local_clock=clock) for i, clock in enumerate(config.clocks, start=1)]
        clocks_before = tuple(config.clocks)
        outcomes = sync_round(nodes, medium, strict=False)
        pulses = 0
    else:
        nodes = [
            _node(config, i, local_clock=rng.randrange(config.t_max // 10 + 1),
                  skew_ppm=rng.randint(-config.skew_ppm, config.skew_ppm))
            for i in range(1, config.nodes + 1)
        ]
        run = run_until_sync(nodes, medium, strict=False)
        clocks_before, outcomes, pulses = run.clocks_before, list(run.outcomes), run.global_pulses
    adopted = max(clocks_before)
    records: List[Record] = [
        {
            'node_id': outcome.node_id,
            'clock_before': before,
            'adopted_clock': outcome.adopted_clock,
            'source_device': outcome.source_device,
            'synced': outcome.adopted_clock == adopted,
            'global_pulses': pulses,
        }
        for outcome, before in zip(outcomes, clocks_before)
    ]
    return 0, records


def run_dump_freq_table(config: ScenarioConfig) -> Tuple[int, List[Record]]:
    return 0, [{'index': index, 'hz': hz} for index, hz in frequency_table(config.channel_count)]


_COMMANDS: Mapping[str, Callable[[ScenarioConfig], Tuple[int, List[Record]]]] = {
    SIMULATE: run_simulate,
    ATTACK: run_attack,
    ANALYZE: run_analyze,
    SYNC: run_sync,
    DUMP_FREQ_TABLE: run_dump_freq_table,
}


class _Output:
    def __init__(self, path: Optional[str], stdout: IO[str]) -> None:
        self.path = path
        self.stdout = stdout
        self._file: Optional[IO[str]] = None

    def __enter__(self) -> IO[str]:
        if self.path is None:
            return self.stdout
        self._file = open(self.path, 'w', encoding=DEFAULT_ENCODING, newline='')
        return self._file

    def __exit__(self, *exc: Any) -> None:
        if self._file is not None:
            self._file.close()


def run(config: ScenarioConfig, stdout: Optional[IO[str]] = None, stderr: Optional[IO[str]] = None) -> int:
    """
    Runs one command and writes its records. Returns the process exit status: 0 on success,
    1 for configuration errors, 2 for runtime errors.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        validate(config)
        status, records = _COMMANDS[config.command](config)
        with _Output(config.output, stdout) as out:
            if config.command == DUMP_FREQ_TABLE:
                write_csv(records, out)
            else:
                write_records(_stamp(records, config), config.output_format, out)
    except ConfigError as e:
        stderr.write('hopshare: {}\n'.format(e.msg))
        return 1
    except HopShareException as e:
        log.debug("%s failed", config.command, exc_info=True)
        stderr.write('hopshare: {}: {}\n'.format(type(e).__name__, e.msg))
        return 2
    except OSError as e:
        stderr.write('hopshare: {}\n'.format(e))
        return 2
    return status


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', help="flat key=value scenario file")
    parser.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS)
    parser.add_argument('--output', help="write records here instead of stdout")
    parser.add_argument('--deterministic', action='store_true', default=None,
                        help="omit wall-clock fields from the output")
    parser.add_argument('--verbose', action='store_true', default=None)
    parser.add_argument('--channels', dest='channel_count', type=int)
    parser.add_argument('--device-id', dest='device_id', type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='hopshare', description="Multi-channel secret-shared transmission")
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser(SIMULATE, help="round-trip a message over the simulated band")
    _common(p)
    p.add_argument('--message')
    p.add_argument('--message-file', dest='message_file')
    p.add_argument('--n', dest='n_parts', type=int)
    p.add_argument('--k', type=int)
    p.add_argument('--hop-seed', dest='hop_seed', type=int)
    p.add_argument('--share-seed', dest='share_seed', type=int)
    p.add_argument('--loss', dest='loss_probability', type=float)
    p.add_argument('--drop', dest='drop_streams', type=int, nargs='*',
                   help="stream positions discarded at the receiver")

    p = subparsers.add_parser(ATTACK, help="Monte Carlo eavesdropper experiment")
    _common(p)
    p.add_argument('--k', type=int)
    p.add_argument('--n', dest='parts', type=int, help="parts per session, defaults to k")
    p.add_argument('--mode', choices=ADVERSARY_MODES)
    p.add_argument('--q', type=float)
    p.add_argument('--m', type=int)
    p.add_argument('--trials', type=int)
    p.add_argument('--seed', dest='adversary_seed', type=int)
    p.add_argument('--tolerance', dest='capture_tolerance', type=float)
    p.add_argument('--parallel', action='store_true', default=None)

    p = subparsers.add_parser(ANALYZE, help="capture probability report")
    _common(p)
    p.add_argument('--k', dest='ks', type=int, nargs='+')
    p.add_argument('--theorem', type=int, metavar='N_MAX', help="add the set-counting table up to N_MAX")

    p = subparsers.add_parser(SYNC, help="max-clock synchronization round")
    _common(p)
    p.add_argument('--nodes', type=int)
    p.add_argument('--clocks', type=int, nargs='+')
    p.add_argument('--t-max', dest='t_max', type=int)
    p.add_argument('--skew-ppm', dest='skew_ppm', type=int)
    p.add_argument('--seed', dest='sync_seed', type=int)
    p.add_argument('--loss', dest='loss_probability', type=float)

    p = subparsers.add_parser(DUMP_FREQ_TABLE, help="channel index to frequency table as CSV")
    _common(p)
    return parser


def _flags(namespace: argparse.Namespace) -> Iterator[Tuple[str, Any]]:
    for key, value in vars(namespace).items():
        if key not in ('command', 'config') and value is not None:
            yield key, value


def parse_args(argv: Optional[Sequence[str]] = None) -> ScenarioConfig:
    namespace = build_parser().parse_args(argv)
    file_values = read_scenario_file(namespace.config) if namespace.config else None
    return build_config(namespace.command, dict(_flags(namespace)), file_values)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config = parse_args(argv)
    except ConfigError as e:
        sys.stderr.write('hopshare: {}\n'.format(e.msg))
        return 1
    logging.basicConfig(
        level=logging.DEBUG if config.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    log.debug("Running %s", dataclasses.asdict(config))
    return run(config)
