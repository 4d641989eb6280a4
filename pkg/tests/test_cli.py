import csv
import io
import json

import pytest
from freezegun import freeze_time

from hopshare.cli import ScenarioConfig, build_config, main, parse_args, read_scenario_file, run
from hopshare.exceptions import ConfigError


def run_config(config):
    out, err = io.StringIO(), io.StringIO()
    status = run(config, stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


def json_lines(text):
    return [json.loads(line) for line in text.splitlines()]


class TestConfig:

    def test_flags_override_file_override_settings(self, tmp_path):
        scenario = tmp_path / 'scenario.cfg'
        scenario.write_text('# attack setup\nk = 4\nchannel-count = 32\ntrials=50\n')
        config = parse_args(['attack', '--config', str(scenario), '--k', '2'])
        assert config.k == 2
        assert config.channel_count == 32
        assert config.trials == 50
        assert config.capture_tolerance == 0.01

    def test_every_field_is_a_file_key(self, tmp_path):
        scenario = tmp_path / 'scenario.cfg'
        scenario.write_text('clocks = 1, 5, 3\ndeterministic = true\nparallel = no\n')
        values = read_scenario_file(str(scenario))
        config = build_config('sync', {}, values)
        assert config.clocks == (1, 5, 3)
        assert config.deterministic is True
        assert config.parallel is False

    @pytest.mark.parametrize('argv', [
        ['simulate', '--message', 'HI', '--n', '4'],
        ['simulate', '--message', 'HI', '--n', '5', '--k', '6'],
        ['simulate', '--message', 'HI', '--hop-seed', '0'],
        ['simulate'],
        ['attack', '--k', '3', '--n', '2'],
        ['attack', '--trials', '0'],
        ['sync', '--clocks', '5'],
    ])
    def test_invalid(self, argv):
        with pytest.raises(ConfigError):
            parse_args(argv)

    def test_unknown_file_key(self, tmp_path):
        scenario = tmp_path / 'scenario.cfg'
        scenario.write_text('colour = blue\n')
        with pytest.raises(ConfigError):
            parse_args(['analyze', '--config', str(scenario)])

    def test_malformed_file(self, tmp_path):
        scenario = tmp_path / 'scenario.cfg'
        scenario.write_text('just words\n')
        with pytest.raises(ConfigError):
            read_scenario_file(str(scenario))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_scenario_file(str(tmp_path / 'nope.cfg'))

    def test_main_reports_config_errors(self, capsys):
        assert main(['simulate', '--message', 'HI', '--n', '11']) == 1
        assert 'n must be between 5 and 10' in capsys.readouterr().err

    @pytest.mark.parametrize('argv', [
        ['simulate', '--message', 'HELLO', '--channels', '120000'],
        ['simulate', '--message', 'HELLO', '--channels', '200000'],
        ['attack', '--channels', '100001', '--trials', '10'],
        ['sync', '--channels', '100001'],
        ['dump-freq-table', '--channels', '100001'],
    ])
    def test_band_wider_than_ism_is_a_config_error(self, argv, capsys):
        assert main(argv) == 1
        assert 'channels must be at most 100000' in capsys.readouterr().err

    def test_analyze_accepts_any_band(self):
        assert parse_args(['analyze', '--channels', '200000']).channel_count == 200000


class TestSimulate:

    def test_hello(self):
        config = parse_args(['simulate', '--message', 'HELLO', '--n', '5', '--k', '3', '--hop-seed', '7',
                             '--share-seed', '9', '--format', 'json', '--deterministic'])
        status, out, _ = run_config(config)
        assert status == 0
        summary, *trace = json_lines(out)
        assert summary['verdict'] == 'OK'
        assert summary['recovered'] == 'HELLO'
        assert len(summary['channels']) == 5
        assert trace and {r['event'] for r in trace} == {'delivered'}
        assert {r['channel'] for r in trace} == set(summary['channels'])
        assert 'generated_at' not in summary

    def test_deterministic_output_is_stable(self):
        argv = ['simulate', '--message', 'HELLO', '--format', 'csv', '--deterministic']
        assert run_config(parse_args(argv))[1] == run_config(parse_args(argv))[1]

    @freeze_time('2026-01-02 03:04:05')
    def test_wall_clock_field(self):
        config = parse_args(['simulate', '--message', 'HELLO', '--format', 'json'])
        summary = json_lines(run_config(config)[1])[0]
        assert summary['generated_at'] == '2026-01-02T03:04:05+00:00'

    def test_text_output(self):
        config = parse_args(['simulate', '--message', 'HELLO', '--deterministic'])
        _, out, _ = run_config(config)
        assert out.startswith('verdict')
        assert 'recovered' in out and 'HELLO' in out

    def test_message_file(self, tmp_path):
        message = tmp_path / 'message.bin'
        message.write_bytes(b'\x00\xffbinary')
        config = parse_args(['simulate', '--message-file', str(message), '--format', 'json', '--deterministic'])
        status, out, _ = run_config(config)
        assert status == 0
        assert json_lines(out)[0]['verdict'] == 'OK'

    def test_too_many_dropped_streams_is_a_runtime_error(self):
        config = parse_args(['simulate', '--message', 'HELLO', '--k', '3', '--drop', '0', '1', '2'])
        status, out, err = run_config(config)
        assert status == 2
        assert 'InsufficientShares' in err

    def test_output_file(self, tmp_path):
        target = tmp_path / 'trace.jsonl'
        config = parse_args(['simulate', '--message', 'HELLO', '--format', 'json', '--deterministic',
                             '--output', str(target)])
        status, out, _ = run_config(config)
        assert status == 0 and out == ''
        assert json_lines(target.read_text())[0]['verdict'] == 'OK'


class TestAttack:

    @pytest.mark.slow
    def test_independent_example(self):
        config = parse_args(['attack', '--channels', '16', '--k', '2', '--mode', 'independent', '--q', '0.25',
                             '--trials', '100000', '--format', 'json', '--deterministic'])
        status, out, _ = run_config(config)
        assert status == 0
        without, with_ = json_lines(out)
        assert abs(with_['empirical'] - 0.0625) <= 0.01
        assert abs(without['empirical'] - 0.4375) <= 0.01
        assert with_['analytic'] == '1/16'
        assert with_['within_tolerance'] is True

    def test_parallel_matches_sequential(self):
        argv = ['attack', '--channels', '16', '--k', '2', '--mode', 'fixed', '--m', '3', '--trials', '300',
                '--format', 'json', '--deterministic']
        sequential = run_config(parse_args(argv))[1]
        parallel = run_config(parse_args(argv + ['--parallel']))[1]
        assert parallel == sequential


class TestAnalyze:

    def test_paper_row(self):
        config = parse_args(['analyze', '--channels', '100000', '--k', '10', '--format', 'json', '--deterministic'])
        status, out, _ = run_config(config)
        assert status == 0
        (row,) = json_lines(out)
        assert row['bits_P2'] == pytest.approx(166.1, abs=0.01)
        assert row['paper_claim'] == 160
        assert row['P2_exact'] == '1/{}'.format(10 ** 50)

    def test_theorem_table(self):
        config = parse_args(['analyze', '--k', '2', '--theorem', '6', '--format', 'json', '--deterministic'])
        records = json_lines(run_config(config)[1])
        theorem = [r for r in records if r['table'] == 'theorem']
        assert len(theorem) == 21
        assert all(r['root_W2_ge_root_W1'] for r in theorem)


class TestSync:

    def test_explicit_clocks(self):
        config = parse_args(['sync', '--clocks', '10', '12', '11', '--format', 'json', '--deterministic'])
        status, out, _ = run_config(config)
        assert status == 0
        records = json_lines(out)
        assert [r['adopted_clock'] for r in records] == [12, 12, 12]
        assert [r['source_device'] for r in records] == [2, 2, 2]
        assert all(r['synced'] for r in records)

    def test_clock_driver(self):
        config = parse_args(['sync', '--nodes', '4', '--t-max', '5000', '--skew-ppm', '200', '--seed', '3',
                             '--format', 'json', '--deterministic'])
        records = json_lines(run_config(config)[1])
        assert len(records) == 4
        assert len({r['adopted_clock'] for r in records}) == 1
        assert all(r['clock_before'] >= 5000 for r in records)


def test_dump_freq_table(tmp_path):
    target = tmp_path / 'table.csv'
    config = parse_args(['dump-freq-table', '--channels', '16', '--output', str(target)])
    assert run_config(config)[0] == 0
    rows = list(csv.DictReader(target.open()))
    assert len(rows) == 16
    assert rows[0] == {'index': '0', 'hz': '2400000000'}
    assert rows[-1] == {'index': '15', 'hz': '2400015000'}


def test_run_validates_hand_built_config():
    status, _, err = run_config(ScenarioConfig(command='simulate', message='HI', n_parts=12))
    assert status == 1
    assert 'n must be between' in err
