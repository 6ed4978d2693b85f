"""
Tests for the command-line front end
"""
import csv
import io
import json

import pytest

from config import RunConfig
from core.errors import ConfigError
from i18n.translations import set_language
from qglnn import EXIT_FAILED, EXIT_OK, EXIT_USAGE, build_parser, run


@pytest.fixture(autouse=True)
def english():
    yield
    set_language('en')


def sector_series(document, exponents):
    for term in document['characters'][0]['terms']:
        if term['x_exponents'] == exponents:
            return term['q_series']
    return None


# ======================================================
# ⚙️ CONFIGURATION
# ======================================================

def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig('char', rank=0)
    with pytest.raises(ConfigError):
        RunConfig('char', degree=-1)
    with pytest.raises(ConfigError):
        RunConfig('char', threads=0)
    with pytest.raises(ConfigError):
        RunConfig('char', output='xml')
    assert RunConfig('char').as_dict()['beta'] == '0'


@pytest.mark.parametrize('argv', [
    ['verify', 'nothing'],
    ['char', '--alpha', 'one half'],
    ['char', '--rank', '0'],
    ['char', '--family', 'Falpha', '--order', '1'],
    ['char', '--method', 'closed', '--order', '1'],
    ['oracle', 'two-point', '--pair', 'H1', '--rank', '1'],
    ['oracle', 'two-point', '--specA', 'H1;1/2', '--rank', '1'],
    ['verify', 'fz', '--window', '-1'],
    ['verify', 'fz', '--rank', '1', '--degree', '1', '--window', '2'],
    ['verify', 'drinfeld', '--radius', '-1'],
])
def test_usage_errors(argv):
    assert run(argv) == EXIT_USAGE


def test_help_exits_cleanly():
    assert run(['--help']) == EXIT_OK


def test_flags_reach_the_run_config():
    args = build_parser().parse_args(['verify', 'fz', '--window', '2', '--radius', '1'])
    config = RunConfig.from_args(args)
    assert (config.window, config.radius) == (2, 1)
    assert RunConfig('verify').window is None


def test_strict_text_has_two_spellings():
    parser = build_parser()
    for flag in ('--strict-printed-text', '--strict-paper-text'):
        assert parser.parse_args(['char', flag]).strict_printed_text is True


# ======================================================
# 🔺 EXIT CODES
# ======================================================

def test_ybe_passes(capsys):
    assert run(['verify', 'ybe', '--rank', '1']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'ybe' in out
    assert '❌' not in out


def test_mutated_ybe_fails(capsys):
    assert run(['verify', 'ybe', '--rank', '1', '--mutate']) == EXIT_FAILED
    assert '❌ ybe' in capsys.readouterr().out


def test_pretty_report_language(capsys):
    assert run(['verify', 'unitarity', '--rank', '1', '--lang', 'it']) == EXIT_OK
    assert 'verifiche superate' in capsys.readouterr().out


# ======================================================
# 📈 CHARACTERS
# ======================================================

def test_char_json(tmp_path):
    path = tmp_path / 'char.json'
    argv = ['char', '--family', 'Falpha', '--alpha', '1/2', '--beta', '0', '--order', '2',
            '--output', 'json', '--out', str(path)]
    assert run(argv) == EXIT_OK
    document = json.loads(path.read_text(encoding='utf-8'))
    assert document['schema_version'] == '1'
    assert document['status'] == 'ok'
    assert document['characters'][0]['offset'] == '1/4'
    assert sector_series(document, ['1/2', '1/2', '0', '3/2']) == [['0', '1'], ['1', '6'], ['2', '27']]


def test_json_is_deterministic(tmp_path):
    outputs = []
    for n, threads in enumerate(('1', '1', '2')):
        path = tmp_path / f'run{n}.json'
        argv = ['char', '--family', 'F01', '--selector', 'KKer', '--method', 'brst', '--order', '1',
                '--output', 'json', '--out', str(path), '--threads', threads]
        assert run(argv) == EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0]) == json.loads(outputs[2])


def test_char_csv(capsys):
    assert run(['char', '--order', '1', '--output', 'csv']) == EXIT_OK
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert rows[0][:2] == ['record', 'name']
    origin = [r for r in rows[1:] if r[0] == 'character' and r[6] == '0 0 0 0']
    assert [(r[7], r[8]) for r in origin] == [('0', '1'), ('1', '6')]


def test_char_with_closed_formula(capsys):
    argv = ['char', '--family', 'F01', '--selector', 'KKer', '--prop', 'f01-sub', '--order', '1', '--output', 'json']
    assert run(argv) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert {r['status'] for r in document['reports']} == {'ok'}
    assert len(document['reports']) == 2


def test_strict_printed_line_fails(capsys):
    argv = ['char', '--family', 'F10', '--selector', 'CCoker', '--prop', 'f10-sub', '--order', '1',
            '--strict-printed-text']
    assert run(argv) == EXIT_FAILED
    assert 'pattern_matches: True' in capsys.readouterr().out


# ======================================================
# 🔀 VERTEX OPERATORS AND ORACLE
# ======================================================

def test_appendix_b_runs_the_vertex_brackets(capsys):
    argv = ['verify', 'appendix-b', '--rank', '1', '--degree', '1', '--radius', '0', '--output', 'json']
    assert run(argv) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document['reports']
    assert {r['status'] for r in document['reports']} == {'ok'}


def test_oracle_takes_separate_field_symbols(capsys):
    argv = ['oracle', 'two-point', '--rank', '1', '--order', '2', '--specA', 'H1;1/2', '--specB', 'H*1;1/2',
            '--output', 'json']
    assert run(argv) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert len(document['reports']) == 1
    assert document['reports'][0]['status'] == 'ok'


def test_fz_window_sets_the_depth(capsys):
    argv = ['verify', 'fz', '--rank', '1', '--degree', '3', '--window', '2', '--pair', 'phi_phi', '--output', 'json']
    assert run(argv) == EXIT_OK
    document = json.loads(capsys.readouterr().out)
    assert document['reports'][0]['parameters']['depth'] == 2
