import json
import subprocess
import sys
from pathlib import Path

from bcwitt.cli import build_parser, main, stringify

PKG = 'bcwitt'
ROOT = Path(__file__).resolve().parents[1]


def _run_cli(args):
    exe = [sys.executable, '-m', PKG + '.cli']
    cp = subprocess.run(exe + args, cwd=str(ROOT), capture_output=True, text=True)
    return cp.returncode, cp.stdout, cp.stderr


def test_dr_table_json():
    code, out, err = _run_cli(['dr', 'table', '--field', 'x^2+1', '--modulus', '2'])
    assert code == 0, err
    payload = json.loads(out)
    assert payload['command'] == 'dr table'
    assert payload['result']['size'] == '3'
    assert len(payload['result']['table']) == 3


def test_reducible_field_is_math_error():
    code, out, err = _run_cli(['field', 'new', '--poly', 'x^2-x'])
    assert code == 1
    assert 'reducible' in err
    assert out == ''


def test_usage_errors_exit_3():
    code, _out, _err = _run_cli(['dr', 'table', '--field', 'x', '--modulus', '4', '--construction', 'z'])
    assert code == 3
    assert main(['witt']) == 3
    assert main(['verify', '--suite', '0']) == 3


def test_verify_output_is_reproducible():
    args = ['verify', '--suite', '1', '--seed', '7', '--reduced']
    code1, out1, _ = _run_cli(args)
    code2, out2, _ = _run_cli(args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)['result']['passed'] is True


def test_zeta_csv(capsys):
    assert main(['endo', 'zeta', '--field', 'x^2+1', '--bound', '5', '--format', 'csv']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'n,a(n)'
    assert lines[1:] == ['1,1', '2,1', '3,0', '4,1', '5,2']


def test_config_file_sets_format(tmp_path, capsys):
    cfg = tmp_path / 'pyproject.toml'
    cfg.write_text('[tool.bcwitt]\nformat = "pretty"\nnotAKey = 1\n', encoding='utf-8')
    assert main(['dr', 'table', '--field', 'x', '--modulus', '4', '--config', str(cfg)]) == 0
    captured = capsys.readouterr()
    assert captured.out.startswith('# dr table (bcwitt')
    assert '[warn] unknown config key: notAKey' in captured.err
    # CLI の指定が設定ファイルより優先
    assert main(['dr', 'table', '--field', 'x', '--modulus', '4', '--config', str(cfg), '--format', 'json']) == 0
    assert json.loads(capsys.readouterr().out)['result']['size'] == '4'


def test_witt_ghost(capsys):
    vec = json.dumps({'S': [1, 2], 'x': {'1': '2', '2': '1'}})
    assert main(['witt', 'ghost', '--vector', vec]) == 0
    result = json.loads(capsys.readouterr().out)['result']
    assert result['w'] == {'1': '2', '2': '6'}


def test_witt_member_and_unghost(capsys):
    vec = json.dumps({'S': [1, 2], 'w': {'1': '1', '2': '2'}})
    assert main(['witt', 'member', '--vector', vec]) == 0
    assert json.loads(capsys.readouterr().out)['result']['member'] is False
    assert main(['witt', 'unghost', '--vector', vec]) == 1
    assert main(['witt', 'unghost', '--vector', vec, '--ring', 'QQ']) == 0
    assert json.loads(capsys.readouterr().out)['result']['x'] == {'1': '1', '2': '1/2'}


def test_endo_and_frobcheck(capsys):
    assert main(['endo', 'verify', '--field', 'x', '--modulus', '6']) == 0
    assert json.loads(capsys.readouterr().out)['result']['passed'] is True
    assert main(['witt', 'frobcheck', '--level', '5', '--prime', '2', '--trials', '3']) == 0
    assert main(['endo', 'ggc', '--level', '31']) == 1


def test_output_file(tmp_path):
    out = tmp_path / 'ray.json'
    assert main(['rayclass', '--field', 'x', '--modulus', '5', '--no-strict', '--output', str(out)]) == 0
    assert json.loads(out.read_text(encoding='utf-8'))['result']['order'] == '2'


def test_stringify_and_parser():
    assert stringify({'a': [1, True, None]}) == {'a': ['1', True, None]}
    args = build_parser().parse_args(['ideal', 'divisors', '--field', 'x', '--modulus', '12'])
    assert (args.command, args.action) == ('ideal', 'divisors')
