"""
qev/tests/cli_test.py
"""

import csv
import json

import pytest

from qev import (
    __version__,
    cli
)
from qev.errors import ConvergenceError

def _read_csv(path):
    lines = path.read_text().splitlines()
    comments = [line for line in lines if line.startswith('#')]
    rows = list(csv.DictReader(line for line in lines if not line.startswith('#')))
    return comments, rows

def test_validate_exits_cleanly(tmp_path, capsys):
    out = tmp_path / 'validate.csv'
    assert cli.run(['validate', '--m', '1', '--out', str(out)]) == cli.EXIT_OK
    comments, rows = _read_csv(out)
    assert comments[0] == f'# qev {__version__}'
    assert '# subcommand="validate"' in comments
    assert len(rows) == 6 and all(row['passed'] == 'true' for row in rows)
    assert any(line.startswith('# finding printed_constant_ratio[m=1]=') for line in comments)
    assert 'validate: 6/6 checks passed' in capsys.readouterr().out

def test_uncertainty_rows(tmp_path):
    out = tmp_path / 'widths.csv'
    assert cli.run(['uncertainty-sweep', '--m', '0,1', '--steps', '4', '--out', str(out)]) == 0
    _, rows = _read_csv(out)
    assert len(rows) == 8
    assert list(rows[0])[:2] == ['m', 'sigma_x']
    assert [row['m'] for row in rows] == ['0'] * 4 + ['1'] * 4
    assert float(rows[0]['prod_x']) == pytest.approx(0.5, abs=1e-8)

def test_same_inputs_give_identical_files(tmp_path):
    out = tmp_path / 'entropy.csv'
    argv = ['entropy-sweep', '--m', '1,3', '--steps', '8', '--out', str(out)]
    assert cli.run(argv) == 0
    first = out.read_bytes()
    assert cli.run(argv + ['--workers', '3']) == 0
    assert out.read_bytes() != b''
    assert cli.run(argv) == 0
    assert out.read_bytes() == first

def test_json_output(tmp_path):
    out = tmp_path / 'optimum.json'
    assert cli.run(['optimize', '--m', '1', '--format', 'json', '--out', str(out)]) == 0
    document = json.loads(out.read_text())
    assert document['version'] == __version__
    assert document['config']['target'] == 's_a'
    (row,) = document['rows']
    assert row['unimodal'] is True
    assert row['s_star'] == pytest.approx(1.0, abs=1e-8)

def test_wigner_grid_with_both_methods(tmp_path):
    out = tmp_path / 'wigner.csv'
    assert cli.run(['wigner-grid', '--steps', '3', '--method', 'both', '--out', str(out)]) == 0
    _, rows = _read_csv(out)
    assert len(rows) == 9
    assert list(rows[0]) == ['m', 'x', 'px', 'w_closed', 'w_numeric']
    assert float(rows[4]['w_numeric']) < 0

def test_flags_override_the_recipe(tmp_path):
    recipe = tmp_path / 'recipe.cfg'
    recipe.write_text('subcommand=entropy-sweep\nm=1\nsteps=6\nlo=0.5\nhi=2\n')
    out = tmp_path / 'entropy.csv'
    assert cli.run(['entropy-sweep', '--config', str(recipe), '--steps', '3', '--out', str(out)]) == 0
    comments, rows = _read_csv(out)
    assert len(rows) == 3
    assert '# steps=3' in comments and '# lo=0.5' in comments

def test_default_output_name(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli.run(['inequalities', '--steps', '4']) == 0
    _, rows = _read_csv(tmp_path / 'inequalities.csv')
    assert len(rows) == 4

@pytest.mark.parametrize('argv', [
    [],
    ['teleport'],
    ['validate', '--steps', 'many'],
    ['validate', '--format', 'xml'],
    ['validate', '--m', '1,x'],
    ['entropy-sweep', '--m', '1,1', '--steps', '4'],
    ['validate', '--plane', 'x,x'],
    ['wigner-grid', '--steps', '1'],
])
def test_usage_errors_exit_1(argv, tmp_path, capsys):
    assert cli.run(argv + ['--out', str(tmp_path / 'out.csv')] if argv else argv) == cli.EXIT_USAGE
    assert capsys.readouterr().err.startswith('qev: ')

def test_convergence_failure_exits_2(tmp_path, monkeypatch):
    def diverge(config):
        raise ConvergenceError('series did not settle')
    monkeypatch.setitem(cli._JOBS, 'validate', diverge)
    assert cli.run(['validate', '--out', str(tmp_path / 'v.csv')]) == cli.EXIT_CONVERGENCE

def test_recorded_failures_exit_2(tmp_path, monkeypatch):
    monkeypatch.setitem(cli._JOBS, 'validate', lambda config: ([{'m': 1}], [], True, 'validate'))
    out = tmp_path / 'v.csv'
    assert cli.run(['validate', '--out', str(out)]) == cli.EXIT_CONVERGENCE
    assert out.exists()


def test_named_width_preset(tmp_path):
    out = tmp_path / 'widths.csv'
    argv = ['uncertainty-sweep', '--preset', 'section2', '--m', '1', '--steps', '5', '--out', str(out)]
    assert cli.run(argv) == cli.EXIT_OK
    comments, rows = _read_csv(out)
    assert '# preset="widths"' in comments
    assert len(rows) == 5

def test_optimize_prints_the_optimum(tmp_path, capsys):
    out = tmp_path / 'optimum.csv'
    argv = ['optimize', '--target', 's_ab', '--m', '1', '--out', str(out)]
    assert cli.run(argv) == cli.EXIT_OK
    summary = capsys.readouterr().out
    assert summary.startswith('optimize: m=1 eta_x_star=')
    eta = float(summary.split('eta_x_star=')[1].split()[0])
    s_star = float(summary.split('s_star=')[1].split()[0])
    assert eta == pytest.approx(2 ** -0.25, abs=1e-4)
    assert s_star == pytest.approx(1.0, abs=1e-6)

def test_gaussian_entropy_columns_are_zero(tmp_path):
    out = tmp_path / 'entropy.csv'
    assert cli.run(['entropy-sweep', '--m', '0', '--steps', '4', '--out', str(out)]) == cli.EXIT_OK
    _, rows = _read_csv(out)
    assert len(rows) == 4
    for row in rows:
        assert [float(row[key]) for key in ('s_a', 's_b', 's_ab', 'i_c')] == [0.0] * 4

def test_cells():
    assert cli._cell(True) == 'true'
    assert cli._cell(0.1) == '0.10000000000000001'
    assert cli._cell(float('nan')) == 'nan'
    assert cli._plain({'a': float('nan'), 'b': (1, 2.5)}) == {'a': None, 'b': [1, 2.5]}
