"""
qev/qev/cli.py

Command line front end: parse flags, merge them over a recipe file and the
preset defaults, run one subcommand and write one CSV or JSON file
"""

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple
)

import numpy as np

from . import __version__
from .analysis import (
    Finding,
    Preset,
    SweepSpec,
    SweepTable,
    araki_lieb_region,
    convergence_failed,
    inequality_table,
    optimal_ellipticity,
    sweep_entropy,
    sweep_uncertainty,
    validate
)
from .config import (
    PRESET_NAMES,
    SUBCOMMANDS,
    RunConfig,
    load_config
)
from .errors import (
    ConfigError,
    ConvergenceError,
    QevError
)
from .protocols import RowLike
from .state import (
    SQRT2,
    Form,
    QevParams,
    zeta_from_sigma
)
from .wigner import (
    GridRequest,
    Method,
    PhaseGrid,
    wigner_grid
)

_log = logging.getLogger(__name__)

Row = Dict[str, Any]

EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_CONVERGENCE: int = 2

class _Parser(argparse.ArgumentParser):
    """argparse reports bad arguments as a ConfigError instead of exiting"""
    def error(self, message: str):
        raise ConfigError(message)

#==========Argument parsing==========

def build_parser() -> argparse.ArgumentParser:
    common: argparse.ArgumentParser = _Parser(add_help=False)
    common.add_argument('--m', dest='m_list', help='comma separated vorticities')
    for name in ('eta-x', 'eta-y', 'zeta-x', 'zeta-y', 'sigma-x', 'sigma-y', 'lo', 'hi'):
        common.add_argument(f'--{name}', type=float)
    common.add_argument('--preset', choices=PRESET_NAMES)
    common.add_argument('--steps', type=int)
    common.add_argument('--target', choices=('s_a', 's_b', 's_ab'))
    common.add_argument('--method', choices=('closed', 'numeric', 'both'))
    common.add_argument('--form', choices=('spatial', 'ladder'))
    common.add_argument('--plane', help='two phase-space axes, e.g. x,px')
    common.add_argument('--fixed', help='the other two axes, e.g. y=0,py=0')
    common.add_argument('--out')
    common.add_argument('--format', dest='fmt', choices=('csv', 'json'))
    common.add_argument('--config', help='key=value or .json recipe')
    common.add_argument('--workers', type=int)
    common.add_argument('--log-level', dest='log_level')

    parser: argparse.ArgumentParser = _Parser(prog='qev',
        description='Quantum elliptical vortex states: moments, Wigner functions, entropies')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='subcommand', required=True)
    for name in SUBCOMMANDS:
        commands.add_parser(name, parents=[common])
    return parser

def resolve(config: RunConfig) -> RunConfig:
    """Fill whatever is still unset from the defaults of the subcommand and preset"""
    sweeps_sigma: bool = config.subcommand == 'uncertainty-sweep'
    sweeps_eta: bool = config.subcommand in ('entropy-sweep', 'inequalities', 'optimize')
    preset: str = config.preset or ('widths' if sweeps_sigma
        else 'ellipticity' if sweeps_eta else 'custom')
    form: str = config.form or ('ladder' if sweeps_sigma else 'spatial')
    if config.subcommand == 'optimize':
        grid: Tuple[float, float, int] = (1e-2, 1e2, 64)
    elif sweeps_sigma:
        grid = (1.0, 10.0, 64)
    elif sweeps_eta:
        grid = (0.05, 20.0, 256)
    else:
        grid = (-3.0, 3.0, 25)
    resolved: RunConfig = replace(config, preset=preset, form=form,
        lo=config.lo if config.lo is not None else grid[0],
        hi=config.hi if config.hi is not None else grid[1],
        steps=config.steps if config.steps is not None else grid[2],
        out=config.out or f'{config.subcommand}.{config.fmt}')
    return resolved

def _width(sigma: Optional[float], zeta: Optional[float], default: float) -> float:
    if sigma is not None:
        return sigma
    if zeta is not None:
        return math.exp(2 * zeta)
    return default

def base_params(config: RunConfig, m: int) -> QevParams:
    """The single state a non-sweeping subcommand works on"""
    if config.preset == 'widths':
        return QevParams.coupled_widths(m, _width(config.sigma_x, config.zeta_x, 1.0))
    if config.preset == 'ellipticity':
        return QevParams.reciprocal_ellipticity(m,
            config.eta_x if config.eta_x is not None else 0.8,
            _width(config.sigma_x, config.zeta_x, 5.0),
            _width(config.sigma_y, config.zeta_y, 3.0))
    sigma_x: float = _width(config.sigma_x, config.zeta_x, 1.0)
    sigma_y: float = _width(config.sigma_y, config.zeta_y, 1.0)
    return QevParams(m,
        config.eta_x if config.eta_x is not None else 1 / (SQRT2 * sigma_x),
        config.eta_y if config.eta_y is not None else 1 / (SQRT2 * sigma_y),
        zeta_from_sigma(sigma_x), zeta_from_sigma(sigma_y))

def sweep_spec(config: RunConfig) -> SweepSpec:
    variable: str = 'sigma_x' if config.subcommand == 'uncertainty-sweep' else 'eta_x'
    preset: Preset = Preset(config.preset)
    return SweepSpec(
        variable=variable,
        lo=config.lo,
        hi=config.hi,
        steps=config.steps,
        m_list=tuple(config.m_list),
        preset=preset,
        base=base_params(config, config.m_list[0]) if preset is Preset.CUSTOM else None,
        sigma_x=_width(config.sigma_x, config.zeta_x, 5.0),
        sigma_y=_width(config.sigma_y, config.zeta_y, 3.0),
        spacing='linear' if variable == 'sigma_x' else 'log',
        form=Form(config.form),
        workers=config.workers)

#==========Subcommands==========

Outcome = Tuple[List[Row], List[Finding], bool, str]

def _table_rows(table: SweepTable) -> List[Row]:
    variable: str = table.spec.variable
    return [{'m': row.m, variable: row.value, **row.fields, 'error': row.error or ''}
        for row in table.rows]

def _table_outcome(table: SweepTable, label: str) -> Outcome:
    failed: bool = convergence_failed([row.error for row in table.rows])
    flagged: int = sum(1 for f in table.findings if f.flagged)
    return (_table_rows(table), table.findings, failed,
        f'{label}: {len(table.rows)} rows, {flagged} flagged findings')

def _uncertainty(config: RunConfig) -> Outcome:
    return _table_outcome(sweep_uncertainty(sweep_spec(config)), 'uncertainty-sweep')

def _entropy(config: RunConfig) -> Outcome:
    return _table_outcome(sweep_entropy(sweep_spec(config)), 'entropy-sweep')

def _inequalities(config: RunConfig) -> Outcome:
    spec: SweepSpec = sweep_spec(config)
    table: SweepTable = inequality_table(spec)
    for interval in araki_lieb_region(spec, table):
        table.findings.append(Finding(f'araki_lieb_interval[m={interval.m}]', interval.hi - interval.lo,
            f'holds for eta_x in [{interval.lo:.17g}, {interval.hi:.17g}]'))
    return _table_outcome(table, 'inequalities')

def _optimize(config: RunConfig) -> Outcome:
    rows: List[Row] = []
    findings: List[Finding] = []
    preset: Preset = Preset(config.preset)
    for m in config.m_list:
        best = optimal_ellipticity(preset, m, config.target, config.lo, config.hi,
            _width(config.sigma_x, config.zeta_x, 5.0),
            _width(config.sigma_y, config.zeta_y, 3.0),
            base_params(config, m) if preset is Preset.CUSTOM else None, config.steps)
        rows.append({'m': m, 'target': config.target, 'eta_x_star': best.eta_x_star,
            's_star': best.s_star, 'unimodal': best.unimodal})
        if best.warning:
            findings.append(Finding(f'multimodal[m={m}]', best.eta_x_star, best.warning, True))
    optima: str = '; '.join(f'm={row["m"]} eta_x_star={row["eta_x_star"]:.6f} '
        f's_star={row["s_star"]:.6f}' for row in rows)
    return rows, findings, False, f'optimize: {optima}'

def _wigner(config: RunConfig) -> Outcome:
    axes = (np.linspace(config.lo, config.hi, config.steps),) * 2
    methods: List[Method] = [Method.CLOSED, Method.NUMERIC] if config.method == 'both'\
        else [Method(config.method)]
    rows: List[Row] = []
    for m in config.m_list:
        params: QevParams = base_params(config, m)
        grids: List[PhaseGrid] = [wigner_grid(params,
            GridRequest(config.plane, axes, config.fixed, method, Form(config.form)),
            config.workers) for method in methods]
        first: PhaseGrid = grids[0]
        for i, v0 in enumerate(first.axes[0]):
            for j, v1 in enumerate(first.axes[1]):
                row: Row = {'m': m, first.plane[0]: float(v0), first.plane[1]: float(v1)}
                for grid in grids:
                    row[f'w_{grid.method.value}'] = float(grid.values[i, j])
                rows.append(row)
    return rows, [], False, f'wigner-grid: {len(rows)} points'

def _validate(config: RunConfig) -> Outcome:
    rows: List[Row] = []
    findings: List[Finding] = []
    errors: List[Optional[str]] = []
    passed: int = 0
    for m in config.m_list:
        report = validate(base_params(config, m))
        for check in report.checks:
            rows.append({'m': m, 'check': check.name, 'deviation': check.deviation,
                'tolerance': check.tolerance, 'passed': check.passed, 'error': check.error or ''})
            errors.append(check.error)
            passed += check.passed
        findings.extend(replace(f, name=f'{f.name}[m={m}]') for f in report.findings)
    return rows, findings, convergence_failed(errors), f'validate: {passed}/{len(rows)} checks passed'

_JOBS: Dict[str, Callable[[RunConfig], Outcome]] = {
    'uncertainty-sweep': _uncertainty,
    'entropy-sweep': _entropy,
    'inequalities': _inequalities,
    'optimize': _optimize,
    'wigner-grid': _wigner,
    'validate': _validate,
}

#==========Output==========

def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (float, np.floating)):
        return format(float(value), '.17g')
    return str(value)

def _plain(value: Any) -> Any:
    """JSON-ready copy: NaN becomes None and numpy scalars become Python numbers"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, RowLike):
        return _plain(value.as_row())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value

def _columns(rows: Sequence[Row]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    return columns

def write_csv(stream, config: RunConfig, rows: Sequence[Row], findings: Sequence[Finding]) -> None:
    stream.write(f'# qev {__version__}\n')
    for key, value in config.as_dict().items():
        stream.write(f'# {key}={json.dumps(value, sort_keys=True)}\n')
    for finding in findings:
        flag: str = ' [flagged]' if finding.flagged else ''
        stream.write(f'# finding {finding.name}={_cell(finding.value)}{flag}: {finding.note}\n')
    columns: List[str] = _columns(rows)
    writer = csv.writer(stream, delimiter=',', lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(column, '')) for column in columns])

def write_json(stream, config: RunConfig, rows: Sequence[Row], findings: Sequence[Finding]) -> None:
    document: Dict[str, Any] = {
        'config': config.as_dict(),
        'rows': list(rows),
        'findings': [{'name': f.name, 'value': f.value, 'note': f.note, 'flagged': f.flagged}
            for f in findings],
        'version': __version__,
    }
    json.dump(_plain(document), stream, sort_keys=True, indent=2, allow_nan=False)
    stream.write('\n')

def write_output(config: RunConfig, rows: Sequence[Row], findings: Sequence[Finding]) -> None:
    writer = write_json if config.fmt == 'json' else write_csv
    with open(config.out, 'w', newline='') as file:
        writer(file, config, rows, findings)

#==========Entry points==========

def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand; returns the process exit code"""
    try:
        args: argparse.Namespace = build_parser().parse_args(argv)
        config: RunConfig = RunConfig()
        if args.config:
            config = config.merged(load_config(args.config))
        config = resolve(config.merged({k: v for k, v in vars(args).items() if k != 'config'}))
        logging.basicConfig(level=config.log_level, stream=sys.stderr,
            format='%(levelname)s %(name)s: %(message)s')
        _log.debug('resolved configuration: %s', config.as_dict())
        rows, findings, failed, summary = _JOBS[config.subcommand](config)
        write_output(config, rows, findings)
    except ConvergenceError as exc:
        print(f'qev: {exc}', file=sys.stderr)
        return EXIT_CONVERGENCE
    except (QevError, ValueError, OSError) as exc:
        print(f'qev: {exc}', file=sys.stderr)
        return EXIT_USAGE
    print(f'{summary} -> {config.out}')
    return EXIT_CONVERGENCE if failed else EXIT_OK

def main() -> None:
    sys.exit(run())
