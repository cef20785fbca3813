"""
qev/qev/config.py

Run configuration for the command line: the RunConfig data class and the
key=value / JSON recipe loader
"""

import json
import logging
from dataclasses import (
    asdict,
    dataclass,
    field,
    fields,
    replace
)
from io import IOBase
from typing import (
    Any,
    Callable,
    Dict,
    List,
    Mapping,
    Optional,
    Tuple,
    Union
)

from .errors import ConfigError

_log = logging.getLogger(__name__)

SUBCOMMANDS: Tuple[str, ...] = ('uncertainty-sweep', 'entropy-sweep', 'inequalities',
    'optimize', 'wigner-grid', 'validate')
PHASE_AXES: Tuple[str, ...] = ('x', 'y', 'px', 'py')
# section2 and section3 name the width and ellipticity presets
PRESET_ALIASES: Dict[str, str] = {'section2': 'widths', 'section3': 'ellipticity'}
PRESET_NAMES: Tuple[str, ...] = ('section2', 'section3', 'widths', 'ellipticity', 'custom')

@dataclass
class RunConfig:
    """Everything one CLI invocation needs; None means "use the preset default"
    subcommand: which of SUBCOMMANDS to run
    m_list: vorticities to evaluate
    eta_x, eta_y: ellipticity weights of the custom base state
    zeta_x, zeta_y: squeezing of the custom base state
    sigma_x, sigma_y: widths; for the custom base they override zeta (zeta = ln(sigma)/2),
        for ellipticity they are the fixed widths
    preset: section2 (alias widths), section3 (alias ellipticity) or custom
    lo, hi, steps: sweep grid or optimizer bracket
    target: entropy maximized by optimize (s_a, s_b or s_ab)
    method: Wigner evaluation, closed, numeric or both
    form: coordinate polynomial, spatial or ladder
    plane: the two phase-space axes of a Wigner grid
    fixed: values of the two phase-space coordinates outside the plane
    out: path of the output file
    fmt: csv or json
    workers: threads used for sweeps and grids
    log_level: logging level name for stderr"""
    subcommand: str = 'validate'
    m_list: List[int] = field(default_factory=lambda: [1])
    eta_x: Optional[float] = None
    eta_y: Optional[float] = None
    zeta_x: Optional[float] = None
    zeta_y: Optional[float] = None
    sigma_x: Optional[float] = None
    sigma_y: Optional[float] = None
    preset: Optional[str] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    steps: Optional[int] = None
    target: str = 's_a'
    method: str = 'numeric'
    form: Optional[str] = None
    plane: Tuple[str, str] = ('x', 'px')
    fixed: Dict[str, float] = field(default_factory=dict)
    out: Optional[str] = None
    fmt: str = 'csv'
    workers: int = 1
    log_level: str = 'WARNING'

    def merged(self, overrides: Mapping[str, Any]) -> 'RunConfig':
        """A copy with every non-None override applied after type checking"""
        checked: Dict[str, Any] = {}
        for key, value in overrides.items():
            name: str = canonical_key(key)
            if value is not None:
                checked[name] = coerce(name, value)
        return replace(self, **checked)

    def as_dict(self) -> Dict[str, Any]:
        values: Dict[str, Any] = asdict(self)
        values['plane'] = list(self.plane)
        return dict(sorted(values.items()))

#==========Value coercion==========

_ALIASES: Dict[str, str] = {
    'm': 'm_list',
    'format': 'fmt',
}

def canonical_key(key: str) -> str:
    name: str = key.strip().replace('-', '_')
    name = _ALIASES.get(name, name)
    if name not in _FIELD_NAMES:
        raise ConfigError(f'unknown configuration key {key!r}')
    return name

def _as_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ConfigError(f'expected an integer, got {value!r}')
    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigError(f'expected an integer, got {value!r}')
        return int(value)
    try:
        return int(str(value).strip())
    except ValueError as exc:
        raise ConfigError(f'expected an integer, got {value!r}') from exc

def _as_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ConfigError(f'expected a number, got {value!r}')
    try:
        return float(str(value).strip()) if isinstance(value, str) else float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f'expected a number, got {value!r}') from exc

def _split(value: Any) -> List[Any]:
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]

def _as_int_list(value: Any) -> List[int]:
    items: List[int] = [_as_int(item) for item in _split(value)]
    if not items:
        raise ConfigError('expected at least one integer')
    if min(items) < 0:
        raise ConfigError(f'vorticities must be non-negative, got {items}')
    return items

def _as_plane(value: Any) -> Tuple[str, str]:
    axes: List[str] = [str(item).lower() for item in _split(value)]
    if len(axes) != 2 or axes[0] == axes[1] or any(a not in PHASE_AXES for a in axes):
        raise ConfigError(f'plane must name two distinct axes from {PHASE_AXES}, got {value!r}')
    return axes[0], axes[1]

def _as_fixed(value: Any) -> Dict[str, float]:
    if isinstance(value, Mapping):
        pairs = list(value.items())
    else:
        pairs = []
        for item in _split(value):
            name, sep, number = str(item).partition('=')
            if not sep:
                raise ConfigError(f'fixed coordinates are name=value pairs, got {item!r}')
            pairs.append((name, number))
    fixed: Dict[str, float] = {}
    for name, number in pairs:
        axis: str = str(name).strip().lower()
        if axis not in PHASE_AXES:
            raise ConfigError(f'unknown phase-space axis {name!r}')
        fixed[axis] = _as_float(number)
    return fixed

def _choice(*allowed: str) -> Callable[[Any], str]:
    def check(value: Any) -> str:
        text: str = str(value).strip()
        if text not in allowed:
            raise ConfigError(f'expected one of {allowed}, got {value!r}')
        return text
    return check

def _as_preset(value: Any) -> str:
    name: str = _choice(*PRESET_NAMES)(value)
    return PRESET_ALIASES.get(name, name)

def _positive_int(value: Any) -> int:
    number: int = _as_int(value)
    if number < 1:
        raise ConfigError(f'expected a positive integer, got {value!r}')
    return number

_COERCERS: Dict[str, Callable[[Any], Any]] = {
    'subcommand': _choice(*SUBCOMMANDS),
    'm_list': _as_int_list,
    'eta_x': _as_float,
    'eta_y': _as_float,
    'zeta_x': _as_float,
    'zeta_y': _as_float,
    'sigma_x': _as_float,
    'sigma_y': _as_float,
    'preset': _as_preset,
    'lo': _as_float,
    'hi': _as_float,
    'steps': _as_int,
    'target': _choice('s_a', 's_b', 's_ab'),
    'method': _choice('closed', 'numeric', 'both'),
    'form': _choice('spatial', 'ladder'),
    'plane': _as_plane,
    'fixed': _as_fixed,
    'out': str,
    'fmt': _choice('csv', 'json'),
    'workers': _positive_int,
    'log_level': lambda v: _choice('DEBUG', 'INFO', 'WARNING', 'ERROR')(str(v).upper()),
}

_FIELD_NAMES: Tuple[str, ...] = tuple(f.name for f in fields(RunConfig))

def coerce(name: str, value: Any) -> Any:
    return _COERCERS[name](value)

#==========Loading recipes==========

def parse_config_string(source: str, as_json: bool = False) -> Dict[str, Any]:
    """Parse recipe text into type-checked overrides"""
    raw: Dict[str, Any] = {}
    if as_json:
        try:
            loaded: Any = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError(f'invalid JSON configuration: {exc}') from exc
        if not isinstance(loaded, dict):
            raise ConfigError('a JSON configuration must be a flat object')
        raw = loaded
    else:
        for number, line in enumerate(source.splitlines(), 1):
            text: str = line.split('#', 1)[0].strip()
            if not text:
                continue
            key, sep, value = text.partition('=')
            if not sep:
                raise ConfigError(f'line {number}: expected key=value, got {line.strip()!r}')
            raw[key.strip()] = value.strip()
    overrides: Dict[str, Any] = {}
    for key, value in raw.items():
        name: str = canonical_key(key)
        overrides[name] = coerce(name, value)
    return overrides

def load_config(source: Union[IOBase, str]) -> Dict[str, Any]:
    """Read a recipe from an open stream or a path; *.json paths are read as JSON"""
    if isinstance(source, IOBase):
        text: str = source.read()
        as_json: bool = text.lstrip().startswith('{')
    else:
        try:
            with open(source) as file:
                text = file.read()
        except OSError as exc:
            raise ConfigError(f'cannot read configuration {source}: {exc}') from exc
        as_json = source.lower().endswith('.json')
    overrides: Dict[str, Any] = parse_config_string(text, as_json)
    _log.debug('configuration overrides: %s', overrides)
    return overrides
