"""
qev/qev/wigner.py

Wigner functions of QEV states: the closed Gaussian x Laguerre expression and
an independent numeric transform of the wavefunction, plus phase-space grids.
"""

import functools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import (
    dataclass,
    field
)
from enum import Enum
from typing import (
    Dict,
    List,
    Mapping,
    Sequence,
    Tuple,
    Union
)

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError
)
from .specfun import (
    hermite_rule,
    laguerre_assoc
)
from .state import (
    SQRT2,
    DerivedParams,
    Form,
    QevParams,
    Wavefunction,
    build_wavefunction
)

_log = logging.getLogger(__name__)

Real = Union[float, np.ndarray]

AXES: Tuple[str, ...] = ('x', 'y', 'px', 'py')
NUMERIC_NODES: int = 96
NUMERIC_TOLERANCE: float = 1e-6

class Method(Enum):
    CLOSED = 'closed'
    NUMERIC = 'numeric'

@dataclass(frozen=True)
class PhasePoint:
    x: float = 0.0
    y: float = 0.0
    px: float = 0.0
    py: float = 0.0

    def __post_init__(self) -> None:
        for name in AXES:
            value: float = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f'phase point coordinate {name} must be finite, got {value}')
            object.__setattr__(self, name, value)

    def __neg__(self) -> 'PhasePoint':
        return PhasePoint(-self.x, -self.y, -self.px, -self.py)

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in AXES}

#==========Numeric transform==========

def wigner_slab(params: QevParams, x: float, y: float, px: Real, py: Real,
        form: Form = Form.SPATIAL, coupled: bool = False, nodes: int = NUMERIC_NODES) -> np.ndarray:
    """W(x, y, px[a], py[b]) for every pair, as an array of shape (len(px), len(py))

    With u = sigma_x t and v = sigma_y s the transform becomes a Gauss-Hermite sum
    W = sigma_x sigma_y / pi^2 * exp(-x^2/sigma_x^2 - y^2/sigma_y^2)
        * E_x F E_y^T
    where F[i, j] = w_i w_j conj(Psi~(x+u_i, y+v_j)) Psi~(x-u_i, y-v_j) holds the
    polynomial parts and E_x[a, i] = exp(2i px[a] u_i)"""
    wave: Wavefunction = build_wavefunction(params, form, coupled)
    px_arr: np.ndarray = np.atleast_1d(np.asarray(px, dtype=float))
    py_arr: np.ndarray = np.atleast_1d(np.asarray(py, dtype=float))

    def transform(order: int) -> np.ndarray:
        t, w = hermite_rule(order)
        u: np.ndarray = wave.sigma_x * t
        v: np.ndarray = wave.sigma_y * t
        uu, vv = np.meshgrid(u, v, indexing='ij')
        kernel: np.ndarray = np.conj(wave.polynomial(x + uu, y + vv))\
            * wave.polynomial(x - uu, y - vv) * np.outer(w, w)
        phase_x: np.ndarray = np.exp(2j * np.outer(px_arr, u))
        phase_y: np.ndarray = np.exp(2j * np.outer(py_arr, v))
        return (phase_x @ kernel @ phase_y.T).real

    scale: float = wave.norm ** 2 * wave.sigma_x * wave.sigma_y / math.pi ** 2\
        * math.exp(-(x / wave.sigma_x) ** 2 - (y / wave.sigma_y) ** 2)
    coarse: np.ndarray = scale * transform(nodes)
    fine: np.ndarray = scale * transform(2 * nodes)
    gap: float = float(np.max(np.abs(fine - coarse)))
    if gap > NUMERIC_TOLERANCE:
        _log.warning('Wigner transform at x=%g, y=%g moved by %.3g on refinement', x, y, gap)
        raise ConvergenceError(f'numeric Wigner transform at ({x}, {y}) unresolved: '
            f'{nodes} and {2 * nodes} nodes differ by {gap:.3g}')
    return fine

def wigner_numeric(params: QevParams, pt: PhasePoint, form: Form = Form.SPATIAL,
        coupled: bool = False, nodes: int = NUMERIC_NODES) -> float:
    """W(pt) = (1/pi^2) int int Psi*(x+u, y+v) Psi(x-u, y-v) exp(2i(px u + py v)) du dv"""
    return float(wigner_slab(params, pt.x, pt.y, pt.px, pt.py, form, coupled, nodes)[0, 0])

def wigner_marginal(params: QevParams, x: float, y: float, form: Form = Form.SPATIAL,
        coupled: bool = False, nodes: int = NUMERIC_NODES) -> float:
    """int int W(x, y, px, py) dpx dpy, which must reproduce |Psi(x, y)|^2

    At fixed position W is exp(-sigma^2 p^2) times a polynomial in each momentum,
    so Gauss-Hermite in t = sigma p with the weight divided out is exact"""
    wave: Wavefunction = build_wavefunction(params, form, coupled)
    t, w = hermite_rule(2 * params.m + 8)
    scaled: np.ndarray = w * np.exp(t ** 2)
    slab: np.ndarray = wigner_slab(params, x, y, t / wave.sigma_x, t / wave.sigma_y,
        form, coupled, nodes)
    return float(scaled @ slab @ scaled) / (wave.sigma_x * wave.sigma_y)

#==========Closed form==========

def _closed_variables(derived: DerivedParams, x: Real, y: Real, px: Real, py: Real) -> Tuple[Real, Real]:
    """Gaussian exponent and Laguerre argument of the closed form in its scaled variables"""
    sx: float = derived.sigma_x
    sy: float = derived.sigma_y
    x1, y1 = x / sx, y / sy
    x2, y2 = sy * x / (2 * sx), sx * y / (2 * sy)
    px1, py1 = sx * px / SQRT2, sy * py / SQRT2
    px2, py2 = sy ** 3 * px / SQRT2, sx ** 3 * py / SQRT2
    exponent: Real = x1 ** 2 + y1 ** 2 + px1 ** 2 + py1 ** 2
    argument: Real = (px2 + py2 - x2 - y2) ** 2 / (sx ** 2 + sy ** 2)
    return exponent, argument

def _closed_integral(params: QevParams) -> float:
    """Integral of the unnormalized closed form over phase space

    The Laguerre argument depends on a single linear combination c of the
    variables; under the Gaussian it is normal with 2 Var(c) = |c|^2 below, so the
    4-D integral reduces to one Gauss-Hermite sum"""
    derived: DerivedParams = params.derive()
    sx: float = derived.sigma_x
    sy: float = derived.sigma_y
    spread: float = sy ** 6 / sx ** 2 + sx ** 6 / sy ** 2 + sy ** 2 / 4 + sx ** 2 / 4
    t, w = hermite_rule(params.m + 8)
    laguerre: np.ndarray = laguerre_assoc(params.m, -0.5, spread * t ** 2 / (sx ** 2 + sy ** 2))
    return 2 * math.pi ** 1.5 * float(np.dot(w, laguerre))

@functools.lru_cache(maxsize=256)
def closed_form_constant(params: QevParams) -> float:
    """Signed prefactor of the closed form: 1/|Z| with the sign of the numeric
    transform at the origin"""
    integral: float = _closed_integral(params)
    origin: float = wigner_numeric(params, PhasePoint(), coupled=True)
    sign: float = 1.0 if origin >= 0 else -1.0
    if sign * integral < 0:
        _log.warning('closed-form Wigner function for %s: matching the sign at the origin '
            'makes it integrate to -1', params)
    return sign / abs(integral)

def wigner_closed_form(params: QevParams, pt: PhasePoint) -> float:
    """The Gaussian x L_m^(-1/2) expression, describing the coupled state"""
    return float(_closed_values(params, pt.x, pt.y, pt.px, pt.py))

def _closed_values(params: QevParams, x: Real, y: Real, px: Real, py: Real) -> Real:
    exponent, argument = _closed_variables(params.derive(), x, y, px, py)
    return closed_form_constant(params) * np.exp(-exponent)\
        * laguerre_assoc(params.m, -0.5, argument)

def closed_form_discrepancy(params: QevParams) -> float:
    """Largest |closed - numeric| over a 5^4 lattice spanning one width in
    position and one inverse width in momentum"""
    derived: DerivedParams = params.derive()
    unit: np.ndarray = np.linspace(-1.0, 1.0, 5)
    px: np.ndarray = unit / derived.sigma_x
    py: np.ndarray = unit / derived.sigma_y
    worst: float = 0.0
    for x in unit * derived.sigma_x:
        for y in unit * derived.sigma_y:
            numeric: np.ndarray = wigner_slab(params, x, y, px, py, coupled=True)
            closed: np.ndarray = _closed_values(params, x, y, px[:, None], py[None, :])
            worst = max(worst, float(np.max(np.abs(closed - numeric))))
    return worst

#==========Grids==========

def _uniform_axis(values: Sequence[float], name: str) -> np.ndarray:
    axis: np.ndarray = np.asarray(values, dtype=float)
    if axis.ndim != 1 or axis.size < 2:
        raise DomainError(f'grid axis {name} needs at least two values')
    if not np.all(np.isfinite(axis)):
        raise DomainError(f'grid axis {name} has non-finite values')
    steps: np.ndarray = np.diff(axis)
    if steps[0] == 0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12 * np.abs(axis).max()):
        raise DomainError(f'grid axis {name} is not uniform')
    return axis

@dataclass(frozen=True, eq=False)
class GridRequest:
    """A 2-D cut through phase space
    plane: the two varying coordinates, e.g. ('x', 'px')
    fixed: values of the other two coordinates
    axes: uniform value vectors for the two plane coordinates
    method: closed form or numeric transform"""
    plane: Tuple[str, str]
    axes: Tuple[np.ndarray, np.ndarray]
    fixed: Mapping[str, float] = field(default_factory=dict)
    method: Method = Method.NUMERIC
    form: Form = Form.SPATIAL
    coupled: bool = False

    def __post_init__(self) -> None:
        plane: Tuple[str, str] = tuple(self.plane)
        if len(plane) != 2 or plane[0] == plane[1] or any(a not in AXES for a in plane):
            raise DomainError(f'plane must be two distinct names from {AXES}, got {self.plane}')
        others: List[str] = [a for a in AXES if a not in plane]
        fixed: Dict[str, float] = {a: float(self.fixed.get(a, 0.0)) for a in others}
        extra: List[str] = [a for a in self.fixed if a not in others]
        if extra:
            raise DomainError(f'fixed coordinates {extra} lie in the plane {plane}')
        axes = tuple(_uniform_axis(a, n) for a, n in zip(self.axes, plane))
        if len(axes) != 2:
            raise DomainError('a grid needs exactly two axes')
        object.__setattr__(self, 'plane', plane)
        object.__setattr__(self, 'fixed', fixed)
        object.__setattr__(self, 'axes', axes)

@dataclass(frozen=True, eq=False)
class PhaseGrid:
    plane: Tuple[str, str]
    fixed: Dict[str, float]
    axes: Tuple[np.ndarray, np.ndarray]
    values: np.ndarray
    method: Method

    def points(self):
        """Yield (value0, value1, W) in row-major order"""
        for i, v0 in enumerate(self.axes[0]):
            for j, v1 in enumerate(self.axes[1]):
                yield float(v0), float(v1), float(self.values[i, j])

def _grid_row(params: QevParams, request: GridRequest, v0: float) -> np.ndarray:
    coords: Dict[str, Real] = dict(request.fixed)
    coords[request.plane[0]] = v0
    name1: str = request.plane[1]
    axis1: np.ndarray = request.axes[1]
    if request.method is Method.CLOSED:
        coords[name1] = axis1
        values: Real = _closed_values(params, coords['x'], coords['y'], coords['px'], coords['py'])
        return np.broadcast_to(values, axis1.shape).astype(float)
    if name1 in ('px', 'py'):
        coords[name1] = axis1
        slab: np.ndarray = wigner_slab(params, coords['x'], coords['y'], coords['px'], coords['py'],
            request.form, request.coupled)
        return slab.ravel()
    row: np.ndarray = np.empty(axis1.size)
    for j, v1 in enumerate(axis1):
        coords[name1] = v1
        row[j] = wigner_numeric(params, PhasePoint(**coords), request.form, request.coupled)
    return row

def wigner_grid(params: QevParams, request: GridRequest, workers: int = 1) -> PhaseGrid:
    """Fill the requested plane row by row; rows come back in order for any worker count"""
    if workers < 1:
        raise DomainError(f'workers must be at least 1, got {workers}')
    task = functools.partial(_grid_row, params, request)
    if workers == 1:
        rows: List[np.ndarray] = [task(v0) for v0 in request.axes[0]]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(task, request.axes[0]))
    values: np.ndarray = np.vstack(rows)
    _log.debug('filled %s Wigner grid over %s', request.method.value, request.plane)
    return PhaseGrid(request.plane, dict(request.fixed), request.axes, values, request.method)
