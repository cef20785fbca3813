"""
qev/qev/moments.py

Quadrature moments, uncertainty products and their sum, computed from the
coordinate wavefunction by Gauss-Hermite quadrature and, as an oracle, from the
Fock vector with sparse ladder matrices.
"""

import logging
import math
from dataclasses import (
    asdict,
    dataclass
)
from typing import (
    Dict,
    NamedTuple,
    Tuple
)

import numpy as np
from scipy import sparse

from .errors import (
    ConvergenceError,
    TruncationError
)
from .state import (
    TAIL_THRESHOLD,
    Form,
    QevParams,
    TwoModeFockVector,
    Wavefunction,
    build_wavefunction
)

_log = logging.getLogger(__name__)

QUADRATURE_ORDER: int = 128
QUADRATURE_TOLERANCE: float = 1e-8

class QuadratureMoments(NamedTuple):
    mean_x: float
    mean_y: float
    mean_sq_x: float
    mean_sq_y: float

@dataclass(frozen=True)
class UncertaintyReport:
    """Standard deviations of the four quadratures, the two uncertainty
    products and their sum"""
    dx: float
    dy: float
    dpx: float
    dpy: float
    prod_x: float
    prod_y: float
    sum: float

    @classmethod
    def from_moments(cls, position: QuadratureMoments,
            momentum: QuadratureMoments) -> 'UncertaintyReport':
        dx: float = _spread(position.mean_x, position.mean_sq_x)
        dy: float = _spread(position.mean_y, position.mean_sq_y)
        dpx: float = _spread(momentum.mean_x, momentum.mean_sq_x)
        dpy: float = _spread(momentum.mean_y, momentum.mean_sq_y)
        return cls(dx, dy, dpx, dpy, dx * dpx, dy * dpy, dx * dpx + dy * dpy)

    def as_row(self) -> Dict[str, float]:
        return asdict(self)

def _spread(mean: float, mean_sq: float) -> float:
    return math.sqrt(max(0.0, mean_sq - mean * mean))

#==========Coordinate quadrature==========

def _certified(compute, order: int, what: str) -> QuadratureMoments:
    """Evaluate at order and 2*order; the two must agree to QUADRATURE_TOLERANCE"""
    coarse: np.ndarray = np.array(compute(order))
    fine: np.ndarray = np.array(compute(2 * order))
    scale: float = max(float(np.max(np.abs(fine))), 1e-300)
    gap: float = float(np.max(np.abs(fine - coarse))) / scale
    if gap > QUADRATURE_TOLERANCE:
        raise ConvergenceError(f'{what} moments unresolved at order {order}: relative change {gap:.3g}')
    return QuadratureMoments(*map(float, fine))

def position_moments(params: QevParams, form: Form = Form.SPATIAL, coupled: bool = False,
        order: int = QUADRATURE_ORDER) -> QuadratureMoments:
    wave: Wavefunction = build_wavefunction(params, form, coupled)

    def compute(n: int) -> Tuple[float, float, float, float]:
        x, y, w = wave.quadrature_grid(n)
        weight: np.ndarray = w * np.abs(wave.norm * wave.polynomial(x, y)) ** 2
        return (np.sum(weight * x), np.sum(weight * y),
            np.sum(weight * x * x), np.sum(weight * y * y))

    return _certified(compute, order, 'position')

def momentum_moments(params: QevParams, form: Form = Form.SPATIAL, coupled: bool = False,
        order: int = QUADRATURE_ORDER) -> QuadratureMoments:
    """<p_i> = Im int Psi* dPsi/dx_i and <p_i^2> = int |dPsi/dx_i|^2"""
    wave: Wavefunction = build_wavefunction(params, form, coupled)

    def compute(n: int) -> Tuple[float, float, float, float]:
        x, y, w = wave.quadrature_grid(n)
        weight: np.ndarray = w * wave.norm ** 2
        p: np.ndarray = wave.polynomial(x, y)
        q_x, q_y = wave.slopes(x, y)
        return (np.sum(weight * np.conj(p) * q_x).imag, np.sum(weight * np.conj(p) * q_y).imag,
            np.sum(weight * np.abs(q_x) ** 2), np.sum(weight * np.abs(q_y) ** 2))

    return _certified(compute, order, 'momentum')

def uncertainty_report(params: QevParams, form: Form = Form.SPATIAL,
        coupled: bool = False) -> UncertaintyReport:
    report: UncertaintyReport = UncertaintyReport.from_moments(
        position_moments(params, form, coupled), momentum_moments(params, form, coupled))
    _log.debug('uncertainty for %s (%s): %s', params, form.value, report)
    return report

#==========Fock oracle==========

def _quadrature_operators(cutoff: int) -> Tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Truncated x = (a + a^+)/sqrt(2) and p = (a - a^+)/(i sqrt(2))"""
    lowering = sparse.diags(np.sqrt(np.arange(1, cutoff)), offsets=1, format='csr')
    raising = lowering.T.tocsr()
    position = ((lowering + raising) / math.sqrt(2)).astype(complex)
    momentum = ((lowering - raising) / (1j * math.sqrt(2))).tocsr()
    return position, momentum

def _mode_moments(psi: np.ndarray, op: sparse.csr_matrix) -> Tuple[float, float, float, float]:
    """<op_a>, <op_b>, <op_a^2>, <op_b^2>; mode a acts on rows, mode b on columns"""
    on_a: np.ndarray = op @ psi
    on_b: np.ndarray = (op @ psi.T).T
    return (float(np.vdot(psi, on_a).real), float(np.vdot(psi, on_b).real),
        float(np.vdot(on_a, on_a).real), float(np.vdot(on_b, on_b).real))

def fock_moments_oracle(vec: TwoModeFockVector) -> Tuple[QuadratureMoments, QuadratureMoments]:
    """(position, momentum) moments from the Fock table"""
    if vec.tail_mass > TAIL_THRESHOLD:
        raise TruncationError(f'Fock table loses {vec.tail_mass:.3g} beyond cutoff {vec.cutoff}')
    position, momentum = _quadrature_operators(vec.cutoff)
    psi: np.ndarray = np.asarray(vec.amplitudes)
    return (QuadratureMoments(*_mode_moments(psi, position)),
        QuadratureMoments(*_mode_moments(psi, momentum)))
