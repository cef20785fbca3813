"""
qev/qev/state.py

The QEV parameter record and the two representations of the state built from
it: the coordinate-space wavefunction and the truncated two-mode Fock vector.

Conventions: hbar = 1, x = (a + a^+)/sqrt(2), p = (a - a^+)/(i sqrt(2)).
Squeezing zeta gives the Gaussian width sigma = exp(2 zeta) and the expansion
parameter xi = tanh(2 zeta).
"""

import functools
import logging
import math
from dataclasses import (
    asdict,
    dataclass,
    field,
    replace
)
from enum import Enum
from typing import (
    Callable,
    Dict,
    Optional,
    Tuple,
    Union
)

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import special

from .errors import (
    ConvergenceError,
    DomainError,
    TruncationError
)
from .specfun import (
    binomial,
    hermite_rule
)

_log = logging.getLogger(__name__)

Real = Union[float, np.ndarray]

SQRT2: float = math.sqrt(2.0)
TAIL_THRESHOLD: float = 1e-10
MAX_CUTOFF: int = 4096
_CUTOFF_MARGIN: int = 16

def zeta_from_sigma(sigma: float) -> float:
    """Squeezing parameter that produces the Gaussian width sigma"""
    if not sigma > 0:
        raise DomainError(f'width sigma must be positive, got {sigma}')
    return 0.5 * math.log(sigma)

class Form(Enum):
    """Which coordinate polynomial multiplies the Gaussian
    SPATIAL: (eta_x x - i eta_y y)^m, the homogeneous vortex profile
    LADDER: the exact coordinate image of (eta_x a^+ - i eta_y b^+)^m acting on
    the squeezed vacuum; equal to SPATIAL in the circular case"""
    SPATIAL = 'spatial'
    LADDER = 'ladder'

#==========Parameter records==========

@dataclass(frozen=True)
class DerivedParams:
    """Widths sigma_i = exp(2 zeta_i) and expansion parameters xi_i = tanh(2 zeta_i)"""
    sigma_x: float
    sigma_y: float
    xi_x: float
    xi_y: float

@dataclass(frozen=True)
class QevParams:
    """The full parameter set of a quantum elliptical vortex
    m: vorticity
    eta_x, eta_y: ellipticity weights of the two modes
    zeta_x, zeta_y: squeezing parameters of the two modes"""
    m: int
    eta_x: float = 1.0
    eta_y: float = 1.0
    zeta_x: float = 0.0
    zeta_y: float = 0.0

    def __post_init__(self) -> None:
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise DomainError(f'vorticity m must be an integer, got {self.m!r}')
        if self.m < 0:
            raise DomainError(f'vorticity m must be non-negative, got {self.m}')
        object.__setattr__(self, 'm', int(self.m))
        for name in ('eta_x', 'eta_y', 'zeta_x', 'zeta_y'):
            value: float = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f'{name} must be finite, got {value}')
            object.__setattr__(self, name, value)
        if self.eta_x <= 0 or self.eta_y <= 0:
            raise DomainError(f'ellipticity weights must be positive, got '
                f'eta_x={self.eta_x}, eta_y={self.eta_y}')

    #==========Named regimes==========

    @classmethod
    def from_widths(cls, m: int, eta_x: float, eta_y: float,
            sigma_x: float, sigma_y: float) -> 'QevParams':
        return cls(m, eta_x, eta_y, zeta_from_sigma(sigma_x), zeta_from_sigma(sigma_y))

    @classmethod
    def coupled_widths(cls, m: int, sigma_x: float) -> 'QevParams':
        """Width-sweep regime: zeta_y = zeta_x + ln(5)/4, so sigma_y = sqrt(5) sigma_x,
        with eta_i = 1/(sqrt(2) sigma_i)"""
        zeta_x: float = zeta_from_sigma(sigma_x)
        zeta_y: float = zeta_x + math.log(5.0) / 4
        sigma_y: float = math.exp(2 * zeta_y)
        return cls(m, 1 / (SQRT2 * sigma_x), 1 / (SQRT2 * sigma_y), zeta_x, zeta_y)

    @classmethod
    def reciprocal_ellipticity(cls, m: int, eta_x: float,
            sigma_x: float = 5.0, sigma_y: float = 3.0) -> 'QevParams':
        """Ellipticity-sweep regime: fixed widths and eta_y = 1/(sqrt(2) eta_x)"""
        if not eta_x > 0:
            raise DomainError(f'eta_x must be positive, got {eta_x}')
        return cls.from_widths(m, eta_x, 1 / (SQRT2 * eta_x), sigma_x, sigma_y)

    @classmethod
    def circular(cls, m: int, sigma: float = 1.0) -> 'QevParams':
        eta: float = 1 / (SQRT2 * sigma)
        return cls.from_widths(m, eta, eta, sigma, sigma)

    #==========Derived views==========

    def derive(self) -> DerivedParams:
        return DerivedParams(
            sigma_x=math.exp(2 * self.zeta_x),
            sigma_y=math.exp(2 * self.zeta_y),
            xi_x=math.tanh(2 * self.zeta_x),
            xi_y=math.tanh(2 * self.zeta_y))

    def coupled(self) -> 'QevParams':
        """The same widths with the coordinate-consistent weights eta_i = 1/(sqrt(2) sigma_i)"""
        derived: DerivedParams = self.derive()
        return replace(self, eta_x=1 / (SQRT2 * derived.sigma_x),
            eta_y=1 / (SQRT2 * derived.sigma_y))

    def swapped(self) -> 'QevParams':
        """Exchange the roles of the two modes"""
        return replace(self, eta_x=self.eta_y, eta_y=self.eta_x,
            zeta_x=self.zeta_y, zeta_y=self.zeta_x)

    def as_dict(self) -> Dict[str, float]:
        return asdict(self)

def derive(params: QevParams) -> DerivedParams:
    return params.derive()

#==========Coordinate representation==========

def _spatial_coefficients(m: int, eta_x: float, eta_y: float) -> np.ndarray:
    """Coefficient table c[i, j] of x^i y^j in (eta_x x - i eta_y y)^m"""
    coeffs: np.ndarray = np.zeros((m + 1, m + 1), dtype=complex)
    for k in range(m + 1):
        coeffs[m - k, k] = binomial(m, k) * eta_x ** (m - k) * (-1j * eta_y) ** k
    return coeffs

def _ladder_coefficients(params: QevParams) -> np.ndarray:
    """Apply (eta_x D_x - i eta_y D_y) m times to 1, where D_i (P g) = (c_i x_i P - dP/dx_i) g
    is a^+ acting on polynomial times squeezed Gaussian and c_i = 1 + 1/sigma_i^2.
    Overall constants are dropped; the table is rescaled every step"""
    derived: DerivedParams = params.derive()
    c_x: float = 1 + 1 / derived.sigma_x ** 2
    c_y: float = 1 + 1 / derived.sigma_y ** 2
    m: int = params.m
    coeffs: np.ndarray = np.zeros((m + 1, m + 1), dtype=complex)
    coeffs[0, 0] = 1
    for _ in range(m):
        nxt: np.ndarray = np.zeros_like(coeffs)
        nxt[1:, :] += params.eta_x * c_x * coeffs[:-1, :]
        nxt[:, 1:] += -1j * params.eta_y * c_y * coeffs[:, :-1]
        nxt[:-1, :] -= params.eta_x * npoly.polyder(coeffs, axis=0)
        nxt[:, :-1] += 1j * params.eta_y * npoly.polyder(coeffs, axis=1)
        coeffs = nxt / np.abs(nxt).max()
    return coeffs

def vortex_polynomial(params: QevParams, form: Form = Form.SPATIAL) -> np.ndarray:
    """Coefficient table of the polynomial factor, up to an overall constant"""
    if form is Form.LADDER:
        return _ladder_coefficients(params)
    coeffs: np.ndarray = _spatial_coefficients(params.m, params.eta_x, params.eta_y)
    return coeffs / np.abs(coeffs).max()

def _norm_order(m: int) -> int:
    return max(128, 2 * m + 8)

@dataclass(frozen=True, eq=False)
class Wavefunction:
    """Psi(x, y) = norm * P(x, y) * exp(-(x/sigma_x)^2/2 - (y/sigma_y)^2/2)
    params holds the weights actually used (coupled ones if requested)"""
    params: QevParams
    form: Form
    coeffs: np.ndarray
    sigma_x: float
    sigma_y: float
    norm: float = field(init=False)
    dcoeffs_x: np.ndarray = field(init=False, repr=False)
    dcoeffs_y: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, 'dcoeffs_x', npoly.polyder(self.coeffs, axis=0))
        object.__setattr__(self, 'dcoeffs_y', npoly.polyder(self.coeffs, axis=1))
        object.__setattr__(self, 'norm', 1.0)
        x, y, w = self.quadrature_grid(_norm_order(self.params.m))
        mass: float = float(np.sum(w * np.abs(self.polynomial(x, y)) ** 2))
        object.__setattr__(self, 'norm', 1 / math.sqrt(mass))

    def quadrature_grid(self, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Tensor Gauss-Hermite nodes (x, y) and weights for the measure
        exp(-(x/sigma_x)^2 - (y/sigma_y)^2) dx dy, which is |Gaussian factor|^2"""
        nodes, weights = hermite_rule(order)
        x, y = np.meshgrid(self.sigma_x * nodes, self.sigma_y * nodes, indexing='ij')
        w: np.ndarray = self.sigma_x * self.sigma_y * np.outer(weights, weights)
        return x, y, w

    def gaussian(self, x: Real, y: Real) -> Real:
        return np.exp(-0.5 * ((x / self.sigma_x) ** 2 + (y / self.sigma_y) ** 2))

    def polynomial(self, x: Real, y: Real) -> Real:
        return npoly.polyval2d(x, y, self.coeffs)

    def slopes(self, x: Real, y: Real) -> Tuple[Real, Real]:
        """Polynomial parts of the gradient: dPsi/dx_i = norm * Q_i * Gaussian with
        Q_i = dP/dx_i - x_i P / sigma_i^2"""
        p: Real = self.polynomial(x, y)
        q_x: Real = npoly.polyval2d(x, y, self.dcoeffs_x) - x * p / self.sigma_x ** 2
        q_y: Real = npoly.polyval2d(x, y, self.dcoeffs_y) - y * p / self.sigma_y ** 2
        return q_x, q_y

    def __call__(self, x: Real, y: Real) -> Real:
        return self.norm * self.polynomial(x, y) * self.gaussian(x, y)

    def density(self, x: Real, y: Real) -> Real:
        return np.abs(self(x, y)) ** 2

    def expect(self, observable: Callable[[np.ndarray, np.ndarray], np.ndarray],
            order: int = 128) -> float:
        """Integral of observable(x, y) |Psi(x, y)|^2 by Gauss-Hermite"""
        x, y, w = self.quadrature_grid(order)
        weight: np.ndarray = w * np.abs(self.norm * self.polynomial(x, y)) ** 2
        return float(np.sum(weight * observable(x, y)))

@functools.lru_cache(maxsize=256)
def build_wavefunction(params: QevParams, form: Form = Form.SPATIAL,
        coupled: bool = False) -> Wavefunction:
    """Normalized wavefunction; coupled=True applies eta_i = 1/(sqrt(2) sigma_i)"""
    effective: QevParams = params.coupled() if coupled else params
    derived: DerivedParams = effective.derive()
    return Wavefunction(effective, form, vortex_polynomial(effective, form),
        derived.sigma_x, derived.sigma_y)

def wavefunction(params: QevParams, x: Real, y: Real,
        form: Form = Form.SPATIAL, coupled: bool = False) -> Real:
    return build_wavefunction(params, form, coupled)(x, y)

def printed_constant_ratio(params: QevParams) -> float:
    """Squared-norm correction needed by the printed normalization of the coupled
    spatial profile, 1 / integral |Psi_printed|^2 (2 for m = 1, 4 for m = 0)"""
    coupled: QevParams = params.coupled()
    derived: DerivedParams = coupled.derive()
    m: int = params.m
    log_const_sq: float = (m - 2) * math.log(2) - math.log(derived.sigma_x)\
        - math.log(derived.sigma_y) - special.gammaln(m + 0.5) - 0.5 * math.log(math.pi)
    coeffs: np.ndarray = _spatial_coefficients(m, coupled.eta_x, coupled.eta_y)
    nodes, weights = hermite_rule(_norm_order(m))
    x, y = np.meshgrid(derived.sigma_x * nodes, derived.sigma_y * nodes, indexing='ij')
    w: np.ndarray = derived.sigma_x * derived.sigma_y * np.outer(weights, weights)
    mass: float = float(np.sum(w * np.abs(npoly.polyval2d(x, y, coeffs)) ** 2))
    ratio: float = 1 / (math.exp(log_const_sq) * mass)
    _log.info('printed normalization of the m=%d profile is off by %.6g in squared norm', m, ratio)
    return ratio

#==========Fock representation==========

@functools.lru_cache(maxsize=1024)
def squeezed_norm(j: int, xi: float) -> float:
    """<j| exp(xi/2 a^2) exp(xi/2 a^+2) |j> by direct summation of
    sum_n xi^(2n) (j+2n)! / (4^n n!^2 j!)"""
    z: float = xi * xi
    if z == 0:
        return 1.0
    if z >= 1:
        raise DomainError(f'squeezed norm diverges for |xi| >= 1, got {xi}')
    n_terms: int = 256
    while n_terms <= 1 << 24:
        n: np.ndarray = np.arange(1, n_terms)
        # log of the term ratio z (j+2n)(j+2n-1) / (4 n^2), accumulated from the n = 0 term 1
        ratios: np.ndarray = math.log(z / 4) + np.log(j + 2 * n) + np.log(j + 2 * n - 1)\
            - 2 * np.log(n)
        logs: np.ndarray = np.concatenate(([0.0], np.cumsum(ratios)))
        if logs[-1] < logs[-2] and logs[-1] < logs.max() - 42:
            return float(np.exp(special.logsumexp(logs)))
        n_terms *= 2
    raise ConvergenceError(f'squeezed norm for j={j}, xi={xi} did not converge')

def squeezed_ladder(j: int, xi: float, cutoff: int) -> np.ndarray:
    """Fock components of exp(xi/2 a^+2)|j>, using
    exp(xi/2 a^+2)|j> = sum_s (xi/2)^s / s! sqrt((j+2s)!/j!) |j+2s>"""
    vec: np.ndarray = np.zeros(cutoff)
    if j >= cutoff:
        return vec
    if xi == 0:
        vec[j] = 1.0
        return vec
    s: np.ndarray = np.arange((cutoff - 1 - j) // 2 + 1)
    logs: np.ndarray = s * math.log(abs(xi) / 2) - special.gammaln(s + 1)\
        + 0.5 * (special.gammaln(j + 2 * s + 1) - special.gammaln(j + 1))
    signs: np.ndarray = np.sign(xi) ** s
    vec[j + 2 * s] = signs * np.exp(logs)
    return vec

def _single_mode_tail(j: int, xi: float, cutoff: int) -> float:
    kept: float = float(np.sum(squeezed_ladder(j, xi, cutoff) ** 2))
    return min(1.0, max(0.0, 1.0 - kept / squeezed_norm(j, xi)))

@dataclass(frozen=True, eq=False)
class TwoModeFockVector:
    """Amplitudes psi[n_a, n_b] for n_a, n_b < cutoff
    tail_mass estimates the probability lost beyond the cutoff
    The amplitude table is read-only"""
    cutoff: int
    amplitudes: np.ndarray
    tail_mass: float = 0.0
    params: Optional[QevParams] = None

    def __post_init__(self) -> None:
        table: np.ndarray = np.array(self.amplitudes, dtype=complex)
        if table.shape != (self.cutoff, self.cutoff):
            raise DomainError(f'amplitude table must be {self.cutoff}x{self.cutoff}, got {table.shape}')
        table.setflags(write=False)
        object.__setattr__(self, 'amplitudes', table)

    @classmethod
    def from_amplitudes(cls, amplitudes: np.ndarray) -> 'TwoModeFockVector':
        """Normalize an arbitrary table, padding it square"""
        raw: np.ndarray = np.atleast_2d(np.asarray(amplitudes, dtype=complex))
        size: int = max(raw.shape)
        table: np.ndarray = np.zeros((size, size), dtype=complex)
        table[:raw.shape[0], :raw.shape[1]] = raw
        norm: float = float(np.linalg.norm(table))
        if norm == 0:
            raise DomainError('cannot normalize an all-zero amplitude table')
        return cls(size, table / norm)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def reduced_density(self) -> np.ndarray:
        """rho_a = Tr_b |psi><psi|"""
        return self.amplitudes @ self.amplitudes.conj().T

class _FockPlan:
    """Log weights of the m+1 product terms of the expansion and the tail
    estimate for a given cutoff"""
    def __init__(self, params: QevParams) -> None:
        self.params: QevParams = params
        self.derived: DerivedParams = params.derive()
        m: int = params.m
        k: np.ndarray = np.arange(m + 1)
        # binomial(m, k) sqrt((m-k)! k!) from a^+^(m-k)|0> and b^+^k|0>
        self.log_weights: np.ndarray = special.gammaln(m + 1)\
            - 0.5 * (special.gammaln(k + 1) + special.gammaln(m - k + 1))\
            + (m - k) * math.log(params.eta_x) + k * math.log(params.eta_y)
        for xi in (self.derived.xi_x, self.derived.xi_y):
            if abs(xi) >= 1:
                raise DomainError(f'squeezing too strong for a Fock expansion, xi={xi}')
        log_mass: np.ndarray = np.array([
            2 * self.log_weights[kk]
            + math.log(squeezed_norm(m - kk, self.derived.xi_x))
            + math.log(squeezed_norm(kk, self.derived.xi_y))
            for kk in range(m + 1)])
        self.mass_share: np.ndarray = np.exp(log_mass - special.logsumexp(log_mass))

    def tail(self, cutoff: int) -> float:
        m: int = self.params.m
        lost: float = 0.0
        for k in range(m + 1):
            t_a: float = _single_mode_tail(m - k, self.derived.xi_x, cutoff)
            t_b: float = _single_mode_tail(k, self.derived.xi_y, cutoff)
            lost += self.mass_share[k] * (1 - (1 - t_a) * (1 - t_b))
        return lost

    def build(self, cutoff: int, tail_mass: float) -> TwoModeFockVector:
        m: int = self.params.m
        weights: np.ndarray = np.exp(self.log_weights - self.log_weights.max())
        table: np.ndarray = np.zeros((cutoff, cutoff), dtype=complex)
        for k in range(m + 1):
            mode_a: np.ndarray = squeezed_ladder(m - k, self.derived.xi_x, cutoff)
            mode_b: np.ndarray = squeezed_ladder(k, self.derived.xi_y, cutoff)
            table += weights[k] * (-1j) ** k * np.outer(mode_a, mode_b)
        table /= np.linalg.norm(table)
        return TwoModeFockVector(cutoff, table, tail_mass, self.params)

def fock_amplitudes(params: QevParams, cutoff: Optional[int] = None) -> TwoModeFockVector:
    """Truncated, normalized Fock table of the state
    With no cutoff, start at m + 16 and double until the tail is below 1e-10"""
    plan: _FockPlan = _FockPlan(params)
    if cutoff is not None:
        if cutoff < params.m + 1:
            raise DomainError(f'cutoff {cutoff} cannot hold vorticity m={params.m}')
        tail: float = plan.tail(cutoff)
        if tail > TAIL_THRESHOLD:
            raise TruncationError(f'cutoff {cutoff} loses {tail:.3g} of the state')
        return plan.build(cutoff, tail)
    size: int = params.m + _CUTOFF_MARGIN
    while size <= MAX_CUTOFF:
        tail = plan.tail(size)
        if tail < TAIL_THRESHOLD:
            _log.debug('Fock cutoff %d for %s, tail %.3g', size, params, tail)
            return plan.build(size, tail)
        size *= 2
    raise TruncationError(f'no cutoff up to {MAX_CUTOFF} holds {params} to {TAIL_THRESHOLD}')
