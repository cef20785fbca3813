"""
qev/qev/specfun.py

The special-function kernel: log-gamma, binomial coefficients, associated
Laguerre polynomials, the Gauss hypergeometric series on [0, 1) and cached
Gauss-Hermite rules. Nothing in here knows about vortex states.
"""

import functools
import logging
import math
import operator
from dataclasses import dataclass
from typing import (
    Tuple,
    Union
)

import numpy as np
from scipy import special

from .errors import (
    ConvergenceError,
    DomainError
)

_log = logging.getLogger(__name__)

Real = Union[float, np.ndarray]

# Largest argument of the hypergeometric series. Beyond it the series needs
# analytic continuation, which is never required because z = tanh(2 zeta)^2.
Z_MAX: float = 1.0 - 1e-6
_EXACT_LOG_LIMIT: int = 20

@dataclass(frozen=True)
class SeriesControl:
    """Termination control for a power series
    rel_tol: stop once the next term falls below rel_tol times the partial sum
    max_terms: give up with a ConvergenceError after this many terms"""
    rel_tol: float = 1e-16
    max_terms: int = 1_000_000

    def __post_init__(self) -> None:
        if not self.rel_tol > 0:
            raise DomainError(f'rel_tol must be positive, got {self.rel_tol}')
        if self.max_terms < 1:
            raise DomainError(f'max_terms must be at least 1, got {self.max_terms}')

DEFAULT_CONTROL: SeriesControl = SeriesControl()

#==========Gamma and binomial==========

def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0"""
    if not x > 0:
        raise DomainError(f'log_gamma needs x > 0, got {x}')
    return float(special.gammaln(x))

def _nonneg_pair(m: int, k: int) -> Tuple[int, int]:
    try:
        m = operator.index(m)
        k = operator.index(k)
    except TypeError as exc:
        raise DomainError(f'binomial needs integers, got ({m!r}, {k!r})') from exc
    if m < 0 or k < 0 or k > m:
        raise DomainError(f'binomial needs 0 <= k <= m, got m={m}, k={k}')
    return m, k

def binomial(m: int, k: int) -> float:
    """m! / (k! (m-k)!), exact integer arithmetic rounded once to a float"""
    m, k = _nonneg_pair(m, k)
    try:
        return float(math.comb(m, k))
    except OverflowError as exc:
        raise DomainError(f'binomial({m}, {k}) exceeds the float range') from exc

def log_binomial(m: int, k: int) -> float:
    """ln binomial(m, k); exact for small m, log-gamma based above"""
    m, k = _nonneg_pair(m, k)
    if m <= _EXACT_LOG_LIMIT:
        return math.log(math.comb(m, k))
    return float(special.gammaln(m + 1) - special.gammaln(k + 1) - special.gammaln(m - k + 1))

#==========Orthogonal polynomials==========

def laguerre_assoc(m: int, alpha: float, x: Real) -> Real:
    """L_m^alpha(x) from the three-term recurrence
    (n+1) L_{n+1} = (2n+1+alpha-x) L_n - (n+alpha) L_{n-1}
    x may be a scalar or a numpy array"""
    if m < 0:
        raise DomainError(f'Laguerre degree must be non-negative, got {m}')
    x_arr: np.ndarray = np.asarray(x, dtype=float)
    prev: np.ndarray = np.ones_like(x_arr)
    if m == 0:
        return prev if x_arr.ndim else float(prev)
    curr: np.ndarray = 1.0 + alpha - x_arr
    for n in range(1, m):
        prev, curr = curr, ((2 * n + 1 + alpha - x_arr) * curr - (n + alpha) * prev) / (n + 1)
    return curr if x_arr.ndim else float(curr)

@functools.lru_cache(maxsize=None)
def hermite_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the n-point Gauss-Hermite rule for weight exp(-t^2)
    The arrays are shared between callers, so they are returned read-only"""
    nodes, weights = np.polynomial.hermite.hermgauss(n)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights

#==========Hypergeometric series==========

def gauss_2f1(a: float, b: float, c: float, z: float,
        ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """2F1(a, b; c; z) summed term by term for 0 <= z <= 1 - 1e-6"""
    if c <= 0 and float(c).is_integer():
        raise DomainError(f'2F1 is undefined for non-positive integer c={c}')
    if not 0.0 <= z <= Z_MAX:
        raise DomainError(f'2F1 series needs 0 <= z <= {Z_MAX}, got {z}')
    return _series_2f1(float(a), float(b), float(c), float(z), ctl.rel_tol, ctl.max_terms)

@functools.lru_cache(maxsize=8192)
def _series_2f1(a: float, b: float, c: float, z: float, rel_tol: float, max_terms: int) -> float:
    total: float = 1.0
    term: float = 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        total += term
        if abs(term) <= rel_tol * abs(total):
            return total
    _log.warning('2F1(%g, %g; %g; %g) still moving after %d terms', a, b, c, z, max_terms)
    raise ConvergenceError(f'2F1({a}, {b}; {c}; {z}) did not converge in {max_terms} terms')
