"""
qev/qev/entropy.py

Mode entropies of QEV states from the diagonal-coefficient distributions, the
entropic inequalities and index of correlation, and an exact eigenvalue oracle.
Entropies are in bits.
"""

import logging
import math
from dataclasses import (
    asdict,
    dataclass
)
from enum import Enum
from typing import (
    Dict,
    Optional,
    Union
)

import numpy as np
from scipy import (
    linalg,
    special
)

from .errors import DomainError
from .specfun import (
    DEFAULT_CONTROL,
    Z_MAX,
    SeriesControl,
    gauss_2f1,
    log_binomial
)
from .state import (
    DerivedParams,
    QevParams,
    TwoModeFockVector,
    fock_amplitudes
)

_log = logging.getLogger(__name__)

INEQUALITY_TOLERANCE: float = 1e-9
EIGEN_FLOOR: float = 1e-14

class Mode(Enum):
    A = 'a'
    B = 'b'
    JOINT = 'ab'

@dataclass(frozen=True, eq=False)
class ModalDistribution:
    """probs[k] for k = 0..m, read-only"""
    mode: Mode
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs: np.ndarray = np.array(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError('a modal distribution needs a non-empty vector')
        if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
            raise DomainError(f'not a probability vector: {probs}')
        probs.setflags(write=False)
        object.__setattr__(self, 'probs', probs)

@dataclass(frozen=True)
class EntropyReport:
    s_a: float
    s_b: float
    s_ab: float
    i_c: float
    subadditivity_ok: bool
    araki_lieb_ok: bool

    def as_row(self) -> Dict[str, Union[float, bool]]:
        row: Dict[str, Union[float, bool]] = asdict(self)
        row['s_sum'] = self.s_a + self.s_b
        row['s_diff'] = abs(self.s_a - self.s_b)
        return row

def _hypergeometric_weight(j: int, xi: float, ctl: SeriesControl) -> float:
    """2F1((j+1)/2, (j+2)/2; 1; xi^2), the squeezed norm of |j>"""
    z: float = xi * xi
    if z > Z_MAX:
        raise DomainError(f'squeezing xi={xi} is too strong for the mode series')
    return gauss_2f1((j + 1) / 2, (j + 2) / 2, 1.0, z, ctl)

def modal_distribution(params: QevParams, mode: Mode,
        ctl: SeriesControl = DEFAULT_CONTROL) -> ModalDistribution:
    """p_k proportional to C(m,k) eta_x^(2(m-k)) eta_y^(2k) F_k, where F_k is the
    squeezed norm of the traced-out partner: mode b's |k> for A, mode a's |m-k>
    for B and 1 for JOINT"""
    m: int = params.m
    derived: DerivedParams = params.derive()
    logs: np.ndarray = np.empty(m + 1)
    for k in range(m + 1):
        logs[k] = log_binomial(m, k) + 2 * (m - k) * math.log(params.eta_x)\
            + 2 * k * math.log(params.eta_y)
        if mode is Mode.A:
            logs[k] += math.log(_hypergeometric_weight(k, derived.xi_y, ctl))
        elif mode is Mode.B:
            logs[k] += math.log(_hypergeometric_weight(m - k, derived.xi_x, ctl))
    probs: np.ndarray = np.exp(logs - special.logsumexp(logs))
    return ModalDistribution(mode, probs / probs.sum())

def shannon_entropy(dist: ModalDistribution) -> float:
    return float(np.sum(special.entr(dist.probs))) / math.log(2)

def entropy_report(params: QevParams, ctl: SeriesControl = DEFAULT_CONTROL) -> EntropyReport:
    s_a: float = shannon_entropy(modal_distribution(params, Mode.A, ctl))
    s_b: float = shannon_entropy(modal_distribution(params, Mode.B, ctl))
    s_ab: float = shannon_entropy(modal_distribution(params, Mode.JOINT, ctl))
    return EntropyReport(
        s_a=s_a,
        s_b=s_b,
        s_ab=s_ab,
        i_c=s_a + s_b - s_ab,
        subadditivity_ok=s_ab <= s_a + s_b + INEQUALITY_TOLERANCE,
        araki_lieb_ok=s_ab >= abs(s_a - s_b) - INEQUALITY_TOLERANCE)

#==========Eigenvalue oracle==========

def reduced_entropy(vec: TwoModeFockVector) -> float:
    """von Neumann entropy of Tr_b |psi><psi| in bits"""
    eigenvalues: np.ndarray = linalg.eigvalsh(vec.reduced_density())
    kept: np.ndarray = eigenvalues[eigenvalues > EIGEN_FLOOR]
    return float(np.sum(special.entr(kept))) / math.log(2)

def eigen_entropy_oracle(params: QevParams, cutoff: Optional[int] = None) -> float:
    entropy: float = reduced_entropy(fock_amplitudes(params, cutoff))
    _log.debug('eigen entropy for %s: %.12g bits', params, entropy)
    return entropy
