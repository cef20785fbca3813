"""
qev/tests/entropy_test.py
"""

import math

import numpy as np
import pytest
from hypothesis import (
    given,
    settings,
    strategies as st
)
from scipy import stats

from qev.errors import DomainError
from qev.entropy import (
    EntropyReport,
    ModalDistribution,
    Mode,
    eigen_entropy_oracle,
    entropy_report,
    modal_distribution,
    shannon_entropy
)
from qev.state import QevParams
from tests.get_params import (
    BALANCED_ETA,
    reciprocal,
    unsqueezed
)

def test_distribution_is_validated_and_read_only():
    dist = ModalDistribution(Mode.A, [0.25, 0.75])
    with pytest.raises(ValueError):
        dist.probs[0] = 0.5
    for bad in ([], [0.5, 0.6], [-0.1, 1.1]):
        with pytest.raises(DomainError):
            ModalDistribution(Mode.A, bad)

def test_shannon_entropy_examples():
    assert shannon_entropy(ModalDistribution(Mode.A, [1.0])) == 0.0
    assert shannon_entropy(ModalDistribution(Mode.A, [0.5, 0.5])) == pytest.approx(1.0)
    assert shannon_entropy(ModalDistribution(Mode.A, [0.25] * 4)) == pytest.approx(2.0)
    assert shannon_entropy(ModalDistribution(Mode.A, [0.0, 1.0, 0.0])) == 0.0

def test_vortex_without_squeezing_is_one_bit():
    report = entropy_report(unsqueezed(1))
    assert report.s_a == pytest.approx(1.0, rel=1e-12)
    assert report.s_b == pytest.approx(1.0, rel=1e-12)
    assert report.s_ab == pytest.approx(1.0, rel=1e-12)
    assert report.i_c == pytest.approx(1.0, rel=1e-12)

def test_squeezed_partner_reweights_mode_a():
    zeta_y = math.atanh(0.8) / 2
    dist = modal_distribution(QevParams(1, 1.0, 1.0, 0.0, zeta_y), Mode.A)
    np.testing.assert_allclose(dist.probs, [0.2647, 0.7353], atol=1e-4)
    joint = modal_distribution(QevParams(1, 1.0, 1.0, 0.0, zeta_y), Mode.JOINT)
    np.testing.assert_allclose(joint.probs, [0.5, 0.5], rtol=1e-14)

@pytest.mark.parametrize('m', [1, 4, 9, 20])
def test_joint_distribution_is_binomial(m):
    params = QevParams(m, 0.7, 1.3, 0.2, -0.4)
    success = 1.3 ** 2 / (0.7 ** 2 + 1.3 ** 2)
    expected = stats.binom.pmf(np.arange(m + 1), m, success)
    np.testing.assert_allclose(modal_distribution(params, Mode.JOINT).probs, expected,
        rtol=1e-10, atol=1e-15)
    bits = float(stats.binom(m, success).entropy()) / math.log(2)
    assert entropy_report(params).s_ab == pytest.approx(bits, abs=1e-12)

def test_balanced_weights_give_one_bit():
    assert entropy_report(reciprocal(1, BALANCED_ETA)).s_ab == pytest.approx(1.0, rel=1e-12)

def test_swapping_modes_swaps_entropies():
    params = QevParams(3, 0.6, 1.1, 0.3, 0.5)
    report = entropy_report(params)
    swapped = entropy_report(params.swapped())
    assert swapped.s_a == pytest.approx(report.s_b, rel=1e-12)
    assert swapped.s_b == pytest.approx(report.s_a, rel=1e-12)
    assert swapped.s_ab == pytest.approx(report.s_ab, rel=1e-12)

def test_entropy_grows_with_vortex_order():
    values = [entropy_report(reciprocal(m)).s_a for m in range(1, 6)]
    np.testing.assert_allclose(values, [0.774, 1.111, 1.326, 1.495, 1.639], atol=2e-3)
    assert all(a < b for a, b in zip(values, values[1:]))

def test_report_row():
    row = EntropyReport(1.0, 0.5, 1.25, 0.25, True, True).as_row()
    assert row['s_sum'] == 1.5
    assert row['s_diff'] == 0.5
    assert row['araki_lieb_ok'] is True

@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=6),
    st.floats(min_value=0.1, max_value=5.0), st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=-1.0, max_value=1.0), st.floats(min_value=-1.0, max_value=1.0))
def test_entropies_are_bounded(m, eta_x, eta_y, zeta_x, zeta_y):
    report = entropy_report(QevParams(m, eta_x, eta_y, zeta_x, zeta_y))
    ceiling = math.log2(m + 1) + 1e-12
    for value in (report.s_a, report.s_b, report.s_ab):
        assert -1e-12 <= value <= ceiling

def test_extreme_squeezing_is_rejected():
    with pytest.raises(DomainError):
        entropy_report(QevParams(1, 1.0, 1.0, 0.0, 5.0))

#==========Eigenvalue oracle==========

def test_eigen_oracle_examples():
    assert eigen_entropy_oracle(unsqueezed(0)) == pytest.approx(0.0, abs=1e-12)
    assert eigen_entropy_oracle(unsqueezed(1)) == pytest.approx(1.0, rel=1e-10)

@pytest.mark.parametrize('m', [2, 3, 5])
def test_eigen_oracle_matches_diagonal_without_squeezing(m):
    params = unsqueezed(m, 0.6, 0.9)
    assert eigen_entropy_oracle(params) == pytest.approx(entropy_report(params).s_a, rel=1e-9)

def test_squeezed_gaussian_is_unentangled():
    assert eigen_entropy_oracle(QevParams(0, 1.0, 1.0, 0.3, -0.2)) == pytest.approx(0.0, abs=1e-9)
