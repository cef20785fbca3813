"""
qev/tests/analysis_test.py
"""

import math

import numpy as np
import pytest

from qev.analysis import (
    Check,
    Finding,
    Preset,
    SweepSpec,
    _is_unimodal,
    araki_lieb_region,
    complementarity,
    convergence_failed,
    inequality_table,
    optimal_ellipticity,
    sweep_entropy,
    sweep_uncertainty,
    validate
)
from qev.errors import DomainError
from qev.state import QevParams
from tests.get_params import (
    BALANCED_ETA,
    circular,
    mildly_squeezed,
    optimum_s_a_m1
)

@pytest.fixture(scope='module')
def width_sweep():
    return sweep_uncertainty(SweepSpec.for_preset(Preset.WIDTHS, range(6)))

@pytest.fixture(scope='module')
def ellipticity_sweep():
    return sweep_entropy(SweepSpec.for_preset(Preset.ELLIPTICITY, (1, 3, 5)))

#==========Sweep specifications==========

def test_preset_grids():
    spec = SweepSpec.for_preset(Preset.WIDTHS, [1])
    grid = spec.grid()
    assert (spec.variable, grid.size) == ('sigma_x', 64)
    assert grid[0] == 1.0 and grid[-1] == pytest.approx(10.0)
    spec = SweepSpec.for_preset(Preset.ELLIPTICITY, [1], steps=8)
    grid = spec.grid()
    assert spec.variable == 'eta_x' and grid.size == 8
    assert np.allclose(np.diff(np.log(grid)), np.log(grid[1] / grid[0]))
    params = spec.params_at(2, 0.8)
    assert params.m == 2 and params.eta_y == pytest.approx(1 / (math.sqrt(2) * 0.8))

@pytest.mark.parametrize('overrides', [
    dict(variable='zeta_x'),
    dict(spacing='cubic'),
    dict(lo=2.0, hi=1.0),
    dict(steps=1),
    dict(lo=0.0),
    dict(workers=0),
    dict(variable='eta_x'),
])
def test_sweep_spec_rejects(overrides):
    with pytest.raises(DomainError):
        SweepSpec.for_preset(Preset.WIDTHS, [1], **overrides)

@pytest.mark.parametrize('m_list', [(), (-1,), (1, 1)])
def test_sweep_spec_rejects_vorticities(m_list):
    with pytest.raises(DomainError):
        SweepSpec('sigma_x', 1.0, 2.0, 3, m_list, Preset.WIDTHS)

def test_custom_sweeps_need_a_base():
    with pytest.raises(DomainError):
        SweepSpec('eta_x', 0.1, 1.0, 4, (1,), Preset.CUSTOM)
    with pytest.raises(DomainError):
        SweepSpec.for_preset(Preset.CUSTOM, [1])
    spec = SweepSpec('eta_x', 0.1, 1.0, 4, (1,), Preset.CUSTOM, base=mildly_squeezed(3))
    assert spec.params_at(2, 0.5) == QevParams(2, 0.5, 0.9, mildly_squeezed(3).zeta_x,
        mildly_squeezed(3).zeta_y)

#==========Uncertainty sweep==========

def test_width_sweep_layout(width_sweep):
    assert len(width_sweep.rows) == 6 * 64
    assert [row.m for row in width_sweep.rows[::64]] == list(range(6))
    assert not width_sweep.failures()
    assert np.all(np.diff(width_sweep.values(3)) > 0)

def test_width_sweep_respects_the_floor(width_sweep):
    for m in range(6):
        assert np.all(width_sweep.column('prod_x', m) >= 0.5 - 1e-9)
        assert np.all(width_sweep.column('prod_y', m) >= 0.5 - 1e-9)
    assert np.allclose(width_sweep.column('prod_x', 0), 0.5, atol=1e-8)

def test_width_sweep_trends(width_sweep):
    for m in range(6):
        assert np.all(np.diff(width_sweep.column('dx', m)) > 0)
        assert np.all(np.diff(width_sweep.column('dpx', m)) < 0)

def test_single_vortex_products_share_a_constant_sum(width_sweep):
    prod_x = width_sweep.column('prod_x', 1)
    prod_y = width_sweep.column('prod_y', 1)
    assert prod_x[0] == pytest.approx(1.2353, abs=1e-3)
    assert prod_y[0] == pytest.approx(0.7647, abs=1e-3)
    assert prod_x[-1] == pytest.approx(1.0040, abs=1e-3)
    assert np.allclose(prod_x + prod_y, 2.0, atol=1e-7)

def test_complementarity_findings(width_sweep):
    findings = {f.name: f for f in width_sweep.findings}
    assert 'complementarity[m=0]' not in findings
    for m in range(1, 6):
        finding = findings[f'complementarity[m={m}]']
        assert finding.value > 0.8 and not finding.flagged
        assert f'min_prod_x[m={m}]' in findings
        assert f'final_prod_y[m={m}]' in findings

def test_complementarity_measure():
    assert complementarity(np.array([1.0, 2.0, 3.0]), np.array([3.0, 2.0, 1.0])) == 1.0
    assert complementarity(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 1.0])) == 0.5
    assert complementarity(np.array([1.0]), np.array([1.0])) == 0.0

#==========Entropy sweep==========

def test_subadditivity_holds_everywhere(ellipticity_sweep):
    assert len(ellipticity_sweep.rows) == 3 * 256
    for m in (1, 3, 5):
        assert np.all(ellipticity_sweep.column('subadditivity_ok', m) == 1)
        finding = next(f for f in ellipticity_sweep.findings if f.name == f'subadditivity_ok[m={m}]')
        assert finding.value == 1.0

def test_araki_lieb_holds_on_one_window(ellipticity_sweep):
    spec = ellipticity_sweep.spec
    intervals = araki_lieb_region(spec, ellipticity_sweep)
    assert [interval.m for interval in intervals] == [1, 3, 5]
    for interval in intervals:
        holds = ellipticity_sweep.column('araki_lieb_ok', interval.m) == 1
        assert 0 < holds.sum() < 256
        assert spec.lo < interval.lo < interval.hi < spec.hi

def test_mode_entropies_cross_once_for_one_quantum(ellipticity_sweep):
    diff = ellipticity_sweep.column('s_a', 1) - ellipticity_sweep.column('s_b', 1)
    eta = ellipticity_sweep.values(1)
    crossings = np.nonzero(np.sign(diff[:-1]) != np.sign(diff[1:]))[0]
    assert crossings.size == 1
    assert 0.74 < eta[crossings[0]] < 0.78

def test_entropy_gap_has_twin_peaks(ellipticity_sweep):
    gap = ellipticity_sweep.column('s_diff', 1)
    interior = np.nonzero((gap[1:-1] > gap[:-2]) & (gap[1:-1] > gap[2:]))[0] + 1
    assert interior.size == 2
    assert gap[interior[0]] == pytest.approx(0.755939, abs=1e-5)
    assert abs(gap[interior[0]] - gap[interior[1]]) < 1e-3

def test_extreme_ellipticity_leaves_mode_a_pure(ellipticity_sweep):
    for m in (1, 3, 5):
        s_a = ellipticity_sweep.column('s_a', m)
        assert s_a[0] < 0.05 and s_a[-1] < 0.05
        assert s_a.max() > 0.5

def test_inequality_table_projects_columns():
    spec = SweepSpec.for_preset(Preset.ELLIPTICITY, [1], steps=16)
    table = inequality_table(spec)
    assert table.columns == ('s_sum', 's_ab', 's_diff', 'i_c', 'subadditivity_ok', 'araki_lieb_ok')
    assert set(table.rows[0].fields) == set(table.columns)

def test_failed_points_become_marked_rows():
    base = QevParams(1)
    spec = SweepSpec('sigma_x', 1.0, 1e9, 2, (1,), Preset.CUSTOM, base=base, spacing='log')
    table = sweep_entropy(spec)
    good, bad = table.rows
    assert good.error is None and good.fields['s_ab'] == pytest.approx(1.0)
    assert bad.error.startswith('DomainError: ')
    assert math.isnan(bad.fields['s_a'])
    assert table.failures() == [bad]
    assert not convergence_failed([row.error for row in table.rows])

def test_threaded_sweep_matches_serial():
    spec = SweepSpec.for_preset(Preset.ELLIPTICITY, [1, 2], steps=12)
    serial = sweep_entropy(spec)
    threaded = sweep_entropy(SweepSpec.for_preset(Preset.ELLIPTICITY, [1, 2], steps=12, workers=4))
    assert [r.fields for r in threaded.rows] == [r.fields for r in serial.rows]

#==========Optimum ellipticity==========

def test_single_quantum_optimum():
    best = optimal_ellipticity(Preset.ELLIPTICITY, 1, 's_a')
    assert best.unimodal and best.warning is None
    assert best.eta_x_star == pytest.approx(optimum_s_a_m1(), abs=1e-4)
    assert abs(best.eta_x_star - 1.0) > 0.05
    assert best.s_star == pytest.approx(1.0, abs=1e-8)

def test_optimum_is_stable_under_refinement():
    coarse = optimal_ellipticity(Preset.ELLIPTICITY, 3, 's_a')
    fine = optimal_ellipticity(Preset.ELLIPTICITY, 3, 's_a', xtol=1e-7)
    assert math.log(fine.eta_x_star) == pytest.approx(math.log(coarse.eta_x_star), abs=1e-5)

def test_optimum_survives_a_recentred_bracket():
    coarse = optimal_ellipticity(Preset.ELLIPTICITY, 3, 's_a')
    star = coarse.eta_x_star
    recentred = optimal_ellipticity(Preset.ELLIPTICITY, 3, 's_a', lo=star / 10, hi=star * 10)
    assert recentred.unimodal
    assert math.log(recentred.eta_x_star) == pytest.approx(math.log(star), abs=1e-5)

def test_joint_optimum_balances_the_weights():
    best = optimal_ellipticity(Preset.ELLIPTICITY, 1, 's_ab')
    assert best.eta_x_star == pytest.approx(BALANCED_ETA, abs=1e-4)

def test_optimizer_rejects_unknown_targets():
    with pytest.raises(DomainError):
        optimal_ellipticity(target='i_c')

def test_unimodal_scan():
    assert _is_unimodal(np.array([0.0, 1.0, 2.0, 1.0]), 2)
    assert _is_unimodal(np.array([0.0, 1.0, 1.0, 0.5]), 1)
    assert not _is_unimodal(np.array([0.0, 2.0, 1.0, 1.5, 0.0]), 1)

#==========Validation==========

def test_validate_circular_vortex():
    report = validate(circular(1))
    assert report.ok
    assert report.names()[:6] == ['hypergeometric_series', 'ladder_vs_fock_moments',
        'wigner_marginal', 'wigner_parity', 'normalization', 'heisenberg_floor']
    ratio = next(f for f in report.findings if f.name == 'printed_constant_ratio')
    assert ratio.value == pytest.approx(2.0, rel=1e-9)

def test_validate_elliptical_vortex():
    report = validate(mildly_squeezed(2))
    assert report.ok, [c for c in report.checks if not c.passed]
    assert len(report.findings) == 4

def test_check_records():
    assert Check.measure('gap', 1e-9, 1e-8).passed
    failed = Check.failed('gap', 1e-8, DomainError('bad input'))
    assert not failed.passed and failed.error == 'DomainError: bad input'
    assert Finding('x', 1.0).flagged is False
    assert convergence_failed([None, 'TruncationError: tail'])
    assert not convergence_failed([None, 'DomainError: bad'])
