import warnings

import numpy as np
import pytest

from stirap_lab.errors import ContinuationError, DomainError
from stirap_lab.stark import (
    PerturbationWarning,
    StarkModel,
    branch_energy,
    coupling_coefficients,
    perturbative_shift,
    rotational_energy,
    stark_energies,
    stark_map,
    stark_matrix,
)
from stirap_lab.units import kv_per_cm_to_v_per_m, stark_coupling_hz

SINGLET = StarkModel(b_rot=1.1139e9, dipole=0.566)
TRIPLET = StarkModel(b_rot=0.5264e9, dipole=0.052)
KV = kv_per_cm_to_v_per_m(1.0)


def test_rotational_energy():
    assert rotational_energy(1.0, 2) == 6.0
    np.testing.assert_array_equal(rotational_energy(2.0, np.arange(4)), [0, 4, 12, 24])
    with pytest.raises(DomainError):
        rotational_energy(1.0, -1)
    with pytest.raises(DomainError):
        rotational_energy(1.0, 1.5)


def test_coupling_coefficients_closed_form():
    c0 = coupling_coefficients(3, 0)
    assert c0[0] == pytest.approx(1 / np.sqrt(3))
    assert c0[1] == pytest.approx(2 / np.sqrt(15))
    c1 = coupling_coefficients(3, 1)
    assert c1[0] == pytest.approx(np.sqrt(3 / 15))


def test_matrix_symmetric_with_field_independent_trace():
    zero = stark_matrix(SINGLET, 0.0)
    for f in np.linspace(0, 5 * KV, 7):
        H = stark_matrix(SINGLET, f)
        np.testing.assert_array_equal(H, H.T)
        assert np.trace(H) == pytest.approx(np.trace(zero), rel=1e-15)
        assert np.count_nonzero(np.triu(H, 2)) == 0


def test_zero_field_spectrum_is_rigid_rotor():
    for m in (0, 1, 2):
        w, _ = stark_energies(SINGLET.replace(m=m), 0.0)
        n = np.arange(m, SINGLET.n_max + 1)
        np.testing.assert_allclose(w, SINGLET.b_rot * n * (n + 1))


def test_eigenvalue_sum_equals_trace():
    w, v = stark_energies(SINGLET, 2 * KV)
    assert w.sum() == pytest.approx(np.trace(stark_matrix(SINGLET, 2 * KV)))
    np.testing.assert_allclose(v.T @ v, np.eye(len(w)), atol=1e-12)


@pytest.mark.parametrize("n,m", [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)])
def test_weak_field_matches_second_order(n, m):
    f = 0.05 * KV
    model = SINGLET.replace(m=m)
    exact = branch_energy(model, [f], n)[0] - rotational_energy(model.b_rot, n)
    pert = perturbative_shift(model, f, n, m)
    assert pert.reliable
    assert exact == pytest.approx(pert.shift, rel=1e-3)


def test_perturbative_formula_values():
    x = stark_coupling_hz(SINGLET.dipole, KV)
    assert perturbative_shift(SINGLET, KV, 0, 0).shift == pytest.approx(-(x**2) / (6 * SINGLET.b_rot))
    # N=1 m=0 shifts up by x^2/(10B), m=1 down by x^2/(20B)
    assert perturbative_shift(SINGLET, KV, 1, 0).shift == pytest.approx(x**2 / (10 * SINGLET.b_rot))
    assert perturbative_shift(SINGLET, KV, 1, 1).shift == pytest.approx(-(x**2) / (20 * SINGLET.b_rot))


def test_perturbative_warning_above_threshold():
    with pytest.warns(PerturbationWarning):
        res = perturbative_shift(SINGLET, 10 * KV, 0, 0)
    assert not res.reliable
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert perturbative_shift(SINGLET, 0.1 * KV, 0, 0).reliable
    with pytest.raises(DomainError):
        perturbative_shift(SINGLET, KV, 1, 2)


def test_stark_map_levels_and_labels():
    fields = np.linspace(0, 2 * KV, 11)
    levels = stark_map(SINGLET, fields, n_report=2)
    keys = [(lv.m_abs, lv.n_label) for lv in levels]
    assert keys == [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    for lv in levels:
        assert lv.energies[0] == pytest.approx(rotational_energy(SINGLET.b_rot, lv.n_label))
        assert lv.shifts[0] == 0
        assert len(lv.points) == fields.size


def test_stark_map_agrees_with_sorted_branch():
    fields = np.linspace(0, 3 * KV, 16)
    levels = {(lv.n_label, lv.m_abs): lv for lv in stark_map(SINGLET, fields, check_convergence=False)}
    for (n, m), lv in levels.items():
        np.testing.assert_allclose(lv.energies, branch_energy(SINGLET.replace(m=m), fields, n), rtol=1e-12)


def test_ground_state_shift_is_negative_and_monotone():
    fields = np.linspace(0, 3 * KV, 16)
    n0 = stark_map(SINGLET, fields, n_report=0)[0]
    assert np.all(np.diff(n0.shifts) < 0)


def test_convergence_in_basis_size():
    f = 3 * KV
    small = branch_energy(SINGLET.replace(n_max=6), [f], 2)[0]
    large = branch_energy(SINGLET.replace(n_max=40), [f], 2)[0]
    assert abs(small - large) < 1.0


def test_stark_map_rejects_bad_fields():
    with pytest.raises(DomainError):
        stark_map(SINGLET, [0.1, 0.2])
    with pytest.raises(DomainError):
        stark_map(SINGLET, [0.0, 2.0, 1.0])
    with pytest.raises(DomainError):
        stark_matrix(SINGLET, -1.0)


def test_coarse_grid_in_strong_field_raises_continuation_error():
    strong = StarkModel(b_rot=1e9, dipole=5.0)
    with pytest.raises(ContinuationError):
        stark_map(strong, [0.0, 50 * KV], n_report=2, check_convergence=False)


@pytest.mark.parametrize("kw", [dict(b_rot=0.0), dict(dipole=-1.0), dict(n_max=2), dict(m=12)])
def test_model_validation(kw):
    base = dict(b_rot=1e9, dipole=1.0)
    base.update(kw)
    with pytest.raises(DomainError):
        StarkModel(**base)


def test_zero_dipole_gives_no_shift():
    lv = stark_map(StarkModel(1e9, 0.0), [0.0, KV], n_report=1)
    for level in lv:
        np.testing.assert_array_equal(level.shifts, 0.0)


def test_triplet_shift_is_small():
    n0 = stark_map(TRIPLET, np.linspace(0, 2 * KV, 5), n_report=0)[0]
    x = stark_coupling_hz(TRIPLET.dipole, 2 * KV)
    assert n0.shifts[-1] == pytest.approx(-(x**2) / (6 * TRIPLET.b_rot), rel=0.01)
