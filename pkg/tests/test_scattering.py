import numpy as np
import pytest

from ballistic1d import (
    Custom,
    InvalidParameterError,
    Segment,
    SingularSystemError,
    build_profile,
    iv_sweep,
    plane_wave_current,
    probability_current,
    quartic_energy,
    residual_check,
    rtd_family,
    solve_piecewise_constant,
    solve_scattering,
)
from ballistic1d.scattering import BoundarySystem
from ballistic1d.tbc import BoundaryRow, Endpoint

K1 = 0.4558


@pytest.fixture(scope="module")
def flat_solution(mat):
    flat = build_profile(Custom((Segment(0.0, 135.0, 0.0),)))
    return solve_scattering(flat, K1, "left_to_right", mat, "se4")


def test_flat_plane_wave(flat_solution, mat):
    sol = flat_solution
    np.testing.assert_allclose(sol.psi, np.exp(1j * K1 * sol.x), rtol=0, atol=1e-8)
    assert sol.current == pytest.approx(0.7425, abs=1e-4)
    assert sol.current == pytest.approx(plane_wave_current(K1, mat), rel=1e-8)
    assert residual_check(sol) <= 1e-10
    assert sol.diagnostics.boundary_residual_max <= 1e-10


def test_residual_sensitivity(flat_solution):
    c = flat_solution.coeffs.copy()
    c[0] += 1e-3
    assert residual_check(flat_solution, c) >= 1e-4


@pytest.mark.parametrize("name", ["single_barrier", "double_barrier", "rtd"])
def test_backward_error(request, mat, name):
    sol = solve_scattering(request.getfixturevalue(name), 0.2846, "left_to_right", mat, "se4")
    assert sol.diagnostics.backward_error <= 1e-12
    a, c, rhs = sol.system.matrix, sol.coeffs, sol.system.rhs
    assert np.linalg.norm(a @ c - rhs) <= 1e-12 * np.linalg.norm(a) * np.linalg.norm(c)
    assert sol.diagnostics.condition_estimate >= 1.0


def test_psi_is_basis_combination(mat, rtd):
    sol = solve_scattering(rtd, 0.2846, "left_to_right", mat, "se4")
    np.testing.assert_array_equal(sol.states, sol.basis.values @ sol.coeffs)
    np.testing.assert_array_equal(sol.states[0], sol.coeffs)


def test_plane_wave_current_formula(mat):
    for k in (0.2, 0.4558, 1.0):
        state = [(1j * k) ** n for n in range(4)]
        want = mat.hbar * k / mat.m_star - mat.alpha * mat.hbar**3 * k**3 / mat.m_star**2
        assert probability_current(state, mat) == pytest.approx(want, rel=1e-14)
        assert probability_current(state[:2], mat, "se2") == pytest.approx(mat.hbar * k / mat.m_star)


def test_real_state_carries_no_current(mat):
    assert probability_current([0.3, -1.2, 0.5, 2.0], mat) == 0.0


def test_superposition_current(mat):
    k1, k2 = 0.4558, 2.657
    state = [(1j * k1) ** n + (1j * k2) ** n for n in range(4)]
    # Psi = 2, Psi' = i(k1+k2), Psi'' = -(k1^2+k2^2), Psi''' = -i(k1^3+k2^3)
    first = 2 * (k1 + k2)
    second = -2 * (k1**3 + k2**3) - (k1 + k2) * (k1**2 + k2**2)
    want = mat.hbar / mat.m_star * first + mat.alpha * mat.hbar**3 / (2 * mat.m_star**2) * second
    assert probability_current(state, mat) == pytest.approx(want, rel=1e-13)


def test_current_is_vectorized(mat):
    states = np.array([[(1j * k) ** n for n in range(4)] for k in (0.2, 0.3)])
    j = probability_current(states, mat)
    assert j.shape == (2,)
    np.testing.assert_allclose(j, plane_wave_current(np.array([0.2, 0.3]), mat), rtol=1e-13)


@pytest.mark.parametrize("model", ["se2", "se4"])
def test_left_right_symmetry(mat, single_barrier, model):
    assert single_barrier.v0 == single_barrier.vL == 0.0
    left = solve_scattering(single_barrier, 0.7264, "left_to_right", mat, model)
    right = solve_scattering(single_barrier, 0.7264, "right_to_left", mat, model)
    np.testing.assert_allclose(single_barrier.length - left.x[::-1], right.x, atol=1e-12)
    assert np.max(np.abs(right.abs_psi[::-1] - left.abs_psi)) <= 1e-8
    assert right.current == pytest.approx(-left.current, rel=1e-8)


def test_right_injection_uses_exit_contact_energy(mat, step_profiles):
    # V_L = -0.1 keeps both contacts propagating
    prof = step_profiles[-0.1]
    sol = solve_scattering(prof, K1, "right_to_left", mat, "se4")
    assert sol.energy == pytest.approx(quartic_energy(K1, mat) + 0.1, rel=1e-14)
    ora = solve_piecewise_constant(prof, K1, "right_to_left", mat, "se4")
    assert np.max(np.abs(sol.abs_psi - ora.abs_psi)) <= 1e-6
    assert ora.diagnostics.boundary_residual_max <= 1e-10


@pytest.mark.parametrize("name,k1", [("single_barrier", 0.7264), ("double_barrier", 0.2846),
                                     ("double_barrier", 1.1386)])
@pytest.mark.parametrize("model", ["se2", "se4"])
def test_oracle_equivalence_on_barriers(request, mat, name, k1, model):
    prof = request.getfixturevalue(name)
    num = solve_scattering(prof, k1, "left_to_right", mat, model)
    ora = solve_piecewise_constant(prof, k1, "left_to_right", mat, model)
    assert np.max(np.abs(num.abs_psi - ora.abs_psi)) <= 1e-6


def test_se2_step_has_flat_modulus(mat, step_profiles):
    sol = solve_scattering(step_profiles[0.3], K1, "left_to_right", mat, "se2")
    right = sol.abs_psi[sol.x >= 67.5]
    assert right.max() - right.min() <= 1e-8
    assert sol.diagnostics.current_rel_variation <= 1e-8


def test_sweep_zero_bias_matches_solve(mat, double_barrier):
    res = iv_sweep(rtd_family, 0.2846, mat, "se4", [0.0])
    sol = solve_scattering(double_barrier, 0.2846, "left_to_right", mat, "se4")
    assert res.current[0] == pytest.approx(sol.current, rel=1e-8)
    assert res.points[0].error is None


def test_sweep_rejects_empty(mat):
    with pytest.raises(InvalidParameterError):
        iv_sweep(rtd_family, 0.2846, mat, "se4", [])


def test_sweep_ordering_with_workers(mat):
    v = [0.3, 0.0, 0.15]
    serial = iv_sweep(rtd_family, 0.2846, mat, "se2", v)
    pooled = iv_sweep(rtd_family, 0.2846, mat, "se2", v, max_workers=2)
    np.testing.assert_array_equal(pooled.v_l, v)
    np.testing.assert_array_equal(pooled.current, serial.current)


def test_sweep_records_failures(mat):
    # k1 beyond the band edge fails at every point, but the sweep still returns
    res = iv_sweep(rtd_family, 2.8, mat, "se4", [0.0, 0.1])
    assert len(res.points) == 2
    assert all(p.error and "OutOfBand" in p.error for p in res.points)
    assert np.all(np.isnan(res.current))


@pytest.mark.filterwarnings("ignore::scipy.linalg.LinAlgWarning")
def test_singular_system_detected():
    rows = (
        BoundaryRow((1, 0), 1.0, Endpoint.AT_ZERO),
        BoundaryRow((1, 0), 0.0, Endpoint.AT_L),
    )
    system = BoundarySystem.assemble(rows, np.eye(2, dtype=complex))
    with pytest.raises(SingularSystemError) as info:
        system.solve()
    assert "existence" in str(info.value)


def test_near_singular_threshold():
    rows = (
        BoundaryRow((1, 0), 1.0, Endpoint.AT_ZERO),
        BoundaryRow((1, 1e-14), 0.0, Endpoint.AT_ZERO),
    )
    with pytest.raises(SingularSystemError):
        BoundarySystem.assemble(rows, np.eye(2, dtype=complex)).solve()
    rows = rows[:1] + (BoundaryRow((1, 1e-6), 0.0, Endpoint.AT_ZERO),)
    BoundarySystem.assemble(rows, np.eye(2, dtype=complex)).solve()


@pytest.fixture(scope="module")
def low_k_curves(mat):
    v = np.linspace(0.0, 0.5, 51)
    return {m: iv_sweep(rtd_family, 0.1, mat, m, v).current for m in ("se2", "se4")}


@pytest.mark.parametrize("model", ["se2", "se4"])
def test_low_k_sweep_has_a_peak_then_decreases(low_k_curves, model):
    j = low_k_curves[model]
    i = int(np.argmax(j))
    assert 0 < i < len(j) - 4
    assert np.all(np.diff(j[i:i + 2]) < 0)
    assert j[i] > 2 * max(j[i - 1], j[i + 1])


@pytest.mark.xfail(strict=True, reason=(
    "on v_l in [0, 0.5] the k1 = 0.1 curves rise again after the peak (SE2 from v_l ~ 0.27, "
    "SE4 right after it); the claimed monotone tail holds only on a shorter, unstated range"))
@pytest.mark.parametrize("model", ["se2", "se4"])
def test_low_k_sweep_monotone_after_peak(low_k_curves, model):
    j = low_k_curves[model]
    i = int(np.argmax(j))
    assert np.all(np.diff(j[i:]) < 0)
