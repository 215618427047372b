import numpy as np
import pytest

from ballistic1d import (
    Custom,
    DynamicRangeError,
    PotentialProfile,
    Segment,
    UnsupportedProfileError,
    build_profile,
    quartic_energy,
    residual_check,
    solve_piecewise_constant,
    solve_scattering,
)
from ballistic1d.dispersion import RootClass, region_roots
from ballistic1d.oracle import piecewise_constant_basis, region_basis

K1 = 0.4558
XS = [0.0, 10.0, 40.0, 67.5, 80.0, 100.0, 135.0]

# tests/derive_oracles.py, 40-digit whole-line matching at x = L/2
FROZEN = {
    ("se4", 0.3): dict(
        abs_psi=[0.94909114847975139, 1.1888626430155097, 0.66007769364489024, 0.69539445613246566,
                 0.74630045830953984, 0.79291692649166639, 0.79545635532506303],
        r=(-0.087463122087837614 + 0.31365499218681321j, -0.019528795910107735 + 0.0077646301165320661j),
        t=(0.42405266606250604 + 0.61353649463554592j, 0.035742523431644106 + 0.035569965773739706j),
    ),
    ("se4", -0.1): dict(
        abs_psi=[1.237499318637058, 0.85405854657855042, 1.4911762469279644, 1.4610636692940563,
                 1.4606666747302628, 1.4584305881940416, 1.4505268430611511],
        r=(0.12870029920607832 - 0.4615372785501835j, 0.016802449299211269 - 0.00668063737573461j),
        t=(0.75072033504688677 + 1.2305128873595446j, 0.019574546802672236 - 0.0014181320874689937j),
    ),
    ("se2", 0.3): dict(
        abs_psi=[0.96397171938161788, 1.1954871726848399, 0.69501496933714571] + [0.69412063614502788] * 4,
        r=(-0.082160354732384888 + 0.29463852657548216j,),
        t=(-0.27815782631703501 - 0.63594943288044559j,),
    ),
    ("se2", -0.1): dict(
        abs_psi=[1.1940253310723229, 0.8434892074577951, 1.4363594870938692] + [1.436977170662979] * 4,
        r=(0.11737372178087407 - 0.4209185872777873j,),
        t=(1.4233761002326926 - 0.19724063043133909j,),
    ),
}


@pytest.mark.parametrize("model,v_l", list(FROZEN))
def test_step_against_high_precision(mat, step_profiles, model, v_l):
    sol = solve_piecewise_constant(step_profiles[v_l], K1, "left_to_right", mat, model)
    want = FROZEN[(model, v_l)]
    idx = [int(np.argmin(np.abs(sol.x - x))) for x in XS]
    np.testing.assert_allclose(sol.x[idx], XS, atol=1e-12)
    np.testing.assert_allclose(sol.abs_psi[idx], want["abs_psi"], rtol=0, atol=1e-10)
    sc = sol.scattering
    got_r = (sc.r1, sc.r2)[: len(want["r"])]
    got_t = (sc.t1, sc.t2)[: len(want["t"])]
    assert np.max(np.abs(np.subtract(got_r, want["r"]))) <= 1e-10
    assert np.max(np.abs(np.subtract(got_t, want["t"]))) <= 1e-10


def test_flat_is_exact_plane_wave(mat):
    flat = build_profile(Custom((Segment(0.0, 135.0, 0.0),)))
    sol = solve_piecewise_constant(flat, K1, "left_to_right", mat, "se4")
    assert np.max(np.abs(sol.psi - np.exp(1j * K1 * sol.x))) <= 1e-12
    sc = sol.scattering
    assert max(abs(sc.r1), abs(sc.r2), abs(sc.t2), abs(sc.t1 - 1)) <= 1e-12


def test_se4_step_oscillates_se2_does_not(mat, step_profiles):
    for v_l in (-0.1, 0.3):
        prof = step_profiles[v_l]
        se2 = solve_piecewise_constant(prof, K1, "left_to_right", mat, "se2")
        right = se2.abs_psi[se2.x >= 67.5]
        assert right.max() - right.min() <= 1e-12
        se4 = solve_piecewise_constant(prof, K1, "left_to_right", mat, "se4")
        right = se4.abs_psi[se4.x >= 67.5]
        assert right.max() - right.min() > 1e-4


def _random_profiles(n, seed):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        length = rng.uniform(10.0, 60.0)
        cuts = np.sort(rng.uniform(0.0, length, 3))
        xs = [0.0, *cuts, length]
        vs = [0.0, *rng.uniform(-0.4, 0.4, 3)]
        segs = tuple(Segment(float(a), float(b), float(v)) for a, b, v in zip(xs, xs[1:], vs))
        yield PotentialProfile(float(length), segs), rng.uniform(0.1, 2.4)


def test_region_equation_residual(mat):
    # a Psi'''' - b Psi'' - W Psi = 0 for every region solution, up to rounding
    for prof, k1 in _random_profiles(20, 3):
        e = quartic_energy(k1, mat)
        basis = piecewise_constant_basis(prof, e, mat, "se4")
        for seg in prof.segments:
            rb = region_basis(e, seg.coeff0, mat, "se4")
            start = basis.values[np.searchsorted(basis.x, seg.x_start)]
            coeffs = np.linalg.solve(rb.vandermonde, start)
            for xi in np.linspace(0.0, seg.x_end - seg.x_start, 5):
                d = rb.derivatives(xi, 5) @ coeffs
                w = e + seg.coeff0
                res = mat.a_coeff * d[4] - mat.b_coeff * d[2] - w * d[0]
                scale = abs(mat.a_coeff) * np.max(np.abs(d[4])) + mat.b_coeff * np.max(np.abs(d[2]))
                assert np.max(np.abs(res)) <= 1e-10 * scale


def test_interface_continuity(mat):
    for prof, k1 in _random_profiles(20, 4):
        e = quartic_energy(k1, mat)
        basis = piecewise_constant_basis(prof, e, mat, "se4")
        for left, right in zip(prof.segments, prof.segments[1:]):
            rb_l = region_basis(e, left.coeff0, mat, "se4")
            rb_r = region_basis(e, right.coeff0, mat, "se4")
            s0 = basis.values[np.searchsorted(basis.x, left.x_start)]
            from_left = rb_l.derivatives(left.x_end - left.x_start, 4) @ np.linalg.solve(rb_l.vandermonde, s0)
            from_right = rb_r.vandermonde @ np.linalg.solve(rb_r.vandermonde, from_left)
            assert np.max(np.abs(from_left - from_right)) <= 1e-10 * max(1.0, np.max(np.abs(from_left)))


def test_under_barrier_exit_residual(mat):
    prof = build_profile(Custom((Segment(0.0, 40.0, 0.0), Segment(40.0, 46.0, -0.3))))
    sol = solve_piecewise_constant(prof, 0.2, "left_to_right", mat, "se4")
    assert sol.waves.k3.imag > 0
    assert residual_check(sol) <= 1e-9


def test_confluent_region_basis(mat):
    e = quartic_energy(K1, mat)
    v = mat.e_max - e
    assert region_roots(e, v, mat).classification is RootClass.DEGENERATE
    rb = region_basis(e, v, mat, "se4")
    assert sorted(rb.powers) == [0, 0, 1, 1]
    assert abs(np.linalg.det(rb.vandermonde)) > 1e-6
    prof = build_profile(Custom((Segment(0.0, 20.0, 0.0), Segment(20.0, 30.0, v), Segment(30.0, 50.0, 0.0))))
    ora = solve_piecewise_constant(prof, K1, "left_to_right", mat, "se4")
    num = solve_scattering(prof, K1, "left_to_right", mat, "se4")
    assert np.max(np.abs(ora.abs_psi - num.abs_psi)) <= 1e-6
    assert residual_check(ora) <= 1e-9


def test_dynamic_range_guard(mat):
    prof = build_profile(Custom((Segment(0.0, 10.0, 0.0), Segment(10.0, 510.0, -0.4), Segment(510.0, 520.0, 0.0))))
    with pytest.raises(DynamicRangeError):
        solve_piecewise_constant(prof, 0.2, "left_to_right", mat, "se4")


def test_rejects_sloped_segments(mat, rtd):
    with pytest.raises(UnsupportedProfileError):
        solve_piecewise_constant(rtd, 0.2846, "left_to_right", mat, "se4")


def test_double_barrier_reference(mat, double_barrier):
    ora = solve_piecewise_constant(double_barrier, 0.2846, "left_to_right", mat, "se4")
    num = solve_scattering(double_barrier, 0.2846, "left_to_right", mat, "se4")
    assert np.max(np.abs(ora.abs_psi - num.abs_psi)) <= 1e-6
    assert ora.diagnostics.current_rel_variation <= 1e-10
