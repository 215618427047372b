"""Boundary linear system, scattering solutions, probability current, I-V sweeps."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from . import tbc
from .dispersion import Direction, Model, WaveNumberSet, contact_wave_numbers
from .errors import Ballistic1DError, InvalidParameterError, SingularSystemError
from .potential import PotentialProfile
from .propagator import FundamentalBasis, SolverOpts, integrate_basis
from .units import MaterialParams

SINGULAR_TOL = 1e-12


@dataclass
class BoundarySystem:
    matrix: np.ndarray
    rhs: np.ndarray
    labels: tuple[str, ...]
    condition_estimate: float

    @classmethod
    def assemble(cls, rows, at_L):
        """Rows at ``x = 0`` act on ``c`` directly (``c_j = Psi^(j)(0)``);
        rows at ``x = L`` act on ``at_L @ c``. Rows at 0 come first."""
        ordered = sorted(rows, key=lambda r: r.endpoint is tbc.Endpoint.AT_L)
        mat = np.empty((len(ordered), at_L.shape[1]), dtype=complex)
        for i, row in enumerate(ordered):
            w = np.asarray(row.weights, dtype=complex)
            mat[i] = w if row.endpoint is tbc.Endpoint.AT_ZERO else w @ at_L
        rhs = np.array([row.rhs for row in ordered], dtype=complex)
        return cls(mat, rhs, tuple(r.label for r in ordered), float(np.abs(np.linalg.cond(mat, 1))))

    def solve(self, tol=SINGULAR_TOL):
        lu, piv = lu_factor(self.matrix, check_finite=True)
        det = np.prod(np.diag(lu)) * (-1) ** np.count_nonzero(piv != np.arange(piv.size))
        # Hadamard bound: |det A| <= product of row 2-norms
        threshold = tol * float(np.prod(np.linalg.norm(self.matrix, axis=1)))
        if not abs(det) > threshold:
            raise SingularSystemError(complex(det), threshold, self.condition_estimate)
        return lu_solve((lu, piv), self.rhs)

    def backward_error(self, coeffs):
        res = np.linalg.norm(self.matrix @ coeffs - self.rhs)
        return float(res / (np.linalg.norm(self.matrix) * np.linalg.norm(coeffs)))


@dataclass
class Diagnostics:
    current_rel_variation: float
    boundary_residual_max: float
    condition_estimate: float
    backward_error: float


@dataclass
class ScatteringSolution:
    model: Model
    waves: WaveNumberSet
    length: float
    coeffs: np.ndarray
    scattering: tbc.ScatteringCoefficients
    x: np.ndarray
    states: np.ndarray  # states[s, i] = Psi^(i)(x[s])
    j_local: np.ndarray
    diagnostics: Diagnostics
    system: BoundarySystem
    basis: FundamentalBasis = field(repr=False)

    @property
    def psi(self):
        return self.states[:, 0]

    @property
    def abs_psi(self):
        return np.abs(self.states[:, 0])

    @property
    def current(self):
        """Current at ``x = 0``."""
        return float(self.j_local[0])

    @property
    def energy(self):
        return self.waves.energy


def probability_current(state, mat: MaterialParams, model=Model.SE4):
    """``Im(hbar/m* conj(Psi) Psi' + alpha hbar^3/(2 m*^2) (conj(Psi) Psi''' - conj(Psi') Psi''))``.

    ``state`` has the derivatives along its last axis; SE2 keeps only the
    first term.
    """
    state = np.asarray(state, dtype=complex)
    psi, dpsi = state[..., 0], state[..., 1]
    j = (mat.hbar / mat.m_star) * np.imag(np.conj(psi) * dpsi)
    if Model(model) is Model.SE4:
        coef = mat.alpha * mat.hbar**3 / (2.0 * mat.m_star**2)
        j = j + coef * np.imag(np.conj(psi) * state[..., 3] - np.conj(dpsi) * state[..., 2])
    return j


def boundary_rows(waves: WaveNumberSet):
    if waves.model is Model.SE2:
        return tbc.se2_rows(waves.k1, waves.k3, waves.direction)
    return (
        *tbc.injection_rows(waves.k1, waves.k2, waves.degenerate_injection, waves.direction),
        *tbc.outgoing_rows(waves.k3, waves.k4, waves.degenerate_exit, waves.direction),
    )


def _endpoint_states(waves, state0, stateL):
    """``(injection state, exit state, sign)``; the sign maps x-derivatives to the
    lead coordinate that points away from the injection contact."""
    if waves.direction is Direction.LEFT_TO_RIGHT:
        return state0, stateL, 1.0
    return stateL, state0, -1.0


def extract_coefficients(waves: WaveNumberSet, state0, stateL, length):
    inj, out, sign = _endpoint_states(waves, state0, stateL)
    if waves.model is Model.SE2:
        r = inj[0] - 1.0
        tau = complex(out[0])
        t, log_t = tbc.scaled_coefficient(tau, waves.k3, length)
        return tbc.ScatteringCoefficients(r, 0j, t, 0j, tau, 0j, log_t, None)
    r1, r2 = tbc.reflection_coefficients(
        inj[0], sign * inj[1], waves.k1, waves.k2, waves.degenerate_injection
    )
    tau1, tau2 = tbc.transmission_amplitudes(
        out[0], sign * out[1], waves.k3, waves.k4, waves.degenerate_exit
    )
    t1, log_t1 = tbc.scaled_coefficient(tau1, waves.k3, length)
    t2, log_t2 = tbc.scaled_coefficient(tau2, waves.k4, length)
    return tbc.ScatteringCoefficients(
        complex(r1), complex(r2), t1, t2, complex(tau1), complex(tau2), log_t1, log_t2,
        waves.degenerate_injection, waves.degenerate_exit,
    )


def _lead_states(waves, coeffs: tbc.ScatteringCoefficients, order):
    """Derivatives of the lead ansatz at the injection and exit endpoints."""
    sign = 1.0 if waves.direction is Direction.LEFT_TO_RIGHT else -1.0
    n = np.arange(order)
    ik = lambda k: (sign * 1j * k) ** n  # noqa: E731
    if waves.model is Model.SE2:
        inj = ik(waves.k1) + coeffs.r1 * ik(-waves.k1)
        out = coeffs.tau1 * ik(waves.k3)
        return inj, out
    inj = ik(waves.k1) + coeffs.r1 * ik(-waves.k1)
    if not coeffs.degenerate_reflection:
        inj = inj + coeffs.r2 * ik(-waves.k2)
    out = coeffs.tau1 * ik(waves.k3)
    if not coeffs.degenerate_transmission:
        out = out + coeffs.tau2 * ik(waves.k4)
    return inj, out


def residual_check(solution: ScatteringSolution, coeffs=None):
    """Largest mismatch over all lead/device continuity conditions.

    The reflection and transmission coefficients are re-extracted from the
    device state, the lead waves rebuilt from them, and every derivative
    matched at both endpoints. ``coeffs`` overrides the solved ``c`` vector.
    """
    c = solution.coeffs if coeffs is None else np.asarray(coeffs, dtype=complex)
    state0 = solution.basis.at_zero @ c
    stateL = solution.basis.at_L @ c
    sc = extract_coefficients(solution.waves, state0, stateL, solution.length)
    lead_inj, lead_out = _lead_states(solution.waves, sc, state0.size)
    dev_inj, dev_out, _ = _endpoint_states(solution.waves, state0, stateL)
    return float(max(np.max(np.abs(lead_inj - dev_inj)), np.max(np.abs(lead_out - dev_out))))


def solve_with_basis(basis: FundamentalBasis, waves: WaveNumberSet, length, mat: MaterialParams):
    """Boundary system, coefficients, samples and current from a given basis."""
    system = BoundarySystem.assemble(boundary_rows(waves), basis.at_L)
    coeffs = system.solve()
    states = basis.states(coeffs)
    j_local = probability_current(states, mat, waves.model)
    j0 = j_local[0]
    variation = float(np.max(np.abs(j_local - j0)) / abs(j0)) if j0 != 0 else math.inf
    sc = extract_coefficients(waves, states[0], states[-1], length)
    sol = ScatteringSolution(
        model=waves.model, waves=waves, length=float(length), coeffs=coeffs, scattering=sc,
        x=basis.x, states=states, j_local=j_local,
        diagnostics=Diagnostics(variation, math.nan, system.condition_estimate,
                                system.backward_error(coeffs)),
        system=system, basis=basis,
    )
    sol.diagnostics.boundary_residual_max = residual_check(sol)
    return sol


def injection_contacts(profile: PotentialProfile, direction):
    if Direction(direction) is Direction.LEFT_TO_RIGHT:
        return profile.v0, profile.vL
    return profile.vL, profile.v0


def solve_scattering(profile: PotentialProfile, k1, direction, mat: MaterialParams,
                     model=Model.SE4, opts: SolverOpts | None = None):
    """Scattering state for a unit plane wave injected with wave number ``k1``.

    For right injection the energy is referenced to ``V(L)``.
    """
    v_inj, v_exit = injection_contacts(profile, direction)
    waves = contact_wave_numbers(k1, v_inj, v_exit, mat, model, direction)
    basis = integrate_basis(profile, waves.energy, mat, model, opts)
    return solve_with_basis(basis, waves, profile.length, mat)


# I-V sweeps -----------------------------------------------------------------


@dataclass
class SweepPoint:
    v_l: float
    current: float
    current_rel_variation: float
    condition_estimate: float
    error: str | None = None


@dataclass
class SweepResult:
    model: Model
    k1: float
    points: list[SweepPoint]

    @property
    def v_l(self):
        return np.array([p.v_l for p in self.points])

    @property
    def current(self):
        return np.array([p.current for p in self.points])


def _sweep_point(args):
    family, v_l, k1, mat, model, opts, direction = args
    try:
        sol = solve_scattering(family(v_l), k1, direction, mat, model, opts)
    except Ballistic1DError as exc:
        return SweepPoint(float(v_l), math.nan, math.nan, math.nan, f"{type(exc).__name__}: {exc}")
    d = sol.diagnostics
    return SweepPoint(float(v_l), sol.current, d.current_rel_variation, d.condition_estimate)


def iv_sweep(profile_family, k1, mat: MaterialParams, model, vL_list, opts=None,
             direction=Direction.LEFT_TO_RIGHT, max_workers=None):
    """Current versus exit bias; failed points are recorded, not raised.

    ``profile_family(v_l)`` builds the profile for each bias. With
    ``max_workers > 1`` points run in worker processes, which needs a
    picklable family (e.g. ``functools.partial(rtd_family, ...)``).
    """
    vL_list = [float(v) for v in vL_list]
    if not vL_list:
        raise InvalidParameterError("vL_list is empty")
    model = Model(model)
    jobs = [(profile_family, v, k1, mat, model, opts, direction) for v in vL_list]
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            points = list(pool.map(_sweep_point, jobs))
    else:
        points = [_sweep_point(job) for job in jobs]
    return SweepResult(model, float(k1), points)
