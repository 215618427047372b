"""Kane and truncated-quartic dispersion, contact wave numbers, plane-wave current.

The truncated band is ``E(k) = b k^2 + a k^4`` with ``a <= 0``. In a region
with constant potential ``V`` and total energy ``E`` the plane waves
``exp(+-i k x)`` solve the fourth-order equation when

    a k^4 + b k^2 - W = 0,    W = q V + E,

so each region has two values of ``k^2``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateEquationError,
    InconsistentInjectionError,
    OutOfBandError,
)
from .units import MaterialParams

DEGENERACY_TOL = 1e-12
SNAP_TOL = 1e-12
ROOT_MATCH_TOL = 1e-8
# below this |a| the extra branch becomes too stiff for SE4 machinery
MIN_QUARTIC_COEFF = 1e-6


class Model(str, enum.Enum):
    SE2 = "se2"
    SE4 = "se4"


class Direction(str, enum.Enum):
    LEFT_TO_RIGHT = "left_to_right"  # p > 0, injected at x = 0
    RIGHT_TO_LEFT = "right_to_left"  # p < 0, injected at x = L


class RootClass(str, enum.Enum):
    TWO_PROPAGATING = "two_propagating"
    ONE_PROPAGATING_ONE_EVANESCENT = "one_propagating_one_evanescent"
    COMPLEX_PAIR = "complex_pair"
    DEGENERATE = "degenerate"


@dataclass(frozen=True)
class RegionRoots:
    ksq_small: complex
    ksq_large: complex
    discriminant: float
    classification: RootClass
    kinetic: float  # W = qV + E


@dataclass(frozen=True)
class WaveNumberSet:
    """Contact wave numbers for one scattering problem.

    ``k1``/``k2`` live at the injection contact and ``k3``/``k4`` at the exit
    contact, whichever side those are for the given direction. For SE2 only
    ``k1`` and ``k3`` are used and ``k2``/``k4`` are ``None``.
    """

    k1: float
    k2: complex | None
    k3: complex
    k4: complex | None
    energy: float
    degenerate_injection: bool
    degenerate_exit: bool
    direction: Direction
    model: Model

    # aliases named after the contact, valid for left injection
    @property
    def degenerate_left(self):
        return self.degenerate_injection

    @property
    def degenerate_right(self):
        return self.degenerate_exit


def _require_quartic(mat: MaterialParams):
    if mat.alpha <= 0 or abs(mat.a_coeff) < MIN_QUARTIC_COEFF:
        raise DegenerateEquationError(
            f"fourth-order model needs alpha > 0 with |a| >= {MIN_QUARTIC_COEFF:g} "
            f"(alpha={mat.alpha}, a={mat.a_coeff}); use SE2"
        )


def branch_sqrt(ksq):
    """Square root of ``k^2`` obeying the lead branch rule.

    Real positive ``k^2`` gives a positive real ``k``; anything else gets the
    sign with ``Im k > 0`` so that ``exp(i k x)`` decays as ``x -> +inf`` and
    ``exp(-i k x)`` decays as ``x -> -inf``.
    """
    ksq = complex(ksq)
    k = cmath.sqrt(ksq)
    if abs(k.imag) <= SNAP_TOL * abs(k):
        return complex(abs(k.real), 0.0) if ksq.real >= 0 else complex(0.0, abs(k.imag))
    if abs(k.real) <= SNAP_TOL * abs(k):
        return complex(0.0, abs(k.imag))
    return k if k.imag > 0 else -k


def parabolic_energy(k, mat: MaterialParams):
    out = mat.b_coeff * np.asarray(k, dtype=float) ** 2
    return float(out) if np.ndim(out) == 0 else out


def kane_energy(k, mat: MaterialParams):
    """Exact Kane branch ``eps (1 + alpha eps) = gamma^2`` written in the
    cancellation-free form ``2 gamma^2 / (1 + sqrt(1 + 4 alpha gamma^2))``."""
    gamma_sq = mat.b_coeff * np.asarray(k, dtype=float) ** 2
    if mat.alpha == 0:
        out = gamma_sq
    else:
        out = 2.0 * gamma_sq / (1.0 + np.sqrt(1.0 + 4.0 * mat.alpha * gamma_sq))
    return float(out) if np.ndim(out) == 0 else out


def quartic_energy(k, mat: MaterialParams):
    k = np.asarray(k, dtype=float)
    ksq = k * k
    out = ksq * (mat.b_coeff + mat.a_coeff * ksq)
    return float(out) if np.ndim(out) == 0 else out


def plane_wave_current(k, mat: MaterialParams):
    """Current of ``exp(i k x)``: ``hbar k / m* - alpha hbar^3 k^3 / m*^2``,
    which equals the group velocity of the truncated band."""
    k = np.asarray(k, dtype=float)
    h, m = mat.hbar, mat.m_star
    out = h * k / m - mat.alpha * h**3 * k**3 / m**2
    return float(out) if np.ndim(out) == 0 else out


def injection_energy(k1, v_contact, mat: MaterialParams, model=Model.SE4):
    model = Model(model)
    if not k1 > 0:
        raise OutOfBandError(f"k1 must be positive, got {k1}")
    if model is Model.SE2:
        return mat.b_coeff * k1 * k1 - v_contact
    _require_quartic(mat)
    if k1 >= mat.k_max:
        raise OutOfBandError(f"k1={k1} outside the admissible interval (0, {mat.k_max:.6g})")
    return quartic_energy(k1, mat) - v_contact


def region_roots(energy, v_region, mat: MaterialParams, tol_deg=DEGENERACY_TOL):
    """Both roots ``k^2`` of ``a k^4 + b k^2 - W = 0``.

    The small root is formed as ``2W / (b + sqrt(D))`` (same value as the
    textbook quadratic formula, no cancellation when ``W`` is small).
    """
    _require_quartic(mat)
    a, b = mat.a_coeff, mat.b_coeff
    w = energy + v_region
    disc = b * b + 4.0 * a * w
    if abs(disc) <= tol_deg * b * b:
        ksq = complex(-b / (2.0 * a))
        return RegionRoots(ksq, ksq, disc, RootClass.DEGENERATE, w)
    sqrt_d = cmath.sqrt(disc)
    ksq_large = (-b - sqrt_d) / (2.0 * a)
    ksq_small = 2.0 * w / (b + sqrt_d)
    if disc < 0:
        cls = RootClass.COMPLEX_PAIR
    elif w < 0:
        cls = RootClass.ONE_PROPAGATING_ONE_EVANESCENT
    else:
        cls = RootClass.TWO_PROPAGATING
    if disc > 0:
        ksq_small, ksq_large = complex(ksq_small.real), complex(ksq_large.real)
    return RegionRoots(complex(ksq_small), complex(ksq_large), disc, cls, w)


def companion_wavenumber(k1, roots: RegionRoots):
    """Return ``(k2, degenerate)``: the injection-contact root other than ``k1``."""
    if roots.classification is RootClass.DEGENERATE:
        # D = (b + 2 a k^2)^2, so |D| <= tol b^2 admits |k^2 - k_c^2| <= sqrt(tol) k_c^2
        band = 2.0 * math.sqrt(DEGENERACY_TOL) + ROOT_MATCH_TOL
        if abs(k1 * k1 - roots.ksq_small) > band * abs(roots.ksq_small):
            raise InconsistentInjectionError(f"k1={k1} is not the double root")
        return complex(k1), True
    ksq1 = k1 * k1
    for own, other in ((roots.ksq_small, roots.ksq_large), (roots.ksq_large, roots.ksq_small)):
        if abs(ksq1 - own) <= ROOT_MATCH_TOL * max(abs(own), abs(ksq1)):
            return branch_sqrt(other), False
    raise InconsistentInjectionError(
        f"k1^2={ksq1} matches neither root ({roots.ksq_small}, {roots.ksq_large})"
    )


def transmitted_pair(energy, v_exit, mat: MaterialParams, side=None):
    """Exit-contact wave numbers ``(k3, k4)``.

    ``k3`` comes from the small root (the branch that survives the parabolic
    limit), ``k4`` from the extra quartic branch. Non-real values have
    ``Im k > 0`` on either side, because the left-exit ansatz uses
    ``exp(-i k (x - L))``.
    """
    roots = region_roots(energy, v_exit, mat)
    return branch_sqrt(roots.ksq_small), branch_sqrt(roots.ksq_large)


def parabolic_wavenumber(energy, v_region, mat: MaterialParams):
    return branch_sqrt((energy + v_region) / mat.b_coeff)


def contact_wave_numbers(k1, v_injection, v_exit, mat: MaterialParams, model, direction):
    model, direction = Model(model), Direction(direction)
    energy = injection_energy(k1, v_injection, mat, model)
    if model is Model.SE2:
        k3 = parabolic_wavenumber(energy, v_exit, mat)
        return WaveNumberSet(float(k1), None, k3, None, energy, False, False, direction, model)
    inj = region_roots(energy, v_injection, mat)
    k2, deg_inj = companion_wavenumber(k1, inj)
    out = region_roots(energy, v_exit, mat)
    k3, k4 = branch_sqrt(out.ksq_small), branch_sqrt(out.ksq_large)
    deg_exit = out.classification is RootClass.DEGENERATE
    return WaveNumberSet(float(k1), k2, k3, k4, energy, deg_inj, deg_exit, direction, model)


def quartic_residual(k, energy, v_region, mat: MaterialParams):
    """Relative residual of ``a k^4 + b k^2 - W`` (used by tests and checks)."""
    a, b = mat.a_coeff, mat.b_coeff
    w = energy + v_region
    ksq = complex(k) ** 2
    val = a * ksq * ksq + b * ksq - w
    scale = abs(a * ksq * ksq) + abs(b * ksq) + abs(w)
    return abs(val) / scale if scale else 0.0

