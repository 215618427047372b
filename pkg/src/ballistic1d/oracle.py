"""Closed-form scattering solutions for piecewise-constant potentials.

In a region of constant potential the fundamental solutions are sums of
exponentials ``exp(+-i k x)`` over the region roots. Each region maps its
entry state to exponential coefficients through the derivative (Vandermonde)
matrix, so the sampled basis carries no integration error. The same boundary
system as the numeric path is then applied.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dispersion import (
    Direction,
    Model,
    RootClass,
    branch_sqrt,
    contact_wave_numbers,
    region_roots,
)
from .errors import DynamicRangeError, UnsupportedProfileError
from .potential import PotentialProfile
from .propagator import FundamentalBasis
from .scattering import ScatteringSolution, injection_contacts, solve_with_basis
from .units import MaterialParams

MAX_EXPONENT = 300.0
_ZERO_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class RegionBasis:
    """Basis ``xi^p exp(lambda xi)`` in the local coordinate ``xi = x - x_start``."""

    exponents: tuple[complex, ...]
    powers: tuple[int, ...]

    def derivatives(self, xi, order):
        """Matrix ``G[i, n] = d^i/dxi^i`` of basis function ``n`` at ``xi``."""
        lam = np.asarray(self.exponents, dtype=complex)
        pw = np.asarray(self.powers)
        i = np.arange(order)[:, None]
        e = np.exp(lam * xi)[None, :]
        plain = lam[None, :] ** i
        # d^i (xi e^{lam xi}) = (lam^i xi + i lam^(i-1)) e^{lam xi}
        lam_im1 = np.where(i > 0, lam[None, :] ** np.maximum(i - 1, 0), 0.0)
        confluent = plain * xi + i * lam_im1
        return np.where(pw[None, :] == 1, confluent, plain) * e

    @property
    def vandermonde(self):
        return self.derivatives(0.0, len(self.exponents))


def _pair(ksq, scale):
    if abs(ksq) <= _ZERO_ROOT_TOL * scale:
        return [(0j, 0), (0j, 1)]
    k = branch_sqrt(ksq)
    return [(1j * k, 0), (-1j * k, 0)]


def region_basis(energy, v_region, mat: MaterialParams, model) -> RegionBasis:
    if Model(model) is Model.SE2:
        terms = _pair((energy + v_region) / mat.b_coeff, 1.0)
    else:
        roots = region_roots(energy, v_region, mat)
        if roots.classification is RootClass.DEGENERATE:
            ik = 1j * branch_sqrt(roots.ksq_small)
            terms = [(ik, 0), (ik, 1), (-ik, 0), (-ik, 1)]
        else:
            scale = max(abs(roots.ksq_small), abs(roots.ksq_large))
            a, b = _pair(roots.ksq_small, scale), _pair(roots.ksq_large, scale)
            # (i ka, i kb, -i ka, -i kb) column order
            terms = [a[0], b[0], a[1], b[1]]
    return RegionBasis(tuple(t[0] for t in terms), tuple(t[1] for t in terms))


def piecewise_constant_basis(profile: PotentialProfile, energy, mat: MaterialParams, model,
                             n_samples=1000) -> FundamentalBasis:
    model = Model(model)
    if not profile.is_piecewise_constant:
        raise UnsupportedProfileError("closed-form solver needs a piecewise-constant profile")
    order = 4 if model is Model.SE4 else 2
    grid = profile.sample_grid(n_samples)
    values = np.empty((grid.size, order, order), dtype=complex)
    state = np.eye(order, dtype=complex)
    values[0] = state
    for seg in profile.segments:
        rb = region_basis(energy, seg.coeff0, mat, model)
        width = seg.x_end - seg.x_start
        if max(abs(lam.real) for lam in rb.exponents) * width > MAX_EXPONENT:
            raise DynamicRangeError(
                f"exponential growth over [{seg.x_start}, {seg.x_end}] exceeds e^{MAX_EXPONENT:g}"
            )
        coeffs = np.linalg.solve(rb.vandermonde, state)
        idx = np.nonzero((grid > seg.x_start) & (grid <= seg.x_end))[0]
        for s in idx:
            values[s] = rb.derivatives(grid[s] - seg.x_start, order) @ coeffs
        state = rb.derivatives(width, order) @ coeffs
    return FundamentalBasis(model, grid, values, float(energy), None)


def solve_piecewise_constant(profile: PotentialProfile, k1, direction, mat: MaterialParams,
                             model=Model.SE4, n_samples=1000) -> ScatteringSolution:
    direction = Direction(direction)
    v_inj, v_exit = injection_contacts(profile, direction)
    waves = contact_wave_numbers(k1, v_inj, v_exit, mat, model, direction)
    basis = piecewise_constant_basis(profile, waves.energy, mat, model, n_samples)
    return solve_with_basis(basis, waves, profile.length, mat)
