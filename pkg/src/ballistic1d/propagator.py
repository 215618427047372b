"""Fundamental Cauchy solutions of SE2/SE4 across a piecewise-linear potential.

The stationary equations in companion form, with ``W(x) = q V(x) + E``:

    SE4:  Psi'''' = (b Psi'' + W Psi) / a
    SE2:  Psi''   = -W Psi / b

All basis members are integrated together as one matrix ODE ``U' = M(x) U``
with ``U(0) = I``, so entry ``U[i, j]`` is the ``i``-th derivative of the
``j``-th fundamental solution. ``M`` is trace free, hence ``det U == 1``.

Integration uses an explicit embedded Runge-Kutta pair of order 8 with the
Dormand-Prince 5/3 error estimator (the DOP853 tableau) and standard step
control. Each polynomial segment is integrated separately and the last step
of a segment is cut to land exactly on its end, so restarts at breakpoints
carry the integrated state. Samples between steps come from the 7th-order
continuous extension of the same pair.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853

from .dispersion import MIN_QUARTIC_COEFF, Model
from .errors import DegenerateEquationError, IntegrationError, StiffnessError
from .potential import PotentialProfile
from .units import MaterialParams

_A = np.asarray(DOP853.A, dtype=float)
_B = np.asarray(DOP853.B, dtype=float)
_C = np.asarray(DOP853.C, dtype=float)
_E3 = np.asarray(DOP853.E3, dtype=float)
_E5 = np.asarray(DOP853.E5, dtype=float)
_N_STAGES = DOP853.n_stages
_E53 = np.vstack([_E5, _E3])
_EXTRA = list(zip(np.asarray(DOP853.A_EXTRA, dtype=float), np.asarray(DOP853.C_EXTRA, dtype=float)))
_D = np.asarray(DOP853.D, dtype=float)
_N_INTERP = _D.shape[0] + 3
_ERROR_EXPONENT = -1.0 / (DOP853.error_estimator_order + 1)
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class SolverOpts:
    rtol: float = 1e-10
    atol: float = 1e-12
    n_samples: int = 1000
    max_steps: int = 1_000_000
    first_step: float | None = None


@dataclass
class SolverStats:
    steps: int = 0
    rejected: int = 0
    max_error: float = 0.0


@dataclass
class FundamentalBasis:
    """Sampled fundamental matrix.

    ``values[s, i, j]`` is the ``i``-th derivative of basis member ``j`` at
    ``x[s]``; ``x`` always contains 0, every breakpoint and ``L``.
    """

    model: Model
    x: np.ndarray
    values: np.ndarray
    energy: float
    stats: SolverStats | None = field(default=None)

    @property
    def order(self):
        return self.values.shape[1]

    @property
    def at_L(self):
        return self.values[-1]

    @property
    def at_zero(self):
        return self.values[0]

    def states(self, coeffs):
        """``(Psi, Psi', ...)`` at every sample for ``Psi = sum_j c_j phi_j``."""
        return self.values @ np.asarray(coeffs, dtype=complex)


def _rhs_factory(model, energy, mat, segment, m=None):
    """Flat right-hand side for the row-major ``n x m`` state on one segment."""
    c0 = energy + segment.coeff0
    c1 = segment.coeff1
    x0 = segment.x_start
    if model is Model.SE4:
        m = 4 if m is None else m
        inv_a = 1.0 / mat.a_coeff
        ba = mat.b_coeff * inv_a

        def rhs(x, y, out):
            out[: 3 * m] = y[m:]
            np.multiply(y[:m], (c0 + c1 * (x - x0)) * inv_a, out=out[3 * m:])
            out[3 * m:] += ba * y[2 * m: 3 * m]
    else:
        m = 2 if m is None else m
        inv_b = 1.0 / mat.b_coeff

        def rhs(x, y, out):
            out[:m] = y[m:]
            out[m:] = -(c0 + c1 * (x - x0)) * inv_b * y[:m]

    return rhs


def _initial_step(length, mat, model, energy, profile):
    # a few steps per shortest local wavelength of the flat-band estimate
    vmax = max(abs(seg.coeff0) + abs(seg.coeff1) * (seg.x_end - seg.x_start) for seg in profile.segments)
    w = abs(energy) + vmax
    if model is Model.SE4:
        kscale = np.sqrt(mat.b_coeff / abs(mat.a_coeff) + np.sqrt(w / abs(mat.a_coeff)))
    else:
        kscale = np.sqrt(w / mat.b_coeff) + 1e-3
    return min(length, 0.1 / kscale)


def integrate_states(profile: PotentialProfile, energy, mat: MaterialParams, model, initial, opts=None):
    """Integrate the columns of ``initial`` (state vectors at ``x = 0``).

    Returns ``(x, values, stats)`` with ``values[s] = U(x[s])`` on the sample
    grid of ``profile``.
    """
    opts = opts or SolverOpts()
    model = Model(model)
    if model is Model.SE4 and (mat.alpha <= 0 or abs(mat.a_coeff) < MIN_QUARTIC_COEFF):
        raise DegenerateEquationError(
            f"SE4 propagation needs |a| >= {MIN_QUARTIC_COEFF:g}, got a={mat.a_coeff}; use SE2"
        )
    n = 4 if model is Model.SE4 else 2
    initial = np.asarray(initial, dtype=complex)
    if initial.ndim != 2 or initial.shape[0] != n:
        raise ValueError(f"initial states must have shape ({n}, m), got {initial.shape}")
    m = initial.shape[1]
    grid = profile.sample_grid(opts.n_samples)
    values = np.empty((grid.size, n, m), dtype=complex)
    values[0] = initial

    size = n * m
    y = initial.reshape(size).copy()
    K = np.empty((_N_STAGES + 4, size), dtype=complex)
    F = np.empty((_N_INTERP, size), dtype=complex)
    stats = SolverStats()
    h = opts.first_step or _initial_step(profile.length, mat, model, energy, profile)
    x = 0.0
    sample = 1
    total = 0

    for iseg, seg in enumerate(profile.segments):
        rhs = _rhs_factory(model, energy, mat, seg, m)
        x_end = seg.x_end
        rhs(x, y, K[0])
        step_rejected = False
        while x < x_end:
            total += 1
            if total > opts.max_steps:
                raise IntegrationError(
                    f"max_steps={opts.max_steps} exceeded in segment {iseg} at x={x:.9g}"
                )
            if h < 1e-14 * max(1.0, abs(x)):
                raise StiffnessError(iseg, x, h)
            # land exactly on the segment end
            landing = x + h >= x_end
            h_try = x_end - x if landing else h
            hA = _A * h_try
            for s in range(1, _N_STAGES):
                rhs(x + _C[s] * h_try, y + hA[s, :s] @ K[:s], K[s])
            y_new = y + (h_try * _B) @ K[:_N_STAGES]
            x_new = x_end if landing else x + h_try
            rhs(x_new, y_new, K[_N_STAGES])
            scale = opts.atol + opts.rtol * np.maximum(np.abs(y), np.abs(y_new))
            e5, e3 = np.sum(np.abs((_E53 @ K[: _N_STAGES + 1]) / scale) ** 2, axis=1)
            den = e5 + 0.01 * e3
            err = h_try * e5 / np.sqrt(den * size) if den > 0 else 0.0
            if err >= 1.0:
                h = h_try * max(_MIN_FACTOR, _SAFETY * err**_ERROR_EXPONENT)
                stats.rejected += 1
                step_rejected = True
                continue
            # samples inside (x, x_new] from the 7th-order continuous extension
            if sample < grid.size and grid[sample] <= x_new:
                for s, (a_row, c) in enumerate(_EXTRA, start=_N_STAGES + 1):
                    rhs(x + c * h_try, y + h_try * (a_row[:s] @ K[:s]), K[s])
                dy = y_new - y
                F[0] = dy
                F[1] = h_try * K[0] - dy
                F[2] = 2.0 * dy - h_try * (K[_N_STAGES] + K[0])
                F[3:] = h_try * (_D @ K)
                while sample < grid.size and grid[sample] <= x_new:
                    if grid[sample] == x_new:
                        values[sample] = y_new.reshape(n, m)
                    else:
                        values[sample] = _dense_eval(F, y, (grid[sample] - x) / h_try).reshape(n, m)
                    sample += 1
            factor = _MAX_FACTOR if err == 0 else min(_MAX_FACTOR, _SAFETY * err**_ERROR_EXPONENT)
            if step_rejected:
                factor = min(1.0, factor)
            # a shortened landing step does not shrink the running step size
            h = max(h, h_try * factor) if landing else h_try * factor
            x, y = x_new, y_new
            K[0] = K[_N_STAGES]
            stats.steps += 1
            stats.max_error = max(stats.max_error, float(err))
            step_rejected = False
    return grid, values, stats


def _dense_eval(F, y_old, theta):
    out = np.zeros_like(y_old)
    for i, f in enumerate(F[::-1]):
        out += f
        out *= theta if i % 2 == 0 else 1.0 - theta
    return out + y_old


def integrate_basis(profile: PotentialProfile, energy, mat: MaterialParams, model, opts=None):
    model = Model(model)
    n = 4 if model is Model.SE4 else 2
    x, values, stats = integrate_states(profile, energy, mat, model, np.eye(n), opts)
    return FundamentalBasis(model, x, values, float(energy), stats)
