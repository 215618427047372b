"""Transparent boundary rows and reflection/transmission extraction.

Each boundary condition is a linear relation

    w0 Psi + w1 Psi' + w2 Psi'' + w3 Psi''' = rhs

at one endpoint. For left injection (p > 0) the lead ansatz is

    x < 0:  exp(i k1 x) + r1 exp(-i k1 x) + r2 exp(-i k2 x)
    x > L:  t1 exp(i k3 x) + t2 exp(i k4 x)

and for right injection (p < 0) it is its mirror image about the device,

    x > L:  exp(-i k1 (x-L)) + r1 exp(i k1 (x-L)) + r2 exp(i k2 (x-L))
    x < 0:  t1 exp(-i k3 (x-L)) + t2 exp(-i k4 (x-L)),

so right-injection rows are the left-injection rows with the weights of the
odd derivatives negated.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

from .dispersion import Direction
from .errors import ContractError

# |k1 - k2| / |k1| above this contradicts a degenerate flag
DEGENERATE_MATCH_TOL = 1e-6
# |k1 - k2| / |k1| below this contradicts a non-degenerate flag
DISTINCT_TOL = 1e-14
# largest exponent passed to exp() when forming raw transmission coefficients
_MAX_EXP = 700.0


class Endpoint(str, enum.Enum):
    AT_ZERO = "at_zero"
    AT_L = "at_l"


@dataclass(frozen=True)
class BoundaryRow:
    weights: tuple[complex, ...]
    rhs: complex
    endpoint: Endpoint
    label: str = ""

    def residual(self, state):
        """``sum_i w_i Psi^(i) - rhs`` for the boundary state ``(Psi, Psi', ...)``."""
        return sum(w * s for w, s in zip(self.weights, state)) - self.rhs


@dataclass(frozen=True)
class ScatteringCoefficients:
    """Reflection and transmission coefficients.

    ``tau1``/``tau2`` are the transmitted amplitudes at the exit endpoint
    (``t_j exp(i k_j L)``), always finite. ``log_t1``/``log_t2`` hold the
    natural logarithm of ``t1``/``t2`` so strongly evanescent branches stay
    representable; ``t1``/``t2`` themselves become ``inf`` on overflow. In a
    degenerate case only the sum is defined: it is stored in ``r1`` (or
    ``t1``) and the partner is 0.
    """

    r1: complex
    r2: complex
    t1: complex
    t2: complex
    tau1: complex
    tau2: complex
    log_t1: complex | None
    log_t2: complex | None
    degenerate_reflection: bool = False
    degenerate_transmission: bool = False


def _check_flag(ka, kb, degenerate, names):
    rel = abs(ka - kb) / max(abs(ka), abs(kb))
    if degenerate and rel > DEGENERATE_MATCH_TOL:
        raise ContractError(f"degenerate flag set but {names} differ (rel {rel:.3e})")
    if not degenerate and rel <= DISTINCT_TOL:
        raise ContractError(f"{names} coincide; use the degenerate branch")


def _mirror(weights, direction):
    if Direction(direction) is Direction.LEFT_TO_RIGHT:
        return tuple(complex(w) for w in weights)
    return tuple(complex(-w if i % 2 else w) for i, w in enumerate(weights))


def injection_rows(k1, k2, degenerate, direction):
    """Two rows at the injection endpoint carrying the source terms."""
    direction = Direction(direction)
    _check_flag(k1, k2, degenerate, "k1 and k2")
    endpoint = Endpoint.AT_ZERO if direction is Direction.LEFT_TO_RIGHT else Endpoint.AT_L
    tag = "L" if direction is Direction.LEFT_TO_RIGHT else "R"
    j = 1j
    if degenerate:
        rows = (
            ((j * k1, 1, 0, 0), 2j * k1, f"inj{tag}-deg1"),
            ((0, 0, j * k1, 1), -2j * k1**3, f"inj{tag}-deg2"),
        )
    else:
        s = k1 * k1 + k1 * k2 + k2 * k2
        p = k1 * k2 * (k1 + k2)
        rows = (
            ((-j * k1 * k2, -(k1 + k2), j, 0), -2j * k1 * (k1 + k2), f"inj{tag}-1"),
            ((-p, j * s, 0, j), -2.0 * p, f"inj{tag}-2"),
        )
    return tuple(BoundaryRow(_mirror(w, direction), complex(rhs), endpoint, lab) for w, rhs, lab in rows)


def outgoing_rows(k3, k4, degenerate, direction):
    """Two homogeneous rows at the exit endpoint (outgoing or decaying waves only)."""
    direction = Direction(direction)
    _check_flag(k3, k4, degenerate, "k3 and k4")
    j = 1j
    if direction is Direction.LEFT_TO_RIGHT:
        endpoint = Endpoint.AT_L
        if degenerate:
            w = ((-j * k3, 1, 0, 0), (0, 0, -j * k3, 1))
        else:
            s = k3 * k3 + k3 * k4 + k4 * k4
            w = ((-j * k3 * k4, k3 + k4, j, 0), (-j * k3 * k4 * (k3 + k4), s, 0, 1))
    else:
        endpoint = Endpoint.AT_ZERO
        if degenerate:
            w = ((j * k3, 1, 0, 0), (0, 0, j * k3, 1))
        else:
            s = k3 * k3 + k3 * k4 + k4 * k4
            w = ((-j * k3 * k4, -(k3 + k4), j, 0), (j * k3 * k4 * (k3 + k4), s, 0, 1))
    suffix = "-deg" if degenerate else "-"
    return tuple(
        BoundaryRow(tuple(complex(x) for x in wi), 0j, endpoint, f"out{suffix}{n + 1}")
        for n, wi in enumerate(w)
    )


def se2_rows(k1, k_exit, direction):
    """Classical two-row transparent boundary conditions over ``(Psi, Psi')``."""
    direction = Direction(direction)
    j = 1j
    if direction is Direction.LEFT_TO_RIGHT:
        inj = BoundaryRow((j * k1, 1 + 0j), 2j * k1, Endpoint.AT_ZERO, "se2-inj")
        out = BoundaryRow((-j * k_exit, 1 + 0j), 0j, Endpoint.AT_L, "se2-out")
    else:
        inj = BoundaryRow((j * k1, -1 + 0j), 2j * k1, Endpoint.AT_L, "se2-inj")
        out = BoundaryRow((j * k_exit, 1 + 0j), 0j, Endpoint.AT_ZERO, "se2-out")
    return inj, out


def reflection_coefficients(psi0, dpsi0, k1, k2, degenerate=False):
    """``(r1, r2)`` from ``Psi`` and ``Psi'`` at the injection endpoint.

    For right injection pass ``-Psi'(L)`` as ``dpsi0``. With ``degenerate``
    the single combination ``r1 + r2 = Psi - 1`` is returned as ``(sum, 0)``.
    """
    if degenerate:
        return psi0 - 1.0, 0j
    if k1 == k2:
        raise ContractError("k1 == k2 requires the degenerate branch")
    den = 1j * (k2 - k1)
    r1 = (dpsi0 + 1j * k2 * psi0 - 1j * k2 - 1j * k1) / den
    r2 = (-dpsi0 - 1j * k1 * psi0 + 2j * k1) / den
    return r1, r2


def transmission_amplitudes(psiL, dpsiL, k3, k4, degenerate=False):
    """Transmitted amplitudes ``t_j exp(i k_j L)`` at the exit endpoint.

    For right injection pass ``Psi(0)`` and ``-Psi'(0)``.
    """
    if degenerate:
        return complex(psiL), 0j
    if k3 == k4:
        raise ContractError("k3 == k4 requires the degenerate branch")
    den = 1j * (k4 - k3)
    return (1j * k4 * psiL - dpsiL) / den, (dpsiL - 1j * k3 * psiL) / den


def scaled_coefficient(tau, k, length):
    """``(t, log t)`` for ``t = tau exp(-i k L)`` without overflow."""
    if tau == 0:
        return 0j, None
    log_t = cmath.log(tau) - 1j * k * length
    t = cmath.exp(log_t) if log_t.real < _MAX_EXP else complex(float("inf"), 0.0)
    return t, log_t


def transmission_coefficients(psiL, dpsiL, k3, k4, length, degenerate=False):
    tau1, tau2 = transmission_amplitudes(psiL, dpsiL, k3, k4, degenerate)
    t1, _ = scaled_coefficient(tau1, k3, length)
    t2, _ = scaled_coefficient(tau2, k4, length) if not degenerate else (0j, None)
    return t1, t2
