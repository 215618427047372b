"""Unit system (nm, fs, eV, V with q = 1) and material parameters.

With the elementary charge set to one, ``q * V`` in eV is numerically equal to
the potential in volts, so potentials are stored in V and added to energies
directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError

ELECTRON_REST_ENERGY_EV = 510998.95
SPEED_OF_LIGHT_NM_PER_FS = 299.792458
# bare electron mass in eV fs^2 / nm^2
ELECTRON_MASS = ELECTRON_REST_ENERGY_EV / SPEED_OF_LIGHT_NM_PER_FS**2

HBAR_EV_FS = 0.6582
GAAS_MASS_RATIO = 0.067
GAAS_ALPHA = 0.242


@dataclass(frozen=True)
class MaterialParams:
    """Effective-mass material with Kane non-parabolicity.

    ``a_coeff`` and ``b_coeff`` are the coefficients of the truncated band
    ``E(k) = b k^2 + a k^4``. ``k_max`` and ``e_max`` are ``inf`` for a
    parabolic material (``alpha == 0``).
    """

    hbar: float
    m_star_rel: float
    alpha: float
    m_star: float = field(init=False)
    a_coeff: float = field(init=False)
    b_coeff: float = field(init=False)
    k_max: float = field(init=False)
    e_max: float = field(init=False)

    def __post_init__(self):
        if not (self.m_star_rel > 0 and math.isfinite(self.m_star_rel)):
            raise InvalidParameterError(f"m_star_rel must be positive, got {self.m_star_rel}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise InvalidParameterError(f"hbar must be positive, got {self.hbar}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise InvalidParameterError(f"alpha must be non-negative, got {self.alpha}")
        m_star = self.m_star_rel * ELECTRON_MASS
        set_ = object.__setattr__
        set_(self, "m_star", m_star)
        set_(self, "b_coeff", self.hbar**2 / (2.0 * m_star))
        set_(self, "a_coeff", -(self.hbar**4) * self.alpha / (4.0 * m_star**2))
        if self.alpha > 0:
            set_(self, "k_max", math.sqrt(2.0 * m_star / self.alpha) / self.hbar)
            set_(self, "e_max", 1.0 / (4.0 * self.alpha))
        else:
            set_(self, "k_max", math.inf)
            set_(self, "e_max", math.inf)

    @property
    def k_center(self):
        """Wave number of the band maximum, ``k_max / sqrt(2)``; group velocity
        of the truncated band vanishes here."""
        return self.k_max / math.sqrt(2.0)


def derive_material(m_star_rel=GAAS_MASS_RATIO, alpha=GAAS_ALPHA, hbar=HBAR_EV_FS):
    return MaterialParams(hbar=hbar, m_star_rel=m_star_rel, alpha=alpha)
