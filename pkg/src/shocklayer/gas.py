"""Perfect-gas relations across and behind a bow shock.

All quantities are dimensionless with freestream density, freestream speed
and the reference length set to one, so the freestream pressure is
``1 / (gamma * mach**2)``.
"""
from dataclasses import dataclass
import math

import numpy as np

from .errors import WeakShock

PLANE = 0
AXISYMMETRIC = 1


@dataclass(frozen=True)
class FreestreamConditions:
    """Freestream state and flow geometry.

    Parameters
    ----------
    mach : float
        Freestream Mach number, > 1.
    gamma : float
        Ratio of specific heats, > 1.
    geometry : int
        0 for plane flow, 1 for axisymmetric flow.
    body_radius : float
        Radius of the target body (cylinder or sphere).
    """

    mach: float
    gamma: float = 1.4
    geometry: int = PLANE
    body_radius: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.mach) and self.mach > 1.0):
            raise ValueError(f"mach must be > 1, got {self.mach}")
        if not (math.isfinite(self.gamma) and self.gamma > 1.0):
            raise ValueError(f"gamma must be > 1, got {self.gamma}")
        if self.geometry not in (PLANE, AXISYMMETRIC):
            raise ValueError(f"geometry must be 0 or 1, got {self.geometry}")
        if not (math.isfinite(self.body_radius) and self.body_radius > 0.0):
            raise ValueError(f"body_radius must be > 0, got {self.body_radius}")

    @property
    def j(self):
        return self.geometry

    @property
    def p_inf(self):
        return 1.0 / (self.gamma * self.mach ** 2)

    @property
    def h_inf(self):
        # h = gamma/(gamma-1) * p/rho with rho_inf = 1
        return self.gamma / (self.gamma - 1.0) * self.p_inf

    @property
    def beta_m(self):
        """sqrt(M^2 - 1), the hyperbola slope parameter."""
        return math.sqrt(self.mach ** 2 - 1.0)

    @property
    def mach_angle(self):
        return math.asin(1.0 / self.mach)


@dataclass(frozen=True)
class PostShockState:
    u_t: float
    v_n: float
    p: float
    chi: float
    beta: float
    h: float

    @property
    def rho(self):
        return 1.0 / self.chi


def _check_strength(fs, sin_beta):
    sin_beta = np.asarray(sin_beta, dtype=float)
    # small slack so that an exact Mach wave (M sin b == 1) is not rejected by rounding
    if np.any(sin_beta <= 0.0) or np.any(fs.mach * sin_beta < 1.0 - 1e-12):
        raise WeakShock(
            f"M sin(beta) < 1 for M={fs.mach}: shock point beyond Mach-angle validity")


def chi_from_sin2(fs, sin2_beta):
    """Inverse compression ratio from sin^2 of the shock angle (vectorised, no checks)."""
    g = fs.gamma
    return (g - 1.0) / (g + 1.0) + 2.0 / ((g + 1.0) * fs.mach ** 2 * sin2_beta)


def inverse_compression_ratio(fs, beta):
    """rho_inf / rho behind an oblique shock of angle ``beta`` (radians).

    Accepts scalars or arrays. Raises :class:`WeakShock` if ``M sin(beta) < 1``.
    """
    s = np.sin(beta)
    _check_strength(fs, s)
    chi = chi_from_sin2(fs, s * s)
    return float(chi) if np.ndim(chi) == 0 else chi


def post_shock_state(fs, beta):
    """Rankine-Hugoniot state immediately behind the shock.

    Velocities are split into the components tangential and normal to the
    shock. The same relations hold at any shock point, so this serves both
    the station N and the streamline origin S.
    """
    s = math.sin(beta)
    chi = inverse_compression_ratio(fs, beta)
    s2 = s * s
    return PostShockState(
        u_t=math.cos(beta),
        v_n=chi * s,
        p=fs.p_inf + (1.0 - chi) * s2,
        chi=chi,
        beta=beta,
        h=fs.h_inf + 0.5 * (1.0 - chi * chi) * s2,
    )


def static_enthalpy(fs, p, rho):
    return fs.gamma / (fs.gamma - 1.0) * p / rho


def pitot_pressure(fs):
    """Stagnation pressure behind a normal shock (Rayleigh pitot formula).

    Returned in units of rho_inf U_inf^2.
    """
    g, m2 = fs.gamma, fs.mach ** 2
    ratio = ((g + 1.0) * m2 / 2.0) ** (g / (g - 1.0)) * (
        (g + 1.0) / (2.0 * g * m2 - (g - 1.0))) ** (1.0 / (g - 1.0))
    return ratio * fs.p_inf
