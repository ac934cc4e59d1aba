"""Bow-shock shape families and their differential geometry.

Every shape is stored as the axial coordinate ``z`` as a function of the
radial coordinate ``r`` with the vertex at the origin. Working in ``r``
keeps the vertex regular (``dz/dr = 0`` there) whereas ``dr/dz`` blows up.
The shock angle is measured from the freestream (z) direction, so it is
pi/2 at the vertex and approaches the Mach angle far out.
"""
from dataclasses import dataclass
import csv
import math

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import DegenerateInput, InvalidShape, OutOfDomain, ParseError

AXIS_OFFSET = 1e-3


@dataclass(frozen=True)
class ShockStation:
    """A point N on the shock together with the local shock data."""

    z_hat: float
    r_hat: float
    beta_hat: float
    kappa_hat: float
    psi_hat: float
    slope: float  # dz/dr at the station

    @property
    def cos2_beta(self):
        return self.slope ** 2 / (1.0 + self.slope ** 2)

    @property
    def sin2_beta(self):
        return 1.0 / (1.0 + self.slope ** 2)


def stream_function(r, j):
    """Normalised shock stream function r^(1+j) / (1+j)."""
    return np.asarray(r, dtype=float) ** (1 + j) / (1 + j)


def radius_from_stream_function(psi, j):
    return ((1 + j) * np.asarray(psi, dtype=float)) ** (1.0 / (1 + j))


class ShockShape:
    """Base class. Subclasses provide ``derivatives(r) -> (z, dz/dr, d2z/dr2)``."""

    r_limit = math.inf

    def derivatives(self, r):
        raise NotImplementedError

    def z_of_r(self, r):
        return self.derivatives(r)[0]

    def slope(self, r):
        """dz/dr, vectorised."""
        return self.derivatives(r)[1]

    def sin2_beta(self, r):
        t = self.slope(r)
        return 1.0 / (1.0 + t * t)

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0) or np.any(r > self.r_limit * (1 + 1e-12)):
            raise OutOfDomain(f"r outside shock domain [0, {self.r_limit}]")
        return r

    def radius_at(self, z):
        """Shock radius r(z)."""
        z = float(z)
        if z < 0.0:
            raise OutOfDomain(f"z={z} is upstream of the shock vertex")
        if z == 0.0:
            return 0.0
        if math.isfinite(self.r_limit):
            hi = self.r_limit
            z_end = float(self.z_of_r(hi))
            if z > z_end * (1 + 1e-12):
                raise OutOfDomain(f"z={z} beyond shock extent")
            if z >= z_end:
                return hi
        else:
            hi = 1.0
            while float(self.z_of_r(hi)) < z:
                hi *= 2.0
        return brentq(lambda r: float(self.z_of_r(r)) - z, 0.0, hi,
                      xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    def station_at_r(self, r, j=0):
        r = float(self._check_r(r))
        z, t, t2 = (float(v) for v in self.derivatives(r))
        beta = math.atan2(1.0, t)
        kappa = abs(t2) / (1.0 + t * t) ** 1.5
        return ShockStation(z_hat=z, r_hat=r, beta_hat=beta, kappa_hat=kappa,
                            psi_hat=float(stream_function(r, j)), slope=t)

    def station_at(self, z, j=0):
        return self.station_at_r(self.radius_at(z), j)

    def params(self):
        return ()


class MoeckelShock(ShockShape):
    """Hyperbola r = sqrt((z + z0)^2 - z0^2) / sqrt(M^2 - 1)."""

    def __init__(self, z0, mach):
        if not z0 > 0:
            raise InvalidShape(f"z0 must be positive, got {z0}")
        if not mach > 1:
            raise InvalidShape(f"mach must exceed 1, got {mach}")
        self.z0 = float(z0)
        self.mach = float(mach)
        self.beta_m = math.sqrt(mach * mach - 1.0)

    def derivatives(self, r):
        r = self._check_r(r)
        b2 = self.beta_m ** 2
        q = np.sqrt(self.z0 ** 2 + b2 * r * r)
        return b2 * r * r / (q + self.z0), b2 * r / q, b2 * self.z0 ** 2 / q ** 3

    def radius_at(self, z):
        if z < 0:
            raise OutOfDomain(f"z={z} is upstream of the shock vertex")
        return math.sqrt(z * (z + 2.0 * self.z0)) / self.beta_m

    def params(self):
        return (self.z0,)

    def __repr__(self):
        return f"MoeckelShock(z0={self.z0!r}, mach={self.mach!r})"


class PolyShock(ShockShape):
    """r = sum_k c_k f^k with f the radius of the hyperbola."""

    def __init__(self, z0, coeffs, mach):
        coeffs = tuple(float(c) for c in coeffs)
        if not 1 <= len(coeffs) <= 4:
            raise InvalidShape("polynomial degree must be between 1 and 4")
        if not coeffs[0] > 0:
            raise InvalidShape(f"leading coefficient must be positive, got {coeffs[0]}")
        if not z0 > 0:
            raise InvalidShape(f"z0 must be positive, got {z0}")
        self.z0 = float(z0)
        self.coeffs = coeffs
        self.mach = float(mach)
        self.beta_m = math.sqrt(mach * mach - 1.0)
        # p(f) must stay increasing; the first positive root of p'(f) caps the domain
        dp = np.polynomial.Polynomial((0.0,) + coeffs).deriv()
        roots = [x.real for x in dp.roots() if abs(x.imag) < 1e-12 and x.real > 0]
        self._f_limit = min(roots) if roots else math.inf
        self.r_limit = float(self._p(self._f_limit)) if roots else math.inf

    @property
    def degree(self):
        return len(self.coeffs)

    def _p(self, f):
        out = np.zeros_like(np.asarray(f, dtype=float))
        for c in reversed(self.coeffs):
            out = (out + c) * f
        return out

    def _dp(self, f):
        out = np.zeros_like(np.asarray(f, dtype=float))
        for k in range(len(self.coeffs), 0, -1):
            out = out * f + k * self.coeffs[k - 1]
        return out

    def _d2p(self, f):
        out = np.zeros_like(np.asarray(f, dtype=float))
        for k in range(len(self.coeffs), 1, -1):
            out = out * f + k * (k - 1) * self.coeffs[k - 1]
        return out

    def f_of_r(self, r):
        r = self._check_r(r)
        f = r / self.coeffs[0]
        for _ in range(100):
            step = (self._p(f) - r) / self._dp(f)
            f = f - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(np.abs(f), 1e-300)):
                break
        else:
            bad = np.abs(self._p(f) - r) > 1e-13 * np.maximum(r, 1e-300)
            if np.any(bad):
                raise InvalidShape("cannot invert shock polynomial")
        return f

    def derivatives(self, r):
        f = self.f_of_r(r)
        b2 = self.beta_m ** 2
        q = np.sqrt(self.z0 ** 2 + b2 * f * f)
        z = b2 * f * f / (q + self.z0)
        z_f = b2 * f / q
        z_ff = b2 * self.z0 ** 2 / q ** 3
        r_f = self._dp(f)
        r_ff = self._d2p(f)
        return z, z_f / r_f, (z_ff * r_f - z_f * r_ff) / r_f ** 3

    def radius_at(self, z):
        if z < 0:
            raise OutOfDomain(f"z={z} is upstream of the shock vertex")
        f = math.sqrt(z * (z + 2.0 * self.z0)) / self.beta_m
        if f > self._f_limit:
            raise OutOfDomain(f"z={z} beyond the monotone part of the shock polynomial")
        return float(self._p(f))

    def params(self):
        return (self.z0,) + self.coeffs

    def __repr__(self):
        return f"PolyShock(z0={self.z0!r}, coeffs={self.coeffs!r}, mach={self.mach!r})"


class SplineShock(ShockShape):
    """Cubic spline through shock points, stored as z(r).

    The knots are mirrored about the axis before fitting so the spline is
    even in r: the vertex slope vanishes and the vertex curvature is not
    forced to zero by an end condition. The outer ends use not-a-knot
    conditions, which need no slope data and, unlike zero end curvature,
    keep the curvature right at the last few knots.
    """

    bc_type = "not-a-knot"

    def __init__(self, z, r):
        z = np.asarray(z, dtype=float)
        r = np.asarray(r, dtype=float)
        rr = np.concatenate([-r[:0:-1], r])
        zz = np.concatenate([z[:0:-1], z])
        self._spline = CubicSpline(rr, zz, bc_type=self.bc_type)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)
        self.knots_z = z
        self.knots_r = r
        self.r_limit = float(r[-1])

    def derivatives(self, r):
        r = self._check_r(r)
        return self._spline(r), self._d1(r), self._d2(r)

    def params(self):
        return ()

    def __repr__(self):
        return f"SplineShock(<{len(self.knots_z)} knots>)"


def fit_spline_shock(points):
    """Build a :class:`SplineShock` from ``(z, r)`` shock points.

    The points are sorted by ``z`` and translated so the first one sits at
    the origin. At least four points are needed and both coordinates must
    be strictly increasing.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DegenerateInput("expected a sequence of (z, r) pairs")
    if len(pts) < 4:
        raise DegenerateInput(f"need at least 4 shock points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("non-finite shock coordinates")
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    z = pts[:, 0] - pts[0, 0]
    r = pts[:, 1]
    if abs(r[0]) > 1e-8 * max(1.0, np.abs(r).max()):
        raise DegenerateInput(f"first shock point must lie on the axis, got r={r[0]}")
    r = r.copy()
    r[0] = 0.0
    if np.any(np.diff(z) <= 0.0):
        raise DegenerateInput("repeated z abscissae in shock points")
    if np.any(np.diff(r) <= 0.0):
        raise DegenerateInput("shock radius must increase strictly with z")
    return SplineShock(z, r)


def load_spline_shock(path):
    """Read a ``z,r`` CSV (header required) and fit a spline shock."""
    points = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["z", "r"]:
            raise ParseError("expected header 'z,r'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                points.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"bad shock point {row!r}", line=lineno) from exc
    return fit_spline_shock(points)


def sample_stations(shape, fs, n, r_max, r_min=AXIS_OFFSET):
    """``n`` stations with radii uniformly spaced on ``[r_min, r_max]``."""
    if n < 2:
        raise ValueError("need at least two stations")
    if not r_max > r_min:
        raise OutOfDomain(f"r_max={r_max} must exceed the axis offset {r_min}")
    stations = [shape.station_at_r(r, fs.j) for r in np.linspace(r_min, r_max, n)]
    beta = np.array([s.beta_hat for s in stations])
    if np.any(np.diff(beta) >= 0.0):
        raise InvalidShape("shock angle is not strictly decreasing along the shock")
    if any(s.kappa_hat <= 0.0 for s in stations):
        raise InvalidShape("shock curvature must be positive")
    return stations


def locate_S(shape, fs, psi, psi_max=None):
    """Shock station where the streamline with stream function ``psi`` entered."""
    if psi < 0.0 or (psi_max is not None and psi > psi_max * (1 + 1e-12)):
        raise OutOfDomain(f"psi={psi} outside [0, {psi_max}]")
    r_star = float(radius_from_stream_function(psi, fs.j))
    if r_star > shape.r_limit:
        raise OutOfDomain(f"psi={psi} beyond the shock extent")
    return shape.station_at_r(r_star, fs.j)
