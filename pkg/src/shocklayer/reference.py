"""Comparison of a layer solution with an externally computed reference field.

Reference fields are scattered ``(z, r, rho, p)`` points, typically exported
from a high-order numerical solver. Values at the analytical sample points
are obtained by inverse-distance weighting of the nearest stored points.
"""
import csv
from dataclasses import dataclass
import math

import numpy as np
from scipy.spatial import cKDTree

from .errors import NoOverlap, OutOfHull, ParseError, ValidationError
from .solver import BodyPoint, integrated_surface_pressure

REQUIRED_COLUMNS = ("z", "r", "rho", "p")
MIN_POINTS = 100
HULL_RADIUS = 0.05
NEIGHBOURS = 4
POWER = 2.0


class ReferenceField:
    """Immutable scattered reference field with a k-d tree over (z, r)."""

    def __init__(self, z, r, rho, p):
        pts = np.column_stack([z, r]).astype(float)
        rho = np.asarray(rho, dtype=float)
        p = np.asarray(p, dtype=float)
        if len(pts) < MIN_POINTS:
            raise ValidationError(f"reference field needs at least {MIN_POINTS} points, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("reference coordinates must be finite")
        if not np.all(rho > 0.0):
            raise ValidationError("reference density must be positive everywhere")
        if not np.all(p > 0.0):
            raise ValidationError("reference pressure must be positive everywhere")
        self.points = pts
        self.rho = rho
        self.p = p
        self.kd_index = cKDTree(pts)
        for a in (self.points, self.rho, self.p):
            a.flags.writeable = False

    def __len__(self):
        return len(self.points)

    def query(self, z, r, hull_radius=HULL_RADIUS, k=NEIGHBOURS):
        """Interpolated ``(rho, p)`` at many points.

        Returns arrays with NaN where the nearest stored point is farther
        than ``hull_radius``.
        """
        q = np.column_stack([np.atleast_1d(z), np.atleast_1d(r)]).astype(float)
        k = min(k, len(self.points))
        dist, idx = self.kd_index.query(q, k=k)
        dist = dist.reshape(len(q), k)
        idx = idx.reshape(len(q), k)
        with np.errstate(divide="ignore"):
            w = 1.0 / dist ** POWER
        exact = dist[:, 0] == 0.0
        w[exact] = 0.0
        w[exact, 0] = 1.0
        w /= w.sum(axis=1, keepdims=True)
        rho = np.sum(w * self.rho[idx], axis=1)
        p = np.sum(w * self.p[idx], axis=1)
        outside = dist[:, 0] > hull_radius
        rho[outside] = np.nan
        p[outside] = np.nan
        return rho, p


def load_reference(path):
    """Read a reference field from CSV.

    Any column order is accepted as long as the header names ``z``, ``r``,
    ``rho`` and ``p``; extra columns are ignored, so exported layer fields
    load directly.
    """
    cols = {name: [] for name in REQUIRED_COLUMNS}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError("empty file", line=1)
        header = [h.strip() for h in header]
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"header lacks column(s) {', '.join(missing)}", line=1)
        pos = {c: header.index(c) for c in REQUIRED_COLUMNS}
        for lineno, row in enumerate(reader, start=2):
            if not row or not "".join(row).strip():
                continue
            try:
                for c in REQUIRED_COLUMNS:
                    cols[c].append(float(row[pos[c]]))
            except (ValueError, IndexError) as exc:
                raise ParseError(f"malformed row {row!r}", line=lineno) from exc
    return ReferenceField(cols["z"], cols["r"], cols["rho"], cols["p"])


def interpolate(field, z, r):
    """Inverse-distance-weighted ``(rho, p)`` at a single point."""
    rho, p = field.query([z], [r])
    if math.isnan(rho[0]):
        raise OutOfHull(f"({z}, {r}) is farther than {HULL_RADIUS} from every reference point")
    return float(rho[0]), float(p[0])


@dataclass(frozen=True)
class DensityComparison:
    max_density_error: float
    samples_compared: int
    samples_skipped: int
    location: tuple


def _samples(solution):
    z, r, rho = [], [], []
    for sol in solution:
        for s in sol.samples:
            z.append(s.z)
            r.append(s.r)
            rho.append(s.rho)
    return np.array(z), np.array(r), np.array(rho)


def compare_density(z, r, rho, field):
    ref_rho, _ = field.query(z, r)
    inside = ~np.isnan(ref_rho)
    if not np.any(inside):
        raise NoOverlap("no analytical sample lies inside the reference field")
    diff = np.abs(np.asarray(rho)[inside] - ref_rho[inside])
    k = int(np.argmax(diff))
    loc = (float(np.asarray(z)[inside][k]), float(np.asarray(r)[inside][k]))
    return DensityComparison(float(diff[k]), int(inside.sum()), int((~inside).sum()), loc)


def max_density_error(solution, field):
    """Largest |rho - rho_ref| over all layer samples inside the reference hull."""
    return compare_density(*_samples(solution), field)


def surface_pressure_error(body, field):
    """|integrated p_b - integrated reference pressure| along the body polyline.

    Only body points inside the reference hull take part; both integrals
    use the same polyline.
    """
    z = np.array([b.z for b in body])
    r = np.array([b.r for b in body])
    _, ref_p = field.query(z, r)
    inside = ~np.isnan(ref_p)
    if inside.sum() < 2:
        raise NoOverlap("fewer than two body points inside the reference field")
    ours = [b for b, ok in zip(body, inside) if ok]
    theirs = [BodyPoint(b.z, b.r, float(p), b.delta) for b, p in zip(ours, ref_p[inside])]
    return abs(integrated_surface_pressure(ours) - integrated_surface_pressure(theirs))
