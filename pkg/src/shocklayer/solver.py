"""Shock-layer solution on streamlines and recovery of the body shape.

For a station N on the shock the two layer integrals are evaluated along
the shock between the streamline of interest and N:

* the pressure deficit ``P_hat - P``, a curvature-weighted integral of the
  velocity of each streamline evaluated at the station pressure, and
* ``Y``, the integral of ``1 / (rho u)`` from which the normal distance to
  the shock follows (``y = Y`` in plane flow, root of a quadratic in
  axisymmetric flow).

Both integrals are taken over the radius ``s`` of the entry point S on the
shock, ``dpsi = s^j ds``, with composite 5-point Gauss-Legendre panels.
Pressure and density ratios are carried as logarithms so that the
near-axis stations, where all ratios are ``1 - O(r^2)``, keep full
precision.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np

from .errors import DegenerateInput, NegativeRadicand, NonConvergence, WeakShock
from .gas import chi_from_sin2, post_shock_state
from .geometry import (AXIS_OFFSET, ShockStation, radius_from_stream_function,
                       sample_stations)

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(5)
INITIAL_PANELS = 16
MAX_PANELS = 2 ** 10
RTOL = 1e-8
AXIS_PAIR = (1e-3, 5e-4)


@dataclass
class LayerSample:
    psi: float
    beta_star: float
    p: float
    rho: float
    u: float
    y_cap: float
    y: float
    z: float
    r: float


@dataclass
class StationSolution:
    station: ShockStation
    samples: list = field(default_factory=list)

    @property
    def body_sample(self):
        return self.samples[-1]


@dataclass(frozen=True)
class BodyPoint:
    z: float
    r: float
    p_b: float
    delta: float


class _StationBatch:
    """Station data needed by the integrands, as column vectors."""

    def __init__(self, fs, stations):
        self.stations = list(stations)
        self.r_hat = np.array([s.r_hat for s in stations])[:, None]
        t = np.array([s.slope for s in stations])[:, None]
        self.log_sin2_hat = -np.log1p(t * t)
        self.kappa = np.array([s.kappa_hat for s in stations])[:, None]
        sin2 = 1.0 / (1.0 + t * t)
        _check_mach(fs, sin2)
        self.p_hat = fs.p_inf + (1.0 - chi_from_sin2(fs, sin2)) * sin2
        self.scale = self.kappa / self.r_hat ** fs.j

    def take(self, idx):
        sub = object.__new__(_StationBatch)
        sub.stations = [self.stations[i] for i in idx]
        for name in ("r_hat", "log_sin2_hat", "kappa", "p_hat", "scale"):
            setattr(sub, name, getattr(self, name)[idx])
        return sub


def _check_mach(fs, sin2):
    if np.any(fs.mach ** 2 * sin2 < 1.0 - 1e-12):
        raise WeakShock(f"M sin(beta) < 1 on the shock for M={fs.mach}")


def _col(a, ndim):
    """Broadcast a per-station column against an (n, ...) array of rank ``ndim``."""
    return a.reshape((a.shape[0],) + (1,) * (ndim - 1))


def _expansion_terms(fs, shape, s):
    """cos^2, sin^2 and log sin^2 of the shock angle at entry radius s."""
    t = shape.slope(s)
    t2 = t * t
    return t2 / (1.0 + t2), 1.0 / (1.0 + t2), -np.log1p(t2)


def _pressure_integrand(fs, shape, batch, s):
    cos2, sin2, log_sin2 = _expansion_terms(fs, shape, s)
    ex = (fs.gamma - 1.0) / fs.gamma
    k = 2.0 / ((fs.gamma - 1.0) * fs.mach ** 2) + sin2
    lr = _col(batch.log_sin2_hat, s.ndim) - log_sin2
    rad = cos2 - k * np.expm1(ex * lr)
    if np.any(rad < 0.0):
        raise NegativeRadicand("pressure integrand radicand < 0: shock angle not monotone")
    return np.sqrt(rad) * s ** fs.j


def _layer_state(fs, shape, batch, s, deficit):
    """Velocity u and density rho on the streamline entering at radius s,
    at pressure P_hat - deficit."""
    cos2, sin2, log_sin2 = _expansion_terms(fs, shape, s)
    _check_mach(fs, sin2)
    g = fs.gamma
    rel = deficit / _col(batch.p_hat, s.ndim)
    if not np.all(rel < 1.0):
        raise NegativeRadicand("layer pressure falls to zero: shock curvature too large")
    log_p = np.log1p(-rel)
    q = log_p + _col(batch.log_sin2_hat, s.ndim) - log_sin2
    k = 2.0 / ((g - 1.0) * fs.mach ** 2) + sin2
    u2 = cos2 - k * np.expm1((g - 1.0) / g * q)
    if np.any(u2 < 0.0):
        raise NegativeRadicand("velocity radicand < 0 inside the shock layer")
    chi = chi_from_sin2(fs, sin2)
    rho = np.exp(q / g) / chi
    return np.sqrt(u2), rho


def _panel_pass(fs, shape, batch, breaks, m):
    """One composite-GL evaluation with ``m`` panels per break interval.

    ``breaks`` has shape (n, q+1), descending from r_hat. Returns the
    pressure deficit and Y at every break.
    """
    n, nb = breaks.shape
    frac = np.linspace(0.0, 1.0, m + 1)
    hi = breaks[:, :-1, None]
    lo = breaks[:, 1:, None]
    edges = hi + (lo - hi) * frac  # (n, q, m+1), descending
    top = edges[..., :-1].reshape(n, -1)  # upper end of each panel
    bot = edges[..., 1:].reshape(n, -1)
    half = 0.5 * (top - bot)
    mid = 0.5 * (top + bot)
    nodes = mid[..., None] + half[..., None] * GL_NODES  # (n, P, 5)
    w = half[..., None] * GL_WEIGHTS

    # pressure deficit at panel tops by accumulation from the station
    g_nodes = _pressure_integrand(fs, shape, batch, nodes)
    panel_d = _col(batch.scale, 2) * np.sum(w * g_nodes, axis=-1)
    d_bot = np.cumsum(panel_d, axis=1)
    d_top = d_bot - panel_d

    # deficit at each node: panel top value plus the partial panel from the node up
    sub_half = 0.5 * (top[..., None] - nodes)
    sub_mid = 0.5 * (top[..., None] + nodes)
    sub_nodes = sub_mid[..., None] + sub_half[..., None] * GL_NODES  # (n, P, 5, 5)
    g_sub = _pressure_integrand(fs, shape, batch, sub_nodes.reshape(n, -1, 5)).reshape(sub_nodes.shape)
    d_nodes = d_top[..., None] + _col(batch.scale, 3) * sub_half * np.sum(GL_WEIGHTS * g_sub, axis=-1)

    u, rho = _layer_state(fs, shape, batch, nodes, d_nodes)
    panel_y = np.sum(w * nodes ** fs.j / (rho * u), axis=-1)
    y_bot = np.cumsum(panel_y, axis=1)

    pick = np.arange(m - 1, (nb - 1) * m, m)
    zeros = np.zeros((n, 1))
    deficit = np.hstack([zeros, d_bot[:, pick]])
    y_cap = np.hstack([zeros, y_bot[:, pick]])
    return deficit, y_cap


def _converged(a, b):
    scale = np.maximum(np.max(np.abs(b), axis=1, keepdims=True), 1e-300)
    return np.all(np.abs(a - b) <= RTOL * scale, axis=1)


def layer_integrals(fs, shape, stations, breaks, panels=None):
    """Pressure deficit and Y at the given entry radii for each station.

    ``breaks`` is an (n, q+1) array of entry radii descending from each
    station's own radius. Panels are doubled per station until both
    integrals change by less than ``RTOL`` relative. A fixed ``panels``
    count per interval skips the refinement.
    """
    batch = _StationBatch(fs, stations)
    breaks = np.asarray(breaks, dtype=float)
    n, nb = breaks.shape
    q = nb - 1
    if panels is not None:
        return _panel_pass(fs, shape, batch, breaks, int(panels))
    m = max(1, -(-INITIAL_PANELS // q))
    deficit, y_cap = _panel_pass(fs, shape, batch, breaks, m)
    todo = np.arange(n)
    while True:
        m *= 2
        if m * q > MAX_PANELS:
            raise NonConvergence(
                f"layer quadrature not converged with {MAX_PANELS} panels "
                f"at {len(todo)} station(s)")
        sub = batch.take(todo)
        d2, y2 = _panel_pass(fs, shape, sub, breaks[todo], m)
        ok = _converged(deficit[todo], d2) & _converged(y_cap[todo], y2)
        deficit[todo] = d2
        y_cap[todo] = y2
        todo = todo[~ok]
        if len(todo) == 0:
            return deficit, y_cap


def normal_distance(fs, station, y_cap):
    """Distance from the shock along its normal, given the Y integral."""
    y_cap = np.asarray(y_cap, dtype=float)
    if fs.j == 0:
        return y_cap
    r = station.r_hat
    cos_b = math.cos(station.beta_hat)
    rad = 1.0 - 2.0 * y_cap * cos_b / (r * r)
    if np.any(rad < 0.0):
        raise NegativeRadicand(
            f"shock layer thicker than the geometric limit at r_hat={r}")
    # rationalised form of r/cos(b) * (1 - sqrt(rad)); stable as cos(b) -> 0
    return 2.0 * y_cap / r / (1.0 + np.sqrt(rad))


def _p_hat(fs, station):
    return post_shock_state(fs, station.beta_hat).p


def pressure_at(fs, shape, station, psi):
    """Pressure on the streamline ``psi`` at the shock-normal through ``station``."""
    if psi < 0.0 or psi > station.psi_hat * (1 + 1e-12):
        raise ValueError(f"psi={psi} outside [0, {station.psi_hat}]")
    p_hat = _p_hat(fs, station)
    if psi >= station.psi_hat:
        return p_hat
    s = float(radius_from_stream_function(psi, fs.j))
    deficit, _ = layer_integrals(fs, shape, [station], [[station.r_hat, s]])
    return p_hat - float(deficit[0, -1])


def _psi_breaks(fs, station, psi_grid):
    psi_grid = np.asarray(psi_grid, dtype=float)
    if psi_grid.ndim != 1 or len(psi_grid) < 1:
        raise ValueError("psi grid must be a non-empty 1-d sequence")
    if abs(psi_grid[0] - station.psi_hat) > 1e-12 * max(station.psi_hat, 1e-300):
        raise ValueError("psi grid must start at the station stream function")
    if np.any(np.diff(psi_grid) >= 0.0) or psi_grid[-1] < 0.0:
        raise ValueError("psi grid must be strictly descending and non-negative")
    s = radius_from_stream_function(psi_grid, fs.j)
    s[0] = station.r_hat
    return s


def y_profile(fs, shape, station, psi_grid):
    """(psi, Y, y) along a descending stream-function grid starting at the shock."""
    breaks = _psi_breaks(fs, station, psi_grid)
    if len(breaks) == 1:
        return [(float(psi_grid[0]), 0.0, 0.0)]
    _, y_cap = layer_integrals(fs, shape, [station], breaks[None, :])
    y = normal_distance(fs, station, y_cap[0])
    return [(float(p), float(a), float(b)) for p, a, b in zip(psi_grid, y_cap[0], y)]


def density_at(fs, station, beta_star, p):
    """Density on the streamline that entered at shock angle ``beta_star``."""
    if not p > 0:
        raise ValueError("pressure must be positive")
    p_hat = _p_hat(fs, station)
    sin2_star = math.sin(beta_star) ** 2
    sin2_hat = math.sin(station.beta_hat) ** 2
    _check_mach(fs, sin2_star)
    chi = chi_from_sin2(fs, sin2_star)
    return (p * sin2_hat / (p_hat * sin2_star)) ** (1.0 / fs.gamma) / chi


def u_at(fs, beta_star, p, p_hat, beta_hat):
    """Velocity from the energy equation at pressure ``p`` on the streamline from ``beta_star``."""
    g = fs.gamma
    sin2_star = math.sin(beta_star) ** 2
    ratio = p * math.sin(beta_hat) ** 2 / (p_hat * sin2_star)
    rad = math.cos(beta_star) ** 2 + (2.0 / ((g - 1.0) * fs.mach ** 2) + sin2_star) * (
        1.0 - ratio ** ((g - 1.0) / g))
    if rad < 0.0:
        if rad > -1e-14:
            return 0.0
        raise NegativeRadicand(f"velocity radicand {rad} < 0")
    return math.sqrt(rad)


def _solve_chunk(fs, shape, stations, n_streamlines):
    j = fs.j
    psi_grids = [np.linspace(s.psi_hat, 0.0, n_streamlines) for s in stations]
    breaks = np.array([radius_from_stream_function(g, j) for g in psi_grids])
    for row, s in zip(breaks, stations):
        row[0] = s.r_hat
    deficit, y_cap = layer_integrals(fs, shape, stations, breaks)
    batch = _StationBatch(fs, stations)
    out = []
    for i, st in enumerate(stations):
        s = breaks[i]
        t = shape.slope(s)
        beta_star = np.arctan2(1.0, t)
        u, rho = _layer_state(fs, shape, batch.take([i]), s[None, :], deficit[i][None, :])
        y = normal_distance(fs, st, y_cap[i])
        p = batch.p_hat[i, 0] - deficit[i]
        sol = StationSolution(st)
        sb, cb = math.sin(st.beta_hat), math.cos(st.beta_hat)
        for k in range(n_streamlines):
            sol.samples.append(LayerSample(
                psi=float(psi_grids[i][k]), beta_star=float(beta_star[k]),
                p=float(p[k]), rho=float(rho[0, k]), u=float(u[0, k]),
                y_cap=float(y_cap[i, k]), y=float(y[k]),
                z=st.z_hat + float(y[k]) * sb, r=st.r_hat - float(y[k]) * cb))
        out.append(sol)
    return out


def _chunks(seq, threads):
    threads = threads or os.cpu_count() or 1
    size = max(1, -(-len(seq) // threads))
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _pmap(func, stations, threads):
    chunks = _chunks(stations, threads)
    if len(chunks) == 1:
        return func(chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(func, chunks))
    return [x for part in parts for x in part]


def solve_station(fs, shape, station, n_streamlines=200):
    """Full layer solution on ``n_streamlines`` values of psi, uniform from the shock to the body."""
    if n_streamlines < 2:
        raise ValueError("need at least two streamlines")
    return _solve_chunk(fs, shape, [station], n_streamlines)[0]


def solve_field(fs, shape, stations, n_streamlines=200, threads=1):
    if n_streamlines < 2:
        raise ValueError("need at least two streamlines")
    return _pmap(lambda c: _solve_chunk(fs, shape, c, n_streamlines), list(stations), threads)


def _body_chunk(fs, shape, stations):
    breaks = np.array([[s.r_hat, 0.0] for s in stations])
    deficit, y_cap = layer_integrals(fs, shape, stations, breaks)
    batch = _StationBatch(fs, stations)
    out = []
    for i, st in enumerate(stations):
        delta = float(normal_distance(fs, st, y_cap[i, 1]))
        out.append(BodyPoint(
            z=st.z_hat + delta * math.sin(st.beta_hat),
            r=st.r_hat - delta * math.cos(st.beta_hat),
            p_b=float(batch.p_hat[i, 0] - deficit[i, 1]),
            delta=delta))
    return out


def body_points(fs, shape, stations, threads=1):
    """Body point (psi = 0) below each station."""
    return _pmap(lambda c: _body_chunk(fs, shape, c), list(stations), threads)


def axis_point(fs, shape):
    """Stagnation point from Richardson extrapolation of two near-axis stations."""
    near = [shape.station_at_r(r, fs.j) for r in AXIS_PAIR]
    a, b = _body_chunk(fs, shape, near)
    h1, h2 = AXIS_PAIR
    # thickness varies linearly with r_hat near the axis, pressure with r_hat^2
    w1 = h1 / (h1 - h2)
    w2 = h1 * h1 / (h1 * h1 - h2 * h2)
    delta = w1 * b.delta + (1.0 - w1) * a.delta
    p_b = w2 * b.p_b + (1.0 - w2) * a.p_b
    return BodyPoint(z=delta, r=0.0, p_b=p_b, delta=delta)


def _body_r(fs, shape, r_hat):
    st = shape.station_at_r(r_hat, fs.j)
    return _body_chunk(fs, shape, [st])[0].r


def find_r_max(fs, shape, target=None):
    """Shock radius whose body point sits at ``target`` (default: just above the body radius)."""
    from scipy.optimize import brentq

    if target is None:
        target = fs.body_radius * (1.0 + 1e-6)
    lo = target
    hi = 1.5 * target
    prev = -math.inf
    while (val := _body_r(fs, shape, hi)) < target:
        if val <= prev:
            raise NonConvergence(
                f"recovered body peaks at r={prev:.6g} below the requested radius {target:.6g}")
        prev = val
        lo = hi
        hi *= 1.25
        if hi > min(shape.r_limit, 100.0 * target):
            raise NonConvergence("recovered body never reaches the requested radius")
    return brentq(lambda r: _body_r(fs, shape, r) - target, lo, hi, xtol=1e-13, rtol=1e-14)


def body_shape(fs, shape, n_stations=200, r_max=None, threads=1):
    """Recovered body: the stagnation point followed by one point per station.

    Without ``r_max`` the shock extent is chosen so the last body point lies
    just above the body radius (a quarter of the body).
    """
    if r_max is None:
        r_max = find_r_max(fs, shape)
    stations = sample_stations(shape, fs, n_stations, r_max, AXIS_OFFSET)
    return [axis_point(fs, shape)] + body_points(fs, shape, stations, threads)


def integrated_surface_pressure(body):
    """Trapezoidal integral of p_b over arc length along the body polyline."""
    if len(body) < 2:
        raise DegenerateInput("need at least two body points")
    z = np.array([b.z for b in body])
    r = np.array([b.r for b in body])
    p = np.array([b.p_b for b in body])
    ds = np.hypot(np.diff(z), np.diff(r))
    return float(np.sum(0.5 * (p[1:] + p[:-1]) * ds))
