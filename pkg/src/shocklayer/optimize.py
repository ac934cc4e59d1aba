"""Fitting shock-shape parameters so the recovered body matches the target body.

The target is a circle (plane flow) or sphere (axisymmetric flow) of radius
``fs.body_radius`` whose leading point coincides with the recovered
stagnation point. The objective is the rms of the radial residuals of the
recovered body points.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy.optimize import minimize

from .errors import NonConvergence, ShockLayerError
from .geometry import MoeckelShock, PolyShock
from .solver import body_shape

log = logging.getLogger(__name__)

OBJECTIVE_STATIONS = 100
MAX_EVALS = 2000


@dataclass(frozen=True)
class BodyError:
    rms: float
    max_abs: float
    center_z: float


@dataclass
class OptimizationResult:
    params: tuple
    error: BodyError
    evaluations: int
    converged: bool
    degree: int = 1
    history: list = field(default_factory=list, repr=False)

    def shape(self, mach):
        return make_shape(self.params, mach)


def make_shape(params, mach):
    """Hyperbola for ``(z0,)``, polynomial in f for ``(z0, c1, ..., cd)``."""
    params = tuple(float(p) for p in params)
    if len(params) == 1:
        return MoeckelShock(params[0], mach)
    return PolyShock(params[0], params[1:], mach)


def circle_residuals(z, r, radius, center_z):
    return np.hypot(np.asarray(z) - center_z, np.asarray(r)) - radius


def body_error(fs, shape, n_stations=OBJECTIVE_STATIONS, body=None):
    """Residuals of the recovered body against the target circle.

    The circle center sits one radius behind the recovered stagnation point.
    """
    if body is None:
        body = body_shape(fs, shape, n_stations)
    z = np.array([b.z for b in body])
    r = np.array([b.r for b in body])
    center = body[0].delta + fs.body_radius
    res = circle_residuals(z, r, fs.body_radius, center)
    return BodyError(rms=float(np.sqrt(np.mean(res ** 2))),
                     max_abs=float(np.max(np.abs(res))), center_z=float(center))


def initial_z0(fs):
    """Vertex parameter from a shock nose radius of 2.4 body radii."""
    return 2.4 * fs.body_radius * fs.beta_m ** 2


class _Objective:
    """Counts evaluations and maps solver failures to an infinite error."""

    def __init__(self, func):
        self.func = func
        self.evaluations = 0
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x):
        self.evaluations += 1
        try:
            f = float(self.func(x))
        except (ShockLayerError, ValueError) as exc:
            log.debug("objective failed at %s: %s", x, exc)
            f = math.inf
        if not math.isfinite(f):
            f = math.inf
        if f < self.best_f:
            self.best_f = f
            self.best_x = x if np.isscalar(x) else np.array(x, dtype=float)
        return f


def secant_minimize(func, x0, rel_step=1e-3, xtol=1e-4, max_iter=50, x1=None,
                    max_rel_move=0.2):
    """Minimise a scalar function of a positive variable.

    The secant method is applied to the central-difference derivative.
    Each step is capped at ``max_rel_move`` times the current point, which
    only matters far from the minimum where the derivative is nearly flat.
    Returns ``(best_x, best_f, evaluations, converged)``.
    """
    obj = _Objective(lambda x: func(x))

    def grad(x):
        h = rel_step * abs(x)
        obj(x)
        return (obj(x + h) - obj(x - h)) / (2.0 * h)

    xa = float(x0)
    xb = float(x1) if x1 is not None else xa * 1.02
    ga, gb = grad(xa), grad(xb)
    converged = False
    for _ in range(max_iter):
        cap = max_rel_move * abs(xb)
        if not math.isfinite(gb):
            # no usable derivative: fall back halfway towards the best point seen
            if obj.best_x is None or obj.best_x == xb:
                break
            x_new = 0.5 * (xb + obj.best_x)
        else:
            step = -gb * (xb - xa) / (gb - ga) if math.isfinite(ga) and gb != ga else math.nan
            if not math.isfinite(step) or step * gb > 0.0:
                # secant points uphill (locally concave): take a capped descent step
                step = -math.copysign(cap, gb)
            x_new = xb + max(-cap, min(cap, step))
        if abs(x_new - xb) < xtol * abs(xb):
            obj(x_new)
            converged = True
            break
        xa, ga = xb, gb
        xb, gb = x_new, grad(x_new)
    return obj.best_x, obj.best_f, obj.evaluations, converged


def optimize_z0(fs, z0_init=None, objective=None, n_stations=OBJECTIVE_STATIONS):
    """Best vertex parameter z0 for the plain hyperbola.

    ``objective`` replaces the body rms error, mainly for testing.
    """
    if z0_init is None:
        z0_init = initial_z0(fs)
    if not z0_init > 0:
        raise ValueError("z0_init must be positive")
    if objective is None:
        def objective(z0):
            return body_error(fs, MoeckelShock(z0, fs.mach), n_stations).rms
    z0, f, evals, converged = secant_minimize(objective, z0_init)
    if z0 is None:
        raise ShockLayerError("no valid shock shape found near the initial z0")
    if not converged:
        log.warning("secant iteration on z0 did not converge; returning best seen")
    try:
        err = body_error(fs, MoeckelShock(z0, fs.mach), n_stations)
    except ShockLayerError:
        err = BodyError(rms=f, max_abs=math.nan, center_z=math.nan)
    return OptimizationResult(params=(z0,), error=err, evaluations=evals,
                              converged=converged, degree=1)


def _initial_simplex(x0, rel=0.01):
    x0 = np.asarray(x0, dtype=float)
    sim = [x0]
    for i in range(len(x0)):
        v = x0.copy()
        v[i] = v[i] * (1.0 + rel) if v[i] != 0.0 else rel
        sim.append(v)
    return np.array(sim)


def nelder_mead(func, x0, xtol=1e-6, ftol=1e-10, max_evals=MAX_EVALS):
    """Nelder-Mead with a 1% initial simplex and a relative size criterion."""
    x0 = np.asarray(x0, dtype=float)
    scale = np.where(x0 != 0.0, np.abs(x0), 1.0)
    obj = _Objective(lambda u: func(u * scale))
    res = minimize(obj, x0 / scale, method="Nelder-Mead",
                   options=dict(initial_simplex=_initial_simplex(x0 / scale),
                                xatol=xtol, fatol=ftol, maxfev=max_evals))
    best = (obj.best_x if obj.best_x is not None else res.x) * scale
    return best, obj.best_f, obj.evaluations, bool(res.success)


def optimize_poly(fs, degree, init=None, free_z0=False, n_stations=OBJECTIVE_STATIONS,
                  max_evals=MAX_EVALS):
    """Polynomial-in-f shock ``r = c1 f + ... + cd f^d`` fitted to the body.

    ``init`` is ``(z0, c1, ..., cd)``; by default z0 comes from the
    hyperbola fit and the coefficients start at ``(1, 0, ...)``. With
    ``free_z0=False`` (default) z0 stays at its initial value and only the
    coefficients move: z0 and c1 trade off almost exactly at the nose, and
    letting both float drifts along that valley without improving the
    body. Raises NonConvergence, with the best result seen attached as
    ``exc.result``, if the simplex has not converged after ``max_evals``.
    """
    if degree not in (2, 3, 4):
        raise ValueError(f"polynomial degree must be 2, 3 or 4, got {degree}")
    extra = 0
    if init is None:
        z0_fit = optimize_z0(fs, n_stations=n_stations)
        extra = z0_fit.evaluations
        init = (z0_fit.params[0], 1.0) + (0.0,) * (degree - 1)
    init = tuple(float(v) for v in init)
    if len(init) != degree + 1:
        raise ValueError(f"expected {degree + 1} initial parameters, got {len(init)}")
    if not init[1] > 0:
        raise ValueError("leading coefficient must be positive")
    z0 = init[0]

    if free_z0:
        def full(x):
            return (float(x[0]),) + tuple(float(v) for v in x[1:])
        start = init
    else:
        def full(x):
            return (z0,) + tuple(float(v) for v in x)
        start = init[1:]

    def objective(x):
        return body_error(fs, make_shape(full(x), fs.mach), n_stations).rms

    x, f, evals, converged = nelder_mead(objective, start, max_evals=max_evals)
    params = full(x)
    err = body_error(fs, make_shape(params, fs.mach), n_stations)
    result = OptimizationResult(params=params, error=err, evaluations=evals + extra,
                                converged=converged, degree=degree)
    if not converged:
        exc = NonConvergence(f"Nelder-Mead not converged after {evals} evaluations")
        exc.result = result
        raise exc
    return result


def optimize_shape(fs, degree, n_stations=OBJECTIVE_STATIONS, free_z0=False):
    """Degree 1 is the plain hyperbola; 2-4 add polynomial terms in f."""
    if degree == 1:
        return optimize_z0(fs, n_stations=n_stations)
    return optimize_poly(fs, degree, free_z0=free_z0, n_stations=n_stations)


def optimize_family(fs, max_degree=4, n_stations=OBJECTIVE_STATIONS):
    """Optimal shapes of degree 1 to ``max_degree`` sharing one z0.

    Each polynomial fit starts from the previous degree's optimum with a
    zero extra coefficient, so the error can only go down with degree.
    """
    results = [optimize_z0(fs, n_stations=n_stations)]
    params = results[0].params + (1.0,)
    for degree in range(2, max_degree + 1):
        res = optimize_poly(fs, degree, init=params + (0.0,) * (degree + 1 - len(params)),
                            n_stations=n_stations)
        results.append(res)
        params = res.params
    return results
