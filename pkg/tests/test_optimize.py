import math

import numpy as np
import pytest

from conftest import FITTED
from shocklayer.errors import NonConvergence
from shocklayer.gas import FreestreamConditions
from shocklayer.geometry import MoeckelShock, PolyShock
from shocklayer.optimize import (
    body_error,
    circle_residuals,
    initial_z0,
    make_shape,
    nelder_mead,
    optimize_family,
    optimize_poly,
    optimize_shape,
    optimize_z0,
    secant_minimize,
)
from shocklayer.solver import BodyPoint


def test_initial_guess_near_fitted_value(fs4):
    assert initial_z0(fs4) == pytest.approx(18.0)


def test_exact_circle_has_zero_error(fs4):
    theta = np.linspace(0, math.pi / 2, 30)
    delta = 0.27
    body = [BodyPoint(z=delta + 0.5 - 0.5 * math.cos(t), r=0.5 * math.sin(t), p_b=1.0, delta=delta)
            for t in theta]
    err = body_error(fs4, None, body=body)
    assert err.rms == pytest.approx(0.0, abs=1e-15)
    assert err.max_abs == pytest.approx(0.0, abs=1e-15)
    assert err.center_z == pytest.approx(delta + 0.5)


def test_residual_sign():
    assert circle_residuals([0.0], [0.6], 0.5, 0.0)[0] == pytest.approx(0.1)
    assert circle_residuals([0.0], [0.4], 0.5, 0.0)[0] == pytest.approx(-0.1)


def test_polynomial_shape_beats_hyperbola(fs4, fitted_m4, moeckel_m4):
    poly = body_error(fs4, fitted_m4)
    moeckel = body_error(fs4, moeckel_m4)
    assert moeckel.rms > poly.rms
    assert poly.rms <= poly.max_abs


@pytest.mark.parametrize("x0", [2.0, 2.6])
def test_secant_finds_quadratic_minimum_quickly(x0):
    calls = []

    def quad(x):
        calls.append(x)
        return 3.0 * (x - 2.3) ** 2 + 1.0

    x, f, evals, converged = secant_minimize(quad, x0)
    assert converged
    assert x == pytest.approx(2.3, rel=1e-9)
    assert f == pytest.approx(1.0, abs=1e-15)
    # two starting gradients, at most three secant updates, one final evaluation
    assert evals <= 6 + 3 * 3 + 1


def test_secant_recovers_from_failures():
    def bumpy(x):
        if x > 5.0:
            raise ValueError("infeasible")
        return (x - 3.0) ** 2

    x, f, _, _ = secant_minimize(bumpy, 4.9)
    assert x == pytest.approx(3.0, rel=1e-4)


def test_moeckel_optimum_is_a_local_minimum(fs4):
    res = optimize_z0(fs4)
    assert res.converged
    assert res.params[0] == pytest.approx(16.880, rel=2e-3)
    z0 = res.params[0]
    for f in (0.95, 1.05):
        assert body_error(fs4, MoeckelShock(f * z0, 4.0)).rms > res.error.rms


def test_optimize_z0_validates_start(fs4):
    with pytest.raises(ValueError):
        optimize_z0(fs4, z0_init=-1.0)


def test_synthetic_objective_hook(fs4):
    res = optimize_z0(fs4, z0_init=10.0, objective=lambda z: (z - 11.0) ** 2)
    assert res.params[0] == pytest.approx(11.0, rel=1e-8)


def test_nelder_mead_on_rosenbrock():
    def rosen(x):
        return (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2

    x, f, evals, converged = nelder_mead(rosen, [0.8, 0.7])
    assert converged
    assert x == pytest.approx([1.0, 1.0], abs=1e-4)
    assert evals <= 2000


def test_nelder_mead_handles_zero_coordinates():
    x, _, _, converged = nelder_mead(lambda x: (x[0] - 1) ** 2 + (x[1] + 0.05) ** 2, [1.0, 0.0])
    assert converged
    assert x[1] == pytest.approx(-0.05, abs=1e-5)


def test_degree_two_improves_on_hyperbola(fs4):
    z0 = optimize_z0(fs4, n_stations=40)
    poly = optimize_poly(fs4, 2, n_stations=40)
    assert poly.converged
    assert poly.params[0] == z0.params[0]
    assert poly.error.rms < z0.error.rms
    assert poly.params[1] == pytest.approx(1.0, abs=0.02)
    assert -0.07 < poly.params[2] < -0.02


def test_start_at_optimum_stays_put(fs4):
    first = optimize_poly(fs4, 2, n_stations=40)
    again = optimize_poly(fs4, 2, init=first.params, n_stations=40)
    assert again.error.rms <= first.error.rms * (1 + 1e-9)
    assert again.params == pytest.approx(first.params, rel=1e-4, abs=1e-5)


def test_optimization_is_deterministic(fs4):
    init = (FITTED[4.0][0], 1.0, 0.0)
    a = optimize_poly(fs4, 2, init=init, n_stations=30)
    b = optimize_poly(fs4, 2, init=init, n_stations=30)
    assert a.params == b.params
    assert a.error == b.error
    assert a.evaluations == b.evaluations


def test_evaluation_cap_raises(fs4):
    with pytest.raises(NonConvergence) as info:
        optimize_poly(fs4, 2, init=(17.0, 1.0, 0.0), n_stations=30, max_evals=10)
    assert info.value.result.evaluations == 10
    assert not info.value.result.converged


def test_degree_and_init_validation(fs4):
    with pytest.raises(ValueError):
        optimize_poly(fs4, 5, init=(17.0, 1.0, 0.0, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        optimize_poly(fs4, 2, init=(17.0, 1.0))
    with pytest.raises(ValueError):
        optimize_poly(fs4, 2, init=(17.0, -1.0, 0.0))


def test_make_shape_dispatch():
    assert isinstance(make_shape((17.0,), 4.0), MoeckelShock)
    shape = make_shape((17.0, 1.0, -0.04), 4.0)
    assert isinstance(shape, PolyShock)
    assert shape.params() == (17.0, 1.0, -0.04)


def test_optimize_shape_degree_one_is_moeckel():
    fs = FreestreamConditions(4.0)
    res = optimize_shape(fs, 1, n_stations=30)
    assert res.degree == 1
    assert len(res.params) == 1


def test_family_error_never_increases(fs4):
    results = optimize_family(fs4, 3, n_stations=30)
    assert [r.degree for r in results] == [1, 2, 3]
    rms = [r.error.rms for r in results]
    assert rms[0] > rms[1] >= rms[2]
    assert len({r.params[0] for r in results}) == 1
