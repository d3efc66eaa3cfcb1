import numpy as np
import pytest

from specinv.models import CoulombModelParams, coulomb_ground_curve
from specinv.potentials import Coulomb
from specinv.spectral import (SpectralCurve, KineticPotential, KFunction,
                              build_curve, maximize,
                              kinetic_potential_from_curve,
                              energy_from_kinetic_potential,
                              k_function_from_curve, energy_from_k)


def quad_curve(a=1.0, b=0.0, m=1.0, domain=None, n=12):
    return coulomb_ground_curve(CoulombModelParams(a, b, 0.0, m),
                                domain=domain, n_samples=n)


@pytest.mark.parametrize("data", [
    [(1.0, -1.0), (2.0, -2.0), (3.0, -3.0)],            # too few
    [(1.0, -1.0), (1.0, -2.0), (3.0, -3.0), (4.0, -4.0)],  # repeated v
    [(2.0, -1.0), (1.0, -2.0), (3.0, -3.0), (4.0, -4.0)],  # decreasing v
])
def test_build_curve_validation(data):
    with pytest.raises(ValueError):
        build_curve(data)


def test_spline_reproduces_quadratic_between_knots():
    a, b = 0.9, 0.3
    curve = quad_curve(a=a, b=b, domain=(0.2, 6.0), n=9)
    u = np.linspace(0.25, 5.9, 200)   # mostly off-knot abscissae
    exact = b * u - a ** 2 * u ** 2 / 4.0
    np.testing.assert_allclose(curve(u), exact, rtol=0, atol=1e-12)
    assert curve.concave
    assert curve.tolerance <= 1e-10


def test_build_curve_shift_stores_u_variable():
    v = np.array([31.0, 32.0, 33.0, 34.0])
    E = np.array([-0.1, -0.3, -0.6, -1.0])
    curve = build_curve(np.column_stack([v, E]), shift=30.0)
    np.testing.assert_allclose(curve.samples[:, 0], v - 30.0)
    assert curve.v0 == 30.0
    assert curve.domain == (1.0, 4.0)
    assert curve.v1 == 1.0


def test_non_concave_data_warns_but_builds():
    data = [(1.0, -1.0), (2.0, -1.5), (3.0, -1.4), (4.0, -1.2)]
    with pytest.warns(UserWarning):
        curve = build_curve(data)
    assert not curve.concave


def test_maximize_interior_and_edge_flags():
    val, arg, interior = maximize(lambda x: -(x - 2.0) ** 2, 0.0, 5.0,
                                  margin=0.02)
    assert abs(val) < 1e-12 and abs(arg - 2.0) < 1e-6
    assert interior
    # maximum beyond the right edge: flagged as non-interior
    _, arg, interior = maximize(lambda x: x, 0.0, 1.0, margin=0.02)
    assert arg == 1.0
    assert not interior


def test_kinetic_potential_of_coulomb_curve():
    # for F(u) = -m (u alpha)^2 / 4 the kinetic potential is -alpha sqrt(m s)
    alpha, m = 1.0, 1.0
    curve = quad_curve(a=alpha, m=m, domain=(0.004, 4.0), n=14)
    s = np.geomspace(0.01, 2.0, 25)
    kp = kinetic_potential_from_curve(curve, s, margin=0.01)
    np.testing.assert_allclose(kp(s), -alpha * np.sqrt(m * s), rtol=1e-6)
    assert not np.any(kp.boundary)
    assert np.all(np.diff(kp.fbar) < 0)


def test_legendre_round_trip():
    alpha, m = 0.8, 1.0
    curve = quad_curve(a=alpha, m=m, domain=(0.004, 5.0), n=14)
    s = np.geomspace(0.005, 3.0, 60)
    kp = kinetic_potential_from_curve(curve, s, margin=0.005)
    for v in (0.7, 1.2, 2.0, 3.0):
        exact = -m * (v * alpha) ** 2 / 4.0
        back = energy_from_kinetic_potential(kp, v)
        assert abs(back - exact) <= 1e-4 * abs(exact)


def test_k_function_of_coulomb_is_inverse_square():
    m = 1.0
    curve = quad_curve(a=1.0, m=m, domain=(0.004, 4.0), n=14)
    r = np.linspace(0.6, 5.0, 23)
    k = k_function_from_curve(curve, Coulomb(1.0), r, margin=0.01)
    np.testing.assert_allclose(k(r), 1.0 / (m * r * r), rtol=1e-6)
    assert not np.any(k.boundary)


def test_energy_from_k_closes_the_loop():
    m = 1.0
    curve = quad_curve(a=1.0, m=m, domain=(0.004, 4.0), n=14)
    r = np.geomspace(0.5, 60.0, 80)
    k = k_function_from_curve(curve, Coulomb(1.0), r, margin=0.0)
    for v in (0.8, 1.5, 3.0):
        exact = -m * v ** 2 / 4.0
        val = energy_from_k(Coulomb(1.0), k, v)
        assert abs(val - exact) <= 1e-6 * abs(exact)


def test_kinetic_potential_must_decrease():
    s = np.array([0.5, 1.0, 2.0])
    with pytest.raises(ValueError):
        KineticPotential(s, np.array([-1.0, -0.5, -0.6]))
    with pytest.raises(ValueError):
        KineticPotential(np.array([0.0, 1.0, 2.0]), np.array([0.0, -1.0, -2.0]))


def test_k_function_grid_validation():
    with pytest.raises(ValueError):
        KFunction(np.array([1.0, 0.5]), np.array([1.0, 4.0]))
    curve = quad_curve()
    with pytest.raises(ValueError):
        k_function_from_curve(curve, Coulomb(1.0), np.array([-1.0, 2.0]))


def test_edge_minimizer_warns():
    curve = quad_curve(a=1.0, domain=(0.004, 4.0), n=14)
    s = np.geomspace(0.01, 0.05, 12)        # too short for v = 3 minimizer
    kp = kinetic_potential_from_curve(curve, s)
    with pytest.warns(UserWarning):
        energy_from_kinetic_potential(kp, 3.0)
