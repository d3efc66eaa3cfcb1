import numpy as np
import pytest

from specinv.potentials import (Coulomb, ShiftedCoulomb, Hulthen, Yukawa,
                                Tabulated, affine_transform,
                                check_singular_class, evaluate)


def test_coulomb_values_and_attributes():
    f = Coulomb(0.5)
    r = np.array([0.25, 1.0, 4.0])
    np.testing.assert_allclose(f(r), [-2.0, -0.5, -0.125], rtol=1e-15)
    assert f.coulomb_coeff == -0.5
    assert f.f_inf == 0.0
    assert f.kind == "coulomb"


def test_shifted_coulomb_values_and_attributes():
    f = ShiftedCoulomb(1.3, 0.4)
    r = np.array([0.5, 2.0])
    np.testing.assert_allclose(f(r), [-1.3 / 0.5 + 0.4, -1.3 / 2.0 + 0.4],
                               rtol=1e-15)
    assert f.coulomb_coeff == -1.3
    assert f.f_inf == 0.4


def test_hulthen_values_and_coulomb_limit():
    f = Hulthen(2.0, 0.7)
    r = np.array([0.3, 1.0, 5.0])
    np.testing.assert_allclose(f(r), -2.0 / np.expm1(0.7 * r), rtol=1e-14)
    # near the origin the shape approaches -(alpha/beta)/r
    r0 = 1e-7
    assert abs(f(np.array([r0]))[0] * r0 + 2.0 / 0.7) < 1e-6
    assert f.coulomb_coeff == -2.0 / 0.7


def test_yukawa_values():
    f = Yukawa(1.5)
    r = np.array([0.5, 2.0])
    np.testing.assert_allclose(f(r), -np.exp(-1.5 * r) / r, rtol=1e-15)
    assert f.coulomb_coeff == -1.0
    assert f.f_inf == 0.0


@pytest.mark.parametrize("bad", [
    lambda: Coulomb(0.0),
    lambda: Coulomb(-1.0),
    lambda: ShiftedCoulomb(-0.5, 0.0),
    lambda: Hulthen(1.0, 0.0),
    lambda: Yukawa(-2.0),
])
def test_constructor_validation(bad):
    with pytest.raises(ValueError):
        bad()


def test_evaluate_rejects_nonpositive_radius():
    f = Coulomb(1.0)
    with pytest.raises(ValueError):
        f.evaluate(np.array([0.5, 0.0]))
    with pytest.raises(ValueError):
        evaluate(f, np.array([-1.0]))


def test_tabulated_reproduces_knots_and_extends():
    r = np.linspace(0.5, 8.0, 25)
    truth = ShiftedCoulomb(1.1, 0.3)
    tab = Tabulated(r, truth(r))
    np.testing.assert_allclose(tab(r), truth(r), rtol=0, atol=1e-14)
    # below the first knot: c/r + d through the two innermost knots,
    # exact again for an actual shifted-Coulomb table
    np.testing.assert_allclose(tab(np.array([0.05, 0.2])),
                               truth(np.array([0.05, 0.2])), rtol=1e-12)
    # beyond the last knot the shape is held constant
    assert tab(100.0) == pytest.approx(truth(r[-1]))
    assert tab.coulomb_coeff == pytest.approx(-1.1, rel=1e-12)
    assert tab.f_inf == pytest.approx(truth(r[-1]))


def test_tabulated_scalar_and_custom_rule():
    tab = Tabulated([1.0, 2.0, 3.0], [-1.0, -0.5, -0.3],
                    small_r_rule=(-2.0, 0.25))
    val = tab(0.5)
    assert np.ndim(val) == 0
    assert val == pytest.approx(-2.0 / 0.5 + 0.25)
    assert tab.coulomb_coeff == -2.0


@pytest.mark.parametrize("r,f", [
    ([1.0], [-1.0]),                      # too few knots
    ([2.0, 1.0], [-1.0, -0.5]),           # decreasing radii
    ([0.0, 1.0], [-1.0, -0.5]),           # nonpositive radius
])
def test_tabulated_validation(r, f):
    with pytest.raises(ValueError):
        Tabulated(r, f)


def test_affine_transform_values_and_attributes():
    base = Hulthen(1.0, 1.0)
    g = affine_transform(base, 1.7, 0.3)
    r = np.array([0.4, 1.0, 3.0])
    np.testing.assert_allclose(g(r), 1.7 * base(r) + 0.3, rtol=1e-15)
    assert g.coulomb_coeff == pytest.approx(1.7 * base.coulomb_coeff)
    assert g.f_inf == pytest.approx(0.3)


def test_affine_transform_of_coulomb_stays_closed_form():
    g = affine_transform(Coulomb(0.5), 2.0, -1.0)
    assert isinstance(g, ShiftedCoulomb)
    assert g.a == pytest.approx(1.0)
    assert g.b == pytest.approx(-1.0)


def test_affine_transform_of_tabulated_scales_inner_rule():
    r = np.linspace(0.5, 5.0, 10)
    tab = Tabulated(r, -1.0 / r)
    g = affine_transform(tab, 2.0, 0.5)
    assert g.small_r_rule[0] == pytest.approx(2.0 * tab.small_r_rule[0])
    assert g(0.1) == pytest.approx(2.0 * tab(0.1) + 0.5)


def test_affine_transform_rejects_nonpositive_scale():
    with pytest.raises(ValueError):
        affine_transform(Coulomb(1.0), 0.0, 1.0)


def test_singular_class_membership():
    probes = np.geomspace(0.05, 20.0, 60)
    assert check_singular_class(Hulthen(1.0, 1.0), probes).is_member
    assert check_singular_class(Coulomb(1.0), probes).is_member
    assert check_singular_class(Yukawa(1.0), probes).is_member
    # a repulsive shape fails the negative-at-origin condition
    class Repulsive:
        def __call__(self, r):
            return 1.0 / np.asarray(r, float)

    report = check_singular_class(Repulsive(), probes)
    assert not report.is_member
    assert not report.verdicts["negative_at_origin"]


def test_singular_class_probe_validation():
    with pytest.raises(ValueError):
        check_singular_class(Coulomb(1.0), [])
    with pytest.raises(ValueError):
        check_singular_class(Coulomb(1.0), [1.0, 0.5])
