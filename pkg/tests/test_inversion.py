import numpy as np
import pytest

from specinv import dataio
from specinv.models import CoulombModelParams, coulomb_ground_curve
from specinv.potentials import Coulomb, ShiftedCoulomb
from specinv.spectral import build_curve
from specinv.inversion import (InverseLinearTail, SoftCoreTail,
                               InversionConfig, estimate_critical_coupling,
                               iterate_once, invert, _tail_plan)


def quad_curve(a, b, m=1.0, domain=None):
    return coulomb_ground_curve(CoulombModelParams(a, b, 0.0, m),
                                domain=domain, n_samples=14)


def test_inverse_linear_tail_recovers_exact_knots():
    r = np.geomspace(0.4, 20.0, 30)
    shape = InverseLinearTail(r, -1.3 / r + 0.4)
    assert shape.coulomb_coeff == pytest.approx(-1.3, rel=1e-10)
    assert shape.f_inf == pytest.approx(0.4, rel=1e-10)
    rr = np.geomspace(0.05, 200.0, 40)      # probes both extensions
    np.testing.assert_allclose(shape(rr), -1.3 / rr + 0.4, rtol=1e-9)
    assert np.ndim(shape(1.0)) == 0


def test_inverse_linear_tail_needs_four_knots():
    with pytest.raises(ValueError):
        InverseLinearTail(np.array([1.0, 2.0, 3.0]), np.array([-1.0, -0.5, -0.3]))


def test_soft_core_tail_is_continuous_at_graft():
    from specinv.potentials import Hulthen
    truth = Hulthen(1.0, 1.0)
    r = np.geomspace(0.2, 6.0, 40)
    shape = SoftCoreTail(r, truth(r), r_e=2.0, lam=1.0)
    eps = 1e-9
    left = shape(2.0 - eps)
    right = shape(2.0 + eps)
    assert abs(left - right) < 1e-6
    # beyond the graft the tail decays toward zero from below
    far = shape(np.array([5.0, 10.0, 20.0]))
    assert np.all(far < 0.0)
    assert np.all(np.diff(far) > 0.0)
    assert shape.f_inf == 0.0
    # the core extension agrees with the full evaluation below the knots
    assert shape(0.05) == pytest.approx(shape.core(0.05))


def test_tail_plan_classifies_crossing_and_tangent():
    ds = dataio.builtin("P2")
    v0 = estimate_critical_coupling(ds.points)
    curve = build_curve(ds.points, shift=v0)
    mode, clamp, note = _tail_plan(curve, 1.0)
    assert mode == "inverse-linear"

    # a tangent (double-root) curve with solver-scale noise must still be
    # recognized as soft-core
    rng = np.random.default_rng(7)
    u = np.linspace(1.1, 8.0, 13)
    F = -(u - 1.0) ** 2 / 4.0 + 1e-6 * rng.standard_normal(13)
    curve2 = build_curve(np.column_stack([u, F]), shift=0.0)
    mode2, clamp2, _ = _tail_plan(curve2, 1.0)
    assert mode2 == "soft-core"
    vc, A = clamp2
    assert vc == pytest.approx(1.0, abs=5e-3)
    assert A == pytest.approx(0.25, rel=2e-2)


def test_estimate_critical_coupling_quadratic_and_bracketed():
    assert estimate_critical_coupling(dataio.builtin("P2").points) == \
        pytest.approx(30.766, abs=0.05)
    # bracketed sign change: the interpolant root wins
    u = np.linspace(0.5, 3.5, 7)
    F = 0.5 * u - 0.25 * u ** 2          # roots at 0 and 2
    v0 = estimate_critical_coupling(np.column_stack([u, F]))
    assert v0 == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(ValueError):
        estimate_critical_coupling(np.column_stack([u, u ** 2]))
    with pytest.raises(ValueError):
        estimate_critical_coupling(np.column_stack([u, 0.0 * u]))


@pytest.mark.parametrize("kw", [
    dict(max_iterations=0),
    dict(m=0.0),
    dict(r_grid=np.array([0.5, 0.4, 0.6])),
    dict(r_grid=np.linspace(-1.0, 2.0, 12)),
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        InversionConfig(**kw)


def test_coupling_grid_validation():
    curve = quad_curve(1.0, 0.4)
    with pytest.raises(ValueError):
        iterate_once(curve, Coulomb(0.2),
                     InversionConfig(coupling_grid=np.array([])))
    lo, hi = curve.domain
    with pytest.raises(ValueError):
        iterate_once(curve, Coulomb(0.2),
                     InversionConfig(coupling_grid=np.array([lo, hi * 2.0])))


def test_iterate_once_recovers_shifted_coulomb():
    curve = quad_curve(1.3, 0.4)
    cfg = InversionConfig(r_grid=np.geomspace(0.3, 30.0, 90))
    nxt, k, residual = iterate_once(curve, Coulomb(0.2), cfg)
    assert residual > 0.1                     # the seed curve is far off
    inner = ~k.boundary
    np.testing.assert_allclose(k.K[inner], 1.0 / k.r[inner] ** 2, rtol=1e-6)
    r = cfg.r_grid[(cfg.r_grid > 0.35) & (cfg.r_grid < 25.0)]
    np.testing.assert_allclose(nxt(r), -1.3 / r + 0.4, atol=1e-8)
    assert nxt.coulomb_coeff == pytest.approx(-1.3, abs=1e-8)
    assert nxt.f_inf == pytest.approx(0.4, abs=1e-8)


def test_invert_converges_on_model_curve():
    curve = quad_curve(1.0, 0.3)
    cfg = InversionConfig(max_iterations=4)
    run = invert(curve, cfg)
    assert run.converged
    assert run.iterations <= 3
    assert run.residual_history[-1] <= 1e-3
    r = np.geomspace(0.5, 20.0, 50)
    np.testing.assert_allclose(run.shape(r), -1.0 / r + 0.3, atol=1e-6)
    assert run.trust_windows          # recorded for every completed iteration


def test_invert_seed_independence():
    curve = quad_curve(0.8, 0.2)
    runs = [invert(curve, InversionConfig(seed=Coulomb(alpha),
                                          max_iterations=3))
            for alpha in (0.2, 1.0)]
    r = np.geomspace(0.5, 15.0, 40)
    np.testing.assert_allclose(runs[0].shape(r), runs[1].shape(r), atol=2e-3)


def test_run_residuals_decrease_monotonically():
    curve = quad_curve(1.0, 0.0)
    run = invert(curve, InversionConfig(max_iterations=3))
    h = run.residual_history
    assert all(b <= a * 1.25 for a, b in zip(h, h[1:]))
