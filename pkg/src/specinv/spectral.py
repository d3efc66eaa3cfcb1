"""Spectral curves F(v), kinetic potentials f_bar(s), and K-functions.

The three objects are linked by Legendre-type transforms:

    f_bar(s) = max_v [ (F(v) - s) / v ]        (curve -> kinetic potential)
    F(v)     = min_s [ s + v f_bar(s) ]        (kinetic potential -> curve)
    K(r)     = max_v [ F(v) - v f(r) ]         (curve + shape -> K-function)

All maximizations run over the finite curve domain; optima landing on the
domain edge are flagged rather than extrapolated.
"""
import math
import warnings

import numpy as np
from scipy.interpolate import PchipInterpolator, make_interp_spline

GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(phi, lo, hi, rel=1e-8):
    x1, x2 = hi - GOLD * (hi - lo), lo + GOLD * (hi - lo)
    f1, f2 = phi(x1), phi(x2)
    while hi - lo > rel * max(abs(lo), abs(hi), 1e-12):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLD * (hi - lo)
            f2 = phi(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLD * (hi - lo)
            f1 = phi(x1)
    xm = 0.5 * (lo + hi)
    return phi(xm), xm


def maximize(phi, a, b, n_scan=60, rel=1e-8, margin=0.0):
    """Maximize phi on [a, b]: coarse scan, golden refinement, edge check.

    Returns (value, argmax, interior); `interior` is False when the argmax
    falls within `margin*(b-a)` of either edge, signalling that the true
    supremum may lie outside the domain.
    """
    xs = np.linspace(a, b, n_scan)
    vals = np.array([phi(x) for x in xs])
    k = int(np.argmax(vals))
    lo = xs[max(k - 1, 0)]
    hi = xs[min(k + 1, n_scan - 1)]
    vm, xm = golden_max(phi, lo, hi, rel)
    for edge in (a, b):
        ve = phi(edge)
        if ve > vm:
            vm, xm = ve, edge
    delta = margin * (b - a)
    interior = (a + delta < xm < b - delta)
    return vm, xm, interior


class SpectralCurve:
    """Ground-state energy curve tabulated at sample couplings.

    Stored in the working variable (v, or u = v - v0 when a shift was
    applied); the interpolant is a not-a-knot cubic spline, which reproduces
    quadratic model curves exactly between knots.
    """

    def __init__(self, samples, v0=None, dropped=0):
        samples = np.asarray(samples, float)
        if samples.ndim != 2 or samples.shape[1] != 2 or len(samples) < 4:
            raise ValueError("need at least 4 (coupling, energy) samples")
        if np.any(np.diff(samples[:, 0]) <= 0):
            raise ValueError("sample couplings must be strictly increasing")
        self.samples = samples
        self.v0 = None if v0 is None else float(v0)
        self.dropped = int(dropped)
        x, y = samples[:, 0], samples[:, 1]
        self._spl = make_interp_spline(x, y, k=min(3, len(x) - 1))
        self.v1 = float(x[0])
        dd = np.diff(y, 2) if len(y) >= 3 else np.array([])
        scale = np.diff(x)
        dd2 = dd / (scale[:-1] * scale[1:]) if len(dd) else dd
        self.concave = bool(np.all(dd2 <= 1e-6)) if len(dd2) else True
        if not self.concave:
            warnings.warn("spectral curve samples are not concave within noise "
                          "tolerance; inversion may need regularization",
                          stacklevel=2)
        knot_err = float(np.max(np.abs(self._spl(x) - y))) if len(x) else 0.0
        self.tolerance = 10.0 * knot_err

    @property
    def domain(self):
        return float(self.samples[0, 0]), float(self.samples[-1, 0])

    def __call__(self, x):
        return self._spl(x)

    def __repr__(self):
        lo, hi = self.domain
        return (f"SpectralCurve({len(self.samples)} pts, [{lo:g}, {hi:g}]"
                + (f", v0={self.v0:g}" if self.v0 is not None else "") + ")")


def build_curve(data, shift=None, dropped=0):
    """Interpolating curve through (v, E) data; >= 4 strictly increasing points.

    With `shift` = v0, the curve is stored in u = v - v0.
    """
    pts = np.asarray(list(data), float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("data must be (coupling, energy) pairs")
    if len(pts) < 4:
        raise ValueError("need at least 4 data points to build a curve")
    if np.any(np.diff(pts[:, 0]) <= 0):
        raise ValueError("data abscissae must be strictly increasing")
    if shift is not None:
        pts = pts.copy()
        pts[:, 0] -= float(shift)
    return SpectralCurve(pts, v0=shift, dropped=dropped)


class KineticPotential:
    """Samples (s, f_bar) with a monotone-decreasing interpolant."""

    def __init__(self, s, fbar, boundary=None, source=""):
        s = np.asarray(s, float)
        fbar = np.asarray(fbar, float)
        if np.any(s <= 0) or np.any(np.diff(s) <= 0):
            raise ValueError("s grid must be positive and strictly increasing")
        if np.any(np.diff(fbar) >= 1e-12 * max(1.0, float(np.max(np.abs(fbar))))):
            raise ValueError("kinetic potential must be strictly decreasing in s")
        self.s = s
        self.fbar = fbar
        self.boundary = (np.zeros(len(s), bool) if boundary is None
                         else np.asarray(boundary, bool))
        self.source = source
        self._interp = PchipInterpolator(s, fbar, extrapolate=False)

    @property
    def domain(self):
        return float(self.s[0]), float(self.s[-1])

    def __call__(self, s):
        return self._interp(s)


class KFunction:
    """Samples (r, K) of K(r) = (f_bar^-1 o f)(r) on a radial grid."""

    def __init__(self, r, K, boundary=None, source=""):
        r = np.asarray(r, float)
        K = np.asarray(K, float)
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("r grid must be positive and strictly increasing")
        self.r = r
        self.K = K
        self.boundary = (np.zeros(len(r), bool) if boundary is None
                         else np.asarray(boundary, bool))
        self.source = source
        self._interp = PchipInterpolator(r, K, extrapolate=False)

    @property
    def domain(self):
        return float(self.r[0]), float(self.r[-1])

    def __call__(self, r):
        return self._interp(r)


def kinetic_potential_from_curve(curve, s_grid, margin=0.0, source=""):
    """f_bar(s) = max over the curve domain of (F(v) - s)/v."""
    lo, hi = curve.domain
    if not (hi > lo):
        raise ValueError("curve domain is empty")
    s_grid = np.asarray(s_grid, float)
    fbar = np.empty(len(s_grid))
    flags = np.zeros(len(s_grid), bool)
    for i, s in enumerate(s_grid):
        val, _, interior = maximize(lambda v: (float(curve(v)) - s) / v,
                                    lo, hi, margin=margin)
        fbar[i] = val
        flags[i] = not interior
    return KineticPotential(s_grid, fbar, boundary=flags,
                            source=source or repr(curve))


def energy_from_kinetic_potential(kp, v):
    """F(v) = min_s [s + v*f_bar(s)] over the kinetic-potential domain."""
    if v <= 0:
        raise ValueError("coupling must be positive")
    lo, hi = kp.domain
    val, _, interior = maximize(lambda s: -(s + v * float(kp(s))), lo, hi)
    if not interior:
        warnings.warn("energy_from_kinetic_potential: minimizer at domain edge",
                      stacklevel=2)
    return -val


def k_function_from_curve(curve, shape, r_grid, margin=0.0, source=""):
    """K(r) = max over the curve domain of [F(v) - v*f(r)]."""
    r_grid = np.asarray(r_grid, float)
    if np.any(r_grid <= 0) or np.any(np.diff(r_grid) <= 0):
        raise ValueError("r grid must be positive and strictly increasing")
    lo, hi = curve.domain
    fr = shape(r_grid)
    K = np.empty(len(r_grid))
    flags = np.zeros(len(r_grid), bool)
    for i, (r, f_r) in enumerate(zip(r_grid, fr)):
        val, _, interior = maximize(lambda v: float(curve(v)) - v * f_r,
                                    lo, hi, margin=margin)
        K[i] = val
        flags[i] = not interior
    return KFunction(r_grid, K, boundary=flags,
                     source=source or f"{shape!r}")


def k_function_from_shape(shape, m, r_grid, coupling_grid, margin=0.0,
                          rel_tol=1e-6):
    """K for an arbitrary shape: solve F on the coupling grid, then transform."""
    from .eigensolver import energy_curve

    curve = energy_curve(shape, coupling_grid, m=m, rel_tol=rel_tol)
    return k_function_from_curve(curve, shape, r_grid, margin=margin,
                                 source=f"{shape!r}")


def energy_from_k(shape, k, v):
    """min over r of [K(r) + v*f(r)]; exact when k belongs to the shape."""
    lo, hi = k.domain
    val, _, interior = maximize(lambda r: -(float(k(r)) + v * float(shape(r))),
                                lo, hi)
    if not interior:
        warnings.warn("energy_from_k: minimizer at domain edge", stacklevel=2)
    return -val
