"""Closed-form spectral models and parameter fitting.

Two exactly solvable families share the same ground-state curve:

    shifted Coulomb   f(r) = -a/r + b   with coupling u = v - v0,
                      E_nl = b u - m a^2 u^2 / [4 (1+n+l)^2]
    Hulthen           f(r) = -alpha/(exp(beta r) - 1),
                      E_n  = -[v alpha - beta^2 (n+1)^2]^2 / [2 beta (n+1)]^2

Fitting {a, b, v0} to (v, E) data reduces to least squares on the quadratic
F(v) = c2 v^2 + c1 v + c0, with two fallbacks needed in practice: a window
shrink when the full data set is not concave, and a b = 0 constrained refit
when the quadratic has no real roots.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .potentials import Hulthen, ShiftedCoulomb
from .spectral import SpectralCurve


@dataclass
class CoulombModelParams:
    a: float
    b: float
    v0: float
    m: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("coulomb weight a must be positive")
        if self.m <= 0:
            raise ValueError("mass must be positive")

    def shape(self):
        return ShiftedCoulomb(self.a, self.b)

    def alternate(self):
        """The second parametrization producing the identical curve."""
        return CoulombModelParams(self.a, -self.b,
                                  self.v0 + 4.0 * self.b / self.a ** 2, self.m)


@dataclass
class HulthenModelParams:
    alpha: float
    beta: float
    b: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("hulthen parameters must be positive")

    def shape(self):
        return Hulthen(self.alpha, self.beta)


@dataclass
class FitReport:
    params: CoulombModelParams
    rms_residual: float
    max_residual: float
    coefficients: tuple = (0.0, 0.0, 0.0)   # c2, c1, c0 of the raw quadratic
    note: str = ""
    window: int = 0                          # leading points used by the fit
    alternate: CoulombModelParams = field(default=None)

    def __post_init__(self):
        if self.alternate is None and self.params is not None:
            self.alternate = self.params.alternate()

    def lines(self):
        c2, c1, c0 = self.coefficients
        out = []
        if self.params is not None:
            p = self.params
            out += [f"a   = {p.a!r}",
                    f"b   = {p.b!r}",
                    f"v0  = {p.v0!r}"]
        out += [f"quadratic = ({c2!r}, {c1!r}, {c0!r})",
                f"rms_residual = {self.rms_residual:.6g}",
                f"max_residual = {self.max_residual:.6g}",
                f"window = {self.window}",
                f"note = {self.note}"]
        if self.alternate is not None:
            out.append(f"alternate = (a={self.alternate.a!r}, "
                       f"b={self.alternate.b!r}, v0={self.alternate.v0!r})")
        return out


def coulomb_level(params, v, n=0, l=0):
    """E = b(v - v0) - m a^2 (v - v0)^2 / [4 (1 + n + l)^2]."""
    u = np.asarray(v, float) - params.v0
    return params.b * u - params.m * params.a ** 2 * u ** 2 / (4.0 * (1 + n + l) ** 2)


def coulomb_ground_curve(params, domain=None, n_samples=12):
    """Ground-state curve F(u) = b u - m a^2 u^2 / 4 as a SpectralCurve in u.

    The cubic-spline interpolant reproduces the quadratic exactly, so the
    returned object is the closed-form curve for all practical purposes.
    """
    if domain is None:
        u_c = 4.0 * params.b / params.a ** 2
        hi = max(u_c, 0.0) + 4.0 / params.a ** 2
        domain = (hi * 1e-3, hi)
    lo, hi = float(domain[0]), float(domain[1])
    u = np.linspace(lo, hi, n_samples)
    F = params.b * u - params.m * params.a ** 2 * u ** 2 / 4.0
    return SpectralCurve(np.column_stack([u, F]), v0=params.v0)


def _recover(c2, c1, c0, m):
    """Parameters from quadratic coefficients; returns (params-or-None, note)."""
    if c2 >= 0:
        return None, "not concave"
    a = 2.0 * np.sqrt(-c2 / m)
    disc = c1 * c1 - 4.0 * c2 * c0
    scale = max(c1 * c1, 4.0 * abs(c2 * c0), 1e-300)
    if disc / scale < 1e-10:
        # numerically a double root (or complex pair): the curve just touches
        # zero; the admissible model there has b = 0 and v0 at the vertex
        return CoulombModelParams(a, 0.0, -c1 / (2.0 * c2), m), "degenerate"
    r1 = (-c1 + np.sqrt(disc)) / (2.0 * c2)
    r2 = (-c1 - np.sqrt(disc)) / (2.0 * c2)
    v0, other = (r1, r2) if abs(r1) <= abs(r2) else (r2, r1)
    b = c1 + 2.0 * c2 * v0                     # F'(v0)
    return CoulombModelParams(a, b, v0, m), f"root {v0:.6g} (over {other:.6g})"


def fit_coulomb(data, m=1.0, polish=False):
    """Least-squares fit of {a, b, v0} to (v, E) points.

    Strategy: unweighted least squares on the quadratic over the full data;
    if the quadratic is not concave, drop trailing (deepest) points until it
    is; if it has no real roots, refit with b = 0 enforced (two-parameter
    nonlinear least squares started from the vertex).
    """
    pts = np.asarray(list(data), float)
    if pts.ndim != 2 or len(pts) < 3:
        raise ValueError("need at least 3 (v, E) points")
    v_all, e_all = pts[:, 0], pts[:, 1]

    params = None
    note = ""
    window = len(pts)
    c2 = c1 = c0 = 0.0
    for k in range(len(pts), 2, -1):
        c2, c1, c0 = np.polyfit(v_all[:k], e_all[:k], 2)
        params, note = _recover(c2, c1, c0, m)
        if note != "not concave":
            window = k
            break
    if params is None:
        raise ValueError("data is not concave on any trailing-trimmed window")
    if window < len(pts):
        note += f"; fitted on leading {window} of {len(pts)} points"

    if note.startswith("degenerate"):
        # constrained refit: E = -m a^2 (v - v0)^2 / 4 with b = 0
        def res(p):
            return -m * p[0] ** 2 * (v_all[:window] - p[1]) ** 2 / 4.0 - e_all[:window]
        sol = least_squares(res, [params.a, params.v0], method="lm")
        params = CoulombModelParams(float(abs(sol.x[0])), 0.0, float(sol.x[1]), m)
    elif polish:
        def res(p):
            u = v_all[:window] - p[2]
            return p[1] * u - m * p[0] ** 2 * u ** 2 / 4.0 - e_all[:window]
        sol = least_squares(res, [params.a, params.b, params.v0], method="lm")
        if np.max(np.abs(sol.fun)) <= np.max(np.abs(res([params.a, params.b, params.v0]))):
            params = CoulombModelParams(float(abs(sol.x[0])), float(sol.x[1]),
                                        float(sol.x[2]), m)

    r = coulomb_level(params, v_all) - e_all
    return FitReport(params=params,
                     rms_residual=float(np.sqrt(np.mean(r * r))),
                     max_residual=float(np.max(np.abs(r))),
                     coefficients=(float(c2), float(c1), float(c0)),
                     note=note, window=window)


def hulthen_level(params, v, n=0):
    """Exact s-state energy; requires v*alpha >= beta^2 (n+1)^2."""
    va = v * params.alpha
    bn = params.beta ** 2 * (n + 1) ** 2
    if va < bn:
        raise ValueError(f"no bound state: v*alpha = {va:g} < beta^2 (n+1)^2 = {bn:g}")
    return -(va - bn) ** 2 / (2.0 * params.beta * (n + 1)) ** 2


def hulthen_equivalent(params):
    """Hulthen parameters whose ground-state curve (plus the b(v - v0) term)
    coincides with the shifted-Coulomb model curve: alpha = v0 a^2, beta = v0 a."""
    if params.v0 <= 0:
        raise ValueError("equivalent Hulthen form requires v0 > 0")
    return HulthenModelParams(alpha=params.v0 * params.a ** 2,
                              beta=params.v0 * params.a,
                              b=params.b, v0=params.v0)
