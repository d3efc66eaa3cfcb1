"""Bound-state eigenvalues of H = -(1/m) Delta + v f(r), reduced to the radial
equation u'' = m [v f(r) + l(l+1)/(m r^2) - E] u with u(0) = 0.

The discretization is a Numerov three-point recursion on a uniform grid in
the scaled radius rho = r/L.  Eigenvalues are located by node-count bisection
followed by a root solve on the matching-point defect, with grid and domain
sizes increased until the estimated error meets the tolerance.  Warm starts
(an energy estimate with an uncertainty) skip the coarse search, which is
what makes repeated curve evaluations during inversion affordable.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .potentials import PotentialShape


@dataclass
class EigenProblem:
    shape: PotentialShape
    coupling: float
    m: float = 1.0
    n: int = 0
    l: int = 0

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.n < 0 or self.l < 0:
            raise ValueError("quantum numbers must be non-negative")


@dataclass
class EigenResult:
    energy: float
    converged: bool
    node_count: int
    r_max: float
    estimated_error: float


def _sweeps_setup(W, h):
    h2 = h * h
    t = (h2 / 12.0) * W
    t[0] = 0.0
    return h2, (1.0 - t).tolist(), (2.0 + 10.0 * t).tolist()


def _series(h, l, q):
    # u(r) ~ r^(l+1) (1 + c r) with c from the Coulomb-like coefficient
    c = -q / (2.0 * (l + 1.0))
    u1 = h ** (l + 1) * (1.0 + c * h)
    u2 = (2 * h) ** (l + 1) * (1.0 + c * 2 * h)
    return u1, u2


def _count_nodes(pp, qq, h2, eps, u1, u2):
    e12 = h2 * eps / 12.0
    e10 = 10.0 * e12
    uold, u = u1, u2
    nodes = 0
    n = len(pp)
    for i in range(2, n - 1):
        unew = (u * (qq[i] - e10) - uold * (pp[i - 1] + e12)) / (pp[i + 1] + e12)
        if unew != 0.0 and (unew > 0.0) != (u > 0.0):
            nodes += 1
        if unew > 1e250 or unew < -1e250:
            unew *= 1e-250
            u *= 1e-250
        uold, u = u, unew
    return nodes


def _match_defect(pp, qq, h2, eps, u1, u2, mp):
    e12 = h2 * eps / 12.0
    e10 = 10.0 * e12
    uold, u = u1, u2
    for i in range(2, mp):
        unew = (u * (qq[i] - e10) - uold * (pp[i - 1] + e12)) / (pp[i + 1] + e12)
        if abs(unew) > 1e250:
            unew *= 1e-250
            u *= 1e-250
        uold, u = u, unew
    om1, om = uold, u
    n = len(pp)
    uold, u = 0.0, 1e-280
    for i in range(n - 2, mp, -1):
        unew = (u * (qq[i] - e10) - uold * (pp[i + 1] + e12)) / (pp[i - 1] + e12)
        if abs(unew) > 1e250:
            unew *= 1e-250
            u *= 1e-250
        uold, u = u, unew
    ip1, im = uold, u
    if om == 0.0 or im == 0.0:
        return math.nan
    return (pp[mp - 1] + e12) * om1 / om + (pp[mp + 1] + e12) * ip1 / im - (qq[mp] - e10)


def _locate(W, h, l, q, n_target, winf, bracket=None):
    """n_target-th eigenvalue of the discretized problem, or None."""
    N = len(W) - 1
    h2, pp, qq = _sweeps_setup(W, h)
    u1, u2 = _series(h, l, q)
    count = lambda e: _count_nodes(pp, qq, h2, e, u1, u2)
    scale = max(1.0, abs(winf), abs(float(np.min(W[1:]))) * 0.02)
    lo = hi = None
    if bracket is not None:
        blo, bhi = bracket
        bhi = min(bhi, winf - 1e-12 * scale)
        if blo < bhi and count(blo) <= n_target < count(bhi):
            lo, hi = blo, bhi
    if lo is None:
        hi = winf - 1e-9 * scale
        if count(hi) < n_target + 1:
            return None
        D = 0.5 * scale
        lo = winf - D
        for _ in range(200):
            if count(lo) <= n_target:
                break
            D *= 2.0
            lo = winf - D
        else:
            return None
    c_lo, c_hi = count(lo), count(hi)
    it = 0
    while it < 90 and not (c_hi == n_target + 1 and c_lo == n_target
                           and (hi - lo) <= 1e-2 * max(abs(lo), abs(hi), 1e-3 * scale)):
        mid = 0.5 * (lo + hi)
        c = count(mid)
        if c <= n_target:
            lo, c_lo = mid, c
        else:
            hi, c_hi = mid, c
        it += 1
    wmid = W - 0.5 * (lo + hi)
    allowed = np.nonzero(wmid[1:] < 0.0)[0]
    mp = (int(allowed[-1]) + 1) if len(allowed) else N // 2
    mp = min(max(mp, 5), N - 5)
    g = lambda e: _match_defect(pp, qq, h2, e, u1, u2, mp)
    glo, ghi = g(lo), g(hi)
    if math.isfinite(glo) and math.isfinite(ghi) and glo * ghi < 0.0:
        return brentq(g, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 4e-16 * max(abs(mid), 1e-9 * scale):
            break
        if count(mid) <= n_target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class _ScaledProblem:
    """Radial problem in rho = r/L units: eps = m L^2 E."""

    def __init__(self, f, coupling, m=1.0, l=0, L=1.0, f_inf=0.0, g0=0.0):
        self.f, self.c, self.m, self.l, self.L = f, coupling, m, l, L
        self.mL2 = m * L * L
        self.winf = self.mL2 * coupling * f_inf
        self.q = -m * L * coupling * g0
        self.n_target = 0

    def W(self, rmax, N):
        rho = np.arange(N + 1) * (rmax / N)
        rho[0] = 1.0
        W = self.mL2 * self.c * self.f(self.L * rho) + self.l * (self.l + 1) / rho ** 2
        W[0] = 0.0
        return W

    def locate(self, rmax, N, bracket=None):
        return _locate(self.W(rmax, N), rmax / N, self.l, self.q,
                       self.n_target, self.winf, bracket)


def _solve(f, coupling, m=1.0, l=0, n=0, L=1.0, f_inf=0.0, g0=0.0,
           n_points=4000, rel_tol=1e-6, abs_tol=0.0, pts_per_unit=30.0,
           E_est=None, E_err_est=None):
    """Low-level solve.  Returns (E, err, r_max) or None when no bound state.

    A failed warm start (estimate no longer near the true level) falls back
    to the cold search rather than reporting no bound state.
    """
    out = _solve_once(f, coupling, m, l, n, L, f_inf, g0, n_points,
                      rel_tol, abs_tol, pts_per_unit, E_est, E_err_est)
    if out is None and E_est is not None:
        out = _solve_once(f, coupling, m, l, n, L, f_inf, g0, n_points,
                          rel_tol, abs_tol, pts_per_unit, None, None)
    return out


def _solve_once(f, coupling, m, l, n, L, f_inf, g0, n_points, rel_tol,
                abs_tol, pts_per_unit, E_est, E_err_est):
    P = _ScaledProblem(f, coupling, m, l, L, f_inf, g0)
    P.n_target = n
    est = None
    if E_est is not None:
        est = E_est * P.mL2
        if est >= P.winf:
            est = None
    if est is None:
        rmax = 60.0
        for _ in range(7):
            Np = max(1500, min(int(rmax * 6), 25000))
            est = P.locate(rmax, Np)
            if est is not None:
                break
            rmax *= 4.0
        if est is None:
            return None
    kappa = math.sqrt(max(P.winf - est, 1e-300))
    rmax = max(30.0 / kappa, 20.0)
    Wc = P.W(rmax, 2000)
    allowed = np.nonzero((Wc - est)[1:] < 0)[0]
    if len(allowed):
        rmax = max(rmax, 5.0 * (allowed[-1] + 1) * rmax / 2000)
    N = max(n_points, int(min(rmax * pts_per_unit, 250000)))
    span = abs(P.mL2) * (E_err_est if E_err_est else 0.0) + 0.05 * max(abs(est), 1e-6)
    e1 = P.locate(rmax, N, (est - span, est + span))
    if e1 is None:
        e1 = P.locate(rmax, N)
        if e1 is None:
            return None
    br = lambda e, d: (e - d, e + d)
    e2 = P.locate(rmax, 2 * N, br(e1, max(abs(e1) * 2e-4, 1e-9)))
    if e2 is None:
        e2 = P.locate(rmax, 2 * N)
        if e2 is None:
            return None
    err = abs(e2 - e1)
    target = lambda e: max(rel_tol * abs(e), abs_tol * P.mL2)
    while err > target(e2) and N < 300000:
        N *= 2
        e1 = e2
        e2 = P.locate(rmax, 2 * N, br(e1, max(err / 2.0, 1e-12 * abs(e1))))
        if e2 is None:
            e2 = P.locate(rmax, 2 * N)
            if e2 is None:
                return None
        err = abs(e2 - e1)
    # domain-doubling check: tail must not move the eigenvalue
    for _ in range(3):
        e3 = P.locate(2 * rmax, 4 * N, br(e2, max(6.0 * err, 1e-10 * abs(e2))))
        if e3 is None:
            e3 = P.locate(2 * rmax, 4 * N)
            if e3 is None:
                break
        if abs(e3 - e2) <= 1e-8 * max(abs(e2), 1e-30):
            break
        rmax *= 2.0
        N *= 2
        err = max(err, abs(e3 - e2))
        e2 = e3
    return e2 / P.mL2, max(err, abs(e2) * 4e-16) / P.mL2, rmax * P.L


def solve_state(problem, rel_tol=1e-6, abs_tol=0.0, E_est=None, E_err_est=None):
    """Eigenvalue of the (n, l) radial state; converged=False when unbound."""
    shape = problem.shape
    out = _solve(shape, problem.coupling, m=problem.m, l=problem.l, n=problem.n,
                 f_inf=getattr(shape, "f_inf", 0.0),
                 g0=getattr(shape, "coulomb_coeff", 0.0),
                 rel_tol=rel_tol, abs_tol=abs_tol,
                 E_est=E_est, E_err_est=E_err_est)
    if out is None:
        return EigenResult(math.nan, False, problem.n, 0.0, math.inf)
    E, err, rmax = out
    return EigenResult(E, True, problem.n, rmax, err)


def solve_ground_state(problem, **kw):
    if problem.n != 0 or problem.l != 0:
        problem = EigenProblem(problem.shape, problem.coupling, problem.m, 0, 0)
    return solve_state(problem, **kw)


def energy_curve(shape, couplings, m=1.0, rel_tol=1e-6, abs_tol=0.0):
    """Ground-state curve F(v) tabulated on the given couplings.

    Couplings with no bound state are dropped (domain shrunk from the left);
    returns a SpectralCurve built on the surviving points.
    """
    from .spectral import build_curve  # local import: spectral depends on us

    couplings = np.sort(np.asarray(couplings, float))
    pts = []
    prev = None
    for v in couplings:
        res = solve_ground_state(EigenProblem(shape, float(v), m),
                                 rel_tol=rel_tol, abs_tol=abs_tol,
                                 E_est=prev, E_err_est=0.2 * abs(prev) if prev else None)
        if res.converged:
            pts.append((float(v), res.energy))
            prev = res.energy
        else:
            prev = None
    if len(pts) < 4:
        raise RuntimeError("energy_curve: fewer than 4 couplings produced bound states")
    return build_curve(pts, dropped=len(couplings) - len(pts))
