"""Radial potential shapes f(r) for Hamiltonians of the form H = -Delta + v f(r).

Analytic families (Coulomb, shifted Coulomb, Hulthen, Yukawa) plus tabulated
shapes produced by the inversion pipeline.  All shapes are callables of r > 0
and carry two solver-facing attributes:

    coulomb_coeff -- c in f(r) ~ c/r + O(1) near the origin
    f_inf         -- limit of f(r) as r -> infinity
"""
import numpy as np
from scipy.interpolate import PchipInterpolator


class PotentialShape:
    """Base class; concrete shapes implement __call__ for vectorized r > 0."""
    kind = "generic"
    coulomb_coeff = 0.0
    f_inf = 0.0

    def __call__(self, r):
        raise NotImplementedError

    def evaluate(self, r):
        r = np.asarray(r, float)
        if np.any(r <= 0.0):
            raise ValueError("potential shapes are defined for r > 0 only")
        return self(r)


class Coulomb(PotentialShape):
    kind = "coulomb"

    def __init__(self, alpha):
        if alpha <= 0:
            raise ValueError("coulomb strength alpha must be positive")
        self.alpha = float(alpha)
        self.coulomb_coeff = -self.alpha

    def __call__(self, r):
        return -self.alpha / np.asarray(r, float)

    def __repr__(self):
        return f"coulomb({self.alpha:g})"


class ShiftedCoulomb(PotentialShape):
    """f(r) = -a/r + b."""
    kind = "shifted-coulomb"

    def __init__(self, a, b):
        if a <= 0:
            raise ValueError("coulomb weight a must be positive")
        self.a = float(a)
        self.b = float(b)
        self.coulomb_coeff = -self.a
        self.f_inf = self.b

    def __call__(self, r):
        return -self.a / np.asarray(r, float) + self.b

    def __repr__(self):
        return f"shifted-coulomb({self.a:g},{self.b:g})"


class Hulthen(PotentialShape):
    """f(r) = -alpha / (exp(beta r) - 1); ~ -(alpha/beta)/r near the origin."""
    kind = "hulthen"

    def __init__(self, alpha, beta):
        if alpha <= 0 or beta <= 0:
            raise ValueError("hulthen parameters must be positive")
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.coulomb_coeff = -self.alpha / self.beta

    def __call__(self, r):
        x = np.clip(self.beta * np.asarray(r, float), 1e-14, 700.0)
        return -self.alpha / np.expm1(x)

    def __repr__(self):
        return f"hulthen({self.alpha:g},{self.beta:g})"


class Yukawa(PotentialShape):
    """f(r) = -exp(-a r) / r."""
    kind = "yukawa"

    def __init__(self, a):
        if a <= 0:
            raise ValueError("yukawa range parameter must be positive")
        self.a = float(a)
        self.coulomb_coeff = -1.0

    def __call__(self, r):
        r = np.asarray(r, float)
        return -np.exp(-np.minimum(self.a * r, 700.0)) / r

    def __repr__(self):
        return f"yukawa({self.a:g})"


class Tabulated(PotentialShape):
    """Shape given on knots (r_i, f_i): monotone cubic between knots,
    c/r + d below the first knot, constant beyond the last."""
    kind = "tabulated"

    def __init__(self, r, f, small_r_rule=None):
        r = np.asarray(r, float)
        f = np.asarray(f, float)
        if r.ndim != 1 or len(r) < 2 or np.any(np.diff(r) <= 0) or r[0] <= 0:
            raise ValueError("tabulated shape needs >= 2 strictly increasing positive radii")
        self.r = r
        self.fv = f
        self._interp = PchipInterpolator(r, f, extrapolate=False)
        if small_r_rule is None:
            # exact c/r + d through the two innermost knots
            c = (f[0] - f[1]) / (1.0 / r[0] - 1.0 / r[1])
            small_r_rule = (c, f[0] - c / r[0])
        self.small_r_rule = (float(small_r_rule[0]), float(small_r_rule[1]))
        self.coulomb_coeff = self.small_r_rule[0]
        self.f_inf = float(f[-1])

    def __call__(self, r):
        r = np.asarray(r, float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        lo = r < self.r[0]
        hi = r > self.r[-1]
        mid = ~(lo | hi)
        c, d = self.small_r_rule
        out[lo] = c / r[lo] + d
        out[hi] = self.fv[-1]
        out[mid] = self._interp(r[mid])
        return out[0] if scalar else out

    def __repr__(self):
        return f"tabulated({len(self.r)} knots, r in [{self.r[0]:g}, {self.r[-1]:g}])"


def evaluate(shape, r):
    """Evaluate a shape at r > 0 (wrapper mirroring the shape method)."""
    return shape.evaluate(r)


class _Affine(PotentialShape):
    kind = "affine"

    def __init__(self, base, A, B):
        self.base = base
        self.A = float(A)
        self.B = float(B)
        self.coulomb_coeff = self.A * base.coulomb_coeff
        self.f_inf = self.A * base.f_inf + self.B

    def __call__(self, r):
        return self.A * self.base(r) + self.B

    def __repr__(self):
        return f"affine({self.A:g}*{self.base!r}+{self.B:g})"


def affine_transform(shape, A, B):
    """Return the shape A*f(r) + B (A > 0)."""
    if A <= 0:
        raise ValueError("affine scale A must be positive")
    if isinstance(shape, Coulomb) and B == 0.0 and A == 1.0:
        return shape
    if isinstance(shape, Coulomb):
        return ShiftedCoulomb(A * shape.alpha, B)
    if isinstance(shape, Tabulated):
        c, d = shape.small_r_rule
        return Tabulated(shape.r, A * shape.fv + B, small_r_rule=(A * c, A * d + B))
    return _Affine(shape, A, B)


class SingularClassReport:
    """Membership check for the singular working class f(r) = g(r)/r with
    g(0) < 0, g non-decreasing, g non-constant."""

    def __init__(self, is_member, g_values, verdicts):
        self.is_member = bool(is_member)
        self.g_values = g_values
        self.verdicts = verdicts

    def __repr__(self):
        return f"SingularClassReport(is_member={self.is_member}, {self.verdicts})"


def check_singular_class(shape, probe_grid):
    probes = np.asarray(probe_grid, float)
    if len(probes) == 0 or np.any(probes <= 0) or np.any(np.diff(probes) <= 0):
        raise ValueError("probe grid must be nonempty, positive, strictly increasing")
    g = probes * shape(probes)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(g))))
    negative_origin = g[0] < -tol
    non_decreasing = bool(np.all(np.diff(g) >= -tol))
    non_constant = float(np.max(g) - np.min(g)) > tol
    verdicts = {
        "negative_at_origin": bool(negative_origin),
        "non_decreasing": non_decreasing,
        "non_constant": non_constant,
    }
    return SingularClassReport(negative_origin and non_decreasing and non_constant,
                               g, verdicts)
