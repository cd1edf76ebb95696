"""The two explicit metric families: the drawstring well and the C^{1,alpha} metric.

Drawstring
    On [0, 2] with ``rho = e^{-A^3}/10``.  In the log variable ``s = ln r``
    the cutoff ``psi(s)`` rises over ``[ln rho, ln 2rho]`` and falls over
    ``[ln(1/20), ln(1/10)]``; ``f = -A + lam * int psi``, ``phi = e^f``.  The
    base profile solves ``u'' = -f'^2 u`` on [0, 1/10] (so the scalar
    curvature vanishes there), is linear on [1/10, 1/5] and is closed off
    by a concave extension reaching ``u = 2 - r`` near r = 2.

C^{1,alpha}
    In the chart ``(r_c, theta)`` with ``h = dr_c^2 + cos^2 r_c dtheta^2`` the
    warp is ``phi = 1 + k chi_rho psi_alpha``.  We store it in the polar
    convention ``r = r_c + pi/2``, ``u = sin r``.
"""
from dataclasses import dataclass, asdict
import math

import numpy as np
from scipy.integrate import solve_ivp, quad

from .errors import ConstructionError, DomainError, SingularPointError
from .metric_core import WarpedProductMetric
from .profiles import RadialProfile, WarpField, _zeros_like
from .smoothstep import (step, step_d1, step_d2, step_integral, bump_b, bump_b_d1,
                         bump_b_d2, plateau, plateau_d1, plateau_d2)

__all__ = [
    "DrawstringParams", "lambda_of", "drawstring_rho", "build_drawstring",
    "DrawstringProfile", "DrawstringWarp",
    "C1AlphaParams", "rho_star", "psi_alpha_eval", "psi_alpha_full",
    "psi_alpha_origin", "classify_region", "build_c1alpha", "C1AlphaWarp",
    "kstar", "wedge_delta", "REGION_TAGS",
]

LN2 = math.log(2.0)
LN_TENTH = math.log(0.1)
REGION_TAGS = ("zero", "transition", "pure_plus", "pure_minus")


# ---------------------------------------------------------------------------
# drawstring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DrawstringParams:
    A: float = 4.0
    ivp_tol: float = 1e-12

    def __post_init__(self):
        if not self.A >= 1.0:
            raise DomainError("drawstring needs A >= 1")


def drawstring_rho(A):
    """Well radius ``rho = e^{-A^3}/10``."""
    return math.exp(-A**3) / 10.0


class _LogCutoff:
    """The cutoff ``psi(s)`` and its primitive ``G(s) = int_{ln rho}^s psi``."""

    def __init__(self, A):
        self.A = A
        self.s0 = -A**3 + LN_TENTH          # ln rho
        self.s1 = LN_TENTH                  # ln(1/10)
        self.disjoint = self.s0 + LN2 <= self.s1 - LN2
        if self.disjoint:
            self.total = A**3 - LN2
        else:
            self.total = quad(lambda s: float(self.psi(s)), self.s0, self.s1,
                              epsabs=0, epsrel=1e-13, limit=200)[0]

    def psi(self, s):
        s = np.asarray(s, dtype=float)
        return step((s - self.s0) / LN2) * step((self.s1 - s) / LN2)

    def psi_d1(self, s):
        s = np.asarray(s, dtype=float)
        a = (s - self.s0) / LN2
        b = (self.s1 - s) / LN2
        return (step_d1(a) * step(b) - step(a) * step_d1(b)) / LN2

    def G(self, s):
        s = np.asarray(s, dtype=float)
        if self.disjoint:
            # the primitive of the rising step continues linearly over the plateau
            rise = LN2 * step_integral((s - self.s0) / LN2)
            fall = self.total - LN2 * step_integral((self.s1 - s) / LN2)
            return np.where(s <= self.s1 - LN2, rise, fall)
        out = np.vectorize(lambda x: quad(lambda t: float(self.psi(t)), self.s0,
                                          min(max(x, self.s0), self.s1),
                                          epsabs=0, epsrel=1e-13, limit=200)[0])(s)
        return np.asarray(out, dtype=float)


def lambda_of(params):
    """``lam = A / int_0^{1/10} psi(r)/r dr``."""
    cut = _LogCutoff(params.A)
    return params.A / cut.total


def _vectorised(method):
    """Let a method written for 1-d arrays accept scalars and any shape."""
    def wrapper(self, r):
        r = np.asarray(r, dtype=float)
        out = method(self, r.reshape(-1))
        return out.reshape(r.shape) if r.ndim else float(out[0])
    wrapper.__doc__ = method.__doc__
    wrapper.__name__ = method.__name__
    return wrapper


class _DrawstringCore:
    """Shared numerics for the drawstring profile and warp."""

    def __init__(self, params):
        self.params = params
        A = params.A
        self.A = A
        self.cut = _LogCutoff(A)
        self.rho = drawstring_rho(A)
        self.lam = A / self.cut.total
        lam2 = self.lam**2
        cut = self.cut

        def rhs(s, y):
            return [y[1], -y[1] - lam2 * cut.psi(s)**2 * y[0]]

        sol = solve_ivp(rhs, (cut.s0, cut.s1), [1.0, 0.0], method="DOP853",
                        rtol=params.ivp_tol, atol=params.ivp_tol * 1e-2,
                        dense_output=True)
        if not sol.success:
            raise ConstructionError(f"IVP failed: {sol.message}", r=float("nan"))
        self._sol = sol
        y1, ys1 = sol.y[:, -1]
        self.alpha = y1 + ys1            # u'(1/10)
        u_tenth = 0.1 * y1
        self.beta = u_tenth + self.alpha * 0.1   # u(1/5)
        self.u_tenth = u_tenth
        self._validate()
        al, be = self.alpha, self.beta
        self.c = (2.0 + al / 5.0 - be) / (1.0 + al)
        if not 0.2 < self.c < 1.8:
            raise ConstructionError("concave extension has no room", r=self.c)
        self.w = 0.9 * min(self.c - 0.2, 1.8 - self.c)

    def _validate(self):
        s = np.linspace(self.cut.s0, self.cut.s1, 4001)
        y, ys = self._sol.sol(s)
        up = y + ys
        bad = np.nonzero((y <= 0) | (up < 0.5))[0]
        if bad.size:
            raise ConstructionError("profile lost positivity or its slope fell below 1/2",
                                    r=float(np.exp(s[bad[0]])))
        if self.alpha < 0.5 or self.beta <= 0:
            raise ConstructionError("profile lost positivity or its slope fell below 1/2", r=0.2)

    # log-field -----------------------------------------------------------
    @_vectorised
    def f(self, r):
        with np.errstate(divide="ignore"):
            s = np.log(np.maximum(r, 1e-300))
        return np.where(r >= 0.1, 0.0, -self.A + self.lam * self.cut.G(s))

    @_vectorised
    def f1(self, r):
        rs = np.maximum(r, 1e-300)
        return np.where((r > self.rho) & (r < 0.1), self.lam * self.cut.psi(np.log(rs)) / rs, 0.0)

    @_vectorised
    def f2(self, r):
        rs = np.maximum(r, 1e-300)
        s = np.log(rs)
        val = self.lam * (self.cut.psi_d1(s) - self.cut.psi(s)) / rs**2
        return np.where((r > self.rho) & (r < 0.1), val, 0.0)

    # base profile --------------------------------------------------------
    def _ext_x(self, r):
        return (r - self.c + self.w) / (2.0 * self.w)

    @_vectorised
    def u(self, r):
        out = np.array(r, dtype=float, copy=True)
        m = (r > self.rho) & (r < 0.1)
        if np.any(m):
            out[m] = r[m] * self._sol.sol(np.log(r[m]))[0]
        m = (r >= 0.1) & (r < 0.2)
        out[m] = self.u_tenth + self.alpha * (r[m] - 0.1)
        m = r >= 0.2
        al = self.alpha
        out[m] = (self.beta + al * (r[m] - 0.2)
                  - (al + 1.0) * 2.0 * self.w * step_integral(self._ext_x(r[m])))
        return out

    @_vectorised
    def u1(self, r):
        out = np.ones_like(r)
        m = (r > self.rho) & (r < 0.1)
        if np.any(m):
            y, ys = self._sol.sol(np.log(r[m]))
            out[m] = y + ys
        m = (r >= 0.1) & (r < 0.2)
        out[m] = self.alpha
        m = r >= 0.2
        out[m] = self.alpha - (self.alpha + 1.0) * step(self._ext_x(r[m]))
        return out

    @_vectorised
    def u2(self, r):
        return -self.curv_times_u(r)

    @_vectorised
    def curvature(self, r):
        """``-u''/u``; equal to ``f'^2`` on the well by construction."""
        out = self.f1(r)**2
        m = r >= 0.2
        if np.any(m):
            p1 = -(self.alpha + 1.0) * step_d1(self._ext_x(r[m])) / (2.0 * self.w)
            with np.errstate(divide="ignore", invalid="ignore"):
                out[m] = -p1 / self.u(r[m])
        return out

    @_vectorised
    def curv_times_u(self, r):
        out = self.f1(r)**2 * self.u(r)
        m = r >= 0.2
        if np.any(m):
            out[m] = (self.alpha + 1.0) * step_d1(self._ext_x(r[m])) / (2.0 * self.w)
        return out

    def breakpoints(self):
        return [self.rho, 2.0 * self.rho, 0.05, 0.1, 0.2, self.c - self.w, self.c + self.w]


class DrawstringProfile(RadialProfile):
    kind = "drawstring"
    smoothness_class = "piecewise-smooth"

    def __init__(self, core):
        self.core = core
        self.a = 2.0

    def eval(self, r):
        return self.core.u(r)

    def d1(self, r):
        return self.core.u1(r)

    def d2(self, r):
        return self.core.u2(r)

    def curvature(self, r):
        return self.core.curvature(r)

    def breakpoints(self):
        return self.core.breakpoints()

    def params(self):
        return asdict(self.core.params)


class DrawstringWarp(WarpField):
    kind = "drawstring"
    radial_only = True

    def __init__(self, core):
        self.core = core

    def eval(self, r, th=0.0):
        return np.exp(self.core.f(r)) + _zeros_like(r, th)

    def grad(self, r, th=0.0):
        z = _zeros_like(r, th)
        return np.exp(self.core.f(r)) * self.core.f1(r) + z, z

    def hess(self, r, th=0.0):
        z = _zeros_like(r, th)
        f1 = self.core.f1(r)
        return np.exp(self.core.f(r)) * (self.core.f2(r) + f1 * f1) + z, z, z.copy()

    def dlog(self, r, th=0.0):
        z = _zeros_like(r, th)
        return self.core.f1(r) + z, z

    def breakpoints(self):
        return self.core.breakpoints()[:4]

    def params(self):
        return asdict(self.core.params)


def build_drawstring(params):
    """Build the drawstring metric on [0, 2] for the given A."""
    core = _DrawstringCore(params)
    m = WarpedProductMetric(DrawstringProfile(core), DrawstringWarp(core), a=2.0,
                            name=f"drawstring(A={params.A:g})",
                            meta={"descriptor": {"family": "drawstring", "params": asdict(params)},
                                  "rho": core.rho, "lambda": core.lam,
                                  "alpha_slope": core.alpha, "beta": core.beta,
                                  "c": core.c, "w": core.w})
    m.core = core
    return m


# ---------------------------------------------------------------------------
# C^{1,alpha} example
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class C1AlphaParams:
    alpha: float = 0.5
    k: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")


def rho_star(params):
    """Cutoff radius keeping ``phi >= 3/4`` and ``|grad phi| <= 1/2``."""
    a, k = params.alpha, abs(params.k)
    sec = 1.0 / math.cos(0.5)
    return min(0.25, 1.0 / (4.0 * (1.0 + k)),
               1.0 / (4.0 * (1.0 + k) * (15.0 + 10.0 / a) * math.sqrt(1.0 + sec * sec)))


def kstar(alpha):
    """Threshold ``K*(alpha)`` for the sign of the wedge t^5 coefficient."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    return (1.0 + alpha**2) / (1.0 - alpha**2) * wedge_delta(alpha)


def wedge_delta(alpha):
    """Angular width ``arctan(1/alpha) - arctan(alpha)`` of the wedge sectors."""
    return math.atan(1.0 / alpha) - math.atan(alpha)


def _cutoff_args(alpha, ax, ay):
    inv = 1.0 / alpha
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        A = ay / ax**inv
        B = ax / ay**inv
    A = np.where(ax == 0, np.inf, A)
    B = np.where(ay == 0, np.inf, B)
    A = np.where(ay == 0, 0.0, A)
    B = np.where(ax == 0, 0.0, B)
    return A, B


def _region_codes(A, B, sigma):
    zero = (A <= 0.5) | (B <= 0.5)
    pure = (A >= 1.0) & (B >= 1.0) & ~zero
    code = np.where(zero, 0, np.where(pure, np.where(sigma > 0, 2, 3), 1))
    return code


def classify_region(params, r, th):
    """Region tag(s) of chart points; the origin raises."""
    x = np.asarray(r, dtype=float)
    y = np.asarray(th, dtype=float)
    if np.any((x == 0) & (y == 0)):
        raise SingularPointError("region undefined at the origin")
    A, B = _cutoff_args(params.alpha, np.abs(x), np.abs(y))
    code = _region_codes(A, B, np.sign(x) * np.sign(y))
    tags = np.asarray(REGION_TAGS, dtype=object)[code]
    return str(tags) if np.ndim(code) == 0 else tags


def psi_alpha_full(alpha, x, y, order=2):
    """Value, gradient and Hessian of ``psi_alpha`` at chart points.

    Returns ``(val, dx, dy, dxx, dxy, dyy, code)`` where code indexes
    :data:`REGION_TAGS`.  The origin gets value and gradient 0 and NaN
    second derivatives.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    ax, ay = np.abs(x), np.abs(y)
    sx, sy = np.sign(x), np.sign(y)
    A, B = _cutoff_args(alpha, ax, ay)
    code = _region_codes(A, B, sx * sy)
    # b, b', b'' are constant beyond 1, so clamping keeps every product finite
    A = np.minimum(A, 2.0)
    B = np.minimum(B, 2.0)
    ia = 1.0 / alpha
    bA, bB = bump_b(A), bump_b(B)
    b1A, b1B = bump_b_d1(A), bump_b_d1(B)

    val = ax * ay * bA * bB
    Qr = bA * bB - ia * A * b1A * bB + B * bA * b1B
    Qt = bA * bB + A * b1A * bB - ia * B * bA * b1B
    dx = sx * ay * Qr
    dy = sy * ax * Qt
    # zero region (including the axes): psi vanishes identically nearby
    z = code == 0
    for arr in (val, dx, dy):
        arr[z] = 0.0
    if order < 2:
        return tuple(arr.reshape(shape) for arr in (val, dx, dy)) + (None, None, None, code.reshape(shape))

    b2A, b2B = bump_b_d2(A), bump_b_d2(B)
    dAQr = (1.0 - ia) * b1A * bB - ia * A * b2A * bB + B * b1A * b1B
    dBQr = 2.0 * bA * b1B - ia * A * b1A * b1B + B * bA * b2B
    dAQt = 2.0 * b1A * bB + A * b2A * bB - ia * B * b1A * b1B
    dBQt = (1.0 - ia) * bA * b1B + A * b1A * b1B - ia * B * bA * b2B
    with np.errstate(divide="ignore", invalid="ignore"):
        dxx = ay * (-ia * A * dAQr + B * dBQr) / ax
        dyy = ax * (A * dAQt - ia * B * dBQt) / ay
    dxy = sx * sy * (Qr + A * dAQr - ia * B * dBQr)
    for arr in (dxx, dxy, dyy):
        arr[z] = 0.0
    origin = (ax == 0) & (ay == 0)
    for arr in (dxx, dxy, dyy):
        arr[origin] = np.nan
    return tuple(arr.reshape(shape) for arr in (val, dx, dy, dxx, dxy, dyy, code))


def psi_alpha_eval(params, r, th):
    """``(value, d_r, d_theta, region)`` of ``psi_alpha`` at chart point(s)."""
    x = np.asarray(r, dtype=float)
    y = np.asarray(th, dtype=float)
    if np.any((x == 0) & (y == 0)):
        raise SingularPointError("psi_alpha is not smooth at the origin; use psi_alpha_origin")
    val, dx, dy, _, _, _, code = psi_alpha_full(params.alpha, x, y, order=1)
    tags = np.asarray(REGION_TAGS, dtype=object)[code]
    if np.ndim(code) == 0:
        return float(val), float(dx), float(dy), str(tags)
    return val, dx, dy, tags


def psi_alpha_origin():
    """Value and gradient of ``psi_alpha`` at the origin, where it is C^1."""
    return 0.0, 0.0, 0.0


def _wrap(th):
    return np.pi - np.mod(np.pi - np.asarray(th, dtype=float), 2.0 * np.pi)


class C1AlphaWarp(WarpField):
    """``phi = 1 + k chi_rho psi_alpha`` on polar coordinates (r, theta).

    The chart coordinates are ``x = r - pi/2`` and ``y`` = theta wrapped to
    ``(-pi, pi]``.  The only non-smooth point is ``(pi/2, 0)``.
    """

    kind = "c1alpha"
    radial_only = False
    offset = 0.5 * np.pi

    def __init__(self, params, rho=None):
        self.p = params
        self.alpha = params.alpha
        self.k = float(params.k)
        self.rho = rho_star(params) if rho is None else float(rho)
        self.singular_set = {"kind": "points", "points": [(self.offset, 0.0)]}

    def chart(self, r, th):
        return np.asarray(r, dtype=float) - self.offset, _wrap(th)

    def _chi(self, x, y):
        rho = self.rho
        sx, sy = np.abs(x) / rho, np.abs(y) / rho
        cx, cy = plateau(sx), plateau(sy)
        c1x = np.sign(x) * plateau_d1(sx) / rho
        c1y = np.sign(y) * plateau_d1(sy) / rho
        c2x = plateau_d2(sx) / rho**2
        c2y = plateau_d2(sy) / rho**2
        return (cx * cy, c1x * cy, cx * c1y, c2x * cy, c1x * c1y, cx * c2y)

    def _fields(self, r, th, order):
        x, y = self.chart(r, th)
        x, y = np.broadcast_arrays(x, y)
        out = [np.ones(x.shape)] + [np.zeros(x.shape) for _ in range(5 if order == 2 else 2)]
        inside = (np.abs(x) < 2.0 * self.rho) & (np.abs(y) < 2.0 * self.rho)
        if self.k == 0.0 or not np.any(inside):
            return out
        xi, yi = x[inside], y[inside]
        ps, px, py, pxx, pxy, pyy, _ = psi_alpha_full(self.alpha, xi, yi, order)
        c, cx, cy, cxx, cxy, cyy = self._chi(xi, yi)
        k = self.k
        out[0][inside] = 1.0 + k * c * ps
        out[1][inside] = k * (cx * ps + c * px)
        out[2][inside] = k * (cy * ps + c * py)
        if order == 2:
            out[3][inside] = k * (cxx * ps + 2.0 * cx * px + c * pxx)
            out[4][inside] = k * (cxy * ps + cx * py + cy * px + c * pxy)
            out[5][inside] = k * (cyy * ps + 2.0 * cy * py + c * pyy)
        return out

    def eval(self, r, th=0.0):
        return self._fields(r, th, 1)[0]

    def value_dlog(self, r, th=0.0):
        p, gr, gt = self._fields(r, th, 1)
        return p, gr / p, gt / p

    def dlog(self, r, th=0.0):
        p, gr, gt = self._fields(r, th, 1)
        return gr / p, gt / p

    def grad(self, r, th=0.0):
        _, gr, gt = self._fields(r, th, 1)
        return gr, gt

    def hess(self, r, th=0.0):
        if np.any(self.is_singular(r, th)):
            raise SingularPointError("phi has no second derivatives on the singular circle")
        return tuple(self._fields(r, th, 2)[3:])

    def is_singular(self, r, th):
        x, y = self.chart(r, th)
        return (x == 0) & (y == 0)

    def support_box(self):
        h = 2.0 * self.rho
        return (self.offset - h, self.offset + h, -h, h)

    def region(self, r, th):
        x, y = self.chart(r, th)
        return classify_region(self.p, x, y)

    def params(self):
        return {"alpha": self.alpha, "k": self.k, "rho": self.rho}


def build_c1alpha(params, rho=None):
    """The C^{1,alpha} example as a polar-convention metric on [0, pi]."""
    from .profiles import RoundProfile

    phi = C1AlphaWarp(params, rho=rho)
    return WarpedProductMetric(RoundProfile(np.pi), phi, a=np.pi, convention="chart",
                               chart_offset=C1AlphaWarp.offset,
                               name=f"c1alpha(alpha={params.alpha:g}, k={params.k:g})",
                               meta={"descriptor": {"family": "c1alpha", "params": asdict(params)},
                                     "rho_star": phi.rho})
