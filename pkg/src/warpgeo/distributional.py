"""Lee-LeFloch distributional scalar curvature against ``g_0``.

For ``g = phi^-2 (dr^2 + u^2 dtheta^2) + phi^2 dxi^2`` and the product
background ``g_0 = dr^2 + sin^2 r dtheta^2 + dxi^2`` the vector field V has
a single radial component and F involves only first derivatives of u and
phi, so the pairing makes sense for fields that are merely C^1.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CoordinateDegeneracyError, ToleranceError
from .metric_core import pole_guard, scalar_curvature
from .quadrature_geometry import QuadratureSpec, _gl

__all__ = [
    "TestFunction", "ConstantTest", "RadialBump", "SeparableBump", "PairingResult",
    "lee_lefloch_V", "lee_lefloch_F", "div_V", "pairing", "boundary_term", "boundary_parts",
    "scalar_integral", "extrapolate_pairing", "boundary_decay",
]

_SIN_GUARD = 1e-12


# ---------------------------------------------------------------- test functions

class TestFunction:
    """Smooth function of ``(r, theta, xi)``, 2 pi periodic in both angles."""

    __test__ = False  # not a pytest class
    kind = "abstract"
    sup_norm = 1.0

    def eval(self, r, th, xi):
        raise NotImplementedError

    def grad(self, r, th, xi):
        """``(v_r, v_theta, v_xi)``."""
        raise NotImplementedError

    def radial_cuts(self):
        """Radii where v is not analytic; used as quadrature breakpoints."""
        return ()

    def to_dict(self):
        return {"kind": self.kind}


class ConstantTest(TestFunction):
    kind = "constant"

    def __init__(self, c=1.0):
        self.c = float(c)
        self.sup_norm = abs(self.c)

    def eval(self, r, th, xi):
        return self.c + 0.0 * np.broadcast_arrays(r, th, xi)[0]

    def grad(self, r, th, xi):
        z = 0.0 * np.broadcast_arrays(r, th, xi)[0]
        return z, z, z

    def to_dict(self):
        return {"kind": self.kind, "c": self.c}


def _bump(s):
    """``exp(1 - 1/(1 - s^2))`` on (-1, 1), zero outside, and its derivative."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    q = np.where(inside, 1.0 - s * s, 1.0)
    val = np.where(inside, np.exp(1.0 - 1.0 / q), 0.0)
    der = np.where(inside, val * (-2.0 * s / q**2), 0.0)
    return val, der


class RadialBump(TestFunction):
    """``b((r - center)/width)`` with the standard smooth bump b, max 1."""

    kind = "radial_bump"

    def __init__(self, center, width):
        self.center = float(center)
        self.width = float(width)
        self.sup_norm = 1.0

    def eval(self, r, th, xi):
        r, th, xi = np.broadcast_arrays(r, th, xi)
        return _bump((r - self.center) / self.width)[0]

    def grad(self, r, th, xi):
        r, th, xi = np.broadcast_arrays(r, th, xi)
        z = 0.0 * r
        return _bump((r - self.center) / self.width)[1] / self.width, z, z

    def radial_cuts(self):
        return (self.center - self.width, self.center, self.center + self.width)

    def to_dict(self):
        return {"kind": self.kind, "center": self.center, "width": self.width}


class SeparableBump(TestFunction):
    """Radial bump times ``((1 + cos(theta - th0))/2)^p ((1 + cos(xi - xi0))/2)^p``."""

    kind = "separable_bump"

    def __init__(self, center, width, th0=0.0, xi0=0.0, power=2):
        self.radial = RadialBump(center, width)
        self.th0 = float(th0)
        self.xi0 = float(xi0)
        self.power = int(power)
        self.sup_norm = 1.0

    def _ang(self, x, x0):
        c = 0.5 * (1.0 + np.cos(x - x0))
        p = self.power
        return c**p, -0.5 * p * c**(p - 1) * np.sin(x - x0)

    def eval(self, r, th, xi):
        r, th, xi = np.broadcast_arrays(r, th, xi)
        a, _ = self._ang(th, self.th0)
        b, _ = self._ang(xi, self.xi0)
        return self.radial.eval(r, th, xi) * a * b

    def grad(self, r, th, xi):
        r, th, xi = np.broadcast_arrays(r, th, xi)
        rv = self.radial.eval(r, th, xi)
        rd = self.radial.grad(r, th, xi)[0]
        a, da = self._ang(th, self.th0)
        b, db = self._ang(xi, self.xi0)
        return rd * a * b, rv * da * b, rv * a * db

    def radial_cuts(self):
        return self.radial.radial_cuts()

    def to_dict(self):
        return {"kind": self.kind, "center": self.radial.center, "width": self.radial.width,
                "th0": self.th0, "xi0": self.xi0, "power": self.power}


# ---------------------------------------------------------------- pointwise kernels

def _local(m, p):
    r = np.asarray(p[0], dtype=float)
    th = np.asarray(p[1], dtype=float)
    guard = pole_guard(m)
    if np.any(r <= guard) or np.any(r >= m.a - guard):
        raise CoordinateDegeneracyError(f"r must lie strictly inside (0, {m.a:g})")
    s = np.sin(r)
    if np.any(np.abs(s) < _SIN_GUARD):
        raise CoordinateDegeneracyError("background pole: sin r = 0")
    phi, lr, lt = m.phi.value_dlog(r, th)
    return r, s, np.cos(r), m.u.eval(r), m.u.d1(r), phi, phi * lr, phi * lt


def _split(r, s, c, u, u1):
    """``(k0, rho2m1, delta)`` with ``k0 = cot r``, ``rho2m1 = s^2/u^2 - 1``,
    ``delta = u'/u - cot r``.

    Writing the kernels through these keeps the O(1/sin^2 r) terms, which
    cancel identically, out of floating point.
    """
    k0 = c / s
    return k0, (s - u) * (s + u) / (u * u), u1 / u - k0


def _bracket(r, s, c, u, u1, phi, pr):
    k0, e, d = _split(r, s, c, u, u1)
    lr = pr / phi
    return 2.0 + e - 2.0 * e * k0 * (lr - d) - 2.0 * d * d + 4.0 * d * lr


def lee_lefloch_V(m, p):
    """``(V^r, V^theta, V^xi)``; only the radial component is nonzero.

    ``V^r = phi^2 (sin r cos r/u^2 + cot r - 2u'/u)``.
    """
    r, s, c, u, u1, phi, _, _ = _local(m, p)
    k0, e, d = _split(r, s, c, u, u1)
    vr = phi * phi * (k0 * e - 2.0 * d)
    z = np.zeros_like(vr)
    return vr, z, z.copy()


def lee_lefloch_F(m, p):
    """F from u, phi and their first derivatives only."""
    r, s, c, u, u1, phi, pr, pt = _local(m, p)
    grad_sq = pr * pr + (pt / u)**2
    return -2.0 * grad_sq + phi * phi * _bracket(r, s, c, u, u1, phi, pr)


def div_V(m, p):
    """Background divergence ``(1/sin r) d_r(sin r V^r)``, closed form."""
    r, s, c, u, u1, phi, pr, pt = _local(m, p)
    return -phi * phi * (2.0 * m.u.d2(r) / u + _bracket(r, s, c, u, u1, phi, pr))


# ---------------------------------------------------------------- quadrature grid

@dataclass
class PairingResult:
    value: float
    interior_part: float
    boundary_part: float
    epsilon: float
    est_error: float

    def to_record(self):
        return {"epsilon": self.epsilon, "value": self.value, "interior": self.interior_part,
                "boundary": self.boundary_part, "est_error": self.est_error}


def _panels(cuts, n_sub, order):
    x, w = _gl(order)
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(a, b, n_sub + 1)
        h = np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + 0.5 * h[:, None] * x).ravel())
        ws.append((0.5 * h[:, None] * w).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _r_cuts(m, v, lo, hi):
    """Breakpoints in (lo, hi) plus dyadic grading toward both ends."""
    pts = {lo, hi}
    pts.update(b for b in v.radial_cuts() if lo < b < hi)
    pts.update(b for b in m.radial_breakpoints() if lo < b < hi)
    box = m.phi.support_box()
    if box is not None and not m.phi.radial_only:
        pts.update(b for b in (box[0], box[1], 0.5 * (box[0] + box[1])) if lo < b < hi)
    span = hi - lo
    for j in range(1, 9):
        pts.add(lo + span * 2.0**-j)
        pts.add(hi - span * 2.0**-j)
    return np.array(sorted(pts))


def _angle_nodes(m, n, order):
    """Theta nodes: periodic trapezoid, or composite GL around a warp box."""
    box = m.phi.support_box()
    if box is None or m.phi.radial_only:
        t = -np.pi + 2.0 * np.pi * np.arange(n) / n
        return t, np.full(n, 2.0 * np.pi / n)
    th0, th1 = box[2], box[3]
    cuts = np.array([-np.pi, th0, 0.5 * (th0 + th1), th1, np.pi])
    return _panels(cuts, max(1, n // (4 * order)) * 4, order)


def _xi_nodes(v, n):
    if isinstance(v, (ConstantTest, RadialBump)):
        return np.zeros(1), np.array([2.0 * np.pi])
    x = 2.0 * np.pi * np.arange(n) / n
    return x, np.full(n, 2.0 * np.pi / n)


def _grid_axes(m, v, lo, hi, level, order=16):
    r, wr = _panels(_r_cuts(m, v, lo, hi), 2**level, order)
    t, wt = _angle_nodes(m, 64 * (1 + level), order)
    x, wx = _xi_nodes(v, 16)
    return (r, wr), (t, wt), (x, wx)


def _grid_sum(m, v, lo, hi, level, kernel, chunk=2_000_000):
    """Sum ``kernel(R, T, X) * weights`` over the tensor grid, chunked in r."""
    (r, wr), (t, wt), (x, wx) = _grid_axes(m, v, lo, hi, level)
    wtx = wt[:, None] * wx[None, :]
    step = max(1, chunk // (len(t) * len(x)))
    total = 0.0
    for i in range(0, len(r), step):
        R, T, X = np.meshgrid(r[i:i + step], t, x, indexing="ij")
        total += float(np.einsum("i,ijk,jk->", wr[i:i + step], kernel(R, T, X), wtx))
    return total


def _interior_kernel(m, v):
    def kernel(R, T, X):
        r, s, c, u, u1, phi, pr, pt = _local(m, (R, T))
        vr = phi * phi * (s * c / u**2 + c / s - 2.0 * u1 / u)
        F = lee_lefloch_F(m, (R, T))
        dens = u / (phi * s)                      # d mu_g / d mu_0
        dlog_dens = u1 / u - pr / phi - c / s
        val = v.eval(R, T, X)
        d_r = v.grad(R, T, X)[0] * dens + val * dens * dlog_dens
        return (-vr * d_r + F * val * dens) * s
    return kernel


def _interior(m, v, lo, hi, level):
    return _grid_sum(m, v, lo, hi, level, _interior_kernel(m, v))


def _scalar_part(m, v, lo, hi, level):
    def kernel(R, T, X):
        dmu = m.u.eval(R) / m.phi.eval(R, T)
        return scalar_curvature(m, (R, T)) * v.eval(R, T, X) * dmu
    return _grid_sum(m, v, lo, hi, level, kernel)


def _refine(fn, spec, max_level):
    prev = fn(0)
    for level in range(1, max_level + 1):
        val = fn(level)
        err = abs(val - prev)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(val)):
            return val, err
        prev = val
    raise ToleranceError("pairing quadrature did not reach tolerance", estimate=val, error=err)


def _check_eps(m, eps):
    if not 0.0 < eps < 0.5 * m.a:
        raise CoordinateDegeneracyError(f"need 0 < eps < a/2, got {eps}")


def pairing(m, v, eps, spec=None, max_level=3):
    """``<R_g, v>`` restricted to ``M_eps = {eps <= r <= a - eps}``."""
    _check_eps(m, eps)
    spec = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-10)
    val, err = _refine(lambda lv: _interior(m, v, eps, m.a - eps, lv), spec, max_level)
    return PairingResult(val, val, boundary_term(m, v, eps), float(eps), err)


def scalar_integral(m, v, eps, spec=None, max_level=3):
    """``int_{M_eps} Scalar_g v dmu_g`` for a smooth metric."""
    _check_eps(m, eps)
    spec = spec or QuadratureSpec(rel_tol=1e-9, abs_tol=1e-10)
    return _refine(lambda lv: _scalar_part(m, v, eps, m.a - eps, lv), spec, max_level)[0]


def _ring(m, v, r, n_th=256, n_xi=64):
    t, wt = _angle_nodes(m, n_th, 16)
    x, wx = _xi_nodes(v, n_xi)
    T, X = np.meshgrid(t, x, indexing="ij")
    R = np.full_like(T, float(r))
    vr = lee_lefloch_V(m, (R, T))[0]
    flux = vr * m.u.eval(R) / m.phi.eval(R, T) * v.eval(R, T, X)
    return float(np.sum(flux * wt[:, None] * wx[None, :]))


def boundary_parts(m, v, eps):
    """``(B^-, B^+)``: flux of V through ``r = eps`` and ``r = a - eps``."""
    _check_eps(m, eps)
    return -_ring(m, v, eps), _ring(m, v, m.a - eps)


def boundary_term(m, v, eps):
    """``B = B^- + B^+``."""
    return sum(boundary_parts(m, v, eps))


def extrapolate_pairing(m, v, eps0, spec=None):
    """Pairing over M from ``eps0, eps0/2, eps0/4``.

    Fits ``P + c eps^{3/2} + d eps^2`` exactly through the three values.
    Returns ``(P, [PairingResult, ...])``.
    """
    eps = [eps0, eps0 / 2.0, eps0 / 4.0]
    res = [pairing(m, v, e, spec) for e in eps]
    A = np.array([[1.0, e**1.5, e * e] for e in eps])
    coef = np.linalg.solve(A, np.array([r.interior_part for r in res]))
    return float(coef[0]), res


def boundary_decay(m, v, eps_list):
    """Rows ``{eps, interior, boundary, ratio, ...}`` with ratio ``|B|/eps^{3/2}``.

    The fluxes ``B^-``, ``B^+`` and the one-sided ratio
    ``max(B, 0)/eps^{3/2}`` are reported too.
    """
    rows = []
    for e in eps_list:
        res = pairing(m, v, e)
        bm, bp = boundary_parts(m, v, e)
        rows.append({"eps": float(e), "interior": res.interior_part,
                     "boundary": res.boundary_part, "ratio": abs(res.boundary_part) / e**1.5,
                     "boundary_minus": bm, "boundary_plus": bp,
                     "ratio_minus": abs(bm) / e**1.5,
                     "ratio_positive_part": max(res.boundary_part, 0.0) / e**1.5})
    return rows
