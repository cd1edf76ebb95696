"""Warped product metrics ``g = phi^-2 (dr^2 + u^2 dtheta^2) + phi^2 dxi^2``.

Coordinates are polar ``(r, theta, xi)`` with ``r`` in ``[0, a]``.  All
pointwise quantities accept a point ``p = (r, theta[, xi])`` whose
components may be numpy arrays of matching shape.
"""
from dataclasses import dataclass

import numpy as np

from .errors import CoordinateDegeneracyError, MaskedPointError
from .profiles import ConstantWarp, RoundProfile, profile_from_dict

__all__ = [
    "WarpedProductMetric", "MetricComponents", "BackgroundMetric",
    "background_metric", "metric_at", "scalar_curvature", "base_scalar_curvature",
    "ricci_mixed_rtheta", "christoffel", "difference_tensor",
    "torus_mean_curvature", "gauss_bonnet_residual", "volume_density",
    "pole_guard", "metric_from_dict",
]

_POLE_GUARD = 1e-9


class WarpedProductMetric:
    """The pair (u, phi) on ``[0, a] x S^1 x S^1``.

    ``convention`` is ``"polar"`` for profiles given directly on [0, a] and
    ``"chart"`` for fields defined in a latitude chart centred on the
    equator, in which case ``chart_offset`` maps polar r to chart r.
    """

    def __init__(self, u, phi, a=None, convention="polar", chart_offset=0.0,
                 name="", meta=None):
        self.u = u
        self.phi = phi
        self.a = float(u.a if a is None else a)
        self.convention = convention
        self.chart_offset = float(chart_offset)
        self.name = name
        self.meta = dict(meta or {})

    def smooth_mask(self, r, th):
        """False on the singular set of phi, True elsewhere."""
        return ~np.asarray(self.phi.is_singular(r, th))

    def radial_breakpoints(self):
        pts = set(self.u.breakpoints()) | set(self.phi.breakpoints())
        return sorted(p for p in pts if 0.0 < p < self.a)

    def fields(self, r, th):
        """``(u, u', phi, phi_r, phi_theta)`` at arrays r, th."""
        phi = self.phi.eval(r, th)
        gr, gt = self.phi.grad(r, th)
        return self.u.eval(r), self.u.d1(r), phi, gr, gt

    def to_dict(self):
        if "descriptor" in self.meta:
            return dict(self.meta["descriptor"])
        return {"family": "custom", "u": self.u.to_dict(), "phi": self.phi.to_dict(),
                "a": self.a, "convention": self.convention}

    def __repr__(self):
        return f"WarpedProductMetric({self.name or self.u.kind}, a={self.a:g})"


def background_metric():
    """``g_0 = dr^2 + sin^2 r dtheta^2 + dxi^2`` on ``[0, pi]``."""
    return WarpedProductMetric(RoundProfile(np.pi), ConstantWarp(1.0), name="background",
                               meta={"descriptor": {"family": "round", "params": {"a": float(np.pi)}}})


class BackgroundMetric:
    """Closed-form Christoffel symbols of ``g_0``."""

    @staticmethod
    def christoffel(r):
        """Return ``(Gamma^r_thth, Gamma^th_rth)``; all others vanish."""
        r = np.asarray(r, dtype=float)
        return -np.sin(r) * np.cos(r), np.cos(r) / np.sin(r)


@dataclass(frozen=True)
class MetricComponents:
    g_rr: object
    g_thth: object
    g_xixi: object


def _rt(p):
    return np.asarray(p[0], dtype=float), np.asarray(p[1], dtype=float)


def pole_guard(m):
    """Exclusion width at r = 0 and r = a.

    Normally ``1e-9 a``; profiles with structure below that scale (the
    drawstring well) shrink it to a thousandth of their smallest breakpoint.
    """
    guard = _POLE_GUARD * m.a
    bps = [b for b in m.radial_breakpoints() if b > 0]
    if bps:
        guard = min(guard, 1e-3 * min(bps))
    return guard


def _check_interior(m, r):
    guard = pole_guard(m)
    if np.any(r <= guard) or np.any(r >= m.a - guard):
        raise CoordinateDegeneracyError(f"r must lie strictly inside (0, {m.a:g})")


def _check_smooth(m, r, th):
    if np.any(~m.smooth_mask(r, th)):
        raise MaskedPointError("query on the singular set of the warp field")


def metric_at(m, p):
    """Diagonal components ``(phi^-2, phi^-2 u^2, phi^2)`` at p."""
    r, th = _rt(p)
    _check_interior(m, r)
    phi = m.phi.eval(r, th)
    u = m.u.eval(r)
    return MetricComponents(phi**-2, (u / phi)**2, phi**2)


def volume_density(m, r, th):
    """``sqrt(det g) = u / phi`` in (r, theta, xi) coordinates."""
    return m.u.eval(r) / m.phi.eval(r, th)


def _grad_log_sq(m, r, th):
    lr, lt = m.phi.dlog(r, th)
    return lr * lr + (lt / m.u.eval(r))**2


def base_scalar_curvature(m, r):
    """``Scalar_h = -2 u''/u``."""
    return 2.0 * m.u.curvature(np.asarray(r, dtype=float))


def scalar_curvature(m, p):
    """``phi^2 (-2u''/u) - 2 |grad_h phi|^2``.

    Evaluated as ``2 phi^2 (kappa - |grad_h ln phi|^2)`` so that families
    with ``-u''/u == |grad ln phi|^2`` (the drawstring well) give exactly 0.
    """
    r, th = _rt(p)
    _check_interior(m, r)
    _check_smooth(m, r, th)
    phi = m.phi.eval(r, th)
    return 2.0 * phi * phi * (m.u.curvature(r) - _grad_log_sq(m, r, th))


def ricci_mixed_rtheta(m, p):
    """``Ric_{r theta} = -phi_rth/phi - 2 phi_r phi_th / phi^2 + (phi_th/phi)(u'/u)``."""
    r, th = _rt(p)
    _check_interior(m, r)
    _check_smooth(m, r, th)
    phi = m.phi.eval(r, th)
    gr, gt = m.phi.grad(r, th)
    _, hrt, _ = m.phi.hess(r, th)
    return -hrt / phi - 2.0 * gr * gt / phi**2 + (gt / phi) * (m.u.d1(r) / m.u.eval(r))


def difference_tensor(m, p):
    """Levi-Civita symbols of g minus those of the background ``g_0``.

    Returns an array ``D[k, i, j]`` (index order: upper, lower, lower).
    """
    r, th = _rt(p)
    u = m.u.eval(r)
    u1 = m.u.d1(r)
    phi = m.phi.eval(r, th)
    lr, lt = m.phi.dlog(r, th)
    s, c = np.sin(r), np.cos(r)
    shape = np.broadcast(r, th).shape
    D = np.zeros((3, 3, 3) + shape)
    R, T, X = 0, 1, 2
    D[R, R, R] = -lr
    D[R, T, T] = s * c - u * u1 + u * u * lr
    D[R, X, X] = -phi**4 * lr
    D[R, R, T] = D[R, T, R] = -lt
    D[T, R, R] = lt / u**2
    D[T, T, T] = -lt
    D[T, X, X] = -phi**4 * lt / u**2
    D[T, R, T] = D[T, T, R] = u1 / u - lr - c / s
    D[X, R, X] = D[X, X, R] = lr
    D[X, T, X] = D[X, X, T] = lt
    return D


def christoffel(m, p):
    """Full symbols ``Gamma[k, i, j]`` of g: background plus difference tensor."""
    r, th = _rt(p)
    _check_interior(m, r)
    _check_smooth(m, r, th)
    G = difference_tensor(m, (r, th))
    g_r, g_t = BackgroundMetric.christoffel(r)
    G[0, 1, 1] += g_r
    G[1, 0, 1] += g_t
    G[1, 1, 0] += g_t
    return G


def torus_mean_curvature(m, r):
    """Mean curvature of ``{r} x S^1_theta x S^1_xi`` w.r.t. ``phi d_r``.

    Returns a function of theta, ``H(theta) = phi(r, theta) u'(r)/u(r)``.
    """
    r = float(r)
    _check_interior(m, np.asarray(r))
    k = float(m.u.d1(r) / m.u.eval(r))

    def H(th):
        return m.phi.eval(r, th) * k

    return H


def gauss_bonnet_residual(m, spec=None):
    """``| (1/2) int Scalar_h dvol_h - 4 pi |`` computed by quadrature."""
    from .quadrature_geometry import integrate_radial, QuadratureSpec

    spec = spec or QuadratureSpec()
    res = integrate_radial(lambda r: m.u.d2(r), 0.0, m.a, spec,
                           breakpoints=m.radial_breakpoints())
    # (1/2) * 2 pi * int (-2 u''/u) u dr = -2 pi int u'' dr
    return abs(-2.0 * np.pi * res.value - 4.0 * np.pi)


def metric_from_dict(d):
    """Rebuild a metric from an experiment descriptor ``{family, params}``."""
    fam = d.get("family", "round")
    params = d.get("params", {})
    if fam == "round":
        a = params.get("a", np.pi)
        return WarpedProductMetric(RoundProfile(a), ConstantWarp(1.0), name="round",
                                   meta={"descriptor": {"family": "round", "params": {"a": a}}})
    if fam == "drawstring":
        from .examples import DrawstringParams, build_drawstring
        return build_drawstring(DrawstringParams(**params))
    if fam == "c1alpha":
        from .examples import C1AlphaParams, build_c1alpha
        return build_c1alpha(C1AlphaParams(**params))
    if fam == "custom":
        from .profiles import CosineWarp, ConstantWarp as CW
        u = profile_from_dict(d["u"])
        pk = d["phi"]["kind"]
        phi = {"constant": CW, "cosine": CosineWarp}[pk](**d["phi"]["params"])
        return WarpedProductMetric(u, phi, a=d.get("a"))
    raise ValueError(f"unknown metric family {fam!r}")
