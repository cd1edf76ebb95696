"""Integral quantities: volumes, areas, MinA candidates, cap volumes, radial costs.

Radial integrals use adaptive Gauss-Kronrod (``scipy.integrate.quad``) split
at the profile breakpoints, switching to the variable ``s = ln r`` near
r = 0 where the drawstring well lives at ``r ~ e^{-A^3}``.  Warp fields that
depend on theta contribute a two-dimensional correction over their support
box, computed with composite tensor Gauss-Legendre rules.
"""
from dataclasses import dataclass, asdict
import math
import warnings

import numpy as np
from scipy.integrate import quad, IntegrationWarning
from scipy.optimize import brentq

from .errors import DomainError, ToleranceError

__all__ = [
    "QuadratureSpec", "QuadResult", "integrate_radial", "integrate_box",
    "total_volume", "middle_volume", "base_area", "base_diameter",
    "min_torus_area_candidates", "cap_volume", "radial_cost", "gradient_budget",
]

_FOUR_PI2 = 4.0 * np.pi**2


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and endpoint handling for every integral.

    ``endpoint_strategy`` is ``"auto"``, ``"plain"``, ``"log_substitution"``
    or ``"power_weight"`` (with exponent ``beta`` at the lower endpoint).
    """

    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 2**14
    endpoint_strategy: str = "auto"
    beta: float = 0.0

    def __post_init__(self):
        if self.rel_tol < 1e-14:
            raise DomainError("rel_tol must be at least 1e-14")
        if self.max_panels < 8:
            raise DomainError("max_panels must be at least 8")
        if self.endpoint_strategy not in ("auto", "plain", "log_substitution", "power_weight"):
            raise DomainError(f"unknown endpoint strategy {self.endpoint_strategy!r}")

    def tighter(self, factor=0.5):
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor, self.max_panels,
                              self.endpoint_strategy, self.beta)


@dataclass
class QuadResult:
    value: float
    est_error: float
    panels_used: int

    def to_record(self, quantity):
        return {"quantity": quantity, **asdict(self)}

    def __float__(self):
        return float(self.value)


def _quad(fun, lo, hi, spec, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err, info = quad(fun, lo, hi, epsabs=spec.abs_tol * 1e-2, epsrel=spec.rel_tol * 1e-2,
                              limit=spec.max_panels, full_output=1, **kw)[:3]
    return val, err, int(info["last"])


def _use_log(lo, hi, spec):
    if spec.endpoint_strategy == "log_substitution":
        return True
    if spec.endpoint_strategy != "auto":
        return False
    return lo == 0.0 or (lo < 1e-3 and hi / lo > 1e3)


def integrate_radial(func, lo, hi, spec=None, breakpoints=()):
    """``int_lo^hi func(r) dr`` for a vectorised or scalar ``func``.

    Pieces between breakpoints are integrated separately and summed with
    ``math.fsum``.  Raises :class:`ToleranceError` if the combined error
    estimate exceeds ``max(abs_tol, rel_tol |value|)``.
    """
    spec = spec or QuadratureSpec()
    if hi < lo:
        raise DomainError("integration limits out of order")
    if hi == lo:
        return QuadResult(0.0, 0.0, 0)
    cuts = [lo] + sorted(b for b in set(breakpoints) if lo < b < hi) + [hi]
    vals, errs, panels = [], [], 0

    def f(r):
        return float(func(r))

    for x, y in zip(cuts[:-1], cuts[1:]):
        if spec.endpoint_strategy == "power_weight" and x == lo:
            # weight (r - lo)^beta is handled exactly by QAWS
            val, err, n = _quad(lambda r: f(r) / max(r - lo, 1e-300)**spec.beta, x, y, spec,
                                weight="alg", wvar=(spec.beta, 0.0))
        elif _use_log(x, y, spec):
            lo_s = -np.inf if x == 0.0 else math.log(x)
            def g(s):
                r = math.exp(s)
                return f(r) * r if r > 0.0 else 0.0

            val, err, n = _quad(g, lo_s, math.log(y), spec)
        else:
            val, err, n = _quad(f, x, y, spec)
        vals.append(val)
        errs.append(err)
        panels += n
    value = math.fsum(vals)
    err = math.fsum(errs)
    if err > max(spec.abs_tol, spec.rel_tol * abs(value)):
        raise ToleranceError("radial quadrature did not reach tolerance", estimate=value, error=err)
    return QuadResult(value, err, panels)


_GL_CACHE = {}


def _gl(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def _composite_nodes(cuts, n_sub, order):
    x, w = _gl(order)
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        edges = np.linspace(a, b, n_sub + 1)
        for c, d in zip(edges[:-1], edges[1:]):
            xs.append(0.5 * (d - c) * x + 0.5 * (c + d))
            ws.append(0.5 * (d - c) * w)
    return np.concatenate(xs), np.concatenate(ws)


def integrate_box(func, r_cuts, th_cuts, spec=None, order=8, start=1):
    """``iint func(r, th) dr dth`` over a box split at the given cuts.

    Composite tensor Gauss-Legendre; the number of sub-panels per cell
    doubles until two successive values agree to tolerance.
    """
    spec = spec or QuadratureSpec()
    prev = None
    n = start
    while True:
        r, wr = _composite_nodes(r_cuts, n, order)
        t, wt = _composite_nodes(th_cuts, n, order)
        R, T = np.meshgrid(r, t, indexing="ij")
        val = float(np.einsum("i,ij,j->", wr, func(R, T), wt))
        if prev is not None:
            err = abs(val - prev)
            if err <= max(spec.abs_tol, spec.rel_tol * abs(val)):
                return QuadResult(val, err, len(r) * len(t))
        if (2 * n * order * (len(r_cuts) - 1))**2 > spec.max_panels * 64:
            raise ToleranceError("box quadrature did not reach tolerance", estimate=val,
                                 error=abs(val - prev) if prev is not None else float("inf"))
        prev = val
        n *= 2


def _box_cuts(m, lo, hi):
    """Cuts of the warp support box clipped to ``[lo, hi]`` in r, or None."""
    box = m.phi.support_box()
    if box is None:
        return None
    r0, r1, t0, t1 = box
    r0, r1 = max(r0, lo), min(r1, hi)
    if r0 >= r1:
        return None
    centre_r = m.chart_offset if m.convention == "chart" else 0.5 * (box[0] + box[1])
    rho = getattr(m.phi, "rho", None)
    rc = {r0, r1}
    tc = {t0, t1}
    for c in ([centre_r] + ([centre_r - rho, centre_r + rho] if rho else [])):
        if r0 < c < r1:
            rc.add(c)
    for c in ([0.0] + ([-rho, rho] if rho else [])):
        if t0 < c < t1:
            tc.add(c)
    return sorted(rc), sorted(tc)


def _warp_integral(m, g, lo, hi, spec):
    """``int_lo^hi int_0^2pi g(r, th) dth dr`` for ``g = u * F(phi)``.

    ``g`` must be a callable of (r, th, phi) and must be exact for phi = 1
    outside the support box.
    """
    if m.phi.radial_only or m.phi.support_box() is None:
        radial = integrate_radial(lambda r: g(r, 0.0, m.phi.eval(r, 0.0)), lo, hi, spec,
                                  breakpoints=m.radial_breakpoints())
        return QuadResult(2.0 * np.pi * radial.value, 2.0 * np.pi * radial.est_error,
                          radial.panels_used)
    base = integrate_radial(lambda r: g(r, 0.0, 1.0), lo, hi, spec,
                            breakpoints=m.radial_breakpoints())
    out = QuadResult(2.0 * np.pi * base.value, 2.0 * np.pi * base.est_error, base.panels_used)
    cuts = _box_cuts(m, lo, hi)
    if cuts is None:
        return out
    corr = integrate_box(lambda r, t: g(r, t, m.phi.eval(r, t)) - g(r, t, 1.0), cuts[0], cuts[1], spec)
    return QuadResult(out.value + corr.value, out.est_error + corr.est_error,
                      out.panels_used + corr.panels_used)


def _vol_integrand(m):
    return lambda r, th, phi: m.u.eval(r) / phi


def total_volume(m, spec=None):
    """``int u/phi dr dtheta dxi`` over ``[0, a] x T^2``."""
    spec = spec or QuadratureSpec()
    res = _warp_integral(m, _vol_integrand(m), 0.0, m.a, spec)
    return QuadResult(2.0 * np.pi * res.value, 2.0 * np.pi * res.est_error, res.panels_used)


def cap_volume(m, eps, spec=None):
    """Volume of the two shells ``r < eps`` and ``r > a - eps``."""
    if not 0.0 < eps < 0.5 * m.a:
        raise DomainError("cap width must lie in (0, a/2)")
    spec = spec or QuadratureSpec()
    lo = _warp_integral(m, _vol_integrand(m), 0.0, eps, spec)
    hi = _warp_integral(m, _vol_integrand(m), m.a - eps, m.a, spec)
    return QuadResult(2.0 * np.pi * (lo.value + hi.value),
                      2.0 * np.pi * (lo.est_error + hi.est_error),
                      lo.panels_used + hi.panels_used)


def middle_volume(m, eps, spec=None):
    """Volume of ``eps <= r <= a - eps``."""
    spec = spec or QuadratureSpec()
    res = _warp_integral(m, _vol_integrand(m), eps, m.a - eps, spec)
    return QuadResult(2.0 * np.pi * res.value, 2.0 * np.pi * res.est_error, res.panels_used)


def base_area(m, spec=None):
    """``Area_h(S^2) = 2 pi int u dr``."""
    spec = spec or QuadratureSpec()
    res = integrate_radial(m.u.eval, 0.0, m.a, spec, breakpoints=m.u.breakpoints())
    return QuadResult(2.0 * np.pi * res.value, 2.0 * np.pi * res.est_error, res.panels_used)


def base_diameter(m):
    """Diameter of ``(S^2, h)``, the length of a meridian."""
    return float(m.a)


def min_torus_area_candidates(m, spec=None, n_grid=10_000):
    """Areas of rotationally symmetric competitors for MinA.

    Returns a list of dicts ``{kind, r, area}`` sorted by area: the tori
    ``{u' = 0} x S^1`` with area ``4 pi^2 u(r_c)`` and the xi-slice with
    area ``int phi^-2 dvol_h``.  The smallest entry is an upper bound for
    the true MinA, not the value itself.
    """
    spec = spec or QuadratureSpec()
    r = np.linspace(0.0, m.a, n_grid + 1)
    d = m.u.d1(r)
    out = []
    for i in np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]:
        if d[i] == 0.0:
            rc = r[i]
        elif d[i + 1] == 0.0:
            continue
        else:
            rc = brentq(lambda x: float(m.u.d1(np.array(x))), r[i], r[i + 1], xtol=1e-14)
        if 0.0 < rc < m.a:
            out.append({"kind": "torus", "r": float(rc), "area": float(_FOUR_PI2 * m.u.eval(np.array(rc)))})
    if not out:
        raise RuntimeError("no critical radius of u found")
    sl = _warp_integral(m, lambda rr, th, phi: m.u.eval(rr) / phi**2, 0.0, m.a, spec)
    out.append({"kind": "xi_slice", "r": None, "area": float(sl.value)})
    return sorted(out, key=lambda e: e["area"])


def radial_cost(m, r_a, r_b, theta=0.0, spec=None):
    """``int_{r_a}^{r_b} dr / phi(r, theta)``, the g-length of a meridian segment."""
    if not 0.0 < r_a < r_b < m.a:
        raise DomainError("need 0 < r_a < r_b < a")
    spec = spec or QuadratureSpec()
    if r_a < 1e-3 and spec.endpoint_strategy == "auto":
        spec = QuadratureSpec(spec.rel_tol, spec.abs_tol, spec.max_panels, "log_substitution")
    return integrate_radial(lambda r: 1.0 / m.phi.eval(r, theta), r_a, r_b, spec,
                            breakpoints=m.radial_breakpoints())


def gradient_budget(m, spec=None):
    """``(int |grad ln phi|^2 dvol_h, (1/2) int Scalar_h dvol_h)``.

    Nonnegative scalar curvature forces the first to be at most the second.
    Only radial warp fields are supported.
    """
    if not m.phi.radial_only:
        raise DomainError("gradient budget is implemented for radial warp fields")
    spec = spec or QuadratureSpec()
    bps = m.radial_breakpoints()
    lhs = integrate_radial(lambda r: m.phi.dlog(r, 0.0)[0]**2 * m.u.eval(r), 0.0, m.a, spec, bps)
    rhs = integrate_radial(lambda r: -m.u.d2(r), 0.0, m.a, spec, bps)
    return 2.0 * np.pi * lhs.value, 2.0 * np.pi * rhs.value
