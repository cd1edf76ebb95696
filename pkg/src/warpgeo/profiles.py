"""Radial profiles u(r), warp fields phi(r, theta), and admissible (w, f) pairs.

All evaluation methods are vectorised over numpy arrays.  Profiles expose
``eval``, ``d1``, ``d2`` and ``curvature`` (which is ``-u''/u``, the Gauss
curvature of ``dr^2 + u^2 dtheta^2``); families whose ``-u''/u`` has a
cleaner closed form override ``curvature`` to avoid cancellation.
"""
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import brentq

from .errors import DomainError, SingularPointError

__all__ = [
    "RadialProfile", "RoundProfile", "ScaledProfile", "ChebyshevProfile",
    "make_round_profile", "normalize_profile", "profile_from_dict",
    "WarpField", "ConstantWarp", "CosineWarp", "ExpRadialWarp",
    "RadialScalar", "ZeroScalar", "ChebyshevScalar", "LogWarpScalar",
    "AdmissiblePair", "sample_admissible_pair",
]

_TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

class RadialProfile:
    """A function u on [0, a] with first and second derivatives."""

    a = None
    smoothness_class = "smooth"
    kind = "abstract"

    def eval(self, r):
        raise NotImplementedError

    def d1(self, r):
        raise NotImplementedError

    def d2(self, r):
        raise NotImplementedError

    def __call__(self, r):
        return self.eval(r)

    def curvature(self, r):
        """Gauss curvature ``-u''/u`` of the base metric."""
        r = np.asarray(r, dtype=float)
        return -self.d2(r) / self.eval(r)

    def breakpoints(self):
        """Interior radii where the profile changes its analytic form."""
        return []

    def params(self):
        return {}

    def to_dict(self):
        return {"kind": self.kind, "params": self.params()}

    def check_invariants(self, n=1001, endpoint_slopes=True):
        """Return the worst violation of each profile invariant."""
        a = self.a
        ends = np.array([0.0, a])
        out = {
            "endpoint_values": float(np.max(np.abs(self.eval(ends)))),
        }
        if endpoint_slopes:
            d = self.d1(ends)
            out["endpoint_slopes"] = float(max(abs(d[0] - 1.0), abs(d[1] + 1.0)))
        delta = 1e-9 * a
        r = np.linspace(delta, a - delta, n)
        out["min_interior_value"] = float(np.min(self.eval(r)))
        return out


class RoundProfile(RadialProfile):
    """``u(r) = (a/pi) sin(pi r / a)``: the round sphere of diameter a."""

    kind = "round"

    def __init__(self, a):
        a = float(a)
        if not a > 0:
            raise DomainError(f"domain length must be positive, got {a}")
        self.a = a
        self._k = np.pi / a

    def eval(self, r):
        return np.sin(self._k * np.asarray(r, dtype=float)) / self._k

    def d1(self, r):
        return np.cos(self._k * np.asarray(r, dtype=float))

    def d2(self, r):
        return -self._k * np.sin(self._k * np.asarray(r, dtype=float))

    def curvature(self, r):
        return np.full(np.shape(r), self._k**2)

    def params(self):
        return {"a": self.a}


def make_round_profile(a):
    """Round profile on [0, a] (``u = sin r`` when ``a = pi``)."""
    return RoundProfile(a)


class ScaledProfile(RadialProfile):
    """``w(t) = (L/a) u(a t / L)``: a profile rescaled to domain length L.

    Endpoint slopes are preserved by the rescaling.
    """

    kind = "scaled"

    def __init__(self, base, L):
        L = float(L)
        if not L > 0:
            raise DomainError(f"target length must be positive, got {L}")
        self.base = base
        self.a = L
        self._s = base.a / L
        self.smoothness_class = base.smoothness_class

    def eval(self, t):
        return self.base.eval(self._s * np.asarray(t, dtype=float)) / self._s

    def d1(self, t):
        return self.base.d1(self._s * np.asarray(t, dtype=float))

    def d2(self, t):
        return self._s * self.base.d2(self._s * np.asarray(t, dtype=float))

    def curvature(self, t):
        return self._s**2 * self.base.curvature(self._s * np.asarray(t, dtype=float))

    def breakpoints(self):
        return [b / self._s for b in self.base.breakpoints()]

    def params(self):
        return {"L": self.a}

    def to_dict(self):
        return {"kind": self.kind, "params": self.params(), "base": self.base.to_dict()}


def normalize_profile(p, L):
    """Rescale ``p`` to domain length ``L`` keeping endpoint slopes fixed."""
    L = float(L)
    if not L > 0:
        raise DomainError(f"target length must be positive, got {L}")
    if L == p.a:
        return p
    if isinstance(p, RoundProfile):
        return RoundProfile(L)
    if isinstance(p, ScaledProfile):
        return ScaledProfile(p.base, L)
    return ScaledProfile(p, L)


class ChebyshevProfile(RadialProfile):
    """Profile stored as Chebyshev series for u, u', u'' (and -u''/u)."""

    kind = "chebyshev"

    def __init__(self, a, c0, c1, c2, ck=None):
        self.a = float(a)
        dom = [0.0, self.a]
        self._u = C.Chebyshev(c0, domain=dom)
        self._u1 = C.Chebyshev(c1, domain=dom)
        self._u2 = C.Chebyshev(c2, domain=dom)
        self._k = None if ck is None else C.Chebyshev(ck, domain=dom)

    def eval(self, r):
        return self._u(np.asarray(r, dtype=float))

    def d1(self, r):
        return self._u1(np.asarray(r, dtype=float))

    def d2(self, r):
        return self._u2(np.asarray(r, dtype=float))

    def curvature(self, r):
        if self._k is None:
            return super().curvature(r)
        return self._k(np.asarray(r, dtype=float))

    def params(self):
        return {"a": self.a}

    def to_dict(self):
        coeffs = {"u": self._u.coef.tolist(), "d1": self._u1.coef.tolist(),
                  "d2": self._u2.coef.tolist()}
        if self._k is not None:
            coeffs["curvature"] = self._k.coef.tolist()
        return {"kind": self.kind, "params": self.params(), "coeffs": coeffs}


def profile_from_dict(d):
    """Rebuild a profile from its JSON record."""
    kind = d["kind"]
    if kind == "round":
        return RoundProfile(d["params"]["a"])
    if kind == "scaled":
        return ScaledProfile(profile_from_dict(d["base"]), d["params"]["L"])
    if kind == "chebyshev":
        c = d["coeffs"]
        return ChebyshevProfile(d["params"]["a"], c["u"], c["d1"], c["d2"], c.get("curvature"))
    if kind == "drawstring":
        from .examples import DrawstringParams, build_drawstring
        return build_drawstring(DrawstringParams(**d["params"])).u
    raise DomainError(f"unknown profile kind {kind!r}")


# ---------------------------------------------------------------------------
# warp fields
# ---------------------------------------------------------------------------

class WarpField:
    """A positive function phi(r, theta) with first and second partials."""

    radial_only = False
    singular_set = {"kind": "empty"}
    kind = "abstract"

    def eval(self, r, th):
        raise NotImplementedError

    def grad(self, r, th):
        """``(phi_r, phi_theta)``."""
        raise NotImplementedError

    def hess(self, r, th):
        """``(phi_rr, phi_rtheta, phi_thetatheta)``."""
        raise NotImplementedError

    def __call__(self, r, th=0.0):
        return self.eval(r, th)

    def dlog(self, r, th):
        """``(phi_r/phi, phi_theta/phi)``."""
        p = self.eval(r, th)
        gr, gt = self.grad(r, th)
        return gr / p, gt / p

    def value_dlog(self, r, th):
        """``(phi, phi_r/phi, phi_theta/phi)`` in one call."""
        p = self.eval(r, th)
        gr, gt = self.grad(r, th)
        return p, gr / p, gt / p

    def is_singular(self, r, th):
        r = np.asarray(r, dtype=float)
        return np.zeros(np.broadcast(r, np.asarray(th)).shape, dtype=bool)

    def breakpoints(self):
        return []

    def support_box(self):
        """Box ``(r0, r1, th0, th1)`` outside which phi == 1, if any."""
        return None

    def params(self):
        return {}

    def to_dict(self):
        return {"kind": self.kind, "params": self.params()}


def _zeros_like(r, th):
    return np.zeros(np.broadcast(np.asarray(r, dtype=float), np.asarray(th, dtype=float)).shape)


class ConstantWarp(WarpField):
    kind = "constant"
    radial_only = True

    def __init__(self, c=1.0):
        if not c > 0:
            raise DomainError("warp constant must be positive")
        self.c = float(c)

    def eval(self, r, th=0.0):
        return self.c + _zeros_like(r, th)

    def grad(self, r, th=0.0):
        z = _zeros_like(r, th)
        return z, z.copy()

    def hess(self, r, th=0.0):
        z = _zeros_like(r, th)
        return z, z.copy(), z.copy()

    def dlog(self, r, th=0.0):
        z = _zeros_like(r, th)
        return z, z.copy()

    def params(self):
        return {"c": self.c}


class CosineWarp(WarpField):
    """``phi = 1 + amp cos(r)``; a smooth radial test field."""

    kind = "cosine"
    radial_only = True

    def __init__(self, amp=0.1):
        if not abs(amp) < 1:
            raise DomainError("|amp| must be < 1 for positivity")
        self.amp = float(amp)

    def eval(self, r, th=0.0):
        return 1.0 + self.amp * np.cos(r) + _zeros_like(r, th)

    def grad(self, r, th=0.0):
        z = _zeros_like(r, th)
        return -self.amp * np.sin(r) + z, z

    def hess(self, r, th=0.0):
        z = _zeros_like(r, th)
        return -self.amp * np.cos(r) + z, z, z.copy()

    def params(self):
        return {"amp": self.amp}


class ExpRadialWarp(WarpField):
    """``phi = exp(f)`` for a radial scalar f."""

    kind = "exp_radial"
    radial_only = True

    def __init__(self, f):
        self.f = f

    def eval(self, r, th=0.0):
        return np.exp(self.f.eval(r)) + _zeros_like(r, th)

    def grad(self, r, th=0.0):
        z = _zeros_like(r, th)
        return np.exp(self.f.eval(r)) * self.f.d1(r) + z, z

    def hess(self, r, th=0.0):
        z = _zeros_like(r, th)
        f1 = self.f.d1(r)
        return np.exp(self.f.eval(r)) * (self.f.d2(r) + f1 * f1) + z, z, z.copy()

    def dlog(self, r, th=0.0):
        z = _zeros_like(r, th)
        return self.f.d1(r) + z, z


# ---------------------------------------------------------------------------
# radial scalar fields (the f of an admissible pair)
# ---------------------------------------------------------------------------

class RadialScalar:
    """A theta-independent scalar field f(t)."""

    def eval(self, t, th=None):
        raise NotImplementedError

    def d1(self, t):
        raise NotImplementedError

    def d2(self, t):
        raise NotImplementedError

    def __call__(self, t, th=None):
        return self.eval(t, th)

    def grad(self, t, th=None):
        d = self.d1(t)
        return d, np.zeros_like(d)


class ZeroScalar(RadialScalar):
    def eval(self, t, th=None):
        return np.zeros(np.shape(t))

    def d1(self, t):
        return np.zeros(np.shape(t))

    def d2(self, t):
        return np.zeros(np.shape(t))


class ChebyshevScalar(RadialScalar):
    def __init__(self, a, c0, c1, c2, shift=0.0):
        dom = [0.0, float(a)]
        self._f = C.Chebyshev(c0, domain=dom)
        self._f1 = C.Chebyshev(c1, domain=dom)
        self._f2 = C.Chebyshev(c2, domain=dom)
        self.shift = float(shift)

    def eval(self, t, th=None):
        return self._f(np.asarray(t, dtype=float)) - self.shift

    def d1(self, t):
        return self._f1(np.asarray(t, dtype=float))

    def d2(self, t):
        return self._f2(np.asarray(t, dtype=float))

    def scaled(self, factor):
        """Return ``factor * f`` (used to build inadmissible probes)."""
        return ChebyshevScalar(self._f.domain[1], factor * self._f.coef,
                               factor * self._f1.coef, factor * self._f2.coef,
                               factor * self.shift)


class LogWarpScalar(RadialScalar):
    """``f = ln(phi) - shift`` for a radial warp field."""

    def __init__(self, phi, shift=0.0):
        self.phi = phi
        self.shift = float(shift)

    def eval(self, t, th=None):
        return np.log(self.phi.eval(t, 0.0)) - self.shift

    def d1(self, t):
        return self.phi.dlog(t, 0.0)[0]

    def d2(self, t):
        t = np.asarray(t, dtype=float)
        p = self.phi.eval(t, 0.0)
        g = self.phi.grad(t, 0.0)[0]
        return self.phi.hess(t, 0.0)[0] / p - (g / p)**2


# ---------------------------------------------------------------------------
# admissible pairs
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(256)


def _gl_nodes(lo, hi):
    x = 0.5 * (hi - lo) * _GL_X + 0.5 * (hi + lo)
    return x, 0.5 * (hi - lo) * _GL_W


@dataclass
class AdmissiblePair:
    """A concave profile w on [0, 2] and a field f with |grad f|^2 <= -w''/w."""

    w: RadialProfile
    f: RadialScalar
    mean_zero: bool = True
    meta: dict = field(default_factory=dict)

    def check_invariants(self, n=10_000):
        """Worst violation of each invariant on ``n`` interior sample points."""
        a = self.w.a
        t = np.linspace(0.0, a, n + 2)[1:-1]
        d2 = self.w.d2(t)
        kappa = self.w.curvature(t)
        fr, fth = self.f.grad(t)
        grad2 = fr**2 + (fth / self.w.eval(t))**2
        out = {
            "concavity": float(np.max(d2)),
            "gradient": float(np.max(grad2 - kappa)),
        }
        x, wq = _gl_nodes(0.0, a)
        area = _TWO_PI * np.sum(wq * self.w.eval(x))
        mean = _TWO_PI * np.sum(wq * self.f.eval(x) * self.w.eval(x))
        out["mean"] = float(abs(mean) / area)
        return out

    def is_admissible(self, n=10_000):
        m = self.check_invariants(n)
        ok = m["concavity"] <= 1e-10 and m["gradient"] <= 1e-9
        if self.mean_zero:
            ok = ok and m["mean"] <= 1e-8
        return ok


_CHEB_DEG = 96


def _sample_once(rng, roughness):
    a = 2.0
    J = 4
    amp = rng.normal(size=J) / np.arange(1, J + 1)
    ph = rng.uniform(0.0, _TWO_PI, size=J)
    jj = np.arange(1, J + 1)

    def q(t):
        t = np.asarray(t, dtype=float)[..., None]
        return np.exp(roughness * np.sum(amp * np.cos(jj * np.pi * t / 2 + ph), axis=-1))

    def m0(t):
        return np.sin(np.pi * np.asarray(t) / 2) * q(t)

    x, wq = _gl_nodes(0.0, a)
    mx = m0(x)

    def moment(lam):
        return np.sum(wq * (x - 1.0) * mx * np.exp(lam * (x - 1.0)))

    lam = brentq(moment, -60.0, 60.0, xtol=1e-15)

    def m(t):
        return m0(t) * np.exp(lam * (np.asarray(t) - 1.0))

    dom = [0.0, a]
    mc = C.Chebyshev.interpolate(m, _CHEB_DEG, domain=dom)
    G = mc.integ(lbnd=0.0)
    G2 = G(a)
    w1 = 1.0 - 2.0 * G / G2
    w = w1.integ(lbnd=0.0)
    # remove the tiny closure error so w(2) = 0 at working precision
    drift = w(a)
    lin = C.Chebyshev.interpolate(lambda t: drift * np.asarray(t) / a, 1, domain=dom)
    w = w - lin
    w1 = w1 - drift / a
    w2 = -2.0 * mc / G2

    def kappa(t):
        return 2.0 * m(t) / (G2 * w(t))

    kc = C.Chebyshev.interpolate(kappa, _CHEB_DEG, domain=dom)
    prof = ChebyshevProfile(a, w.coef, w1.coef, w2.coef, kc.coef)

    if roughness == 0:
        return prof, ZeroScalar()

    camp = rng.normal(size=J) / jj
    cph = rng.uniform(0.0, _TWO_PI, size=J)

    def c(t):
        t = np.asarray(t, dtype=float)[..., None]
        return roughness * np.sin(np.sum(camp * np.cos(jj * np.pi * t / 2 + cph), axis=-1) + 0.7)

    def fprime(t):
        return c(t) * np.sqrt(np.maximum(kc(t), 0.0))

    f1 = C.Chebyshev.interpolate(fprime, _CHEB_DEG, domain=dom)
    # guard against interpolation overshoot of |c| <= roughness
    f1 = f1 * (1.0 - 1e-12)
    f0 = f1.integ(lbnd=1.0)
    f2 = f1.deriv()
    mean = np.sum(wq * f0(x) * w(x)) / np.sum(wq * w(x))
    return prof, ChebyshevScalar(a, f0.coef, f1.coef, f2.coef, shift=mean)


def sample_admissible_pair(seed, roughness=0.5):
    """Deterministic random admissible pair on [0, 2].

    ``w'' = -2 m / G(2)`` for a positive random density m (centred at t = 1
    by an exponential tilt) gives a concave w with slopes +-1 at the ends.
    ``f' = c(t) sqrt(-w''/w)`` with ``|c| <= roughness`` gives admissibility,
    and f is shifted to mean zero against ``dvol_h``.  ``roughness = 0``
    returns the round profile with ``f == 0``.  Failed candidates are
    retried 100 times before roughness is halved.
    """
    roughness = float(np.clip(roughness, 0.0, 1.0))
    if roughness == 0.0:
        return AdmissiblePair(RoundProfile(2.0), ZeroScalar(), True,
                              {"seed": seed, "roughness": 0.0, "attempts": 0})
    attempts = 0
    while True:
        for attempt in range(100):
            attempts += 1
            rng = np.random.default_rng([int(seed), attempts])
            w, f = _sample_once(rng, roughness)
            pair = AdmissiblePair(w, f, True, {"seed": seed, "roughness": roughness,
                                               "attempts": attempts})
            if pair.is_admissible():
                return pair
        roughness *= 0.5
