"""Geodesics, the exponential map and small-volume expansions.

Positions inside the batch integrators are carried as offsets from the
base point q, so that Jacobians of ``exp_q`` computed by central
differences keep their relative precision even for regions of size 1e-3.
"""
from dataclasses import dataclass, field
import csv
import logging
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import qmc

from .errors import AccuracyError, ChartExitError, ConditioningError, PreconditionError, DomainError
from .examples import wedge_delta
from .metric_core import pole_guard

__all__ = [
    "GeodesicState", "Trajectory", "integrate_geodesic", "exp_map", "geodesic_rhs",
    "speed", "orthonormal_frame", "shoot_batch", "exp_jacobian",
    "TangentRegion", "wedge_region", "region_volume_via_exp", "ball_volume",
    "background_ball_volume", "FitResult", "fit_expansion", "ricci_moment",
    "wedge_c5_formula", "step_schedule", "wedge_expansion", "ball_expansion",
]

log = logging.getLogger(__name__)


@dataclass
class GeodesicState:
    r: float
    theta: float
    xi: float
    vr: float
    vtheta: float
    vxi: float

    @property
    def position(self):
        return np.array([self.r, self.theta, self.xi])

    @property
    def velocity(self):
        return np.array([self.vr, self.vtheta, self.vxi])

    @classmethod
    def from_arrays(cls, p, v):
        return cls(*map(float, p), *map(float, v))


# ---------------------------------------------------------------------------
# geodesic equation
# ---------------------------------------------------------------------------

def _accel(m, r, th, vr, vt, vx):
    """Coordinate accelerations ``-Gamma^i_jk v^j v^k`` for arrays of states."""
    u = m.u.eval(r)
    u1 = m.u.d1(r)
    phi, lr, lt = m.phi.value_dlog(r, th)
    p4 = phi**4
    iu2 = 1.0 / (u * u)
    ar = -(-lr * vr * vr + (u * u * lr - u * u1) * vt * vt - p4 * lr * vx * vx - 2.0 * lt * vr * vt)
    at = -(lt * iu2 * vr * vr - lt * vt * vt - p4 * lt * iu2 * vx * vx
           + 2.0 * (u1 / u - lr) * vr * vt)
    ax = -2.0 * (lr * vr + lt * vt) * vx
    return ar, at, ax


def geodesic_rhs(m):
    """Right-hand side for ``y = (r, theta, xi, vr, vtheta, vxi)``."""
    def rhs(s, y):
        ar, at, ax = _accel(m, y[0], y[1], y[3], y[4], y[5])
        return np.array([y[3], y[4], y[5], ar, at, ax])
    return rhs


def speed(m, r, th, vr, vt, vx):
    """``|v|_g`` for coordinate velocity ``(vr, vt, vx)`` at ``(r, th)``."""
    phi = m.phi.eval(r, th)
    u = m.u.eval(r)
    return np.sqrt((vr * vr + (u * vt)**2) / phi**2 + (phi * vx)**2)


def orthonormal_frame(m, q):
    """Diagonal of the map from orthonormal components to coordinate velocity at q."""
    r, th = float(q[0]), float(q[1])
    phi = float(m.phi.eval(r, th))
    u = float(m.u.eval(r))
    return np.array([phi, phi / u, 1.0 / phi])


@dataclass
class Trajectory:
    s: np.ndarray
    states: np.ndarray          # shape (n, 6)
    speed_drift: np.ndarray     # relative deviation of |v|_g from its initial value

    @property
    def end(self):
        return self.states[-1, :3]

    @property
    def max_drift(self):
        return float(np.max(np.abs(self.speed_drift)))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "r", "theta", "xi", "vr", "vtheta", "vxi", "speed_drift"])
            for s, st, d in zip(self.s, self.states, self.speed_drift):
                w.writerow([repr(float(s))] + [repr(float(x)) for x in st] + [repr(float(d))])


def _near_singular(m, r, th, radius=1e-2):
    pts = m.phi.singular_set.get("points", []) if isinstance(m.phi.singular_set, dict) else []
    return any(math.hypot(r - pr, th - pt) < radius for pr, pt in pts)


def integrate_geodesic(m, s0, t_end, rtol=1e-11, atol=1e-13, max_step=None):
    """Integrate the geodesic equation from ``s0`` for parameter time ``t_end``.

    Uses DOP853.  Within 1e-2 of a point where the warp field is only
    C^{1,alpha} the step is capped at 1e-4 and accuracy is judged by the
    drift of the g-speed (tolerance 1e-4 instead of 1e-6 per unit length).
    """
    y0 = np.concatenate([s0.position, s0.velocity]).astype(float)
    guard = pole_guard(m)
    rough = _near_singular(m, y0[0], y0[1], 1e-2 + abs(t_end) * float(np.linalg.norm(y0[3:])))
    if max_step is None:
        max_step = 1e-4 if rough else np.inf

    def lo(s, y):
        return y[0] - guard
    lo.terminal = True

    def hi(s, y):
        return m.a - guard - y[0]
    hi.terminal = True

    sol = solve_ivp(geodesic_rhs(m), (0.0, t_end), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=[lo, hi], max_step=max_step, dense_output=False)
    states = sol.y.T
    sp = speed(m, states[:, 0], states[:, 1], states[:, 3], states[:, 4], states[:, 5])
    drift = sp / sp[0] - 1.0
    traj = Trajectory(sol.t, states, drift)
    if sol.status == 1:
        raise ChartExitError("geodesic left the coordinate chart", trajectory=traj)
    length = abs(t_end) * sp[0]
    limit = (1e-4 if rough else 1e-6) * max(length, 1.0)
    if traj.max_drift > limit:
        raise AccuracyError(f"speed drift {traj.max_drift:.3g} exceeds {limit:.3g}")
    return traj


def exp_map(m, q, v, t=1.0):
    """``exp_q(t v)`` for coordinate velocity v.

    From a point on the singular circle, directions with ``v_r v_theta = 0``
    lie in a totally geodesic plane where the field is identically 1 and we
    return the straight-line plane solution.  Uniqueness along those
    directions is not established for alpha <= 1/3; such runs are flagged
    in the log.
    """
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    if len(q) == 2:
        q = np.append(q, 0.0)
    if np.any(m.phi.is_singular(q[0], q[1])) and v[0] * v[1] == 0.0:
        alpha = getattr(m.phi, "alpha", None)
        if alpha is not None and alpha <= 1.0 / 3.0:
            log.warning("plane-solution branch selected with alpha=%.4g <= 1/3; "
                        "other geodesic branches may exist", alpha)
        return q + t * v
    traj = integrate_geodesic(m, GeodesicState.from_arrays(q, v), t)
    return traj.end


# ---------------------------------------------------------------------------
# batched fixed-step integration
# ---------------------------------------------------------------------------

def step_schedule(t_nodes, h, h_fine=None, fine_until=0.0):
    """Parameter grid hitting every node, with step h (h_fine below fine_until)."""
    t_nodes = np.unique(np.asarray(t_nodes, dtype=float))
    marks = [0.0]
    for t in t_nodes:
        a = marks[-1]
        while a < t:
            step = h_fine if (h_fine is not None and a < fine_until) else h
            if h_fine is not None and a < fine_until < t:
                step = min(step, fine_until - a) if fine_until - a > 1e-3 * step else step
            nxt = min(a + step, t)
            if t - nxt < 1e-3 * step:
                nxt = t
            marks.append(nxt)
            a = nxt
    return np.array(marks)


def shoot_batch(m, q, V, t_nodes, h, h_fine=None, fine_until=0.0):
    """Classical RK4 for many geodesics from q with coordinate velocities V.

    ``V`` has shape (3, N).  Returns offsets from q at each requested
    parameter value, shape ``(len(t_nodes), 3, N)``, in the order of
    ``np.unique(t_nodes)``.
    """
    q = np.asarray(q, dtype=float)
    r0, t0 = q[0], q[1]
    V = np.asarray(V, dtype=float)
    nodes = np.unique(np.asarray(t_nodes, dtype=float))
    grid = step_schedule(nodes, h, h_fine, fine_until)
    X = np.zeros_like(V)
    W = V.copy()

    def f(X, W):
        a = _accel(m, r0 + X[0], t0 + X[1], W[0], W[1], W[2])
        return W, np.array(a)

    out = np.empty((len(nodes), 3, V.shape[1]))
    j = 0
    for a, b in zip(grid[:-1], grid[1:]):
        dt = b - a
        k1x, k1v = f(X, W)
        k2x, k2v = f(X + 0.5 * dt * k1x, W + 0.5 * dt * k1v)
        k3x, k3v = f(X + 0.5 * dt * k2x, W + 0.5 * dt * k2v)
        k4x, k4v = f(X + dt * k3x, W + dt * k3v)
        X = X + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        W = W + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        while j < len(nodes) and abs(b - nodes[j]) < 1e-15 * max(1.0, nodes[j]):
            out[j] = X
            j += 1
    return out


def exp_jacobian(m, q, Wn, t_nodes, delta, h, h_fine=None, fine_until=0.0):
    """Volume Jacobian of ``exp_q`` at ``tau * w`` for orthonormal vectors w.

    ``Wn`` has shape (3, N) in orthonormal components at q.  The Jacobian is
    taken by central differences with Cartesian step ``delta`` applied to
    the initial velocity, so one trajectory serves every tau.  Returns
    ``J`` of shape ``(len(t_nodes), N)``; J = 1 for flat space.
    """
    q = np.asarray(q, dtype=float)
    E = orthonormal_frame(m, q)
    N = Wn.shape[1]
    stencil, steps = [], []
    for i in range(3):
        Wp = Wn.copy()
        Wp[i] = Wn[i] + delta
        Wm = Wn.copy()
        Wm[i] = Wn[i] - delta
        stencil += [Wp, Wm]
        # the representable step, not the nominal one
        steps.append(Wp[i] - Wm[i])
    V = np.concatenate(stencil, axis=1) * E[:, None]
    P = shoot_batch(m, q, V, t_nodes, h, h_fine, fine_until)
    nodes = np.unique(np.asarray(t_nodes, dtype=float))
    J = np.empty((len(nodes), N))
    for j, tau in enumerate(nodes):
        cols = []
        for i in range(3):
            plus = P[j, :, (2 * i) * N:(2 * i + 1) * N]
            minus = P[j, :, (2 * i + 1) * N:(2 * i + 2) * N]
            cols.append((plus - minus) / (tau * steps[i]))
        D = np.stack(cols, axis=1)          # (3 coords, 3 tangent dirs, N)
        D = D * E[None, :, None]
        det = np.linalg.det(np.moveaxis(D, -1, 0))
        mid = 0.5 * (P[j, :, :N] + P[j, :, N:2 * N])   # centre of the e_0 stencil
        r = q[0] + mid[0]
        th = q[1] + mid[1]
        J[j] = np.abs(det) * m.u.eval(r) / m.phi.eval(r, th)
    return J


# ---------------------------------------------------------------------------
# tangent regions
# ---------------------------------------------------------------------------

@dataclass
class TangentRegion:
    """A region of ``T_q M`` in orthonormal components.

    ``sampler(U)`` maps points of the unit cube to ``(points (3, N),
    weights (N,))`` over a fundamental piece; the region integral of an
    even function is ``symmetry_factor`` times the piece integral.
    """

    name: str
    membership: object
    bbox: tuple
    euclid_volume: float
    sampler: object
    symmetry_factor: int = 1
    symmetry_certified: bool = False
    meta: dict = field(default_factory=dict)

    def monte_carlo_moments(self, n=200_000, seed=0):
        """Volume, second moments and mixed moments by rejection sampling."""
        rng = np.random.default_rng(seed)
        lo = np.array([b[0] for b in self.bbox])
        hi = np.array([b[1] for b in self.bbox])
        P = lo[:, None] + (hi - lo)[:, None] * rng.random((3, n))
        inside = self.membership(*P)
        box = float(np.prod(hi - lo))
        Pin = P[:, inside]
        vol = box * inside.mean()
        mom = {k: box * np.sum(Pin[i] * Pin[j]) / n
               for k, (i, j) in {"xx": (0, 0), "yy": (1, 1), "zz": (2, 2),
                                 "xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}.items()}
        return vol, mom


def wedge_region(alpha, rho0, rho_star=None):
    """The wedge ``Omega = Omega_+ u Omega_-``.

    Sectors of the (x, y) disc of radius rho0 with ``alpha|x| <= |y| <=
    |x|/alpha``, times ``|z| < sqrt(3) rho0 / 2``.  ``rho_star`` (if given)
    enforces ``rho0 <= rho_star / 2``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    cap = math.sqrt(1.0 + alpha**2) * alpha**(alpha / (1.0 - alpha))
    if rho_star is not None:
        cap = min(cap, 0.5 * rho_star)
    if rho0 > cap * (1.0 + 1e-12):
        raise PreconditionError(f"rho0={rho0:.6g} exceeds the admissible bound {cap:.6g}")
    d = wedge_delta(alpha)
    h = 0.5 * math.sqrt(3.0) * rho0
    a0 = math.atan(alpha)

    def member(x, y, z):
        ax, ay = np.abs(x), np.abs(y)
        return ((x * x + y * y <= rho0 * rho0) & (x * y != 0) & (alpha * ax <= ay)
                & (ay <= ax / alpha) & (np.abs(z) < h))

    def sampler(U):
        # first-quadrant sector, z > 0; polar map with its Jacobian as weight
        rad = rho0 * U[0]
        ang = a0 + d * U[1]
        z = h * U[2]
        pts = np.array([rad * np.cos(ang), rad * np.sin(ang), z])
        return pts, rad * rho0 * d * h

    return TangentRegion("wedge", member, ((-rho0, rho0), (-rho0, rho0), (-h, h)),
                         2.0 * math.sqrt(3.0) * d * rho0**3, sampler, symmetry_factor=8,
                         symmetry_certified=True,
                         meta={"alpha": alpha, "rho0": rho0, "delta": d})


def wedge_c5_formula(alpha, k, rho0):
    """Predicted t^5 coefficient ``(sqrt3 rho0^5 / 6)(k (1-a^2)/(1+a^2) - delta)``."""
    return math.sqrt(3.0) * rho0**5 / 6.0 * (k * (1 - alpha**2) / (1 + alpha**2) - wedge_delta(alpha))


def ricci_moment(alpha, k, rho0, n=64):
    """``int_{Omega_+} Ric^+ + int_{Omega_-} Ric^-`` by Gauss-Legendre quadrature.

    ``Ric^{+-}(v) = x^2 + y^2 -+ 2k xy``.  Returns ``(numeric, closed_form)``.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    d = wedge_delta(alpha)
    a0 = math.atan(alpha)
    h = 0.5 * math.sqrt(3.0) * rho0
    rad = 0.5 * rho0 * (x + 1.0)
    wr = 0.5 * rho0 * w
    total = 0.0
    for sign, quads in ((+1, (0.0, math.pi)), (-1, (0.5 * math.pi, 1.5 * math.pi))):
        for base in quads:
            ang = base + a0 + 0.5 * d * (x + 1.0)
            wa = 0.5 * d * w
            R, T = np.meshgrid(rad, ang, indexing="ij")
            X, Y = R * np.cos(T), R * np.sin(T)
            ric = X * X + Y * Y - 2.0 * sign * k * X * Y
            total += 2.0 * h * np.einsum("i,ij,j->", wr, ric * R, wa)
    closed = math.sqrt(3.0) * rho0**5 * (d - k * (1 - alpha**2) / (1 + alpha**2))
    return total, closed


def region_volume_via_exp(m, q, region, ts, n_samples=2**16, seed=0, n_rep=8, n_steps=16,
                          delta_rel=3e-4):
    """``Vol_g(exp_q(t Omega))`` for each t by randomised quasi-Monte-Carlo.

    Returns a list of dicts ``{t, volume, deficit, stderr, rejected}`` where
    ``volume = t^3 Vol_E(Omega) + deficit`` and ``deficit = t^3 int (J - 1)``.
    The standard error comes from ``n_rep`` independently scrambled Sobol
    replicates.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    per = max(1, n_samples // n_rep)
    scale = max(abs(b[1] - b[0]) for b in region.bbox)
    delta = delta_rel * scale
    tmax = float(ts.max())
    reps = np.zeros((n_rep, len(ts)))
    rejected = 0
    for rep in range(n_rep):
        sob = qmc.Sobol(d=3, scramble=True, seed=np.random.default_rng([seed, rep]))
        U = sob.random(per)
        pts, wts = region.sampler(U.T)
        J = exp_jacobian(m, q, pts, ts, delta, h=tmax / n_steps)
        bad = ~np.isfinite(J).all(axis=0)
        rejected += int(bad.sum())
        Jd = np.where(bad[None, :], 1.0, J) - 1.0
        reps[rep] = region.symmetry_factor * (Jd * wts[None, :]).mean(axis=1)
    frac = rejected / (per * n_rep)
    if frac >= 1e-3:
        raise AccuracyError(f"rejected fraction {frac:.2e} exceeds 1e-3")
    if rejected:
        log.info("region_volume_via_exp rejected %d samples", rejected)
    mean = reps.mean(axis=0)
    se = reps.std(axis=0, ddof=1) / math.sqrt(n_rep)
    order = np.argsort(np.unique(ts))
    out = []
    for j, t in enumerate(np.unique(ts)):
        dfc = t**3 * mean[j]
        out.append({"t": float(t), "volume": t**3 * region.euclid_volume + dfc,
                    "deficit": float(dfc), "stderr": float(t**3 * se[j]), "rejected": rejected})
    return out


# ---------------------------------------------------------------------------
# geodesic balls
# ---------------------------------------------------------------------------

def _sphere_rule(n_pol, n_az):
    x, w = np.polynomial.legendre.leggauss(n_pol)
    phi = (np.arange(n_az) + 0.5) * 2.0 * np.pi / n_az
    C, P = np.meshgrid(x, phi, indexing="ij")
    S = np.sqrt(1.0 - C * C)
    dirs = np.array([S * np.cos(P), S * np.sin(P), C]).reshape(3, -1)
    wts = (w[:, None] * np.full(n_az, 2.0 * np.pi / n_az)[None, :]).ravel()
    return dirs, wts


def ball_volume(m, q, ts, n_pol=24, n_az=48, n_s=12, delta=1e-4, n_steps=48, fine=None,
                chunk=4096):
    """Volume of geodesic balls ``B_q(t)`` via the exponential map.

    The ball is taken to be the exp image of the g-unit ball (short-time
    minimality is assumed).  Integration is a product rule: Gauss-Legendre
    in the polar cosine, uniform azimuth and Gauss-Legendre in s with the
    ``s^2`` weight, applied to ``J - 1``.  ``fine = (h_fine, until)``
    refines the first part of each geodesic.  Returns a list of dicts
    ``{t, volume, deficit}``.
    """
    ts = np.unique(np.atleast_1d(np.asarray(ts, dtype=float)))
    if np.any(ts > 0.2):
        raise PreconditionError("ball radius must be at most 0.2")
    dirs, wd = _sphere_rule(n_pol, n_az)
    xs, ws = np.polynomial.legendre.leggauss(n_s)
    s_nodes, s_w, owner = [], [], []
    for j, t in enumerate(ts):
        s_nodes.append(0.5 * t * (xs + 1.0))
        s_w.append(0.5 * t * ws)
        owner.append(np.full(n_s, j))
    s_nodes = np.concatenate(s_nodes)
    s_w = np.concatenate(s_w)
    owner = np.concatenate(owner)
    uniq, inv = np.unique(s_nodes, return_inverse=True)
    h = float(ts.max()) / n_steps
    h_fine, until = fine if fine is not None else (None, 0.0)
    deficit = np.zeros(len(ts))
    for a in range(0, dirs.shape[1], chunk):
        D = dirs[:, a:a + chunk]
        J = exp_jacobian(m, q, D, uniq, delta, h, h_fine, until)   # (n_nodes, n_dirs)
        Jn = J[inv]                                                   # per (t, s) node
        integ = (Jn - 1.0) @ wd[a:a + chunk]
        np.add.at(deficit, owner, integ * s_w * s_nodes**2)
    return [{"t": float(t), "volume": 4.0 * np.pi / 3.0 * t**3 + float(dv), "deficit": float(dv)}
            for t, dv in zip(ts, deficit)]


def background_ball_volume(t, n=64):
    """Exact ball volume of ``dr^2 + sin^2 r dtheta^2 + dxi^2`` (t < pi).

    ``V = int_{-t}^{t} 2 pi (1 - cos sqrt(t^2 - z^2)) dz``.
    """
    x, w = np.polynomial.legendre.leggauss(n)
    z = t * x
    return float(t * np.sum(w * 2.0 * np.pi * (1.0 - np.cos(np.sqrt(t * t - z * z)))))


# ---------------------------------------------------------------------------
# expansion fits
# ---------------------------------------------------------------------------

@dataclass
class FitResult:
    c3: float
    c5: float
    c6: float
    residual: float
    n: int


def fit_expansion(volumes, c3_known=None):
    """Least-squares fit of ``V(t) = c3 t^3 + c5 t^5 (+ c6 t^6)``.

    ``volumes`` is a sequence of ``(t, V)``.  The t^6 term is included when
    at least four points are given; a known c3 is held fixed.
    """
    data = np.asarray(volumes, dtype=float)
    if data.ndim != 2 or data.shape[0] < 3 or len(np.unique(data[:, 0])) < 3:
        raise ConditioningError("need at least three distinct t values")
    t, V = data[:, 0], data[:, 1]
    if t.max() / t.min() < 2.0:
        raise ConditioningError("t values span less than a factor of 2")
    s = t.max()
    x = t / s
    powers = [3, 5] + ([6] if len(t) >= 4 else [])
    rhs = V.copy()
    if c3_known is not None:
        rhs = rhs - c3_known * t**3
        powers = powers[1:]
    # columns in the scaled variable x = t/s keep the design well conditioned
    A = np.stack([x**p for p in powers], axis=1)
    colscale = np.linalg.norm(A, axis=0)
    sol, *_ = np.linalg.lstsq(A / colscale, rhs, rcond=None)
    coef = dict(zip(powers, sol / colscale / np.array([s**p for p in powers])))
    resid = rhs - (A / colscale) @ sol
    c3 = c3_known if c3_known is not None else coef[3]
    return FitResult(float(c3), float(coef[5]), float(coef.get(6, 0.0)),
                     float(np.sqrt(np.mean(resid**2))), len(t))


def _c5_from_deficits(rows):
    """Weighted ``deficit ~ c5 t^5`` fit; returns ``(c5, stderr)``."""
    t = np.array([r["t"] for r in rows])
    d = np.array([r["deficit"] for r in rows])
    se = np.array([r.get("stderr", 0.0) for r in rows])
    x = t**5
    den = float(np.sum(x * x))
    c5 = float(np.sum(x * d) / den)
    return c5, float(np.sqrt(np.sum(x * x * se * se)) / den)


def wedge_expansion(alpha, k, rho0=None, ts=(1.0, 0.5, 0.25), n_samples=2**18, seed=0,
                    n_rep=8, n_steps=8):
    """t^5 coefficient of ``Vol(exp_q(t Omega))`` at the singular point.

    ``rho0`` defaults to half the cutoff radius at ``k = 2 K*(alpha)``,
    which is admissible for every ``0 <= k <= 2 K*``.  Returns a dict with
    the fitted c3 and c5, the closed-form c5, their ratio and the volumes.
    """
    from .examples import C1AlphaParams, build_c1alpha, kstar, rho_star

    star = rho_star(C1AlphaParams(alpha, 2.0 * kstar(alpha)))
    if rho0 is None:
        rho0 = 0.5 * min(star, rho_star(C1AlphaParams(alpha, k)))
    m = build_c1alpha(C1AlphaParams(alpha, k))
    region = wedge_region(alpha, rho0, rho_star(C1AlphaParams(alpha, k)))
    q = (0.5 * np.pi, 0.0, 0.0)
    rows = region_volume_via_exp(m, q, region, ts, n_samples, seed, n_rep, n_steps)
    c5, se = _c5_from_deficits(rows)
    c3 = fit_expansion([(r["t"], r["volume"]) for r in rows]).c3
    ref = wedge_c5_formula(alpha, k, rho0)
    return {"alpha": alpha, "k": k, "rho0": rho0, "c3": c3, "c3_exact": region.euclid_volume,
            "c5": c5, "c5_stderr": se, "paper_c5": ref,
            "ratio": c5 / ref if ref != 0 else float("nan"), "volumes": rows}


def ball_expansion(m, q, ts=(0.1, 0.05, 0.025), **kw):
    """Fit ``Vol(B_q(t)) - 4 pi t^3/3 ~ c5 t^5 (+ c6 t^6)`` and compare with -4 pi/45.

    For metrics with a small warp box (``meta["rho_star"]``) the first
    ``3 rho*`` of every geodesic is integrated with step ``rho*/40``.
    """
    rs = m.meta.get("rho_star")
    if rs is not None:
        kw.setdefault("fine", (rs / 40.0, 3.0 * rs))
    rows = ball_volume(m, q, ts, **kw)
    fit = fit_expansion([(r["t"], r["deficit"]) for r in rows], c3_known=0.0)
    ref = -4.0 * np.pi / 45.0
    return {"c3": 4.0 * np.pi / 3.0, "c5": fit.c5, "reference_c5": ref,
            "ratio": fit.c5 / ref, "volumes": rows}
