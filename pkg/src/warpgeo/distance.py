"""Distance estimates: explicit path families (upper bounds) and grid Dijkstra.

Points are ``(r, theta, xi)``.  The g-length of a coordinate curve is
``sqrt((r'^2 + u^2 theta'^2)/phi^2 + phi^2 xi'^2)`` integrated along it.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd

import numpy as np
from scipy import integrate, sparse
from scipy.sparse.csgraph import dijkstra

from .errors import DomainError
from .metric_core import pole_guard
from .quadrature_geometry import QuadratureSpec, _gl, radial_cost

__all__ = [
    "PathPolyline", "PathCosts", "path_family_upper_bound", "well_radius", "GridGraph",
    "grid_distance", "diameter_upper_bound", "shortcut_experiment", "product_distance_g0",
    "uniform_axes", "log_graded_axis", "polyline_length", "shorten_path",
]

_MODES = ("radial", "angular", "fiber", "general")


def _wrap(d):
    """Signed angle difference in ``(-pi, pi]``."""
    return float(np.pi - np.mod(np.pi - d, 2.0 * np.pi))


@dataclass
class PathPolyline:
    """Piecewise coordinate path with one mode per segment."""

    points: list
    modes: list
    seg_lengths: list = field(default_factory=list)

    @property
    def total_length(self):
        return float(np.sum(self.seg_lengths))

    def check(self):
        """Each segment changes only the coordinates its mode allows."""
        allowed = {"radial": {0}, "angular": {1}, "fiber": {2}, "general": {0, 1, 2}}
        for (a, b), mode in zip(zip(self.points[:-1], self.points[1:]), self.modes):
            moved = {i for i in range(3) if a[i] != b[i]}
            if not moved <= allowed[mode]:
                return False
        return len(self.modes) == len(self.points) - 1 == len(self.seg_lengths)

    def to_dict(self):
        return {"points": [list(map(float, p)) for p in self.points], "modes": list(self.modes),
                "seg_lengths": list(map(float, self.seg_lengths)),
                "total_length": self.total_length}


class PathCosts:
    """Memoised lengths of radial, angular and fiber segments for one metric."""

    def __init__(self, m, spec=None):
        self.m = m
        self.spec = spec or QuadratureSpec()
        self._radial_cached = lru_cache(maxsize=None)(self._radial)
        self.flat_theta = bool(m.phi.radial_only)
        self.angular = lru_cache(maxsize=None)(self._angular)
        self.well = lru_cache(maxsize=None)(lambda th: well_radius(m, th))

    def radial(self, r1, r2, th):
        lo, hi = min(r1, r2), max(r1, r2)
        return self._radial_cached(lo, hi, 0.0 if self.flat_theta else th)

    def _radial(self, r1, r2, th):
        lo, hi = min(r1, r2), max(r1, r2)
        if lo == hi:
            return 0.0
        return radial_cost(self.m, lo, hi, th, self.spec).value

    def _angular(self, r, th1, th2):
        d = _wrap(th2 - th1)
        if d == 0.0:
            return 0.0
        if self.flat_theta:
            return float(self.m.u.eval(r) / self.m.phi.eval(r, 0.0)) * abs(d)
        a, b = sorted((th1, th1 + d))
        pts = []
        box = self.m.phi.support_box()
        if box is not None and not self.m.phi.radial_only:
            for c in (box[2], 0.5 * (box[2] + box[3]), box[3]):
                for shift in (-2.0 * np.pi, 0.0, 2.0 * np.pi):
                    if a < c + shift < b:
                        pts.append(c + shift)
        val, _ = integrate.quad(lambda t: 1.0 / self.m.phi.eval(r, t), a, b,
                                points=pts or None, epsabs=1e-13, epsrel=1e-11, limit=200)
        return float(self.m.u.eval(r)) * val

    def fiber(self, r, th, dxi):
        return float(self.m.phi.eval(r, th)) * abs(_wrap(dxi))

    def via(self, p, q, rm):
        """Radial to ``rm``, angular, fiber, radial: points, modes, lengths."""
        r1, t1, x1 = p
        r2, t2, x2 = q
        pts = [tuple(p), (rm, t1, x1), (rm, t2, x1), (rm, t2, x2), tuple(q)]
        lens = [self.radial(r1, rm, t1), self.angular(rm, t1, t2),
                self.fiber(rm, t2, x2 - x1), self.radial(rm, r2, t2)]
        return pts, ["radial", "angular", "fiber", "radial"], lens


def well_radius(m, theta=0.0, n=4000):
    """Radius minimising phi along the meridian ``theta``, or None if phi is flat.

    Ties go to the largest radius, so radial legs stay short.
    """
    lo = max(10.0 * pole_guard(m), 1e-300)
    r = np.unique(np.concatenate([np.geomspace(lo, m.a * (1 - 1e-6), n),
                                  np.asarray(m.radial_breakpoints())]))
    r = r[(r > lo) & (r < m.a * (1 - 1e-6))]
    ph = np.asarray(m.phi.eval(r, np.full_like(r, theta)))
    if np.ptp(ph) <= 1e-12 * np.max(ph):
        return None
    near = np.flatnonzero(ph <= ph.min() * (1.0 + 1e-12))
    return float(r[near[-1]])


def _interior(m, p):
    g = pole_guard(m)
    if not g < p[0] < m.a - g:
        raise DomainError(f"point {p} is not interior")


def path_family_upper_bound(m, p, q, costs=None):
    """Shortest member of the explicit path family joining p and q.

    Candidates: the composite through ``r = a/2`` (and through the radii of
    p and q), and the shortcut through the well radius where phi is
    smallest.  Returns ``(PathPolyline, length)``.
    """
    p, q = tuple(map(float, p)), tuple(map(float, q))
    _interior(m, p)
    _interior(m, q)
    costs = costs or PathCosts(m)
    mids = {0.5 * m.a, p[0], q[0]}
    rw = costs.well(p[1])
    if rw is not None:
        mids.add(rw)
    best = None
    for rm in sorted(mids):
        pts, modes, lens = costs.via(p, q, rm)
        total = float(np.sum(lens))
        if best is None or total < best[1]:
            best = (PathPolyline(pts, modes, lens), total)
    return best


def product_distance_g0(p, q):
    """Exact distance on ``g_0``: round S^2 times a circle of length 2 pi."""
    r1, t1, x1 = p
    r2, t2, x2 = q
    c = np.cos(r1) * np.cos(r2) + np.sin(r1) * np.sin(r2) * np.cos(t2 - t1)
    ds = np.arccos(np.clip(c, -1.0, 1.0))
    return float(np.hypot(ds, abs(_wrap(x2 - x1))))


# ---------------------------------------------------------------- grid graph

def _offsets(radius):
    """Primitive lattice offsets in ``[-radius, radius]^3``, one per +/- pair."""
    out = []
    rng = range(-radius, radius + 1)
    for d in product(rng, rng, rng):
        if d == (0, 0, 0) or gcd(gcd(abs(d[0]), abs(d[1])), abs(d[2])) != 1:
            continue
        if d > (0, 0, 0):
            out.append(d)
    return out


def log_graded_axis(m, n, split=0.1):
    """Half the nodes geometric from rho/2 to ``split``, half uniform beyond."""
    rho = min(b for b in m.radial_breakpoints() if b > 0)
    g = np.geomspace(0.5 * rho, split, n // 2, endpoint=False)
    u = np.linspace(split, m.a * (1.0 - 1.0 / n), n - n // 2)
    return np.concatenate([g, u])


class GridGraph:
    """Tensor grid over ``(r, theta, xi)`` with periodic angles.

    Edges join nodes whose index offset is a primitive vector of the
    stencil (radius 1 is the 26-neighbour stencil); each edge is weighted
    by the g-length of the straight coordinate segment, by 8-point
    Gauss-Legendre quadrature.
    """

    def __init__(self, m, r_axis, th_axis, xi_axis, stencil=1, order=8):
        self.m = m
        self.r = np.asarray(r_axis, dtype=float)
        self.th = np.asarray(th_axis, dtype=float)
        self.xi = np.asarray(xi_axis, dtype=float)
        g = pole_guard(m)
        if self.r.min() <= g or self.r.max() >= m.a - g:
            raise DomainError("radial axis must stay inside (0, a)")
        self.shape = (len(self.r), len(self.th), len(self.xi))
        self.stencil = int(stencil)
        self.graph = self._build(order)

    def index(self, i, j, k):
        return (i * self.shape[1] + j) * self.shape[2] + k

    def _build(self, order):
        nr, nt, nx = self.shape
        x, w = _gl(order)
        s = 0.5 * (x + 1.0)
        w = 0.5 * w
        I, J, K = np.meshgrid(np.arange(nr), np.arange(nt), np.arange(nx), indexing="ij")
        I, J, K = I.ravel(), J.ravel(), K.ravel()
        rows, cols, vals = [], [], []
        for di, dj, dk in _offsets(self.stencil):
            ok = (I + di >= 0) & (I + di < nr)
            if dj and abs(dj) >= nt or dk and abs(dk) >= nx:
                continue
            i0, j0, k0 = I[ok], J[ok], K[ok]
            i1, j1, k1 = i0 + di, (j0 + dj) % nt, (k0 + dk) % nx
            dr = self.r[i1] - self.r[i0]
            dth = np.mod(self.th[j1] - self.th[j0] + np.pi, 2.0 * np.pi) - np.pi
            dxi = np.mod(self.xi[k1] - self.xi[k0] + np.pi, 2.0 * np.pi) - np.pi
            if dj and abs(dj) * 2 == nt:
                dth = np.abs(dth) * np.sign(dj)
            if dk and abs(dk) * 2 == nx:
                dxi = np.abs(dxi) * np.sign(dk)
            R = self.r[i0][:, None] + s[None, :] * dr[:, None]
            T = self.th[j0][:, None] + s[None, :] * dth[:, None]
            phi = self.m.phi.eval(R, T)
            u = self.m.u.eval(R)
            ds = np.sqrt((dr[:, None]**2 + (u * dth[:, None])**2) / phi**2
                         + (phi * dxi[:, None])**2)
            rows.append(self.index(i0, j0, k0))
            cols.append(self.index(i1, j1, k1))
            vals.append(ds @ w)
        rows, cols, vals = map(np.concatenate, (rows, cols, vals))
        n = nr * nt * nx
        # wrapped offsets can join the same pair twice: keep the shorter edge
        a, b = np.minimum(rows, cols), np.maximum(rows, cols)
        key = a * n + b
        order_ = np.lexsort((vals, key))
        key, a, b, vals = key[order_], a[order_], b[order_], vals[order_]
        first = np.concatenate([[True], key[1:] != key[:-1]])
        return sparse.csr_matrix((vals[first], (a[first], b[first])), shape=(n, n))

    def node_of(self, p, tol=1e-12):
        """Index of the node at p; raises if p is not a node."""
        out = []
        for ax, v, periodic in ((self.r, p[0], False), (self.th, p[1], True),
                                (self.xi, p[2], True)):
            d = np.abs(np.mod(ax - v + np.pi, 2.0 * np.pi) - np.pi) if periodic else np.abs(ax - v)
            i = int(np.argmin(d))
            if d[i] > tol:
                raise DomainError(f"point {p} is not a grid node")
            out.append(i)
        return self.index(*out)

    def distances_from(self, p):
        return dijkstra(self.graph, directed=False, indices=self.node_of(p))

    def coords(self, idx):
        i, rem = np.divmod(np.asarray(idx), self.shape[1] * self.shape[2])
        j, k = np.divmod(rem, self.shape[2])
        return np.stack([self.r[i], self.th[j], self.xi[k]], axis=-1)

    def distance(self, p, q, return_path=False):
        """Shortest-path length; the search always starts from the smaller point.

        With ``return_path`` also returns the node coordinates along the path.
        """
        a, b = sorted([tuple(map(float, p)), tuple(map(float, q))])
        src, dst = self.node_of(a), self.node_of(b)
        d, pred = dijkstra(self.graph, directed=False, indices=src, return_predecessors=True)
        if not return_path:
            return float(d[dst])
        path = [dst]
        while path[-1] != src:
            path.append(pred[path[-1]])
        return float(d[dst]), self.coords(path[::-1])

    def cell_size(self):
        """Largest g-length of a single axis step (a crude grid resolution)."""
        dr = np.max(np.diff(self.r))
        dth = 2.0 * np.pi / len(self.th)
        dxi = 2.0 * np.pi / len(self.xi)
        R, T = np.meshgrid(self.r, self.th, indexing="ij")
        phi = self.m.phi.eval(R, T)
        u = self.m.u.eval(R)
        return float(max(np.max(dr / phi), np.max(u * dth / phi), np.max(phi * dxi)))


def _axis_with(base, extra, periodic):
    pts = list(base)
    for v in extra:
        d = np.abs(np.mod(np.asarray(pts) - v + np.pi, 2 * np.pi) - np.pi) if periodic \
            else np.abs(np.asarray(pts) - v)
        if d.min() > 1e-12:
            pts.append(v)
    pts = np.asarray(pts, dtype=float)
    if periodic:
        pts = np.mod(pts + np.pi, 2.0 * np.pi) - np.pi
    return np.sort(pts)


def uniform_axes(m, n_r, n_th, n_xi, margin=None):
    margin = 0.5 * m.a / n_r if margin is None else margin
    r = np.linspace(margin, m.a - margin, n_r)
    th = -np.pi + 2.0 * np.pi * np.arange(n_th) / n_th
    xi = -np.pi + 2.0 * np.pi * np.arange(n_xi) / n_xi
    return r, th, xi


def polyline_length(m, pts, order=8):
    """g-length of the polyline through ``pts`` (angles joined the short way)."""
    x, w = _gl(order)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    pts = np.asarray(pts, dtype=float)
    a, b = pts[:-1], pts[1:]
    d = b - a
    d[:, 1:] = np.mod(d[:, 1:] + np.pi, 2.0 * np.pi) - np.pi
    R = a[:, :1] + s[None, :] * d[:, :1]
    T = a[:, 1:2] + s[None, :] * d[:, 1:2]
    phi = m.phi.eval(R, T)
    u = m.u.eval(R)
    ds = np.sqrt((d[:, :1]**2 + (u * d[:, 1:2])**2) / phi**2 + (phi * d[:, 2:])**2)
    return float(np.sum(ds @ w))


def _shorten_once(m, pts, n_points, maxiter):
    from scipy.optimize import minimize

    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    t = np.concatenate([[0.0], np.cumsum(seg)])
    tt = np.linspace(0.0, t[-1], max(n_points, 3))
    res = np.stack([np.interp(tt, t, pts[:, i]) for i in range(3)], axis=1)
    ends = res[[0, -1]]
    g = pole_guard(m)

    def length(z):
        P = np.vstack([ends[:1], z.reshape(-1, 3), ends[1:]])
        return polyline_length(m, P)

    z0 = res[1:-1].ravel()
    bounds = [(g, m.a - g), (None, None), (None, None)] * (len(res) - 2)
    out = minimize(length, z0, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": maxiter, "ftol": 1e-13, "gtol": 1e-10})
    L0 = length(z0)
    z = out.x if out.fun <= L0 else z0
    return float(min(out.fun, L0)), np.vstack([ends[:1], z.reshape(-1, 3), ends[1:]])


def shorten_path(m, pts, n_points=48, maxiter=400):
    """Locally minimise the g-length of a polyline with fixed endpoints.

    The path is resampled (uniformly in coordinate arc length) and the
    interior vertices move under L-BFGS-B, coarse to fine: 12, 24, ...
    vertices up to ``n_points``.  Starting fine directly tends to stall on
    corner-shaped grid paths.  The result is the length of an actual curve,
    so it stays an upper bound for d_g.
    """
    pts = np.asarray(pts, dtype=float).copy()
    # unwrap angles so the polyline is continuous in coordinates
    pts[:, 1:] = np.unwrap(pts[:, 1:], axis=0)
    if not np.any(np.diff(pts, axis=0)):
        return 0.0, pts
    levels = [n for n in (12, 24) if n < n_points] + [n_points]
    best = polyline_length(m, pts)
    for n in levels:
        L, pts = _shorten_once(m, pts, n, maxiter)
        best = min(best, L)
    return float(best), pts


# the last graph is reused when consecutive queries share the same axes
_GRAPH_CACHE = {}


def grid_distance(m, p, q, n_r=64, n_th=64, n_xi=64, grading="uniform", stencil=1,
                  refine=False):
    """Dijkstra distance between p and q on a grid that contains both as nodes.

    ``grading="log"`` uses :func:`log_graded_axis` in r (for the drawstring
    well).  With ``refine`` the Dijkstra path is shortened by
    :func:`shorten_path`, removing the stencil's direction bias.  Raises
    DomainError if p or q lies outside the radial span.
    """
    for n in (n_r, n_th, n_xi):
        if n < 16:
            raise DomainError("resolutions must be at least 16")
    r, th, xi = uniform_axes(m, n_r, n_th, n_xi)
    if grading == "log":
        r = log_graded_axis(m, n_r)
    for pt in (p, q):
        if not r[0] <= pt[0] <= r[-1]:
            raise DomainError(f"point {pt} outside the grid margin")
    r = _axis_with(r, [p[0], q[0]], False)
    th = _axis_with(th, [p[1], q[1]], True)
    xi = _axis_with(xi, [p[2], q[2]], True)
    key = (m, stencil, r.tobytes(), th.tobytes(), xi.tobytes())
    if _GRAPH_CACHE.get("key") != key:
        _GRAPH_CACHE.update(key=key, graph=GridGraph(m, r, th, xi, stencil=stencil))
    G = _GRAPH_CACHE["graph"]
    if not refine:
        return G.distance(p, q)
    d, path = G.distance(p, q, return_path=True)
    return min(d, shorten_path(m, path)[0])


# ---------------------------------------------------------------- experiments

def diameter_upper_bound(m, n_r=12, n_th=12, n_xi=4):
    """Largest path-family length over all pairs of an ``n_r x n_th x n_xi`` sample.

    Uses the candidate set of :func:`path_family_upper_bound` (``a/2``, the
    two endpoint radii and the well radius), tabulated once per radius.
    """
    costs = PathCosts(m)
    r = m.a * (np.arange(n_r) + 0.5) / n_r
    th = -np.pi + 2.0 * np.pi * np.arange(n_th) / n_th
    xi = -np.pi + 2.0 * np.pi * np.arange(n_xi) / n_xi
    wells = [costs.well(t) for t in th]
    S = sorted({0.5 * m.a, *r.tolist(), *(w for w in wells if w is not None)})
    pos = {v: i for i, v in enumerate(S)}
    RC = np.array([[[costs.radial(ri, rm, tj) for rm in S] for tj in th] for ri in r])
    AC = np.array([[[costs.angular(rm, t1, t2) for t2 in th] for t1 in th] for rm in S])
    PH = np.array([[float(m.phi.eval(rm, tj)) for tj in th] for rm in S])
    I, J, K = (a.ravel() for a in np.meshgrid(np.arange(n_r), np.arange(n_th),
                                              np.arange(n_xi), indexing="ij"))
    dxi = np.abs([[_wrap(xi[b] - xi[a]) for b in range(n_xi)] for a in range(n_xi)])
    dK = dxi[K[:, None], K[None, :]]

    def family(c):
        """Length matrix for candidate index array c (shape broadcastable to pairs)."""
        return (RC[I[:, None], J[:, None], c] + AC[c, J[:, None], J[None, :]]
                + PH[c, J[None, :]] * dK + RC[I[None, :], J[None, :], c])

    n = len(I)
    ones = np.ones((n, n), dtype=int)
    cands = [pos[0.5 * m.a] * ones, np.array([pos[v] for v in r])[I][:, None] * ones,
             np.array([pos[v] for v in r])[I][None, :] * ones]
    if any(w is not None for w in wells):
        wi = np.array([pos[w] if w is not None else pos[0.5 * m.a] for w in wells])
        cands.append(wi[J][:, None] * ones)
    best = np.min([family(c) for c in cands], axis=0)
    return float(best.max())


def shortcut_experiment(A_list, r_star=0.02, theta0=0.0):
    """Shortcut pair ``(r*, theta0, 0)``, ``(r*, theta0, pi)`` on drawstring metrics.

    Returns rows ``{A, d_upper, d_limit, gap, radial_cost, radial_excess}``;
    the limit distance is pi.
    """
    from .examples import DrawstringParams, build_drawstring

    if not 0.0 < r_star < 1.0 / 40.0:
        raise DomainError("need 0 < r_star < 1/40")
    rows = []
    for A in A_list:
        m = build_drawstring(DrawstringParams(A=float(A)))
        p, q = (r_star, theta0, 0.0), (r_star, theta0, np.pi)
        _, d = path_family_upper_bound(m, p, q)
        rc = radial_cost(m, m.core.rho, r_star, theta0).value
        rows.append({"A": float(A), "d_upper": d, "d_limit": float(np.pi), "gap": np.pi - d,
                     "radial_cost": rc, "radial_excess": rc - r_star})
    return rows
