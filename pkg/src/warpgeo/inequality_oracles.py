"""Property oracles for the quantitative estimates on admissible pairs.

Every check returns an :class:`OracleReport` whose ``worst_margin`` is the
smallest ``RHS - LHS`` seen.  Constants that the estimates only assert to
exist are logged in ``constants`` and never asserted.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError
from .metric_core import pole_guard
from .profiles import LogWarpScalar, AdmissiblePair, sample_admissible_pair

__all__ = [
    "OracleReport", "oscillation_bound", "integral_f_constant", "precheck",
    "pair_from_metric", "check_elementary", "check_concave_props", "check_oscillation",
    "check_integral_f", "check_efw_pointwise", "check_integral_bounds",
    "check_holder_chain", "check_pole_bounds", "run_suite", "merge_reports",
]

TOL = 1e-9


@dataclass
class OracleReport:
    lemma_id: str
    n_trials: int
    worst_margin: float
    witness: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)

    def passed(self, tol=TOL):
        return bool(self.worst_margin >= -tol)

    def to_dict(self):
        return {"lemma_id": self.lemma_id, "n_trials": self.n_trials,
                "worst_margin": self.worst_margin, "witness": self.witness,
                "constants": self.constants, "passed": self.passed()}


class _Margins:
    """Running minimum of named margins with their witnesses."""

    def __init__(self, lemma_id):
        self.lemma_id = lemma_id
        self.n = 0
        self.worst = np.inf
        self.witness = {}
        self.constants = {}

    def add(self, name, margin, inputs):
        margin = np.asarray(margin, dtype=float)
        self.n += margin.size
        if margin.size == 0:
            return
        i = int(np.argmin(margin))
        if margin.flat[i] < self.worst:
            self.worst = float(margin.flat[i])
            self.witness = {"check": name}
            for key, val in inputs.items():
                v = np.asarray(val)
                self.witness[key] = float(v.flat[i]) if v.size > 1 else float(v)

    def report(self):
        return OracleReport(self.lemma_id, self.n, self.worst, self.witness, self.constants)


def merge_reports(reports):
    """Min-reduction of reports sharing a lemma id."""
    out = {}
    for r in reports:
        cur = out.get(r.lemma_id)
        if cur is None:
            out[r.lemma_id] = OracleReport(r.lemma_id, r.n_trials, r.worst_margin,
                                           dict(r.witness), dict(r.constants))
            continue
        cur.n_trials += r.n_trials
        if r.worst_margin < cur.worst_margin:
            cur.worst_margin, cur.witness = r.worst_margin, dict(r.witness)
        for k, v in r.constants.items():
            cur.constants[k] = max(cur.constants.get(k, -np.inf), v)
    return list(out.values())


# ---------------------------------------------------------------- constants

def oscillation_bound(eps):
    """``4 sqrt(2(1 - eps))/eps + 2 pi/sqrt(1 - eps)``; equals 8 + 2 sqrt(2) pi at 1/2."""
    return 4.0 * np.sqrt(2.0 * (1.0 - eps)) / eps + 2.0 * np.pi / np.sqrt(1.0 - eps)


def integral_f_constant(eps):
    """The explicit ``C(eps)`` bounding ``|int f(t0, theta) dtheta|``."""
    a = 8.0 * np.pi * np.sqrt(2.0 * (1.0 - eps)) / eps + 4.0 * np.pi**2 / np.sqrt(1.0 - eps)
    b = np.pi * (5 * eps**3 - 10 * eps**2 - 4 * eps + 32) / (2 * eps**2 * (2 - eps))
    return max(a, b)


# ---------------------------------------------------------------- helpers

def precheck(pair, require_mean_zero=True):
    """Reject pairs that violate concavity, the gradient bound or mean zero."""
    inv = pair.check_invariants()
    bad = inv["concavity"] > 1e-10 or inv["gradient"] > 1e-9
    if require_mean_zero:
        bad = bad or inv["mean"] > 1e-8
    if bad:
        raise AdmissibilityError(f"pair is not admissible: {inv}")
    return inv


def pair_from_metric(m):
    """Admissible pair ``(u, ln phi - mean)`` of a radial metric on [0, 2]."""
    from .quadrature_geometry import integrate_radial

    if not m.phi.radial_only:
        raise AdmissibilityError("pair_from_metric needs a radial warp field")
    bp = m.radial_breakpoints()
    num = integrate_radial(lambda t: np.log(m.phi.eval(t, 0.0)) * m.u.eval(t), 0.0, m.a,
                           breakpoints=bp).value
    den = integrate_radial(m.u.eval, 0.0, m.a, breakpoints=bp).value
    return AdmissiblePair(m.u, LogWarpScalar(m.phi, shift=num / den), True,
                          {"metric": m.name or m.u.kind})


def _grid(a, n, extra=()):
    t = np.linspace(0.0, a, n)
    if extra:
        t = np.unique(np.concatenate([t, [e for e in extra if 0.0 <= e <= a]]))
    return t


def _cumulative(f, t, order=8):
    """``int_{t[0]}^{t[i]} f`` at every node, by Gauss-Legendre per interval."""
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = t[:-1], t[1:]
    h = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + h[:, None] * x[None, :]
    seg = (f(nodes) * w[None, :]).sum(axis=1) * h
    return np.concatenate([[0.0], np.cumsum(seg)])


def _f_radial(pair, t):
    return np.asarray(pair.f.eval(t), dtype=float)


# ---------------------------------------------------------------- oracles

def check_elementary(n_trials=100_000, seed=0, grid=1000):
    """The two elementary inequalities for ``x >= y^2 - y``, ``y`` in [-10, 10].

    Random samples plus a ``grid x grid`` scan of ``(y, x - y^2 + y)``.
    """
    rng = np.random.default_rng(seed)
    y = rng.uniform(-10.0, 10.0, n_trials)
    gap = np.concatenate([np.zeros(n_trials // 10),
                          np.exp(rng.uniform(-12.0, 5.0, n_trials - n_trials // 10))])
    yg, sg = np.meshgrid(np.linspace(-10.0, 10.0, grid),
                         np.concatenate([[0.0], np.geomspace(1e-8, 200.0, grid - 1)]))
    y = np.concatenate([y, yg.ravel(), [0.25]])
    # (y, gap) = (1/4, 1/4) is the equality case of the first inequality
    gap = np.concatenate([gap, sg.ravel(), [0.25]])
    x = y * y - y + gap
    root = np.sqrt(np.maximum(x + y - y * y, 0.0))
    M = _Margins("elementary")
    M.add("two_sqrt", 2.0 * x + 0.625 - (2.0 * root - y), {"x": x, "y": y})
    M.add("one_sqrt", x + 0.25 - (root - y), {"x": x, "y": y})
    return M.report()


def check_concave_props(pair, eps=0.5, n=2001, t0_list=(0.25, 0.5, 1.0, 1.5, 1.75)):
    """Bounds on a concave w with ``w(0) = w(2) = 0`` and slopes +-1 at the ends."""
    w = pair.w
    a = w.a
    t = _grid(a, n)
    W = np.asarray(w.eval(t), dtype=float)
    W1 = np.asarray(w.d1(t), dtype=float)
    mx = float(W.max())
    M = _Margins("concave_props")
    M.constants["max_w"] = mx
    M.add("nonneg", W, {"t": t})
    M.add("tent", np.minimum(t, a - t) - W, {"t": t})
    M.add("slope", 1.0 - np.abs(W1), {"t": t})
    for t0 in t0_list:
        w0 = float(w.eval(t0))
        left = t <= t0
        M.add("upper_envelope", np.where(left, (a - t) / (a - t0) * w0, t / t0 * w0) - W,
              {"t": t, "t0": t0})
        lower = np.where(left, t / t0 * w0, (a - t) / (a - t0) * w0)
        M.add("lower_envelope", W - lower, {"t": t, "t0": t0})
    mid = (t >= eps) & (t <= a - eps)
    M.add("slope_eps", mx / eps - np.abs(W1[mid]), {"t": t[mid]})
    M.add("floor_eps", W[mid] - 0.5 * eps * mx, {"t": t[mid]})
    lin = np.where(t <= 1.0, 0.5 * mx * t, 0.5 * mx * (a - t))
    M.add("linear_floor", W - lin, {"t": t})
    return M.report()


def check_oscillation(pair, eps=0.5, n_quads=1000, seed=0, n=2001):
    """``|f(t0, th1) - f(t1, th2)|`` against the oscillation bound on [eps, 2 - eps]."""
    rng = np.random.default_rng(seed)
    a = pair.w.a
    bound = oscillation_bound(eps)
    t0 = rng.uniform(eps, a - eps, n_quads)
    t1 = rng.uniform(eps, a - eps, n_quads)
    M = _Margins("oscillation")
    M.constants["bound"] = bound
    M.add("sampled", bound - np.abs(_f_radial(pair, t0) - _f_radial(pair, t1)),
          {"t0": t0, "t1": t1})
    t = np.linspace(eps, a - eps, n)
    F = _f_radial(pair, t)
    M.add("grid_oscillation", bound - (F.max() - F.min()), {"eps": eps})
    # constants-free Cauchy-Schwarz step along a meridian
    c_w2 = -np.asarray(pair.w.d1(t))
    c_inv = _cumulative(lambda s: 1.0 / pair.w.eval(s), t)
    i = rng.integers(0, n, n_quads)
    j = rng.integers(0, n, n_quads)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    rhs = np.sqrt(np.maximum(c_w2[hi] - c_w2[lo], 0.0) * (c_inv[hi] - c_inv[lo]))
    M.add("cauchy_schwarz", rhs - np.abs(F[hi] - F[lo]), {"t0": t[lo], "t1": t[hi]})
    return M.report()


def check_integral_f(pair, eps=0.5, n=401):
    """``|int_0^{2 pi} f(t0, theta) dtheta| <= C(eps)`` for mean-zero f."""
    a = pair.w.a
    t = np.linspace(eps, a - eps, n)
    C = integral_f_constant(eps)
    M = _Margins("integral_f")
    M.constants["C_eps"] = C
    M.add("circle_integral", C - np.abs(2.0 * np.pi * _f_radial(pair, t)), {"t0": t})
    return M.report()


def check_efw_pointwise(pair, n=2000):
    """``e^{2f(t)} w(t) <= e^4 e^{2f(1)} w(1) t^{-5/8}`` and the mirror on [1, 2)."""
    a = pair.w.a
    s = np.geomspace(1e-8, 1.0, n)
    f1 = float(_f_radial(pair, 1.0))
    w1 = float(pair.w.eval(1.0))
    ref = np.exp(4.0 + 2.0 * f1) * w1
    M = _Margins("efw_pointwise")
    for name, t, dist in (("left", s, s), ("right", a - s, s)):
        lhs = np.exp(2.0 * _f_radial(pair, t)) * pair.w.eval(t)
        M.add(name, ref * dist**-0.625 - lhs, {"t": t})
    return M.report()


def check_integral_bounds(pair):
    """The e^{2f} integral bound, the Jensen lower bound and their ratio."""
    from .quadrature_geometry import integrate_radial

    w = pair.w
    bp = w.breakpoints()
    i2 = 2.0 * np.pi * integrate_radial(lambda t: np.exp(2.0 * pair.f.eval(t)) * w.eval(t),
                                        0.0, w.a, breakpoints=bp).value
    i1 = 2.0 * np.pi * integrate_radial(lambda t: np.exp(pair.f.eval(t)) * w.eval(t),
                                        0.0, w.a, breakpoints=bp).value
    area = 2.0 * np.pi * integrate_radial(w.eval, 0.0, w.a, breakpoints=bp).value
    w1 = float(w.eval(1.0))
    M = _Margins("integral_bounds")
    M.constants.update({"int_e2f": i2, "int_ef": i1, "ratio": i2 / i1})
    M.add("e2f_upper", 400.0 * np.pi * np.exp(100.0) * w1 - i2, {"w1": w1})
    M.add("jensen", i1 - area, {"area": area})
    M.add("ef_lower", i1 - 2.0 * np.pi * w1, {"w1": w1})
    M.add("ratio", 200.0 * np.exp(100.0) - i2 / i1, {"ratio": i2 / i1})
    return M.report()


def _radial_nodes(m, lo, hi, n):
    pts = [b for b in m.radial_breakpoints() if lo < b < hi]
    if lo > 0 and hi / lo > 1e3:
        t = np.geomspace(lo, hi, n)
    else:
        t = np.linspace(lo, hi, n)
    return np.unique(np.concatenate([t, pts]))


def _theta_samples(m, rng, n):
    th = rng.uniform(-np.pi, np.pi, n)
    box = m.phi.support_box()
    if box is not None and not m.phi.radial_only:
        k = n // 2
        th[:k] = rng.uniform(box[2], box[3], k)
    return th


def _chain_margins(m, t, th, i, j):
    c_w2 = -np.asarray(m.u.d1(t))
    c_inv = _cumulative(lambda s: 1.0 / m.u.eval(s), t)
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    rhs = np.sqrt(np.maximum(c_w2[hi] - c_w2[lo], 0.0) * (c_inv[hi] - c_inv[lo]))
    lphi_lo = np.log(m.phi.eval(t[lo], th))
    lphi_hi = np.log(m.phi.eval(t[hi], th))
    return rhs - np.abs(lphi_hi - lphi_lo), lo, hi


def check_holder_chain(m, eps=0.25, n_samples=1000, seed=0, n=4001):
    """``|ln phi(r2) - ln phi(r1)| <= sqrt(int -u'' * int 1/u)`` on ``[eps, a - eps]``."""
    rng = np.random.default_rng(seed)
    t = _radial_nodes(m, eps, m.a - eps, n)
    th = _theta_samples(m, rng, n_samples)
    i = rng.integers(0, len(t), n_samples)
    j = rng.integers(0, len(t), n_samples)
    margin, lo, hi = _chain_margins(m, t, th, i, j)
    M = _Margins("holder_chain")
    M.add("cauchy_schwarz", margin, {"r1": t[lo], "r2": t[hi], "theta": th})
    return M.report()


def check_pole_bounds(m, k=2, n=2000, n_theta=16, seed=0):
    """Pole estimates on (0, 1]: the Cauchy-Schwarz step to r = 1, and
    boundedness of ``r^{1/k}/phi`` and ``r^{1/k} phi`` (maxima logged)."""
    rng = np.random.default_rng(seed)
    lo = max(10.0 * pole_guard(m), 1e-300)
    t = _radial_nodes(m, lo, 1.0, n)
    th = _theta_samples(m, rng, n_theta)
    M = _Margins("pole_bounds")
    top = len(t) - 1
    mx_over, mx_under = 0.0, 0.0
    for theta in th:
        i = np.arange(len(t))
        margin, lo_i, _ = _chain_margins(m, t, np.full(len(t), theta), i, np.full(len(t), top))
        M.add("cauchy_schwarz", margin, {"r1": t[lo_i], "theta": theta})
        phi = np.asarray(m.phi.eval(t, np.full_like(t, theta)))
        rk = t**(1.0 / k)
        mx_over = max(mx_over, float(np.max(rk / phi)))
        mx_under = max(mx_under, float(np.max(rk * phi)))
    M.constants.update({"max_r1k_over_phi": mx_over, "max_r1k_times_phi": mx_under, "k": k})
    finite = np.isfinite(mx_over) and np.isfinite(mx_under)
    M.add("bounded", np.array([0.0 if finite else -np.inf]), {"k": k})
    return M.report()


# ---------------------------------------------------------------- suite

def _pair_checks(pair, seed):
    out = []
    for eps in (0.25, 0.5):
        out.append(check_concave_props(pair, eps))
        out.append(check_oscillation(pair, eps, seed=seed))
        out.append(check_integral_f(pair, eps))
    out.append(check_efw_pointwise(pair))
    out.append(check_integral_bounds(pair))
    return out


def run_suite(seed=0, n_pairs=200, metrics=None, include_families=True):
    """All oracles on ``n_pairs`` sampled pairs plus the drawstring and C^{1,alpha} families.

    Returns ``(reports, ok)`` with reports merged per lemma.
    """
    from .examples import C1AlphaParams, DrawstringParams, build_c1alpha, build_drawstring

    rng = np.random.default_rng(seed)
    reports = [check_elementary(seed=seed)]
    for i in range(n_pairs):
        rough = float(rng.uniform(0.0, 1.0))
        pair = sample_admissible_pair(int(seed) * 100_003 + i, rough)
        precheck(pair)
        reports += _pair_checks(pair, seed + i)
    fams = list(metrics or [])
    if include_families:
        fams += [build_drawstring(DrawstringParams(A=3.0)),
                 build_c1alpha(C1AlphaParams(alpha=0.5, k=2.0))]
    for m in fams:
        reports.append(check_holder_chain(m, seed=seed))
        reports.append(check_pole_bounds(m, k=2, seed=seed))
        if m.phi.radial_only and abs(m.a - 2.0) < 1e-12:
            pair = pair_from_metric(m)
            precheck(pair)
            reports += _pair_checks(pair, seed)
    merged = merge_reports(reports)
    return merged, all(r.passed() for r in merged)
