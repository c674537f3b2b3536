"""Boundary sampling and pointwise diagnostics.

Everything downstream (noncollapsing constants, Gaussian densities, residual
checks, singularity analysis) consumes one container: BoundaryPointData, a
struct-of-arrays sample set carrying positions, outward normals, principal
curvatures sorted ascending, H, |A|^2, and quadrature weights for one time
slice. Samples flagged unresolved (degenerate gradients, cap-adjacent
profile nodes, far-field grid ring) are kept but excluded from suprema.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional, Tuple

import numpy as np
from scipy.special import gamma as _gamma

from .exact import ExactFlow
from .geometry import (GRAD_FLOOR, AxisymProfile, FlowHistory, LevelSetField,
                       ParametricCurve, SpaceTimePoint, extract_curves,
                       extract_surface)


#: relative tolerance for the two-stencil curvature agreement test that
#: gates profile samples into suprema
CURVATURE_AGREEMENT = 0.01


def unit_sphere_area(k: int) -> float:
    """Surface area of the unit k-sphere S^k in R^{k+1}."""
    return float(2.0 * np.pi ** ((k + 1) / 2.0) / _gamma((k + 1) / 2.0))


def unit_ball_volume(k: int) -> float:
    """Volume of the unit k-ball."""
    return float(np.pi ** (k / 2.0) / _gamma(k / 2.0 + 1.0))


@dataclass
class BoundaryPointData:
    """Sample set on one boundary time slice (struct of arrays).

    pos (n, N), nu (n, N) unit outward normals, lam (n, N-1) principal
    curvatures ascending, weight (n,) quadrature weights summing to the
    sampled area. H and absA2 are derived from lam. box, when present, is
    the computational domain (lo, hi) the samples were clipped to.
    """

    t: float
    pos: np.ndarray
    nu: np.ndarray
    lam: np.ndarray
    weight: np.ndarray
    resolved: np.ndarray = None
    box: Optional[tuple] = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.pos = np.atleast_2d(np.asarray(self.pos, dtype=float))
        self.nu = np.atleast_2d(np.asarray(self.nu, dtype=float))
        self.lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        self.weight = np.asarray(self.weight, dtype=float)
        n, N = self.pos.shape
        if self.nu.shape != (n, N) or self.lam.shape != (n, N - 1):
            raise ValueError("inconsistent sample array shapes")
        norms = np.linalg.norm(self.nu, axis=1)
        if np.any(np.abs(norms - 1.0) > 1.0e-10):
            raise ValueError("normals must be unit vectors within 1e-10")
        self.lam = np.sort(self.lam, axis=1)
        if self.resolved is None:
            self.resolved = np.ones(n, dtype=bool)
        self.resolved = np.asarray(self.resolved, dtype=bool)

    @property
    def n(self) -> int:
        return self.pos.shape[0]

    def __len__(self) -> int:
        return self.n

    @property
    def dim(self) -> int:
        return self.pos.shape[1]

    @property
    def H(self) -> np.ndarray:
        return self.lam.sum(axis=1)

    @property
    def absA2(self) -> np.ndarray:
        return (self.lam * self.lam).sum(axis=1)

    def select(self, mask) -> "BoundaryPointData":
        return BoundaryPointData(self.t, self.pos[mask], self.nu[mask],
                                 self.lam[mask], self.weight[mask],
                                 self.resolved[mask], self.box, dict(self.meta))


# ---------------------------------------------------------------------------
# sampling


def boundary_sample(obj, t: Optional[float] = None, n: int = 2000,
                    window=None,
                    revolve: Optional[int] = None) -> BoundaryPointData:
    """Sample a boundary with positions, normals, curvatures, and weights.

    Accepts exact flows, histories, level-set fields, curves, and profiles.
    `n` controls analytic sampling density. `window` selects the sampled
    extent: a scalar half-width for unbounded exact boundaries and
    profiles (bounded curve and grid samples ignore it), or an axial
    interval (xlo, xhi) restricting profile samples (weights then cover
    only that band). `revolve`, for profiles, requests full 3-D samples at
    that many azimuths instead of one meridian sample per node (meridian
    weights cover the whole ring either way).
    """
    if isinstance(obj, BoundaryPointData):
        return obj
    if isinstance(obj, FlowHistory):
        if t is None:
            raise ValueError("a time is required to sample a history")
        if obj.exact is not None:
            return boundary_sample(obj.exact, t, n=n, window=window,
                                   revolve=revolve)
        k = obj.index_at(t)
        return boundary_sample(obj.snapshots[k], float(obj.times[k]), n=n,
                               window=window, revolve=revolve)
    if isinstance(obj, ExactFlow):
        if t is None:
            raise ValueError("a time is required to sample an exact flow")
        kw = {} if window is None else {"window": window}
        raw = obj.slice_arrays(t, n=n, **kw)
        return BoundaryPointData(t, raw["pos"], raw["nu"], raw["lam"],
                                 raw["weight"],
                                 meta={"source": f"exact:{obj.kind}"})
    t = 0.0 if t is None else float(t)
    if isinstance(obj, AxisymProfile):
        return _sample_axisym(obj, t, revolve, window)
    if window is not None and np.ndim(window) != 0:
        raise ValueError("interval windows apply to profiles only")
    if isinstance(obj, ParametricCurve):
        return _sample_curve(obj, t)
    if isinstance(obj, LevelSetField):
        if obj.dim == 2:
            return _sample_level_set_2d(obj, t)
        return _sample_level_set_3d(obj, t)
    raise TypeError(f"cannot sample {type(obj).__name__}")


def _sample_curve(curve: ParametricCurve, t: float) -> BoundaryPointData:
    pts = curve.points
    nxt = np.roll(pts, -1, axis=0) - pts
    prv = pts - np.roll(pts, 1, axis=0)
    ln = np.hypot(nxt[:, 0], nxt[:, 1])
    lp = np.hypot(prv[:, 0], prv[:, 1])
    tang = nxt / ln[:, None] + prv / lp[:, None]
    tang /= np.linalg.norm(tang, axis=1)[:, None]
    # outward normal: rotate the tangent so normals point away from the
    # enclosed region (positively oriented curves get (ty, -tx))
    nu = np.stack([tang[:, 1], -tang[:, 0]], axis=-1)
    x, y = pts[:, 0], pts[:, 1]
    signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if signed_area < 0:
        nu = -nu
    from .engines import curvature_vectors

    kvec = curvature_vectors(pts)
    lam = -(kvec * nu).sum(axis=1)[:, None]
    weight = 0.5 * (ln + lp)
    return BoundaryPointData(t, pts.copy(), nu, lam, weight,
                             meta={"source": "curve"})


def _sample_axisym(profile: AxisymProfile, t: float,
                   revolve: Optional[int],
                   window: Optional[Tuple[float, float]] = None,
                   ) -> BoundaryPointData:
    from .engines import axisym_curvatures

    x, r, N = profile.x, profile.r, profile.dim
    dx = profile.dx
    la, lr, _ = axisym_curvatures(x, r, N)
    rx = (r[2:] - r[:-2]) / (2.0 * dx)
    s = np.sqrt(1.0 + rx * rx)
    xi = x[1:-1]
    ri = r[1:-1]
    ring = unit_sphere_area(N - 2) * ri ** (N - 2) * s * dx
    lam = np.concatenate([la[:, None], np.repeat(lr[:, None], N - 2, axis=1)],
                         axis=1)
    resolved = np.abs(rx) <= 10.0
    if x.size >= 5:
        # curvature from a doubled stencil; disagreement marks nodes where
        # the profile bends below grid scale (steep cap shoulders, kinks)
        rx2 = (r[4:] - r[:-4]) / (4.0 * dx)
        rxx2 = (r[4:] - 2.0 * r[2:-2] + r[:-4]) / (4.0 * dx * dx)
        la2 = -rxx2 / np.sqrt(1.0 + rx2 * rx2) ** 3
        scale = np.abs(la[1:-1]) + (N - 2) * np.abs(lr[1:-1]) + 1e-12
        agree = np.abs(la[1:-1] - la2) <= CURVATURE_AGREEMENT * scale
        resolved[1:-1] &= agree
    if profile.ends == "capped":
        resolved[:2] = False
        resolved[-2:] = False
    if window is not None:
        if np.ndim(window) == 0:
            wlo, whi = -float(window), float(window)
        else:
            wlo, whi = float(window[0]), float(window[1])
        keep = (xi >= wlo) & (xi <= whi)
        xi, ri, rx, s = xi[keep], ri[keep], rx[keep], s[keep]
        lam, ring, resolved = lam[keep], ring[keep], resolved[keep]
    if revolve is None:
        pos = np.zeros((xi.size, N))
        pos[:, 0] = xi
        pos[:, 1] = ri
        nu = np.zeros((xi.size, N))
        nu[:, 0] = -rx / s
        nu[:, 1] = 1.0 / s
        return BoundaryPointData(t, pos, nu, lam, ring, resolved,
                                 meta={"source": "axisym"})
    if N != 3:
        raise ValueError("revolved sampling implemented for N = 3")
    m = int(revolve)
    th = 2.0 * np.pi * np.arange(m) / m
    ct, st = np.cos(th), np.sin(th)
    pos = np.empty((xi.size, m, 3))
    pos[:, :, 0] = xi[:, None]
    pos[:, :, 1] = ri[:, None] * ct[None, :]
    pos[:, :, 2] = ri[:, None] * st[None, :]
    nu = np.empty_like(pos)
    nu[:, :, 0] = (-rx / s)[:, None]
    nu[:, :, 1] = (1.0 / s)[:, None] * ct[None, :]
    nu[:, :, 2] = (1.0 / s)[:, None] * st[None, :]
    lam3 = np.repeat(lam[:, None, :], m, axis=1)
    w3 = np.repeat((ring / m)[:, None], m, axis=1)
    res3 = np.repeat(resolved[:, None], m, axis=1)
    return BoundaryPointData(t, pos.reshape(-1, 3), nu.reshape(-1, 3),
                             lam3.reshape(-1, 2), w3.ravel(), res3.ravel(),
                             meta={"source": "axisym"})


def _hessian_arrays(phi: np.ndarray, h: float):
    """Nested list of second-derivative arrays H[a][b] on the full grid."""
    grads = np.gradient(phi, h, edge_order=1)
    d = phi.ndim
    out = [[None] * d for _ in range(d)]
    for a in range(d):
        ga = np.gradient(grads[a], h, edge_order=1)
        for b in range(d):
            out[a][b] = ga[b]
    # symmetrize mixed entries
    for a in range(d):
        for b in range(a + 1, d):
            m = 0.5 * (out[a][b] + out[b][a])
            out[a][b] = m
            out[b][a] = m
    return out


def _sample_level_set_2d(field: LevelSetField, t: float) -> BoundaryPointData:
    curves = extract_curves(field)
    if not curves:
        raise ValueError("field has no zero contour")
    h = field.spacing
    gx, gy = field.gradient()
    hess = _hessian_arrays(field.values, h)
    pos_list, nu_list, lam_list, w_list, res_list = [], [], [], [], []
    lo, hi = field.box()
    clipped = False
    for cur in curves:
        pts = cur.points
        seg = np.roll(pts, -1, axis=0) - pts
        ln = np.hypot(seg[:, 0], seg[:, 1])
        lp = np.roll(ln, 1)
        w = 0.5 * (ln + lp)
        px = field.interp(pts, gx)
        py = field.interp(pts, gy)
        gn = np.hypot(px, py)
        ok = gn > 10.0 * GRAD_FLOOR
        gs = np.maximum(gn, GRAD_FLOOR)
        nu = np.stack([px / gs, py / gs], axis=-1)
        pxx = field.interp(pts, hess[0][0])
        pxy = field.interp(pts, hess[0][1])
        pyy = field.interp(pts, hess[1][1])
        kap = (pxx * py * py - 2.0 * pxy * px * py + pyy * px * px) / gs ** 3
        edge = np.minimum((pts - lo).min(axis=1), (hi - pts).min(axis=1))
        near_edge = edge < 2.0 * h
        clipped |= bool(near_edge.any())
        res = ok & ~near_edge & (np.abs(kap) <= 0.5 / h)
        pos_list.append(pts)
        nu_list.append(nu)
        lam_list.append(kap[:, None])
        w_list.append(w)
        res_list.append(res)
    box = (lo, hi) if clipped else None
    return BoundaryPointData(t, np.vstack(pos_list), np.vstack(nu_list),
                             np.vstack(lam_list), np.concatenate(w_list),
                             np.concatenate(res_list), box,
                             meta={"source": "level_set"})


def _level_set_principals(phi: np.ndarray, h: float, idx):
    """Principal curvature pairs at given 3-D node indices."""
    grads = np.gradient(phi, h, edge_order=1)
    hess = _hessian_arrays(phi, h)
    g = np.stack([gr[idx] for gr in grads], axis=-1)
    Hm = np.empty(g.shape[:-1] + (3, 3))
    for a in range(3):
        for b in range(3):
            Hm[..., a, b] = hess[a][b][idx]
    return _principals_from_grad_hess(g, Hm)


def _principals_from_grad_hess(g, Hm):
    """lam1 <= lam2 from gradient vectors and Hessians of a 3-D field."""
    gn = np.linalg.norm(g, axis=-1)
    gs = np.maximum(gn, GRAD_FLOOR)
    nrm = g / gs[..., None]
    # tangent frame: cross the normal with its least-aligned axis
    a = np.zeros_like(nrm)
    least = np.argmin(np.abs(nrm), axis=-1)
    a[np.arange(nrm.shape[0]), least] = 1.0
    t1 = np.cross(nrm, a)
    t1 /= np.maximum(np.linalg.norm(t1, axis=-1), 1e-300)[..., None]
    t2 = np.cross(nrm, t1)
    Ht1 = np.einsum("...ab,...b->...a", Hm, t1)
    Ht2 = np.einsum("...ab,...b->...a", Hm, t2)
    m11 = np.einsum("...a,...a->...", t1, Ht1) / gs
    m12 = np.einsum("...a,...a->...", t1, Ht2) / gs
    m22 = np.einsum("...a,...a->...", t2, Ht2) / gs
    mean = 0.5 * (m11 + m22)
    disc = np.sqrt(np.maximum(0.25 * (m11 - m22) ** 2 + m12 * m12, 0.0))
    return np.stack([mean - disc, mean + disc], axis=-1)


def _sample_level_set_3d(field: LevelSetField, t: float) -> BoundaryPointData:
    verts, faces = extract_surface(field)
    h = field.spacing
    tri = verts[faces]
    cr = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    tri_area = 0.5 * np.linalg.norm(cr, axis=1)
    w = np.zeros(verts.shape[0])
    np.add.at(w, faces.ravel(), np.repeat(tri_area / 3.0, 3))
    grads = np.gradient(field.values, h, edge_order=1)
    hess = _hessian_arrays(field.values, h)
    g = np.stack([field.interp(verts, gr) for gr in grads], axis=-1)
    Hm = np.empty((verts.shape[0], 3, 3))
    for a in range(3):
        for b in range(3):
            Hm[:, a, b] = field.interp(verts, hess[a][b])
    gn = np.linalg.norm(g, axis=-1)
    gs = np.maximum(gn, GRAD_FLOOR)
    nu = g / gs[:, None]
    lam = _principals_from_grad_hess(g, Hm)
    lo, hi = field.box()
    edge = np.minimum((verts - lo).min(axis=1), (hi - verts).min(axis=1))
    near_edge = edge < 2.0 * h
    res = (gn > 10.0 * GRAD_FLOOR) & ~near_edge & \
        (np.abs(lam).max(axis=1) <= 0.5 / h)
    box = (lo, hi) if bool(near_edge.any()) else None
    return BoundaryPointData(t, verts, nu, lam, w, res, box,
                             meta={"source": "level_set"})


def history_samples(history: FlowHistory, times=None, **kw):
    """One BoundaryPointData per snapshot time (or the requested times)."""
    if times is None:
        times = history.times
    return [boundary_sample(history, float(tt), **kw) for tt in times]


# ---------------------------------------------------------------------------
# noncollapsing (interior/exterior ball) quantities


def andrews_Z(x, nu_x, y) -> float:
    """Z(x, y) = 2 <x - y, nu_x> / |x - y|^2 for distinct boundary points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = x - y
    d2 = float((d * d).sum())
    if d2 < 1e-24:
        raise ValueError("Z(x, y) needs distinct points (|x - y| >= 1e-12)")
    return float(2.0 * (d * np.asarray(nu_x, dtype=float)).sum() / d2)


@dataclass
class AndrewsReport:
    """Noncollapsing constants of one sample set.

    alpha_int: largest alpha with an interior tangent ball of radius
    alpha/H certified at every sample (inf over samples of H/Z*);
    alpha_ext likewise for exterior balls. Infinite when no pair
    constrains the quantity.
    """

    t: float
    alpha_int: float
    alpha_ext: float
    argmin_int: Optional[np.ndarray]
    argmin_ext: Optional[np.ndarray]
    method: str
    n_samples: int
    n_excluded: int = 0
    degenerate: bool = False
    notes: str = ""
    z_sup: Optional[np.ndarray] = None
    z_inf: Optional[np.ndarray] = None
    argmin_int_index: Optional[int] = None
    argmin_ext_index: Optional[int] = None


MAX_EXHAUSTIVE_PAIRS = 5000


def andrews_constants(samples: BoundaryPointData, seed: int = 0,
                      max_exhaustive: int = MAX_EXHAUSTIVE_PAIRS) -> AndrewsReport:
    """Interior/exterior noncollapsing constants by pairwise search.

    Exhaustive over all ordered pairs up to max_exhaustive samples;
    uniformly subsampled (seeded, recorded in method) above. Samples whose
    certifying ball reaches past a clipped sampling domain are excluded
    from the infima; if that empties the candidate set the exclusion is
    dropped and noted.
    """
    sub = samples.select(samples.resolved) if not samples.resolved.all() \
        else samples
    method = "exhaustive"
    if sub.n > max_exhaustive:
        rng = np.random.Generator(np.random.PCG64(seed))
        keep = np.sort(rng.choice(sub.n, size=max_exhaustive, replace=False))
        sub = sub.select(keep)
        method = f"subsampled({max_exhaustive},seed={seed})"
    n = sub.n
    if n < 2:
        raise ValueError("need at least two resolved samples")
    pos = sub.pos
    nu = sub.nu
    zsup = np.full(n, -np.inf)
    zinf = np.full(n, np.inf)
    block = max(1, int(2.0e6 // n))
    for s in range(0, n, block):
        d = pos[s:s + block, None, :] - pos[None, :, :]
        d2 = (d * d).sum(axis=-1)
        num = 2.0 * (d * nu[s:s + block, None, :]).sum(axis=-1)
        np.fill_diagonal(d2[:, s:s + block], np.inf)
        small = d2 < 1e-24
        d2[small] = np.inf
        z = num / d2
        zsup[s:s + block] = z.max(axis=1)
        zinf[s:s + block] = z.min(axis=1)
    H = sub.H
    excl = np.zeros(n, dtype=bool)
    if sub.box is not None:
        lo, hi = sub.box
        edge = np.minimum((pos - lo).min(axis=1), (hi - pos).min(axis=1))
        with np.errstate(divide="ignore"):
            excl = np.where(zsup > 0, edge < 1.0 / np.maximum(zsup, 1e-300),
                            False)
    notes = ""
    degenerate = False

    def _alpha(zvals, sign):
        nonlocal notes, degenerate
        act = (sign * zvals > 0)
        flat = (np.abs(H) <= 1e-12) & act & ~excl
        if sign > 0 and flat.any():
            degenerate = True
            i = int(np.argmax(flat))
            return 0.0, pos[i], i
        cand = act & (H > 1e-12) & ~excl
        if not cand.any() and (act & (H > 1e-12)).any():
            cand = act & (H > 1e-12)
            notes = "exclusion_saturated"
        if not cand.any():
            return np.inf, None, None
        vals = H[cand] / (sign * zvals[cand])
        i = int(np.argmin(vals))
        k = int(np.nonzero(cand)[0][i])
        return float(vals[i]), pos[k], k

    a_int, arg_int, i_int = _alpha(zsup, +1.0)
    a_ext, arg_ext, i_ext = _alpha(zinf, -1.0)
    return AndrewsReport(sub.t, a_int, a_ext, arg_int, arg_ext, method, n,
                         int(excl.sum()), degenerate, notes, zsup, zinf,
                         i_int, i_ext)


def k_convexity_report(samples: BoundaryPointData, k: int):
    """min over resolved samples of (lam_1 + ... + lam_k)/H, with H > 0."""
    sub = samples.select(samples.resolved & (samples.H > 1e-12))
    if sub.n == 0:
        return np.inf
    ratios = sub.lam[:, :k].sum(axis=1) / sub.H
    return float(ratios.min())


# ---------------------------------------------------------------------------
# evolution residual


@dataclass
class ResidualReport:
    t: float
    pos: np.ndarray
    residual: np.ndarray
    max_residual: float
    times_used: tuple


def evolution_residual(history: FlowHistory, t: float,
                       window: Optional[Tuple[float, float]] = None,
                       ) -> ResidualReport:
    """|dH/dt - Laplace_Sigma H - |A|^2 H| / (|H|^3 + 1) at tracked samples.

    Uses the three consecutive snapshots around t. Only representations
    with a node/vertex correspondence qualify (curves without
    redistribution between the snapshots, axisymmetric profiles on one
    grid); level-set histories are rejected. For profiles, window
    restricts the reported samples to an axial interval, which keeps the
    steep near-cap nodes out of a convergence measurement.
    """
    if history.kind == "curve":
        if window is not None:
            raise ValueError("window applies to axisymmetric profiles")
        return _residual_curve(history, t)
    if history.kind == "axisym":
        return _residual_axisym(history, t, window)
    raise ValueError("evolution residual needs a tracked representation "
                     "(curve or axisym)")


def _three_around(history, t):
    k = history.index_at(t)
    k = min(max(k, 1), len(history) - 2)
    return k - 1, k, k + 1


def _dt_weights(tm, t0, tp):
    """Weights of the nonuniform centered first-derivative stencil."""
    dm = t0 - tm
    dp = tp - t0
    wm = -dp / (dm * (dm + dp))
    w0 = (dp - dm) / (dm * dp)
    wp = dm / (dp * (dm + dp))
    return wm, w0, wp


def _curve_H(curve: ParametricCurve):
    data = _sample_curve(curve, 0.0)
    return data.lam[:, 0], data


def _residual_curve(history, t):
    km, k0, kp = _three_around(history, t)
    snaps = [history.snapshots[i] for i in (km, k0, kp)]
    ns = {s.n for s in snaps}
    if len(ns) != 1:
        raise ValueError("vertex correspondence broken between snapshots "
                         "(redistribution happened); rerun without it")
    Hm, _ = _curve_H(snaps[0])
    H0, data = _curve_H(snaps[1])
    Hp, _ = _curve_H(snaps[2])
    tm, t0, tp = (float(history.times[i]) for i in (km, k0, kp))
    wm, w0, wp = _dt_weights(tm, t0, tp)
    dHdt = wm * Hm + w0 * H0 + wp * Hp
    pts = snaps[1].points
    seg = np.roll(pts, -1, axis=0) - pts
    sp = np.hypot(seg[:, 0], seg[:, 1])
    sm = np.roll(sp, 1)
    Hnext = np.roll(H0, -1)
    Hprev = np.roll(H0, 1)
    lapH = 2.0 * ((Hnext - H0) / sp - (H0 - Hprev) / sm) / (sp + sm)
    res = np.abs(dHdt - lapH - H0 ** 3) / (np.abs(H0) ** 3 + 1.0)
    return ResidualReport(t0, pts, res, float(res.max()), (tm, t0, tp))


def _residual_axisym(history, t, window=None):
    km, k0, kp = _three_around(history, t)
    snaps = [history.snapshots[i] for i in (km, k0, kp)]
    dx = snaps[1].dx
    if not all(abs(s.dx - dx) < 1e-12 * dx for s in snaps):
        raise ValueError("node correspondence broken between snapshots "
                         "(grids differ); pick other times")
    # caps may have retreated between snapshots: restrict all three to the
    # common x window, where nodes coincide on the shared uniform grid
    xlo = max(s.x[0] for s in snaps)
    xhi = min(s.x[-1] for s in snaps)
    if xhi - xlo < 8 * dx:
        raise ValueError("snapshots share too little of the profile")
    from .engines import axisym_curvatures

    N = snaps[1].dim
    Hs = []
    cut = []
    for s in snaps:
        i0 = int(round((xlo - s.x[0]) / dx))
        i1 = int(round((xhi - s.x[0]) / dx))
        cut.append((s.x[i0:i1 + 1], s.r[i0:i1 + 1]))
    if not all(np.allclose(c[0], cut[1][0], atol=1e-10) for c in cut):
        raise ValueError("node correspondence broken between snapshots")
    for xx, rr in cut:
        _, _, H = axisym_curvatures(xx, rr, N)
        Hs.append(H)
    tm, t0, tp = (float(history.times[i]) for i in (km, k0, kp))
    wm, w0, wp = _dt_weights(tm, t0, tp)
    dHdt_node = wm * Hs[0] + w0 * Hs[1] + wp * Hs[2]
    x, r = cut[1]
    H = Hs[1]
    ri = r[1:-1]
    rx = (r[2:] - r[:-2]) / (2.0 * dx)
    s = np.sqrt(1.0 + rx * rx)
    rxx = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    # graph nodes are not material points: subtract the tangential drift
    rt = rxx / (1.0 + rx * rx) - (N - 2.0) / ri
    Hx = np.gradient(H, dx, edge_order=1)
    drift = rt * rx * Hx / (s * s)
    dHdt = dHdt_node - drift
    # Laplace-Beltrami of H on the surface of revolution, flux form:
    # (1/(r^{N-2} s)) d/dx (r^{N-2}/s dH/dx) with s = sqrt(1 + r_x^2)
    coef = ri ** (N - 2) / s
    flux = 0.5 * (coef[1:] + coef[:-1]) * (H[1:] - H[:-1]) / dx
    lapH = np.full_like(H, np.nan)
    lapH[1:-1] = (flux[1:] - flux[:-1]) / (dx * (ri ** (N - 2) * s)[1:-1])
    lam_ax = -rxx / s ** 3
    lam_rot = 1.0 / (ri * s)
    absA2 = lam_ax ** 2 + (N - 2.0) * lam_rot ** 2
    res_full = np.abs(dHdt - lapH - absA2 * H) / (np.abs(H) ** 3 + 1.0)
    ok = np.isfinite(res_full)
    ok[:2] = False
    ok[-2:] = False
    ok &= np.abs(rx) <= 10.0
    if window is not None:
        ok &= (x[1:-1] >= window[0]) & (x[1:-1] <= window[1])
    pos = np.stack([x[1:-1], r[1:-1]], axis=-1)
    res = res_full[ok]
    return ResidualReport(t0, pos[ok], res,
                          float(res.max()) if res.size else np.nan,
                          (tm, t0, tp))


# ---------------------------------------------------------------------------
# interior membership, density ratio, speed limit


def region_contains(obj, point, t: Optional[float] = None) -> bool:
    """True when `point` lies inside the solid region bounded by `obj`."""
    point = np.asarray(point, dtype=float)
    tt = 0.0 if t is None else float(t)
    if isinstance(obj, FlowHistory):
        if obj.exact is not None:
            return bool(obj.exact.signed_distance_at(point[None, :],
                                                     tt)[0] < 0)
        return region_contains(obj.snapshot_at(tt), point)
    if isinstance(obj, ExactFlow):
        return bool(obj.signed_distance_at(point[None, :], tt)[0] < 0)
    if isinstance(obj, LevelSetField):
        return bool(obj.interp(point[None, :])[0] < 0)
    if isinstance(obj, ParametricCurve):
        pts = obj.points
        a = pts
        b = np.roll(pts, -1, axis=0)
        cross_y = ((a[:, 1] <= point[1]) & (b[:, 1] > point[1])) | \
                  ((b[:, 1] <= point[1]) & (a[:, 1] > point[1]))
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = a[:, 0] + (point[1] - a[:, 1]) * (b[:, 0] - a[:, 0]) \
                / np.where(b[:, 1] == a[:, 1], np.inf, b[:, 1] - a[:, 1])
        return bool((cross_y & (xi > point[0])).sum() % 2 == 1)
    if isinstance(obj, AxisymProfile):
        if point[0] < obj.x[0] or point[0] > obj.x[-1]:
            return False
        rad = float(np.linalg.norm(point[1:]))
        return rad < float(np.interp(point[0], obj.x, obj.r))
    raise TypeError(f"cannot test membership for {type(obj).__name__}")


def density_ratio(obj, center, radius: float, t: Optional[float] = None,
                  n: int = 4096) -> float:
    """|boundary intersect B(center, radius)| / (omega_{N-1} radius^{N-1}).

    Curves are clipped exactly segment by segment; other representations
    are sampled and the weighted indicator summed.
    """
    center = np.asarray(center, dtype=float)
    if isinstance(obj, FlowHistory) and obj.exact is None:
        return density_ratio(obj.snapshot_at(t), center, radius, t, n)
    if isinstance(obj, ParametricCurve):
        area = _curve_length_in_ball(obj.points, center, radius)
        return float(area / (unit_ball_volume(1) * radius))
    window = 2.0 * radius + 2.0 * float(np.linalg.norm(center)) + 1.0
    samples = boundary_sample(obj, t, n=n, window=window)
    d = np.linalg.norm(samples.pos - center, axis=1)
    area = float(samples.weight[d <= radius].sum())
    N = samples.dim
    return area / (unit_ball_volume(N - 1) * radius ** (N - 1))


def _curve_length_in_ball(pts, center, radius):
    a = pts - center
    b = np.roll(pts, -1, axis=0) - center
    e = b - a
    ee = (e * e).sum(axis=1)
    ea = (e * a).sum(axis=1)
    aa = (a * a).sum(axis=1) - radius * radius
    disc = ea * ea - ee * aa
    good = (disc > 0) & (ee > 1e-300)
    sq = np.sqrt(np.maximum(disc, 0.0))
    t1 = np.clip((-ea - sq) / np.maximum(ee, 1e-300), 0.0, 1.0)
    t2 = np.clip((-ea + sq) / np.maximum(ee, 1e-300), 0.0, 1.0)
    ln = np.sqrt(ee)
    return float((np.where(good, t2 - t1, 0.0) * ln).sum())


@dataclass
class SpeedLimitReport:
    ok: bool
    bound: float
    witness_H: float
    witness_pos: np.ndarray
    witness_t: float


def speed_limit_check(history: FlowHistory, p1, r: float, t0: float,
                      t1: float, safety: float = 1.1,
                      n: int = 2000) -> SpeedLimitReport:
    """Find a boundary point (p, t), t in [t0, t1], with H <= 1.1 r/(t1-t0).

    Preconditions: the boundary at t0 meets B(p1, r), and p1 still belongs
    to the region at t1 (so the flow spent the whole interval crossing the
    ball).
    """
    p1 = np.asarray(p1, dtype=float)
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    first = boundary_sample(history, t0, n=n,
                            window=4.0 * (np.linalg.norm(p1) + r))
    r_in = r * (1.0 + 1e-9)  # admit boundaries tangent to the ball
    d0 = np.linalg.norm(first.pos - p1, axis=1)
    if not (d0 <= r_in).any():
        raise ValueError("boundary at t0 does not meet the ball")
    if not region_contains(history, p1, t1):
        raise ValueError("p1 must still be inside the region at t1")
    bound = safety * r / (t1 - t0)
    best = (np.inf, None, None)
    times = history.times[(history.times >= t0 - 1e-12)
                          & (history.times <= t1 + 1e-12)]
    if history.exact is not None and times.size < 5:
        times = np.linspace(t0, t1, 9)
    for tt in times:
        smp = boundary_sample(history, float(tt), n=n,
                              window=4.0 * (np.linalg.norm(p1) + r))
        d = np.linalg.norm(smp.pos - p1, axis=1)
        m = smp.resolved & (d <= r_in)
        if not m.any():
            continue
        Hs = smp.H[m]
        i = int(np.argmin(Hs))
        if Hs[i] < best[0]:
            best = (float(Hs[i]), smp.pos[m][i], float(tt))
    if best[1] is None:
        raise ValueError("no resolved samples inside the ball over [t0, t1]")
    return SpeedLimitReport(best[0] <= bound, bound, best[0], best[1], best[2])


# ---------------------------------------------------------------------------
# per-snapshot curvature statistics


def curvature_stats(history: FlowHistory, times=None, **kw):
    """Rows of (t, min_H, max_H, min lam1/H, max |A|) over resolved samples."""
    rows = []
    for smp in history_samples(history, times, **kw):
        sub = smp.select(smp.resolved)
        if sub.n == 0:
            continue
        H = sub.H
        pos_H = H > 1e-12
        ratio = np.min(sub.lam[pos_H, 0] / H[pos_H]) if pos_H.any() else np.nan
        rows.append((sub.t, float(H.min()), float(H.max()), float(ratio),
                     float(np.sqrt(sub.absA2).max())))
    return rows
