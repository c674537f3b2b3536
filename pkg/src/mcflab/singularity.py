"""Blowup analysis: point selection, tangent-flow classification, and
empirical estimate profilers.

All quantities here are computed from boundary samples of a history.
Classification works on normalized curvature spectra lambda_i / H, which
are invariant under parabolic rescaling, so slices are taken at the
original scale at time t0 - 1/lambda^2 inside a ball of radius
zoom/lambda about the center.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .diagnostics import BoundaryPointData, boundary_sample, history_samples
from .geometry import FlowHistory, ParabolicBall, SpaceTimePoint

#: rescale factors tried by default, largest (closest zoom) first
DEFAULT_LAMBDAS = (32.0, 24.0, 16.0, 12.0, 8.0, 6.0, 4.0, 3.0, 2.0)


@dataclass
class TangentFlowClass:
    """Classification of the blowup at a spacetime point.

    kind is one of Plane, Sphere, Cylinder, Unknown; j counts the flat
    directions of a cylinder (R^j x S^{N-1-j}). residual is the max
    deviation of the witnessed spectra from the fitted model; any kind
    other than Unknown implies residual below the decision threshold.
    """

    kind: str
    j: Optional[int]
    residual: float
    lambda_used: float
    t_slice: float
    n_samples: int
    mean_ratios: Optional[np.ndarray] = None
    notes: str = ""

    def __post_init__(self):
        if self.kind not in ("Plane", "Sphere", "Cylinder", "Unknown"):
            raise ValueError(f"unknown classification kind {self.kind!r}")
        if self.kind != "Unknown" and not self.residual < 0.1:
            raise ValueError("classified kinds require residual < 0.1")

    def label(self) -> str:
        return f"Cylinder({self.j})" if self.kind == "Cylinder" else self.kind


@dataclass
class EstimateProfile:
    """Empirical response curve over a strictly increasing parameter grid."""

    name: str
    x: np.ndarray
    y: np.ndarray
    n_samples: Optional[np.ndarray] = None
    scenario: str = ""
    notes: str = ""
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.size > 1 and not np.all(np.diff(self.x) > 0):
            raise ValueError("profile grid must be strictly increasing")
        if not np.all(np.isfinite(self.y) | np.isnan(self.y)):
            raise ValueError("profile responses must be finite where defined")


# ---------------------------------------------------------------------------
# point selection


@dataclass
class PointSelectionReport:
    point: SpaceTimePoint
    Q: float
    trail: list
    n_region: int
    sup_in_ball: float
    degenerate: bool = False


def _gather(history: FlowHistory, times=None, **kw):
    sets = history_samples(history, times, **kw)
    pos = np.vstack([s.pos[s.resolved] for s in sets])
    tt = np.concatenate([np.full(int(s.resolved.sum()), s.t) for s in sets])
    absA = np.concatenate([np.sqrt(s.absA2[s.resolved]) for s in sets])
    lam = np.vstack([s.lam[s.resolved] for s in sets])
    return pos, tt, absA, lam


def _best_index(pos, tt, absA, mask):
    """Max |A|; ties by earliest time, then lexicographic position."""
    idx = np.nonzero(mask)[0]
    keys = [pos[idx, c] for c in range(pos.shape[1] - 1, -1, -1)]
    keys.append(tt[idx])
    keys.append(-absA[idx])
    return int(idx[np.lexsort(tuple(keys))[0]])


def point_selection(history: FlowHistory, region: ParabolicBall, j: float,
                    times=None, min_samples: int = 100,
                    **kw) -> PointSelectionReport:
    """Curvature-concentration point: start at the region's max-|A| sample
    and jump to any sample exceeding twice the current curvature inside the
    shrinking parabolic ball P(Y, j/(10 Q)) until none remains.

    The terminal pair satisfies sup |A| <= 2Q over resolved samples of the
    final ball, re-verified by a full scan before returning.
    """
    pos, tt, absA, _ = _gather(history, times, **kw)
    in_region = region.contains(pos, tt)
    n_region = int(in_region.sum())
    if n_region < min_samples:
        raise ValueError(f"region is under-resolved: {n_region} samples "
                         f"(need {min_samples})")
    k = _best_index(pos, tt, absA, in_region)
    Q = float(absA[k])
    trail = [(SpaceTimePoint(pos[k].copy(), float(tt[k])), Q)]
    if Q <= 0.0:
        return PointSelectionReport(trail[0][0], 0.0, trail, n_region, 0.0,
                                    degenerate=True)
    for _ in range(200):
        ball = ParabolicBall(SpaceTimePoint(pos[k], float(tt[k])),
                             j / (10.0 * Q))
        inside = ball.contains(pos, tt)
        exceeds = inside & (absA > 2.0 * Q)
        if not exceeds.any():
            sup = float(absA[inside].max()) if inside.any() else Q
            return PointSelectionReport(trail[-1][0], Q, trail, n_region,
                                        sup)
        k = _best_index(pos, tt, absA, exceeds)
        Q = float(absA[k])
        trail.append((SpaceTimePoint(pos[k].copy(), float(tt[k])), Q))
    raise RuntimeError("point selection failed to terminate in 200 jumps")


# ---------------------------------------------------------------------------
# tangent-flow classification


def classify_tangent_flow(history: FlowHistory, center: SpaceTimePoint,
                          lams, zoom: float = 5.0,
                          plane_tol: float = 0.05, tol: float = 0.1,
                          min_samples: int = 20, n: int = 4000,
                          **kw) -> TangentFlowClass:
    """Classify the blowup limit at center from normalized spectra.

    Candidates are tried in descending order; a lambda is usable when its
    slice t0 - 1/lambda^2 lies in the history and carries enough resolved
    samples within zoom/lambda of the center. The first usable lambda
    that classifies wins: Plane when H times the original length scale
    stays under plane_tol; Sphere when every lambda_i/H is within tol of
    1/(N-1); Cylinder(j) when the j smallest ratios vanish to tol and the
    rest match 1/(N-1-j). If none classifies, the attempt with the
    smallest residual is returned as Unknown.
    """
    lams = sorted({float(v) for v in lams}, reverse=True)
    if not lams:
        raise ValueError("need at least one candidate rescale factor")
    L0 = history.length_scale()
    best = None
    tried = False
    for lam in lams:
        t_slice = center.t - 1.0 / lam ** 2
        if t_slice < history.t0 - 1e-12 or t_slice > history.t1 + 1e-12:
            continue
        smp = boundary_sample(history, t_slice, n=n, **kw)
        d = np.linalg.norm(smp.pos - center.x, axis=1)
        m = smp.resolved & (d <= zoom / lam)
        if int(m.sum()) < min_samples:
            continue
        tried = True
        attempt = _classify_slice(smp.select(m), float(smp.t), lam, L0,
                                  plane_tol, tol, min_samples)
        if attempt.kind != "Unknown":
            return attempt
        if best is None or attempt.residual < best.residual:
            best = attempt
    if not tried:
        raise ValueError("no usable rescale factor: every candidate slice "
                         "is outside the history or under-sampled")
    return best


def _classify_slice(sub, t_actual, lam_used, L0, plane_tol, tol,
                    min_samples):
    N = sub.dim
    H = sub.H
    scale_free_H = float(np.abs(H).max() * L0)
    if scale_free_H < plane_tol:
        return TangentFlowClass("Plane", None, scale_free_H, lam_used,
                                t_actual, sub.n,
                                mean_ratios=np.zeros(N - 1))
    pos_H = H > 1e-12
    if not pos_H.all():
        sub = sub.select(pos_H)
        H = sub.H
        if sub.n < min_samples // 2:
            return TangentFlowClass("Unknown", None, np.inf, lam_used,
                                    t_actual, sub.n,
                                    notes="H not positive on the slice")
    ratios = sub.lam / H[:, None]
    mean_ratios = ratios.mean(axis=0)
    devs = {}
    devs[("Sphere", None)] = float(
        np.abs(ratios - 1.0 / (N - 1)).max())
    for jj in range(1, N - 1):
        flat = float(np.abs(ratios[:, :jj]).max())
        round_part = float(
            np.abs(ratios[:, jj:] - 1.0 / (N - 1 - jj)).max())
        devs[("Cylinder", jj)] = max(flat, round_part)
    for key in [("Sphere", None)] + [("Cylinder", jj)
                                     for jj in range(1, N - 1)]:
        if devs[key] < tol:
            return TangentFlowClass(key[0], key[1], devs[key], lam_used,
                                    t_actual, sub.n, mean_ratios)
    return TangentFlowClass("Unknown", None, min(devs.values()), lam_used,
                            t_actual, sub.n, mean_ratios,
                            notes="no model within threshold")


# ---------------------------------------------------------------------------
# estimate profilers


def convexity_profile(history: FlowHistory, H0_values=None, times=None,
                      scenario: str = "", **kw) -> EstimateProfile:
    """eps(H0) = max(0, -min lam_1/H over samples with H >= H0).

    Non-increasing in H0 exactly: raising H0 shrinks the sample set, so
    the minimum ratio can only rise. Grid points above the largest sample
    H are reported as 0 and the truncation noted.
    """
    pos, tt, absA, lam = _gather(history, times, **kw)
    H = lam.sum(axis=1)
    keep = H > 1e-12
    H = H[keep]
    ratio = lam[keep, 0] / H
    if H.size == 0:
        raise ValueError("no samples with positive mean curvature")
    order = np.argsort(H)
    H_sorted = H[order]
    suffix_min = np.minimum.accumulate(ratio[order][::-1])[::-1]
    if H0_values is None:
        H0_values = np.geomspace(np.median(H_sorted),
                                 0.95 * H_sorted[-1], 12)
    H0_values = np.sort(np.asarray(H0_values, dtype=float))
    eps = np.zeros_like(H0_values)
    counts = np.zeros(H0_values.size, dtype=int)
    notes = ""
    for i, H0 in enumerate(H0_values):
        k = int(np.searchsorted(H_sorted, H0, side="left"))
        counts[i] = H_sorted.size - k
        if counts[i] == 0:
            eps[i] = 0.0
            notes = "grid truncated: empty sample set at the largest H0"
        else:
            eps[i] = max(0.0, -float(suffix_min[k]))
    return EstimateProfile("convexity", H0_values, eps, counts, scenario,
                           notes)


def cylindrical_profile(history: FlowHistory, k: int, beta: float,
                        deltas, times=None, scenario: str = "",
                        **kw) -> EstimateProfile:
    """Worst spectral distance to the round (k-1)-cylinder among samples
    with (lam_1 + ... + lam_{k-1})/H below each delta.

    A sample enters the delta bin only when the parabolic ball
    P(p, t, 1/(delta H)) fits inside the history's time span; this is the
    implementable weakening of requiring the flow on that ball, and it is
    what confines the bins to high-curvature (late, necky) samples. C0
    spectral closeness stands in for higher-order closeness and is
    recorded as such. Requires k-convexity with margin beta on the
    resolved samples first.
    """
    pos, tt, absA, lam = _gather(history, times, **kw)
    N = lam.shape[1] + 1
    if not 2 <= k <= N - 1:
        raise ValueError(f"need 2 <= k <= {N - 1}")
    H = lam.sum(axis=1)
    keep = H > 1e-12
    lam = lam[keep]
    H = H[keep]
    tt = tt[keep]
    kc = (lam[:, :k].sum(axis=1) / H).min() if H.size else np.inf
    if not kc >= beta:
        raise ValueError(f"history is not {k}-convex with margin {beta:.3g}"
                         f" (worst ratio {kc:.3g})")
    sel_q = lam[:, :k - 1].sum(axis=1) / H
    close = np.abs(lam[:, k - 1:] / H[:, None] - 1.0 / (N - k)).max(axis=1) \
        + np.abs(lam[:, :k - 1] / H[:, None]).max(axis=1)
    deltas = np.sort(np.asarray(deltas, dtype=float))
    worst = np.full(deltas.size, np.nan)
    counts = np.zeros(deltas.size, dtype=int)
    notes = ("C0 spectral closeness proxy; bins require P(p,t,1/(delta H)) "
             "inside the history span")
    for i, d in enumerate(deltas):
        m = (sel_q < d) & (tt - 1.0 / (d * H) ** 2 >= history.t0 - 1e-12)
        counts[i] = int(m.sum())
        if counts[i] > 0:
            worst[i] = float(close[m].max())
    if counts[0] == 0:
        notes += "; empty below the smallest delta"
    return EstimateProfile("cylindrical", deltas, worst, counts, scenario,
                           notes)


def curvature_estimate_profiler(histories, sigmas, max_anchors: int = 400,
                                times=None, **kw) -> EstimateProfile:
    """Empirical C0(sigma) = max over the corpus of r sup_{P(p,t,sigma r)}|A|.

    Each resolved sample (p, t) anchors a ball of radius r = min(1/H,
    sqrt of the time depth available in its history); anchors are strided
    down to max_anchors per history to bound the pair scan. Non-decreasing
    in sigma by construction.
    """
    if not histories:
        raise ValueError("corpus is empty")
    sigmas = np.sort(np.asarray(sigmas, dtype=float))
    C0 = np.zeros(sigmas.size)
    for hist in histories:
        pos, tt, absA, lam = _gather(hist, times, **kw)
        H = lam.sum(axis=1)
        depth = tt - hist.t0
        with np.errstate(divide="ignore"):
            r = np.minimum(np.where(H > 1e-12, 1.0 / np.maximum(H, 1e-300),
                                    np.inf), np.sqrt(np.maximum(depth, 0.0)))
        ok = np.isfinite(r) & (r > 0)
        if not ok.any():
            continue
        stride = max(1, int(np.ceil(ok.sum() / max_anchors)))
        anchors = np.nonzero(ok)[0][::stride]
        for a in anchors:
            d2 = ((pos - pos[a]) ** 2).sum(axis=1)
            dt = tt[a] - tt
            for i, s in enumerate(sigmas):
                rr = s * r[a]
                m = (d2 <= rr * rr) & (dt >= 0.0) & (dt < rr * rr)
                if m.any():
                    C0[i] = max(C0[i], r[a] * float(absA[m].max()))
    return EstimateProfile("curvature_estimate", sigmas, C0)


# ---------------------------------------------------------------------------
# differential Harnack ratios


@dataclass
class HarnackReport:
    ratio_min: float
    ratio_max: float
    H_center: float
    radius: float
    time_depth: float
    n_samples: int


def harnack_check(history: FlowHistory, point: SpaceTimePoint,
                  Lam: float, n: int = 2000, **kw) -> HarnackReport:
    """Min and max of H(p', t')/H(p, t) over samples of P(p, t, Lam/H).

    H at the center must be positive. On exact shrinkers the ball's time
    depth is clamped to 0.4 R(t)^2 so it cannot cross extinction; stored
    histories must contain the full ball or the check errors out.
    """
    smp = boundary_sample(history, point.t, n=n, **kw)
    d = np.linalg.norm(smp.pos - point.x, axis=1)
    kc = int(np.argmin(d))
    Hc = float(smp.H[kc])
    if not Hc > 1e-12:
        raise ValueError("Harnack ratios need H > 0 at the base point")
    rb = Lam / Hc
    depth = rb * rb
    exact = history.exact
    if exact is not None and hasattr(exact, "radius"):
        try:
            R = float(exact.radius(point.t))
            depth = min(depth, 0.4 * R * R)
        except (ValueError, TypeError):
            pass
    if point.t - depth < history.t0 - 1e-12:
        if exact is None:
            raise ValueError("parabolic ball exceeds the history extent")
        depth = point.t - history.t0
    base = smp.pos[kc]
    tgrid = history.times[(history.times > point.t - depth)
                          & (history.times <= point.t + 1e-15)]
    if exact is not None and tgrid.size < 7:
        tgrid = point.t - depth * np.linspace(1.0 - 1e-6, 0.0, 9)
    lo, hi = np.inf, -np.inf
    count = 0
    for tt in tgrid:
        s = boundary_sample(history, float(tt), n=n, **kw)
        dd = np.linalg.norm(s.pos - base, axis=1)
        m = s.resolved & (dd <= rb)
        if not m.any():
            continue
        ratios = s.H[m] / Hc
        lo = min(lo, float(ratios.min()))
        hi = max(hi, float(ratios.max()))
        count += int(m.sum())
    if count == 0:
        raise ValueError("no resolved samples inside the parabolic ball")
    return HarnackReport(lo, hi, Hc, rb, depth, count)
