"""Time steppers for the three boundary representations.

All engines march explicit Euler with representation-appropriate CFL limits,
record snapshots at exactly the requested times (the step is shortened to
land on them), and stop on t_end, curvature blowup (max |A| h > 0.5),
extinction, or a neckpinch. Runs are deterministic: fixed iteration order,
no threading-dependent reductions.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _kernels
from .geometry import (GRAD_FLOOR, AxisymProfile, FlowHistory, LevelSetField,
                       ParametricCurve, SingularEvent, _reinit_pins)


class FlowAbort(RuntimeError):
    """Raised when a run violates a structural guarantee and must stop."""


@dataclass
class StepParams:
    """Stepping policy shared by the engines.

    cfl is the factor c in dt = c h^2 / (2N) for level sets; curves use the
    same formula with h the current minimum spacing, and the axisymmetric
    engine uses dt = c min(dx^2, r_min^2/(N-2)) / 2. Reinitialization runs
    every reinit_period level-set steps; curve redistribution is checked
    every redistribution_period steps and fires when the max/min spacing
    ratio exceeds spacing_ratio_trigger.
    """

    cfl: float = 0.4
    t_end: Optional[float] = None
    reinit_period: int = 5
    reinit_iters: int = 2
    redistribution_period: int = 1
    spacing_ratio_trigger: float = 2.0
    max_absA_h: float = 0.5
    stop_on_extinction: bool = True
    check_period: int = 25
    grad_floor: float = GRAD_FLOOR
    curvature_cap_factor: float = 2.0
    pinch_radius_factor: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")

    def dt_level_set(self, h: float, dim: int) -> float:
        return self.cfl * h * h / (2.0 * dim)

    def dt_axisym(self, dx: float, r_min: float, dim: int) -> float:
        lim = min(dx * dx, r_min * r_min / max(dim - 2, 1))
        return 0.5 * self.cfl * lim


# ---------------------------------------------------------------------------
# single steps (public operations)


def step_level_set(field: LevelSetField, params: StepParams,
                   dt: Optional[float] = None) -> LevelSetField:
    """One explicit Euler step of motion by mean curvature of all level sets."""
    if dt is None:
        dt = params.dt_level_set(field.spacing, field.dim)
    out = field.copy()
    buf = np.empty_like(field.values)
    _ls_step_into(field.values, buf, field.spacing, dt, params)
    out.values = buf
    return out


def _ls_step_into(phi, buf, h, dt, params):
    cap = params.curvature_cap_factor / h
    g2 = params.grad_floor ** 2
    if phi.ndim == 2:
        _kernels.level_set_step_2d(phi, buf, h, dt, g2, cap)
    else:
        _kernels.level_set_step_3d(phi, buf, h, dt, g2, cap)


def curvature_vectors(points: np.ndarray) -> np.ndarray:
    """Discrete curvature vectors from three-point circumscribed circles.

    For each vertex b with neighbors a and c, the vector points from b to the
    circumcenter of (a, b, c) with magnitude 1/R_circ. Exact on vertices of a
    circle. Collinear triples give zero.
    """
    a = np.roll(points, 1, axis=0)
    c = np.roll(points, -1, axis=0)
    u = a - points
    v = c - points
    uu = (u * u).sum(axis=1)
    vv = (v * v).sum(axis=1)
    uv = (u * v).sum(axis=1)
    det = uu * vv - uv * uv
    scale = uu * vv
    safe = det > 1e-14 * np.maximum(scale, 1e-300)
    alpha = np.where(safe, 0.5 * vv * (uu - uv) / np.where(safe, det, 1.0), 0.0)
    beta = np.where(safe, 0.5 * uu * (vv - uv) / np.where(safe, det, 1.0), 0.0)
    q = alpha[:, None] * u + beta[:, None] * v
    q2 = (q * q).sum(axis=1)
    good = safe & (q2 > 1e-300)
    kvec = np.zeros_like(points)
    kvec[good] = q[good] / q2[good, None]
    return kvec


def step_parametric_curve(curve: ParametricCurve, params: StepParams,
                          dt: Optional[float] = None) -> ParametricCurve:
    """One explicit Euler step of curve shortening flow."""
    if dt is None:
        hmin = float(curve.segment_lengths().min())
        dt = params.cfl * hmin * hmin / 4.0
    return ParametricCurve(curve.points + dt * curvature_vectors(curve.points))


def axisym_curvatures(x: np.ndarray, r: np.ndarray, dim: int):
    """(lam_axial, lam_rot, H) at interior nodes 1..n-2 by central differences.

    lam_rot carries multiplicity dim-2 in H. Curvatures are with respect to
    the outward normal of the solid of revolution.
    """
    dx = float(x[1] - x[0])
    rx = (r[2:] - r[:-2]) / (2.0 * dx)
    rxx = (r[2:] - 2.0 * r[1:-1] + r[:-2]) / (dx * dx)
    s = np.sqrt(1.0 + rx * rx)
    lam_ax = -rxx / s ** 3
    lam_rot = 1.0 / (r[1:-1] * s)
    H = lam_ax + (dim - 2) * lam_rot
    return lam_ax, lam_rot, H


def step_axisym(profile: AxisymProfile, params: StepParams,
                dt: Optional[float] = None) -> AxisymProfile:
    """One explicit Euler step of r_t = r_xx/(1 + r_x^2) - (N-2)/r."""
    r = profile.r
    if dt is None:
        rmin = profile.interior_min_radius()
        dt = params.dt_axisym(profile.dx, rmin, profile.dim)
    out = np.empty_like(r)
    periodic = profile.ends == "periodic"
    _kernels.axisym_step(r, out, 0, r.size - 1, profile.dx, dt,
                         float(profile.dim - 2), periodic)
    return AxisymProfile(profile.x.copy(), out, profile.dim, profile.ends)


# ---------------------------------------------------------------------------
# evolve: full runs with snapshot recording


def evolve(initial, params: StepParams, snapshot_times,
           track_arrival: bool = False) -> FlowHistory:
    """Run a flow to params.t_end (or a singular stop), recording snapshots.

    snapshot_times are landed on exactly (the step preceding each one is
    shortened). The returned history always contains the initial state and
    the final state reached.
    """
    snapshot_times = np.sort(np.asarray(snapshot_times, dtype=float))
    if params.t_end is None:
        raise ValueError("params.t_end is required")
    if snapshot_times.size and snapshot_times[-1] > params.t_end + 1e-15:
        raise ValueError("snapshot times must not exceed t_end")
    if isinstance(initial, LevelSetField):
        return _evolve_level_set(initial, params, snapshot_times, track_arrival)
    if isinstance(initial, ParametricCurve):
        return _evolve_curve(initial, params, snapshot_times)
    if isinstance(initial, AxisymProfile):
        return _evolve_axisym(initial, params, snapshot_times)
    raise TypeError(f"cannot evolve {type(initial).__name__}")


class _SnapshotTape:
    """Collects (time, geometry) pairs with strictly increasing times."""

    def __init__(self):
        self.times = []
        self.snaps = []

    def record(self, t, geom):
        if self.times and t <= self.times[-1] + 1e-12:
            return
        self.times.append(t)
        self.snaps.append(geom)


def _evolve_level_set(field, params, snapshot_times, track_arrival):
    h = field.spacing
    dim = field.dim
    dt_cfl = params.dt_level_set(h, dim)
    phi = field.values.copy()
    buf = np.empty_like(phi)
    tape = _SnapshotTape()
    events = []
    meta = {"engine": "level_set", "h": h, "dt": dt_cfl,
            "cfl": params.cfl, "min_flow_delta": 0.0}
    tape.record(0.0, LevelSetField(field.origin.copy(), h, phi.copy()))

    arrival = None
    crossed = None
    if track_arrival:
        arrival = np.full(phi.shape, np.nan)
        crossed = phi >= 0.0
        arrival[crossed] = 0.0

    t = 0.0
    steps = 0
    next_snap = 0
    min_delta = 0.0
    peak_stat = 0.0
    stop = "t_end"
    while t < params.t_end - 1e-15:
        dt = min(dt_cfl, params.t_end - t)
        while next_snap < snapshot_times.size and \
                snapshot_times[next_snap] <= t + 1e-15:
            next_snap += 1
        if next_snap < snapshot_times.size:
            dt = min(dt, snapshot_times[next_snap] - t)
        _ls_step_into(phi, buf, h, dt, params)
        delta = buf - phi
        dmin = float(delta.min())
        if dmin < min_delta:
            min_delta = dmin
        if track_arrival:
            new_cross = (~crossed) & (buf >= 0.0)
            if new_cross.any():
                prev = phi[new_cross]
                frac = prev / (prev - buf[new_cross])
                arrival[new_cross] = t + frac * dt
                crossed |= new_cross
            resubmerged = crossed & (buf < -1.0e-6)
            if resubmerged.any():
                raise FlowAbort("arrival monotonicity violated: a node "
                                "re-submerged after crossing the boundary")
        phi, buf = buf, phi
        t += dt
        steps += 1
        if params.reinit_period and steps % params.reinit_period == 0:
            phi = _reinit_inplace(phi, buf, h, params)
        if next_snap < snapshot_times.size and \
                abs(t - snapshot_times[next_snap]) <= 1e-13:
            tape.record(t, LevelSetField(field.origin.copy(), h, phi.copy()))
            next_snap += 1
        # a negative phase shallower than 1.5 cells is below grid scale: the
        # gradient at its floor vanishes and reinit pins the island, so the
        # discrete flow can never finish the collapse on its own
        if phi.min() > -1.5 * h:
            loc = field.origin + h * np.array(
                np.unravel_index(int(phi.argmin()), phi.shape), dtype=float)
            events.append(SingularEvent(t, "extinction", loc))
            stop = "extinction"
            if track_arrival:
                # the last sub-grid pocket vanishes now, so its nodes arrive
                # at the extinction time
                arrival[~crossed] = t
                crossed[:] = True
            break
        if steps % params.check_period == 0 and params.max_absA_h is not None:
            stat = _band_max_absA(phi, h) * h
            peak_stat = max(peak_stat, stat)
            if stat > params.max_absA_h:
                if phi.min() > -3.0 * h:
                    # blowup with a sub-grid body is the whole region
                    # collapsing, not a pinch
                    loc = field.origin + h * np.array(
                        np.unravel_index(int(phi.argmin()), phi.shape),
                        dtype=float)
                    events.append(SingularEvent(t, "extinction", loc))
                    stop = "extinction"
                else:
                    stop = "curvature_blowup"
                break
    tape.record(t, LevelSetField(field.origin.copy(), h, phi.copy()))
    meta["min_flow_delta"] = min_delta
    meta["steps"] = steps
    meta["stop"] = stop
    meta["max_absA_h"] = peak_stat
    hist = FlowHistory("level_set", np.array(tape.times), tape.snaps,
                       events, meta)
    if track_arrival:
        hist.arrival = LevelSetField(field.origin.copy(), h, arrival)
    return hist


def _reinit_inplace(phi, buf, h, params):
    field = LevelSetField(np.zeros(phi.ndim), h, phi)
    pinned, target = _reinit_pins(field)
    sgn = phi / np.sqrt(phi * phi + h * h)
    sweep = _kernels.reinit_sweep_2d if phi.ndim == 2 \
        else _kernels.reinit_sweep_3d
    cur, other = phi, buf
    for _ in range(params.reinit_iters):
        sweep(cur, other, sgn, pinned, target, h, 0.5 * h)
        cur, other = other, cur
    if cur is not phi:
        phi[...] = cur
    return phi


def _band_max_absA(phi, h):
    """max |A| over nodes near the zero level, for the blowup stop rule."""
    grads = np.gradient(phi, h, edge_order=1)
    gn2 = sum(g * g for g in grads)
    gn = np.sqrt(gn2)
    band = np.abs(phi) <= 2.0 * h * np.maximum(gn, 0.5)
    band[..., 0], band[..., -1] = False, False
    band[:, 0], band[:, -1] = False, False
    band[0], band[-1] = False, False
    if not band.any():
        return 0.0
    idx = np.nonzero(band)
    if phi.ndim == 2:
        from .diagnostics import _hessian_arrays

        H = _hessian_arrays(phi, h)
        px, py = grads[0][idx], grads[1][idx]
        g2 = np.maximum(px * px + py * py, GRAD_FLOOR ** 2)
        num = H[0][0][idx] * py * py - 2 * H[0][1][idx] * px * py \
            + H[1][1][idx] * px * px
        kap = num / g2 ** 1.5
        return float(np.abs(kap).max())
    from .diagnostics import _level_set_principals

    lam = _level_set_principals(phi, h, idx)
    return float(np.sqrt((lam * lam).sum(axis=1)).max())


def _evolve_curve(curve, params, snapshot_times):
    pts = curve.points.copy()
    tape = _SnapshotTape()
    events = []
    meta = {"engine": "curve", "n": curve.n, "cfl": params.cfl}
    tape.record(0.0, ParametricCurve(pts.copy()))
    area0 = curve.enclosed_area()
    t = 0.0
    steps = 0
    next_snap = 0
    peak_stat = 0.0
    stop = "t_end"
    while t < params.t_end - 1e-15:
        seg = np.hypot(*(np.roll(pts, -1, axis=0) - pts).T)
        hmin = float(seg.min())
        hmean = float(seg.mean())
        if hmin < 1e-12:
            events.append(SingularEvent(t, "extinction"))
            stop = "extinction"
            break
        kvec = curvature_vectors(pts)
        kmax = float(np.sqrt((kvec * kvec).sum(axis=1)).max())
        peak_stat = max(peak_stat, kmax * hmean)
        if kmax * hmean > params.max_absA_h:
            stop = "curvature_blowup"
            break
        dt = min(params.cfl * hmin * hmin / 4.0, params.t_end - t)
        while next_snap < snapshot_times.size and \
                snapshot_times[next_snap] <= t + 1e-15:
            next_snap += 1
        if next_snap < snapshot_times.size:
            dt = min(dt, snapshot_times[next_snap] - t)
        pts = pts + dt * kvec
        t += dt
        steps += 1
        cur = ParametricCurve(pts)
        if params.redistribution_period and \
                steps % params.redistribution_period == 0:
            if cur.spacing_ratio() > params.spacing_ratio_trigger:
                cur = cur.resample()
                pts = cur.points
        if steps % 10 == 0 and not cur.is_simple():
            raise FlowAbort("curve self-intersection detected")
        if cur.enclosed_area() < 1e-6 * area0:
            events.append(SingularEvent(t, "extinction",
                                        pts.mean(axis=0).copy()))
            stop = "extinction"
            tape.record(t, ParametricCurve(pts.copy()))
            break
        if next_snap < snapshot_times.size and \
                abs(t - snapshot_times[next_snap]) <= 1e-13:
            tape.record(t, ParametricCurve(pts.copy()))
            next_snap += 1
    tape.record(t, ParametricCurve(pts.copy()))
    meta["steps"] = steps
    meta["stop"] = stop
    meta["max_absA_h"] = peak_stat
    return FlowHistory("curve", np.array(tape.times), tape.snaps, events, meta)


def _evolve_axisym(profile, params, snapshot_times):
    x = profile.x.copy()
    r = profile.r.copy()
    dim = profile.dim
    dx = profile.dx
    periodic = profile.ends == "periodic"
    n = r.size
    lo, hi = 0, n - 1
    buf = np.empty_like(r)
    tape = _SnapshotTape()
    events = []
    meta = {"engine": "axisym", "dx": dx, "dim": dim, "cfl": params.cfl}

    def snap():
        if periodic:
            return AxisymProfile(x.copy(), r.copy(), dim, "periodic")
        rr = r.copy()
        rr[:lo + 1] = 0.0
        rr[hi:] = 0.0
        return AxisymProfile(x[lo:hi + 1].copy(), rr[lo:hi + 1], dim, "capped")

    tape.record(0.0, snap())
    t = 0.0
    steps = 0
    next_snap = 0
    peak_stat = 0.0
    stop = "t_end"
    while t < params.t_end - 1e-15:
        if not periodic and hi - lo < 6:
            events.append(SingularEvent(
                t, "extinction", np.array([0.5 * (x[lo] + x[hi])])))
            stop = "extinction"
            break
        core = r[lo + 3:hi - 2] if not periodic else r[:-1]
        rmin_core = float(core.min()) if core.size else np.inf
        if core.size and rmin_core <= params.pinch_radius_factor * dx:
            i = (lo + 3 if not periodic else 0) + int(np.argmin(core))
            events.append(SingularEvent(t, "neckpinch", np.array([x[i]]),
                                        {"radius": float(r[i])}))
            stop = "neckpinch"
            break
        rmin = float(r[lo + 1:hi].min()) if not periodic else rmin_core
        dt = min(params.dt_axisym(dx, rmin, dim), params.t_end - t)
        while next_snap < snapshot_times.size and \
                snapshot_times[next_snap] <= t + 1e-15:
            next_snap += 1
        if next_snap < snapshot_times.size:
            dt = min(dt, snapshot_times[next_snap] - t)
        _kernels.axisym_step(r, buf, lo, hi, dx, dt, float(dim - 2), periodic)
        r, buf = buf, r
        t += dt
        steps += 1
        if not periodic:
            # cap retreat: pull the pole inward when the adjacent radius
            # can no longer be resolved on the grid
            while hi - lo >= 6 and r[lo + 1] < dx:
                lo += 1
                r[lo] = 0.0
                r[:lo] = 0.0
            while hi - lo >= 6 and r[hi - 1] < dx:
                hi -= 1
                r[hi] = 0.0
                r[hi + 1:] = 0.0
        if not np.all(np.isfinite(r[lo:hi + 1])):
            raise FlowAbort("axisymmetric step produced non-finite radii")
        if steps % params.check_period == 0 and params.max_absA_h is not None:
            # curvatures on the active window, skipping two cap-adjacent
            # nodes where the profile slope is unresolved
            la, lr, _ = axisym_curvatures(x[lo:hi + 1], r[lo:hi + 1], dim)
            sel = slice(2, -2) if not periodic else slice(None)
            absA = np.sqrt(la[sel] ** 2 + (dim - 2) * lr[sel] ** 2)
            if absA.size:
                peak_stat = max(peak_stat, float(absA.max()) * dx)
            if absA.size and float(absA.max()) * dx > params.max_absA_h:
                stop = "curvature_blowup"
                break
        if next_snap < snapshot_times.size and \
                abs(t - snapshot_times[next_snap]) <= 1e-13:
            tape.record(t, snap())
            next_snap += 1
    tape.record(t, snap())
    meta["steps"] = steps
    meta["stop"] = stop
    meta["max_absA_h"] = peak_stat
    return FlowHistory("axisym", np.array(tape.times), tape.snaps, events, meta)


# ---------------------------------------------------------------------------
# arrival time


def time_of_arrival(history: FlowHistory) -> LevelSetField:
    """Arrival-time field u(x): the first time the level-set value reaches 0.

    u = 0 outside the initial region; nodes the boundary never reaches stay
    NaN. Prefers the per-step arrival field tracked by the engine; otherwise
    interpolates linearly in t between stored snapshots. Aborts if a node's
    value drops below -1e-6 again after having crossed (mean convexity
    violated).
    """
    if history.kind != "level_set":
        raise ValueError("arrival time needs a level-set history")
    if history.arrival is not None:
        return history.arrival
    if not history.snapshots:
        raise ValueError("history has no snapshots")
    f0 = history.snapshots[0]
    u = np.full(f0.shape, np.nan)
    crossed = f0.values >= 0.0
    u[crossed] = history.times[0]
    u[f0.values >= 0.0] = 0.0
    prev = f0.values
    for k in range(1, len(history)):
        cur = history.snapshots[k].values
        if np.any(cur[crossed] < -1.0e-6):
            raise FlowAbort("arrival monotonicity violated between snapshots "
                            f"{k - 1} and {k}")
        new = (~crossed) & (cur >= 0.0)
        if new.any():
            p = prev[new]
            frac = p / (p - cur[new])
            dt = history.times[k] - history.times[k - 1]
            u[new] = history.times[k - 1] + frac * dt
            crossed |= new
        prev = cur
    return LevelSetField(f0.origin.copy(), f0.spacing, u)
