"""Geometric types and operations for mean-convex flow experiments.

Conventions used throughout the package:

* Hypersurfaces are boundaries of compact regions K in R^N. Level-set fields
  phi are negative inside K and positive outside.
* Principal curvatures are taken with respect to the outward unit normal, so
  H = lambda_1 + ... + lambda_{N-1} is positive on convex bodies and mean
  convexity means H >= 0 on the whole boundary.
* Grids are uniform with one spacing h for all axes; values[i0, i1(, i2)]
  lives at origin + h * (i0, i1(, i2)).
* Parabolic rescaling by lambda about a spacetime point (x0, t0) maps
  (x, t) to (lambda (x - x0), lambda^2 (t - t0)).
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
from scipy import ndimage

from . import _kernels

GRAD_FLOOR = 1.0e-8


# ---------------------------------------------------------------------------
# spacetime primitives


@dataclass(frozen=True)
class SpaceTimePoint:
    """A point (x, t) in R^N x R."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        if self.x.ndim != 1 or self.x.size < 1:
            raise ValueError("spatial part must be a 1-D vector")

    @property
    def space_dim(self) -> int:
        return self.x.size

    def rescaled(self, lam: float, about: "SpaceTimePoint") -> "SpaceTimePoint":
        return SpaceTimePoint(lam * (self.x - about.x), lam * lam * (self.t - about.t))


@dataclass(frozen=True)
class ParabolicBall:
    """Backward parabolic ball P(x, t, r) = B(x, r) x (t - r^2, t]."""

    center: SpaceTimePoint
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, points, times):
        """Vectorized membership test; returns a boolean array."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        times = np.asarray(times, dtype=float)
        d2 = np.sum((points - self.center.x) ** 2, axis=-1)
        r2 = self.radius * self.radius
        sp = d2 <= r2
        tm = (times > self.center.t - r2) & (times <= self.center.t)
        return sp & tm

    def rescaled(self, lam: float, about: SpaceTimePoint) -> "ParabolicBall":
        return ParabolicBall(self.center.rescaled(lam, about), lam * self.radius)


# ---------------------------------------------------------------------------
# boundary representations


@dataclass
class LevelSetField:
    """Scalar field phi on a uniform grid; the boundary is the zero level set.

    Parameters
    ----------
    origin : (N,) array
        Physical coordinates of node (0, ..., 0).
    spacing : float
        Grid spacing h, identical on every axis.
    values : ndarray
        Node values, shape = grid dims, axis k along coordinate k.
    """

    origin: np.ndarray
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim not in (2, 3):
            raise ValueError("only 2-D and 3-D grids are supported")
        if self.origin.shape != (self.values.ndim,):
            raise ValueError("origin length must match grid dimension")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return tuple(self.origin[k] + self.spacing * np.arange(self.shape[k])
                     for k in range(self.dim))

    def box(self):
        """(min corner, max corner) of the grid."""
        hi = self.origin + self.spacing * (np.array(self.shape) - 1)
        return self.origin.copy(), hi

    def copy(self) -> "LevelSetField":
        return LevelSetField(self.origin.copy(), self.spacing, self.values.copy())

    def interp(self, points, arr=None):
        """Multilinear interpolation of `arr` (default: the field) at points."""
        if arr is None:
            arr = self.values
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = (pts - self.origin).T / self.spacing
        return ndimage.map_coordinates(arr, idx, order=1, mode="nearest")

    def gradient(self):
        """Central-difference gradient arrays (one-sided at the edges)."""
        return np.gradient(self.values, self.spacing, edge_order=1)

    def grad_norm(self):
        g = self.gradient()
        return np.sqrt(sum(gk * gk for gk in g))

    def zero_band_mask(self, width: float):
        """Nodes within `width` of the zero level, estimated as |phi|/|grad|."""
        gn = np.maximum(self.grad_norm(), GRAD_FLOOR)
        return np.abs(self.values) <= width * gn


@dataclass
class ParametricCurve:
    """Closed polygonal curve in the plane, positively oriented or not.

    points has shape (n, 2); the segment n-1 -> 0 closes the loop.
    """

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must have shape (n, 2)")
        if self.points.shape[0] < 4:
            raise ValueError("a closed curve needs at least 4 points")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("non-finite coordinates")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def copy(self) -> "ParametricCurve":
        return ParametricCurve(self.points.copy())

    def segment_lengths(self):
        d = np.roll(self.points, -1, axis=0) - self.points
        return np.hypot(d[:, 0], d[:, 1])

    def length(self) -> float:
        return float(self.segment_lengths().sum())

    def spacing_ratio(self) -> float:
        s = self.segment_lengths()
        return float(s.max() / s.min())

    def enclosed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        return float(abs(np.sum(x * yn - xn * y)) / 2.0)

    def is_simple(self, block: int = 256) -> bool:
        """Check the curve has no self-intersection (proper segment crossings)."""
        p = self.points
        q = np.roll(p, -1, axis=0)
        n = self.n
        idx = np.arange(n)
        for start in range(0, n, block):
            rows = idx[start:start + block]
            a = p[rows, None, :]
            b = q[rows, None, :]
            c = p[None, :, :]
            d = q[None, :, :]
            # proper crossing: endpoints of each segment straddle the other's line
            d1 = _cross2(d - c, a - c)
            d2 = _cross2(d - c, b - c)
            d3 = _cross2(b - a, c - a)
            d4 = _cross2(b - a, d - a)
            hit = (d1 * d2 < 0) & (d3 * d4 < 0)
            # adjacent segments share endpoints and never properly cross
            gap = (rows[:, None] - idx[None, :]) % n
            hit &= (gap != 0) & (gap != 1) & (gap != n - 1)
            if hit.any():
                return False
        return True

    def resample(self, n: Optional[int] = None) -> "ParametricCurve":
        """Equal-arclength resampling through a periodic cubic spline."""
        from scipy.interpolate import CubicSpline

        if n is None:
            n = self.n
        pts = np.vstack([self.points, self.points[:1]])
        s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
        total = s[-1]
        spl = CubicSpline(s, pts, axis=0, bc_type="periodic")
        snew = np.linspace(0.0, total, n, endpoint=False)
        return ParametricCurve(spl(snew))


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass
class AxisymProfile:
    """Surface of revolution in R^N given by a radius profile r(x) >= 0.

    The axis is the first coordinate. `ends` is either "capped" (r = 0 exactly
    at both end nodes, odd-reflection convention there) or "periodic" (last
    node duplicates the first; all radii positive).
    """

    x: np.ndarray
    r: np.ndarray
    dim: int
    ends: str = "capped"

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.r = np.asarray(self.r, dtype=float)
        if self.x.ndim != 1 or self.x.shape != self.r.shape:
            raise ValueError("x and r must be 1-D arrays of equal length")
        if self.x.size < 5:
            raise ValueError("profile needs at least 5 nodes")
        if self.dim < 3:
            raise ValueError("surfaces of revolution need ambient dimension >= 3")
        dx = np.diff(self.x)
        if dx.min() <= 0:
            raise ValueError("axis grid must be strictly increasing")
        if (dx.max() - dx.min()) > 1.0e-9 * dx.mean():
            raise ValueError("axis grid must be uniform")
        if self.ends == "capped":
            if self.r[0] != 0.0 or self.r[-1] != 0.0:
                raise ValueError("capped profile must have r = 0 at both ends")
            if np.any(self.r[1:-1] <= 0.0):
                raise ValueError("interior radii must be positive")
        elif self.ends == "periodic":
            if np.any(self.r <= 0.0):
                raise ValueError("periodic profile radii must be positive")
            if abs(self.r[0] - self.r[-1]) > 1.0e-12:
                raise ValueError("periodic profile must close up")
        else:
            raise ValueError("ends must be 'capped' or 'periodic'")

    @property
    def dx(self) -> float:
        return float((self.x[-1] - self.x[0]) / (self.x.size - 1))

    @property
    def n(self) -> int:
        return self.x.size

    def copy(self) -> "AxisymProfile":
        return AxisymProfile(self.x.copy(), self.r.copy(), self.dim, self.ends)

    def interior_min_radius(self) -> float:
        if self.ends == "capped":
            return float(self.r[1:-1].min())
        return float(self.r.min())


@dataclass
class SingularEvent:
    """A recorded singular time: neckpinch, extinction, or cap collapse."""

    time: float
    kind: str
    location: Optional[np.ndarray] = None
    info: dict = dc_field(default_factory=dict)


@dataclass
class FlowHistory:
    """Ordered snapshots of one evolving boundary representation.

    kind is one of "level_set", "curve", "axisym", "exact". For exact
    histories the snapshots may be synthesized on demand from the attached
    exact-solution handle instead of being materialized.
    """

    kind: str
    times: np.ndarray
    snapshots: Optional[list] = None
    events: list = dc_field(default_factory=list)
    meta: dict = dc_field(default_factory=dict)
    exact: object = None
    arrival: Optional[LevelSetField] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ValueError("times must be a non-empty 1-D array")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")
        if self.snapshots is not None and len(self.snapshots) != self.times.size:
            raise ValueError("one snapshot per time required")

    def __len__(self) -> int:
        return self.times.size

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def index_at(self, t: float) -> int:
        """Index of the snapshot nearest to t (t must be inside the span)."""
        if t < self.times[0] - 1e-12 or t > self.times[-1] + 1e-12:
            raise ValueError(f"time {t} outside history span "
                             f"[{self.times[0]}, {self.times[-1]}]")
        return int(np.argmin(np.abs(self.times - t)))

    def snapshot_at(self, t: float):
        """Snapshot geometry nearest to time t (exact histories synthesize)."""
        if self.exact is not None:
            return self.exact.geometry(t)
        return self.snapshots[self.index_at(t)]

    def length_scale(self) -> float:
        """A representative initial length scale, used by classifiers."""
        if "length_scale" in self.meta:
            return float(self.meta["length_scale"])
        snap = self.exact.geometry(self.t0) if self.exact is not None \
            else self.snapshots[0]
        if isinstance(snap, LevelSetField):
            lo, hi = snap.box()
            return float(np.max(hi - lo)) / 2.0
        if isinstance(snap, ParametricCurve):
            return snap.length() / (2.0 * np.pi)
        if isinstance(snap, AxisymProfile):
            return float(max(snap.r.max(), (snap.x[-1] - snap.x[0]) / 2.0))
        return 1.0


# ---------------------------------------------------------------------------
# grid construction and signed distance


def make_grid(center, half_width: float, spacing: float):
    """Uniform symmetric grid covering center +- half_width on each axis."""
    center = np.asarray(center, dtype=float)
    n = int(round(2.0 * half_width / spacing)) + 1
    origin = center - spacing * (n - 1) / 2.0
    return origin, (n,) * center.size


def signed_distance(geometry, origin, spacing: float, shape) -> LevelSetField:
    """Rasterize the signed distance to a boundary onto a uniform grid.

    Negative inside, positive outside. For polygonal and profile data the
    distance is measured to the discrete boundary itself, which keeps the
    zero level within a fraction of h of the input boundary.
    """
    origin = np.asarray(origin, dtype=float)
    shape = tuple(int(s) for s in shape)
    axes = [origin[k] + spacing * np.arange(shape[k]) for k in range(len(shape))]
    if hasattr(geometry, "signed_distance_at"):
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        vals = geometry.signed_distance_at(pts).reshape(shape)
        return LevelSetField(origin, spacing, vals)
    if isinstance(geometry, ParametricCurve):
        if len(shape) != 2:
            raise ValueError("curve rasterization needs a 2-D grid")
        vals = _sdf_polygon(geometry.points, axes[0], axes[1])
        return LevelSetField(origin, spacing, vals)
    if isinstance(geometry, AxisymProfile):
        if len(shape) != geometry.dim or geometry.dim != 3:
            raise ValueError("axisym rasterization implemented for N = 3 grids")
        vals = _sdf_axisym(geometry, axes)
        return LevelSetField(origin, spacing, vals)
    if isinstance(geometry, LevelSetField):
        return reinitialize(geometry, iters=2 * max(geometry.shape))
    raise TypeError(f"cannot rasterize {type(geometry).__name__}")


def _sdf_polygon(poly, xs, ys):
    """Exact distance to a closed polygon with even-odd interior sign."""
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    px = gx.ravel()
    py = gy.ravel()
    a = poly
    b = np.roll(poly, -1, axis=0)
    dmin = np.full(px.shape, np.inf)
    inside = np.zeros(px.shape, dtype=bool)
    block = max(1, int(4.0e6 // max(px.size, 1)) or 1)
    for s in range(0, len(a), block):
        ax, ay = a[s:s + block, 0][:, None], a[s:s + block, 1][:, None]
        bx, by = b[s:s + block, 0][:, None], b[s:s + block, 1][:, None]
        ex, ey = bx - ax, by - ay
        L2 = ex * ex + ey * ey
        t = ((px[None, :] - ax) * ex + (py[None, :] - ay) * ey) / np.maximum(L2, 1e-300)
        t = np.clip(t, 0.0, 1.0)
        dx = px[None, :] - (ax + t * ex)
        dy = py[None, :] - (ay + t * ey)
        d = np.sqrt(dx * dx + dy * dy)
        dmin = np.minimum(dmin, d.min(axis=0))
        # even-odd rule with upward ray crossings
        cross = ((ay <= py[None, :]) & (by > py[None, :])) | \
                ((by <= py[None, :]) & (ay > py[None, :]))
        with np.errstate(divide="ignore", invalid="ignore"):
            xi = ax + (py[None, :] - ay) * ex / np.where(ey == 0.0, np.inf, ey)
        hit = cross & (xi > px[None, :])
        inside ^= (hit.sum(axis=0) % 2).astype(bool)
    sd = np.where(inside, -dmin, dmin)
    return sd.reshape(len(xs), len(ys))


def _sdf_axisym(profile, axes):
    """Distance to a revolved profile, computed in the (axial, radial) plane."""
    gx, gy, gz = np.meshgrid(*axes, indexing="ij")
    aa = gx.ravel()
    rr = np.hypot(gy.ravel(), gz.ravel())
    pa = profile.x
    pr = profile.r
    qa = np.roll(pa, -1)[:-1]
    qr = np.roll(pr, -1)[:-1]
    ax_, ar_ = pa[:-1], pr[:-1]
    dmin = np.full(aa.shape, np.inf)
    block = max(1, int(4.0e6 // max(aa.size, 1)) or 1)
    for s in range(0, ax_.size, block):
        a0 = ax_[s:s + block][:, None]
        r0 = ar_[s:s + block][:, None]
        ea = (qa[s:s + block][:, None] - a0)
        er = (qr[s:s + block][:, None] - r0)
        L2 = ea * ea + er * er
        t = ((aa[None, :] - a0) * ea + (rr[None, :] - r0) * er) / np.maximum(L2, 1e-300)
        t = np.clip(t, 0.0, 1.0)
        da = aa[None, :] - (a0 + t * ea)
        dr = rr[None, :] - (r0 + t * er)
        d = np.sqrt(da * da + dr * dr)
        dmin = np.minimum(dmin, d.min(axis=0))
    inside = np.zeros(aa.shape, dtype=bool)
    mask = (aa >= pa[0]) & (aa <= pa[-1])
    rint = np.interp(aa[mask], pa, pr)
    inside[mask] = rr[mask] < rint
    sd = np.where(inside, -dmin, dmin)
    return sd.reshape(gx.shape)


# ---------------------------------------------------------------------------
# reinitialization


def _reinit_pins(field: LevelSetField):
    """Interface-adjacent mask and frozen linearized distances for the fix."""
    phi = field.values
    h = field.spacing
    pinned = np.zeros(phi.shape, dtype=bool)
    for k in range(phi.ndim):
        lo = [slice(None)] * phi.ndim
        hi = [slice(None)] * phi.ndim
        lo[k] = slice(0, -1)
        hi[k] = slice(1, None)
        flip = phi[tuple(lo)] * phi[tuple(hi)] <= 0.0
        pinned[tuple(lo)] |= flip
        pinned[tuple(hi)] |= flip
    gn = np.maximum(field.grad_norm(), 1.0e-3)
    target = np.clip(phi / gn, -2.0 * h, 2.0 * h)
    return pinned, target


def reinitialize(field: LevelSetField, iters: Optional[int] = None,
                 dtau_factor: float = 0.5) -> LevelSetField:
    """Relax the field toward a signed distance function near its zero set.

    Godunov upwind sweeps of |grad phi| = 1 with a smoothed sign, plus a
    subcell fix: nodes adjacent to the interface relax toward their frozen
    linearized distances, so the zero contour does not move and no node
    changes sign.
    """
    out = field.copy()
    h = field.spacing
    if iters is None:
        iters = 10
    phi0 = out.values.copy()
    sgn = phi0 / np.sqrt(phi0 * phi0 + h * h)
    pinned, target = _reinit_pins(out)
    dtau = dtau_factor * h
    buf = np.empty_like(out.values)
    sweep = _kernels.reinit_sweep_2d if out.dim == 2 else _kernels.reinit_sweep_3d
    for _ in range(iters):
        sweep(out.values, buf, sgn, pinned, target, h, dtau)
        out.values, buf = buf, out.values
    return out


# ---------------------------------------------------------------------------
# zero-set extraction


def extract_curves(field: LevelSetField):
    """Zero-level contours of a 2-D field as closed polygonal curves."""
    from skimage import measure

    if field.dim != 2:
        raise ValueError("extract_curves needs a 2-D field")
    loops = measure.find_contours(field.values, 0.0)
    out = []
    for loop in loops:
        closed = np.allclose(loop[0], loop[-1])
        pts = loop[:-1] if closed else loop
        if pts.shape[0] < 4:
            continue
        out.append(ParametricCurve(field.origin + field.spacing * pts))
    return out


def extract_surface(field: LevelSetField):
    """Zero isosurface of a 3-D field as (vertices, faces) triangle mesh."""
    from skimage import measure

    if field.dim != 3:
        raise ValueError("extract_surface needs a 3-D field")
    h = field.spacing
    verts, faces, _, _ = measure.marching_cubes(field.values, 0.0,
                                                spacing=(h, h, h))
    return verts + field.origin, faces


# ---------------------------------------------------------------------------
# parabolic rescaling


def parabolic_rescale(obj, lam: float, about: SpaceTimePoint,
                      resample_to=None):
    """Parabolic rescaling (x, t) -> (lam (x - x0), lam^2 (t - t0)).

    Geometry snapshots rescale exactly (coordinates and, for distance-like
    fields, values are scaled). Passing resample_to = (origin, spacing, shape)
    additionally resamples a rescaled level-set field onto a new grid by
    multilinear interpolation and reinitializes it.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if hasattr(obj, "rescaled"):
        return obj.rescaled(lam, about)
    x0 = about.x
    if isinstance(obj, ParametricCurve):
        return ParametricCurve(lam * (obj.points - x0))
    if isinstance(obj, AxisymProfile):
        if np.any(np.abs(x0[1:]) > 1e-12):
            raise ValueError("rescaling center must lie on the symmetry axis")
        return AxisymProfile(lam * (obj.x - x0[0]), lam * obj.r, obj.dim, obj.ends)
    if isinstance(obj, LevelSetField):
        out = LevelSetField(lam * (obj.origin - x0), lam * obj.spacing,
                            lam * obj.values)
        if resample_to is not None:
            norigin, nspacing, nshape = resample_to
            naxes = [norigin[k] + nspacing * np.arange(nshape[k])
                     for k in range(len(nshape))]
            grids = np.meshgrid(*naxes, indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=-1)
            vals = out.interp(pts).reshape(nshape)
            out = reinitialize(LevelSetField(np.asarray(norigin, float),
                                             nspacing, vals))
        return out
    if isinstance(obj, FlowHistory):
        t0 = about.t
        times = lam * lam * (obj.times - t0)
        snaps = None
        if obj.snapshots is not None:
            snaps = [parabolic_rescale(s, lam, about) for s in obj.snapshots]
        exact = obj.exact.rescaled(lam, about) if obj.exact is not None else None
        events = [SingularEvent(lam * lam * (e.time - t0), e.kind,
                                None if e.location is None
                                else lam * (e.location - x0), dict(e.info))
                  for e in obj.events]
        meta = dict(obj.meta)
        if "length_scale" in meta:
            meta["length_scale"] = lam * meta["length_scale"]
        return FlowHistory(obj.kind, times, snaps, events, meta, exact)
    raise TypeError(f"cannot rescale {type(obj).__name__}")
