"""Exact solution families: spheres, cylinders, planes, grim reaper, dumbbell.

Each family knows its closed-form radius law, signed distance, analytic
boundary samples (positions, outward normals, principal curvatures, area
weights) at any valid time, and how it transforms under parabolic rescaling.
These are the reference objects the engines and diagnostics are tested
against.
"""

import numpy as np

from .geometry import (AxisymProfile, FlowHistory, LevelSetField,
                       ParametricCurve, SpaceTimePoint, make_grid)

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


class ExactFlow:
    """Base class for closed-form flows."""

    kind = "exact"

    def history(self, times) -> FlowHistory:
        times = np.asarray(times, dtype=float)
        meta = {"engine": "exact", "exact_kind": self.kind,
                "length_scale": self.length_scale()}
        return FlowHistory("exact", times, None, [], meta, exact=self)

    def length_scale(self) -> float:
        return 1.0

    def geometry(self, t: float):
        raise NotImplementedError

    def slice_arrays(self, t: float, n: int, window: float = None) -> dict:
        """Analytic boundary quadrature sample set at time t.

        Returns dict with pos (n, N), nu (n, N), lam (n, N-1) ascending,
        weight (n,). Weights sum to the sampled boundary area.
        """
        raise NotImplementedError

    def level_set(self, t: float, origin, spacing, shape) -> LevelSetField:
        origin = np.asarray(origin, dtype=float)
        shape = tuple(int(s) for s in shape)
        axes = [origin[k] + spacing * np.arange(shape[k])
                for k in range(len(shape))]
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        vals = self.signed_distance_at(pts, t).reshape(shape)
        return LevelSetField(origin, spacing, vals)


class SphereFlow(ExactFlow):
    """Round sphere S^{N-1} of initial radius R0, R(t) = sqrt(R0^2 - 2(N-1)t)."""

    kind = "sphere"

    def __init__(self, radius: float = 1.0, dim: int = 2, center=None):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        # radius 0 is the degenerate anchor produced by rescaling about the
        # extinction point: every query before time 0 is still well-defined
        if not radius >= 0:
            raise ValueError("radius must be nonnegative")
        self.R0 = float(radius)
        self.dim = int(dim)
        self.center = np.zeros(dim) if center is None else \
            np.asarray(center, dtype=float)

    @property
    def extinction_time(self) -> float:
        return self.R0 ** 2 / (2.0 * (self.dim - 1))

    def length_scale(self) -> float:
        return self.R0

    def radius(self, t):
        arg = self.R0 ** 2 - 2.0 * (self.dim - 1) * np.asarray(t, dtype=float)
        if np.any(arg <= 0):
            raise ValueError("time at or beyond extinction")
        return np.sqrt(arg)

    def signed_distance_at(self, points, t: float = 0.0):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.norm(points - self.center, axis=-1) - self.radius(t)

    def geometry(self, t: float):
        if self.dim == 2:
            return self.curve(t)
        if self.dim == 3:
            return self.axisym(t)
        raise ValueError("materialization implemented for N <= 3")

    def curve(self, t: float, n: int = 1024) -> ParametricCurve:
        if self.dim != 2:
            raise ValueError("curve form needs N = 2")
        R = self.radius(t)
        th = 2.0 * np.pi * np.arange(n) / n
        pts = self.center + R * np.stack([np.cos(th), np.sin(th)], axis=-1)
        return ParametricCurve(pts)

    def axisym(self, t: float, n: int = 513) -> AxisymProfile:
        if self.dim < 3:
            raise ValueError("axisym form needs N >= 3")
        R = self.radius(t)
        x = np.linspace(-R, R, n)
        r = np.sqrt(np.maximum(R * R - x * x, 0.0))
        r[0] = 0.0
        r[-1] = 0.0
        return AxisymProfile(self.center[0] + x, r, self.dim, "capped")

    def slice_arrays(self, t: float, n: int = 2000, window=None) -> dict:
        R = float(self.radius(t))
        N = self.dim
        if N == 2:
            th = 2.0 * np.pi * np.arange(n) / n
            nu = np.stack([np.cos(th), np.sin(th)], axis=-1)
            w = np.full(n, 2.0 * np.pi * R / n)
        elif N == 3:
            k = np.arange(n)
            z = 1.0 - (2.0 * k + 1.0) / n
            rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
            ph = GOLDEN_ANGLE * k
            nu = np.stack([rho * np.cos(ph), rho * np.sin(ph), z], axis=-1)
            w = np.full(n, 4.0 * np.pi * R * R / n)
        else:
            raise ValueError("sampling implemented for N <= 3")
        pos = self.center + R * nu
        lam = np.full((n, N - 1), 1.0 / R)
        return {"pos": pos, "nu": nu, "lam": lam, "weight": w}

    def rescaled(self, lam: float, about: SpaceTimePoint) -> "SphereFlow":
        R_at = self.radius(about.t)
        out = SphereFlow(lam * R_at, self.dim, lam * (self.center - about.x))
        return out


class CylinderFlow(ExactFlow):
    """R^j x S^{N-1-j} with flat directions along the first j coordinates.

    R(t) = sqrt(R0^2 - 2(N-1-j) t); for j = N-1 this is static.
    """

    kind = "cylinder"

    def __init__(self, radius: float = 1.0, dim: int = 3, j: int = 1,
                 center=None):
        if not 1 <= j <= dim - 1:
            raise ValueError("need 1 <= j <= N-1")
        self.R0 = float(radius)
        self.dim = int(dim)
        self.j = int(j)
        self.center = np.zeros(dim) if center is None else \
            np.asarray(center, dtype=float)

    @property
    def sphere_factor_dim(self) -> int:
        return self.dim - 1 - self.j

    @property
    def extinction_time(self):
        m = self.sphere_factor_dim
        return np.inf if m == 0 else self.R0 ** 2 / (2.0 * m)

    def length_scale(self) -> float:
        return self.R0

    def radius(self, t):
        arg = self.R0 ** 2 - 2.0 * self.sphere_factor_dim * np.asarray(t, float)
        if np.any(arg <= 0):
            raise ValueError("time at or beyond extinction")
        return np.sqrt(arg)

    def signed_distance_at(self, points, t: float = 0.0):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        perp = points[:, self.j:] - self.center[self.j:]
        return np.linalg.norm(perp, axis=-1) - self.radius(t)

    def geometry(self, t: float):
        raise ValueError("cylinders are sampled analytically or rasterized")

    def slice_arrays(self, t: float, n: int = 4096, window: float = 10.0) -> dict:
        R = float(self.radius(t))
        N = self.dim
        if N == 3 and self.j == 1:
            # balanced axial x angular sampling of the window
            n_th = max(8, int(round(np.sqrt(n * 2.0 * np.pi * R / window) / 2.0) * 2))
            n_ax = max(2, n // n_th)
            th = 2.0 * np.pi * np.arange(n_th) / n_th
            zax = (np.arange(n_ax) + 0.5) / n_ax * window - window / 2.0
            TH, ZA = np.meshgrid(th, zax, indexing="ij")
            nu = np.stack([np.zeros_like(TH), np.cos(TH), np.sin(TH)],
                          axis=-1).reshape(-1, 3)
            pos = self.center + np.stack(
                [ZA, R * np.cos(TH), R * np.sin(TH)], axis=-1).reshape(-1, 3)
            w = np.full(pos.shape[0],
                        (2.0 * np.pi * R / n_th) * (window / n_ax))
            m = pos.shape[0]
            lam = np.zeros((m, 2))
            lam[:, 1] = 1.0 / R
            return {"pos": pos, "nu": nu, "lam": lam, "weight": w}
        if N == 2 and self.j == 1:
            # two parallel lines y = center_y +- R
            n_half = n // 2
            xs = (np.arange(n_half) + 0.5) / n_half * window - window / 2.0
            top = np.stack([self.center[0] + xs,
                            np.full(n_half, self.center[1] + R)], axis=-1)
            bot = np.stack([self.center[0] + xs,
                            np.full(n_half, self.center[1] - R)], axis=-1)
            pos = np.vstack([top, bot])
            nu = np.vstack([np.tile([0.0, 1.0], (n_half, 1)),
                            np.tile([0.0, -1.0], (n_half, 1))])
            w = np.full(2 * n_half, window / n_half)
            lam = np.zeros((2 * n_half, 1))
            return {"pos": pos, "nu": nu, "lam": lam, "weight": w}
        raise ValueError("sampling implemented for (N, j) in {(3, 1), (2, 1)}")

    def rescaled(self, lam: float, about: SpaceTimePoint) -> "CylinderFlow":
        R_at = self.radius(about.t)
        return CylinderFlow(lam * R_at, self.dim, self.j,
                            lam * (self.center - about.x))


class PlaneFlow(ExactFlow):
    """Static halfspace {x . normal <= offset}; the boundary is a hyperplane."""

    kind = "plane"

    def __init__(self, dim: int = 2, normal=None, offset: float = 0.0):
        self.dim = int(dim)
        nrm = np.zeros(dim)
        nrm[-1] = 1.0
        if normal is not None:
            nrm = np.asarray(normal, dtype=float)
            nrm = nrm / np.linalg.norm(nrm)
        self.normal = nrm
        self.offset = float(offset)

    extinction_time = np.inf

    def signed_distance_at(self, points, t: float = 0.0):
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return points @ self.normal - self.offset

    def _frame(self):
        """Orthonormal tangent vectors spanning the plane."""
        N = self.dim
        basis = []
        for k in range(N):
            e = np.zeros(N)
            e[k] = 1.0
            v = e - (e @ self.normal) * self.normal
            for b in basis:
                v = v - (v @ b) * b
            nv = np.linalg.norm(v)
            if nv > 1e-10:
                basis.append(v / nv)
            if len(basis) == N - 1:
                break
        return np.array(basis)

    def geometry(self, t: float):
        raise ValueError("planes are sampled analytically or rasterized")

    def slice_arrays(self, t: float, n: int = 4096, window: float = 4.0,
                     center=None) -> dict:
        N = self.dim
        tang = self._frame()
        base = self.offset * self.normal if center is None else (
            np.asarray(center, float)
            - (np.asarray(center, float) @ self.normal - self.offset) * self.normal)
        if N == 2:
            s = (np.arange(n) + 0.5) / n * window - window / 2.0
            pos = base + s[:, None] * tang[0]
            w = np.full(n, window / n)
        else:
            m = max(2, int(round(np.sqrt(n))))
            s = (np.arange(m) + 0.5) / m * window - window / 2.0
            A, B = np.meshgrid(s, s, indexing="ij")
            pos = base + A.reshape(-1, 1) * tang[0] + B.reshape(-1, 1) * tang[1]
            w = np.full(pos.shape[0], (window / m) ** 2)
        k = pos.shape[0]
        nu = np.tile(self.normal, (k, 1))
        lam = np.zeros((k, N - 1))
        return {"pos": pos, "nu": nu, "lam": lam, "weight": w}

    def rescaled(self, lam: float, about: SpaceTimePoint) -> "PlaneFlow":
        off = lam * (self.offset - about.x @ self.normal)
        return PlaneFlow(self.dim, self.normal.copy(), off)


class GrimReaperFlow(ExactFlow):
    """Translating solution y = y0 + t/a - a log cos((x - x0)/a) in the plane.

    The solid region is the epigraph; it translates upward with speed 1/a.
    """

    kind = "grim_reaper"

    def __init__(self, width: float = 1.0, apex=(0.0, 0.0)):
        if not width > 0:
            raise ValueError("width must be positive")
        self.a = float(width)
        self.apex = np.asarray(apex, dtype=float)
        self.dim = 2

    extinction_time = np.inf

    def length_scale(self) -> float:
        return self.a

    def graph(self, x, t: float):
        xi = (np.asarray(x, float) - self.apex[0]) / self.a
        return self.apex[1] + t / self.a - self.a * np.log(np.cos(xi))

    def signed_distance_at(self, points, t: float = 0.0):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        crv = self.curve(t, n=4096).points
        a = crv
        b = np.roll(crv, -1, axis=0)[:-1]
        a = a[:-1]
        e = b - a
        L2 = np.maximum((e * e).sum(axis=1), 1e-300)
        dmin = np.full(pts.shape[0], np.inf)
        for s in range(0, a.shape[0], 512):
            aa = a[s:s + 512]
            ee = e[s:s + 512]
            ll = L2[s:s + 512]
            tpar = ((pts[None, :, :] - aa[:, None, :]) * ee[:, None, :]).sum(-1) / ll[:, None]
            tpar = np.clip(tpar, 0.0, 1.0)
            proj = aa[:, None, :] + tpar[:, :, None] * ee[:, None, :]
            d = np.linalg.norm(pts[None, :, :] - proj, axis=-1)
            dmin = np.minimum(dmin, d.min(axis=0))
        xi = (pts[:, 0] - self.apex[0]) / self.a
        inside = (np.abs(xi) < np.pi / 2.0) & (pts[:, 1] > self.graph(pts[:, 0], t))
        return np.where(inside, -dmin, dmin)

    def geometry(self, t: float):
        return self.curve(t)

    def curve(self, t: float, n: int = 2048,
              margin: float = 1.0e-2) -> ParametricCurve:
        """Open graph truncated at |x - x0| <= a (pi/2 - margin), closed far above."""
        half = self.a * (np.pi / 2.0 - margin)
        x = np.linspace(-half, half, n) + self.apex[0]
        y = self.graph(x, t)
        ytop = y.max() + 2.0 * self.a
        pts = np.vstack([np.stack([x, y], axis=-1),
                         [[x[-1], ytop], [x[0], ytop]]])
        return ParametricCurve(pts)

    def slice_arrays(self, t: float, n: int = 4000, window=None,
                     margin: float = 1.0e-2) -> dict:
        half_xi = np.pi / 2.0 - margin
        xi = (np.arange(n) + 0.5) / n * 2.0 * half_xi - half_xi
        x = self.apex[0] + self.a * xi
        y = self.graph(x, t)
        sec = 1.0 / np.cos(xi)
        # outward normal of the epigraph points downward
        nu = np.stack([np.tan(xi), -np.ones(n)], axis=-1) / sec[:, None]
        lam = (np.cos(xi) / self.a)[:, None]
        w = sec * (self.a * 2.0 * half_xi / n)
        return {"pos": np.stack([x, y], axis=-1), "nu": nu, "lam": lam,
                "weight": w}

    def rescaled(self, lam: float, about: SpaceTimePoint) -> "GrimReaperFlow":
        apex_t = self.apex + np.array([0.0, about.t / self.a])
        return GrimReaperFlow(lam * self.a, lam * (apex_t - about.x))


def dumbbell_profile(neck_radius: float = 0.3, bulb_radius: float = 1.0,
                     bulb_separation: float = 2.4, dim: int = 3,
                     n: int = 513) -> AxisymProfile:
    """Rotationally symmetric two-bulb dumbbell with a C^2 neck blend.

    Bulbs are spheres of radius b centered at +-c on the axis
    (c = bulb_separation / 2). The waist is a flat cylinder of radius a
    joined to each bulb equator by a quintic blend that matches value,
    slope, and curvature on both sides; when the separation leaves no room
    for a flat section the blend spans the whole half-neck. The
    construction is rejected if it fails positivity or mean convexity.
    """
    a, b, c = float(neck_radius), float(bulb_radius), float(bulb_separation) / 2.0
    if not (0 < a < b and c > 0):
        raise ValueError("need 0 < neck < bulb and positive separation")
    L = min(1.4 * b, c)
    x1 = c - L
    # quintic u -> r on the blend [x1, c]: flat (a, 0, 0) at u=0, sphere
    # equator (b, 0, -1/b) at u=1, second derivative scaled by L^2
    M = np.array([[1.0, 1.0, 1.0],
                  [3.0, 4.0, 5.0],
                  [6.0, 12.0, 20.0]])
    k3, k4, k5 = np.linalg.solve(M, [b - a, 0.0, -L * L / b])
    half = c + b
    x = np.linspace(-half, half, n)
    ax = np.abs(x)
    u = np.clip((ax - x1) / L, 0.0, 1.0)
    blend = a + k3 * u ** 3 + k4 * u ** 4 + k5 * u ** 5
    cap = np.sqrt(np.maximum(b * b - (ax - c) ** 2, 0.0))
    r = np.where(ax <= x1, a, np.where(ax <= c, blend, cap))
    r[0] = 0.0
    r[-1] = 0.0
    if np.any(r[1:-1] <= 0.0):
        raise ValueError("dumbbell parameters give a non-positive profile")
    prof = AxisymProfile(x, r, dim, "capped")
    if _axisym_min_H(prof) <= 0.0:
        raise ValueError("dumbbell parameters give a non-mean-convex profile")
    return prof


def _axisym_min_H(p: AxisymProfile) -> float:
    """Minimum of H over interior nodes, by central differences."""
    dx = p.dx
    r = p.r
    rx = (r[2:] - r[:-2]) / (2 * dx)
    rxx = (r[2:] - 2 * r[1:-1] + r[:-2]) / dx ** 2
    lam_ax = -rxx / (1 + rx ** 2) ** 1.5
    lam_rot = 1.0 / (r[1:-1] * np.sqrt(1 + rx ** 2))
    H = lam_ax + (p.dim - 2) * lam_rot
    keep = slice(2, -2)
    return float(H[keep].min())


def make_exact(kind: str, **params):
    """Build an exact solution or reference initial datum by name.

    kinds: "sphere", "cylinder", "plane", "grim_reaper" return closed-form
    flow handles; "dumbbell" returns the smooth initial AxisymProfile (its
    evolution is a job for the axisymmetric engine).
    """
    kinds = {
        "sphere": SphereFlow,
        "cylinder": CylinderFlow,
        "plane": PlaneFlow,
        "grim_reaper": GrimReaperFlow,
    }
    if kind in kinds:
        return kinds[kind](**params)
    if kind == "dumbbell":
        return dumbbell_profile(**params)
    raise ValueError(f"unknown exact kind {kind!r}")
