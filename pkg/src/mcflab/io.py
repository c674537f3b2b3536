"""History export/import and report writers.

All numeric output goes through one float formatter (17 significant
digits, enough to round-trip doubles exactly), so identical inputs write
byte-identical files. A history directory holds one CSV per snapshot, an
index CSV (t, filename, event flags), events.json with full singular
event records, meta.json with engine metadata, and one SVG contour sheet
per snapshot.
"""

import json
import os

import numpy as np

from .geometry import (AxisymProfile, FlowHistory, LevelSetField,
                       ParametricCurve, SingularEvent, extract_curves)


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_rows(path: str, header, rows) -> None:
    """Plain-text CSV with %.17g floats, LF endings, no quoting."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(str(c) for c in header) + "\n")
        for row in rows:
            f.write(",".join(c if isinstance(c, str) else fmt(c)
                             for c in row) + "\n")


def read_rows(path: str):
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln.rstrip("\n") for ln in f if ln.strip()]
    return lines[0].split(","), [ln.split(",") for ln in lines[1:]]


# ---------------------------------------------------------------------------
# geometry snapshots


def write_snapshot(path: str, geometry, t: float) -> None:
    """One snapshot file: a header line (kind, N, layout), then node rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        if isinstance(geometry, ParametricCurve):
            f.write(f"curve,2,t={fmt(t)},n={geometry.n}\n")
            for p in geometry.points:
                f.write(f"{fmt(p[0])},{fmt(p[1])}\n")
        elif isinstance(geometry, AxisymProfile):
            f.write(f"axisym,{geometry.dim},t={fmt(t)},n={geometry.n},"
                    f"ends={geometry.ends}\n")
            for xx, rr in zip(geometry.x, geometry.r):
                f.write(f"{fmt(xx)},{fmt(rr)}\n")
        elif isinstance(geometry, LevelSetField):
            shape = "x".join(str(s) for s in geometry.shape)
            origin = " ".join(fmt(v) for v in geometry.origin)
            f.write(f"level_set,{geometry.dim},t={fmt(t)},shape={shape},"
                    f"origin={origin},spacing={fmt(geometry.spacing)}\n")
            flat = geometry.values.reshape(-1, geometry.shape[-1])
            for line in flat:
                f.write(",".join(fmt(v) for v in line) + "\n")
        else:
            raise TypeError(f"cannot write {type(geometry).__name__}")


def read_snapshot(path: str):
    """Inverse of write_snapshot: returns (geometry, t)."""
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().rstrip("\n").split(",")
        kind = header[0]
        fields = dict(tok.split("=", 1) for tok in header[2:])
        t = float(fields["t"])
        if kind == "curve":
            pts = np.loadtxt(f, delimiter=",", ndmin=2)
            return ParametricCurve(pts), t
        if kind == "axisym":
            data = np.loadtxt(f, delimiter=",", ndmin=2)
            return AxisymProfile(data[:, 0], data[:, 1], int(header[1]),
                                 ends=fields["ends"]), t
        if kind == "level_set":
            shape = tuple(int(s) for s in fields["shape"].split("x"))
            origin = np.array([float(v) for v in
                               fields["origin"].split(" ")])
            values = np.loadtxt(f, delimiter=",").reshape(shape)
            return LevelSetField(origin, float(fields["spacing"]), values), t
    raise ValueError(f"unknown snapshot kind {kind!r} in {path}")


def write_history(directory: str, history: FlowHistory,
                  svg: bool = True) -> None:
    """History directory: snap_*.csv + index.csv + events.json + meta.json."""
    os.makedirs(directory, exist_ok=True)
    if history.snapshots is None:
        raise ValueError("cannot export a purely analytic history")
    index_rows = []
    prev_t = -np.inf
    for i, (t, geom) in enumerate(zip(history.times, history.snapshots)):
        name = f"snap_{i:06d}.csv"
        write_snapshot(os.path.join(directory, name), geom, float(t))
        flags = ";".join(ev.kind for ev in history.events
                         if prev_t < ev.time <= t + 1e-15)
        index_rows.append((float(t), name, flags))
        if svg:
            snapshot_svg(os.path.join(directory, f"sheet_{i:06d}.svg"),
                         geom, float(t))
        prev_t = t
    write_rows(os.path.join(directory, "index.csv"),
               ("t", "filename", "events"),
               [(t, n, fl) for t, n, fl in index_rows])
    events = [{"time": ev.time, "kind": ev.kind,
               "location": None if ev.location is None
               else [float(v) for v in np.atleast_1d(ev.location)],
               "info": {k: (float(v) if isinstance(v, (int, float, np.floating))
                            else str(v)) for k, v in ev.info.items()}}
              for ev in history.events]
    _write_json(os.path.join(directory, "events.json"), events)
    meta = {k: (v if isinstance(v, (str, int, bool)) else float(v)
                if isinstance(v, (float, np.floating)) else str(v))
            for k, v in history.meta.items()}
    meta["kind"] = history.kind
    _write_json(os.path.join(directory, "meta.json"), meta)


def read_history(directory: str) -> FlowHistory:
    _, rows = read_rows(os.path.join(directory, "index.csv"))
    times, snaps = [], []
    for row in rows:
        geom, t = read_snapshot(os.path.join(directory, row[1]))
        times.append(t)
        snaps.append(geom)
    events = []
    ev_path = os.path.join(directory, "events.json")
    if os.path.exists(ev_path):
        with open(ev_path, "r", encoding="utf-8") as f:
            for rec in json.load(f):
                loc = rec["location"]
                events.append(SingularEvent(
                    rec["time"], rec["kind"],
                    None if loc is None else np.array(loc), rec["info"]))
    meta = {}
    meta_path = os.path.join(directory, "meta.json")
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    kind = meta.pop("kind", None)
    if kind is None:
        kind = {ParametricCurve: "curve", AxisymProfile: "axisym",
                LevelSetField: "level_set"}[type(snaps[0])]
    return FlowHistory(kind, np.array(times), snaps, events, meta)


def _write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")


# ---------------------------------------------------------------------------
# diagnostic report files (schemas fixed; floats %.17g)


def write_andrews_csv(path: str, reports) -> None:
    """Rows (t, alpha_int, alpha_ext, argmin coordinates of alpha_int)."""
    rows = []
    for rep in reports:
        arg = rep.argmin_int
        coords = " ".join(fmt(v) for v in arg) if arg is not None else ""
        rows.append((rep.t, rep.alpha_int, rep.alpha_ext, coords))
    write_rows(path, ("t", "alpha_int", "alpha_ext", "argmin"), rows)


def write_density_csv(path: str, report) -> None:
    write_rows(path, ("r", "theta", "err"),
               list(zip(report.radii, report.theta, report.errors)))


def write_curvature_csv(path: str, stats_rows) -> None:
    write_rows(path, ("t", "min_H", "max_H", "min_lambda1_over_H",
                      "max_absA"), stats_rows)


def write_convexity_csv(path: str, profile) -> None:
    write_rows(path, ("H0", "eps"), list(zip(profile.x, profile.y)))


def write_cylindrical_csv(path: str, profile) -> None:
    rows = [(d, c, str(int(n))) for d, c, n in
            zip(profile.x, profile.y, profile.n_samples)]
    write_rows(path, ("delta", "closeness", "n_samples"), rows)


def write_curvature_estimate_csv(path: str, profile) -> None:
    write_rows(path, ("sigma", "C0"), list(zip(profile.x, profile.y)))


def write_classification_json(path: str, cls) -> None:
    _write_json(path, {"kind": cls.kind, "j": cls.j,
                       "residual": float(cls.residual),
                       "lambda_used": float(cls.lambda_used)})


# ---------------------------------------------------------------------------
# SVG contour sheets


def _panel_path(points, lo, span, ox, oy, side) -> str:
    q = (np.asarray(points) - lo) / span
    q = q * (side - 20.0) + 10.0
    xs = ox + q[:, 0]
    ys = oy + (side - q[:, 1])
    steps = [f"{'M' if i == 0 else 'L'}{xs[i]:.2f},{ys[i]:.2f}"
             for i in range(len(xs))]
    return "".join(steps) + "Z"


def _geometry_panels(geometry):
    """(label, list of closed polylines) per 2-D projection panel."""
    if isinstance(geometry, ParametricCurve):
        return [("xy", [geometry.points])]
    if isinstance(geometry, AxisymProfile):
        top = np.stack([geometry.x, geometry.r], axis=-1)
        bot = np.stack([geometry.x[::-1], -geometry.r[::-1]], axis=-1)
        return [("axis section", [np.vstack([top, bot])])]
    if isinstance(geometry, LevelSetField) and geometry.dim == 2:
        return [("xy", [c.points for c in extract_curves(geometry)])]
    if isinstance(geometry, LevelSetField) and geometry.dim == 3:
        panels = []
        for axis, name in ((2, "xy"), (1, "xz"), (0, "yz")):
            k = geometry.shape[axis] // 2
            sl = [slice(None)] * 3
            sl[axis] = k
            vals = geometry.values[tuple(sl)]
            keep = [a for a in range(3) if a != axis]
            sub = LevelSetField(geometry.origin[keep], geometry.spacing,
                                vals)
            try:
                polys = [c.points for c in extract_curves(sub)]
            except Exception:
                polys = []
            panels.append((name, polys))
        return panels
    raise TypeError(f"cannot draw {type(geometry).__name__}")


def snapshot_svg(path: str, geometry, t: float) -> None:
    """One-file contour sheet: 2-D boundary projections at time t."""
    panels = _geometry_panels(geometry)
    side = 300.0
    pad = 24.0
    width = pad + len(panels) * (side + pad)
    height = side + 2 * pad + 18.0
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{width:.0f}" height="{height:.0f}" '
             f'viewBox="0 0 {width:.0f} {height:.0f}">',
             f'<rect width="{width:.0f}" height="{height:.0f}" '
             f'fill="#ffffff"/>',
             f'<text x="{pad:.0f}" y="{pad - 8:.0f}" '
             f'font-family="monospace" font-size="12">t = {fmt(t)}</text>']
    for i, (label, polys) in enumerate(panels):
        ox = pad + i * (side + pad)
        oy = pad
        parts.append(f'<rect x="{ox:.0f}" y="{oy:.0f}" width="{side:.0f}" '
                     f'height="{side:.0f}" fill="none" stroke="#888888"/>')
        pts_all = [np.asarray(p) for p in polys if len(p)]
        if pts_all:
            allp = np.vstack(pts_all)
            lo = allp.min(axis=0)
            hi = allp.max(axis=0)
            span = float(max((hi - lo).max(), 1e-9))
            for p in pts_all:
                parts.append(f'<path d="{_panel_path(p, lo, span, ox, oy, side)}" '
                             f'fill="none" stroke="#003366" '
                             f'stroke-width="1.2"/>')
        parts.append(f'<text x="{ox:.0f}" y="{oy + side + 14:.0f}" '
                     f'font-family="monospace" font-size="11">{label}</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(parts) + "\n")
