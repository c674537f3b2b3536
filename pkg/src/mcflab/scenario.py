"""Config-driven scenario runs and suite aggregation.

A scenario is one TOML file (sections [scenario], [geometry], [engine],
[stops], [diagnostics], [outputs]) naming a starting region, an evolution
engine, and the diagnostics to write next to the exported history. A suite
is a TOML manifest listing scenario files; it runs them back to back,
pools the computed histories for the corpus-level curvature profiler, and
emits one Markdown + JSON summary.

All outputs are deterministic for a fixed config and seed: rerunning
reproduces every CSV, JSON, and SVG byte for byte, which is why reports
carry no wall-clock data.

Exit codes: 0 success, 2 invalid configuration or empty manifest, 3
aborted or unstable evolution, 4 violated assertion under strict mode (or
a failed gate criterion in a suite that enables them).
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import io as mio
from .density import monotonicity_profile
from .diagnostics import andrews_constants, boundary_sample, curvature_stats
from .engines import FlowAbort, StepParams, evolve
from .exact import (CylinderFlow, GrimReaperFlow, PlaneFlow, SphereFlow,
                    dumbbell_profile)
from .geometry import (AxisymProfile, LevelSetField, ParametricCurve,
                       SpaceTimePoint, extract_curves, extract_surface,
                       make_grid)
from .singularity import (DEFAULT_LAMBDAS, classify_tangent_flow,
                          convexity_profile, curvature_estimate_profiler,
                          cylindrical_profile)
from .translator import solve_translator

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_STRICT = 4


class ConfigError(ValueError):
    """Invalid scenario or manifest configuration; messages name the key."""


_GEOMETRY_KEYS = {
    "circle": {"radius", "center"},
    "sphere": {"radius"},
    "cylinder": {"radius", "j"},
    "plane": {"dim"},
    "grim_reaper": {"width"},
    "dumbbell": {"neck", "bulb", "separation"},
    "two_circles": {"radius", "gap"},
    "disc": {"radius"},
}
_ENGINE_KINDS = {"level_set", "curve", "axisym", "exact", "translator"}
_ENGINE_KEYS = {"kind", "spacing", "padding", "vertices", "nodes", "cfl",
                "dt", "t_end", "snapshots", "reinit_period", "eps"}
_STOP_KEYS = {"stop_on_extinction", "max_absA_h"}
_DIAG_KEYS = {"radius", "radius_tol", "andrews", "curvature", "density",
              "density_rho", "convexity", "cylindrical", "k", "beta",
              "deltas", "classify", "lambdas"}
_OUTPUT_KEYS = {"history", "svg"}


def _positive(section: str, table: dict, key: str) -> None:
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
        raise ConfigError(f"{section}.{key} must be positive")


@dataclass
class ScenarioConfig:
    """One validated scenario: what to evolve, how, and what to report."""

    name: str
    seed: int
    geometry: dict
    engine: dict
    stops: dict
    diagnostics: dict
    outputs: dict

    @classmethod
    def from_toml(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = tomllib.loads(path.read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"{path.name}: {e}")
        known = {"scenario", "geometry", "engine", "stops", "diagnostics",
                 "outputs"}
        for sec in data:
            if sec not in known:
                raise ConfigError(f"unknown section [{sec}]")

        head = data.get("scenario", {})
        name = str(head.get("name", path.stem))
        seed = head.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigError("scenario.seed must be a non-negative integer")

        geo = dict(data.get("geometry", {}))
        kind = geo.pop("kind", None)
        if kind not in _GEOMETRY_KEYS:
            raise ConfigError("geometry.kind must be one of "
                              + ", ".join(sorted(_GEOMETRY_KEYS)))
        for key in geo:
            if key not in _GEOMETRY_KEYS[kind]:
                raise ConfigError(f"unknown key geometry.{key}")
            if key == "center":
                if (not isinstance(geo[key], list)
                        or not all(isinstance(v, (int, float))
                                   for v in geo[key])):
                    raise ConfigError("geometry.center must be a list of "
                                      "coordinates")
            elif key in ("j", "dim"):
                if not isinstance(geo[key], int) or geo[key] < 1:
                    raise ConfigError(f"geometry.{key} must be a positive "
                                      "integer")
            else:
                _positive("geometry", geo, key)
        geo["kind"] = kind

        eng = dict(data.get("engine", {}))
        ekind = eng.get("kind")
        if ekind not in _ENGINE_KINDS:
            raise ConfigError("engine.kind must be one of "
                              + ", ".join(sorted(_ENGINE_KINDS)))
        for key in eng:
            if key not in _ENGINE_KEYS:
                raise ConfigError(f"unknown key engine.{key}")
        for key in ("spacing", "padding", "cfl", "dt", "t_end"):
            if key in eng:
                _positive("engine", eng, key)
        for key in ("vertices", "nodes", "reinit_period"):
            if key in eng and (isinstance(eng[key], bool)
                               or not isinstance(eng[key], int)
                               or eng[key] < 1):
                raise ConfigError(f"engine.{key} must be a positive integer")
        if ekind != "translator" and "t_end" not in eng:
            raise ConfigError("engine.t_end is required")
        if ekind == "level_set" and "spacing" not in eng:
            raise ConfigError("engine.spacing is required for the grid "
                              "engine")
        if ekind == "translator":
            eps = eng.get("eps", [0.2])
            if isinstance(eps, (int, float)) and not isinstance(eps, bool):
                eps = [eps]
            if (not isinstance(eps, list) or not eps
                    or not all(isinstance(e, (int, float))
                               and not isinstance(e, bool) and e > 0
                               for e in eps)):
                raise ConfigError("engine.eps must be positive")
            eng["eps"] = [float(e) for e in eps]
        snaps = eng.get("snapshots", 20)
        if isinstance(snaps, bool):
            raise ConfigError("engine.snapshots must be a count or a list "
                              "of times")
        if isinstance(snaps, int):
            if snaps < 1:
                raise ConfigError("engine.snapshots must be positive")
        elif isinstance(snaps, list):
            if not snaps or not all(isinstance(t, (int, float)) and t > 0
                                    for t in snaps):
                raise ConfigError("engine.snapshots times must be positive")
            if "t_end" in eng and max(snaps) > eng["t_end"] + 1e-15:
                raise ConfigError("engine.snapshots exceed engine.t_end")
        else:
            raise ConfigError("engine.snapshots must be a count or a list "
                              "of times")

        stops = dict(data.get("stops", {}))
        for key in stops:
            if key not in _STOP_KEYS:
                raise ConfigError(f"unknown key stops.{key}")
        if "max_absA_h" in stops:
            _positive("stops", stops, "max_absA_h")

        diag = dict(data.get("diagnostics", {}))
        for key in diag:
            if key not in _DIAG_KEYS:
                raise ConfigError(f"unknown key diagnostics.{key}")
        for key in ("radius_tol", "density_rho", "beta"):
            if key in diag:
                _positive("diagnostics", diag, key)
        if "k" in diag and (isinstance(diag["k"], bool)
                            or not isinstance(diag["k"], int)
                            or diag["k"] < 2):
            raise ConfigError("diagnostics.k must be an integer >= 2")
        for key in ("deltas", "lambdas"):
            if key in diag:
                vals = diag[key]
                if (not isinstance(vals, list) or not vals
                        or not all(isinstance(v, (int, float))
                                   and not isinstance(v, bool) and v > 0
                                   for v in vals)):
                    raise ConfigError(f"diagnostics.{key} must be a list of "
                                      "positive numbers")

        outputs = dict(data.get("outputs", {}))
        for key in outputs:
            if key not in _OUTPUT_KEYS:
                raise ConfigError(f"unknown key outputs.{key}")

        return cls(name, int(seed), geo, eng, stops, diag, outputs)


# ---------------------------------------------------------------------------
# building the initial state


def _exact_flow(geo: dict):
    kind = geo["kind"]
    if kind in ("circle", "disc"):
        return SphereFlow(geo.get("radius", 1.0), 2, geo.get("center"))
    if kind == "sphere":
        return SphereFlow(geo.get("radius", 1.0), 3)
    if kind == "cylinder":
        return CylinderFlow(geo.get("radius", 1.0), 3, int(geo.get("j", 1)))
    if kind == "plane":
        return PlaneFlow(int(geo.get("dim", 2)))
    if kind == "grim_reaper":
        return GrimReaperFlow(geo.get("width", 1.0))
    raise ConfigError(f"geometry.{kind} has no closed form")


def _build_initial(cfg: ScenarioConfig):
    """Returns (object, mode): the initial state for a numeric run, the
    flow itself for an exact run, or the domain field for a translator."""
    geo, eng = cfg.geometry, cfg.engine
    kind, ekind = geo["kind"], eng["kind"]
    if ekind == "translator":
        if kind not in ("disc", "circle"):
            raise ConfigError("engine.translator needs geometry.kind = disc")
        h = float(eng.get("spacing", 1.0 / 128.0))
        R = float(geo.get("radius", 1.0))
        origin, shape = make_grid((0.0, 0.0), 1.05 * R, h)
        return SphereFlow(R, 2).level_set(0.0, origin, h, shape), "translator"
    if ekind == "exact":
        return _exact_flow(geo), "exact"
    if ekind == "level_set":
        h = float(eng["spacing"])
        pad = float(eng.get("padding", 0.25))
        if kind in ("circle", "sphere"):
            flow = _exact_flow(geo)
            origin, shape = make_grid(flow.center, flow.R0 + pad, h)
            return flow.level_set(0.0, origin, h, shape), "numeric"
        if kind == "two_circles":
            R = float(geo.get("radius", 0.4))
            gap = float(geo.get("gap", 0.4))
            cx = R + gap / 2.0
            origin, shape = make_grid((0.0, 0.0), cx + R + pad, h)
            xs = origin[0] + h * np.arange(shape[0])
            ys = origin[1] + h * np.arange(shape[1])
            X, Y = np.meshgrid(xs, ys, indexing="ij")
            phi = np.minimum(np.hypot(X - cx, Y) - R,
                             np.hypot(X + cx, Y) - R)
            return LevelSetField(origin, h, phi), "numeric"
        raise ConfigError(f"geometry.{kind} does not support "
                          "engine.level_set")
    if ekind == "curve":
        if kind != "circle":
            raise ConfigError("engine.curve supports geometry.circle only")
        flow = _exact_flow(geo)
        return flow.curve(0.0, n=int(eng.get("vertices", 512))), "numeric"
    if ekind == "axisym":
        if kind == "sphere":
            return (SphereFlow(geo.get("radius", 1.0), 3)
                    .axisym(0.0, n=int(eng.get("nodes", 513))), "numeric")
        if kind == "dumbbell":
            return (dumbbell_profile(geo.get("neck", 0.3),
                                     geo.get("bulb", 1.0),
                                     geo.get("separation", 2.4), 3,
                                     n=int(eng.get("nodes", 513))),
                    "numeric")
        raise ConfigError(f"geometry.{kind} does not support engine.axisym")
    raise ConfigError(f"engine.{ekind} is not runnable")


def _step_params(cfg: ScenarioConfig, initial) -> StepParams:
    eng, stops = cfg.engine, cfg.stops
    cfl = float(eng.get("cfl", 0.4))
    if "dt" in eng:
        # honor an explicit step by converting it to the equivalent CFL
        # number on the initial mesh
        dt = float(eng["dt"])
        if isinstance(initial, LevelSetField):
            cfl = dt * 2.0 * initial.dim / initial.spacing ** 2
        elif isinstance(initial, AxisymProfile):
            core = initial.r[1:-1] if initial.ends == "capped" else initial.r
            lim = min(initial.dx ** 2,
                      float(core.min()) ** 2 / max(initial.dim - 2, 1))
            cfl = dt / (0.5 * lim)
        else:
            seg = np.linalg.norm(np.roll(initial.points, -1, axis=0)
                                 - initial.points, axis=1).min()
            cfl = dt * 4.0 / seg ** 2
    kw = {"cfl": cfl, "t_end": float(eng["t_end"])}
    if "reinit_period" in eng:
        kw["reinit_period"] = int(eng["reinit_period"])
    if "stop_on_extinction" in stops:
        kw["stop_on_extinction"] = bool(stops["stop_on_extinction"])
    if "max_absA_h" in stops:
        kw["max_absA_h"] = float(stops["max_absA_h"])
    return StepParams(**kw)


def _snapshot_times(eng: dict) -> list:
    snaps = eng.get("snapshots", 20)
    t_end = float(eng["t_end"])
    if isinstance(snaps, int):
        return [float(t) for t in np.linspace(0.0, t_end, snaps + 1)[1:]]
    return sorted(float(t) for t in snaps)


def _refined_times(times, t1: float) -> list:
    """Twice the cadence packed into the last fifth before the stop."""
    extra = np.linspace(0.8 * t1, 0.999 * t1, max(len(times), 4))
    return sorted(set(float(t) for t in times) | set(float(t)
                                                     for t in extra))


# ---------------------------------------------------------------------------
# diagnostics over a finished history


def _mean_radius(geom, center) -> float:
    center = np.asarray(center, dtype=float)
    if isinstance(geom, ParametricCurve):
        return float(np.linalg.norm(geom.points - center, axis=1).mean())
    if isinstance(geom, AxisymProfile):
        return float(geom.r.max())
    if geom.dim == 2:
        pts = np.concatenate([c.points for c in extract_curves(geom)])
        return float(np.linalg.norm(pts - center, axis=1).mean())
    verts, _ = extract_surface(geom)
    return float(np.linalg.norm(verts - center, axis=1).mean())


def _resolution(hist) -> float:
    if hist.snapshots is None:
        return 0.0
    geom = hist.snapshots[0]
    if isinstance(geom, AxisymProfile):
        return geom.dx
    if isinstance(geom, LevelSetField):
        return geom.spacing
    seg = np.roll(geom.points, -1, axis=0) - geom.points
    return float(np.linalg.norm(seg, axis=1).mean())


def _terminal_point(hist):
    """Space-time anchor for density and classification diagnostics: the
    recorded singular event, pushed forward by the remaining life of a
    marginal neck when the event is a pinch; None when the run saw none."""
    if not hist.events:
        exact = hist.exact
        if exact is not None and hasattr(exact, "center") and \
                np.isfinite(getattr(exact, "extinction_time", np.inf)):
            return SpaceTimePoint(np.asarray(exact.center, dtype=float),
                                  float(exact.extinction_time))
        return None
    ev = hist.events[-1]
    t0 = float(ev.time)
    if ev.location is None:
        geom = hist.snapshots[-1]
        if isinstance(geom, ParametricCurve):
            loc = geom.points.mean(axis=0)
        elif isinstance(geom, AxisymProfile):
            loc = np.zeros(geom.dim)
            loc[0] = float(geom.x[int(np.argmax(geom.r))])
        else:
            loc = np.asarray(geom.origin) \
                + geom.spacing * (np.asarray(geom.shape) - 1) / 2.0
    else:
        raw = np.atleast_1d(np.asarray(ev.location, dtype=float))
        geom = hist.snapshots[-1]
        dim = geom.dim if hasattr(geom, "dim") else raw.size
        loc = np.zeros(dim)
        loc[:raw.size] = raw
    if ev.kind == "neckpinch":
        r0 = float(ev.info.get("radius", 0.0))
        t0 += 0.5 * r0 * r0
    return SpaceTimePoint(loc, t0)


def _check(report, name, value, bound, tol, units, ok) -> None:
    report["checks"].append({"name": name, "value": float(value),
                             "target": float(bound), "tol": float(tol),
                             "units": units, "ok": bool(ok)})
    if not ok:
        report["violations"].append(
            f"{name}: {value:.6g} vs {bound:.6g} +- {tol:.3g} [{units}]")


def _run_diagnostics(cfg: ScenarioConfig, hist, dest: Path, report) -> None:
    diag = cfg.diagnostics
    geo_kind = cfg.geometry["kind"]
    revolve = 4 if hist.kind == "axisym" else None

    want_radius = diag.get("radius", geo_kind in ("circle", "sphere"))
    if want_radius and geo_kind in ("circle", "sphere"):
        flow = _exact_flow(cfg.geometry)
        tol = float(diag.get("radius_tol", 5.0e-3))
        rows, worst = [], 0.0
        for t in hist.times:
            if t >= flow.extinction_time:
                continue
            measured = _mean_radius(hist.snapshot_at(float(t)), flow.center)
            expected = float(flow.radius(float(t)))
            worst = max(worst, abs(measured - expected))
            rows.append((float(t), measured, expected, tol))
        mio.write_rows(str(dest / "radius.csv"),
                       ("t", "radius", "expected", "tol"), rows)
        _check(report, "radius law (worst deviation)", worst, 0.0, tol,
               "length", worst <= tol)

    if diag.get("andrews", False):
        reports = []
        for t in hist.times:
            smp = boundary_sample(hist, float(t), revolve=revolve)
            reports.append(andrews_constants(smp, seed=cfg.seed))
        mio.write_andrews_csv(str(dest / "andrews.csv"), reports)
        a = np.array([r.alpha_int for r in reports])
        if a.size > 1 and np.all(a > 0) and np.all(np.isfinite(a)):
            worst = float((a[1:] / a[:-1]).min())
            _check(report, "interior noncollapsing ratio between snapshots",
                   worst, 0.95, 0.0, "dimensionless", worst >= 0.95)

    if diag.get("curvature", False):
        mio.write_curvature_csv(str(dest / "curvature.csv"),
                                curvature_stats(hist))

    if diag.get("density", False):
        cen = _terminal_point(hist)
        if cen is None:
            report["notes"].append("density skipped: no singular event to "
                                   "anchor the profile")
        else:
            rho = float(diag.get("density_rho", hist.length_scale()))
            tau = cen.t - np.asarray(hist.times)
            rr = np.sqrt(tau[tau > 0])
            rr = np.unique(rr[rr >= 5.0 * _resolution(hist)])
            if rr.size > 16:
                rr = rr[np.linspace(0, rr.size - 1, 16).astype(int)]
            if rr.size < 2:
                report["notes"].append("density skipped: too few usable "
                                       "radii")
            else:
                rep = monotonicity_profile(hist, cen, rho, radii=rr)
                mio.write_density_csv(str(dest / "density.csv"), rep)
                _check(report, "density monotone in radius",
                       float(rep.monotone), 1.0, 0.0, "boolean",
                       rep.monotone)

    if diag.get("convexity", False):
        prof = convexity_profile(hist, scenario=cfg.name)
        mio.write_convexity_csv(str(dest / "convexity.csv"), prof)
        if prof.notes:
            report["notes"].append(f"convexity: {prof.notes}")

    if diag.get("cylindrical", False):
        prof = cylindrical_profile(hist, int(diag.get("k", 2)),
                                   float(diag.get("beta", 0.5)),
                                   diag.get("deltas", [0.05, 0.1, 0.2]),
                                   scenario=cfg.name)
        mio.write_cylindrical_csv(str(dest / "cylindrical.csv"), prof)
        if prof.notes:
            report["notes"].append(f"cylindrical: {prof.notes}")

    if diag.get("classify", False):
        cen = _terminal_point(hist)
        if cen is None:
            report["notes"].append("classification skipped: no singular "
                                   "event to anchor")
        else:
            lams = [float(v) for v in diag.get("lambdas", DEFAULT_LAMBDAS)]
            cls = classify_tangent_flow(hist, cen, lams)
            mio.write_classification_json(str(dest / "classification.json"),
                                          cls)
            report["classification"] = {
                "kind": cls.kind, "j": cls.j,
                "residual": float(cls.residual),
                "lambda_used": float(cls.lambda_used),
                "label": cls.label(),
            }


def _run_translator(cfg: ScenarioConfig, field, dest: Path, report) -> None:
    R = float(cfg.geometry.get("radius", 1.0))
    xs = field.origin[0] + field.spacing * np.arange(field.values.shape[0])
    ys = field.origin[1] + field.spacing * np.arange(field.values.shape[1])
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    exact = 0.5 * (R * R - X * X - Y * Y)
    rows, sups = [], []
    for eps in cfg.engine["eps"]:
        sol = solve_translator(field, eps)
        sup = float(np.abs(sol.values - exact)[sol.mask].max())
        sups.append(sup)
        rows.append((float(eps), float(sol.residual),
                     str(int(sol.iterations)), sup))
    mio.write_rows(str(dest / "arrival.csv"),
                   ("eps", "residual", "iterations", "sup_error_vs_disc"),
                   rows)
    if len(sups) > 1:
        drops = all(b < a for a, b in zip(sups[:-1], sups[1:]))
        _check(report, "arrival error decreasing over the eps sweep",
               float(drops), 1.0, 0.0, "boolean", drops)


# ---------------------------------------------------------------------------
# scenario and suite drivers


def _write_report(dest: Path, report: dict, code: int) -> None:
    report["exit"] = code
    (dest / "report.json").write_text(
        json.dumps(report, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")
    lines = [f"# scenario {report['name']}", "",
             f"- geometry: {report.get('geometry', '?')}",
             f"- engine: {report.get('engine', '?')}",
             f"- seed: {report['seed']}",
             f"- exit: {code}", ""]
    if report.get("events"):
        lines.append("events: " + "; ".join(report["events"]))
        lines.append("")
    if report["checks"]:
        lines += ["| check | value | target | tol | units | ok |",
                  "|---|---|---|---|---|---|"]
        for c in report["checks"]:
            lines.append(f"| {c['name']} | {c['value']:.6g} | "
                         f"{c['target']:.6g} | {c['tol']:.3g} | "
                         f"{c['units']} | {'yes' if c['ok'] else 'NO'} |")
        lines.append("")
    if "classification" in report:
        cl = report["classification"]
        lines.append(f"classification: {cl['label']} (residual "
                     f"{cl['residual']:.6g}, rescale {cl['lambda_used']:g})")
        lines.append("")
    if report["violations"]:
        lines.append("violations:")
        lines += [f"- {v}" for v in report["violations"]]
        lines.append("")
    if report["notes"]:
        lines.append("notes:")
        lines += [f"- {n}" for n in report["notes"]]
        lines.append("")
    (dest / "report.md").write_text("\n".join(lines), encoding="utf-8")


def run_scenario(cfg, out_dir, strict: bool = False):
    """Run one scenario into out_dir/<name>; returns (exit code, report,
    history or None). Raises ConfigError for an invalid configuration."""
    if not isinstance(cfg, ScenarioConfig):
        cfg = ScenarioConfig.from_toml(cfg)
    dest = Path(out_dir) / cfg.name
    dest.mkdir(parents=True, exist_ok=True)
    report = {"name": cfg.name, "seed": cfg.seed,
              "geometry": cfg.geometry["kind"],
              "engine": cfg.engine["kind"],
              "checks": [], "violations": [], "events": [], "notes": []}

    built, mode = _build_initial(cfg)
    hist = None
    if mode == "translator":
        _run_translator(cfg, built, dest, report)
    elif mode == "exact":
        hist = built.history(_snapshot_times(cfg.engine))
        report["notes"].append("closed-form flow: history is analytic, no "
                               "snapshot export")
        _run_diagnostics(cfg, hist, dest, report)
    else:
        params = _step_params(cfg, built)
        times = _snapshot_times(cfg.engine)
        try:
            hist = evolve(built, params, times)
            if hist.events or hist.meta.get("max_absA_h", 0.0) > 0.25:
                refined = _refined_times(times, float(hist.t1))
                hist = evolve(_build_initial(cfg)[0], params, refined)
                report["notes"].append("snapshot cadence doubled near the "
                                       "stop")
        except FlowAbort as e:
            report["violations"].append(f"evolution aborted: {e}")
            _write_report(dest, report, EXIT_ABORT)
            return EXIT_ABORT, report, None
        report["events"] = [f"{ev.kind} at t={ev.time:.6g}"
                            for ev in hist.events]
        report["stop"] = str(hist.meta.get("stop", ""))
        _run_diagnostics(cfg, hist, dest, report)
        if cfg.outputs.get("history", True):
            mio.write_history(str(dest / "history"), hist,
                              svg=bool(cfg.outputs.get("svg", True)))
    code = EXIT_STRICT if (strict and report["violations"]) else EXIT_OK
    _write_report(dest, report, code)
    return code, report, hist


def run_suite(manifest, out_root, criteria=None, strict=None) -> int:
    """Run every scenario in a manifest and write one aggregated summary.

    The manifest is TOML with a [suite] table: runs (list of scenario
    files, relative paths resolved against the manifest), and optional
    name, strict, criteria flags. Keyword arguments override the flags.
    Returns the worst exit code. With criteria enabled, the release gate
    runs after the scenarios and failed criteria count as violations.
    """
    manifest = Path(manifest)
    try:
        data = tomllib.loads(manifest.read_text(encoding="utf-8"))
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise ConfigError(f"{manifest.name}: {e}")
    head = data.get("suite", {})
    runs = head.get("runs", [])
    if not runs:
        raise ConfigError("suite.runs is empty")
    do_criteria = bool(head.get("criteria", False)) if criteria is None \
        else bool(criteria)
    do_strict = bool(head.get("strict", False)) if strict is None \
        else bool(strict)
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)

    worst = EXIT_OK
    entries = []
    pool = []
    for entry in runs:
        cfg_path = Path(entry)
        if not cfg_path.is_absolute():
            cfg_path = manifest.parent / cfg_path
        try:
            code, rep, hist = run_scenario(cfg_path, out_root,
                                           strict=do_strict)
        except ConfigError as e:
            code, rep, hist = EXIT_CONFIG, {"name": cfg_path.stem,
                                            "error": str(e)}, None
        worst = max(worst, code)
        entries.append({"name": rep.get("name", cfg_path.stem),
                        "exit": code,
                        "violations": rep.get("violations", []),
                        "error": rep.get("error", "")})
        if hist is not None and hist.snapshots is not None:
            pool.append(hist)

    if pool:
        prof = curvature_estimate_profiler(pool, [0.5, 1.0, 2.0])
        mio.write_curvature_estimate_csv(
            str(out_root / "curvature_estimate.csv"), prof)

    crit_rows = []
    if do_criteria:
        from .acceptance import run_all
        results = run_all()
        for res in results:
            crit_rows.append({"number": res.number, "title": res.title,
                              "passed": res.passed,
                              "checks": [c.line() for c in res.checks]})
        if not all(r.passed for r in results):
            worst = max(worst, EXIT_STRICT)

    summary = {"name": str(head.get("name", manifest.stem)),
               "exit": worst, "scenarios": entries}
    if crit_rows:
        summary["criteria"] = crit_rows
    (out_root / "suite_report.json").write_text(
        json.dumps(summary, indent=1, sort_keys=True) + "\n",
        encoding="utf-8")

    lines = [f"# suite {summary['name']}", "", f"exit: {worst}", ""]
    for e in entries:
        tag = "ok " if e["exit"] == EXIT_OK else "FAIL"
        lines.append(f"- {tag} {e['name']} (exit {e['exit']})")
        lines += [f"    - {v}" for v in e["violations"]]
        if e["error"]:
            lines.append(f"    - config error: {e['error']}")
    if crit_rows:
        lines += ["", "## release gate", ""]
        for row in crit_rows:
            tag = "PASS" if row["passed"] else "FAIL"
            lines.append(f"- [{tag}] criterion {row['number']}: "
                         f"{row['title']}")
            lines += [f"    - {c}" for c in row["checks"]]
    lines.append("")
    (out_root / "suite_report.md").write_text("\n".join(lines),
                                              encoding="utf-8")
    return worst
