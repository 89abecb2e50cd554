"""Command-line entry point.

Exit codes: 0 success, 1 convergence or threshold failure, 2 input error.
Config files are JSON objects; see the README for the recognised keys.
"""
import argparse
import csv
import io
import json
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, fields

import numpy as np

from . import __version__
from .core import MassSystem
from .errors import BadParams, CloseApproach, CollisionError, CollisionFloor, OrbitForgeError, SchemaError
from .kepler import GAMMA, marchal_table
from .minimizer import (MinimizeOptions, _threads, discrete_el_residual, hat_a2,
                        minimize_fixed_ends, minimize_p12, multistart_loop)
from .orbitio import read_orbit, write_orbit
from .paths import FourierLoop, QuadratureSpec, action
from .symmetry import preset_group
from .verification import p12_hessian, planarity, verify_loop

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

DEFAULT_THRESHOLDS = {
    "closure_error": 1e-3,
    "energy_drift": 1e-8,
    "lagrange_jacobi_max": 1e-4,
    "invariance_defect": 1e-10,
    "min_distance": 0.0,       # lower bound
    "el_residual": 1e-4,
}

_KEYS = {
    "problem", "n", "masses", "dim", "period", "symmetry", "modes", "samples",
    "seeds", "seed", "restarts", "amplitude", "options", "x_initial", "x_final",
    "duration", "nodes", "u", "thresholds", "rho",
}
_OPTION_KEYS = {f.name for f in fields(MinimizeOptions)}


# ------------------------------------------------------------------ config

class Config(dict):
    """Parsed config that remembers the source text for line diagnostics."""

    def __init__(self, data, source="<config>", text=""):
        super().__init__(data)
        self.source = source
        self.text = text

    def line_of(self, key):
        m = re.search(r'"%s"\s*:' % re.escape(key), self.text)
        return self.text.count("\n", 0, m.start()) + 1 if m else None

    def fail(self, key, msg):
        line = self.line_of(key)
        where = f"{self.source}:{line}" if line else self.source
        raise BadParams(f"{where}: field '{key}': {msg}")

    def number(self, key, default=None, positive=False):
        if key not in self:
            if default is None:
                self.fail(key, "required")
            return default
        v = self[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(key, f"expected a number, got {v!r}")
        if positive and not v > 0:
            self.fail(key, f"must be positive, got {v!r}")
        return v

    def integer(self, key, default=None, minimum=1):
        v = self.number(key, default)
        if int(v) != v or v < minimum:
            self.fail(key, f"expected an integer >= {minimum}, got {v!r}")
        return int(v)


def parse_config(text, source="<config>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParams(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise BadParams(f"{source}:1: config must be a JSON object")
    cfg = Config(data, source, text)
    for key in data:
        if key not in _KEYS:
            cfg.fail(key, "unknown field")
    problem = data.get("problem", "loop")
    if problem not in ("loop", "fixed_ends", "p12"):
        cfg.fail("problem", f"expected loop, fixed_ends or p12, got {problem!r}")
    cfg["problem"] = problem
    opts = data.get("options", {})
    if not isinstance(opts, dict):
        cfg.fail("options", "expected an object")
    for key in opts:
        if key not in _OPTION_KEYS:
            cfg.fail(key, "unknown minimizer option")
    try:
        cfg["options"] = MinimizeOptions(**opts)
    except (BadParams, TypeError) as exc:
        cfg.fail("options", str(exc))
    th = data.get("thresholds", {})
    if not isinstance(th, dict) or any(k not in DEFAULT_THRESHOLDS for k in th):
        cfg.fail("thresholds", f"keys must be among {sorted(DEFAULT_THRESHOLDS)}")
    cfg["thresholds"] = {**DEFAULT_THRESHOLDS, **th}
    if problem == "loop":
        _parse_loop(cfg)
    elif problem == "fixed_ends":
        _parse_fixed_ends(cfg)
    else:
        _parse_p12(cfg)
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


def _parse_masses(cfg, default_n=None):
    dim = cfg.integer("dim", 3, minimum=1)
    if "masses" in cfg:
        masses = cfg["masses"]
        if not isinstance(masses, list) or not masses or not all(
                isinstance(m, (int, float)) and not isinstance(m, bool) and m > 0 for m in masses):
            cfg.fail("masses", "expected a non-empty list of positive numbers")
        n = cfg.integer("n", len(masses), minimum=2)
        if n != len(masses):
            cfg.fail("n", f"n={n} but {len(masses)} masses given")
    else:
        n = cfg.integer("n", default_n, minimum=2)
        masses = [1.0] * n
    try:
        return MassSystem(tuple(float(m) for m in masses), dim)
    except BadParams as exc:
        cfg.fail("masses", str(exc))


def _parse_symmetry(cfg, ms):
    spec = cfg.get("symmetry")
    if spec is None:
        return None, None
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, dict) or "name" not in spec:
        cfg.fail("symmetry", "expected a preset name or {\"name\": ..., ...}")
    params = {k: v for k, v in spec.items() if k != "name"}
    if set(params) - {"n"}:
        cfg.fail("symmetry", f"unknown preset parameters {sorted(set(params) - {'n'})}")
    n = params.get("n", ms.n)
    if n != ms.n:
        cfg.fail("symmetry", f"preset {spec['name']!r} is for n={n} bodies, config has n={ms.n}")
    try:
        G = preset_group(spec["name"], n, ms.dim)
    except BadParams as exc:
        cfg.fail("symmetry", f"{exc} (config has n={ms.n}, dim={ms.dim})")
    if G.permutes_unequal_masses(ms):
        cfg.fail("symmetry", f"{G.name} permutes bodies of unequal mass")
    return G, {"name": spec["name"], "n": ms.n}


def _parse_loop(cfg):
    ms = _parse_masses(cfg)
    cfg["mass_system"] = ms
    cfg["group"], cfg["symmetry_meta"] = _parse_symmetry(cfg, ms)
    cfg.number("period", positive=True)
    modes = cfg.integer("modes", 24)
    samples = cfg.integer("samples", 256)
    if samples < 4 * modes:
        cfg.fail("samples", f"need samples >= 4 * modes = {4 * modes}")
    cfg["modes"], cfg["samples"] = modes, samples
    cfg["amplitude"] = cfg.number("amplitude", 1.0, positive=True)
    if "seeds" in cfg:
        seeds = cfg["seeds"]
        if not isinstance(seeds, list) or not seeds or not all(
                isinstance(s, int) and not isinstance(s, bool) and s >= 0 for s in seeds):
            cfg.fail("seeds", "expected a non-empty list of non-negative integers")
    else:
        seed = cfg.integer("seed", 0, minimum=0) if "seed" in cfg else 0
        restarts = cfg.integer("restarts", 8)
        cfg["seeds"] = list(range(seed, seed + restarts))


def _parse_array(cfg, key, ms):
    try:
        x = np.array(cfg[key], dtype=float)
    except KeyError:
        cfg.fail(key, "required")
    except (TypeError, ValueError):
        cfg.fail(key, "expected a numeric n x dim array")
    if x.shape != (ms.n, ms.dim):
        cfg.fail(key, f"expected shape ({ms.n}, {ms.dim}), got {x.shape}")
    return x


def _parse_fixed_ends(cfg):
    first = cfg.get("x_initial")
    default_n = len(first) if isinstance(first, list) else None
    if "dim" not in cfg and isinstance(first, list) and first and isinstance(first[0], list):
        cfg["dim"] = len(first[0])
    ms = _parse_masses(cfg, default_n)
    cfg["mass_system"] = ms
    cfg["x_initial"] = _parse_array(cfg, "x_initial", ms)
    cfg["x_final"] = _parse_array(cfg, "x_final", ms)
    cfg.number("duration", positive=True)
    cfg["nodes"] = cfg.integer("nodes", 128)
    cfg["seeds"] = [cfg.integer("seed", 0, minimum=0) if "seed" in cfg else 0]


def _parse_p12(cfg):
    cfg.number("period", positive=True)
    u = cfg["u"] = cfg.number("u", 0.0)
    if not 0 <= u < np.pi / 3:
        cfg.fail("u", f"expected 0 <= u < pi/3, got {u}")
    cfg["nodes"] = cfg.integer("nodes", 128)
    cfg["mass_system"] = MassSystem.equal(3, 3)
    cfg["seeds"] = [cfg.integer("seed", 0, minimum=0) if "seed" in cfg else 0]


# ----------------------------------------------------------------- helpers

def _report_path(out):
    return re.sub(r"\.json$", "", str(out)) + ".report.json"


def _dump_json(obj, fh):
    fh.write(json.dumps(obj, sort_keys=True, indent=1, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _float_list(text, flag):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise BadParams(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _write_csv(rows, header, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if out:
        with open(out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _apply_overrides(cfg_text, args, source):
    """Merge command-line flags into the raw config before parsing."""
    data = {}
    if cfg_text:
        try:
            data = json.loads(cfg_text)
        except json.JSONDecodeError as exc:
            raise BadParams(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise BadParams(f"{source}:1: config must be a JSON object")
    if getattr(args, "seed", None) is not None:
        data.pop("seeds", None)
        data["seed"] = args.seed
        if data.get("problem", "loop") == "loop" and "restarts" not in data:
            data["restarts"] = 1
    for flag in ("modes", "samples", "symmetry", "u", "dim"):
        v = getattr(args, flag, None)
        if v is not None:
            data[flag] = v
    if not cfg_text:
        return parse_config(json.dumps(data, indent=1), source)
    merged = cfg_text if data == json.loads(cfg_text) else json.dumps(data, indent=1)
    return parse_config(merged, source)


# ---------------------------------------------------------------- commands

def cmd_solve(args):
    text = ""
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
    cfg = _apply_overrides(text, args, args.config or "<flags>")
    opts = cfg["options"]
    problem = cfg["problem"]
    provenance = {"options": asdict(opts)}
    if problem == "loop":
        ms, G = cfg["mass_system"], cfg["group"]
        path, rep, runs = multistart_loop(ms, G, cfg["seeds"], cfg["modes"], cfg["samples"],
                                          cfg["amplitude"], cfg["period"], opts)
        symmetry = cfg["symmetry_meta"]
        provenance.update(seeds=list(cfg["seeds"]), seed=rep.seed if rep else None,
                          samples=cfg["samples"], amplitude=cfg["amplitude"])
        report = {"runs": [_run_summary(s, r) for s, r in runs]}
        if cfg.get("symmetry_meta", {}) and cfg["symmetry_meta"]["name"] == "d6_eight":
            report["eight_bound"] = 12 * hat_a2(cfg["period"])
    elif problem == "fixed_ends":
        ms = cfg["mass_system"]
        opts = MinimizeOptions(**{**asdict(opts), "seed": cfg["seeds"][0]})
        path, rep = _guard(lambda: minimize_fixed_ends(ms, cfg["x_initial"], cfg["x_final"],
                                                       cfg["duration"], None, opts, cfg["nodes"]))
        symmetry = None
        provenance.update(seed=cfg["seeds"][0])
        report = {}
    else:
        opts = MinimizeOptions(**{**asdict(opts), "seed": cfg["seeds"][0]})
        u, T = cfg["u"], cfg["period"]
        path, rep = _guard(lambda: minimize_p12(u, T, opts, cfg["nodes"]))
        symmetry = {"name": "p12", "u": u, "period": T}
        provenance.update(seed=cfg["seeds"][0])
        report = {}
    report["tool_version"] = __version__
    report["problem"] = problem
    report["best"] = rep.to_dict() if hasattr(rep, "to_dict") else None
    if not hasattr(rep, "to_dict") and rep is not None:
        report["error"] = str(rep)
    report["converged"] = bool(hasattr(rep, "converged") and rep.converged)
    out = args.out or "orbit.json"
    if path is not None:
        write_orbit(out, path, symmetry, provenance)
        report["orbit_file"] = str(out)
    with open(_report_path(out), "w") as fh:
        _dump_json(report, fh)
    summary = {k: report["best"][k] for k in ("action", "grad_norm", "iterations", "min_distance", "reason")} \
        if report["best"] else {"reason": report.get("error", "no admissible run")}
    _dump_json(summary, sys.stdout)
    return EXIT_OK if report["converged"] else EXIT_FAIL


def _guard(fn):
    try:
        return fn()
    except (CollisionFloor, CollisionError) as exc:
        return None, exc


def _run_summary(seed, rep):
    if hasattr(rep, "to_dict"):
        return {"seed": seed, "action": rep.action, "reason": rep.reason, "iterations": rep.iterations}
    return {"seed": seed, "error": str(rep)}


def _thresholds(args):
    if not args.config:
        return dict(DEFAULT_THRESHOLDS)
    with open(args.config) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParams(f"{args.config}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    cfg = Config({}, args.config, text)
    th = data.get("thresholds", {}) if isinstance(data, dict) else None
    if not isinstance(th, dict) or any(k not in DEFAULT_THRESHOLDS for k in th):
        cfg.fail("thresholds", f"keys must be among {sorted(DEFAULT_THRESHOLDS)}")
    return {**DEFAULT_THRESHOLDS, **th}


def _group_from_meta(meta, ms):
    sym = meta.get("symmetry")
    if not sym or sym.get("name") == "p12":
        return None
    return preset_group(sym["name"], sym.get("n", ms.n), ms.dim)


def verify_report(path, meta, thresholds, steps=4096):
    """Metrics plus a per-check pass/fail map for an orbit read from file."""
    if isinstance(path, FourierLoop):
        G = _group_from_meta(meta, path.ms)
        try:
            metrics = verify_loop(path, G, steps)
        except (CloseApproach, CollisionError) as exc:
            metrics = {"closure_error": float("inf"), "error": str(exc)}
            dmin, _, _ = _safe_min_distance(path)
            metrics["min_distance"] = dmin
        checks = {k: metrics.get(k, float("inf")) <= thresholds[k]
                  for k in ("closure_error", "energy_drift", "lagrange_jacobi_max")}
        if G is not None:
            checks["invariance_defect"] = metrics.get("invariance_defect", float("inf")) <= thresholds["invariance_defect"]
    else:
        dmin = float(_safe_min_distance(path)[0])
        metrics = {"min_distance": dmin, "el_residual": discrete_el_residual(path) if dmin > 0 else float("inf"),
                   "action": action(path) if dmin > 0 else float("inf")}
        checks = {"el_residual": metrics["el_residual"] <= thresholds["el_residual"]}
    checks["min_distance"] = metrics["min_distance"] > thresholds["min_distance"]
    return {"metrics": metrics, "checks": checks, "passed": all(checks.values())}


def _safe_min_distance(path):
    from .core import pairwise_distances
    if isinstance(path, FourierLoop):
        t = path.sample_times(max(256, 4 * path.modes))
        x = path.eval(t)[0]
    else:
        x = path.all_nodes
    d = pairwise_distances(x)
    iu = np.triu_indices(path.ms.n, 1)
    return float(d[:, iu[0], iu[1]].min()), None, None


def cmd_verify(args):
    thresholds = _thresholds(args)
    path, meta = read_orbit(args.orbit)
    rep = verify_report(path, meta, thresholds)
    rep["thresholds"] = thresholds
    if args.out:
        with open(args.out, "w") as fh:
            _dump_json(rep, fh)
    _dump_json(rep, sys.stdout)
    return EXIT_OK if rep["passed"] else EXIT_FAIL


SWEEP_HEADER = ["u", "action", "bound", "converged", "planarity",
                "start_d01", "start_d02", "start_d12", "end_d01", "end_d02", "end_d12",
                "hessian_xi", "hessian_sign"]


def sweep_row(u, T, opts, nodes=128):
    path, rep = minimize_p12(u, T, opts, nodes)
    X = path.all_nodes
    d = lambda x: [float(np.linalg.norm(x[i] - x[j])) for i, j in ((0, 1), (0, 2), (1, 2))]
    hess = p12_hessian(u, T)
    return [u, rep.action, rep.extra["bound"], int(rep.converged), planarity(X),
            *d(X[0]), *d(X[-1]), hess, int(np.sign(hess))]


def cmd_sweep_p12(args):
    T, opts, nodes = 12.0, MinimizeOptions(), 128
    if args.config:
        cfg = load_config_loose(args.config)
        T = cfg.number("period", 12.0, positive=True)
        nodes = cfg.integer("nodes", 128)
        try:
            opts = MinimizeOptions(**cfg.get("options", {}))
        except (BadParams, TypeError) as exc:
            cfg.fail("options", str(exc))
    us = _float_list(args.u or "", "--u")
    for u in us:
        if not 0 <= u <= np.pi / 6 + 1e-12:
            raise BadParams(f"--u: {u} lies outside [0, pi/6]")
    if args.seed is not None:
        opts = MinimizeOptions(**{**asdict(opts), "seed": args.seed})
    with ThreadPoolExecutor(max_workers=min(_threads(), max(1, len(us)))) as ex:
        rows = list(ex.map(lambda u: sweep_row(u, T, opts, nodes), us))
    _write_csv(rows, SWEEP_HEADER, args.out)
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


def marchal_ladder(steps=7, T=1.0):
    """rho_0 = 0.1 gamma T^(2/3) halved ``steps - 1`` times."""
    return [0.1 * GAMMA * T ** (2 / 3) / 2 ** k for k in range(steps)]


def cmd_marchal_demo(args):
    T = 1.0
    if args.config:
        T = load_config_loose(args.config).get("period", 1.0)
    rhos = _float_list(args.rho, "--rho") if args.rho else marchal_ladder(7, T)
    if args.dim not in (2, 3):
        raise BadParams("--dim must be 2 or 3")
    rows = marchal_table(args.dim, rhos, T)
    _write_csv(rows, ["rho", "t0", "A", "A_m", "normalized"], args.out)
    return EXIT_OK


def load_config_loose(path):
    """Parse JSON with line diagnostics but without problem validation."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParams(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    cfg = Config(data, str(path), text)
    if "period" in cfg:
        cfg.number("period", positive=True)
    return cfg


def cmd_action_eval(args):
    path, _ = read_orbit(args.orbit)
    quad = None
    if isinstance(path, FourierLoop):
        quad = QuadratureSpec(args.samples or max(256, 4 * path.modes))
    _dump_json({"action": action(path, quad)}, sys.stdout)
    return EXIT_OK


# --------------------------------------------------------------------- plot

COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


def sample_orbit(path, samples=400):
    if isinstance(path, FourierLoop):
        t = np.linspace(0.0, path.period, samples + 1)
    else:
        t = np.linspace(path.t0, path.t0 + path.duration, samples + 1)
    return t, path.eval(t)[0]


def plot_rows(t, x):
    for k, tk in enumerate(t):
        for i in range(x.shape[1]):
            yield [float(tk), i, *map(float, x[k, i])]


def projection_axes(x):
    """Two leading principal axes of the sampled point cloud."""
    pts = x.reshape(-1, x.shape[-1])
    pts = pts - pts.mean(axis=0)
    if pts.shape[1] <= 2:
        return np.eye(pts.shape[1])[:, :2] if pts.shape[1] == 2 else np.eye(1)
    _, _, vt = np.linalg.svd(pts, full_matrices=False)
    return vt[:2].T


def render_svg(x, size=480, margin=20):
    P = projection_axes(x)
    y = (x - x.reshape(-1, x.shape[-1]).mean(axis=0)) @ P
    if y.shape[-1] == 1:
        y = np.concatenate([y, np.zeros_like(y)], axis=-1)
    lo, hi = y.reshape(-1, 2).min(axis=0), y.reshape(-1, 2).max(axis=0)
    span = float(max(hi - lo)) or 1.0
    s = (size - 2 * margin) / span
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    for i in range(x.shape[1]):
        px = margin + (y[:, i, 0] - lo[0]) * s
        py = size - margin - (y[:, i, 1] - lo[1]) * s
        pts = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
        out.append(f'<polyline fill="none" stroke="{COLORS[i % len(COLORS)]}" stroke-width="1.5" '
                   f'points="{pts}"><title>body {i}</title></polyline>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_plot(args):
    path, _ = read_orbit(args.orbit)
    t, x = sample_orbit(path, args.samples or 400)
    stem = re.sub(r"\.(csv|svg)$", "", args.out or "orbit")
    axes = "xyz"[:x.shape[-1]] if x.shape[-1] <= 3 else [f"x{k}" for k in range(x.shape[-1])]
    _write_csv(plot_rows(t, x), ["t", "body", *axes], stem + ".csv")
    with open(stem + ".svg", "w") as fh:
        fh.write(render_svg(x))
    return EXIT_OK


# --------------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="orbitforge", description="Action-minimizing n-body orbits.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="minimize the action for a config")
    s.add_argument("--config")
    s.add_argument("--seed", type=int)
    s.add_argument("--modes", type=int)
    s.add_argument("--samples", type=int)
    s.add_argument("--symmetry")
    s.add_argument("--u", type=float)
    s.add_argument("--dim", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="integrate and check an orbit file")
    v.add_argument("orbit")
    v.add_argument("--config", help="JSON with a 'thresholds' object")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep-p12", help="P12 family over a grid of u")
    w.add_argument("--u", help="comma-separated angles in [0, pi/6]")
    w.add_argument("--config")
    w.add_argument("--seed", type=int)
    w.add_argument("--out")
    w.set_defaults(func=cmd_sweep_p12)

    m = sub.add_parser("marchal-demo", help="averaged action table for the parabolic ejection")
    m.add_argument("--dim", type=int, default=3)
    m.add_argument("--rho", help="comma-separated radii (default: halving ladder)")
    m.add_argument("--config")
    m.add_argument("--out")
    m.set_defaults(func=cmd_marchal_demo)

    a = sub.add_parser("action-eval", help="action of an orbit file")
    a.add_argument("orbit")
    a.add_argument("--samples", type=int)
    a.set_defaults(func=cmd_action_eval)

    q = sub.add_parser("plot", help="CSV samples and an SVG projection")
    q.add_argument("orbit")
    q.add_argument("--samples", type=int)
    q.add_argument("--out", help="output stem; writes STEM.csv and STEM.svg")
    q.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BadParams, SchemaError, OSError, ValueError) as exc:
        print(f"orbitforge: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OrbitForgeError as exc:
        print(f"orbitforge: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
