"""Command-line interface: ``shocklayer {solve,body,optimize,compare}``."""
import argparse
import csv
from dataclasses import asdict, dataclass, fields
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .errors import NonConvergence, ShockLayerError, ValidationError
from .gas import AXISYMMETRIC, PLANE, FreestreamConditions
from .geometry import MoeckelShock, PolyShock, load_spline_shock, sample_stations
from .optimize import body_error, optimize_poly, optimize_z0
from .reference import compare_density, load_reference, surface_pressure_error
from .solver import BodyPoint, body_shape, find_r_max, solve_field

FORMAT_VERSION = 1
SHAPES = ("moeckel", "poly2", "poly3", "poly4", "spline")
FIELD_HEADER = ("station", "z", "r", "psi", "p", "rho", "u", "y")
BODY_HEADER = ("z", "r", "p_b", "delta")

log = logging.getLogger("shocklayer")


@dataclass
class RunConfig:
    mach: float = None
    gamma: float = 1.4
    geometry: str = "plane"
    radius: float = 0.5
    shape: str = None
    z0: float = None
    a: float = None
    b: float = None
    c: float = None
    d: float = None
    spline: str = None
    stations: int = 200
    streamlines: int = 200
    out: str = None
    body_out: str = None
    reference: str = None
    field: str = None
    degree: int = 2
    free_z0: bool = False
    threads: int = 1

    def validate(self, need_shape=True):
        if self.mach is None:
            raise ValidationError("--mach is required")
        if not (math.isfinite(self.mach) and self.mach > 1):
            raise ValidationError(f"mach must be > 1, got {self.mach}")
        if not self.gamma > 1:
            raise ValidationError(f"gamma must be > 1, got {self.gamma}")
        if self.geometry not in ("plane", "axisym"):
            raise ValidationError(f"geometry must be plane or axisym, got {self.geometry}")
        if not self.radius > 0:
            raise ValidationError(f"radius must be positive, got {self.radius}")
        if self.stations < 2 or self.streamlines < 2:
            raise ValidationError("need at least 2 stations and 2 streamlines")
        if self.threads < 0:
            raise ValidationError("threads must be >= 0")
        if self.degree not in (1, 2, 3, 4):
            raise ValidationError(f"degree must be 1, 2, 3 or 4, got {self.degree}")
        if need_shape:
            if self.shape not in SHAPES:
                raise ValidationError(f"--shape must be one of {', '.join(SHAPES)}")
            if self.shape == "spline":
                if not self.spline:
                    raise ValidationError("--shape spline needs --spline <path>")
            else:
                if self.z0 is None or not self.z0 > 0:
                    raise ValidationError("--z0 must be given and positive")
                missing = [k for k in "abcd"[:self.degree_of_shape] if getattr(self, k) is None]
                if missing:
                    raise ValidationError(
                        f"--shape {self.shape} needs --{' --'.join(missing)}")
                if self.shape != "moeckel" and not self.a > 0:
                    raise ValidationError("--a must be positive")

    @property
    def degree_of_shape(self):
        return 0 if self.shape == "moeckel" else int(self.shape[-1])

    def freestream(self):
        geometry = PLANE if self.geometry == "plane" else AXISYMMETRIC
        return FreestreamConditions(self.mach, self.gamma, geometry, self.radius)

    def make_shape(self):
        if self.shape == "spline":
            return load_spline_shock(self.spline)
        if self.shape == "moeckel":
            return MoeckelShock(self.z0, self.mach)
        coeffs = [getattr(self, k) for k in "abcd"[:self.degree_of_shape]]
        return PolyShock(self.z0, coeffs, self.mach)


def _fmt(x):
    return repr(float(x))


def write_field(path, solutions):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELD_HEADER)
        for i, sol in enumerate(solutions):
            for s in sol.samples:
                w.writerow([i, _fmt(s.z), _fmt(s.r), _fmt(s.psi), _fmt(s.p),
                            _fmt(s.rho), _fmt(s.u), _fmt(s.y)])


def write_body(path, body):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BODY_HEADER)
        for b in body:
            w.writerow([_fmt(b.z), _fmt(b.r), _fmt(b.p_b), _fmt(b.delta)])


def read_field(path):
    """Columns of an exported field CSV as float arrays keyed by header name."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        rows = [list(map(float, row)) for row in reader if row]
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def _body_from_field(cols):
    if "psi" not in cols or "station" not in cols:
        return None
    on_body = cols["psi"] == 0.0
    order = np.argsort(cols["station"][on_body], kind="stable")
    z, r, p = (cols[k][on_body][order] for k in ("z", "r", "p"))
    return [BodyPoint(float(a), float(b), float(c), math.nan) for a, b, c in zip(z, r, p)]


def _write_json(path, payload):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _summary(body, fs):
    axis = body[0]
    print(f"standoff distance: {axis.delta:.6f}")
    print(f"stagnation pressure p_b(axis): {axis.p_b:.6f}")
    err = body_error(fs, None, body=body)
    print(f"body rms residual: {err.rms:.6e}  max: {err.max_abs:.6e}")


def cmd_solve(cfg):
    fs, shape = cfg.freestream(), cfg.make_shape()
    r_max = find_r_max(fs, shape)
    stations = sample_stations(shape, fs, cfg.stations, r_max)
    solutions = solve_field(fs, shape, stations, cfg.streamlines, cfg.threads)
    body = body_shape(fs, shape, cfg.stations, r_max, cfg.threads)
    out = Path(cfg.out or "field.csv")
    body_out = Path(cfg.body_out) if cfg.body_out else out.with_name(out.stem + "_body.csv")
    write_field(out, solutions)
    write_body(body_out, body)
    _summary(body, fs)
    return 0


def cmd_body(cfg):
    fs, shape = cfg.freestream(), cfg.make_shape()
    body = body_shape(fs, shape, cfg.stations, threads=cfg.threads)
    write_body(cfg.out or "body.csv", body)
    _summary(body, fs)
    return 0


def _write_optimization(cfg, fs, res):
    _write_json(cfg.out, {
        "format_version": FORMAT_VERSION,
        "mach": fs.mach, "gamma": fs.gamma, "geometry": cfg.geometry,
        "degree": res.degree, "params": list(res.params),
        "rms": res.error.rms, "max_abs": res.error.max_abs,
        "evaluations": res.evaluations, "converged": res.converged,
    })


def cmd_optimize(cfg):
    fs = cfg.freestream()
    try:
        if cfg.degree == 1:
            res = optimize_z0(fs, cfg.z0)
        else:
            init = None
            if cfg.z0 is not None:
                init = (cfg.z0, 1.0) + (0.0,) * (cfg.degree - 1)
            res = optimize_poly(fs, cfg.degree, init, free_z0=cfg.free_z0)
    except NonConvergence as exc:
        # keep the best point found before reporting the failure
        if getattr(exc, "result", None) is not None:
            _write_optimization(cfg, fs, exc.result)
        raise
    _write_optimization(cfg, fs, res)
    return 0


def cmd_compare(cfg):
    if not cfg.reference:
        raise ValidationError("compare needs --reference <path>")
    if not cfg.field:
        cfg.validate()
    field = load_reference(cfg.reference)
    if cfg.field:
        cols = read_field(cfg.field)
        dens = compare_density(cols["z"], cols["r"], cols["rho"], field)
        body = _body_from_field(cols)
    else:
        fs, shape = cfg.freestream(), cfg.make_shape()
        r_max = find_r_max(fs, shape)
        stations = sample_stations(shape, fs, cfg.stations, r_max)
        solutions = solve_field(fs, shape, stations, cfg.streamlines, cfg.threads)
        z = [s.z for sol in solutions for s in sol.samples]
        r = [s.r for sol in solutions for s in sol.samples]
        rho = [s.rho for sol in solutions for s in sol.samples]
        dens = compare_density(z, r, rho, field)
        body = [BodyPoint(sol.body_sample.z, sol.body_sample.r, sol.body_sample.p, math.nan)
                for sol in solutions]
    isp = None
    if body is not None and len(body) >= 2:
        try:
            isp = surface_pressure_error(body, field)
        except ShockLayerError as exc:
            log.warning("surface pressure comparison skipped: %s", exc)
    _write_json(cfg.out, {
        "format_version": FORMAT_VERSION,
        "max_density_error": dens.max_density_error,
        "integrated_surface_pressure_error": isp,
        "samples_compared": dens.samples_compared,
        "samples_skipped": dens.samples_skipped,
    })
    return 0


COMMANDS = {"solve": cmd_solve, "body": cmd_body, "optimize": cmd_optimize, "compare": cmd_compare}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings; flags take precedence")
    common.add_argument("--mach", type=float)
    common.add_argument("--gamma", type=float)
    common.add_argument("--geometry", choices=("plane", "axisym"))
    common.add_argument("--radius", type=float, help="body radius (default 0.5)")
    common.add_argument("--shape", choices=SHAPES)
    for k in ("z0", "a", "b", "c", "d"):
        common.add_argument(f"--{k}", type=float)
    common.add_argument("--spline", help="CSV with z,r shock points")
    common.add_argument("--stations", type=int)
    common.add_argument("--streamlines", type=int)
    common.add_argument("--out")
    common.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="shocklayer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("solve", parents=[common], help="field and body for a given shock")
    p.add_argument("--body-out", dest="body_out")
    sub.add_parser("body", parents=[common], help="recovered body only")
    p = sub.add_parser("optimize", parents=[common], help="fit shock parameters to the body")
    p.add_argument("--degree", type=int, choices=(1, 2, 3, 4),
                   help="1 = hyperbola, 2-4 = polynomial in f (default 2)")
    p.add_argument("--free-z0", dest="free_z0", action="store_true", default=None,
                   help="let z0 move together with the polynomial coefficients")
    p = sub.add_parser("compare", parents=[common], help="compare with a reference field")
    p.add_argument("--reference")
    p.add_argument("--field", help="previously exported field CSV to compare instead of solving")
    return parser


def config_from_args(args):
    cfg = RunConfig()
    names = {f.name for f in fields(RunConfig)}
    if args.config:
        data = json.loads(Path(args.config).read_text())
        unknown = set(data) - names
        if unknown:
            raise ValidationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        for k, v in data.items():
            setattr(cfg, k, v)
    for k in names:
        v = getattr(args, k, None)
        if v is not None:
            setattr(cfg, k, v)
    return cfg


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = config_from_args(args)
        # compare validates its own inputs: an exported field needs no flow settings
        if args.command != "compare":
            cfg.validate(need_shape=args.command in ("solve", "body"))
        return COMMANDS[args.command](cfg)
    except (ShockLayerError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
