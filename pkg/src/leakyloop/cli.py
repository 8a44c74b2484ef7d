"""
Command-line entry point.

Every subcommand reads its inputs from JSON files, validates all numeric
parameters before computing, and writes its result atomically (temporary
file plus rename) to ``--out`` or to standard output.

Exit codes: 0 success, 1 bad input, 2 no bound state resolved,
3 inequality violation found by ``chord-scan``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import chords, geometry, perturb, spectral
from .errors import (
    ArgumentError,
    ConvergenceError,
    NoBoundStateError,
    NonClosableError,
    OnSupportError,
    PreconditionError,
    SingularChordError,
)

EXIT_OK = 0
EXIT_BAD_INPUT = 1
EXIT_NO_BOUND_STATE = 2
EXIT_VIOLATION = 3

DEFAULTS = {
    "alpha": 1.0,
    "seed": 0,
    "format": None,
    "sign": "+",
    "eps0": 1.0,
    "extent": 3.0,
    "points": 41,
    "length": 2 * math.pi,
}


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def _common(p, *names):
    if "curve" in names:
        p.add_argument("--curve", help="curve JSON file")
    if "polygon" in names:
        p.add_argument("--polygon", help="polygon JSON file")
    if "spec" in names:
        p.add_argument("--spec", help="curvature spec JSON file")
    if "alpha" in names:
        p.add_argument("--alpha", type=float, help="coupling constant (default 1)")
    if "u" in names:
        p.add_argument("--u", type=float, action="append", help="arc separation; repeatable")
    if "p" in names:
        p.add_argument("--p", type=float, action="append", help="exponent; repeatable")
    if "m" in names:
        p.add_argument("--m", type=int, action="append", help="vertex separation; repeatable")
    if "grid" in names:
        p.add_argument("--grid", type=int, help="resample to N points")
    if "tol" in names:
        p.add_argument("--tol", type=float, help="tolerance")
    if "seed" in names:
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), help="output format")
    p.add_argument("--config", help="JSON config file; flags override its entries")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leakyloop", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ground-state", help="lowest eigenvalue of the leaky-loop Hamiltonian")
    _common(p, "curve", "alpha", "grid", "tol")

    p = sub.add_parser("chord-scan", help="mean-chord inequalities over (u, p) or (m, p) grids")
    _common(p, "curve", "polygon", "u", "p", "m", "grid", "tol")
    p.add_argument("--sign", choices=("+", "-", "both"), help="family sign (default +)")

    p = sub.add_parser("perturb", help="mode table of I_g and the expansion audit")
    _common(p, "spec", "u")
    p.add_argument("--eps0", type=float, help="audit scale applied to the spec (default 1)")

    p = sub.add_parser("field-map", help="planar ground state on a square grid, CSV x,y,psi")
    _common(p, "curve", "alpha", "grid", "tol")
    p.add_argument("--result", help="ground-state JSON produced by ground-state")
    p.add_argument("--extent", type=float, help="half-width of the square (default 3)")
    p.add_argument("--points", type=int, help="points per side (default 41)")

    p = sub.add_parser("lens-table", help="lens moments: quadrature vs closed form")
    _common(p, "u", "grid")
    p.add_argument("--length", type=float, help="loop length (default 2 pi)")
    p.add_argument("--radius", type=float, action="append", help="arc radius; repeatable")

    p = sub.add_parser("paperclip-probe", help="c2(L/2)/L^3 over a paperclip family")
    _common(p, "grid")
    p.add_argument("--b", type=float, action="append", help="short leg; repeatable")
    p.add_argument("--r", type=float, action="append", help="turn radius; repeatable")

    p = sub.add_parser("make-curve", help="write a curve, polygon or spec JSON file")
    p.add_argument("kind", choices=("circle", "lens", "ellipse", "paperclip", "curvature",
                                    "regular-polygon", "rhomboid", "random-spec"))
    _common(p, "spec", "grid", "seed")
    p.add_argument("--length", type=float, help="loop length (default 2 pi)")
    p.add_argument("--radius", type=float, help="lens arc radius")
    p.add_argument("--ratio", type=float, help="ellipse axis ratio")
    p.add_argument("--a", type=float, help="paperclip long leg")
    p.add_argument("--b", type=float, help="paperclip short leg")
    p.add_argument("--r", type=float, help="paperclip turn radius")
    p.add_argument("--vertices", type=int, help="number of polygon vertices")
    p.add_argument("--side", type=float, help="polygon side length")
    p.add_argument("--phi", type=float, help="rhomboid half-angle")
    p.add_argument("--modes", type=int, action="append", help="random-spec mode index; repeatable")
    p.add_argument("--sup-norm", dest="sup_norm", type=float, help="random-spec |L g|_inf")
    return parser


# --------------------------------------------------------------------------
# config plumbing


class Config(dict):
    """Merged run configuration: flags override the config file, which
    overrides built-in defaults."""

    def __getattr__(self, name):
        return self.get(name)


def make_config(args: argparse.Namespace) -> Config:
    values = {}
    if args.config:
        data = _read_json(args.config)
        if not isinstance(data, dict):
            raise ArgumentError("config file must hold a JSON object")
        values.update({k.replace("-", "_"): v for k, v in data.items()})
    for key, val in vars(args).items():
        if val is not None:
            values[key] = val
    for key, val in DEFAULTS.items():
        values.setdefault(key, val)
    return Config(values)


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"{path}: invalid JSON ({exc})") from exc


def _as_list(value):
    if value is None:
        return None
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _positive(cfg, key):
    val = cfg.get(key)
    try:
        val = float(val)
    except (TypeError, ValueError):
        raise ArgumentError(f"--{key} must be a number") from None
    if not (val > 0 and math.isfinite(val)):
        raise ArgumentError(f"--{key} must be positive and finite, got {val!r}")
    return val


def _kappa_tol(cfg):
    return spectral.DEFAULT_KAPPA_TOL if cfg.tol is None else _positive(cfg, "tol")


def _grid(cfg):
    n = cfg.get("grid")
    if n is None:
        return None
    if int(n) != n or n < 16 or n % 2:
        raise ArgumentError(f"--grid must be an even integer >= 16, got {n!r}")
    return int(n)


def _require(cfg, key):
    if not cfg.get(key):
        raise ArgumentError(f"--{key} is required")
    return cfg[key]


def _emit(text: str, out):
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(out))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _load_curve(cfg):
    curve = geometry.load_curve(_require(cfg, "curve"))
    n = _grid(cfg)
    if n is not None and n != curve.grid_size:
        curve = geometry.resample(curve, n)
    return curve


def _aligned_curve(curve, us):
    """Smallest even refinement of the grid on which every ``u`` is a node."""
    if all(curve.grid_index(u) is not None for u in us):
        return curve
    for n in range(curve.grid_size + 2, 16 * curve.grid_size + 1, 2):
        if all(abs(u * n / curve.length - round(u * n / curve.length)) < 1e-9 for u in us):
            return geometry.resample(curve, n)
    raise ArgumentError("no grid refinement up to 16x aligns the requested u values")


# --------------------------------------------------------------------------
# commands


def cmd_ground_state(cfg: Config) -> int:
    alpha = _positive(cfg, "alpha")
    tol = _kappa_tol(cfg)
    curve = _load_curve(cfg)
    result = spectral.ground_state(curve, alpha, tol)
    _emit(result.to_json() + "\n", cfg.out)
    return EXIT_OK


def cmd_chord_scan(cfg: Config) -> int:
    ps = _as_list(cfg.p) or [0.5, 1.0, 2.0]
    for p in ps:
        if not (p > 0 and math.isfinite(p)):
            raise ArgumentError(f"--p must be positive, got {p!r}")
    signs = ("+", "-") if cfg.sign == "both" else (cfg.sign,)
    if cfg.sign not in ("+", "-", "both"):
        raise ArgumentError("--sign must be +, - or both")
    rtol = None if cfg.tol is None else _positive(cfg, "tol")
    reports = []
    if cfg.polygon:
        poly = geometry.load_polygon(cfg.polygon)
        ms = _as_list(cfg.m) or list(range(1, poly.n_vertices // 2 + 1))
        for m in ms:
            if int(m) != m or not 1 <= m <= poly.n_vertices // 2:
                raise ArgumentError(f"--m must be in [1, {poly.n_vertices // 2}], got {m!r}")
        extra = {} if rtol is None else {"rtol": rtol}
        for p in ps:
            for sign in signs:
                for m in ms:
                    reports.append(chords.check_discrete(poly, int(m), p, sign, **extra))
    else:
        curve = _load_curve(cfg)
        L = curve.length
        us = _as_list(cfg.u)
        if us is None:
            step = max(1, (curve.grid_size // 2) // 20)
            us = [k * curve.step for k in range(step, curve.grid_size // 2 + 1, step)]
        for u in us:
            if not (0 < u <= L / 2 * (1 + 1e-12)):
                raise ArgumentError(f"--u must lie in (0, L/2], got {u!r}")
        curve = _aligned_curve(curve, us)
        for p in ps:
            for sign in signs:
                for u in us:
                    reports.append(chords.check_continuous(curve, u, p, sign, rtol))
    if cfg.format == "json":
        text = chords.reports_to_jsonl(reports)
    else:
        text = chords.reports_to_csv(reports)
    _emit(text, cfg.out)
    violated = sum(not r.holds for r in reports)
    if violated:
        print(f"{violated} violated row(s)", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_perturb(cfg: Config) -> int:
    spec = geometry.load_spec(_require(cfg, "spec"))
    us = _as_list(cfg.u) or [spec.length / 2]
    eps0 = _positive(cfg, "eps0")
    for u in us:
        if not (0 < u <= spec.length / 2 * (1 + 1e-12)):
            raise ArgumentError(f"--u must lie in (0, L/2], got {u!r}")
    records = []
    for u in us:
        ig = perturb.I_g(spec, u)
        try:
            audit = perturb.second_order_expansion_audit(spec, u, eps0)
            verdict, ratio = audit.verdict, audit.ratio
        except PreconditionError as exc:
            verdict, ratio = f"skipped: {exc}", None
        records.append((u, ig, verdict, ratio))
    if cfg.format == "json":
        payload = [
            {
                "u": u,
                "I_g": ig.total,
                "c2": perturb.c2_from_curvature(spec, u),
                "circle": perturb.circle_c2(spec.length, u),
                "modes": [vars(m) for m in ig.per_mode],
                "audit": {"verdict": verdict, "ratio": ratio},
            }
            for u, ig, verdict, ratio in records
        ]
        text = json.dumps(payload, indent=1) + "\n"
    else:
        text = "".join(perturb.mode_table_csv(ig) for _, ig, _, _ in records[:1])
        for u, ig, _, _ in records[1:]:
            text += perturb.mode_table_csv(ig).split("\n", 1)[1]
    _emit(text, cfg.out)
    for u, ig, verdict, ratio in records:
        ratio_txt = "n/a" if ratio is None else f"{ratio:.4f}"
        print(f"u={u!r} I_g={ig.total!r} audit={verdict} ratio={ratio_txt}", file=sys.stderr)
    return EXIT_OK


def cmd_field_map(cfg: Config) -> int:
    extent = _positive(cfg, "extent")
    npts = cfg.points
    if int(npts) != npts or npts < 2:
        raise ArgumentError("--points must be an integer >= 2")
    curve = _load_curve(cfg)
    if cfg.result:
        result = spectral.GroundStateResult.from_dict(_read_json(cfg.result))
        if result.grid_size != curve.grid_size:
            raise ArgumentError("result grid does not match the curve grid")
    else:
        result = spectral.ground_state(curve, _positive(cfg, "alpha"), _kappa_tol(cfg))
    axis = np.linspace(-extent, extent, int(npts))
    rows = []
    for y in axis:
        for x in axis:
            try:
                psi = spectral.eigenfunction_at(result, curve, (x, y))
            except OnSupportError:
                psi = float("nan")
            rows.append((float(x), float(y), float(psi)))
    if cfg.format == "json":
        text = json.dumps([{"x": x, "y": y, "psi": v} for x, y, v in rows]) + "\n"
    else:
        text = _csv(("x", "y", "psi"), rows)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_lens_table(cfg: Config) -> int:
    L = _positive(cfg, "length")
    radii = _as_list(cfg.radius) or [L / math.pi, L / (2 * math.pi), L / (2.5 * math.pi), L / (3.5 * math.pi)]
    for R in radii:
        if not R > L / (4 * math.pi):
            raise ArgumentError("every --radius must exceed L / (4 pi)")
    us = _as_list(cfg.u) or [k * L / 20 for k in range(1, 11)]
    n = _grid(cfg) or 1280
    rows = []
    for R in radii:
        curve = _aligned_curve(geometry.build_lens(R, L, n), us)
        for u in us:
            closed = chords.lens_c2_closed_form(R, L, u)
            quad = chords.chord_moment(curve, u, 2).value
            rows.append((R, u, closed, quad, abs(quad / closed - 1), perturb.circle_c2(L, u)))
    header = ("R", "u", "closed_form", "quadrature", "rel_error", "circle")
    if cfg.format == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows]) + "\n"
    else:
        text = _csv(header, rows)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_paperclip_probe(cfg: Config) -> int:
    bs = _as_list(cfg.b) or [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
    rs = _as_list(cfg.r) or [0.01, 0.005, 0.001]
    for v in bs + rs:
        if not v > 0:
            raise ArgumentError("--b and --r values must be positive")
    n = _grid(cfg) or 8192
    samples = chords.paperclip_scan(bs, rs, n)
    header = ("a", "b", "r", "length", "c2_half", "constant", "exceeds_circle")
    rows = [(s.a, s.b, s.r, s.length, s.c2_half, s.constant, int(s.exceeds_circle)) for s in samples]
    if cfg.format == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows]) + "\n"
    else:
        text = _csv(header, rows)
    _emit(text, cfg.out)
    best = max(samples, key=lambda s: s.constant)
    print(f"max c2(L/2)/L^3 = {best.constant!r} at b={best.b!r}, r={best.r!r} "
          f"(circle {1 / math.pi ** 2!r})", file=sys.stderr)
    return EXIT_OK


def cmd_make_curve(cfg: Config) -> int:
    kind = cfg.kind
    L = _positive(cfg, "length")
    n = _grid(cfg) or 1024
    if kind == "circle":
        data = geometry.curve_to_dict(geometry.build_circle(L, n))
    elif kind == "lens":
        data = geometry.curve_to_dict(geometry.build_lens(_positive(cfg, "radius"), L, n))
    elif kind == "ellipse":
        data = geometry.curve_to_dict(geometry.build_ellipse(_positive(cfg, "ratio"), L, n))
    elif kind == "paperclip":
        curve = geometry.build_paperclip(_positive(cfg, "a"), _positive(cfg, "b"), _positive(cfg, "r"), n)
        data = geometry.curve_to_dict(curve)
    elif kind == "curvature":
        spec = geometry.load_spec(_require(cfg, "spec"))
        curve, _ = geometry.build_closed_from_curvature(spec, n)
        data = geometry.curve_to_dict(curve)
    elif kind == "regular-polygon":
        verts = cfg.vertices
        if verts is None or verts < 3:
            raise ArgumentError("--vertices must be an integer >= 3")
        data = geometry.polygon_to_dict(geometry.build_regular_polygon(int(verts), _positive(cfg, "side")))
    elif kind == "rhomboid":
        data = geometry.polygon_to_dict(geometry.rhomboid(_positive(cfg, "phi"), _positive(cfg, "side")))
    else:
        rng = np.random.default_rng(int(cfg.seed))
        modes = tuple(_as_list(cfg.modes) or (1, 2, 3, 4, 5))
        sup = float(cfg.sup_norm) if cfg.sup_norm is not None else 0.05
        data = geometry.spec_to_dict(geometry.random_curvature_spec(rng, L, modes, sup))
    _emit(json.dumps(data) + "\n", cfg.out)
    return EXIT_OK


COMMANDS = {
    "ground-state": cmd_ground_state,
    "chord-scan": cmd_chord_scan,
    "perturb": cmd_perturb,
    "field-map": cmd_field_map,
    "lens-table": cmd_lens_table,
    "paperclip-probe": cmd_paperclip_probe,
    "make-curve": cmd_make_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise _Usage("a subcommand is required")
        cfg = make_config(args)
        return COMMANDS[args.command](cfg)
    except _Usage as exc:
        print(f"leakyloop: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except (NoBoundStateError, ConvergenceError) as exc:
        print(f"leakyloop: no bound state resolved: {exc}", file=sys.stderr)
        return EXIT_NO_BOUND_STATE
    except (ArgumentError, PreconditionError, NonClosableError, SingularChordError, OSError) as exc:
        print(f"leakyloop: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
