"""Command-line front end: JSON body specs in, JSON/CSV reports out.

Exit codes: 0 = success and every checked inequality holds; 1 = a deficit
fell below -tol * scale (a violation, signalling a bug or bad input);
2 = input or parse error.

Body specification (JSON object):
    {"kind": "ellipse", "a": 2.0, "alpha": 0.0, "k": 1.0, "center": [0.0, 0.0]}
    {"kind": "polygon", "vertices": [[1, 1], [-1, 1], [-1, -1], [1, -1]]}
    {"kind": "fourier", "a0": 1.0, "harmonics": [[a1, b1], [a2, b2], ...]}
    {"kind": "samples", "values": [...]}          # length must equal the grid
plus an optional "grid_size".  Angles are radians throughout.  The grid size
is resolved as: --grid flag, then the spec's grid_size, then the AFFISO_GRID
environment variable, then 2048.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import circle_fn, functionals, measures, positioning, transforms, verify
from .circle_fn import CircleFunction, EllipseParams, Grid, PolygonBody, make_grid

_KINDS = ("ellipse", "polygon", "fourier", "samples")


class SpecError(ValueError):
    """Malformed body specification or unreadable input."""


# -- deterministic JSON with 17 significant digits ------------------------


def _format_float(x: float) -> str:
    if not np.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    s = format(float(x), ".17g")
    return s


def to_json(obj: Any, indent: int = 0) -> str:
    """Serialize with floats at 17 significant digits (round-trip exact)."""
    pad = " " * indent
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = ",\n".join(
            f"{pad}  {json.dumps(str(key))}: {to_json(val, indent + 2)}"
            for key, val in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = [to_json(item, indent + 2) for item in obj]
        if all(len(s) < 26 and "\n" not in s for s in seq) and len(seq) <= 8:
            return "[" + ", ".join(seq) + "]"
        items = ",\n".join(f"{pad}  {s}" for s in seq)
        return "[\n" + items + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


# -- body specs ------------------------------------------------------------


@dataclass(frozen=True)
class BodySpec:
    kind: str
    params: dict
    grid_size: int | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "BodySpec":
        if not isinstance(raw, dict):
            raise SpecError("body spec must be a JSON object")
        kind = raw.get("kind")
        if kind not in _KINDS:
            raise SpecError(f"body spec kind must be one of {_KINDS}, got {kind!r}")
        params = {k: v for k, v in raw.items() if k not in ("kind", "grid_size")}
        grid_size = raw.get("grid_size")
        return cls(kind, params, None if grid_size is None else int(grid_size))

    def build(self, grid: Grid, as_density: bool = False):
        """Construct the body; ellipses become densities when ``as_density``."""
        p = self.params
        try:
            if self.kind == "ellipse":
                ep = EllipseParams(
                    a=float(p.get("a", 1.0)),
                    alpha=float(p.get("alpha", 0.0)),
                    k=float(p.get("k", 1.0)),
                    center=tuple(float(c) for c in p.get("center", (0.0, 0.0))),
                )
                if as_density:
                    return circle_fn.ellipse_density(ep, grid)
                return circle_fn.ellipse_support(ep, grid)
            if self.kind == "polygon":
                return PolygonBody.from_points(p["vertices"])
            if self.kind == "fourier":
                c = np.zeros(grid.size // 2 + 1, dtype=np.complex128)
                c[0] = float(p.get("a0", 0.0)) * grid.size
                harmonics = p.get("harmonics", [])
                if len(harmonics) > grid.size // 2:
                    raise SpecError("more harmonics than the grid resolves")
                for k, (ak, bk) in enumerate(harmonics, start=1):
                    c[k] = (float(ak) - 1j * float(bk)) * (grid.size / 2.0)
                return CircleFunction.from_coeffs(grid, c)
            values = np.asarray(p["values"], dtype=float)
            if values.size != grid.size:
                raise SpecError(
                    f"samples spec has {values.size} values but the grid needs {grid.size}"
                )
            return CircleFunction.from_samples(grid, values)
        except SpecError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise SpecError(f"bad {self.kind} spec: {exc}") from exc


def load_body_spec(path: str) -> BodySpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in {path}: {exc}") from exc
    return BodySpec.from_dict(raw)


def _resolve_grid(args, spec: BodySpec | None = None) -> Grid:
    if getattr(args, "grid", None):
        return make_grid(args.grid)
    if spec is not None and spec.grid_size:
        return make_grid(spec.grid_size)
    env = os.environ.get("AFFISO_GRID")
    if env:
        try:
            return make_grid(int(env))
        except ValueError as exc:
            raise SpecError(f"bad AFFISO_GRID value {env!r}: {exc}") from exc
    return make_grid()


# -- report shaping ---------------------------------------------------------


def _ellipse_dict(p: EllipseParams | None):
    if p is None:
        return None
    return {"a": p.a, "alpha": p.alpha, "k": p.k, "center": list(p.center)}


def _report_dict(r: verify.InequalityReport) -> dict:
    return {
        "name": r.name,
        "lhs": r.lhs,
        "rhs": r.rhs,
        "deficit": r.deficit,
        "relative_deficit": r.relative_deficit,
        "equality": r.equality,
        "fitted_ellipse": _ellipse_dict(r.fitted_ellipse),
    }


def _invariance_dict(rep: transforms.InvarianceReport) -> dict:
    return {
        row.name: {"lhs": row.lhs, "rhs": row.rhs, "residual": row.residual, "relative": row.relative}
        for row in rep.rows
    }


# -- subcommands -------------------------------------------------------------


def _cmd_functionals(args, out) -> int:
    spec = load_body_spec(args.body)
    body = spec.build(_resolve_grid(args, spec))
    f = functionals.body_functionals(body)
    out.write(
        to_json(
            {
                "area": f.area,
                "polar_area": f.polar_area,
                "affine_perimeter": f.affine_perimeter,
                "j_form": f.j_form,
            }
        )
        + "\n"
    )
    return 0


def _cmd_check(args, out) -> int:
    specs = [load_body_spec(p) for p in args.bodies]
    grid = _resolve_grid(args, specs[0])
    eq_tol = args.eq_tol
    if args.which == "ai":
        report = verify.check_affine_iso(specs[0].build(grid), eq_tol)
    elif args.which == "bs":
        report = verify.check_blaschke_santalo(specs[0].build(grid), eq_tol)
    elif args.which == "mixed":
        if len(specs) != 2:
            raise SpecError("check mixed needs two body specs (K, then L)")
        report = verify.check_mixed(specs[0].build(grid), specs[1].build(grid), eq_tol)
    else:
        if len(specs) != 2:
            raise SpecError("check main needs two specs (density F, then support h)")
        F = specs[0].build(grid, as_density=True)
        h = specs[1].build(grid)
        report = verify.check_main(F, h, eq_tol)
    out.write(to_json(_report_dict(report)) + "\n")
    return 0 if report.holds(args.tol) else 1


def _cmd_transform(args, out) -> int:
    spec = load_body_spec(args.body)
    grid = _resolve_grid(args, spec)
    body = spec.build(grid)
    if isinstance(body, PolygonBody):
        body = body.support(grid)
    params = transforms.TransformParams(args.lam, args.center)
    image = transforms.transform(body, params)
    block = None
    if body.positive:
        block = _invariance_dict(transforms.check_invariances(body, body, params))
    out.write(
        to_json(
            {
                "lambda": params.lam,
                "center": params.center,
                "values": list(image.values),
                "invariances": block,
            }
        )
        + "\n"
    )
    return 0


def _cmd_position(args, out) -> int:
    spec = load_body_spec(args.body)
    grid = _resolve_grid(args, spec)
    body = spec.build(grid)
    if isinstance(body, PolygonBody):
        body = body.support(grid)
    res = positioning.position(body)
    out.write(
        to_json(
            {
                "a": res.a,
                "b": res.b,
                "grad_norm": res.grad_norm,
                "moments": list(res.moments),
                "converged": res.converged,
                "iterations": res.iterations,
                "positioned": list(res.positioned.values),
            }
        )
        + "\n"
    )
    return 0


def _cmd_decompose(args, out) -> int:
    spec = load_body_spec(args.body)
    grid = _resolve_grid(args, spec)
    body = spec.build(grid)
    dec = measures.decompose_support(body)
    f_fn = body.support(grid) if isinstance(body, PolygonBody) else body
    recon = float(np.max(np.abs(f_fn.values - (dec.h1.values - dec.h2.values))))
    out.write(
        to_json(
            {
                "ratio": dec.ratio,
                "reconstruction_error": recon,
                "h1": list(dec.h1.values),
                "h2": list(dec.h2.values),
            }
        )
        + "\n"
    )
    return 0


def _cmd_demo(args, out) -> int:
    rows = verify.demo_maximize(args.seed, args.steps, miscentered=args.miscentered)
    out.write("step,I,lambda,p,min_u\n")
    for r in rows:
        out.write(
            f"{r.step},{_format_float(r.I)},{_format_float(r.lam)},"
            f"{_format_float(r.p)},{_format_float(r.min_u)}\n"
        )
    return 0


def _cmd_sweep(args, out) -> int:
    grid = _resolve_grid(args)
    out.write("seed,ai_deficit,ai_rel_deficit,bs_deficit,bs_rel_deficit,ai_equality,bs_equality\n")
    ok = True
    for i in range(args.bodies):
        seed = args.seed + i
        body = circle_fn.random_smooth_body(seed, grid=grid)
        ai = verify.check_affine_iso(body)
        bs = verify.check_blaschke_santalo(body)
        ok = ok and ai.holds(args.tol) and bs.holds(args.tol)
        out.write(
            f"{seed},{_format_float(ai.deficit)},{_format_float(ai.relative_deficit)},"
            f"{_format_float(bs.deficit)},{_format_float(bs.relative_deficit)},"
            f"{int(ai.equality)},{int(bs.equality)}\n"
        )
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affiso",
        description=(
            "Support-function calculus and affine isoperimetric inequality checks. "
            "All angles are radians; bodies are JSON specs (see the module docstring)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_grid(p):
        p.add_argument("--grid", type=int, default=None, help="grid size override (even, >= 16)")

    p = sub.add_parser("functionals", help="area, polar area, affine perimeter, J form")
    p.add_argument("body")
    add_grid(p)
    p.set_defaults(fn=_cmd_functionals)

    p = sub.add_parser("check", help="verify an inequality and report the deficit")
    p.add_argument("which", choices=("ai", "bs", "mixed", "main"))
    p.add_argument("bodies", nargs="+", help="body spec file(s)")
    p.add_argument("--eq-tol", dest="eq_tol", type=float, default=verify.EQ_TOL)
    p.add_argument("--tol", type=float, default=1e-8, help="violation threshold on the deficit")
    add_grid(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("transform", help="apply T_{lambda,q} and report invariance residuals")
    p.add_argument("body")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--center", type=float, default=0.0)
    add_grid(p)
    p.set_defaults(fn=_cmd_transform)

    p = sub.add_parser("position", help="Santalo-style centering")
    p.add_argument("body")
    add_grid(p)
    p.set_defaults(fn=_cmd_position)

    p = sub.add_parser("decompose", help="split into a difference of support functions")
    p.add_argument("body")
    add_grid(p)
    p.set_defaults(fn=_cmd_decompose)

    p = sub.add_parser("demo-maximize", help="maximizing-sequence surgery trace (CSV)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--miscentered", action="store_true")
    p.set_defaults(fn=_cmd_demo)

    p = sub.add_parser("sweep", help="deficits over seeded random bodies (CSV)")
    p.add_argument("--bodies", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    add_grid(p)
    p.set_defaults(fn=_cmd_sweep)

    return parser


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    out = stdout if stdout is not None else sys.stdout
    err = stderr if stderr is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args, out)
    except (SpecError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())
