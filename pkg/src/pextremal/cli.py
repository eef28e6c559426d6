"""Batch command-line front end.

Usage::

    pextremal eval-grid --config cfg.json --out grid.csv
    pextremal check --suite product --seed 0 --out report.json
    pextremal ma-grid --config mass.json --out mass.json
    pextremal explore-support --config explore.json --refine 2 --out summary.json
    pextremal approx-body --config approx.json --out vertices.csv

Exit codes: 0 success, 1 failed check or numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from pathlib import Path
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .checks import SCHEMA, SUITES, run_suite
from .convex_body import ConvexBody, direction_set, extreme_points, outer_polytope_approximation, support_value
from .errors import NumericalError, PExtremalError
from .grid import GridSpec
from .mass import MassReport, grid_for_sets, ma_mass, require_margin, support_explore
from .potentials import DEFAULT_APPROX_LEVEL, indicator_H, potential_u
from .product import ProductField, p_extremal
from .univariate import NORMALIZATION_NOTE, planar_set_from_dict

COMMANDS = ("eval-grid", "check", "ma-grid", "explore-support", "approx-body")
_REQUIRED = {
    "eval-grid": ("body", "sets", "grid"),
    "check": (),
    "ma-grid": ("body", "sets"),
    "explore-support": ("body", "sets", "step"),
    "approx-body": ("body",),
}


class ConfigError(Exception):
    """Invalid configuration, reported with the offending line."""


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")
    path: str | None = None
    format: Literal["csv", "json"] | None = None


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    command: Literal["eval-grid", "check", "ma-grid", "explore-support", "approx-body"]
    body: Any = None
    sets: Any = None
    grid: Any = None
    tolerances: dict[str, float] = Field(default_factory=dict)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seed: int = Field(0, ge=0)
    suite: str | None = None
    samples: int | None = Field(None, gt=0)
    smoothing: float | None = Field(None, gt=0)
    step: float | None = Field(None, gt=0)
    margin_factor: float = Field(5.0, ge=5.0)
    approx_level: int = Field(DEFAULT_APPROX_LEVEL, ge=1)
    levels: list[int] = Field(default_factory=lambda: [16, 32, 64])
    refine: int = Field(2, ge=1)
    refine_ratio: float = Field(0.75, gt=0, lt=1)

    @field_validator("body", mode="before")
    @classmethod
    def _body(cls, v):
        if v is None or isinstance(v, ConvexBody):
            return v
        if not isinstance(v, dict):
            raise ValueError("body must be an object")
        try:
            return ConvexBody.from_dict(v)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"incomplete body descriptor: {exc}") from exc

    @field_validator("sets", mode="before")
    @classmethod
    def _sets(cls, v):
        if v is None:
            return v
        if not isinstance(v, list) or not v:
            raise ValueError("sets must be a non-empty list")
        return [planar_set_from_dict(s) if isinstance(s, dict) else s for s in v]

    @field_validator("grid", mode="before")
    @classmethod
    def _grid(cls, v):
        if v is None or isinstance(v, GridSpec):
            return v
        try:
            return GridSpec.from_dict(v)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"incomplete grid descriptor: {exc}") from exc

    @field_validator("suite")
    @classmethod
    def _suite(cls, v):
        if v is not None and v not in SUITES:
            raise ValueError(f"unknown suite {v!r}; choose from {', '.join(SUITES)}")
        return v

    @model_validator(mode="after")
    def _complete(self):
        missing = [k for k in _REQUIRED[self.command] if getattr(self, k) is None]
        if missing:
            raise ValueError(f"command {self.command} needs {', '.join(missing)}")
        if self.body is not None and self.sets is not None and len(self.sets) != self.body.dim:
            raise ValueError(f"body has dimension {self.body.dim} but {len(self.sets)} sets are given")
        if self.grid is not None and self.sets is not None and self.grid.dim != len(self.sets):
            raise ValueError(f"grid has dimension {self.grid.dim} but {len(self.sets)} sets are given")
        return self


def _line_of(text: str, loc) -> int:
    """1-based line of the deepest key in loc that can be found in text."""
    pos = 0
    for key in loc:
        if not isinstance(key, str):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Parse and validate a JSON config; raise ConfigError with a line number."""
    if path is None:
        text, raw, name = "", {}, "<arguments>"
    else:
        name = path
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}:1: config must be a JSON object")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"]) or ("command",)
        where = ".".join(str(p) for p in err["loc"]) or "config"
        raise ConfigError(f"{name}:{_line_of(text, loc)}: {where}: {err['msg']}") from exc


def _finite(operation: str, values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NumericalError(operation, f"{int((~np.isfinite(arr)).sum())} non-finite value(s)")
    return arr


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows, comments=()) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        for c in (f"normalization: {NORMALIZATION_NOTE}", *comments):
            fh.write(f"# {c}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_fmt(v) for v in row] for row in rows)


def write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _sibling(out: Path, tag: str) -> Path:
    return out.with_name(f"{out.stem}.{tag}{out.suffix}")


def cmd_eval_grid(cfg: RunConfig, out: Path, fmt: str) -> int:
    z = cfg.grid.points()
    body, sets = cfg.body, cfg.sets
    approx = None if body.is_polytope else cfg.approx_level
    cols = {
        "p_extremal": _finite("p_extremal", p_extremal(body, sets, z)),
        "indicator_H": _finite("indicator_H", indicator_H(body, z)),
        "potential_u": _finite("potential_u", potential_u(body, z, approx)),
    }
    coord_names = [f"{p}_z{j + 1}" for j in range(body.dim) for p in ("re", "im")]
    coords = np.stack([f(z[:, j]) for j in range(body.dim) for f in (np.real, np.imag)], axis=-1)
    if fmt == "csv":
        rows = (list(c) + [cols[k][i] for k in cols] for i, c in enumerate(coords))
        write_csv(out, coord_names + list(cols), rows, [f"potential_u approx_level: {approx}"])
    else:
        write_json(out, {
            "schema": SCHEMA, "normalization": NORMALIZATION_NOTE, "body": body.to_dict(),
            "sets": [s.to_dict() for s in sets], "grid": cfg.grid.to_dict(), "approx_level": approx,
            "columns": coord_names + list(cols),
            "rows": [list(map(float, c)) + [float(cols[k][i]) for k in cols] for i, c in enumerate(coords)],
        })
    return 0


def cmd_check(cfg: RunConfig, out: Path, fmt: str) -> int:
    suite = cfg.suite or "product"
    kwargs = {}
    if cfg.samples is not None:
        kwargs["n"] = cfg.samples
    if suite == "product":
        kwargs.update(body=cfg.body, sets=cfg.sets)
    report = run_suite(suite, seed=cfg.seed, tolerances=cfg.tolerances, **kwargs)
    if fmt == "csv":
        rows = ([c["name"], c["kind"], c["measured"], c["tol"], c["margin"], str(c["passed"]).lower()]
                for c in report["checks"])
        write_csv(out, ["name", "kind", "measured", "tol", "margin", "passed"], rows,
                  [f"schema: {SCHEMA}", f"suite: {suite}", f"seed: {cfg.seed}"])
    else:
        write_json(out, report)
    for c in report["checks"]:
        if not c["passed"]:
            print(f"FAIL {suite}: {c['name']} measured={c['measured']:.6g} tol={c['tol']:.3g}",
                  file=sys.stderr)
    return 0 if report["passed"] else 1


def _write_mass(report: MassReport, out: Path, fmt: str, extra: dict) -> None:
    _finite("ma_mass", [report.total])
    if fmt == "csv":
        x, y, m = report.heatmap()
        comments = [f"total: {_fmt(report.total)}", f"smoothing: {_fmt(report.smoothing)}"]
        if report.dim == 2:
            comments.append("cells: marginal over (Re z1, Re z2)")
        write_csv(out, ["x", "y", "mass"], zip(x, y, m), comments)
    else:
        write_json(out, {**report.to_dict(), **extra})


def cmd_ma_grid(cfg: RunConfig, out: Path, fmt: str) -> int:
    if cfg.grid is not None:
        grid = cfg.grid
        smoothing = cfg.smoothing if cfg.smoothing is not None else 4 * grid.step
    else:
        if cfg.step is None:
            raise ConfigError("ma-grid needs either grid or step")
        smoothing = cfg.smoothing if cfg.smoothing is not None else 4 * cfg.step
        grid = grid_for_sets(cfg.sets, cfg.step, smoothing, cfg.margin_factor)
    require_margin(grid, cfg.sets, smoothing)
    report = ma_mass(ProductField(cfg.body, cfg.sets), grid, smoothing)
    _write_mass(report, out, fmt, {"body": cfg.body.to_dict(), "sets": [s.to_dict() for s in cfg.sets]})
    return 0


def cmd_explore_support(cfg: RunConfig, out: Path, fmt: str) -> int:
    body = cfg.body
    if body.is_polytope or body.dim != 2:
        raise ConfigError("explore-support needs a 2-dimensional l^q body")
    levels = max(2, cfg.refine)
    tol = cfg.tolerances.get("cauchy", 0.05)
    summary = []
    for k in range(levels):
        step = cfg.step * cfg.refine_ratio ** k
        smoothing = 4 * step
        grid = grid_for_sets(cfg.sets, step, smoothing, cfg.margin_factor)
        report = support_explore(body.q, cfg.sets, grid, smoothing)
        path = _sibling(out, f"level{k}")
        _write_mass(report, path, fmt, {"q": body.to_dict()["q"], "sets": [s.to_dict() for s in cfg.sets],
                                        "level": k})
        summary.append({"level": k, "step": step, "smoothing": smoothing,
                        "total": report.total, "file": path.name})
    diffs = [abs(b["total"] - a["total"]) / abs(b["total"]) for a, b in zip(summary, summary[1:])]
    passed = max(diffs) <= tol
    doc = {"schema": SCHEMA, "normalization": NORMALIZATION_NOTE, "q": body.to_dict()["q"],
           "sets": [s.to_dict() for s in cfg.sets], "levels": summary,
           "successive_relative_differences": diffs, "cauchy_tol": tol, "cauchy_passed": passed,
           "note": "exploratory cell-mass evidence; no statement about the true support"}
    if fmt == "csv":
        write_csv(out, ["level", "step", "smoothing", "total", "file"],
                  ([s["level"], s["step"], s["smoothing"], s["total"], s["file"]] for s in summary),
                  [f"cauchy_tol: {_fmt(tol)}", f"cauchy_passed: {str(passed).lower()}"])
    else:
        write_json(out, doc)
    if not passed:
        print(f"FAIL explore-support: refinement totals differ by {max(diffs):.4g} > {tol}", file=sys.stderr)
    return 0 if passed else 1


def sphere_directions(dim: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors: an even angular grid for d = 2, Gaussian samples otherwise."""
    if dim == 2:
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    x = rng.normal(size=(n, dim))
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def support_gap_curve(body: ConvexBody, levels, samples: int = 4096, seed: int = 0) -> list[dict]:
    """sup over unit vectors of phi_{P_n} - phi_P, for each approximation level n."""
    x = sphere_directions(body.dim, samples, np.random.default_rng(seed))
    exact = support_value(body, x)
    out = []
    for n in levels:
        approx = outer_polytope_approximation(body, n)
        gap = _finite("support_gap", support_value(approx, x) - exact)
        out.append({"level": n, "n_vertices": int(len(extreme_points(approx))),
                    "n_directions": int(len(direction_set(body.dim, n))),
                    "sup_gap": float(np.max(gap)), "min_gap": float(np.min(gap))})
    return out


def cmd_approx_body(cfg: RunConfig, out: Path, fmt: str) -> int:
    body = cfg.body
    if body.is_polytope:
        raise ConfigError("approx-body needs an l^q body")
    curve = support_gap_curve(body, cfg.levels, cfg.samples or 4096, cfg.seed)
    verts = {n: extreme_points(outer_polytope_approximation(body, n)) for n in cfg.levels}
    if fmt == "csv":
        rows = ([n, i] + list(v) for n in cfg.levels for i, v in enumerate(verts[n]))
        write_csv(out, ["level", "index"] + [f"x{j + 1}" for j in range(body.dim)], rows,
                  ["extreme points of the outer approximation P_n (origin omitted)"])
        write_csv(_sibling(out, "gap"), ["level", "n_vertices", "n_directions", "sup_gap", "min_gap"],
                  ([c["level"], c["n_vertices"], c["n_directions"], c["sup_gap"], c["min_gap"]]
                   for c in curve))
    else:
        write_json(out, {"schema": SCHEMA, "normalization": NORMALIZATION_NOTE, "body": body.to_dict(),
                         "vertices": {str(n): verts[n].tolist() for n in cfg.levels},
                         "support_gap": curve})
    return 0


_HANDLERS = {
    "eval-grid": cmd_eval_grid,
    "check": cmd_check,
    "ma-grid": cmd_ma_grid,
    "explore-support": cmd_explore_support,
    "approx-body": cmd_approx_body,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pextremal", description=__doc__.split("\n")[0])
    ap.add_argument("command", nargs="?", choices=COMMANDS,
                    help="operation to run (overrides the config's command)")
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--out", help="output path (overrides config output.path)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format")
    ap.add_argument("--seed", type=int, help="seed for randomised suites")
    ap.add_argument("--suite", choices=SUITES, help="check suite name")
    ap.add_argument("--refine", type=int, help="number of refinement levels for explore-support")
    return ap


def run(cfg: RunConfig, out: str | None = None, fmt: str | None = None) -> int:
    path = out or cfg.output.path
    if path is None:
        raise ConfigError("no output path: give --out or output.path")
    path = Path(path)
    fmt = fmt or cfg.output.format or ("csv" if path.suffix == ".csv" else "json")
    path.parent.mkdir(parents=True, exist_ok=True)
    return _HANDLERS[cfg.command](cfg, path, fmt)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"command": args.command, "seed": args.seed, "suite": args.suite, "refine": args.refine}
    try:
        cfg = load_config(args.config, overrides)
        return run(cfg, args.out, args.format)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure in {exc}", file=sys.stderr)
        return 1
    except (PExtremalError, ValueError) as exc:
        print(f"config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
