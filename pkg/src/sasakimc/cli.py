"""Command-line front end: ``sasakimc analyze | verify | catalog``.

Exit codes: 0 success or PASS, 1 verification FAIL, 2 configuration error,
3 evaluation error with ``--strict``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import catalog
from .config import FORMATS, ROUTES, ConfigError, JobConfig, Overrides, load_job, parse_assignments
from .expr import ExprError
from .manifold import GeometryError
from .mean_curvature import (
    ConsistencyError,
    foliation_mean_curvature_at,
    mean_curvature_2d_at,
    mean_curvature_at,
    mean_curvature_frenet_at,
    mean_curvature_sh_at,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_EVAL = 0, 1, 2, 3
EVAL_ERRORS = (GeometryError, ExprError, ConsistencyError, ArithmeticError)


class StrictFailure(RuntimeError):
    pass


@dataclass
class RouteResult:
    H: list[float] | None = None
    H_abs: float | None = None
    error: str | None = None


@dataclass
class PointResult:
    index: int
    point: list[float]
    lam: list[float] = field(default_factory=list)
    H: list[float] = field(default_factory=list)
    H_abs: float | None = None
    density: float | None = None
    degenerate: bool | None = None
    routes: dict[str, RouteResult] = field(default_factory=dict)
    error: str | None = None


def _floats(xs) -> list[float]:
    # + 0.0 folds -0.0 into 0.0 so reports never show a signed zero
    return [float(x) + 0.0 for x in xs]


def _run_route(name: str, f, p) -> RouteResult:
    if name == "sh":
        h = mean_curvature_sh_at(f, p).components
    elif name == "2d":
        h = np.array([mean_curvature_2d_at(f, p)])
    elif name == "frenet":
        h = np.array([mean_curvature_frenet_at(f, p)])
    elif name == "foliation":
        h = foliation_mean_curvature_at(f, p)
    else:
        raise ValueError(name)
    return RouteResult(_floats(h), float(np.sqrt(np.sum(h * h))))


def evaluate_point(job: JobConfig, index: int, p: np.ndarray) -> PointResult:
    f = job.problem.field
    res = PointResult(index, [float(x) for x in p])
    try:
        mc = mean_curvature_at(f, p)
    except EVAL_ERRORS as exc:
        res.error = str(exc)
        if job.strict:
            raise StrictFailure(f"point {index} {res.point}: {exc}") from None
        return res
    res.lam = _floats(mc.lam)
    res.H = _floats(mc.components)
    res.H_abs = float(mc.magnitude)
    res.density = float(np.prod(np.sqrt(1.0 + mc.lam**2)))
    res.degenerate = bool(mc.degenerate_flag)
    for route in job.routes:
        if route == "theorem1":
            continue
        try:
            res.routes[route] = _run_route(route, f, p)
        except EVAL_ERRORS as exc:
            if job.strict:
                raise StrictFailure(f"point {index} {res.point}, route {route}: {exc}") from None
            res.routes[route] = RouteResult(error=str(exc))
    return res


def evaluate_all(job: JobConfig) -> list[PointResult]:
    return [evaluate_point(job, i, p) for i, p in enumerate(job.points())]


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return repr(float(x) + 0.0)


def _vec(xs) -> str:
    return "[" + ", ".join(_num(x) for x in xs) + "]"


def _json_num(x):
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return None
    return float(x) + 0.0


def summarize(results: list[PointResult], tol: float) -> dict:
    mags = np.array([r.H_abs for r in results if r.H_abs is not None])
    errors = sum(1 for r in results if r.error is not None)
    route_errors = sum(1 for r in results for rr in r.routes.values() if rr.error is not None)
    out = {"points": len(results), "errors": errors, "route_errors": route_errors}
    if len(mags):
        std = float(np.std(mags))
        out.update(
            {
                "min_H_abs": float(mags.min()),
                "max_H_abs": float(mags.max()),
                "stddev_H_abs": std,
                "constant": bool(std < tol),
                "minimal": bool(mags.max() < tol),
            }
        )
    else:
        out.update({"min_H_abs": None, "max_H_abs": None, "stddev_H_abs": None, "constant": None, "minimal": None})
    out["tol"] = tol
    return out


def _extra_routes(job: JobConfig) -> list[str]:
    return [r for r in job.routes if r != "theorem1"]


def _point_desc(job: JobConfig) -> str:
    if job.point is not None:
        return "single point"
    if job.random is not None:
        return f"{job.random} random points (seed {job.seed})"
    counts = job.grid or (5,) * job.problem.metric.dim
    return "grid " + "x".join(str(c) for c in counts)


def _table(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]


def render_analyze(job: JobConfig, results: list[PointResult], summary: dict) -> str:
    extra = _extra_routes(job)
    dim = job.problem.metric.dim
    n = dim - 1
    if job.fmt == "json-lines":
        lines = []
        for r in results:
            rec = {
                "index": r.index,
                "point": r.point,
                "lambda": r.lam,
                "H": r.H,
                "H_abs": _json_num(r.H_abs),
                "volume_density": _json_num(r.density),
                "degenerate": r.degenerate,
                "routes": {
                    k: {"H": v.H, "H_abs": _json_num(v.H_abs), "error": v.error} for k, v in r.routes.items()
                },
                "error": r.error,
            }
            lines.append(json.dumps(rec))
        lines.append(json.dumps({"summary": summary}))
        return "\n".join(lines) + "\n"
    if job.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["index"] + [f"u{i}" for i in range(dim)] + [f"lambda_{a + 1}" for a in range(n)]
        header += [f"H_{a + 1}" for a in range(n)] + ["H_abs", "volume_density", "degenerate"]
        header += [f"{r}_H_abs" for r in extra] + ["error"]
        w.writerow(header)
        for r in results:
            lam = r.lam or [None] * n
            H = r.H or [None] * n
            row = [str(r.index)] + [_num(x) for x in r.point] + [_num(x) for x in lam] + [_num(x) for x in H]
            row += [_num(r.H_abs), _num(r.density), _num(r.degenerate)]
            row += [_num(r.routes[k].H_abs) if k in r.routes else "" for k in extra]
            errs = [r.error] if r.error else [f"{k}: {v.error}" for k, v in r.routes.items() if v.error]
            row.append("; ".join(errs))
            w.writerow(row)
        w.writerow([])
        w.writerow(["summary", "value"])
        for k, v in summary.items():
            w.writerow([k, _num(v) if not isinstance(v, int) or isinstance(v, bool) else str(v)])
        return buf.getvalue()
    lines = [f"# analyze {job.problem.label}", f"# {_point_desc(job)}; routes: {', '.join(job.routes)}"]
    rows = [["index", "point", "|H|", "lambda", "H", "density", "degenerate"] + [f"|H| {r}" for r in extra]]
    for r in results:
        if r.error is not None:
            rows.append([str(r.index), _vec(r.point), "error: " + r.error, "", "", "", ""] + [""] * len(extra))
            continue
        row = [str(r.index), _vec(r.point), _num(r.H_abs), _vec(r.lam), _vec(r.H), _num(r.density),
               "yes" if r.degenerate else "no"]
        for k in extra:
            rr = r.routes[k]
            row.append(_num(rr.H_abs) if rr.error is None else "error: " + rr.error)
        rows.append(row)
    lines += _table(rows)
    lines.append("")
    lines.append("summary")
    lines += _table([["  " + k, _num(v) if isinstance(v, (bool, float)) or v is None else str(v)]
                     for k, v in summary.items()])
    return "\n".join(lines) + "\n"


@dataclass
class Deviation:
    quantity: str
    max_dev: float
    ok: bool


def verify_results(job: JobConfig, results: list[PointResult]) -> tuple[list[Deviation], bool]:
    entry = job.problem.entry
    worst: dict[str, float] = {}
    failed_points = 0

    def note(key, value):
        worst[key] = max(worst.get(key, 0.0), value)

    for r in results:
        if r.error is not None:
            failed_points += 1
            continue
        p = np.array(r.point)
        exp = entry.expected(p)
        note("H_abs", abs(r.H_abs - exp.magnitude))
        if exp.components is not None:
            idx = catalog.match_components(r.lam, exp.components)
            for k, (j, (_, h)) in enumerate(zip(idx, exp.components)):
                note(f"H_{k + 1}", math.inf if j is None else abs(abs(r.H[j]) - h))
        if exp.spectrum is not None:
            got = sorted([abs(x) for x in r.lam] + [0.0], reverse=True)
            note("spectrum", float(np.max(np.abs(np.array(got) - np.array(exp.spectrum)))))
        for k, rr in r.routes.items():
            note(f"route {k}", math.inf if rr.error is not None else abs(rr.H_abs - exp.magnitude))
    devs = [Deviation(k, v, v <= job.tol) for k, v in worst.items()]
    if failed_points:
        devs.append(Deviation("evaluation errors", float(failed_points), False))
    passed = bool(results) and all(d.ok for d in devs)
    return devs, passed


def render_verify(job: JobConfig, devs: list[Deviation], passed: bool, npoints: int) -> str:
    verdict = "PASS" if passed else "FAIL"
    if job.fmt == "json-lines":
        lines = [json.dumps({"quantity": d.quantity, "max_deviation": _json_num(d.max_dev), "tol": job.tol,
                             "ok": d.ok}) for d in devs]
        lines.append(json.dumps({"result": verdict, "points": npoints, "tol": job.tol}))
        return "\n".join(lines) + "\n"
    if job.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "max_deviation", "tol", "status"])
        for d in devs:
            w.writerow([d.quantity, _num(d.max_dev), _num(job.tol), "ok" if d.ok else "FAIL"])
        w.writerow(["result", verdict, "", ""])
        return buf.getvalue()
    lines = [f"# verify {job.problem.label}", f"# {_point_desc(job)} ({npoints} points); tol {_num(job.tol)}"]
    rows = [["quantity", "max deviation", "status"]]
    rows += [[d.quantity, _num(d.max_dev), "ok" if d.ok else "FAIL"] for d in devs]
    lines += _table(rows)
    lines.append(f"RESULT: {verdict}")
    return "\n".join(lines) + "\n"


def run_analyze(job: JobConfig) -> tuple[str, dict]:
    results = evaluate_all(job)
    summary = summarize(results, job.tol)
    return render_analyze(job, results, summary), summary


def run_verify(job: JobConfig) -> tuple[str, bool]:
    if job.problem.entry is None:
        raise ConfigError("verify needs a catalog entry with a closed-form answer")
    results = evaluate_all(job)
    devs, passed = verify_results(job, results)
    return render_verify(job, devs, passed, len(results)), passed


def run_catalog(fmt: str = "table") -> str:
    rows = catalog.listing()
    if fmt == "json-lines":
        return "".join(
            json.dumps({"name": r.name, "params": list(r.params), "provenance": r.provenance}) + "\n" for r in rows
        )
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "params", "provenance"])
        for r in rows:
            w.writerow([r.name, "; ".join(r.params), r.provenance])
        return buf.getvalue()
    lines = []
    for r in rows:
        lines.append(r.name)
        lines.append(f"  provenance: {r.provenance}")
        for p in r.params:
            lines.append(f"  param {p}")
    return "\n".join(lines) + "\n"


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--catalog", metavar="NAME")
    common.add_argument("--param", action="append", default=[], metavar="K=V")
    common.add_argument("--grid", action="append", default=[], metavar="AXIS=COUNT")
    common.add_argument("--point", metavar="V1,V2,...")
    common.add_argument("--routes", metavar="LIST", help=f"comma-separated subset of {', '.join(ROUTES)}")
    common.add_argument("--tol", metavar="X")
    common.add_argument("--format", choices=FORMATS, dest="fmt")
    common.add_argument("--strict", action="store_true")
    common.add_argument("--seed", metavar="N")
    parser = argparse.ArgumentParser(prog="sasakimc", description="Mean curvature of unit vector fields in the unit tangent bundle.")
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("analyze", parents=[common], help="evaluate H over points")
    sub.add_parser("verify", parents=[common], help="compare against a catalog closed form")
    cat = sub.add_parser("catalog", help="list built-in examples")
    cat.add_argument("--format", choices=FORMATS, dest="fmt", default="table")
    return parser


def _overrides(args) -> Overrides:
    grid = {}
    for axis, count in parse_assignments(args.grid, "--grid").items():
        try:
            grid[axis] = int(count)
        except ValueError:
            raise ConfigError(f"grid count must be an integer, got {count!r}", "--grid") from None
        if grid[axis] < 1:
            raise ConfigError("grid counts must be at least 1", "--grid")
    return Overrides(
        catalog=args.catalog,
        params=parse_assignments(args.param, "--param"),
        grid=grid,
        point=args.point,
        routes=args.routes,
        tol=args.tol,
        fmt=args.fmt,
        strict=args.strict,
        seed=args.seed,
    )


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = _parser().parse_args(argv)
    if args.verb == "catalog":
        stdout.write(run_catalog(args.fmt))
        return EXIT_OK
    try:
        job = load_job(args.config, _overrides(args))
        if args.verb == "analyze":
            text, _ = run_analyze(job)
            stdout.write(text)
            return EXIT_OK
        text, passed = run_verify(job)
        stdout.write(text)
        return EXIT_OK if passed else EXIT_FAIL
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except StrictFailure as exc:
        stderr.write(f"evaluation error: {exc}\n")
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
