"""Job configuration: an INI-style file plus command-line overrides.

Example::

    [manifold]
    dim = 2
    domain = -1:1, -1:1
    g_0_0 = 1
    g_1_1 = exp(2*u0)

    [field]
    xi_0 = cos(u0)
    xi_1 = sin(u0)*exp(-u0)
    normalize = false

    [evaluate]
    grid = 5, 5
    routes = theorem1, 2d
    tol = 1e-7
    format = table
    seed = 0

A ``[catalog]`` section (``name = ...`` plus parameter keys) replaces both
``[manifold]`` and ``[field]``. ``[evaluate]`` takes exactly one of
``point``, ``grid`` (counts per axis) or ``random`` (number of seeded points).
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import catalog
from .expr import ExprError, parse
from .expr.ast import constant_value
from .framefield import UnitField
from .manifold import ChartMetric, GeometryError, cholesky, sample_points

ROUTES = ("theorem1", "sh", "2d", "frenet", "foliation")
FORMATS = ("table", "csv", "json-lines")
DEFAULT_GRID = 5
DEFAULT_TOL = 1e-7
SYMMETRY_TOL = 1e-12


class ConfigError(ValueError):
    def __init__(self, message: str, location: str | None = None):
        super().__init__(f"{location}: {message}" if location else message)
        self.location = location


@dataclass(frozen=True)
class Problem:
    """What to evaluate: a metric, a field and possibly a closed-form answer."""

    label: str
    metric: ChartMetric
    field: UnitField
    entry: catalog.CatalogEntry | None = None


@dataclass(frozen=True)
class JobConfig:
    problem: Problem
    point: tuple[float, ...] | None = None
    grid: tuple[int, ...] | None = None
    random: int | None = None
    routes: tuple[str, ...] = ("theorem1",)
    tol: float = DEFAULT_TOL
    fmt: str = "table"
    strict: bool = False
    seed: int = 0

    def points(self) -> np.ndarray:
        """Evaluation points; grids are row-major with axis 0 slowest."""
        dom = self.problem.metric.domain
        if self.point is not None:
            return np.array([self.point], dtype=float)
        if self.random is not None:
            rng = np.random.default_rng(self.seed)
            lo = np.array([a for a, _ in dom])
            hi = np.array([b for _, b in dom])
            return lo + rng.random((self.random, len(dom))) * (hi - lo)
        counts = self.grid or (DEFAULT_GRID,) * len(dom)
        axes = [
            np.array([(lo + hi) / 2]) if k == 1 else np.linspace(lo, hi, k)
            for k, (lo, hi) in zip(counts, dom)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass
class Overrides:
    """Values given on the command line; ``None`` means not given."""

    catalog: str | None = None
    params: Mapping[str, str] = field(default_factory=dict)
    grid: Mapping[str, int] = field(default_factory=dict)
    point: str | None = None
    routes: str | None = None
    tol: str | None = None
    fmt: str | None = None
    strict: bool = False
    seed: str | None = None


def _floats(text: str, where: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}", where) from None


def _domain(text: str, where: str) -> tuple[tuple[float, float], ...]:
    out = []
    for part in text.split(","):
        m = re.fullmatch(r"\s*([^:]+):([^:]+)\s*", part)
        if not m:
            raise ConfigError(f"domain interval must look like lo:hi, got {part.strip()!r}", where)
        try:
            lo, hi = constant_value(parse(m.group(1), 0)), constant_value(parse(m.group(2), 0))
        except ExprError as exc:
            raise ConfigError(str(exc), where) from None
        out.append((lo, hi))
    return tuple(out)


def _bool(text: str, where: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}", where)


def _inline_problem(cp: configparser.ConfigParser, source: str) -> Problem:
    sec = cp["manifold"]
    where = f"{source} [manifold]"
    if "dim" not in sec:
        raise ConfigError("missing key 'dim'", where)
    try:
        dim = int(sec["dim"])
    except ValueError:
        raise ConfigError(f"dim must be an integer, got {sec['dim']!r}", f"{where} dim") from None
    if dim < 2:
        raise ConfigError("dim must be at least 2", f"{where} dim")
    if "domain" not in sec:
        raise ConfigError("missing key 'domain'", where)
    domain = _domain(sec["domain"], f"{where} domain")
    if len(domain) != dim:
        raise ConfigError(f"domain has {len(domain)} intervals, dim is {dim}", f"{where} domain")
    entries: dict[tuple[int, int], str] = {}
    for key, value in sec.items():
        if key in ("dim", "domain"):
            continue
        m = re.fullmatch(r"g_(\d+)_(\d+)", key)
        if not m:
            raise ConfigError(f"unknown key {key!r}", where)
        i, j = int(m.group(1)), int(m.group(2))
        if i >= dim or j >= dim:
            raise ConfigError(f"index out of range for dim {dim}", f"{where} {key}")
        entries[(i, j)] = value
    table = [["0"] * dim for _ in range(dim)]
    for (i, j), text in entries.items():
        table[i][j] = text
        if (j, i) not in entries:
            table[j][i] = text
    try:
        metric = ChartMetric.from_strings(table, domain)
    except (ExprError, GeometryError) as exc:
        raise ConfigError(str(exc), where) from None
    if "field" not in cp:
        raise ConfigError("an inline manifold needs a [field] section", source)
    fsec = cp["field"]
    fwhere = f"{source} [field]"
    comps = []
    for k in range(dim):
        key = f"xi_{k}"
        if key not in fsec:
            raise ConfigError(f"missing key {key!r}", fwhere)
        comps.append(fsec[key])
    extra = set(fsec) - {f"xi_{k}" for k in range(dim)} - {"normalize"}
    if extra:
        raise ConfigError(f"unknown key {sorted(extra)[0]!r}", fwhere)
    normalize = _bool(fsec.get("normalize", "false"), f"{fwhere} normalize")
    try:
        fld = UnitField.from_strings(metric, comps, normalize=normalize)
    except (ExprError, GeometryError) as exc:
        raise ConfigError(str(exc), fwhere) from None
    pts = sample_points(domain)
    try:
        asym = metric.check_symmetry(pts)
        if asym > SYMMETRY_TOL:
            raise ConfigError(f"metric is not symmetric (|g_ij - g_ji| up to {asym:.3g})", where)
        for p in pts:
            cholesky(metric.jets(p)[0])
    except (ExprError, GeometryError) as exc:
        raise ConfigError(str(exc), where) from None
    try:
        fld.check_unit()
    except (ExprError, GeometryError) as exc:
        raise ConfigError(str(exc), fwhere) from None
    return Problem("inline", metric, fld)


def catalog_problem(name: str, params: Mapping[str, object], where: str | None = None) -> Problem:
    try:
        entry = catalog.instantiate(name, params)
    except catalog.CatalogError as exc:
        raise ConfigError(str(exc), where) from None
    label = name
    if entry.params:
        label += " " + " ".join(f"{k}={entry.params[k]!r}" for k in entry.params)
    return Problem(label, entry.metric, entry.field, entry)


def load_job(config_path: str | None, ov: Overrides) -> JobConfig:
    """Merge a config file (optional) with command-line overrides and validate."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    source = config_path or "<command line>"
    if config_path is not None:
        try:
            with open(config_path, encoding="utf-8") as fh:
                cp.read_file(fh, source=config_path)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc.strerror}", config_path) from None
        except configparser.Error as exc:
            raise ConfigError(str(exc).replace("\n", " "), config_path) from None
    for sec in cp.sections():
        if sec not in ("manifold", "field", "catalog", "evaluate"):
            raise ConfigError(f"unknown section [{sec}]", source)

    has_inline = "manifold" in cp
    cat_name = ov.catalog or (cp["catalog"].get("name") if "catalog" in cp else None)
    if has_inline and cat_name:
        raise ConfigError("give either an inline [manifold] or a catalog entry, not both", source)
    if has_inline:
        if ov.params:
            raise ConfigError("--param applies to catalog entries only", source)
        problem = _inline_problem(cp, source)
    elif cat_name:
        params = {}
        if "catalog" in cp:
            params.update({k: v for k, v in cp["catalog"].items() if k != "name"})
        params.update(ov.params)
        problem = catalog_problem(cat_name, params, f"{source} [catalog]")
    else:
        raise ConfigError("no manifold given: use an inline [manifold] section or a catalog entry", source)

    ev = cp["evaluate"] if "evaluate" in cp else {}
    ewhere = f"{source} [evaluate]"
    known = {"point", "grid", "random", "routes", "tol", "format", "strict", "seed"}
    for key in ev:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", ewhere)
    dim = problem.metric.dim

    point = grid = random = None
    point_text = ov.point if ov.point is not None else ev.get("point")
    if ov.grid:
        counts = [DEFAULT_GRID] * dim
        for axis, count in ov.grid.items():
            idx = _axis_index(axis, dim)
            counts[idx] = count
        grid = tuple(counts)
    elif "grid" in ev and ov.point is None:
        try:
            grid = tuple(int(x) for x in ev["grid"].split(","))
        except ValueError:
            raise ConfigError(f"grid must be comma-separated integers, got {ev['grid']!r}", f"{ewhere} grid") from None
        if len(grid) != dim:
            raise ConfigError(f"grid has {len(grid)} counts, dim is {dim}", f"{ewhere} grid")
    if grid is None and point_text is not None:
        point = _floats(point_text, f"{ewhere} point")
        if len(point) != dim:
            raise ConfigError(f"point has {len(point)} coordinates, dim is {dim}", f"{ewhere} point")
        if not problem.metric.contains(point):
            raise ConfigError(f"point {list(point)} outside the domain", f"{ewhere} point")
    if grid is None and point is None and "random" in ev:
        try:
            random = int(ev["random"])
        except ValueError:
            raise ConfigError(f"random must be an integer, got {ev['random']!r}", f"{ewhere} random") from None
        if random < 1:
            raise ConfigError("random point count must be at least 1", f"{ewhere} random")
    if grid is not None and min(grid) < 1:
        raise ConfigError("grid counts must be at least 1", f"{ewhere} grid")

    routes_text = ov.routes if ov.routes is not None else ev.get("routes", "theorem1")
    routes = tuple(r.strip() for r in routes_text.split(",") if r.strip())
    for r in routes:
        if r not in ROUTES:
            raise ConfigError(f"unknown route {r!r}; choose from {', '.join(ROUTES)}", f"{ewhere} routes")
        if r in ("2d", "frenet") and dim != 2:
            raise ConfigError(f"route {r!r} needs a 2-dimensional manifold", f"{ewhere} routes")
    if "theorem1" not in routes:
        routes = ("theorem1",) + routes
    routes = tuple(dict.fromkeys(routes))

    tol_text = ov.tol if ov.tol is not None else ev.get("tol")
    tol = DEFAULT_TOL
    if tol_text is not None:
        try:
            tol = float(tol_text)
        except ValueError:
            raise ConfigError(f"tol must be a number, got {tol_text!r}", f"{ewhere} tol") from None
        if not tol > 0:
            raise ConfigError("tol must be positive", f"{ewhere} tol")

    fmt = ov.fmt if ov.fmt is not None else ev.get("format", "table")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {', '.join(FORMATS)}", f"{ewhere} format")
    strict = ov.strict or _bool(ev.get("strict", "false"), f"{ewhere} strict")
    seed_text = ov.seed if ov.seed is not None else ev.get("seed", "0")
    try:
        seed = int(seed_text)
    except ValueError:
        raise ConfigError(f"seed must be an integer, got {seed_text!r}", f"{ewhere} seed") from None
    return JobConfig(problem, point, grid, random, routes, tol, fmt, strict, seed)


def _axis_index(axis: str, dim: int) -> int:
    m = re.fullmatch(r"u?(\d+)", axis.strip())
    if not m or int(m.group(1)) >= dim:
        raise ConfigError(f"unknown grid axis {axis!r} for dimension {dim}", "--grid")
    return int(m.group(1))


def parse_assignments(items: Sequence[str], flag: str) -> dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {item!r}", flag)
        out[key.strip()] = value.strip()
    return out
