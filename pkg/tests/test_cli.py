import csv
import io
import json
import math
import os
import re
from pathlib import Path

import numpy as np
import pytest

from sasakimc import catalog
from sasakimc.cli import EXIT_CONFIG, EXIT_EVAL, EXIT_FAIL, EXIT_OK, main

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = ["lobachevsky2_a1", "exp2uv_origin", "vf1_verify"]
# set SASAKIMC_REGEN_GOLDEN=1 to rewrite the expected outputs
REGEN = os.environ.get("SASAKIMC_REGEN_GOLDEN") == "1"
NUMBER = re.compile(r"-?\d+\.\d*(?:e[-+]?\d+)?|-?\d+e[-+]?\d+")


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _same_up_to_rounding(got: str, want: str) -> bool:
    """Text equal once floats are masked, and every float within 1e-12."""
    if NUMBER.sub("#", got) != NUMBER.sub("#", want):
        return False
    a = [float(x) for x in NUMBER.findall(got)]
    b = [float(x) for x in NUMBER.findall(want)]
    return all(abs(x - y) <= 1e-12 * max(1.0, abs(y)) for x, y in zip(a, b))


@pytest.mark.parametrize("verb", ["analyze", "verify"])
@pytest.mark.parametrize("name", CONFIGS)
def test_golden_output(name, verb):
    code, out, _ = run(verb, "--config", str(GOLDEN / f"{name}.ini"))
    assert code == EXIT_OK
    path = GOLDEN / f"{name}.{verb}.txt"
    if REGEN:
        path.write_text(out, encoding="utf-8")
    want = path.read_text(encoding="utf-8")
    # exact on the machine that wrote the files; last-bit BLAS noise tolerated elsewhere
    assert out == want or _same_up_to_rounding(out, want)


@pytest.mark.parametrize("verb", ["analyze", "verify"])
@pytest.mark.parametrize("name", CONFIGS)
def test_runs_are_byte_identical(name, verb):
    first = run(verb, "--config", str(GOLDEN / f"{name}.ini"))
    second = run(verb, "--config", str(GOLDEN / f"{name}.ini"))
    assert first == second


def test_random_points_follow_seed():
    a = run("analyze", "--catalog", "exp2uv", "--seed", "4", "--format", "csv", "--config", str(GOLDEN / "random.ini"))
    b = run("analyze", "--catalog", "exp2uv", "--seed", "4", "--format", "csv", "--config", str(GOLDEN / "random.ini"))
    c = run("analyze", "--catalog", "exp2uv", "--seed", "5", "--format", "csv", "--config", str(GOLDEN / "random.ini"))
    assert a == b
    assert a[1] != c[1]


VF2_JOB = [
    "analyze", "--catalog", "lob_np1_vf2", "--param", "n=3", "--param", "theta=0.9", "--param", "a=2",
    "--grid", "u0=3", "--grid", "u1=2", "--grid", "u2=1", "--grid", "u3=1",
]


def test_csv_round_trip():
    code, out, _ = run(*VF2_JOB, "--format", "csv")
    assert code == EXIT_OK
    body = out.split("\n\n")[0]
    rows = list(csv.DictReader(io.StringIO(body)))
    assert len(rows) == 6
    _, js, _ = run(*VF2_JOB, "--format", "json-lines")
    recs = [json.loads(line) for line in js.splitlines()[:-1]]
    for row, rec in zip(rows, recs):
        assert float(row["H_abs"]) == rec["H_abs"]
        assert [float(row[f"H_{k}"]) for k in (1, 2, 3)] == rec["H"]
        assert [float(row[f"lambda_{k}"]) for k in (1, 2, 3)] == rec["lambda"]
        # shortest repr round-trips through 17 significant digits too
        for key in ("H_abs", "volume_density"):
            assert float(f"{float(row[key]):.17g}") == float(row[key])


def test_no_signed_zero_in_output():
    for fmt in ("table", "csv", "json-lines"):
        _, out, _ = run("analyze", "--catalog", "euclidean", "--param", "n=2", "--point", "0,0,0", "--format", fmt)
        assert "-0.0" not in out


def test_analyze_examples():
    _, out, _ = run("analyze", "--catalog", "lobachevsky2", "--param", "a=1", "--format", "json-lines")
    summary = json.loads(out.splitlines()[-1])["summary"]
    assert summary["points"] == 25 and summary["constant"] is True
    assert summary["max_H_abs"] == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-12)

    _, out, _ = run("analyze", "--catalog", "euclidean", "--param", "n=2", "--format", "json-lines")
    assert json.loads(out.splitlines()[-1])["summary"]["minimal"] is True

    _, out, _ = run("analyze", "--catalog", "exp2uv", "--point", "0,0", "--format", "json-lines")
    rec, summary = (json.loads(x) for x in out.splitlines())
    assert rec["H_abs"] == pytest.approx(0.5, abs=1e-12)
    assert summary["summary"]["minimal"] is False


def test_grid_is_row_major():
    _, out, _ = run("analyze", "--catalog", "exp2uv", "--grid", "u0=2", "--grid", "u1=3", "--format", "json-lines")
    pts = [json.loads(x)["point"] for x in out.splitlines()[:-1]]
    assert pts == [[-1.0, -1.0], [-1.0, 0.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 0.0], [1.0, 1.0]]


@pytest.mark.parametrize(
    "argv, status",
    [
        (["verify", "--catalog", "lob_np1_vf1", "--param", "n=3", "--param", "theta=pi/6"], EXIT_OK),
        (["verify", "--catalog", "exp2uv", "--grid", "u0=7", "--grid", "u1=7"], EXIT_OK),
        (["verify", "--catalog", "exp2uv", "--routes", "2d,frenet", "--tol", "1e-15"], EXIT_FAIL),
        (["verify", "--catalog", "lobachevsky2", "--param", "a=2", "--tol", "1e-30"], EXIT_FAIL),
        (["verify", "--catalog", "nope"], EXIT_CONFIG),
        (["verify", "--catalog", "exp2uv", "--grid", "u0=0"], EXIT_CONFIG),
        (["verify", "--catalog", "exp2uv", "--grid", "u7=3"], EXIT_CONFIG),
        (["verify", "--catalog", "exp2uv", "--tol", "-1"], EXIT_CONFIG),
        (["verify", "--catalog", "exp2uv", "--routes", "bogus"], EXIT_CONFIG),
        (["verify", "--catalog", "lob_np1_vf1", "--routes", "2d"], EXIT_CONFIG),
        (["verify", "--config", "/nonexistent/job.ini"], EXIT_CONFIG),
        (["verify", "--catalog", "lob_np1_vf1", "--param", "theta=0.5", "--routes", "sh", "--strict"], EXIT_EVAL),
    ],
)
def test_verify_exit_codes(argv, status):
    code, out, err = run(*argv)
    assert code == status
    if status == EXIT_OK:
        assert out.rstrip().endswith("RESULT: PASS")
    elif status == EXIT_FAIL:
        assert out.rstrip().endswith("RESULT: FAIL")
    else:
        assert err and not out


def test_non_strict_reports_route_errors_per_point():
    code, out, _ = run("analyze", "--catalog", "lob_np1_vf1", "--param", "theta=0.5", "--routes", "sh",
                       "--grid", "u0=2", "--grid", "u1=1", "--grid", "u2=1", "--grid", "u3=1", "--format", "json-lines")
    assert code == EXIT_OK
    recs = [json.loads(x) for x in out.splitlines()]
    assert all(r["routes"]["sh"]["error"] for r in recs[:-1])
    assert recs[-1]["summary"]["route_errors"] == 2


def test_verify_needs_catalog_entry(tmp_path):
    cfg = tmp_path / "flat.ini"
    cfg.write_text("[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = 1\n[field]\nxi_0 = 1\nxi_1 = 0\n")
    assert run("verify", "--config", str(cfg))[0] == EXIT_CONFIG
    code, out, _ = run("analyze", "--config", str(cfg), "--format", "json-lines")
    assert code == EXIT_OK
    assert json.loads(out.splitlines()[-1])["summary"]["minimal"] is True


def test_inline_config_matches_catalog(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text(
        "[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = exp(2*u0*u1)\n"
        "[field]\nxi_0 = 1\nxi_1 = 0\n[evaluate]\npoint = 0.3, -0.8\nformat = json-lines\n"
    )
    code, out, _ = run("analyze", "--config", str(cfg))
    assert code == EXIT_OK
    got = json.loads(out.splitlines()[0])["H_abs"]
    u, v = 0.3, -0.8
    assert got == pytest.approx(math.exp(-u * v) / (2 * (1 + v * v) ** 1.5), abs=1e-12)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[manifold]\ndim = 2\n", "missing key 'domain'"),
        ("[manifold]\ndim = x\n", "dim must be an integer"),
        ("[manifold]\ndim = 2\ndomain = -1:1\n", "domain has 1 intervals"),
        ("[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = 1\n", "needs a [field] section"),
        ("[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = 1\n[field]\nxi_0 = 2\nxi_1 = 0\n", "unit"),
        ("[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = 1 +\n[field]\nxi_0 = 1\nxi_1 = 0\n", "[manifold]"),
        ("[manifold]\ndim = 2\ndomain = -1:1, -1:1\ng_0_0 = 1\ng_1_1 = -1\n[field]\nxi_0 = 1\nxi_1 = 0\n", "[manifold]"),
        ("[catalog]\nname = exp2uv\n[evaluate]\ngrid = 3\n", "grid has 1 counts"),
        ("[catalog]\nname = exp2uv\n[evaluate]\npoint = 5, 0\n", "outside the domain"),
        ("[catalog]\nname = exp2uv\n[evaluate]\ncolour = red\n", "unknown key 'colour'"),
        ("[catalog]\nname = exp2uv\n[manifold]\ndim = 2\n", "not both"),
        ("[extras]\nx = 1\n", "unknown section"),
        ("no section header\n", "job.ini"),
        ("", "no manifold given"),
    ],
)
def test_config_errors_carry_location(tmp_path, text, fragment):
    cfg = tmp_path / "job.ini"
    cfg.write_text(text)
    code, out, err = run("analyze", "--config", str(cfg))
    assert code == EXIT_CONFIG
    assert err.startswith("config error: ")
    assert fragment in err
    assert not out


def test_command_line_overrides_config(tmp_path):
    cfg = tmp_path / "job.ini"
    cfg.write_text("[catalog]\nname = lobachevsky2\na = 1\n[evaluate]\npoint = 0, 0\nformat = csv\n")
    _, out, _ = run("analyze", "--config", str(cfg), "--param", "a=2", "--format", "json-lines")
    rec = json.loads(out.splitlines()[0])
    assert rec["H_abs"] == pytest.approx(1 / math.sqrt(6), abs=1e-12)


def test_catalog_listing():
    code, out, _ = run("catalog", "--format", "json-lines")
    assert code == EXIT_OK
    rows = [json.loads(x) for x in out.splitlines()]
    assert [r["name"] for r in rows] == catalog.names()
    assert len(rows) == 8
    assert all(r["provenance"] for r in rows)
    _, table, _ = run("catalog")
    assert [line for line in table.splitlines() if not line.startswith(" ")] == catalog.names()


def test_table_output_shape():
    _, out, _ = run("analyze", "--catalog", "exp2uv", "--grid", "u0=2", "--grid", "u1=2", "--routes", "2d")
    lines = out.splitlines()
    assert lines[0] == "# analyze exp2uv"
    assert lines[1] == "# grid 2x2; routes: theorem1, 2d"
    assert lines[2].split()[:3] == ["index", "point", "|H|"]
    assert "summary" in lines
    values = [float(x) for x in NUMBER.findall(lines[3])]
    assert np.isfinite(values).all()
