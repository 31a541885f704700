import json
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from abm_options.cli import cli

DATA = Path(__file__).parent / "data"


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, [str(a) for a in args], obj={})

    return invoke


FIG2_ARGS = ["price", "--kind", "call", "--underlying", "no-dividend", "--spot", 0, "--strike", -5, "--sigma", 3,
             "--rate", 0.05, "--tau", 0.5]


def test_price_text(run):
    res = run(*FIG2_ARGS)
    assert res.exit_code == 0, res.output
    lines = dict(line.split(": ") for line in res.output.splitlines())
    # 4.88362242640 at 12 significant digits, trailing zero dropped
    assert lines["price"] == "4.8836224264"
    assert set(lines) == {"price", "delta", "gamma", "vega", "theta", "rho"}


def test_price_json(run):
    res = run("--json", *FIG2_ARGS)
    doc = json.loads(res.output)
    assert doc["schema_version"] == 1
    assert doc["command"] == "price"
    assert abs(doc["result"]["price"] - 4.88) <= 0.01
    assert doc["request"]["strike"] == -5.0


def test_json_is_byte_identical(run):
    args = ["--json", *FIG2_ARGS, "--method", "mc", "--paths", 100000, "--seed", 7]
    first, second = run(*args), run(*args)
    assert first.exit_code == 0
    assert first.output == second.output
    doc = json.loads(first.output)
    assert doc["request"]["seed"] == 7
    assert abs(doc["result"]["price"] - 4.8836) <= 3 * doc["result"]["standard_error"]


def test_expiry_intrinsic(run):
    res = run("price", "--tau", 0, "--spot", 7, "--strike", 5)
    assert res.exit_code == 0, res.output
    assert res.output.splitlines()[0] == "price: 2"


def test_precision_flag(run):
    res = run("--precision", 4, *FIG2_ARGS)
    assert res.output.splitlines()[0] == "price: 4.884"


@pytest.mark.parametrize("method", ["quadrature", "pde", "naive"])
def test_other_methods(run, method):
    res = run("--json", *FIG2_ARGS, "--method", method)
    assert res.exit_code == 0, res.output
    price = json.loads(res.output)["result"]["price"]
    if method == "naive":
        assert abs(price - 4.88) > 1e-3
    else:
        assert abs(price - 4.8836224264) <= 5e-3


def test_american_pde_with_grid(run, tmp_path):
    out = tmp_path / "grid.csv"
    res = run("--json", "price", "--kind", "put", "--exercise", "american", "--method", "pde", "--spot", 5,
              "--strike", 5, "--sigma", 3, "--rate", 0.05, "--tau", 0.5, "--n-s", 100, "--n-tau", 100,
              "--grid-out", out)
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert doc["result"]["psor_sweeps"] > 0
    assert out.read_text().startswith("tau,spot,value\n")


@pytest.mark.parametrize(
    "args",
    [
        ["price", "--spot", 5, "--strike", 5, "--tau", 0.5, "--sigma", -1],
        ["price", "--spot", 5, "--strike", 5, "--tau", 0.5, "--sigma", 3, "--kind", "put", "--method", "naive"],
        ["price", "--spot", 5, "--strike", 5, "--tau", 0.5, "--sigma", 3, "--exercise", "american"],
        ["price", "--spot", 5, "--strike", 5, "--tau", 0.5, "--sigma", 3, "--method", "mc", "--paths", 1],
        ["implied", "--spot", 5, "--strike", 5, "--tau", 0.5, "--rate", 0.05, "--price", 0.01],
    ],
)
def test_invalid_input_exits_2(run, args):
    res = run(*args)
    assert res.exit_code == 2
    assert "error:" in res.output


def test_usage_error_is_nonzero(run):
    assert run("price", "--spot", 5).exit_code != 0


def test_unwritable_output_exits_4(run, tmp_path):
    res = run("figure", 1, "--out", tmp_path / "missing" / "fig.csv")
    assert res.exit_code == 4


def test_missing_histvol_file_exits_4(run, tmp_path):
    assert run("histvol", tmp_path / "absent.csv").exit_code == 4


def read_csv(path):
    data = path.read_bytes()
    assert b"\r" not in data
    lines = data.decode("utf-8").splitlines()
    assert not any(line.endswith(",") for line in lines)
    return lines[0], [list(map(float, line.split(","))) for line in lines[1:]]


def test_figure1_parity_rows(run, tmp_path):
    out = tmp_path / "fig1.csv"
    assert run("figure", 1, "--out", out).exit_code == 0
    header, rows = read_csv(out)
    assert header == "spot,call,put"
    assert len(rows) == 801
    assert rows[0][0] == -15.0 and rows[-1][0] == 25.0
    fwd_strike = 5.0 * math.exp(-0.025)
    # 12 significant digits leave up to ~1e-11 rounding per column
    assert max(abs(c - p - (s - fwd_strike)) for s, c, p in rows) <= 1e-10


def test_figure2_anchor_row(run, tmp_path):
    out = tmp_path / "fig2.csv"
    assert run("figure", 2, "--out", out).exit_code == 0
    header, rows = read_csv(out)
    assert header == "spot,call,put"
    (call,) = [c for s, c, _ in rows if s == 0.0]
    assert abs(call - 4.88) <= 0.01


def test_figure3_crosses_near_one(run, tmp_path):
    out = tmp_path / "fig3.csv"
    assert run("figure", 3, "--out", out).exit_code == 0
    header, rows = read_csv(out)
    assert header == "spot,call,underlying"
    gaps = [(s, c - u) for s, c, u in rows]
    flips = [s for (s, g), (_, g2) in zip(gaps, gaps[1:]) if g > 0 >= g2]
    assert len(flips) == 1 and 1.0 <= flips[0] < 1.5


def test_figure4_and_range_override(run, tmp_path):
    out = tmp_path / "fig4.csv"
    assert run("figure", 4, "--out", out, "--spot-min", 1, "--spot-max", 3, "--step", 0.5).exit_code == 0
    header, rows = read_csv(out)
    assert header == "spot,call,underlying"
    assert [r[0] for r in rows] == [1.0, 1.5, 2.0, 2.5, 3.0]


def test_unknown_figure(run, tmp_path):
    assert run("figure", 5, "--out", tmp_path / "x.csv").exit_code == 2


def test_validate_passes(run):
    res = run("validate")
    assert res.exit_code == 0, res.output
    lines = res.output.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_validate_json(run):
    doc = json.loads(run("--json", "validate").output)
    names = {r["name"] for r in doc["result"]}
    assert all(r["passed"] for r in doc["result"])
    assert len(names) == len(doc["result"]) >= 5


def test_implied_round_trip(run):
    priced = json.loads(run("--json", "price", "--spot", 5, "--strike", 5, "--sigma", 3, "--rate", 0.05,
                            "--tau", 0.5, "--underlying", "futures").output)
    res = run("--json", "implied", "--spot", 5, "--strike", 5, "--rate", 0.05, "--tau", 0.5,
              "--underlying", "futures", "--price", repr(priced["result"]["price"]))
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["result"]["sigma_s"] == pytest.approx(3.0, rel=1e-8)


@pytest.mark.parametrize("name,want", [("alternating.csv", 18.3303), ("constant_increments.csv", 0.0)])
def test_histvol(run, name, want):
    res = run("--json", "histvol", DATA / name)
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    assert doc["result"]["sigma_s"] == pytest.approx(want, abs=1e-4)
    assert doc["result"]["observations"] == 5


def test_version(run):
    res = run("--version")
    assert res.exit_code == 0
    assert "0.1.0" in res.output
