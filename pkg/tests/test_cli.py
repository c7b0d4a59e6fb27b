import csv
import filecmp
import json
import math
import re
from pathlib import Path

import numpy as np
import pytest

from swiftpricing import cli, tables
from swiftpricing.density import SwiftGrid
from swiftpricing.models import HestonParams, OptionStyle, VanillaContract, heston_cf
from swiftpricing.paramselect import ToleranceConfig, initial_halfwidth
from swiftpricing.payoff import PayoffVariant
from swiftpricing.pricer import reference_price

GOLDEN = Path(__file__).parent / "golden"

SHORT_MODEL = {"model": "heston", "kappa": 4.0, "theta": 0.25, "sigma": 1.0, "rho": -0.5, "v0": 0.01}
MILD_MODEL = {"model": "heston", "kappa": 1.5, "theta": 0.04, "sigma": 0.5, "rho": -0.7, "v0": 0.04}


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


# ------------------------------------------------------------------ price

def test_price_line_matches_reference(tmp_path, capsys):
    model = write_json(tmp_path / "heston.json", MILD_MODEL)
    code, out, _ = run(["price", "--model", model, "--strikes", "110", "--style", "call"], capsys)
    assert code == 0
    line = out.strip()
    for field in ("price=", "m=", "kappa=", "log2J=", "eps_f=", "cf_evals="):
        assert field in line
    price = float(re.search(r"price=(\S+)", line).group(1))
    p = HestonParams(**{k: v for k, v in MILD_MODEL.items() if k != "model"})
    ref = reference_price(p, VanillaContract(100.0, 110.0, 1.0, style=OptionStyle.CALL))
    assert price == pytest.approx(ref, abs=1e-6)


def test_price_several_strikes_one_line_each(tmp_path, capsys):
    model = write_json(tmp_path / "m.json", MILD_MODEL)
    code, out, _ = run(["price", "--model", model, "--strikes", "90,100,110"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert [l.split()[0] for l in lines] == ["strike=90", "strike=100", "strike=110"]


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = write_json(tmp_path / "run.json", {"model": MILD_MODEL, "strikes": [95.0], "payoff": "fem1"})
    code, out, _ = run(["price", "--config", cfg, "--strikes", "105"], capsys)
    assert code == 0
    assert out.startswith("strike=105 ")


def test_invalid_model_value_names_key(tmp_path, capsys):
    bad = dict(MILD_MODEL, sigma="high")
    model = write_json(tmp_path / "bad.json", bad)
    code, _, err = run(["price", "--model", model, "--strikes", "100"], capsys)
    assert code == cli.EXIT_CONFIG
    assert "'sigma'" in err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"model": "heston", "kappa": ')
    code, _, err = run(["price", "--model", str(path), "--strikes", "100"], capsys)
    assert code == cli.EXIT_CONFIG
    assert "invalid JSON" in err


def test_unknown_config_key(tmp_path, capsys):
    cfg = write_json(tmp_path / "run.json", {"model": MILD_MODEL, "strikes": [100], "volatility": 0.2})
    code, _, err = run(["price", "--config", cfg], capsys)
    assert code == cli.EXIT_CONFIG
    assert "'volatility'" in err


def test_missing_strikes(tmp_path, capsys):
    model = write_json(tmp_path / "m.json", MILD_MODEL)
    code, _, err = run(["price", "--model", model], capsys)
    assert code == cli.EXIT_CONFIG
    assert "'strikes'" in err


def test_unreachable_tolerance_exits_with_trace(tmp_path, capsys):
    model = write_json(tmp_path / "short.json", SHORT_MODEL)
    trace = tmp_path / "trace.csv"
    code, _, err = run([
        "price", "--model", model, "--maturity", "0.01", "--forward", "1", "--strikes", "1",
        "--refine", "romo", "--L", "4", "--m", "8", "--trace-out", str(trace),
    ], capsys)
    assert code == cli.EXIT_SELECTION
    assert str(trace) in err
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["iter", "m", "kappa", "log2J", "eps_f"]
    assert rows[1][1:4] == ["8", "18", "6"]
    assert float(rows[-1][-1]) > 5.9e-5


def test_select_prints_trace(tmp_path, capsys):
    model = write_json(tmp_path / "short.json", SHORT_MODEL)
    code, out, _ = run(["select", "--model", model, "--maturity", "0.01", "--L", "4", "--m", "8"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "iter,m,kappa,log2J,eps_f"
    assert [l.split(",")[2] for l in lines[1:-1]] == ["18", "21", "25", "29", "35"]
    assert lines[-1].startswith("selected m=8 kappa=35")


def test_scale_search_failure_exit_code(tmp_path, capsys):
    # variance 1e-18 leaves fhat near 1 beyond the largest admissible scale
    model = write_json(tmp_path / "bs.json", {"model": "bs", "vol": 1e-6})
    code, _, err = run(["select", "--model", model, "--maturity", "1e-6"], capsys)
    assert code == cli.EXIT_SELECTION
    assert "eps_m" in err


# ------------------------------------------------------------------ tables

def test_table1_golden(tmp_path, capsys):
    out = tmp_path / "table1.csv"
    code, _, _ = run(["table", "--which", "1", "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["rule", "iter", "m", "kappa", "log2J", "eps_f"]
    assert rows[1][:5] == ["romo", "0", "8", "18", "6"]
    assert float(rows[1][5]) == pytest.approx(7.130920268738627e-5, rel=1e-9)
    assert filecmp.cmp(out, GOLDEN / "table1.csv", shallow=False)


def test_table2_requires_parameters(tmp_path, capsys):
    code, _, err = run(["table", "--which", "2", "--out", str(tmp_path / "t2.csv")], capsys)
    assert code == cli.EXIT_CONFIG
    assert "external parameters required" in err


def test_table2_with_supplied_sets(tmp_path, capsys):
    sets = {"sets": [{"name": "mild", "model": MILD_MODEL, "maturity": 1.0, "forward": 1.0,
                      "strikes": [0.9, 1.0, 1.1], "m": 5, "J": 512}]}
    out = tmp_path / "t2.csv"
    code, _, _ = run(["table", "--which", "2", "--config", write_json(tmp_path / "sets.json", sets),
                      "--out", str(out)], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 9
    assert {(r["density"], r["payoff"]) for r in rows} == {
        (d, p) for d in ("SEM0", "FEM0", "FEM1") for p in ("SEM0", "FEM0", "FEM1")
    }
    for r in rows:
        assert 0 <= float(r["rmse"]) <= float(r["mae"]) < 1e-3


def test_table2_rejects_unknown_set_key(tmp_path, capsys):
    sets = {"sets": [{"name": "x", "model": MILD_MODEL, "maturity": 1.0, "forward": 1.0,
                      "strikes": [1.0], "m": 5, "J": 64, "colour": "blue"}]}
    code, _, err = run(["table", "--which", "2", "--config", write_json(tmp_path / "s.json", sets),
                        "--out", str(tmp_path / "t.csv")], capsys)
    assert code == cli.EXIT_CONFIG
    assert "'colour'" in err


def test_table3_reference_constants():
    for K, put in zip(tables.TABLE3_STRIKES, tables.TABLE3_REFERENCE_PUTS):
        ref = reference_price(tables.CORNER2_PARAMS, VanillaContract(100.0, K, tables.CORNER_T))
        assert ref == pytest.approx(put, abs=1e-8)


def test_table3_cheap_row(tmp_path):
    out = tmp_path / "t3.csv"
    tables.write_table3(out, settings=[(5, 8.0, 1e-6)])
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["m", "L", "eps_f", "log2J", "err_100.0001", "err_101", "err_110",
                       "err_200", "err_1000", "err_10000"]
    assert rows[1][:3] == ["5", "8", "9.9999999999999995e-07"]
    assert len(rows) == 2 and len(rows[1]) == 10


# ------------------------------------------------------------------ coefficient dumps

FIG_T = 0.0325


def fig_setup():
    cf = heston_cf(tables.SHORT_PARAMS, FIG_T)
    c = initial_halfwidth(cf, ToleranceConfig(L=8.0))
    g = SwiftGrid(6, math.ceil(64 * c), 16, 16, c)
    return cf, VanillaContract(1.0, 1.064, FIG_T), g


@pytest.mark.filterwarnings("ignore::swiftpricing.density.AccuracyWarning")
def test_dump_row_counts_and_determinism(tmp_path):
    cf, ct, g = fig_setup()
    pv = (PayoffVariant.SEM0, PayoffVariant.DIRECT_MIDPOINT)
    a = tables.dump_coefficients(cf, ct, g, tmp_path / "a", payoff_variants=pv)
    b = tables.dump_coefficients(cf, ct, g, tmp_path / "b", payoff_variants=pv)
    assert [Path(p).name for p in a] == [Path(p).name for p in b]
    for pa, pb in zip(a, b):
        assert filecmp.cmp(pa, pb, shallow=False)
        rows = list(csv.reader(open(pa)))
        assert len(rows) == 1 + 2 * g.kappa
    header = next(csv.reader(open(tmp_path / "a" / "payoff_sem0.csv")))
    assert header == ["k", "V_mk", "variant", "error_vs_oracle"]


@pytest.mark.filterwarnings("ignore::swiftpricing.density.AccuracyWarning")
def test_dump_sem0_beats_direct_midpoint_in_interior(tmp_path):
    cf, ct, g = fig_setup()
    tables.dump_coefficients(cf, ct, g, tmp_path, density_variants=(),
                             payoff_variants=(PayoffVariant.SEM0, PayoffVariant.DIRECT_MIDPOINT))

    def errors(name):
        rows = list(csv.DictReader(open(tmp_path / f"payoff_{name}.csv")))
        return np.array([int(r["k"]) for r in rows]), np.array([abs(float(r["error_vs_oracle"])) for r in rows])

    k, sem0 = errors("sem0")
    _, direct = errors("direct_midpoint")
    span = np.maximum(np.abs(-64 * g.c - k), np.abs(-64 * ct.log_moneyness - k))
    mask = span < g.J_payoff / (math.pi * math.sqrt(0.08))
    assert sem0[mask].max() < direct[mask].max()


def test_dump_cli_with_price_files(tmp_path, capsys):
    model = write_json(tmp_path / "m.json", MILD_MODEL)
    out = tmp_path / "dump"
    code, stdout, _ = run(["dump-coeffs", "--model", model, "--forward", "1", "--strikes", "0.9,1.1",
                           "--m", "4", "--eps-f", "1e-6", "--out", str(out)], capsys)
    assert code == 0
    names = {p.name for p in out.iterdir()}
    assert "density_midpoint.csv" in names and "payoff_fem1.csv" in names
    assert "prices_trapezoid_sem0.csv" in names
    rows = list(csv.DictReader(open(out / "prices_trapezoid_sem0.csv")))
    assert [float(r["strike"]) for r in rows] == [0.9, 1.1]
    assert all(abs(float(r["error"])) < 1e-3 for r in rows)
