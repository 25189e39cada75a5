import csv
import io
import json
import math

import pytest
from click.testing import CliRunner

from weakgamma import cli
from weakgamma.report import BoundReport


def run(*args):
    return CliRunner().invoke(cli.main, list(args))


def body(text):
    return [ln for ln in text.splitlines() if not ln.startswith("#")]


def header(text):
    return json.loads(text.splitlines()[0][2:])


def test_spectral_gaussian_and_header():
    r = run("spectral", "--model", "gaussian", "--no-timestamp", "--resolution", "2001")
    assert r.exit_code == 0, r.output
    rows = dict(csv.reader(body(r.output)[1:]))
    assert float(rows["poincare_constant"]) == pytest.approx(1.0, rel=1e-3)
    assert float(rows["equality_residual"]) < 1e-8
    cfg = header(r.output)
    assert cfg["model"] == "gaussian" and cfg["resolution"] == 2001 and cfg["command"] == "spectral"


def test_spectral_subbotin_shows_known_bound():
    r = run("spectral", "--model", "subbotin(1.5)", "--no-timestamp", "--resolution", "2001")
    rows = dict(csv.reader(body(r.output)[1:]))
    assert float(rows["subbotin_upper_bound"]) == pytest.approx(4 / 1.5 ** (2 / 3))
    assert float(rows["poincare_constant"]) <= float(rows["subbotin_upper_bound"])


def test_timestamp_line_toggles():
    with_ts = run("spectral", "--model", "gaussian", "--resolution", "401")
    assert with_ts.output.splitlines()[1].startswith("# timestamp: ")
    without = run("spectral", "--model", "gaussian", "--resolution", "401", "--no-timestamp")
    assert not without.output.splitlines()[1].startswith("#")


def test_exit_codes():
    assert run("spectral", "--model", "nope").exit_code == 2
    assert run("spectral", "--model", "subbotin(0.5)").exit_code == 2
    assert run("spectral", "--model", "radial_subbotin(p=2,n=3)").exit_code == 2
    assert run("spectral", "--model", "custom1d('-x**2')", "--resolution", "401").exit_code == 2
    assert run("transform", "--transform", "bogus", "--rate", '{"family":"constant","params":{"c":1}}').exit_code == 2


def test_numeric_error_exit_code(monkeypatch):
    from weakgamma.exceptions import NumericError

    def boom(cfg):
        raise NumericError("forced")
    monkeypatch.setitem(cli._RUNNERS, "spectral", boom)
    assert run("spectral").exit_code == 3


def test_config_file_and_unknown_keys(tmp_path):
    good = tmp_path / "c.json"
    good.write_text(json.dumps({"model": "uniform(0,1)", "resolution": 2001}))
    r = run("spectral", "--config", str(good), "--no-timestamp")
    assert r.exit_code == 0
    assert float(dict(csv.reader(body(r.output)[1:]))["poincare_constant"]) == pytest.approx(
        1 / math.pi ** 2, rel=1e-3)
    # flags override the file
    r2 = run("spectral", "--config", str(good), "--no-timestamp", "--resolution", "801")
    assert header(r2.output)["resolution"] == 801
    bad = tmp_path / "b.json"
    bad.write_text(json.dumps({"model": "gaussian", "colour": "red"}))
    r3 = run("spectral", "--config", str(bad))
    assert r3.exit_code == 2 and "colour" in r3.output


def test_transform_power_slope():
    r = run("transform", "--rate", '{"family":"power","params":{"c":1,"q":0.5}}',
            "--transform", "xi_iterated", "--no-timestamp")
    assert r.exit_code == 0
    slope = float(r.output.strip().splitlines()[-1].split(":")[1])
    assert slope == pytest.approx(-2.0, rel=0.05)


def test_transform_constant_is_exponential():
    r = run("transform", "--rate", '{"family":"constant","params":{"c":2}}', "--transform", "xi_wp",
            "--grid", "1,10,4", "--no-timestamp", "--format", "json")
    doc = json.loads(r.output)
    for row in doc["rows"]:
        assert float(row["value"]) == pytest.approx(math.exp(-float(row["t"])), rel=1e-6)


def test_transform_from_decay_curve(tmp_path):
    from weakgamma.measures import build_grid, gaussian
    from weakgamma.spectral import discretize, evolve
    import numpy as np
    g = discretize(build_grid(gaussian(), 801))
    path = tmp_path / "curve.csv"
    path.write_text(evolve(g, np.tanh(g.measure.nodes), np.linspace(0, 20, 81)).to_csv())
    r = run("transform", "--input", str(path), "--transform", "beta_wp_from_xi", "--no-timestamp")
    assert r.exit_code == 0, r.output
    vals = [float(row[1]) for row in csv.reader(body(r.output)[1:])]
    assert all(0 < v < 5 for v in vals)
    r2 = run("transform", "--input", str(path), "--transform", "xi_wp")
    assert r2.exit_code == 2


def test_bounds_rows_roundtrip_json():
    r = run("bounds", "--model", "gaussian", "--format", "json", "--no-timestamp", "--resolution", "2001")
    assert r.exit_code == 0, r.output
    doc = json.loads(r.output)
    names = [row["name"] for row in doc["rows"]]
    assert names == ["milman", "grad_schedule", "brascamp_moment", "log_moment", "power_moment"]
    for row in doc["rows"]:
        row = dict(row)
        row.pop("sweep")
        rep = BoundReport.from_json(row)
        assert rep.to_json() == row
        assert rep.comparisons["dominates_spectral_cp"] == 1


def test_bounds_infinite_rows_have_reasons():
    r = run("bounds", "--model", "uniform(0,1)", "--no-timestamp", "--resolution", "1001",
            "--bound", "milman")
    assert r.exit_code == 0
    row = next(csv.DictReader(body(r.output)))
    assert row["value"] == "inf" and row["reason"] == "M_beta diverges"


def test_bounds_radial_sweep_brackets():
    r = run("bounds", "--model", "radial_subbotin(p=2,n=2)", "--ns", "2,3,4,5,6,7,8,9,10",
            "--bound", "radial_subbotin", "--no-timestamp")
    rows = list(csv.DictReader(body(r.output)))
    assert len(rows) == 9
    assert all("dominates_bjm_lower=1" in row["comparisons"] for row in rows)


def test_bounds_product_sweep_has_fitted_exponent():
    r = run("bounds", "--model", "subbotin_product(p=1.5,n=10)", "--ns", "10,100,1000,10000",
            "--no-timestamp")
    rows = list(csv.DictReader(body(r.output)))
    fitted = {c.split("=")[0]: float(c.split("=")[1]) for c in rows[0]["comparisons"].split(";")}
    assert fitted["target_exponent"] == 0.5
    assert fitted["fitted_ln_exponent"] == pytest.approx(0.5, rel=0.15)


def test_bounds_determinism_with_monte_carlo(tmp_path):
    args = ["bounds", "--model", "gaussian_product(n=2)", "--bound", "brascamp_moment",
            "--mc-size", "5000", "--seed", "11", "--no-timestamp"]
    a, b = run(*args), run(*args)
    assert a.exit_code == 0 and a.output == b.output
    c = run(*args[:-2], "12", "--no-timestamp")
    assert c.exit_code == 0 and header(c.output)["seed"] == 12


def test_bounds_out_file(tmp_path):
    out = tmp_path / "o.csv"
    r = run("bounds", "--model", "subbotin(1.5)", "--bound", "grad_schedule", "--out", str(out),
            "--no-timestamp", "--resolution", "1001")
    assert r.exit_code == 0 and r.output == ""
    assert out.read_text().startswith("# {")


def test_verify_spi_passes():
    r = run("verify", "--suite", "spi", "--no-timestamp")
    assert r.exit_code == 0, r.output
    lines = body(r.output)
    assert lines[0] == "1..7" and all(ln.startswith("ok") for ln in lines[1:])


def test_verify_decay_on_gaussian_only(monkeypatch):
    from weakgamma import suites
    from weakgamma.measures import gaussian
    monkeypatch.setattr(suites, "test_measures", lambda: [gaussian()])
    r = run("verify", "--suite", "decay", "--no-timestamp", "--resolution", "801")
    assert r.exit_code == 0, r.output
    assert len(body(r.output)) == 1 + 12


def test_verify_sabotage_fails_with_location(monkeypatch):
    from weakgamma import suites
    from weakgamma.measures import gaussian
    monkeypatch.setattr(suites, "test_measures", lambda: [gaussian()])
    r = run("verify", "--suite", "wig2", "--sabotage", "0.5", "--no-timestamp", "--resolution", "801")
    assert r.exit_code == 1
    bad = [ln for ln in body(r.output) if ln.startswith("not ok")]
    assert len(bad) == 1 and "sabotaged_wpi" in bad[0] and "s*=" in bad[0] and "t*=" in bad[0]


def test_model_spec_parser():
    assert cli.parse_model_spec("subbotin(1.5)") == ("subbotin", [1.5], {})
    assert cli.parse_model_spec("custom1d('x**2', domain=(-inf, inf))") == (
        "custom1d", ["x**2"], {"domain": (-math.inf, math.inf)})
    assert cli.parse_model_spec("gaussian") == ("gaussian", [], {})
    from weakgamma.exceptions import ModelError
    with pytest.raises(ModelError):
        cli.parse_model_spec("os.system('x')")
    with pytest.raises(ModelError):
        cli.parse_model_spec("gaussian(__import__('os'))")
