import json
import math
import os
import subprocess
import sys

import pytest

from thermofield import cli


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(csv_text):
    lines = csv_text.strip().splitlines()
    return lines[0], [[float(v) for v in line.split(",")] for line in lines[1:]]


def test_density_vacuum_example(capsys):
    code, out, _ = run(["density", "--state", "vacuum", "--beta-hw", "1", "--grid", "-4:4:5"],
                       capsys)
    assert code == 0
    header, data = rows(out)
    assert header == "x,rho"
    assert [r[0] for r in data] == [-4.0, -2.0, 0.0, 2.0, 4.0]
    assert data[2][1] == pytest.approx(math.sqrt(math.tanh(0.5) / math.pi), rel=1e-15)


def test_density_reductions_are_identical(capsys):
    grid = ["--beta-hw", "1", "--grid", "-4:4:9"]
    _, vac, _ = run(["density", "--state", "vacuum"] + grid, capsys)
    _, disp, _ = run(["density", "--state", "displaced", "--n", "0", "--alpha", "0,0"] + grid,
                     capsys)
    assert disp == vac
    _, d1, _ = run(["density", "--state", "displaced", "--n", "1", "--alpha", "1,0.5"] + grid,
                   capsys)
    _, s1, _ = run(["density", "--state", "squeezed", "--n", "1", "--alpha", "1,0.5",
                    "--z", "0,0"] + grid, capsys)
    assert s1 == d1


def test_density_oracle_method_agrees(capsys):
    common = ["density", "--state", "squeezed", "--n", "1", "--alpha", "1,0", "--z", "0.5,0",
              "--beta-hw", "1", "--omega-t", "0.7", "--grid", "-6:6:49"]
    _, closed, _ = run(common, capsys)
    _, oracle, _ = run(common + ["--method", "oracle", "--tol", "1e-10"], capsys)
    c = [r[1] for r in rows(closed)[1]]
    o = [r[1] for r in rows(oracle)[1]]
    assert max(abs(a - b) for a, b in zip(c, o)) / max(c) < 1e-6


def test_density_json_and_auto_grid(capsys):
    code, out, _ = run(["density", "--alpha", "1,0", "--format", "json"], capsys)
    assert code == 0
    d = json.loads(out)
    assert len(d["x"]) == len(d["rho"]) == 801


def test_moments_examples(capsys):
    _, out, _ = run(["moments", "--state", "displaced", "--alpha", "1,0", "--beta-hw", "inf"],
                    capsys)
    d = json.loads(out)
    assert set(d) == {"mean_x", "var_x", "beta_hw", "omega_t"}
    assert d["mean_x"] == pytest.approx(math.sqrt(2), rel=1e-15)
    assert d["beta_hw"] == "inf"
    _, out, _ = run(["moments", "--alpha", "1,0", "--beta-hw", "2"], capsys)
    assert json.loads(out)["mean_x"] == pytest.approx(2.0803621866, rel=1e-10)
    _, out, _ = run(["moments", "--state", "displaced", "--n", "1", "--beta-hw", "2"], capsys)
    assert json.loads(out)["var_x"] == pytest.approx(1.969553, abs=5e-7)


def test_moments_csv(capsys):
    _, out, _ = run(["moments", "--alpha", "1,0", "--format", "csv"], capsys)
    header, data = rows(out)
    assert header == "mean_x,var_x,beta_hw,omega_t" and len(data) == 1


def test_sweep_temperature_monotone(capsys):
    code, out, _ = run(["sweep", "--alpha", "1,0", "--quantity", "moments",
                        "--sweep", "beta_hw=inf,0.5,2,1"], capsys)
    assert code == 0
    header, data = rows(out)
    assert header == "param,mean_x,var_x"
    assert [r[0] for r in data] == [0.5, 1.0, 2.0, math.inf]
    means = [r[1] for r in data]
    assert all(a > b for a, b in zip(means, means[1:]))
    assert means[-1] == pytest.approx(math.sqrt(2), rel=1e-15)


def test_sweep_time_is_cosine(capsys):
    _, out, _ = run(["sweep", "--alpha", "1,0", "--beta-hw", "1", "--quantity", "moments",
                     "--sweep", "omega_t=0,pi/2,pi"], capsys)
    means = [r[1] for r in rows(out)[1]]
    amp = math.sqrt(1 / math.tanh(0.25)) * math.sqrt(2)
    assert means[0] == pytest.approx(amp, rel=1e-14)
    assert abs(means[1]) < 1e-14 * amp
    assert means[2] == pytest.approx(-amp, rel=1e-14)


def test_sweep_number_variance_progression(capsys):
    _, out, _ = run(["sweep", "--beta-hw", "1", "--quantity", "moments",
                     "--sweep", "n=0,1,2"], capsys)
    text_rows = out.strip().splitlines()[1:]
    assert [r.split(",")[0] for r in text_rows] == ["0", "1", "2"]
    v = [r[2] for r in rows(out)[1]]
    assert v[1] / v[0] == pytest.approx(3, rel=1e-14)
    assert v[2] / v[0] == pytest.approx(5, rel=1e-14)


def test_sweep_density_rows_ordered(capsys):
    _, out, _ = run(["sweep", "--sweep", "z1=0.2,0", "--grid", "-2:2:3"], capsys)
    data = rows(out)[1]
    assert [(r[0], r[1]) for r in data] == sorted((r[0], r[1]) for r in data)
    assert len(data) == 6


def test_usage_errors(capsys):
    code, out, err = run(["sweep", "--sweep", "n=0,1", "--sweep", "z1=0,1"], capsys)
    assert code == 2 and out == "" and "exactly one" in err
    code, out, err = run(["density", "--beta-hw", "1e-9"], capsys)
    assert code == 2 and out == "" and "error" in err
    code, _, err = run(["density", "--beta", "2"], capsys)
    assert code == 2 and "--units" in err
    code, _, _ = run(["density", "--state", "vacuum", "--n", "2"], capsys)
    assert code == 2
    code, _, _ = run(["density", "--state", "displaced", "--z", "0.1,0"], capsys)
    assert code == 2


def test_physical_beta_needs_units(capsys):
    code, out, _ = run(["moments", "--beta", "2", "--units", "1,0.5,2", "--alpha", "1,0"],
                       capsys)
    assert code == 0 and json.loads(out)["beta_hw"] == 2.0


def test_config_round_trip(tmp_path, capsys):
    argv = ["density", "--state", "squeezed", "--n", "2", "--alpha", "1,0.5", "--z", "0.3,0.4",
            "--beta-hw", "2", "--omega-t", "pi/2", "--grid", "-5:5:21", "--units", "2,0.5,1.5"]
    _, emitted, _ = run(argv + ["--emit-config"], capsys)
    cfg = tmp_path / "run.json"
    cfg.write_text(emitted)
    assert cli.RunConfig.from_json(emitted).to_json() == emitted
    _, again, _ = run(["density", "--config", str(cfg), "--emit-config"], capsys)
    assert again == emitted
    _, direct, _ = run(argv, capsys)
    _, replayed, _ = run(["density", "--config", str(cfg)], capsys)
    assert replayed == direct


def test_config_defaults():
    d = cli.RunConfig().to_dict()
    assert d["units"] == [1.0, 1.0, 1.0] and d["grid"] == "auto" and d["tol"] == 1e-8
    with pytest.raises(cli.UsageError):
        cli.RunConfig.from_dict({"colour": 1})


def test_out_file_written_atomically_and_deterministic(tmp_path, capsys):
    argv = ["density", "--state", "squeezed", "--n", "3", "--alpha", "1,0.5", "--z", "0.3,0.4",
            "--beta-hw", "0.5", "--omega-t", "0.7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(argv + ["--out", str(a)], capsys)[1] == ""
    run(argv + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()
    assert sorted(os.listdir(tmp_path)) == ["a.csv", "b.csv"]


def test_fmt_shortest_round_trip():
    for v in (0.1, 1 / 3, 2.0803621866101363, 1e-300):
        assert float(cli.fmt(v)) == v
    assert cli.fmt(3) == "3" and cli.fmt(math.inf) == "inf"


def test_verify_quick_subprocess(tmp_path):
    out = tmp_path / "report.json"
    proc = subprocess.run([sys.executable, "-m", "thermofield", "verify", "--level", "quick",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert report["overall_pass"] is True
    assert report["summary"]["failed"] == 0 and report["summary"]["total"] > 0
    assert any(e["id"] == "quartic_n1_vs_general" for e in report["errata"])
