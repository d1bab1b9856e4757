import json
import math

import pytest

from thermofield import cli, verify
from thermofield.model import Squeeze


def test_check_pass_rule():
    assert verify.Check("x", {}, "m", 1e-6, 5e-7).passed
    assert not verify.Check("x", {}, "m", 1e-6, 2e-6).passed
    assert not verify.Check("x", {}, "m", 1e-6, math.nan).passed


def test_report_passes_iff_every_check_passes():
    good = verify.Check("a", {}, "m", 1.0, 0.5)
    bad = verify.Check("b", {"beta_hw": math.inf, "z": 0.3 + 0.4j}, "m", 1.0, 2.0)
    report = verify.VerifyReport("quick", [good])
    assert report.passed
    report.checks.append(bad)
    assert not report.passed and report.failures == [bad]
    d = json.loads(report.to_json())
    assert d["overall_pass"] is False
    assert d["summary"]["by_check"]["b"] == {"passed": 0, "failed": 1}
    assert d["checks"][1]["params"] == {"beta_hw": "inf", "z": [0.3, 0.4]}


def test_lattice_point_passes():
    checks, errata = verify.lattice_point_checks(1, 1.0, 1 + 0.5j, 0.3 + 0.4j, (0.0, 0.7))
    assert checks and all(c.passed for c in checks)
    assert {e["id"] for e in errata} == {"quartic_n1_vs_general"}
    assert all(e["agreement"] for e in errata)


def test_identity_and_vacuum_checks_pass():
    checks = verify.identity_checks() + verify.vacuum_checks((0.5, math.inf))
    ids = {c.id for c in checks}
    assert {"unit_modulus_F3", "hermite_linearization", "spot_mean_x", "spot_var_x"} <= ids
    assert all(c.passed for c in checks)


def test_flipping_f2_sign_is_caught(monkeypatch):
    # mutation: conjugate F2 after construction; the Fock oracle never uses F2
    original = Squeeze.__post_init__

    def tampered(self):
        original(self)
        object.__setattr__(self, "F2", self.F2.conjugate())

    monkeypatch.setattr(Squeeze, "__post_init__", tampered)
    checks, _ = verify.lattice_point_checks(1, 1.0, 1 + 0.5j, 0.3 + 0.4j, (0.7,))
    oracle = [c for c in checks if c.id == "oracle_density"]
    assert oracle and all(not c.passed for c in oracle)
    assert max(c.measured for c in oracle) > 1e-3


def test_floor_config_is_a_clean_usage_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"state": "vacuum", "beta_hw": 1e-12}))
    assert cli.main(["density", "--config", str(cfg)]) == 2
    out, err = capsys.readouterr()
    assert out == "" and "error" in err


def test_quick_level_passes():
    report = verify.run_verify("quick")
    assert report.passed, [c.to_dict() for c in report.failures[:5]]
    with pytest.raises(ValueError):
        verify.run_verify("medium")
