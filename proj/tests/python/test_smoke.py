import json
import math

import pytest

import needle


def test_closed_form_profile():
    for v in (0.1, 0.3, 0.5, 0.9):
        assert abs(needle.model_profile(2.0, math.pi, v) - math.sqrt(v * (1 - v))) < 1e-12


def test_window_mass_and_eta():
    assert abs(needle.lambda_of(2.0, 1.0) - (1 - math.cos(1.0)) / 2) < 1e-12
    assert abs(needle.solve_eta_N(2.0) - (3 - math.sqrt(5)) / 2) < 1e-12
    assert needle.profile_identity_gap(2.0, 2.8, 0.1, 0.4) < 1e-8


def test_exponent_rejection():
    with pytest.raises(needle.NeedleError, match="invalid-parameter"):
        needle.validate_exponents(2.0, 0.9, 0.5, 0.5)


def test_cap_report():
    r = needle.quantify_cap(n=600, v=0.3)
    assert r["asymmetry"] <= 3 * r["mesh"]
    assert r["rays"] >= 1
    assert all(r["checks"].values())


def test_run_experiment(tmp_path):
    code, summary = needle.run_experiment("profile", {"v_points": "8", "output": str(tmp_path)})
    assert code == 0
    assert json.loads(summary)["rows"] == 8
    assert (tmp_path / "profile.csv").read_text().startswith("N,D,v,profile")


def test_criterion_one():
    r = needle.run_criterion(1)
    assert r["passed"], r["detail"]
