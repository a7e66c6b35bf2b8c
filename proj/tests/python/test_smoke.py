import math
from fractions import Fraction

import pytest

import visitlab as vl

Q1 = [[0.2, 0.8], [0.3, 0.7]]
Q2 = [[0.8, 0.2], [0.1, 0.9]]


def test_pa_pmf_worked_value():
    assert vl.pa_pmf(2.0, 0.5, 2)[1] == pytest.approx(0.5 * math.exp(-1), abs=1e-15)


def test_cp_pmf_matches_pa():
    rates = [0.25 * 0.5 ** (l - 1) for l in range(1, 60)]
    a = vl.cp_pmf(1.0, rates, 30)
    b = vl.pa_pmf(1.0, 0.5, 30)
    assert max(abs(x - y) for x, y in zip(a, b)) < 1e-12


def test_sampler_is_seeded():
    assert vl.cp_sample(1.0, [0.5, 0.25], 50, 7) == vl.cp_sample(1.0, [0.5, 0.25], 50, 7)


def test_sync_values():
    assert vl.predict_sync_markov(vl.build_qdelta([Q1, Q2]))["p"] == pytest.approx(16 / 25, abs=1e-12)
    qmax = vl.build_qdelta([Q1, Q2], "maximal")
    assert vl.spectral_radius(qmax) == pytest.approx((9 + math.sqrt(33)) / 20, abs=1e-12)


def test_param_coupling_endpoint():
    r = vl.predict_param_coupling(Q1, Q2, 1.0)
    assert r["closed_form"] == pytest.approx(1.0)


def test_geometric_alpha_exact():
    exact, approx = vl.geometric_alpha(["0", "1/3", "2/3", "1"], ["3", "-2", "3"], ["0", "5/3", "-2"], 1)
    assert Fraction(exact) == Fraction(11, 27)
    assert approx == pytest.approx(11 / 27)


def test_errors_surface():
    with pytest.raises(vl.VisitlabError):
        vl.predict_hoc(0.0, 1.0)


def test_run_predict_and_hash():
    cfg = {
        "schema_version": 1,
        "system": {"type": "house_of_cards", "form": "constant", "r": "1/2"},
        "target": {"family": "run_length", "l": 1},
        "levels": [6],
        "t": 2,
        "K": 10,
        "L": 20,
        "samples": 500,
        "seed": 3,
    }
    report, tables, code = vl.run("predict", cfg)
    assert code == 0
    assert report["body"]["prediction"]["cluster_rate"] == pytest.approx(1.0)
    assert "predicted_pmf.csv" in tables
    assert vl.config_hash(cfg) == vl.config_hash({**cfg, "workers": 4})
    report, _, _ = vl.run("simulate", cfg)
    assert report["body"]["levels"][0]["empirical"]["samples"] == 500
