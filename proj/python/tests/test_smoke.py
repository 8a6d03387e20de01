import csv
import math

import pytest

import pufmc


def test_closed_form():
    assert pufmc.orthant_prob_2d(0.0) == 0.25
    assert pufmc.orthant_prob_2d(0.5) == pytest.approx(0.25 + math.asin(0.5) / (2 * math.pi))
    assert pufmc.orthant_prob_3d(0.0, 0.0, 0.0) == 0.125
    assert 0.71 <= pufmc.worked_example_prob() <= 0.73
    with pytest.raises(pufmc.ConfigError):
        pufmc.orthant_prob_2d(1.5)


def test_run_game_record():
    r = pufmc.run_game("xor:2", k=32, n_crps=2, n_puf=5000, m_eval=50, seed=3)
    assert r["bias"] == pytest.approx(2 * r["advantage"])
    assert r["manifest"]["N"] == 2
    assert r["manifest"]["spec"] == "xor:2"
    again = pufmc.run_game("xor:2", k=32, n_crps=2, n_puf=5000, m_eval=50, seed=3, threads=1)
    assert again["advantage"] == r["advantage"]


def test_errors_map_to_exceptions():
    with pytest.raises(pufmc.InfeasibleError):
        pufmc.run_game("apuf", k=32, n_crps=25, n_puf=1000)
    with pytest.raises(pufmc.ConfigError):
        pufmc.run_game("ipuf", k=32)
    assert issubclass(pufmc.ConfigError, pufmc.Error)


def test_sweep_csv(tmp_path):
    spec = pufmc.sweep_spec(["apuf", "ct"], k=16, n_values=[1, 2], n_puf=2000, m_eval=20, seed=4)
    out = tmp_path / "s.csv"
    side = pufmc.sweep(spec, csv_path=out)
    assert side["failures"] == []
    with open(out, newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert {r["arch"] for r in rows} == {"apuf", "ct"}
    assert all(r["config_hash"] == side["config_hash"] for r in rows)
    assert (tmp_path / "s.csv.json").exists()


def test_histogram(tmp_path):
    h = pufmc.histogram("apuf", k=16, n_puf=4000, m_eval=100, seed=5, bins=10, csv_path=tmp_path / "h.csv")
    assert sum(h["unconditioned"]["counts"]) == 100
    assert len(h["edges"]) == 11
    assert (tmp_path / "h.csv").exists()
    assert (tmp_path / "h.csv.json").exists()
