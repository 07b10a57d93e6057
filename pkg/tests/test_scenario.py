import json

import numpy as np
import pytest

from fockmarket import scenario as scn
from fockmarket.errors import ConfigError, SectorOverflowError
from fockmarket.scenario import Scenario, TimeGrid, load_scenario, simulate, verify

from pathlib import Path

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"


def model1(**over):
    d = {"name": "s", "model": "model1",
         "config": {"alpha": [0, 1], "p": 1, "initial_n": [2, 0]},
         "time": {"t_max": 3, "points": 31}}
    d.update(over)
    return d


def test_round_trip_every_shipped_scenario():
    for path in sorted(SCENARIOS.glob("*.json")):
        sc = load_scenario(path)
        again = Scenario.from_dict(json.loads(sc.dumps()))
        assert again.dumps() == sc.dumps(), path.name


def test_scalar_coupling_means_all_to_all():
    sc = Scenario.from_dict(model1(config={"alpha": [0, 1, 2], "p": 0.5, "initial_n": [1, 0, 0]}))
    assert np.array_equal(sc.config.coupling, [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])


def test_default_time_is_two_periods():
    d = model1()
    del d["time"]
    sc = Scenario.from_dict(d)
    assert sc.time.t_max == pytest.approx(2 * (2 * np.pi / np.sqrt(1 + 4)))
    assert sc.time.points == 400


@pytest.mark.parametrize("patch, msg", [
    ({"model": "model9"}, "unknown model"),
    ({"outputs": ["n_7"]}, "unknown channels"),
    ({"outputs": []}, "at least one"),
    ({"method": "series"}, "supports methods"),
    ({"order": 40}, "order"),
    ({"time": {"t_max": -1}}, "t_max"),
    ({"time": {"t_max": 1, "points": 1}}, "points"),
    ({"bogus": 1}, "unknown scenario keys"),
    ({"config": {"alpha": [0, 1], "p": 1}}, "missing"),
    ({"config": {"alpha": [0, 1], "p": 1, "initial_n": [2, 0], "zeta": 1}}, "unknown config keys"),
    ({"config": {"alpha": [0, 1], "p": 1, "initial_n": [2, -1]}}, "non-negative"),
    ({"extra_terms": [{"delta": [1, 0]}]}, "entries"),
])
def test_validation_messages(patch, msg):
    with pytest.raises(ConfigError, match=msg):
        Scenario.from_dict(model1(**patch))


def test_time_grid():
    assert np.array_equal(TimeGrid(2.0, 3).grid(), [0.0, 1.0, 2.0])


def test_simulate_model1_methods_agree():
    sc = Scenario.from_dict(model1())
    a, b = simulate(sc, "onebody"), simulate(sc, "exact")
    assert np.abs(a.series["n_1"] - b.series["n_1"]).max() < 1e-10
    assert a.report.passed and b.report.passed


def test_series_scenario_tracks_exact():
    sc = load_scenario(SCENARIOS / "model2_short_series.json")
    series = simulate(sc)
    exact = simulate(sc, "exact")
    radius = next(n for n in series.notes if "radius_hint" in n)
    assert "order=8" in radius
    for ch in ("n_1", "n_2", "k_1", "k_2", "Pi_1", "O_f", "P_r"):
        assert np.abs(series.series[ch] - exact.series[ch]).max() < 1e-6


def test_series_warns_past_radius():
    sc = load_scenario(SCENARIOS / "model2_short_series.json")
    sc.time = TimeGrid(1.0, 5)
    assert any("warning" in n for n in simulate(sc).notes)


def test_meanfield_scenarios_conserve_budget():
    for name in ("meanfield", "meanfield_resonant", "appendix2"):
        res = simulate(load_scenario(SCENARIOS / f"{name}.json"))
        assert res.report.passed, name
        assert len(res.report.entries) >= 2


def test_meanfield_closed_and_exact_methods():
    sc = load_scenario(SCENARIOS / "meanfield.json")
    a, b = simulate(sc, "closed"), simulate(sc, "exact")
    for l in (1, 2, 3):
        assert np.abs(a.series[f"n_{l}"] - b.series[f"n_{l}"]).max() < 1e-8


def test_kms_sweep_uses_beta_axis():
    res = simulate(load_scenario(SCENARIOS / "kms_sweep.json"))
    assert res.axis == "beta"
    nc = res.series["n_c"]
    assert nc[0] == 5.0 and np.all(np.diff(nc) < 0)
    assert res.report.passed


def test_verify_rejects_analytic_models():
    with pytest.raises(ConfigError, match="verify"):
        verify(load_scenario(SCENARIOS / "meanfield.json"))


def test_verify_reports_all_integrals():
    rep = verify(load_scenario(SCENARIOS / "model2_two_traders.json"))
    assert [e.name for e in rep.entries] == ["N", "K", "Gamma", "Q_1", "Q_2"]
    assert all(e.drift < 1e-9 for e in rep.entries)


def test_negative_control_fails_conservation():
    rep = verify(load_scenario(SCENARIOS / "negative_control.json"))
    assert not rep.passed
    assert rep.entries[0].drift > 1e-3
    assert "FAIL" in rep.format()


def test_no_coupling_is_flat():
    res = simulate(load_scenario(SCENARIOS / "no_coupling.json"))
    for ch in ("n_1", "n_2", "P"):
        assert np.ptp(res.series[ch]) == 0
    assert all(e.drift == 0 for e in res.report.entries)


def test_overflow_surfaces():
    sc = load_scenario(SCENARIOS / "three_traders.json")
    with pytest.raises(SectorOverflowError):
        simulate(sc, "exact", max_dim=100)


def test_csv_format(tmp_path):
    sc = Scenario.from_dict(model1(outputs=["n_2", "n_1"]))
    res = simulate(sc)
    scn.write_csv(tmp_path / "x.csv", res, sc.outputs)
    lines = (tmp_path / "x.csv").read_text().splitlines()
    assert lines[0] == "t,n_2,n_1"
    assert len(lines) == 32
    assert all(len(r.split(",")) == 3 for r in lines)
    assert scn.format_value(-0.0) == "0"
    assert scn.format_value(1 / 3) == "0.333333333333"
