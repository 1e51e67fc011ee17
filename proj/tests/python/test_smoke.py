import math

import pytest

import boltzlab

MAXWELLIAN = """
seed = 7

[kernel]
dimension = 3
beta = 1
angular = constant

[initial]
kind = maxwellian
m0 = 1
T = 1

[run]
particles = 5000
replicas = 4
t_grid = 0, 1, 2
n = 8
"""


def test_gamma_constant_b():
    out = boltzlab.gamma([1.0, 2.0, 3.0], beta=1.0, dimension=3, budget=2048)
    assert out["orders"] == [1.0, 2.0, 3.0]
    for p, g in zip(out["orders"], out["gamma"]):
        assert g == pytest.approx(2.0 / (p + 1.0), rel=2e-2)
    assert out["gamma"][0] == pytest.approx(1.0, abs=1e-6)


def test_verify_suites():
    assert boltzlab.verify(seed=1, sequences=50, binomial_trials=500, kernel_trials=5000)


def test_simulate_maxwellian_moments():
    out = boltzlab.simulate(MAXWELLIAN)
    assert out["times"] == [0.0, 1.0, 2.0]
    assert out["total_collisions"] > 0
    for drift in out["energy_rel_drift"]:
        assert drift < 1e-9
    # stationary data: m2 = 3 T m0 at every recorded time
    for m in out["moments"]:
        assert m[0] == pytest.approx(1.0, abs=1e-12)
        assert m[2] == pytest.approx(3.0, rel=0.1)


def test_simulate_override():
    out = boltzlab.simulate(MAXWELLIAN, {"run.t_grid": "0, 0.5"})
    assert out["times"] == [0.0, 0.5]


def test_run_experiment_gamma(tmp_path):
    out_dir = tmp_path / "gamma"
    rep = boltzlab.run_experiment(
        MAXWELLIAN, "gamma", str(out_dir), {"bounds.gamma_max": "6", "bounds.budget": "1024"}
    )
    assert rep["all_pass"]
    assert "gamma.csv" in rep["files"]
    assert (out_dir / "gamma.csv").exists()
    assert (out_dir / "report.txt").exists()
    assert "result = PASS" in rep["text"]
    svgs = boltzlab.emit_plots(str(out_dir))
    assert any(name.endswith(".svg") for name in svgs)


def test_run_experiment_bounds(tmp_path):
    rep = boltzlab.run_experiment(
        MAXWELLIAN,
        "bounds",
        str(tmp_path / "bounds"),
        {"run.s": "1", "bounds.gamma_max": "70", "bounds.budget": "1024"},
    )
    assert rep["all_pass"]
    assert rep["a"] > 0.0
    assert rep["T"] > 0.0
    assert rep["C"] > rep["a"]
    assert math.isfinite(rep["C"])


def test_bad_config_raises():
    with pytest.raises(boltzlab.ConfigError):
        boltzlab.run_experiment("[kernel]\nbeta = -3\n", "gamma", "/tmp/unused")
    with pytest.raises(boltzlab.ConfigError):
        boltzlab.run_experiment(MAXWELLIAN, "no-such-mode", "/tmp/unused")
