import json

import pytest

from lengthlab.lab.experiments import EXPERIMENTS, UnknownExperiment, default_config, run_experiment


def test_registry():
    assert {"delta-length-bounds", "surjection", "tower", "stabilization", "torus-collapse",
            "hawaiian-ranks", "sine-gh-bound", "excess-montecarlo", "deck-counting-bound"} <= set(EXPERIMENTS)


def test_unknown_experiment():
    with pytest.raises(UnknownExperiment):
        run_experiment("nope")


@pytest.mark.parametrize("name", ["surjection", "tower", "stabilization", "torus-collapse",
                                  "hawaiian-ranks", "deck-counting-bound"])
def test_experiments_pass(name):
    r = run_experiment(name)
    assert r.counts["fail"] == 0 and r.counts["unknown"] == 0, [c.to_json() for c in r.checks if c.status != "pass"]
    assert r.exit_code == 0


def test_excess_small_run():
    r = run_experiment("excess-montecarlo", {"samples": 2000, "seed": 1})
    assert r.exit_code == 0


def test_report_is_byte_identical():
    a = run_experiment("excess-montecarlo", {"samples": 2000, "seed": 3}).dumps("json")
    b = run_experiment("excess-montecarlo", {"samples": 2000, "seed": 3}).dumps("json")
    assert a == b
    a = run_experiment("tower").dumps("csv")
    assert a == run_experiment("tower").dumps("csv")


def test_timings_opt_in():
    r = run_experiment("hawaiian-ranks", {"timings": True})
    assert "timings" in r.to_json()
    assert "timings" not in run_experiment("hawaiian-ranks").to_json()


def test_csv_shape():
    text = run_experiment("tower").dumps("csv")
    lines = text.strip().splitlines()
    assert lines[0] == "experiment,check,status,detail"
    assert all(l.startswith("tower,") for l in lines[1:])


def test_default_configs_are_json():
    for name in EXPERIMENTS:
        cfg = default_config(name)
        assert "_notes" not in cfg
        json.dumps(cfg)
