import json

import numpy as np
import pytest
from scipy import stats

from fairshare import harness

SMALL = {"kind": "ba", "nodes": 15, "requests": 12, "paths": [1, 3]}


def test_mean_ci():
    samples = np.array([[1.0, 2.0], [3.0, 2.0], [5.0, 2.0]])
    mean, half = harness.mean_ci(samples)
    assert np.allclose(mean, [3.0, 2.0])
    assert half[0] == pytest.approx(stats.t.ppf(0.975, 2) * 2.0 / np.sqrt(3))
    assert half[1] == 0.0
    _, single = harness.mean_ci(np.array([[1.0]]))
    assert np.isnan(single[0])


def test_reconfiguration_metrics():
    n, psi = harness.reconfiguration_metrics([1.0, 2.0, 3.0], [1.005, 2.5, 2.0], 1e-2)
    assert n == 2 and psi == pytest.approx(1.5)


@pytest.mark.parametrize("bad", [
    {"seeds": []}, {"mode": "other"}, {"thetas": [-1.0]}, {"epsilon": 0.0}, {"domains": [0]},
    {"weight_range": [2.0, 1.0]},
])
def test_config_validation(bad):
    with pytest.raises(ValueError):
        harness.ExperimentConfig.from_dict({"instance": SMALL, **bad})


def test_config_round_trip(tmp_path):
    cfg = harness.ExperimentConfig(SMALL, domains=(1, 2), seeds=(0, 1))
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps(cfg.to_dict()))
    again = harness.ExperimentConfig.load(f)
    assert again == cfg and again.digest() == cfg.digest()


def test_build_instance_kinds(tmp_path):
    a = harness.build_instance(SMALL, 0, 2.0)
    assert a.alpha == 2.0 and len(a.requests) == 12
    ft = harness.build_instance({"kind": "fat_tree", "pods": 2, "requests": 5}, 0, 1.0)
    assert len(ft.requests) == 5
    with pytest.raises(ValueError):
        harness.build_instance({"kind": "ring"}, 0, 1.0)


def test_convergence_is_reproducible_and_counts_messages():
    cfg = harness.ExperimentConfig(SMALL, domains=(1, 2, 3), seeds=(0, 1), max_iters=3000)
    a = harness.run_convergence(cfg)
    b = harness.run_convergence(cfg)
    assert a.to_csv() == b.to_csv() and a.cells_csv() == b.cells_csv()
    assert len(a.cells) == 6
    assert all(c.gaps[0] == 1.0 for c in a.cells)
    rows = harness.overhead_report(a)
    assert all(r.floats_per_round == r.closed_form for r in rows)
    assert harness.overhead_csv(rows).startswith("domains,seed,domain,floats_per_round,closed_form\n")
    mean, half, n = a.curve(2)
    assert n == 2 and len(mean) == max(len(c.gaps) for c in a.cells if c.domains == 2)


def test_threaded_cells_match_serial():
    cfg = harness.ExperimentConfig(SMALL, domains=(1, 2), seeds=(0,), max_iters=2000)
    threaded = harness.ExperimentConfig.from_dict({**cfg.to_dict(), "workers": 3})
    assert harness.run_convergence(cfg).to_csv() == harness.run_convergence(threaded).to_csv()


def test_reconfig_sweep_shape():
    cfg = harness.ExperimentConfig(SMALL, mode="reconfig", seeds=(0, 1), thetas=(0.0, 1.0, 50.0),
                                   max_iters=5000)
    sweep = harness.run_reconfig(cfg)
    assert len(sweep.results) == 6
    rows = sweep.summary()
    assert [r["theta"] for r in rows] == [0.0, 1.0, 50.0]
    assert rows[-1]["n_mean"] <= rows[0]["n_mean"]
    assert sweep.to_csv() == harness.run_reconfig(cfg).to_csv()
    assert sweep.summary_csv().splitlines()[0].startswith("theta,samples,n_mean")


def test_write_outputs(tmp_path):
    cfg = harness.ExperimentConfig(SMALL)
    path = harness.write_outputs(tmp_path / "out", cfg, {"a.csv": "x\n1\n"})
    manifest = json.loads(path.read_text())
    assert (tmp_path / "out" / "a.csv").read_text() == "x\n1\n"
    assert manifest["config_hash"] == cfg.digest()
    assert manifest["seeds"] == [0]
    assert set(manifest) >= {"version", "backend", "files", "created"}
