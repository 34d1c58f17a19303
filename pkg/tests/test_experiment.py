import json
import math

import numpy as np
import pytest

from isinglb.ensembles import build_dregular, save_ensemble
from isinglb.errors import ArgumentError
from isinglb.experiment import (CSV_COLUMNS, ExperimentConfig, ml_decode, run_experiment,
                                wilson_interval, wilson_se, write_result)
from isinglb.graph import Graph, complete_graph, empty_graph
from isinglb.ising import IsingModel, SampleSet, sample_exact

DREG8 = {"class": "dregular", "p": 8, "d": 3}


def test_ml_decode_ties_and_empty():
    cands = [empty_graph(3), Graph(3, ((0, 1),))]
    empty = SampleSet(np.zeros((0, 3), dtype=np.int8))
    assert ml_decode(cands, empty, 1.0) == 0
    same = [complete_graph(3), complete_graph(3)]
    s = sample_exact(IsingModel(complete_graph(3), 1.0), 20, seed=1)
    assert ml_decode(same, s, 1.0) == 0


def test_ml_decode_recovers_separated_hypotheses():
    # single-edge graphs are far apart at large coupling (inside a clique they
    # would not be: that is what makes the clique ensembles hard)
    cands = [Graph(5, (e,)) for e in ((0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3))]
    for i, g in enumerate(cands):
        s = sample_exact(IsingModel(g, 4.0), 50, seed=i)
        assert ml_decode(cands, s, 4.0) == i


def test_ml_decode_matches_log_likelihood_argmax():
    from isinglb.ising import log_likelihood
    e = build_dregular(8, 3, lam=0.6)
    s = sample_exact(IsingModel(e.members[3], 0.6), 30, seed=9)
    lls = [log_likelihood(IsingModel(g, 0.6), s) for g in e.members]
    assert ml_decode(list(e.members), s, 0.6) == int(np.argmax(lls))


def test_config_validation():
    with pytest.raises(ArgumentError):
        ExperimentConfig(DREG8, 0.5, [5], trials=0)
    with pytest.raises(ArgumentError):
        ExperimentConfig(DREG8, 0.5, [0])
    with pytest.raises(ArgumentError):
        ExperimentConfig(DREG8, 0.5, [5], metric="median")
    cfg = ExperimentConfig.from_dict({"ensemble": DREG8, "lambda": 0.5, "n": [3], "metric": "max"})
    assert cfg.metric == "MAX" and cfg.lam == 0.5


def test_wilson_interval():
    lo, hi = wilson_interval(0, 20)
    assert lo == 0.0 and 0 < hi < 0.2
    lo, hi = wilson_interval(20, 20)
    assert hi == pytest.approx(1.0) and lo > 0.8
    z = 1.959963984540054
    p, n = 0.3, 1000
    centre = (p + z * z / (2 * n)) / (1 + z * z / n)
    half = z / (1 + z * z / n) * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n))
    lo, hi = wilson_interval(300, 1000)
    assert (lo, hi) == (pytest.approx(centre - half, abs=1e-12), pytest.approx(centre + half, abs=1e-12))
    assert wilson_se(300, 1000) == pytest.approx(half / z, abs=1e-12)


def test_tiny_lambda_is_chance():
    cfg = ExperimentConfig(DREG8, 1e-6, [1, 4], trials=400, seed=3)
    res = run_experiment(cfg)
    size = res.hypothesis_count
    for row in res.rows:
        assert row.ci_low <= 1 - 1 / size <= row.ci_high


def test_many_samples_drive_error_to_zero():
    res = run_experiment(ExperimentConfig(DREG8, 0.5, [1500], trials=60, seed=2))
    assert res.rows[0].errors == 0


def test_rows_are_well_formed_and_deterministic():
    cfg = ExperimentConfig(DREG8, 0.2, [5, 20], trials=100, seed=7)
    a, b = run_experiment(cfg), run_experiment(cfg)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0].split(",") == CSV_COLUMNS
    assert a.rows[0].p_hat > 0.2
    for r in a.rows:
        assert 0 <= r.ci_low <= r.p_hat <= r.ci_high <= 1
        assert r.fano_floor_exact >= r.fano_floor_certified
    cfg.workers = 3
    assert run_experiment(cfg).to_csv() == a.to_csv()


def test_max_metric_at_least_avg():
    avg = run_experiment(ExperimentConfig(DREG8, 0.3, [8], trials=150, seed=5))
    mx = run_experiment(ExperimentConfig(DREG8, 0.3, [8], trials=150, seed=5, metric="MAX"))
    assert mx.rows[0].ci_high >= avg.rows[0].ci_low
    assert mx.rows[0].worst_member is not None


def test_config_file_and_outputs(tmp_path):
    save_ensemble(build_dregular(8, 3, lam=0.4), tmp_path / "ens")
    (tmp_path / "cfg.json").write_text(json.dumps(
        {"ensemble": "ens", "lambda": 0.4, "n": [3, 9], "trials": 30, "seed": 1}))
    cfg = ExperimentConfig.from_json(tmp_path / "cfg.json")
    res = run_experiment(cfg)
    paths = write_result(res, tmp_path / "out")
    assert [p.name for p in paths] == ["result.csv", "result.json", "fano.png"]
    payload = json.loads(paths[1].read_text())
    assert payload["ci_method"] == "wilson" and "wall_time" not in payload
    first = {p.name: p.read_bytes() for p in paths}
    write_result(run_experiment(cfg), tmp_path / "out")
    assert first == {p.name: p.read_bytes() for p in paths}


def test_lambda_mismatch_rejected(tmp_path):
    save_ensemble(build_dregular(8, 3, lam=0.4), tmp_path / "ens")
    with pytest.raises(ArgumentError):
        run_experiment(ExperimentConfig(str(tmp_path / "ens"), 0.9, [3], trials=2))
