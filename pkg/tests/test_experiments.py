"""Harness determinism, CSV plumbing, CLI subcommands, and figure output."""

import json
import os

import numpy as np
import pytest

from oraclepath.analysis import fit_scaling
from oraclepath.cli import cli_main
from oraclepath.experiments import (
    CSV_HEADER,
    EXPERIMENT_NAMES,
    ExperimentConfig,
    TrialRecord,
    derive_seed,
    read_records_csv,
    run_experiment,
    write_records_csv,
    write_sweep_json,
)


def run_to_csv(cfg, path):
    result, records = run_experiment(cfg)
    write_records_csv(records, path)
    return result, records


# -- determinism and shapes ----------------------------------------------------


def test_derive_seed_is_stable_and_spread():
    a = derive_seed(7, "birthday", 1024, 3)
    assert a == derive_seed(7, "birthday", 1024, 3)
    assert a != derive_seed(7, "birthday", 1024, 4)
    assert a != derive_seed(7, "birthday", 2048, 3)
    assert a != derive_seed(8, "birthday", 1024, 3)
    assert a != derive_seed(7, "double-star", 1024, 3)


def test_single_trial_run_is_byte_identical(tmp_path):
    cfg = ExperimentConfig(experiment="birthday", n_grid=[128], trials=1, seed=5)
    run_to_csv(cfg, tmp_path / "a.csv")
    run_to_csv(cfg, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_sweep_shape_double_star(tmp_path):
    cfg = ExperimentConfig(experiment="double-star", n_grid=[6, 10, 20, 40], trials=3, seed=1)
    result, records = run_experiment(cfg)
    assert len(result.per_n) == 4
    assert len(records) == 12
    assert [a.n for a in result.per_n] == [6, 10, 20, 40]


def test_recorded_fit_matches_offline_recompute(tmp_path):
    cfg = ExperimentConfig(experiment="birthday", n_grid=[64, 128, 256], trials=20, seed=3)
    result, _ = run_to_csv(cfg, tmp_path / "s.csv")
    records = read_records_csv(tmp_path / "s.csv")
    points = []
    for n in cfg.n_grid:
        vals = [r.retrieval_q for r in records if r.n == n]
        points.append((n, sum(vals) / len(vals)))
    offline = fit_scaling(points)
    assert result.fit.slope == offline.slope
    assert result.fit.intercept == offline.intercept


def test_aggregates_recomputable_from_csv(tmp_path):
    cfg = ExperimentConfig(experiment="verify", n_grid=[60], trials=15, seed=2)
    result, _ = run_to_csv(cfg, tmp_path / "v.csv")
    records = read_records_csv(tmp_path / "v.csv")
    vals = np.array([r.verify_q for r in records], dtype=float)
    agg = result.per_n[0]
    assert agg.mean_q == float(vals.mean())
    assert agg.median_q == float(np.median(vals))
    assert agg.q90_q == float(np.quantile(vals, 0.9))


def test_every_experiment_runs_clean():
    grids = {"birthday": [64], "double-star": [10], "k-birthday": [500]}
    for name in EXPERIMENT_NAMES:
        cfg = ExperimentConfig(experiment=name, n_grid=grids.get(name, [80]),
                               trials=2, seed=11)
        result, records = run_experiment(cfg)
        assert len(records) == 2, name
        assert result.grounding_violations == 0, name


def test_config_validation_names_offending_field():
    with pytest.raises(ValueError, match="experiment"):
        ExperimentConfig(experiment="nope", n_grid=[4], trials=1, seed=1).validate()
    with pytest.raises(ValueError, match="trials"):
        ExperimentConfig(experiment="birthday", n_grid=[4], trials=0, seed=1).validate()
    with pytest.raises(ValueError, match="n_grid"):
        ExperimentConfig(experiment="birthday", n_grid=[8, 4], trials=1, seed=1).validate()


def test_parallel_workers_match_serial():
    cfg1 = ExperimentConfig(experiment="birthday", n_grid=[64, 128], trials=4, seed=9)
    cfg2 = ExperimentConfig(experiment="birthday", n_grid=[64, 128], trials=4, seed=9, workers=2)
    _, serial = run_experiment(cfg1)
    _, parallel = run_experiment(cfg2)
    assert serial == parallel


# -- CLI -----------------------------------------------------------------------------


def test_cli_gen_writes_loadable_world(tmp_path):
    out = tmp_path / "world"
    code = cli_main(["gen", "--family", "double-star", "--n", "12",
                     "--seed", "3", "--out", str(out)])
    assert code == 0
    assert sorted(os.listdir(out)) == ["meta.json", "prior.edges", "truth.edges"]
    from oraclepath.worlds import load_world
    w = load_world(out)
    assert w.truth.edge_count == 11


def test_cli_run_twice_identical_outputs(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    args = ["run", "--experiment", "birthday", "--n", "1024",
            "--trials", "10", "--seed", "7"]
    assert cli_main(args + ["--out", str(out1)]) == 0
    assert cli_main(args + ["--out", str(out2)]) == 0
    a = (out1 / "birthday.csv").read_bytes()
    b = (out2 / "birthday.csv").read_bytes()
    assert a == b
    ja = (out1 / "birthday.sweep.json").read_bytes()
    jb = (out2 / "birthday.sweep.json").read_bytes()
    assert ja == jb


def test_cli_fit_linear_csv(tmp_path, capsys):
    records = [TrialRecord("double-bfs", n, t, 0, "found", 0, 0, 0, n, 0)
               for n in (10, 100, 1000) for t in range(2)]
    csv_path = tmp_path / "lin.csv"
    write_records_csv(records, csv_path)
    assert cli_main(["fit", "--csv", str(csv_path)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["slope"] == pytest.approx(1.0, abs=1e-12)


def test_cli_sweep_with_json_config(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "experiment": "double-star", "n_grid": [8, 12, 16], "trials": 2, "seed": 4}))
    out = tmp_path / "sweep"
    assert cli_main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "double-star.csv").exists()
    records = read_records_csv(out / "double-star.csv")
    assert sorted({r.n for r in records}) == [8, 12, 16]


def test_cli_plot_svg_has_both_series(tmp_path):
    cfg = ExperimentConfig(experiment="double-star", n_grid=[8, 16, 32], trials=3, seed=2)
    _, records = run_experiment(cfg)
    csv_path = tmp_path / "ds.csv"
    write_records_csv(records, csv_path)
    svg_path = tmp_path / "ds.svg"
    assert cli_main(["plot", "--csv", str(csv_path), "--out", str(svg_path)]) == 0
    text = svg_path.read_text()
    assert 'id="series-empirical"' in text
    assert 'id="series-analytic"' in text


def test_cli_usage_errors_exit_2(tmp_path):
    assert cli_main(["run", "--experiment", "not-an-experiment",
                     "--n", "10", "--trials", "1", "--seed", "1",
                     "--out", str(tmp_path)]) == 2
    assert cli_main(["run", "--n", "10", "--trials", "1",
                     "--out", str(tmp_path)]) == 2  # missing experiment and seed
    assert cli_main(["definitely-not-a-command"]) == 2


def test_cli_malformed_config_names_field(tmp_path, capsys):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"experiment": "birthday", "n_grid": [4, 2],
                                    "trials": 1, "seed": 1}))
    code = cli_main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path)])
    assert code == 2
    assert "n_grid" in capsys.readouterr().err


def test_sweep_json_round_trip(tmp_path):
    cfg = ExperimentConfig(experiment="birthday", n_grid=[32, 64, 128], trials=5, seed=6)
    result, _ = run_experiment(cfg)
    path = tmp_path / "sweep.json"
    write_sweep_json(result, path)
    loaded = json.loads(path.read_text())
    assert loaded["config"]["experiment"] == "birthday"
    assert len(loaded["per_n"]) == 3
    assert loaded["grounding_violations"] == 0
