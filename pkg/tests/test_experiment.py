"""Episode/Monte-Carlo harness, CSV outputs, sweeps and plot aggregation."""

import csv
import json

import numpy as np
import pytest

from efebandit.efe import PriorPreference
from efebandit.experiment import (
    PLOT_HEADER,
    TRACE_HEADER,
    ExperimentConfig,
    aggregate_plot_rows,
    atomic_write_text,
    cell_filename,
    episode_rng,
    paper_grid,
    run_episode,
    run_monte_carlo,
    sweep,
    write_plot_csv,
    write_trace_csv,
)

SMALL = dict(n_arms=3, dim=2, fusion="laplace", horizon=15, n_runs=4, master_seed=0)


def test_config_validation_and_fusion_label():
    cfg = ExperimentConfig(policy="oracle", **SMALL)
    assert cfg.fusion_label == "none"
    assert ExperimentConfig(policy="ai", **SMALL).fusion_label == "laplace"
    with pytest.raises(ValueError):
        ExperimentConfig(policy="bogus", **SMALL)
    with pytest.raises(ValueError):
        ExperimentConfig(policy="ai", n_arms=0, dim=2)
    with pytest.raises(ValueError):
        ExperimentConfig(policy="ai", n_arms=3, dim=2, epsilon=-0.5)
    with pytest.raises(ValueError):
        ExperimentConfig(policy="ai", n_arms=3, dim=2, horizon=0)


def test_episode_rng_streams():
    a = episode_rng(0, 1).random(4)
    b = episode_rng(0, 1).random(4)
    c = episode_rng(0, 2).random(4)
    d = episode_rng(1, 1).random(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_run_episode_deterministic_content():
    cfg = ExperimentConfig(policy="eps-greedy", **SMALL)
    r1 = run_episode(cfg, 3)
    r2 = run_episode(cfg, 3)
    assert np.array_equal(r1.cum_regret, r2.cum_regret)
    assert np.array_equal(r1.arms, r2.arms)
    assert np.array_equal(r1.outcomes, r2.outcomes)
    r3 = run_episode(cfg, 4)
    assert not np.array_equal(r1.arms, r3.arms)
    # regret is a running sum, so it never decreases
    assert np.all(np.diff(r1.cum_regret) >= -1e-12)
    assert r1.final_regret == r1.cum_regret[-1]


def test_oracle_episode_has_zero_regret():
    cfg = ExperimentConfig(policy="oracle", **SMALL)
    for run in range(5):
        res = run_episode(cfg, run)
        assert np.all(res.cum_regret == 0.0)
        assert len(set(res.arms.tolist())) == 1  # always the same best arm


def test_monte_carlo_aggregates_runs():
    cfg = ExperimentConfig(policy="lts", **SMALL)
    trace = run_monte_carlo(cfg)
    assert trace.cum_regret_runs.shape == (cfg.n_runs, cfg.horizon)
    np.testing.assert_allclose(trace.mean_regret, trace.cum_regret_runs.mean(axis=0))
    np.testing.assert_allclose(trace.per_run_final, trace.cum_regret_runs[:, -1])
    assert trace.mean_selection_time > 0.0
    assert trace.metadata["policy"] == "lts"
    # single episodes reproduce the stacked rows
    res = run_episode(cfg, 2)
    np.testing.assert_array_equal(trace.cum_regret_runs[2], res.cum_regret)


def test_worker_count_does_not_change_results():
    cfg = ExperimentConfig(policy="eps-greedy", **SMALL)
    solo = run_monte_carlo(cfg, workers=1)
    pooled = run_monte_carlo(cfg, workers=2)
    assert np.array_equal(solo.cum_regret_runs, pooled.cum_regret_runs)
    assert solo.metadata == pooled.metadata


def test_trace_csv_layout(tmp_path):
    cfg = ExperimentConfig(policy="oracle", **SMALL)
    trace = run_monte_carlo(cfg)
    path = tmp_path / "trace.csv"
    write_trace_csv(cfg, trace, path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 1 + cfg.n_runs * cfg.horizon
    assert not (tmp_path / "trace.csv.tmp").exists()
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    first = rows[0]
    assert first["method"] == "oracle"
    assert first["fusion"] == "none"  # the oracle never fuses
    assert first["iteration"] == "1"
    assert int(rows[-1]["iteration"]) == cfg.horizon
    # shortest-repr floats parse back to the exact stored values
    assert float(rows[5]["cum_regret"]) == trace.cum_regret_runs[0, 5]


def test_cell_filename_and_paper_grid():
    cfg = ExperimentConfig(policy="ai", **SMALL)
    assert cell_filename(cfg) == "ai_laplace_K3_C2_p0.999.csv"
    grid = paper_grid()
    assert len(grid) == 168
    names = {cell_filename(c) for c in grid}
    assert len(names) == 168  # one file per cell, no collisions
    assert sum(1 for c in grid if c.fusion_label == "none") == 24
    small_grid = paper_grid(arm_counts=(3,), dims=(2,), n_runs=2, horizon=5)
    assert len(small_grid) == 14
    assert all(c.n_runs == 2 and c.horizon == 5 for c in small_grid)


def test_sweep_writes_and_resumes(tmp_path):
    configs = [
        ExperimentConfig(policy="oracle", **SMALL),
        ExperimentConfig(policy="eps-greedy", **SMALL),
    ]
    events = []
    summaries = sweep(configs, tmp_path, log=events.append)
    assert len(summaries) == 2
    assert all(e.startswith("done ") for e in events)
    files = sorted(p.name for p in tmp_path.iterdir())
    assert len(files) == 4  # a csv and a json per cell
    assert summaries[0]["mean_final_regret"] == 0.0
    payload = json.loads((tmp_path / cell_filename(configs[1])).with_suffix(".json").read_text())
    assert payload == summaries[1]

    events.clear()
    again = sweep(configs, tmp_path, log=events.append)
    assert all(e.startswith("skip ") for e in events)
    assert again == summaries


def test_aggregate_plot_rows_arithmetic(tmp_path):
    cfg = ExperimentConfig(policy="lts", n_arms=3, dim=2, fusion="laplace",
                           horizon=6, n_runs=3, master_seed=1)
    trace = run_monte_carlo(cfg)
    write_trace_csv(cfg, trace, tmp_path / cell_filename(cfg))
    rows = aggregate_plot_rows(tmp_path)
    assert len(rows) == cfg.horizon
    for method, fusion, k, c, pref1, iteration, mean, stderr in rows:
        assert (method, fusion, k, c) == ("lts", "laplace", 3, 2)
        col = trace.cum_regret_runs[:, iteration - 1]
        assert abs(mean - col.mean()) < 1e-12
        assert abs(stderr - col.std(ddof=1) / np.sqrt(3)) < 1e-12

    out = tmp_path / "plot.csv"
    write_plot_csv(rows, out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0] == PLOT_HEADER
    assert len(lines) == 1 + len(rows)


def test_aggregate_plot_rows_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        aggregate_plot_rows(tmp_path)  # nothing to read
    (tmp_path / "junk.csv").write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        aggregate_plot_rows(tmp_path)


def test_atomic_write_text(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "first\n")
    atomic_write_text(target, "second\n")
    assert target.read_text(encoding="utf-8") == "second\n"
    assert list(tmp_path.iterdir()) == [target]


def test_vbis_agent_episode_runs():
    cfg = ExperimentConfig(policy="ai", n_arms=2, dim=2, fusion="vbis",
                           horizon=5, n_runs=2, n_samples=400, master_seed=0)
    trace = run_monte_carlo(cfg)
    assert np.all(np.isfinite(trace.cum_regret_runs))
    again = run_monte_carlo(cfg)
    assert np.array_equal(trace.cum_regret_runs, again.cum_regret_runs)
