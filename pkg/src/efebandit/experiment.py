"""Monte Carlo bandit experiments with reproducible, resumable output.

Each episode gets its own generator seeded from (master_seed, run_index),
so runs can execute serially or across processes and still produce the
same traces in the same order. Trace files are written atomically (temp
file plus rename) and sweeps skip cells whose outputs already exist.
"""

from __future__ import annotations

import csv
import os
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .efe import PriorPreference
from .env import cumulative_regret, generate_environment, pull
from .fusion import FusionMethod
from .policies import PolicyKind, initial_state, select_arm, update_belief

__all__ = [
    "ExperimentConfig",
    "EpisodeResult",
    "RegretTrace",
    "TRACE_HEADER",
    "PLOT_HEADER",
    "episode_rng",
    "run_episode",
    "run_monte_carlo",
    "write_trace_csv",
    "cell_filename",
    "paper_grid",
    "sweep",
    "aggregate_plot_rows",
    "write_plot_csv",
    "atomic_write_text",
]

TRACE_HEADER = "method,fusion,K,C,pref1,run,iteration,cum_regret,selection_time_ns"
PLOT_HEADER = "method,fusion,K,C,pref1,iteration,mean_cum_regret,stderr"


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo cell."""

    policy: PolicyKind
    n_arms: int
    dim: int
    fusion: FusionMethod = FusionMethod.LAPLACE
    horizon: int = 100
    n_runs: int = 100
    pref: PriorPreference = field(default_factory=lambda: PriorPreference(0.001, 0.999))
    epsilon: float = 0.25
    n_samples: int = 1000
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "policy", PolicyKind(self.policy))
        object.__setattr__(self, "fusion", FusionMethod(self.fusion))
        if self.n_arms < 1 or self.dim < 1:
            raise ValueError("n_arms and dim must be at least 1")
        if self.horizon < 1 or self.n_runs < 1:
            raise ValueError("horizon and n_runs must be at least 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")

    @property
    def fusion_label(self) -> str:
        """Fusion tag for file and column values; the oracle has none."""
        return "none" if self.policy is PolicyKind.ORACLE else self.fusion.value


@dataclass(frozen=True)
class EpisodeResult:
    """Per-iteration record of a single bandit run."""

    cum_regret: np.ndarray
    selection_ns: np.ndarray
    arms: np.ndarray
    outcomes: np.ndarray

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1])


@dataclass(frozen=True)
class RegretTrace:
    """Stacked episode results for one config plus summary statistics."""

    cum_regret_runs: np.ndarray
    selection_ns_runs: np.ndarray
    metadata: dict

    @property
    def mean_regret(self) -> np.ndarray:
        return self.cum_regret_runs.mean(axis=0)

    @property
    def per_run_final(self) -> np.ndarray:
        return self.cum_regret_runs[:, -1]

    @property
    def mean_selection_time(self) -> float:
        """Mean seconds per action selection across all runs and rounds."""
        return float(self.selection_ns_runs.mean()) * 1e-9


def episode_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent per-episode stream derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence([master_seed, run_index]))


def run_episode(config: ExperimentConfig, run_index: int) -> EpisodeResult:
    """Play one episode and record the running regret and timings.

    The episode stream is consumed in a fixed order: environment generation
    first, then per round the selection draws, one outcome draw and the
    belief-update draws. Only the selection call itself is timed.
    """
    rng = episode_rng(config.master_seed, run_index)
    env = generate_environment(config.n_arms, config.dim, rng)
    state = initial_state(
        config.n_arms,
        config.dim,
        config.policy,
        fusion=config.fusion,
        epsilon=config.epsilon,
        pref=config.pref,
        n_samples=config.n_samples,
    )
    horizon = config.horizon
    cum = np.empty(horizon)
    sel_ns = np.empty(horizon, dtype=np.int64)
    arms = np.empty(horizon, dtype=np.int64)
    outcomes = np.empty(horizon, dtype=np.int64)
    running = 0.0
    for t in range(horizon):
        start = time.perf_counter_ns()
        arm = select_arm(state, env.context, rng, true_probs=env.true_probs)
        sel_ns[t] = time.perf_counter_ns() - start
        outcome = pull(env, arm, rng)
        state = update_belief(state, arm, env.context, outcome, rng)
        running += env.best_prob - env.true_probs[arm]
        cum[t] = running
        arms[t] = arm
        outcomes[t] = outcome
    # Cross-check the accumulated value against the allocation formula.
    closed = cumulative_regret(env, np.bincount(arms, minlength=env.n_arms))
    if abs(closed - running) > 1e-6:
        raise AssertionError(f"regret accumulation mismatch: {running} vs {closed}")
    return EpisodeResult(cum_regret=cum, selection_ns=sel_ns, arms=arms, outcomes=outcomes)


def _episode_star(args: tuple[ExperimentConfig, int]) -> EpisodeResult:
    return run_episode(*args)


def run_monte_carlo(config: ExperimentConfig, workers: int = 1) -> RegretTrace:
    """Run all episodes of one config, optionally across processes.

    Results are aggregated in run-index order whatever the worker count, so
    the trace content is identical for any ``workers`` value.
    """
    jobs = [(config, i) for i in range(config.n_runs)]
    if workers <= 1:
        results = [run_episode(config, i) for i in range(config.n_runs)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_episode_star, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    meta = asdict(config)
    meta["policy"] = config.policy.value
    meta["fusion"] = config.fusion.value
    meta["pref"] = [config.pref.p0, config.pref.p1]
    return RegretTrace(
        cum_regret_runs=np.stack([r.cum_regret for r in results]),
        selection_ns_runs=np.stack([r.selection_ns for r in results]),
        metadata=meta,
    )


def atomic_write_text(path: Path, text: str) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _trace_rows(config: ExperimentConfig, trace: RegretTrace):
    method = config.policy.value
    fusion = config.fusion_label
    prefix = f"{method},{fusion},{config.n_arms},{config.dim},{config.pref.p1!r}"
    for run in range(trace.cum_regret_runs.shape[0]):
        cum = trace.cum_regret_runs[run]
        ns = trace.selection_ns_runs[run]
        for t in range(cum.size):
            yield f"{prefix},{run},{t + 1},{float(cum[t])!r},{ns[t]}"


def write_trace_csv(config: ExperimentConfig, trace: RegretTrace, path: Path) -> None:
    """Write the per-round trace, one row per (run, iteration), LF endings.

    Floats use shortest round-trip repr so parsing the file recovers the
    exact values. ``iteration`` is 1-based: row t holds the cumulative
    regret after t selections.
    """
    lines = [TRACE_HEADER]
    lines.extend(_trace_rows(config, trace))
    atomic_write_text(Path(path), "\n".join(lines) + "\n")


def cell_filename(config: ExperimentConfig) -> str:
    return (
        f"{config.policy.value}_{config.fusion_label}"
        f"_K{config.n_arms}_C{config.dim}_p{config.pref.p1!r}.csv"
    )


def paper_grid(
    master_seed: int = 0,
    horizon: int = 100,
    n_runs: int = 100,
    epsilon: float = 0.25,
    n_samples: int = 1000,
    arm_counts: tuple[int, ...] = (5, 10, 20, 40),
    dims: tuple[int, ...] = (5, 10, 20),
    prefs: tuple[tuple[float, float], ...] = ((0.001, 0.999), (0.4, 0.6)),
) -> list[ExperimentConfig]:
    """Full benchmark grid: every cell crossed with every agent config.

    The default grid is 4 arm counts x 3 dimensions x 2 preferences, and
    each cell runs the oracle plus each of eps-greedy, Thompson and active
    inference under both fusion schemes: 7 agents, 168 configs total.
    """
    agents: list[tuple[PolicyKind, FusionMethod]] = [(PolicyKind.ORACLE, FusionMethod.LAPLACE)]
    for policy in (PolicyKind.EPS_GREEDY, PolicyKind.LTS, PolicyKind.AI):
        for fusion in (FusionMethod.VBIS, FusionMethod.LAPLACE):
            agents.append((policy, fusion))
    configs = []
    for k in arm_counts:
        for c in dims:
            for p0, p1 in prefs:
                for policy, fusion in agents:
                    configs.append(
                        ExperimentConfig(
                            policy=policy,
                            fusion=fusion,
                            n_arms=k,
                            dim=c,
                            horizon=horizon,
                            n_runs=n_runs,
                            pref=PriorPreference(p0, p1),
                            epsilon=epsilon,
                            n_samples=n_samples,
                            master_seed=master_seed,
                        )
                    )
    return configs


def _summary_payload(config: ExperimentConfig, trace: RegretTrace) -> dict:
    finals = trace.per_run_final
    stderr = float(finals.std(ddof=1) / np.sqrt(finals.size)) if finals.size > 1 else 0.0
    return {
        "method": config.policy.value,
        "fusion": config.fusion_label,
        "K": config.n_arms,
        "C": config.dim,
        "pref1": config.pref.p1,
        "mean_final_regret": float(finals.mean()),
        "stderr_final_regret": stderr,
        "mean_selection_time_s": trace.mean_selection_time,
    }


def sweep(
    configs: list[ExperimentConfig],
    out_dir: Path,
    workers: int = 1,
    log=None,
) -> list[dict]:
    """Run a list of cells, skipping any whose outputs already exist.

    Each cell produces a trace CSV and a small JSON summary next to it; a
    cell counts as done only when both files are present, so an interrupted
    sweep resumes cleanly. Returns the summary records in grid order.
    """
    import json

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summaries = []
    for config in configs:
        csv_path = out_dir / cell_filename(config)
        json_path = csv_path.with_suffix(".json")
        if csv_path.exists() and json_path.exists():
            if log:
                log(f"skip {csv_path.name}")
            summaries.append(json.loads(json_path.read_text(encoding="utf-8")))
            continue
        trace = run_monte_carlo(config, workers=workers)
        payload = _summary_payload(config, trace)
        write_trace_csv(config, trace, csv_path)
        atomic_write_text(json_path, json.dumps(payload, indent=2) + "\n")
        summaries.append(payload)
        if log:
            log(f"done {csv_path.name} mean_final_regret={payload['mean_final_regret']:.4f}")
    return summaries


def aggregate_plot_rows(in_dir: Path) -> list[tuple]:
    """Collapse every trace in a directory to per-iteration mean and stderr.

    Groups rows by (method, fusion, K, C, pref1, iteration) across all
    ``*.csv`` trace files, averaging the cumulative regret over runs. The
    stderr is the sample standard deviation over runs divided by sqrt(runs).
    """
    groups: dict[tuple, list[float]] = defaultdict(list)
    files = sorted(Path(in_dir).glob("*.csv"))
    if not files:
        raise ValueError(f"no trace files found in {in_dir}")
    for file in files:
        with open(file, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != TRACE_HEADER.split(","):
                raise ValueError(f"{file} does not look like a trace file")
            for row in reader:
                key = (
                    row["method"],
                    row["fusion"],
                    int(row["K"]),
                    int(row["C"]),
                    float(row["pref1"]),
                    int(row["iteration"]),
                )
                groups[key].append(float(row["cum_regret"]))
    rows = []
    for key in sorted(groups):
        values = np.array(groups[key])
        stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
        rows.append(key + (float(values.mean()), stderr))
    return rows


def write_plot_csv(rows: list[tuple], path: Path) -> None:
    lines = [PLOT_HEADER]
    for method, fusion, k, c, pref1, iteration, mean, stderr in rows:
        lines.append(f"{method},{fusion},{k},{c},{pref1!r},{iteration},{mean!r},{stderr!r}")
    atomic_write_text(Path(path), "\n".join(lines) + "\n")
