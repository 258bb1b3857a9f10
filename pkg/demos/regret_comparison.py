"""
Regret curves for the four policies on one mid-sized problem
============================================================

Runs the oracle, epsilon-greedy, Thompson sampling and the active
inference agent on the same K=10, C=10 cell and plots mean cumulative
regret with a standard-error band. Twenty runs keep the script quick
(the active inference agent is by far the slowest, about half a second
per run here); the full benchmark grid lives behind the sweep command.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from efebandit.experiment import ExperimentConfig, run_monte_carlo

OUT = Path(__file__).resolve().parent

POLICIES = ["oracle", "eps-greedy", "lts", "ai"]
COLORS = {"oracle": "black", "eps-greedy": "tab:orange", "lts": "tab:green", "ai": "tab:blue"}

fig, ax = plt.subplots(figsize=(6.5, 4.2))
for policy in POLICIES:
    config = ExperimentConfig(
        policy=policy, n_arms=10, dim=10, fusion="laplace",
        horizon=100, n_runs=20, master_seed=0,
    )
    trace = run_monte_carlo(config)
    mean = trace.mean_regret
    se = trace.cum_regret_runs.std(axis=0, ddof=1) / np.sqrt(config.n_runs)
    t = np.arange(1, config.horizon + 1)
    ax.plot(t, mean, color=COLORS[policy], label=policy)
    ax.fill_between(t, mean - se, mean + se, color=COLORS[policy], alpha=0.2, lw=0)
    finals = trace.per_run_final
    print(f"{policy:>11}: final regret {finals.mean():7.3f} "
          f"+- {finals.std(ddof=1) / np.sqrt(finals.size):.3f}   "
          f"mean selection {trace.mean_selection_time * 1e6:9.1f} us")

ax.set_xlabel("round")
ax.set_ylabel("mean cumulative regret")
ax.set_title("K=10 arms, 10-dimensional context, 20 runs")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "regret_comparison.png", dpi=150)
print(f"\nwrote {OUT / 'regret_comparison.png'}")
