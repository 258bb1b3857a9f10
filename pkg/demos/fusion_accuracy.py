"""
How close the three fusion schemes get to the true update
=========================================================

A Gaussian belief multiplied by a sigmoid likelihood has no closed-form
normalizer, so the library offers three stand-ins: the quadratic
variational bound (vb), its importance-sampled correction (vbis) and a
Laplace fit at the posterior mode. This script compares all three
against dense grid quadrature on a low-dimensional belief, first as a
table over a handful of contexts, then as an error-versus-samples curve
for the sampling scheme.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from efebandit.fusion import laplace_fuse, vb_fuse, vbis_fuse
from efebandit.gaussian import GaussianBelief
from efebandit.quadrature import oracle_fusion

OUT = Path(__file__).resolve().parent

# A belief that has already seen a few observations: start from the
# standard normal prior and apply two Laplace updates.
belief = GaussianBelief(np.zeros(2), np.eye(2))
belief = laplace_fuse(belief, np.array([1.0, 0.0]), 1).posterior
belief = laplace_fuse(belief, np.array([1.0, 1.0]), 0).posterior

print("belief mean:", np.round(belief.mean, 4))
print("belief cov:\n", np.round(belief.cov, 4))
print()

# Normalization constants for every binary context and the success outcome.
contexts = [np.array(bits, dtype=float) for bits in ((0, 0), (0, 1), (1, 0), (1, 1))]
rng = np.random.default_rng(7)

print(f"{'context':>8} {'oracle':>9} {'vb':>9} {'laplace':>9} {'vbis@1e4':>9}")
for x in contexts:
    truth = oracle_fusion(belief, x, 1).constant
    vb = vb_fuse(belief, x, 1).c_hat
    lap = laplace_fuse(belief, x, 1).c_hat
    vbis = vbis_fuse(belief, x, 1, 10_000, rng).c_hat
    label = "".join(str(int(v)) for v in x)
    print(f"{label:>8} {truth:9.5f} {vb:9.5f} {lap:9.5f} {vbis:9.5f}")
print()
print("vb always sits at or below the oracle column (it is a lower bound);")
print("laplace can land on either side; vbis converges to the oracle.")

# Error of the importance-sampled constant as the sample budget grows.
# The vb and laplace errors do not depend on samples, so they appear as
# horizontal reference lines.
x = np.array([1.0, 1.0])
truth = oracle_fusion(belief, x, 1).constant
budgets = [100, 300, 1000, 3000, 10_000, 30_000, 100_000]
n_repeats = 30

medians = []
for n in budgets:
    errs = []
    for seed in range(n_repeats):
        est = vbis_fuse(belief, x, 1, n, np.random.default_rng(seed)).c_hat
        errs.append(abs(est - truth))
    medians.append(np.median(errs))

vb_err = abs(vb_fuse(belief, x, 1).c_hat - truth)
lap_err = abs(laplace_fuse(belief, x, 1).c_hat - truth)

fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.loglog(budgets, medians, "o-", label="vbis (median of 30 seeds)")
ax.axhline(vb_err, color="tab:orange", ls="--", label="vb bound")
ax.axhline(lap_err, color="tab:green", ls=":", label="laplace")
ref = medians[0] * np.sqrt(budgets[0] / np.asarray(budgets, dtype=float))
ax.loglog(budgets, ref, color="gray", lw=0.8, label=r"$n^{-1/2}$ reference")
ax.set_xlabel("importance samples")
ax.set_ylabel("absolute error of the constant")
ax.set_title("Normalization constant error, context (1, 1)")
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "fusion_accuracy.png", dpi=150)
print(f"\nwrote {OUT / 'fusion_accuracy.png'}")
