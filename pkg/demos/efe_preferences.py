"""
What the preference does to expected free energy
================================================

One arm, one scalar weight. As the belief mean moves, the arm's success
probability sweeps from unlikely to near certain, and the expected free
energy responds differently depending on how sharply success is
preferred. Under a near-uniform preference the information term runs
the show and the curve dips where the outcome is most uncertain; under
a sharp preference the risk term dominates and confidently bad arms
are punished hard.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from efebandit.efe import PriorPreference, efe_total
from efebandit.fusion import FusionMethod
from efebandit.gaussian import GaussianBelief

OUT = Path(__file__).resolve().parent

x = np.array([1.0])
means = np.linspace(-4.0, 4.0, 81)
prefs = {
    "p1 = 0.6": PriorPreference(0.4, 0.6),
    "p1 = 0.999": PriorPreference(0.001, 0.999),
}

fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6), sharex=True)
for ax, (label, pref) in zip(axes, prefs.items()):
    totals, risks, infos = [], [], []
    for m in means:
        b = efe_total(GaussianBelief(np.array([m]), np.eye(1)), x, pref, FusionMethod.LAPLACE)
        totals.append(b.total)
        risks.append(b.pragmatic)
        infos.append(b.epistemic)
    ax.plot(means, totals, label="total")
    ax.plot(means, risks, "--", label="risk term")
    ax.plot(means, infos, ":", label="information term")
    ax.set_title(label)
    ax.set_xlabel("belief mean (activation)")
axes[0].set_ylabel("expected free energy")
axes[0].legend()
fig.tight_layout()
fig.savefig(OUT / "efe_preferences.png", dpi=150)
print(f"wrote {OUT / 'efe_preferences.png'}")

# With a zero context the likelihood is flat at 1/2, nothing can be
# learned, and the totals collapse to closed forms.
zero = np.zeros(1)
b = GaussianBelief(np.array([0.7]), np.eye(1))
for label, pref in prefs.items():
    got = efe_total(b, zero, pref, FusionMethod.LAPLACE).total
    want = -0.5 * (np.log(pref.p0) + np.log(pref.p1))
    print(f"zero context, {label}: efe = {got:.12f}  closed form = {want:.12f}")
