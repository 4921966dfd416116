"""
A two-step adaptive measurement
===============================

Step 1 estimates the mean phase with a vacuum probe.  Step 2 squeezes the
probe along that phase, with the signal giving up the probe's photons.
"""

import numpy as np

from phasesim import distributions as dist
from phasesim import simulate as sim

budget = dist.EnergyBudget(N=2.0, beta_s=0.5, beta_p=0.25)
res = sim.two_step(budget, n_samples=100_000, n_bins=200, seed=1)

print("signal, step 1 :", res.signal1)
print("signal, step 2 :", res.signal2)
print("probe,  step 2 :", res.probe)
print(f"phi_bar        : {res.phi_bar:.4g} rad")

# the central peak gets taller...
print("peak bin        ", res.hist1.probabilities.max(), "->", res.hist2.probabilities.max())
# ...and mass also collects next to +-pi, which inflates the circular std
edge = lambda h: h.probabilities[[0, -1]].sum()
print("edge bins       ", edge(res.hist1), "->", edge(res.hist2))
print("circular std    ", res.width1, "->", res.width2)
print("peak width      ", dist.peak_width(sim.composed_model(res.signal1)),
      "->", dist.peak_width(sim.composed_model(res.signal2, res.probe)))

centers = res.hist2.centers / np.pi
for k in range(0, 200, 20):
    print(f"  phi/pi={centers[k]:+.3f}  {res.hist1.probabilities[k]:.4f}  {res.hist2.probabilities[k]:.4f}")
