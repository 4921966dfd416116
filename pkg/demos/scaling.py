"""
Width against photon number
===========================

With a vacuum probe the width falls as N^-1/2; a matched squeezed probe
turns that into N^-1.
"""

from phasesim import simulate as sim

N = [1e2, 1e3, 1e4]

step1 = sim.scaling_sweep(N, beta_s=0.75)
two = sim.scaling_sweep(N, beta_s=0.25, beta_p=0.25)

print("     N    step-1 width   predicted   two-step width  predicted")
for a, b in zip(step1.rows, two.rows):
    print(f"{a.N:6.0f}   {a.width1:.4e}    {a.predicted1:.4e}  {b.width2:.4e}     {b.predicted2:.4e}")
print("slopes:", round(step1.slope1, 4), round(two.slope2, 4))

# the circular std barely moves: a fixed share of outcomes lands behind the origin
circ = sim.scaling_sweep(N, beta_s=0.25, beta_p=0.25, estimator="circular")
print("circular std, two-step:", [round(r.width2, 4) for r in circ.rows])
