"""
Cross-checks
============

Grid convolution of Wigner functions, Fourier inversion of the
characteristic function, and the analytic Gaussian composition all give
the same outcome density.
"""

import numpy as np

from phasesim import phasespace as ps
from phasesim import validate

signal, probe = ps.SqueezedSignalParams(1.2, 0.4), ps.ProbeParams(0.6, 0.3)
grid = ps.PlaneGrid(8.0, 241)
xx, yy = grid.mesh()

exact = ps.composed_model(signal, probe).pdf(xx, yy)
conv = ps.outcome_density_on_grid(signal, probe, grid).values
ft = ps.density_from_characteristic(lambda g: ps.pair_characteristic(signal, probe, g), grid).values

print("convolution vs exact:", np.abs(conv - exact).max())
print("fourier vs exact    :", np.abs(ft - exact).max())

for check in validate.run_checks():
    print(check.line())
