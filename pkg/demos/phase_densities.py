"""
Phase densities three ways
==========================

The same phase density from a closed form, from a ray integral of the
outcome density, and from a Fock-basis sum.
"""

import numpy as np

from phasesim import distributions as dist
from phasesim import phasespace as ps

grid = dist.PhaseGrid(512)

# a coherent signal measured with a vacuum probe
model = ps.composed_model(ps.SqueezedSignalParams(1.0, 0.0))
closed = dist.closed_form_density(model, grid)
quad = dist.marginal_by_quadrature(model, grid)
fock = dist.fock_marginal(dist.coherent_fock(1.0), grid)

print("p(0) closed     :", closed.values[grid.n_points // 2 - 1])
print("closed vs quad  :", np.abs(closed.values - quad.values).max())
print("closed vs fock  :", np.abs(closed.values - fock.values).max())

# squeezing the signal sharpens the phase
for r_s in (0.0, 0.5, 1.0):
    m = ps.composed_model(ps.SqueezedSignalParams(2.0, r_s))
    print(f"r_s={r_s:.1f}  peak width {dist.peak_width(m):.4f}  circular std {dist.model_circular_std(m):.4f}")
