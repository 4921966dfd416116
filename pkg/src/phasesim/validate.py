"""
Oracle suite: every numerical route checked against an independent one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from . import phasespace as ps
from . import simulate as sim


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"[{tag}] {self.name}: measured {self.measured:.3e}, tolerance {self.tolerance:.1e}{extra}"


def _check(name, measured, tol, detail="", below=True):
    ok = measured < tol if below else measured >= tol
    return Check(name, bool(ok), float(measured), float(tol), detail)


CLOSED_SWEEP = [(x, r) for x in (0.0, 1.0, 3.0) for r in (0.0, 0.5, 1.0)]
REFERENCE_BUDGET = dist.EnergyBudget(2.0, 0.5, 0.25)


def convolution_param_sets(count: int = 5, seed: int = 2024):
    """Randomized (signal, probe) pairs with ``x_s <= 2`` and squeezing ``<= 1``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x_s, r_s, r_p, psi = rng.uniform(0, 2), rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(-np.pi, np.pi)
        out.append((ps.SqueezedSignalParams(x_s, r_s), ps.ProbeParams(r_p, psi)))
    return out


def check_vacuum_uniform(fault=False):
    grid = dist.PhaseGrid(512)
    ref = 1 / math.pi if fault else 1 / (2 * math.pi)
    err = np.abs(dist.marginal_closed_form(0.0, 0.0, grid.centers) - ref).max()
    return _check("vacuum closed form is uniform", err, 1e-12)


def check_closed_vs_quadrature():
    grid = dist.PhaseGrid(512)
    err = 0.0
    for x_s, r_s in CLOSED_SWEEP:
        model = ps.composed_model(ps.SqueezedSignalParams(x_s, r_s))
        quad = dist.marginal_by_quadrature(model, grid).values
        closed = dist.marginal_closed_form(x_s, r_s, grid.centers)
        err = max(err, np.abs(quad - closed).max())
    return _check("closed form vs radial quadrature", err, 1e-8, "9-point (x_s, r_s) sweep")


def check_fock_vs_closed():
    grid = dist.PhaseGrid(512)
    err = 0.0
    for alpha in (0.5, 1.0, 2.0):
        fock = dist.fock_marginal(dist.coherent_fock(alpha), grid).values
        err = max(err, np.abs(fock - dist.marginal_closed_form(alpha, 0.0, grid.centers)).max())
    return _check("Fock sum vs closed form", err, 1e-6, "coherent alpha in {0.5, 1, 2}")


def check_convolution():
    grid = ps.PlaneGrid(6.0, 241)
    xx, yy = grid.mesh()
    err = 0.0
    for signal, probe in convolution_param_sets():
        k = ps.outcome_density_on_grid(signal, probe, grid)
        err = max(err, np.abs(k.values - ps.composed_model(signal, probe).pdf(xx, yy)).max())
    return _check("grid convolution vs composed Gaussian", err, 1e-4, "L=6, M=241, 5 sets")


def check_fourier():
    signal, probe = ps.SqueezedSignalParams(1.0, 0.4), ps.ProbeParams(0.5, 0.3)
    grid = ps.PlaneGrid(10.0, 201)
    k = ps.outcome_density_on_grid(signal, probe, grid)
    ft = ps.density_from_characteristic(lambda g: ps.pair_characteristic(signal, probe, g), grid)
    return _check("Fourier transform of characteristic function vs grid convolution",
                  np.abs(ft.values - k.values).max(), 1e-3)


def check_monte_carlo(seed=1):
    signal = sim.step1_signal(REFERENCE_BUDGET)
    n, bins = 100_000, 200
    hist, _, _ = sim.run_step(signal, ps.ProbeParams(), n, bins, seed)
    p = dist.bin_probabilities(ps.composed_model(signal), bins)
    se = np.sqrt(n * p * (1 - p))
    frac = float(np.mean(np.abs(hist.counts - n * p) <= 5 * se))
    return _check("Monte Carlo step-1 histogram vs closed form", frac, 0.99,
                  "fraction of bins within 5 binomial SE", below=False)


def check_determinism(seed=1):
    model = ps.composed_model(*sim.step2_states(REFERENCE_BUDGET, 0.01))
    a = sim.sample_outcomes(model, 200_000, seed, threads=1).outcomes
    b = sim.sample_outcomes(model, 200_000, seed, threads=4).outcomes
    mismatches = int(np.count_nonzero(a != b))
    return Check("sampling is bit-identical across thread counts", mismatches == 0,
                 float(mismatches), 0.0, "mismatching coordinates")


def run_checks(fault: bool = False) -> list[Check]:
    return [
        check_vacuum_uniform(fault),
        check_closed_vs_quadrature(),
        check_fock_vs_closed(),
        check_convolution(),
        check_fourier(),
        check_monte_carlo(),
        check_determinism(),
    ]
