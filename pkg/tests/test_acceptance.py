"""Exit criteria, one test per criterion, at the tolerances fixed up front."""

import filecmp
import time

import numpy as np
import pytest

from phasesim import cli
from phasesim import distributions as dist
from phasesim import phasespace as ps
from phasesim import simulate as sim
from phasesim.validate import CLOSED_SWEEP, convolution_param_sets

REFERENCE_BUDGET = dist.EnergyBudget(2.0, 0.5, 0.25)
N_VALUES = [1e2, 1e3, 1e4]


def test_1_vacuum_uniformity(report):
    t0 = time.perf_counter()
    grid = dist.PhaseGrid(512)
    err = float(np.abs(dist.marginal_closed_form(0.0, 0.0, grid.centers) - 1 / (2 * np.pi)).max())
    dt = time.perf_counter() - t0
    ok = report("1 vacuum uniformity", err < 1e-12 and dt < 1, f"max |p - 1/2pi| = {err:.2e} (< 1e-12), {dt:.2f} s")
    assert ok


def test_2_closed_form_vs_quadrature(report):
    t0 = time.perf_counter()
    grid = dist.PhaseGrid(512)
    err = 0.0
    for x_s, r_s in CLOSED_SWEEP:
        model = ps.composed_model(ps.SqueezedSignalParams(x_s, r_s))
        quad = dist.marginal_by_quadrature(model, grid).values
        err = max(err, float(np.abs(quad - dist.marginal_closed_form(x_s, r_s, grid.centers)).max()))
    dt = time.perf_counter() - t0
    ok = report("2 closed form vs radial quadrature", err < 1e-8 and dt < 10, f"sup-norm {err:.2e} (< 1e-8), {dt:.2f} s")
    assert ok


def test_3_fock_sum_oracle(report):
    t0 = time.perf_counter()
    grid = dist.PhaseGrid(512)
    err = 0.0
    for alpha in (0.5, 1.0, 2.0):
        rho = dist.coherent_fock(alpha)  # truncation from the default rule
        fock = dist.fock_marginal(rho, grid).values
        err = max(err, float(np.abs(fock - dist.marginal_closed_form(alpha, 0.0, grid.centers)).max()))
    dt = time.perf_counter() - t0
    ok = report("3 Fock sum vs closed form", err < 1e-6 and dt < 10, f"sup-norm {err:.2e} (< 1e-6), {dt:.2f} s")
    assert ok


def test_4_convolution_oracle(report):
    t0 = time.perf_counter()
    grid = ps.PlaneGrid(6.0, 241)
    xx, yy = grid.mesh()
    err = 0.0
    for signal, probe in convolution_param_sets(5):
        k = ps.outcome_density_on_grid(signal, probe, grid)
        err = max(err, float(np.abs(k.values - ps.composed_model(signal, probe).pdf(xx, yy)).max()))
    dt = time.perf_counter() - t0
    ok = report("4 grid convolution vs composed Gaussian", err < 1e-4 and dt < 60,
                f"sup-norm {err:.2e} (< 1e-4) over 5 sets, {dt:.2f} s")
    assert ok


class TestReferenceRun:
    n, bins = 100_000, 200

    def test_5a_mean_phase(self, report):
        t0 = time.perf_counter()
        res = sim.two_step(REFERENCE_BUDGET, self.n, self.bins, seed=1)
        dt = time.perf_counter() - t0
        ok = report("5a |phi_bar| <= 0.01 rad", abs(res.phi_bar) <= 0.01 and dt < 30,
                    f"phi_bar = {res.phi_bar:.2e} rad, {dt:.2f} s")
        assert ok

    def test_5b_second_step_sharper(self, report):
        t0 = time.perf_counter()
        std1, std2, peak_ratio = [], [], []
        for seed in range(1, 31):
            res = sim.two_step(REFERENCE_BUDGET, self.n, self.bins, seed=seed)
            std1.append(res.hist1.circular_std())
            std2.append(res.hist2.circular_std())
            peak_ratio.append(res.hist2.counts.max() / res.hist1.counts.max())
        dt = time.perf_counter() - t0
        wins = sum(b < a for a, b in zip(std1, std2))
        ok = report(
            "5b hist2 circular std < hist1 circular std, 30 seeds",
            wins == 30 and dt < 30,
            f"{wins}/30 seeds; mean circular std {np.mean(std1):.3f} -> {np.mean(std2):.3f} rad; "
            f"peak bin height ratio {np.mean(peak_ratio):.2f}; {dt:.2f} s",
        )
        assert ok

    def test_5c_step1_matches_closed_form(self, report):
        signal = sim.step1_signal(REFERENCE_BUDGET)
        hist, _, _ = sim.run_step(signal, ps.ProbeParams(), self.n, self.bins, seed=1)
        p = dist.bin_probabilities(ps.composed_model(signal), self.bins)
        se = np.sqrt(self.n * p * (1 - p))
        frac = float(np.mean(np.abs(hist.counts - self.n * p) <= 5 * se))
        ok = report("5c step-1 histogram vs closed form", frac >= 0.99, f"{frac:.1%} of bins within 5 SE (>= 99%)")
        assert ok


@pytest.fixture(scope="module")
def sweeps():
    t0 = time.perf_counter()
    step1 = sim.scaling_sweep(N_VALUES, 0.75, 0.0, mode="analytic")
    two = sim.scaling_sweep(N_VALUES, 0.25, 0.25, mode="analytic")
    return step1, two, time.perf_counter() - t0


class TestScalingLaws:
    def test_6a_step1_slope(self, sweeps, report):
        step1, _, dt = sweeps
        ok = report("6a step-1 slope -0.50 +- 0.02", abs(step1.slope1 + 0.5) <= 0.02 and dt < 60,
                    f"slope {step1.slope1:.4f}, {dt:.2f} s")
        assert ok

    def test_6b_two_step_slope(self, sweeps, report):
        _, two, dt = sweeps
        ok = report("6b two-step slope -1.00 +- 0.05", abs(two.slope2 + 1.0) <= 0.05 and dt < 60,
                    f"slope {two.slope2:.4f}, {dt:.2f} s")
        assert ok

    def test_6c_two_step_width_magnitude(self, sweeps, report):
        _, two, _ = sweeps
        width = two.rows[-1].width2
        target = dist.step2_width(dist.EnergyBudget(1e4, 0.25, 0.25))
        rel = width / target - 1
        ok = report("6c two-step width at N=1e4 within 25% of 1e-4", abs(rel) <= 0.25,
                    f"width {width:.3e} vs {target:.1e} ({rel:+.1%})")
        assert ok


def test_7_cli_determinism(tmp_path, report):
    t0 = time.perf_counter()
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["simulate", "--seed", "7", "--out-dir", str(a)]) == 0
    assert cli.main(["simulate", "--seed", "7", "--threads", "4", "--out-dir", str(b)]) == 0
    names = ["hist1.csv", "hist2.csv", "summary.json"]
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    dt = time.perf_counter() - t0
    ok = report("7 byte-identical simulate outputs (threads 1 vs 4)", match == names and dt < 60,
                f"identical: {', '.join(match) or 'none'}; {dt:.2f} s")
    assert ok
