"""
Seeded Monte Carlo of the two-photocurrent phase measurement and the
two-step protocol: a vacuum-probe run estimates the mean phase, then a
squeezed probe rotated to that phase sharpens the second run.

Random streams
--------------
Samples are generated in fixed-size chunks.  Chunk ``k`` of stream ``s``
draws its normal deviates from a Philox generator keyed by
``SeedSequence(seed, spawn_key=(s, k))``, so a batch is bit-identical no
matter how many worker threads produce the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import distributions as dist
from .circstats import DegenerateDirectionError, circular_mean, circular_std, rayleigh_pvalue
from .distributions import EnergyBudget, InfeasibleBudgetError
from .phasespace import GaussianModel, ProbeParams, SqueezedSignalParams, composed_model

__all__ = [
    "CHUNK_SIZE",
    "REALLOCATIONS",
    "InfeasibleBudgetError",
    "SampleBatch",
    "PhaseHistogram",
    "StepResult",
    "TwoStepResult",
    "SweepRow",
    "SweepResult",
    "chunk_generator",
    "sample_outcomes",
    "phases_of",
    "histogram",
    "run_step",
    "step1_signal",
    "step2_states",
    "two_step",
    "scaling_sweep",
    "loglog_slope",
]

CHUNK_SIZE = 1 << 16
REALLOCATIONS = ("fixed-ratio", "fixed-rs")
# Rayleigh p-value above which sampled phases count as uniform
UNIFORM_PVALUE = 1e-3


@dataclass(frozen=True)
class SampleBatch:
    outcomes: np.ndarray = field(repr=False)
    seed: int
    stream: int = 0

    @property
    def count(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class PhaseHistogram:
    """Counts over ``n_bins`` equal bins ``(e_k, e_k+1]`` covering (-pi, pi]."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size < 2:
            raise ValueError("need at least two bins")
        if np.any(counts < 0) or not np.all(counts == np.round(counts)):
            raise ValueError("counts must be non-negative integers")
        object.__setattr__(self, "counts", counts.astype(np.int64))

    @property
    def n_bins(self) -> int:
        return self.counts.size

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def bin_width(self) -> float:
        return 2 * np.pi / self.n_bins

    @property
    def edges(self) -> np.ndarray:
        return -np.pi + np.arange(self.n_bins + 1) * self.bin_width

    @property
    def centers(self) -> np.ndarray:
        return -np.pi + (np.arange(self.n_bins) + 0.5) * self.bin_width

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def density(self) -> np.ndarray:
        return self.probabilities / self.bin_width

    def circular_std(self) -> float:
        """Circular std of the binned data, bin centres weighted by counts."""
        return circular_std(self.centers, weights=self.counts)


@dataclass(frozen=True)
class StepResult:
    """One measurement step; unpacks as ``(histogram, phi_bar, width)``."""

    histogram: PhaseHistogram
    phi_bar: float
    width: float
    phases: np.ndarray = field(default=None, repr=False)
    model: GaussianModel = None

    def __iter__(self):
        return iter((self.histogram, self.phi_bar, self.width))


@dataclass(frozen=True)
class TwoStepResult:
    hist1: PhaseHistogram
    phi_bar: float
    hist2: PhaseHistogram
    width1: float
    width2: float
    seed: int
    streams: tuple
    budget: EnergyBudget
    signal1: SqueezedSignalParams
    signal2: SqueezedSignalParams
    probe: ProbeParams
    reallocation: str
    phi_bar2: float = math.nan

    def to_dict(self) -> dict:
        return {
            "budget": {"N": self.budget.N, "beta_s": self.budget.beta_s, "beta_p": self.budget.beta_p},
            "reallocation": self.reallocation,
            "seed": self.seed,
            "streams": list(self.streams),
            "n_samples": self.hist1.total,
            "n_bins": self.hist1.n_bins,
            "step1": {"x_s": self.signal1.x_s, "r_s": self.signal1.r_s, "r_p": 0.0, "psi_p": 0.0},
            "step2": {
                "x_s": self.signal2.x_s,
                "r_s": self.signal2.r_s,
                "r_p": self.probe.r_p,
                "psi_p": self.probe.psi_p,
            },
            "phi_bar": self.phi_bar,
            "phi_bar2": self.phi_bar2,
            "width1": self.width1,
            "width2": self.width2,
        }


def chunk_generator(seed: int, stream: int, chunk: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))


def sample_outcomes(model: GaussianModel, n: int, seed: int, stream: int = 0, threads: int = 1) -> SampleBatch:
    """``n`` i.i.d. outcomes ``(z1, z2)`` from ``model``."""
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    root = model.sqrt_cov()
    m0, m1 = model.mean
    f00, f01, f11 = root[0, 0], root[0, 1], root[1, 1]
    sizes = [min(CHUNK_SIZE, n - start) for start in range(0, n, CHUNK_SIZE)]

    def make(k):
        z = chunk_generator(seed, stream, k).standard_normal((sizes[k], 2))
        out = np.empty_like(z)
        # elementwise so the arithmetic never depends on BLAS threading
        out[:, 0] = m0 + z[:, 0] * f00 + z[:, 1] * f01
        out[:, 1] = m1 + z[:, 0] * f01 + z[:, 1] * f11
        return out

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(make, range(len(sizes))))
    else:
        parts = [make(k) for k in range(len(sizes))]
    return SampleBatch(np.concatenate(parts), int(seed), int(stream))


def phases_of(batch) -> np.ndarray:
    """Polar angles in (-pi, pi]; the origin maps to 0."""
    z = batch.outcomes if isinstance(batch, SampleBatch) else np.asarray(batch, dtype=float)
    z = np.atleast_2d(z)
    if z.shape[0] == 0:
        raise ValueError("empty batch")
    ang = np.arctan2(z[:, 1], z[:, 0])
    ang[ang == -np.pi] = np.pi
    ang[(z[:, 0] == 0) & (z[:, 1] == 0)] = 0.0
    return ang


def histogram(angles, n_bins: int) -> PhaseHistogram:
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    angles = np.asarray(angles, dtype=float).ravel()
    width = 2 * np.pi / n_bins
    idx = np.ceil((angles + np.pi) / width).astype(np.int64) - 1
    np.clip(idx, 0, n_bins - 1, out=idx)
    return PhaseHistogram(np.bincount(idx, minlength=n_bins))


def run_step(signal, probe, n_samples, n_bins, seed, stream=0, threads=1) -> StepResult:
    """Sample one measurement step and summarize it.

    ``phi_bar`` is the circular mean of the raw sampled angles and ``width``
    their circular std.  When the angles are consistent with a uniform
    distribution (Rayleigh test) the width is ``inf`` and ``phi_bar`` NaN.
    """
    model = composed_model(signal, probe)
    batch = sample_outcomes(model, n_samples, seed, stream, threads)
    phases = phases_of(batch)
    hist = histogram(phases, n_bins)
    if rayleigh_pvalue(phases) > UNIFORM_PVALUE:
        return StepResult(hist, math.nan, math.inf, phases, model)
    return StepResult(hist, circular_mean(phases), circular_std(phases), phases, model)


def step1_signal(budget: EnergyBudget) -> SqueezedSignalParams:
    """Signal for the vacuum-probe step: all ``N`` photons, squeezed by the residual fraction."""
    s = budget.signal_squeeze_fraction
    if s >= 1:
        raise InfeasibleBudgetError("budget leaves no coherent amplitude for the signal")
    return SqueezedSignalParams.from_photons(budget.N * (1 - s), budget.N * s)


def step2_states(budget: EnergyBudget, phi_bar: float, reallocation: str = "fixed-ratio"):
    """Signal and probe for the squeezed-probe step.

    The probe takes ``beta_p N`` photons; the signal keeps the rest.
    ``fixed-ratio`` keeps the step-1 coherent:squeezing split of the signal,
    ``fixed-rs`` keeps the step-1 signal squeezing and trims the amplitude.
    """
    if reallocation not in REALLOCATIONS:
        raise ValueError(f"reallocation must be one of {REALLOCATIONS}")
    if budget.beta_p >= 1:
        raise InfeasibleBudgetError("probe takes the whole budget")
    N, s = budget.N, budget.signal_squeeze_fraction
    n_signal = N * (1 - budget.beta_p)
    if reallocation == "fixed-ratio":
        n_coh, n_sq = n_signal * (1 - s), n_signal * s
    else:
        n_sq = N * s
        n_coh = n_signal - n_sq
    if n_coh <= 0:
        raise InfeasibleBudgetError("no coherent amplitude left for the step-2 signal")
    signal = SqueezedSignalParams.from_photons(n_coh, n_sq)
    probe = ProbeParams.from_photons(N * budget.beta_p, phi_bar)
    return signal, probe


def two_step(budget: EnergyBudget, n_samples: int = 100_000, n_bins: int = 200, seed: int = 1,
             reallocation: str = "fixed-ratio", threads: int = 1, streams=(0, 1)) -> TwoStepResult:
    if n_samples < 1000:
        raise ValueError("each step needs at least 1000 samples")
    signal1 = step1_signal(budget)
    signal2, _ = step2_states(budget, 0.0, reallocation)  # validates before sampling
    first = run_step(signal1, ProbeParams(), n_samples, n_bins, seed, streams[0], threads)
    if math.isnan(first.phi_bar):
        raise DegenerateDirectionError("step 1 carries no phase information")
    signal2, probe = step2_states(budget, first.phi_bar, reallocation)
    second = run_step(signal2, probe, n_samples, n_bins, seed, streams[1], threads)
    return TwoStepResult(
        hist1=first.histogram, phi_bar=first.phi_bar, hist2=second.histogram,
        width1=first.width, width2=second.width, seed=int(seed), streams=tuple(streams),
        budget=budget, signal1=signal1, signal2=signal2, probe=probe,
        reallocation=reallocation, phi_bar2=second.phi_bar,
    )


@dataclass(frozen=True)
class SweepRow:
    N: float
    width1: float
    width2: float
    predicted1: float
    predicted2: float


@dataclass(frozen=True)
class SweepResult:
    rows: list
    slope1: float
    slope2: float
    mode: str
    estimator: str


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least 3 points for the fit")
    if not (np.all(np.isfinite(y)) and np.all(y > 0)):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _safe(fn, *args):
    try:
        return fn(*args)
    except ValueError:
        return math.inf


def scaling_sweep(N_list, beta_s: float, beta_p: float = 0.0, mode: str = "analytic",
                  estimator: str = "peak", reallocation: str = "fixed-rs", seed: int = 1,
                  n_samples: int = 100_000, n_bins: int = 200, threads: int = 1) -> SweepResult:
    """Widths of both steps against the total photon number.

    ``analytic`` mode measures closed-form densities with ``estimator``
    (``peak``: second-order expansion width at the maximum; ``circular``:
    circular std).  Its second step uses a probe matched to the true phase.
    ``monte-carlo`` mode runs the full two-step protocol and reports the
    circular std of the sampled phases.  Predictions use the step-1 and
    step-2 photon fractions actually realized.
    """
    N_list = [float(n) for n in N_list]
    if len(N_list) < 3:
        raise ValueError("need at least 3 values of N")
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N values must be strictly ascending")
    if mode not in ("analytic", "monte-carlo"):
        raise ValueError("mode must be 'analytic' or 'monte-carlo'")
    if estimator not in ("peak", "circular"):
        raise ValueError("estimator must be 'peak' or 'circular'")
    if mode == "monte-carlo" and estimator != "circular":
        raise ValueError("monte-carlo mode supports only the circular estimator")

    rows = []
    for i, N in enumerate(N_list):
        budget = EnergyBudget(N, beta_s, beta_p)
        signal1 = step1_signal(budget)
        if mode == "analytic":
            signal2, probe = step2_states(budget, 0.0, reallocation)
            models = (composed_model(signal1), composed_model(signal2, probe))
            measure = dist.peak_width if estimator == "peak" else dist.model_circular_std
            w1, w2 = (measure(m) for m in models)
        else:
            sub_seed = int(np.random.SeedSequence([int(seed), i]).generate_state(1)[0])
            res = two_step(budget, n_samples, n_bins, sub_seed, reallocation, threads)
            w1, w2, signal2, probe = res.width1, res.width2, res.signal2, res.probe
        p1 = _safe(dist.step1_width, EnergyBudget(N, signal1.n_coherent / N))
        p2 = _safe(dist.step2_width, EnergyBudget(N, signal2.n_coherent / N, probe.mean_photons / N))
        rows.append(SweepRow(N, w1, w2, p1, p2))
    slope1 = loglog_slope(N_list, [r.width1 for r in rows])
    slope2 = loglog_slope(N_list, [r.width2 for r in rows])
    return SweepResult(rows, slope1, slope2, mode, estimator)
