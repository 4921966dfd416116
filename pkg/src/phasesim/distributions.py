"""
Marginal phase distributions of the two-photocurrent outcome density.

Three independent routes are provided:

* ``marginal_closed_form`` / ``marginal_density``: the radial integral done
  analytically, leaving an error-function expression;
* ``marginal_by_quadrature``: numerical radial integration of the 2D
  Gaussian density along each ray;
* ``fock_marginal``: the Husimi phase marginal summed over Fock-basis
  matrix elements (vacuum probe only).

Widths: ``numeric_width`` is the circular standard deviation of a density;
``peak_width`` is the width of the Gaussian obtained by expanding the
log-density to second order about its maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import erf, erfcx, gammaln

from .circstats import circular_mean, std_from_resultant
from .phasespace import GaussianModel, q_variances, wrap_angle

__all__ = [
    "MAX_FOCK_DIM",
    "QuadratureError",
    "InfeasibleBudgetError",
    "FockDimensionError",
    "PhaseGrid",
    "PhaseDensity",
    "FockDensityMatrix",
    "EnergyBudget",
    "mu_nu",
    "marginal_closed_form",
    "marginal_density",
    "closed_form_density",
    "marginal_by_quadrature",
    "fock_marginal",
    "coherent_fock",
    "default_fock_dim",
    "gaussian_approx_width",
    "gaussian_approx_density",
    "step1_width",
    "step2_width",
    "numeric_width",
    "rms_width",
    "model_resultant",
    "model_circular_std",
    "peak_width",
    "bin_probabilities",
]

MAX_FOCK_DIM = 512


class QuadratureError(RuntimeError):
    """Radial quadrature failed to reach the requested accuracy."""

    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3g})")
        self.error_estimate = error_estimate


class InfeasibleBudgetError(ValueError):
    """The energy budget cannot be split as requested."""


class FockDimensionError(ValueError):
    """Fock truncation too small for the state, or above MAX_FOCK_DIM."""


@dataclass(frozen=True)
class PhaseGrid:
    """``n_points`` angles ``-pi + (k + 1) 2 pi / n``, so the grid ends at ``pi``."""

    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8:
            raise ValueError("n_points must be an integer >= 8")

    @property
    def spacing(self) -> float:
        return 2 * np.pi / self.n_points

    @property
    def centers(self) -> np.ndarray:
        return -np.pi + (np.arange(self.n_points) + 1) * self.spacing


@dataclass(frozen=True)
class PhaseDensity:
    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise ValueError("one value per grid point required")
        object.__setattr__(self, "values", values)

    @property
    def phi(self) -> np.ndarray:
        return self.grid.centers

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.spacing)


@dataclass(frozen=True)
class FockDensityMatrix:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 1:
            raise ValueError("rho must be a non-empty square matrix")
        if np.abs(rho - rho.conj().T).max() > 1e-10:
            raise ValueError("rho must be Hermitian")
        diag = np.diag(rho).real
        if diag.min() < -1e-14:
            raise ValueError("diagonal of rho must be non-negative")
        if abs(diag.sum() - 1) > 1e-10:
            raise ValueError(f"trace of rho is {diag.sum()!r}, expected 1")
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


@dataclass(frozen=True)
class EnergyBudget:
    """Split of the total mean photon number ``N`` between signal and probe.

    ``beta_s`` is the signal coherent fraction, ``beta_p`` the probe
    squeezing fraction; the remainder is spent on squeezing the signal.
    """

    N: float
    beta_s: float
    beta_p: float = 0.0

    def __post_init__(self):
        for name in ("N", "beta_s", "beta_p"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.N <= 0:
            raise ValueError("N must be positive")
        if self.beta_s < 0 or self.beta_p < 0:
            raise ValueError("fractions must be >= 0")
        if self.beta_s + self.beta_p > 1 + 1e-12:
            raise InfeasibleBudgetError("beta_s + beta_p must not exceed 1")

    @property
    def signal_squeeze_fraction(self) -> float:
        return max(0.0, 1.0 - self.beta_s - self.beta_p)


def mu_nu(x_s, sigma1_sq, sigma2_sq, phi):
    if sigma1_sq <= 0 or sigma2_sq <= 0:
        raise ValueError("variances must be positive")
    c, s = np.cos(phi), np.sin(phi)
    mu = 0.5 * (c * c / sigma1_sq + s * s / sigma2_sq)
    nu = x_s * c / (2 * sigma1_sq)
    return mu, nu


def _radial_bracket(mu, nu, c, sqrt_det):
    """``(e^-c + sqrt(pi) t e^(t^2 - c) (1 + erf t)) / (4 pi mu sqrt_det)``, ``t = nu/sqrt(mu)``.

    ``t^2 <= c`` always holds, so the exponent never overflows; negative ``t``
    goes through the scaled complementary error function.
    """
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(nu, dtype=float) / np.sqrt(mu)
    tail = np.where(
        t < 0,
        math.exp(-c) * erfcx(-np.minimum(t, 0.0)),
        np.exp(np.minimum(t * t - c, 0.0)) * (1 + erf(t)),
    )
    return (math.exp(-c) + math.sqrt(math.pi) * t * tail) / (4 * math.pi * mu * sqrt_det)


def marginal_closed_form(x_s, r_s, phi, variances=None):
    """Closed-form phase marginal of an aligned double Gaussian centred at ``(x_s, 0)``.

    ``variances`` defaults to the vacuum-probe (Husimi) pair for ``r_s``.
    The prefactor ``1/(4 pi mu sigma1 sigma2)`` reduces to
    ``1/(2 pi mu cosh r_s)`` for that pair.
    """
    s1, s2 = q_variances(r_s) if variances is None else map(float, variances)
    if not (s1 > 0 and s2 > 0):
        raise ValueError("variances must be positive")
    phi = np.asarray(phi, dtype=float)
    mu, nu = mu_nu(x_s, s1, s2, np.atleast_1d(phi))
    out = _radial_bracket(mu, nu, x_s * x_s / (2 * s1), math.sqrt(s1 * s2))
    return float(out[0]) if phi.ndim == 0 else out.reshape(phi.shape)


def marginal_density(model: GaussianModel, phi):
    """Closed-form phase marginal of an arbitrary bivariate Gaussian."""
    phi = np.asarray(phi, dtype=float)
    p = np.atleast_1d(phi)
    a = model.precision
    m = model.mean
    c, s = np.cos(p), np.sin(p)
    mu = 0.5 * (a[0, 0] * c * c + 2 * a[0, 1] * c * s + a[1, 1] * s * s)
    am = a @ m
    nu = 0.5 * (c * am[0] + s * am[1])
    out = _radial_bracket(mu, nu, 0.5 * float(m @ am), math.sqrt(model.det))
    return float(out[0]) if phi.ndim == 0 else out.reshape(phi.shape)


def closed_form_density(model: GaussianModel, grid: PhaseGrid) -> PhaseDensity:
    return PhaseDensity(grid, marginal_density(model, grid.centers))


def marginal_by_quadrature(model: GaussianModel, grid: PhaseGrid, tol: float = 1e-10) -> PhaseDensity:
    """Phase marginal by adaptive quadrature of ``rho K(rho e^{i phi})`` over the radius."""
    a = model.precision
    a00, a01, a11 = float(a[0, 0]), float(a[0, 1]), float(a[1, 1])
    m0, m1 = float(model.mean[0]), float(model.mean[1])
    norm = 1.0 / (2 * math.pi * math.sqrt(model.det))
    out = np.empty(grid.n_points)
    for i, phi in enumerate(grid.centers):
        c, s = math.cos(phi), math.sin(phi)

        def integrand(r):
            dx, dy = r * c - m0, r * s - m1
            return r * norm * math.exp(-0.5 * (a00 * dx * dx + 2 * a01 * dx * dy + a11 * dy * dy))

        # bracket the ray's Gaussian bump: centre and width along the ray
        mu = 0.5 * (a00 * c * c + 2 * a01 * c * s + a11 * s * s)
        centre = max(0.0, 0.5 * ((a00 * m0 + a01 * m1) * c + (a01 * m0 + a11 * m1) * s) / mu)
        width = 1.0 / math.sqrt(2 * mu)
        upper = centre + 40 * width
        pts = [centre] if centre > 0 else None
        val, err = quad(integrand, 0.0, upper, points=pts, epsabs=1e-14, epsrel=1e-12, limit=200)
        if err > tol:
            raise QuadratureError(f"radial quadrature at phi={phi:.6g} did not converge", err)
        out[i] = val
    return PhaseDensity(grid, out)


def _fock_weights(dim: int) -> np.ndarray:
    n = np.arange(dim)
    lg = gammaln(n + 1)
    tot = n[:, None] + n[None, :]
    return np.exp(gammaln(1 + tot / 2) - 0.5 * (lg[:, None] + lg[None, :]))


def fock_marginal(rho: FockDensityMatrix, grid: PhaseGrid, return_residue: bool = False):
    """Husimi phase marginal from Fock-basis matrix elements.

    Sums ``Gamma(1 + (n+m)/2) / sqrt(n! m!) e^{i(n-m)phi} rho_nm / 2pi``
    by collecting each diagonal ``n - m = k`` into one Fourier coefficient.
    """
    d = rho.dim
    if d > MAX_FOCK_DIM:
        raise FockDimensionError(f"Fock dimension {d} exceeds {MAX_FOCK_DIM}")
    weighted = _fock_weights(d) * rho.rho
    ks = np.arange(-(d - 1), d)
    coeffs = np.array([np.trace(weighted, offset=-k) for k in ks])
    phase = np.exp(1j * np.outer(grid.centers, ks))
    total = phase @ coeffs / (2 * np.pi)
    residue = float(np.abs(total.imag).max())
    if residue > 1e-10:
        raise ValueError(f"imaginary residue {residue:.3g} in Fock sum; rho not Hermitian?")
    dens = PhaseDensity(grid, total.real)
    return (dens, residue) if return_residue else dens


def default_fock_dim(alpha: float) -> int:
    a2 = float(alpha) ** 2
    return max(60, math.ceil(a2 + 10 * math.sqrt(a2) + 20))


def coherent_fock(alpha: float, dim: int | None = None) -> FockDensityMatrix:
    """Truncated, renormalized ``|alpha><alpha|`` for real ``alpha``."""
    alpha = float(alpha)
    dim = default_fock_dim(alpha) if dim is None else int(dim)
    if dim < 1:
        raise FockDimensionError("dim must be >= 1")
    if dim > MAX_FOCK_DIM:
        raise FockDimensionError(f"Fock dimension {dim} exceeds {MAX_FOCK_DIM}")
    n = np.arange(dim)
    if alpha == 0.0:
        amp = (n == 0).astype(float)
    else:
        log_amp = -0.5 * alpha * alpha + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
        amp = np.exp(log_amp) * np.sign(alpha) ** n
    captured = float(np.sum(amp * amp))
    if captured < 1 - 1e-12:
        raise FockDimensionError(f"dim={dim} captures only {captured!r} of the norm")
    amp = amp / math.sqrt(captured)
    return FockDensityMatrix(np.outer(amp, amp))


def gaussian_approx_width(x_s: float, sigma2_sq: float) -> float:
    """Large-amplitude Gaussian width ``sigma2 / x_s``."""
    if x_s <= 0:
        raise ValueError("Gaussian approximation needs x_s > 0")
    if sigma2_sq < 0:
        raise ValueError("variance must be >= 0")
    return math.sqrt(sigma2_sq) / x_s


def gaussian_approx_density(phi, width: float):
    phi = np.asarray(phi, dtype=float)
    return np.exp(-0.5 * (phi / width) ** 2) / (math.sqrt(2 * math.pi) * width)


def step1_width(budget: EnergyBudget) -> float:
    """Vacuum-probe width ``1 / (2 sqrt(beta_s N))``."""
    if budget.beta_s <= 0:
        raise ValueError("coherent fraction must be positive")
    return 1.0 / (2 * math.sqrt(budget.beta_s * budget.N))


def step2_width(budget: EnergyBudget) -> float:
    """Matched squeezed-probe width ``1 / (4 sqrt(beta_s beta_p) N)``."""
    if budget.beta_s <= 0 or budget.beta_p <= 0:
        raise ValueError("coherent and probe fractions must be positive")
    return 1.0 / (4 * math.sqrt(budget.beta_s * budget.beta_p) * budget.N)


def numeric_width(density: PhaseDensity) -> float:
    """Circular standard deviation ``sqrt(-2 ln R)`` of a gridded density; ``inf`` if ``R = 0``."""
    r = np.sum(density.values * np.exp(1j * density.phi)) * density.grid.spacing
    return std_from_resultant(abs(r))


def rms_width(density: PhaseDensity) -> float:
    """Linear rms deviation about the circular mean."""
    w = density.values * density.grid.spacing
    centre = circular_mean(density.phi, weights=w)
    dev = wrap_angle(density.phi - centre)
    return float(math.sqrt(np.sum(w * dev * dev) / w.sum()))


def _mean_direction(model: GaussianModel) -> float:
    m = model.mean
    return math.atan2(m[1], m[0]) if np.hypot(*m) > 0 else 0.0


def _rough_width(model: GaussianModel) -> float:
    r = float(np.hypot(*model.mean))
    if r == 0:
        return 1.0
    theta = _mean_direction(model)
    perp = np.array([-math.sin(theta), math.cos(theta)])
    return min(1.0, math.sqrt(perp @ model.cov @ perp) / r)


def peak_width(model: GaussianModel) -> float:
    """Width of the second-order (Gaussian) expansion of ``log p`` about its maximum.

    Returns ``inf`` for a flat density.
    """

    def logp(phi):
        return math.log(marginal_density(model, float(phi)))

    theta = _mean_direction(model)
    w0 = _rough_width(model)
    res = minimize_scalar(
        lambda x: -logp(x), bounds=(theta - 3 * w0, theta + 3 * w0), method="bounded",
        options={"xatol": 1e-6 * w0},
    )
    mode = float(res.x)
    h = 1e-2 * w0
    f = [logp(mode + k * h) for k in (-2, -1, 0, 1, 2)]
    curv = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    if not curv < 0 or abs(curv) * w0 * w0 < 1e-12:
        return math.inf
    return 1.0 / math.sqrt(-curv)


def _breakpoints(centre, width, lo, hi):
    pts = {centre}
    for k in (1, 5, 50, 500, 5000):
        for sgn in (-1, 1):
            x = centre + sgn * k * width
            if lo < x < hi:
                pts.add(x)
    return sorted(p for p in pts if lo < p < hi)


def model_resultant(model: GaussianModel) -> complex:
    """``int p(phi) e^{i phi} dphi`` by adaptive quadrature of the closed form."""
    theta = _mean_direction(model)
    w = peak_width(model) if np.hypot(*model.mean) > 0 else 1.0
    w = min(w, 1.0)
    lo, hi = theta - math.pi, theta + math.pi
    pts = _breakpoints(theta, w, lo, hi)
    kw = dict(points=pts, epsabs=1e-13, epsrel=1e-11, limit=500)
    re, _ = quad(lambda x: marginal_density(model, x) * math.cos(x - theta), lo, hi, **kw)
    im, _ = quad(lambda x: marginal_density(model, x) * math.sin(x - theta), lo, hi, **kw)
    return complex(re, im) * complex(math.cos(theta), math.sin(theta))


def model_circular_std(model: GaussianModel) -> float:
    return std_from_resultant(abs(model_resultant(model)))


def bin_probabilities(model: GaussianModel, n_bins: int) -> np.ndarray:
    """Probability mass of each bin ``(e_k, e_k+1]`` with ``e_k = -pi + k 2pi/n``."""
    edges = -np.pi + np.arange(n_bins + 1) * (2 * np.pi / n_bins)
    out = np.empty(n_bins)
    for k in range(n_bins):
        out[k], _ = quad(lambda x: marginal_density(model, x), edges[k], edges[k + 1],
                         epsabs=1e-14, epsrel=1e-10, limit=200)
    return out
