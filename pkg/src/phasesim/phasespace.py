"""
Gaussian phase-space representation of the signal and probe modes.

Outcome-plane coordinates are ``(Re z, Im z)``.  A single vacuum mode has
variance 1/4 per axis, so the Husimi function of a vacuum signal (vacuum
signal convolved with vacuum probe) has variance 1/2 per axis.

Squeezing convention: a real squeezing parameter ``r`` anti-squeezes the
real axis (variance ``e^{2r}/4``) and squeezes the imaginary axis
(variance ``e^{-2r}/4``).  A probe with squeezing phase ``psi`` has the same
shape rotated by ``psi``, so a probe matched to a signal lying along the
real axis squeezes the phase quadrature of the outcome distribution.

Every density here is normalized to unit integral over the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from scipy.integrate import trapezoid
from scipy.signal import fftconvolve

__all__ = [
    "MAX_SQUEEZING",
    "GridClippingError",
    "SqueezingOverflowError",
    "SqueezedSignalParams",
    "ProbeParams",
    "GaussianModel",
    "PlaneGrid",
    "wrap_angle",
    "rotation",
    "q_variances",
    "signal_model",
    "probe_model",
    "composed_model",
    "wigner_gaussian",
    "wigner_on_grid",
    "default_grid",
    "grid_convolution",
    "characteristic_gaussian",
    "pair_characteristic",
    "density_from_characteristic",
    "outcome_density_on_grid",
]

# e^{2r} must stay comfortably inside double range
MAX_SQUEEZING = 20.0


class SqueezingOverflowError(ValueError):
    """Squeezing parameter above MAX_SQUEEZING."""


class GridClippingError(ValueError):
    """A sampled density has too much mass outside its grid."""


def _check_squeezing(r, name="r"):
    r = float(r)
    if not math.isfinite(r) or r < 0:
        raise ValueError(f"{name} must be finite and >= 0, got {r}")
    if r > MAX_SQUEEZING:
        raise SqueezingOverflowError(f"{name}={r} exceeds the overflow guard {MAX_SQUEEZING}")
    return r


def wrap_angle(theta):
    """Wrap angles into (-pi, pi]."""
    theta = np.asarray(theta, dtype=float)
    inside = (theta > -np.pi) & (theta <= np.pi)
    # leave in-range values bit-exact
    wrapped = np.where(inside, theta, np.pi - np.mod(np.pi - theta, 2 * np.pi))
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True)
class SqueezedSignalParams:
    """Signal mode ``D(x_s) S(r_s)|0>`` with real amplitude and squeezing."""

    x_s: float
    r_s: float = 0.0

    def __post_init__(self):
        x_s = float(self.x_s)
        if not math.isfinite(x_s) or x_s < 0:
            raise ValueError(f"x_s must be finite and >= 0, got {x_s}")
        object.__setattr__(self, "x_s", x_s)
        object.__setattr__(self, "r_s", _check_squeezing(self.r_s, "r_s"))

    @property
    def n_coherent(self) -> float:
        return self.x_s**2

    @property
    def n_squeezing(self) -> float:
        return math.sinh(self.r_s) ** 2

    @property
    def mean_photons(self) -> float:
        return self.n_coherent + self.n_squeezing

    @classmethod
    def from_photons(cls, n_coherent: float, n_squeezing: float) -> "SqueezedSignalParams":
        if n_coherent < 0 or n_squeezing < 0:
            raise ValueError("photon numbers must be >= 0")
        return cls(math.sqrt(n_coherent), math.asinh(math.sqrt(n_squeezing)))


@dataclass(frozen=True)
class ProbeParams:
    """Squeezed-vacuum probe; ``r_p == 0`` is the vacuum probe."""

    r_p: float = 0.0
    psi_p: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "r_p", _check_squeezing(self.r_p, "r_p"))
        psi = float(self.psi_p)
        if not math.isfinite(psi):
            raise ValueError("psi_p must be finite")
        object.__setattr__(self, "psi_p", wrap_angle(psi))

    @property
    def is_vacuum(self) -> bool:
        return self.r_p == 0.0

    @property
    def mean_photons(self) -> float:
        return math.sinh(self.r_p) ** 2

    @classmethod
    def from_photons(cls, n_squeezing: float, psi_p: float = 0.0) -> "ProbeParams":
        if n_squeezing < 0:
            raise ValueError("photon number must be >= 0")
        return cls(math.asinh(math.sqrt(n_squeezing)), psi_p)


@dataclass(frozen=True)
class GaussianModel:
    """Bivariate Gaussian on the outcome plane."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(2)
        cov = np.array(self.cov, dtype=float).reshape(2, 2)
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and cov must be finite")
        if abs(cov[0, 1] - cov[1, 0]) > 1e-12 * max(1.0, np.abs(cov).max()):
            raise ValueError("cov must be symmetric")
        cov[1, 0] = cov[0, 1]
        if cov[0, 0] <= 0 or np.linalg.det(cov) <= 0:
            raise ValueError("cov must be positive definite")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.cov))

    @property
    def precision(self) -> np.ndarray:
        return np.linalg.inv(self.cov)

    @property
    def max_std(self) -> float:
        return float(np.sqrt(np.linalg.eigvalsh(self.cov).max()))

    def sqrt_cov(self) -> np.ndarray:
        """Symmetric square root of the covariance."""
        w, v = np.linalg.eigh(self.cov)
        return (v * np.sqrt(w)) @ v.T

    def rotated(self, theta: float) -> "GaussianModel":
        rot = rotation(theta)
        return GaussianModel(rot @ self.mean, rot @ self.cov @ rot.T)

    def pdf(self, x, y):
        """Density at ``(x, y)``; broadcasts over arrays."""
        x = np.asarray(x, dtype=float) - self.mean[0]
        y = np.asarray(y, dtype=float) - self.mean[1]
        a = self.precision
        quad = a[0, 0] * x * x + 2 * a[0, 1] * x * y + a[1, 1] * y * y
        return np.exp(-0.5 * quad) / (2 * np.pi * math.sqrt(self.det))


@dataclass(frozen=True)
class PlaneGrid:
    """Square ``M x M`` grid on ``[-L, L]^2``; ``values[i, j] = f(x_i, y_j)``."""

    half_width: float
    points: int
    values: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("half_width must be positive")
        if self.points < 3 or self.points % 2 == 0:
            raise ValueError("points per axis must be an odd integer >= 3")
        if self.values is not None:
            values = np.asarray(self.values, dtype=float)
            if values.shape != (self.points, self.points):
                raise ValueError(f"values must have shape {(self.points, self.points)}")
            if not np.all(np.isfinite(values)):
                raise ValueError("grid values must be finite")
            object.__setattr__(self, "values", values)

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.points - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.points)

    def mesh(self):
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def with_values(self, values) -> "PlaneGrid":
        return PlaneGrid(self.half_width, self.points, values)

    def same_geometry(self, other: "PlaneGrid") -> bool:
        return self.points == other.points and math.isclose(
            self.half_width, other.half_width, rel_tol=1e-12
        )

    def integral(self) -> float:
        if self.values is None:
            raise ValueError("grid carries no values")
        ax = self.axis
        return float(trapezoid(trapezoid(self.values, ax, axis=1), ax))

    def crop(self, half_width: float) -> "PlaneGrid":
        """Central sub-grid with the same spacing and the given half-width."""
        k = round(half_width / self.spacing)
        if not math.isclose(k * self.spacing, half_width, rel_tol=1e-9):
            raise ValueError("half_width is not a multiple of the spacing")
        c = (self.points - 1) // 2
        if k > c:
            raise ValueError("crop window larger than grid")
        vals = None if self.values is None else self.values[c - k : c + k + 1, c - k : c + k + 1]
        return PlaneGrid(k * self.spacing, 2 * k + 1, vals)


def q_variances(r_s: float) -> tuple[float, float]:
    """Per-axis variances of the Husimi function of a squeezed signal."""
    r_s = _check_squeezing(r_s, "r_s")
    return (1 + math.exp(2 * r_s)) / 4, (1 + math.exp(-2 * r_s)) / 4


def _squeezed_cov(r: float, theta: float = 0.0) -> np.ndarray:
    cov = np.diag([math.exp(2 * r), math.exp(-2 * r)]) / 4
    if theta:
        rot = rotation(theta)
        cov = rot @ cov @ rot.T
    return cov


def signal_model(signal: SqueezedSignalParams) -> GaussianModel:
    """Wigner function of the signal as a Gaussian."""
    return GaussianModel([signal.x_s, 0.0], _squeezed_cov(signal.r_s))


def probe_model(probe: ProbeParams) -> GaussianModel:
    """Wigner function of the probe as a Gaussian (centered, rotated by psi_p)."""
    return GaussianModel([0.0, 0.0], _squeezed_cov(probe.r_p, probe.psi_p))


def _as_model(params) -> GaussianModel:
    if isinstance(params, GaussianModel):
        return params
    if isinstance(params, SqueezedSignalParams):
        return signal_model(params)
    if isinstance(params, ProbeParams):
        return probe_model(params)
    raise TypeError(f"cannot build a Gaussian from {type(params).__name__}")


def composed_model(signal: SqueezedSignalParams, probe: ProbeParams | None = None) -> GaussianModel:
    """Outcome distribution of the two-photocurrent measurement.

    The outcome density is the signal Wigner function convolved with the
    point-reflected probe Wigner function; for Gaussians that is a Gaussian
    with the signal mean and the sum of the two covariances.
    """
    probe = ProbeParams() if probe is None else probe
    sig = signal_model(signal)
    prb = probe_model(probe)
    return GaussianModel(sig.mean, sig.cov + prb.cov)


Params = Union[SqueezedSignalParams, ProbeParams, GaussianModel]


def wigner_gaussian(params: Params, point) -> float:
    model = _as_model(params)
    point = np.asarray(point, dtype=float)
    return float(model.pdf(point[0], point[1]))


def default_grid(model: GaussianModel, points: int = 241, min_half_width: float = 6.0) -> PlaneGrid:
    """Grid with ``L = max(6, |mean| + 6 max std)`` at fixed points per axis."""
    L = max(min_half_width, float(np.abs(model.mean).max()) + 6 * model.max_std)
    return PlaneGrid(L, points)


def wigner_on_grid(params: Params, grid: PlaneGrid, max_deficit: float = 1e-3) -> PlaneGrid:
    """Sample a Wigner function on ``grid``.

    Raises GridClippingError when the trapezoidal integral falls short of 1
    by more than ``max_deficit``.
    """
    model = _as_model(params)
    xx, yy = grid.mesh()
    out = grid.with_values(model.pdf(xx, yy))
    deficit = 1.0 - out.integral()
    if deficit > max_deficit:
        raise GridClippingError(
            f"grid half-width {grid.half_width} clips the state (integral deficit {deficit:.3g})"
        )
    return out


def grid_convolution(w_signal: PlaneGrid, w_probe: PlaneGrid) -> PlaneGrid:
    """Outcome density ``K(z) = int W_a(z + b) W_b(b) d^2 b`` on the common grid."""
    if w_signal.values is None or w_probe.values is None:
        raise ValueError("both grids need values")
    if not w_signal.same_geometry(w_probe):
        raise ValueError("signal and probe grids differ in geometry")
    h = w_signal.spacing
    # W_b(b) evaluated at z + b - z: correlate, i.e. convolve with the reflected probe
    k = fftconvolve(w_signal.values, w_probe.values[::-1, ::-1], mode="same") * h * h
    return w_signal.with_values(k)


def characteristic_gaussian(params: Params, gamma):
    """Characteristic function ``E[exp(i gamma . z)]`` of a Gaussian Wigner function.

    ``gamma`` has shape ``(..., 2)``.  With this real parameterization the
    density is recovered by ``(2 pi)^-2 int exp(-i gamma . z) chi(gamma) d^2 gamma``.
    """
    model = _as_model(params)
    g = np.asarray(gamma, dtype=float)
    lin = g @ model.mean
    quad = np.einsum("...i,ij,...j->...", g, model.cov, g)
    return np.exp(1j * lin - 0.5 * quad)


def pair_characteristic(signal: Params, probe: Params, gamma):
    """Characteristic function of the joint measurement: ``chi_a(g) chi_b(-g)``."""
    g = np.asarray(gamma, dtype=float)
    return characteristic_gaussian(signal, g) * characteristic_gaussian(probe, -g)


def density_from_characteristic(char: Callable, grid: PlaneGrid) -> PlaneGrid:
    """Invert a characteristic function onto ``grid`` by a discrete Fourier sum.

    The frequency grid has ``M`` points spaced ``2 pi / (M h)``.  The density
    must be negligible outside the grid, otherwise it aliases back in.
    """
    m, h = grid.points, grid.spacing
    dk = 2 * np.pi / (m * h)
    k = (np.arange(m) - (m - 1) / 2) * dk
    kx, ky = np.meshgrid(k, k, indexing="ij")
    xi = char(np.stack([kx, ky], axis=-1))
    phase = np.exp(-1j * np.outer(grid.axis, k))
    dens = phase @ xi @ phase.T * (dk * dk / (4 * np.pi**2))
    return grid.with_values(dens.real)


def outcome_density_on_grid(signal: SqueezedSignalParams, probe: ProbeParams, grid: PlaneGrid) -> PlaneGrid:
    """Outcome density on ``grid`` by numerical convolution of sampled Wigner functions.

    Both Wigner functions are sampled on a concentric grid with the same
    spacing, widened until neither is clipped; the convolution is then
    cropped back to ``grid``.
    """
    h = grid.spacing
    sig, prb = signal_model(signal), probe_model(probe)
    need = max(grid.half_width, signal.x_s + 7 * sig.max_std, 7 * prb.max_std)
    k = math.ceil(need / h - 1e-9)
    wide = PlaneGrid(k * h, 2 * k + 1)
    conv = grid_convolution(wigner_on_grid(sig, wide), wigner_on_grid(prb, wide))
    return conv.crop(grid.half_width)
