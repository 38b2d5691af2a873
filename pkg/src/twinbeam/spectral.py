"""Spectral description of a pulsed twin-beam source.

Everything in this module lives in angular-frequency detuning space,
measured in rad/ps relative to the carrier of each beam.  Wavelength
inputs (nm) are converted once, at the configuration boundary, with
:func:`wavelength_to_detuning`; the linear algebra downstream never sees
a carrier-sized number.

The joint spectral amplitude is modeled as

    f(nu_s, nu_i) = exp(-(nu_s + nu_i)^2 / (4 sigma^2))
                    * sinc((kappa_s nu_s + kappa_i nu_i) L / 2)

i.e. a Gaussian pump envelope enforcing energy conservation times a
sinc phase-matching function with linearized dispersion.  The constant
phase factor exp(i dk L / 2) is omitted: it cancels in every quantity
derived from |f|^2 or from the Schmidt spectrum.

All bandwidths (pump, filters) are quoted as FWHM of the *intensity*
profile.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegradedAccuracyWarning

__all__ = [
    "C_NM_PER_PS",
    "FrequencyGrid",
    "PumpEnvelope",
    "PhaseMatching",
    "JointSpectralAmplitude",
    "SpectralFilter",
    "build_grid",
    "build_jsa",
    "make_filter",
    "wavelength_to_detuning",
    "bandwidth_to_detuning_fwhm",
    "fwhm_to_sigma",
    "pump_sigma_from_fundamental",
    "default_span",
]

# speed of light in nm/ps
C_NM_PER_PS = 299792.458

# FWHM = 2 sqrt(2 ln 2) sigma for a Gaussian intensity profile
_FWHM_PER_SIGMA = 2.0 * np.sqrt(2.0 * np.log(2.0))

# half-width (in units of the sinc argument) at which sinc^2 = 1/2
_SINC_HALF_POWER = 1.391557377204354


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FrequencyGrid:
    """Shared, uniform detuning grid for both beams.

    center_s, center_i: carrier angular frequencies (rad/ps); only used
    for bookkeeping and nm conversions, never entering the matrices.
    detunings: strictly increasing, uniformly spaced, length G >= 2.
    """

    center_s: float
    center_i: float
    detunings: np.ndarray

    def __post_init__(self):
        det = np.asarray(self.detunings, dtype=float)
        if det.ndim != 1 or det.size < 2:
            raise ValueError("grid needs at least 2 detuning points")
        steps = np.diff(det)
        if np.any(steps <= 0):
            raise ValueError("detunings must be strictly increasing")
        # uniformity within 1e-12 relative tolerance
        if np.max(np.abs(steps - steps[0])) > 1e-12 * max(abs(steps[0]), 1.0):
            raise ValueError("detunings must be uniformly spaced")
        object.__setattr__(self, "detunings", _readonly(det))

    @property
    def spacing(self) -> float:
        return float(self.detunings[1] - self.detunings[0])

    @property
    def n_points(self) -> int:
        return int(self.detunings.size)

    def same_as(self, other: "FrequencyGrid") -> bool:
        return (
            self.n_points == other.n_points
            and self.center_s == other.center_s
            and self.center_i == other.center_i
            and bool(np.array_equal(self.detunings, other.detunings))
        )


@dataclass(frozen=True)
class PumpEnvelope:
    """Gaussian pump amplitude envelope alpha(nu_s + nu_i).

    sigma is the standard deviation (rad/ps) of the pump *intensity*
    spectrum; the amplitude carries exp(-nu^2 / (4 sigma^2)).
    """

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("pump sigma must be positive")

    def amplitude(self, nu_sum: np.ndarray) -> np.ndarray:
        return np.exp(-(np.asarray(nu_sum) ** 2) / (4.0 * self.sigma**2))


@dataclass(frozen=True)
class PhaseMatching:
    """Linearized sinc phase-matching of a crystal of length L (mm).

    kappa_s, kappa_i (ps/mm) are the inverse group-velocity mismatches of
    signal and idler against the pump.  A type-II source has
    kappa_s != kappa_i; equal values are accepted but warned about, since
    they collapse the model to a symmetric type-I-like shape.
    """

    length_mm: float
    kappa_s: float
    kappa_i: float

    def __post_init__(self):
        if not self.length_mm > 0:
            raise ValueError("crystal length must be positive")
        if self.kappa_s == self.kappa_i:
            warnings.warn(
                "kappa_s == kappa_i: not a type-II asymmetric model",
                DegradedAccuracyWarning,
                stacklevel=2,
            )

    def amplitude(self, nu_s, nu_i) -> np.ndarray:
        arg = (self.kappa_s * np.asarray(nu_s) + self.kappa_i * np.asarray(nu_i)) * (
            self.length_mm / 2.0
        )
        # np.sinc(x) = sin(pi x)/(pi x), so rescale; sinc(0) = 1 handled there
        return np.sinc(arg / np.pi)


@dataclass(frozen=True)
class JointSpectralAmplitude:
    """Discretized JSA with the grid measure folded in.

    values[a, b] = f(nu_s^a, nu_i^b) * spacing, so that
    sum |values|^2 = 1 (unit L2 norm, checked to 1e-10).
    """

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        g = self.grid.n_points
        if vals.shape != (g, g):
            raise ValueError(f"values must be {g}x{g} to match the grid")
        norm_sq = float(np.sum(np.abs(vals) ** 2))
        if abs(norm_sq - 1.0) > 1e-10:
            raise ValueError(f"JSA not L2-normalized: sum |F|^2 = {norm_sq!r}")
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def from_matrix(cls, matrix, grid: FrequencyGrid | None = None) -> "JointSpectralAmplitude":
        """Wrap an arbitrary nonzero matrix as a JSA, normalizing it.

        Fabricates a unit-spacing grid when none is given; useful for
        synthetic mode spectra in tests and oracle checks.
        """
        m = np.asarray(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        norm = float(np.linalg.norm(m))
        if norm == 0:
            raise ValueError("matrix must have at least one nonzero entry")
        if grid is None:
            g = m.shape[0]
            det = np.arange(g, dtype=float) - (g - 1) / 2.0
            grid = FrequencyGrid(0.0, 0.0, det)
        return cls(grid=grid, values=m / norm)


@dataclass(frozen=True)
class SpectralFilter:
    """Complex amplitude transmission t(nu) sampled on one beam's grid."""

    grid: FrequencyGrid
    kind: str
    center: float
    fwhm: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.samples)
        if t.shape != (self.grid.n_points,):
            raise ValueError("samples must match the grid length")
        if np.max(np.abs(t)) > 1.0 + 1e-12:
            raise ValueError("|t(nu)| must not exceed 1 (passive filter)")
        object.__setattr__(self, "samples", _readonly(t))


def build_grid(center_s: float, center_i: float, span: float, points: int) -> FrequencyGrid:
    """Uniform symmetric detuning grid covering [-span/2, +span/2]."""
    if not span > 0:
        raise ValueError("span must be positive")
    if points < 2:
        raise ValueError("need at least 2 grid points")
    det = np.linspace(-span / 2.0, span / 2.0, points)
    return FrequencyGrid(center_s=center_s, center_i=center_i, detunings=det)


def build_jsa(grid: FrequencyGrid, pump: PumpEnvelope, pm: PhaseMatching) -> JointSpectralAmplitude:
    """Pump envelope times phase matching on the grid, L2-normalized.

    Warns (does not fail) when the JSA has not decayed to < 1e-6 of its
    peak at the grid boundary; results on such a grid are clipped.
    """
    nu = grid.detunings
    f = pump.amplitude(nu[:, None] + nu[None, :]) * pm.amplitude(nu[:, None], nu[None, :])
    peak = float(np.max(np.abs(f)))
    if peak == 0.0:
        raise ValueError("JSA vanishes identically on this grid")
    edge = max(
        float(np.max(np.abs(f[0, :]))),
        float(np.max(np.abs(f[-1, :]))),
        float(np.max(np.abs(f[:, 0]))),
        float(np.max(np.abs(f[:, -1]))),
    )
    if edge > 1e-6 * peak:
        # routine for sinc phase matching: along the pump ridge the
        # amplitude decays only as 1/nu, so the 1e-6 target needs an
        # impractical span; the clipped tail weight scales like the
        # boundary ratio and is usually negligible
        warnings.warn(
            f"JSA boundary amplitude is {edge / peak:.2e} of peak "
            "(target < 1e-6); spectral tails are clipped by the grid",
            DegradedAccuracyWarning,
            stacklevel=2,
        )
    f *= grid.spacing
    f /= np.linalg.norm(f)
    return JointSpectralAmplitude(grid=grid, values=f)


def make_filter(kind: str, center: float, fwhm: float, grid: FrequencyGrid) -> SpectralFilter:
    """Amplitude transmission of a spectral filter sampled on the grid.

    kind "gaussian": t(nu) = exp(-(nu-center)^2/(4 sigma_f^2)) with
    sigma_f fixed by requiring the *intensity* |t|^2 to have the given
    FWHM.  kind "rectangular": t = 1 on the closed interval
    [center - fwhm/2, center + fwhm/2], 0 outside.  kind "identity":
    t = 1 everywhere (center and fwhm ignored).
    """
    nu = grid.detunings
    if kind == "identity":
        t = np.ones_like(nu)
        return SpectralFilter(grid=grid, kind=kind, center=0.0, fwhm=np.inf, samples=t)
    if not fwhm > 0:
        raise ValueError("fwhm must be positive for non-identity filters")
    if kind == "gaussian":
        sigma_f = fwhm / _FWHM_PER_SIGMA
        t = np.exp(-((nu - center) ** 2) / (4.0 * sigma_f**2))
    elif kind == "rectangular":
        # closed interval: points at exactly +-fwhm/2 are included
        half = fwhm / 2.0
        tol = 1e-12 * max(half, abs(center), 1.0)
        t = (np.abs(nu - center) <= half + tol).astype(float)
    else:
        raise ValueError(f"unknown filter kind: {kind!r}")
    return SpectralFilter(grid=grid, kind=kind, center=center, fwhm=fwhm, samples=t)


def wavelength_to_detuning(wavelength_nm: float, center_nm: float) -> float:
    """Angular-frequency detuning (rad/ps) of a wavelength from a carrier."""
    if not (wavelength_nm > 0 and center_nm > 0):
        raise ValueError("wavelengths must be positive")
    return 2.0 * np.pi * C_NM_PER_PS * (1.0 / wavelength_nm - 1.0 / center_nm)


def bandwidth_to_detuning_fwhm(fwhm_nm: float, center_nm: float) -> float:
    """Exact rad/ps width between the two wavelength half-power edges."""
    if not fwhm_nm > 0:
        raise ValueError("fwhm must be positive")
    hi = wavelength_to_detuning(center_nm - fwhm_nm / 2.0, center_nm)
    lo = wavelength_to_detuning(center_nm + fwhm_nm / 2.0, center_nm)
    return hi - lo


def fwhm_to_sigma(fwhm: float) -> float:
    """Standard deviation of a Gaussian with the given intensity FWHM."""
    return fwhm / _FWHM_PER_SIGMA


def pump_sigma_from_fundamental(center_nm: float = 796.0, fwhm_nm: float = 10.0) -> float:
    """Pump sigma (rad/ps) from the fundamental's intensity FWHM in nm.

    Assumes a Gaussian fundamental pulse and ideal second-harmonic
    generation: the amplitude autoconvolution widens the spectrum by
    sqrt(2), so sigma_2w = sqrt(2) * sigma_w.  Real doubling stages
    often act as spectral filters and produce a narrower pump; override
    in the source config when calibrating.
    """
    fwhm_rad = bandwidth_to_detuning_fwhm(fwhm_nm, center_nm)
    return np.sqrt(2.0) * fwhm_to_sigma(fwhm_rad)


def default_span(pump: PumpEnvelope, pm: PhaseMatching) -> float:
    """8x the larger of the pump and phase-matching intensity FWHMs.

    A heuristic only: strongly anti-correlated sources extend much
    further along the anti-diagonal than either width suggests, which is
    why calibrated source profiles carry an explicit span instead.
    """
    pump_fwhm = _FWHM_PER_SIGMA * pump.sigma
    widths = [pump_fwhm]
    for kappa in (pm.kappa_s, pm.kappa_i):
        if kappa != 0:
            widths.append(4.0 * _SINC_HALF_POWER / (abs(kappa) * pm.length_mm))
    return 8.0 * max(widths)
