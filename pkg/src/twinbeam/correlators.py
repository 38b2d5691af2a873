"""Gaussian-state correlators of a twin-beam source and the normalized
photon-number correlation functions g^(n,m) built from them.

The pulsed squeezed state is fixed by its Schmidt decomposition and a
dimensionless collective gain B: each Schmidt pair k is an independent
two-mode squeezer with parameter B*lambda_k.  All photon-number
observables used here are time-integrated (one number per pulse), so
only three kernels matter:

    ns[x, x'] = <s+(x') s(x)>   = Phi diag(sinh^2 B lam) Phi+
    ni[y, y'] = <i+(y') i(y)>   = sum_k sinh^2(B lam_k) psi_k* psi_k^T
    m[x, y]   = <s(x) i(y)>     = Phi diag(sinh cosh) Psi+

(number kernels carry the annihilator argument on the rows, the usual
first-order-coherence orientation).

Spectral filters act as frequency-dependent beam splitters and map the
kernels linearly, after which every normalized g^(n,m) of the
transmitted beams is computed by the same Wick machinery.  Normalized
moments are exactly invariant under frequency-flat loss, which is the
point of using them experimentally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    GridMismatchError,
    NumericalFailureError,
    UndefinedMomentError,
)
from .schmidt import SchmidtDecomposition
from .spectral import FrequencyGrid, SpectralFilter
from . import wick

__all__ = [
    "TwinBeamCorrelators",
    "build_correlators",
    "apply_filters",
    "wick_normal_moment",
    "g",
    "heralded_g2_click",
    "noise_reduction_factor",
    "boundary_g12_sm",
    "boundary_g12_mm",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TwinBeamCorrelators:
    """Second-moment kernels of a (possibly filtered) twin-beam state.

    ns: signal number kernel, ns[x, x'] = <s+(x') s(x)>, Hermitian PSD.
    ni: idler number kernel, ni[y, y'] = <i+(y') i(y)>, Hermitian PSD
        (same annihilator-on-rows orientation as ns).
    m:  anomalous cross kernel, m[x, y] = <s(x) i(y)>.
    b:  collective gain the kernels were built at (bookkeeping only).
    """

    ns: np.ndarray
    ni: np.ndarray
    m: np.ndarray
    b: float
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        ns = np.asarray(self.ns)
        ni = np.asarray(self.ni)
        m = np.asarray(self.m)
        if ns.ndim != 2 or ns.shape[0] != ns.shape[1]:
            raise ValueError("ns must be square")
        if ni.ndim != 2 or ni.shape[0] != ni.shape[1]:
            raise ValueError("ni must be square")
        if m.shape != (ns.shape[0], ni.shape[0]):
            raise ValueError("m must be (signal bins) x (idler bins)")
        for name, a in (("ns", ns), ("ni", ni)):
            scale = max(1.0, float(np.max(np.abs(a))))
            if np.max(np.abs(a - a.conj().T)) > 1e-10 * scale:
                raise ValueError(f"{name} must be Hermitian")
        if not self.b >= 0:
            raise ValueError("gain b must be non-negative")
        object.__setattr__(self, "ns", _readonly(ns))
        object.__setattr__(self, "ni", _readonly(ni))
        object.__setattr__(self, "m", _readonly(m))

    @property
    def mean_signal(self) -> float:
        return float(np.trace(self.ns).real)

    @property
    def mean_idler(self) -> float:
        return float(np.trace(self.ni).real)


def build_correlators(dec: SchmidtDecomposition, b: float) -> TwinBeamCorrelators:
    """Kernels of the pure twin-beam state at collective gain b.

    Mode k carries n_k = sinh^2(b lambda_k) photons per beam; the
    anomalous weight is sinh cosh.  b = 0 gives vacuum kernels (useful
    as an edge case; every normalized moment is then undefined).
    """
    if not b >= 0:
        raise ValueError("gain b must be non-negative")
    r = b * dec.lambdas
    occ = np.sinh(r) ** 2
    cross = np.sinh(r) * np.cosh(r)
    u = dec.modes_s
    v = dec.modes_i
    ns = (u * occ) @ u.conj().T
    ni = (v.conj() * occ) @ v.T
    m = (u * cross) @ v.conj().T
    return TwinBeamCorrelators(ns=ns, ni=ni, m=m, b=float(b), grid=dec.grid)


def apply_filters(
    corr: TwinBeamCorrelators,
    filter_s: SpectralFilter | None = None,
    filter_i: SpectralFilter | None = None,
) -> TwinBeamCorrelators:
    """Kernels of the transmitted beams behind per-beam amplitude filters.

    None leaves a beam untouched.  The discarded (reflected) port is
    traced out, which is exactly what the kernel transformation

        ns -> t_s ns conj(t_s),  ni -> t_i ni conj(t_i),  m -> t_s m t_i

    (elementwise in the frequency arguments) implements for a Gaussian
    state.  No renormalization: means drop by the transmitted fraction.
    """
    ns, ni, m = corr.ns, corr.ni, corr.m
    if filter_s is not None:
        if corr.grid is not None and not filter_s.grid.same_as(corr.grid):
            raise GridMismatchError("signal filter grid differs from the state grid")
        if filter_s.samples.size != ns.shape[0]:
            raise GridMismatchError("signal filter length does not match kernel size")
        ts = filter_s.samples
        ns = ts[:, None] * ns * ts.conj()[None, :]
        m = ts[:, None] * m
    if filter_i is not None:
        if corr.grid is not None and not filter_i.grid.same_as(corr.grid):
            raise GridMismatchError("idler filter grid differs from the state grid")
        if filter_i.samples.size != ni.shape[0]:
            raise GridMismatchError("idler filter length does not match kernel size")
        ti = filter_i.samples
        ni = ti[:, None] * ni * ti.conj()[None, :]
        m = m * ti[None, :]
    return TwinBeamCorrelators(ns=ns, ni=ni, m=m, b=corr.b, grid=corr.grid)


def wick_normal_moment(corr: TwinBeamCorrelators, n: int, m: int) -> float:
    """Normal-ordered moment <: (integrated n_s)^n (integrated n_i)^m :>.

    Exact pairing enumeration; n + m is capped (see wick module).  The
    result is an expectation of a Hermitian operator, so any imaginary
    residue beyond rounding noise signals inconsistent kernels.
    """
    val = wick.matching_moment(corr.ns, corr.ni, corr.m, n, m)
    scale = max(abs(val.real), 1e-300)
    if abs(val.imag) > 1e-8 * scale:
        raise NumericalFailureError(
            f"moment ({n},{m}) has imaginary part {val.imag:.3e} "
            f"(real {val.real:.3e}); correlator kernels are inconsistent"
        )
    return float(val.real)


def g(corr: TwinBeamCorrelators, n: int, m: int) -> float:
    """Normalized correlation g^(n,m) = <:n_s^n n_i^m:> / (<n_s>^n <n_i>^m)."""
    mu_s = corr.mean_signal
    mu_i = corr.mean_idler
    if n > 0 and mu_s <= 0.0:
        raise UndefinedMomentError("signal beam has zero mean photon number")
    if m > 0 and mu_i <= 0.0:
        raise UndefinedMomentError("idler beam has zero mean photon number")
    return wick_normal_moment(corr, n, m) / (mu_s**n * mu_i**m)


def heralded_g2_click(corr: TwinBeamCorrelators, trigger: str) -> float:
    """Conditional g2 of the untriggered beam in the low-efficiency limit.

    For a click on the trigger beam the conditional second-order moment
    of the partner reduces to g^(1,2) / [g^(1,1)]^2 as the trigger
    efficiency goes to zero (the exact finite-efficiency version lives
    in the Fock oracle module).
    """
    if trigger == "signal":
        num = g(corr, 1, 2)
    elif trigger == "idler":
        num = g(corr, 2, 1)
    else:
        raise ValueError("trigger must be 'signal' or 'idler'")
    return num / g(corr, 1, 1) ** 2


def noise_reduction_factor(corr: TwinBeamCorrelators) -> float:
    """Var(n_s - n_i) / <n_s + n_i>, zero for perfectly paired beams.

    Uses <n^2> = <:n^2:> + <n> per beam; the cross term needs no
    correction since the beams commute.
    """
    mu_s = corr.mean_signal
    mu_i = corr.mean_idler
    denom = mu_s + mu_i
    if denom <= 0.0:
        raise UndefinedMomentError("mean photon number is zero in both beams")
    w20 = wick_normal_moment(corr, 2, 0)
    w02 = wick_normal_moment(corr, 0, 2)
    w11 = wick_normal_moment(corr, 1, 1)
    var_diff = (w20 + mu_s) + (w02 + mu_i) - 2.0 * w11 - (mu_s - mu_i) ** 2
    return var_diff / denom


def boundary_g12_sm(g11: float) -> float:
    """Single-mode locus g^(1,2) = 4 g^(1,1) - 2."""
    if g11 < 1.0:
        raise ValueError("g11 must be >= 1")
    return 4.0 * g11 - 2.0


def boundary_g12_mm(g11: float) -> float:
    """Many-mode locus g^(1,2) = 2 g^(1,1) - 1."""
    if g11 < 1.0:
        raise ValueError("g11 must be >= 1")
    return 2.0 * g11 - 1.0
