"""Schmidt mode structure of a joint spectral amplitude.

The JSA matrix F factorizes by singular-value decomposition as
F = sum_k lambda_k phi_k psi_k^dagger, defining broadband Schmidt modes
for each beam and the mode number K = 1 / sum_k lambda_k^4.

For filtered (mixed) marginals there is no pure-state decomposition;
the effective mode number is defined by the trace formula
K_eff = (Tr A)^2 / Tr(A^2) on the marginal kernel, which is the
quantity a g2 measurement extracts.  Both definitions agree on
unfiltered kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, NumericalFailureError
from .spectral import FrequencyGrid, JointSpectralAmplitude, SpectralFilter

__all__ = [
    "SchmidtDecomposition",
    "MarginalKernel",
    "schmidt_decompose",
    "k_parameter",
    "marginal_kernel",
    "filtered_kernel",
    "effective_k",
]

# relative floor below which singular values are SVD noise
_TRUNCATION_RATIO = 1e-7


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Truncated SVD of a JSA: F ~ modes_s @ diag(lambdas) @ modes_i^H.

    lambdas: descending, renormalized so sum lambda^2 = 1.
    modes_s, modes_i: G x R, orthonormal columns (phi_k resp. psi_k).
    """

    lambdas: np.ndarray
    modes_s: np.ndarray
    modes_i: np.ndarray
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        ms = np.asarray(self.modes_s)
        mi = np.asarray(self.modes_i)
        r = lam.size
        if lam.ndim != 1 or r == 0:
            raise ValueError("lambdas must be a non-empty 1-d array")
        if np.any(lam < 0) or np.any(np.diff(lam) > 0):
            raise ValueError("lambdas must be non-negative and descending")
        if abs(float(np.sum(lam**2)) - 1.0) > 1e-9:
            raise ValueError("sum of lambda^2 must be 1")
        if ms.ndim != 2 or mi.ndim != 2 or ms.shape[1] != r or mi.shape[1] != r:
            raise ValueError("mode matrices must have one column per lambda")
        for name, m in (("modes_s", ms), ("modes_i", mi)):
            gram = m.conj().T @ m
            if np.max(np.abs(gram - np.eye(r))) > 1e-9:
                raise ValueError(f"columns of {name} are not orthonormal")
        object.__setattr__(self, "lambdas", _readonly(lam))
        object.__setattr__(self, "modes_s", _readonly(ms))
        object.__setattr__(self, "modes_i", _readonly(mi))

    @property
    def rank(self) -> int:
        return int(self.lambdas.size)


@dataclass(frozen=True)
class MarginalKernel:
    """Single-beam kernel A(x, x'); trace = surviving intensity fraction.

    Hermiticity is validated here; positive semidefiniteness is a
    mathematical consequence of the constructors and is exercised in the
    test suite instead of being re-diagonalized on every construction.
    """

    beam: str
    matrix: np.ndarray
    grid: FrequencyGrid | None = None

    def __post_init__(self):
        if self.beam not in ("signal", "idler"):
            raise ValueError("beam must be 'signal' or 'idler'")
        a = np.asarray(self.matrix)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("kernel matrix must be square")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.conj().T)) > 1e-10 * scale:
            raise ValueError("kernel matrix must be Hermitian")
        object.__setattr__(self, "matrix", _readonly(a))


def schmidt_decompose(jsa: JointSpectralAmplitude) -> SchmidtDecomposition:
    """SVD of the JSA with noise truncation and deterministic phases.

    Singular values below 1e-7 of the largest are discarded and the
    rest renormalized.  Each retained vector pair is rotated by a common
    phase making the largest-magnitude entry of phi_k real positive,
    which fixes the SVD's per-pair phase freedom without touching the
    reconstruction.
    """
    try:
        u, s, vh = np.linalg.svd(jsa.values, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD of the JSA failed: {exc}") from exc
    keep = s >= _TRUNCATION_RATIO * s[0]
    u = np.array(u[:, keep])
    s = s[keep] / np.linalg.norm(s[keep])
    v = np.array(vh[keep, :].conj().T)
    for k in range(s.size):
        col = u[:, k]
        j = int(np.argmax(np.abs(col)))
        mag = abs(col[j])
        if mag > 0:
            c = np.conj(col[j]) / mag
            u[:, k] = col * c
            v[:, k] = v[:, k] * c
    return SchmidtDecomposition(lambdas=s, modes_s=u, modes_i=v, grid=jsa.grid)


def k_parameter(lambdas) -> float:
    """Effective mode number K = 1 / sum lambda_k^4 of a Schmidt spectrum."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("lambdas must be a non-empty 1-d array")
    if np.any(lam < 0):
        raise ValueError("lambdas must be non-negative")
    norm_sq = float(np.sum(lam**2))
    if abs(norm_sq - 1.0) > 1e-6:
        raise ValueError(f"sum of lambda^2 is {norm_sq!r}, expected 1")
    return 1.0 / float(np.sum(lam**4))


def marginal_kernel(jsa: JointSpectralAmplitude, beam: str) -> MarginalKernel:
    """Reduced one-beam kernel: F F^H for signal, F^T F^* for idler.

    Both share the Schmidt eigenvalues lambda_k^2 and have unit trace.
    """
    f = jsa.values
    if beam == "signal":
        a = f @ f.conj().T
    elif beam == "idler":
        a = f.T @ f.conj()
    else:
        raise ValueError("beam must be 'signal' or 'idler'")
    # symmetrize away last-bit asymmetry from the matmul
    a = (a + a.conj().T) / 2.0
    return MarginalKernel(beam=beam, matrix=a, grid=jsa.grid)


def filtered_kernel(kernel: MarginalKernel, filt: SpectralFilter) -> MarginalKernel:
    """Kernel after an amplitude filter: A'(x,x') = t(x) A(x,x') t*(x').

    Deliberately not renormalized; the trace is the surviving intensity
    fraction.
    """
    if kernel.grid is not None and not filt.grid.same_as(kernel.grid):
        raise GridMismatchError("filter and kernel live on different grids")
    if filt.grid.n_points != kernel.matrix.shape[0]:
        raise GridMismatchError("filter length does not match kernel size")
    t = filt.samples
    a = t[:, None] * kernel.matrix * t.conj()[None, :]
    return MarginalKernel(beam=kernel.beam, matrix=a, grid=kernel.grid)


def effective_k(kernel: MarginalKernel) -> float:
    """Trace-form mode number (Tr A)^2 / Tr(A^2).

    Equals 1 / sum lambda^4 for unfiltered kernels and stays finite and
    loss-invariant for filtered ones.  Tr(A^2) is the squared Frobenius
    norm since A is Hermitian, so no diagonalization is needed.
    """
    a = kernel.matrix
    tr = float(np.trace(a).real)
    if tr <= 0:
        raise ValueError("kernel trace must be positive (filter removed everything?)")
    tr_sq = float(np.sum(np.abs(a) ** 2))
    return tr * tr / tr_sq
