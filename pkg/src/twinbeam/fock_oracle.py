"""Exact few-bin twin-beam states in truncated Fock space.

Brute-force reference implementation, independent of the Gaussian
machinery: the squeezing unitary is applied to the vacuum by sparse
matrix exponentiation over the product Fock basis, loss channels act
through explicit Kraus operators, and moments are read off the photon
number distribution.  Used as the oracle for the correlator engine and
for exact click-conditioned quantities at finite trigger efficiency.

States are kept in factored form rho = W W+ (columns of W are
incoherent branch vectors), which keeps pure states cheap, makes
positivity automatic, and avoids materializing dim^2 density matrices;
`rho` is available as a guarded property for small systems.

Scope guards: at most 4 modes, state-vector dimension at most 30000.
Evolution runs in a buffer space with two extra photons per mode and is
then projected onto the requested cutoff, so the reported truncation
deficit eps_trunc = 1 - ||P psi||^2 honestly measures what the
truncation removed; returned states are deliberately NOT renormalized
(their trace is 1 - eps_trunc).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import expm_multiply

from .errors import (
    DegradedAccuracyWarning,
    UndefinedConditionalError,
    UndefinedMomentError,
)

__all__ = [
    "SmallJsa",
    "FockDensityMatrix",
    "build_pdc_state",
    "apply_loss",
    "factorial_moment",
    "click_conditioned_g2",
    "MAX_STATE_DIM",
]

MAX_STATE_DIM = 30000
_MAX_DENSE_DIM = 4096  # rho materialization guard, dim^2 complex entries


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SmallJsa:
    """Joint amplitude on at most 2x2 frequency bins.

    f may be unnormalized and complex; the gain B absorbs its scale.
    """

    f: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f, dtype=complex)
        if f.ndim != 2 or not (1 <= f.shape[0] <= 2) or not (1 <= f.shape[1] <= 2):
            raise ValueError("f must be a 1x1, 1x2, 2x1 or 2x2 matrix")
        if not np.any(f != 0):
            raise ValueError("f must have at least one nonzero entry")
        object.__setattr__(self, "f", _readonly(f))

    @property
    def bins_s(self) -> int:
        return int(self.f.shape[0])

    @property
    def bins_i(self) -> int:
        return int(self.f.shape[1])


@dataclass(frozen=True)
class FockDensityMatrix:
    """State over the product Fock basis of the listed modes.

    factor: (dim, r) matrix W with rho = W W+; one column = pure state.
    eps_trunc: norm deficit introduced by the photon-number cutoff.
    Basis ordering is C-order over modes, mode 0 slowest; vacuum is
    index 0.
    """

    modes: tuple
    cutoff: int
    factor: np.ndarray
    eps_trunc: float

    def __post_init__(self):
        modes = tuple((str(beam), int(b)) for beam, b in self.modes)
        for beam, _ in modes:
            if beam not in ("signal", "idler"):
                raise ValueError("mode beams must be 'signal' or 'idler'")
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")
        dim = (self.cutoff + 1) ** len(modes)
        w = np.asarray(self.factor, dtype=complex)
        if w.ndim != 2 or w.shape[0] != dim:
            raise ValueError(f"factor must have {dim} rows for this cutoff")
        if not 0.0 <= self.eps_trunc <= 1.0:
            raise ValueError("eps_trunc must lie in [0, 1]")
        tr = float(np.sum(np.abs(w) ** 2))
        if tr > 1.0 + 1e-9:
            raise ValueError(f"trace {tr!r} exceeds 1")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "factor", _readonly(w))

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n_modes

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.factor) ** 2))

    @property
    def diagonal(self) -> np.ndarray:
        """Photon-number distribution over the product basis (sums to trace)."""
        return np.sum(np.abs(self.factor) ** 2, axis=1)

    @property
    def rho(self) -> np.ndarray:
        """Dense density matrix; refuses on dimensions where dim^2 is absurd."""
        if self.dim > _MAX_DENSE_DIM:
            raise ValueError(
                f"dense rho at dim {self.dim} would need "
                f"{self.dim**2 * 16 / 1e9:.1f} GB; use .factor or .diagonal"
            )
        return self.factor @ self.factor.conj().T

    def occupations(self) -> np.ndarray:
        """(dim, n_modes) table of photon numbers per basis state."""
        dims = (self.cutoff + 1,) * self.n_modes
        return np.stack(
            np.unravel_index(np.arange(self.dim), dims), axis=1
        )


def build_pdc_state(sj: SmallJsa, b: float, cutoff: int) -> FockDensityMatrix:
    """|psi> = exp(b * sum_ab f[a,b] s+_a i+_b - h.c.) |vacuum>.

    Exponentiation runs in a buffer space with per-mode cap cutoff + 2
    (where the anti-Hermitian generator keeps the evolution unitary up
    to solver accuracy) and the result is projected down, which is what
    makes eps_trunc an honest norm deficit rather than structurally
    zero.  Warns when eps_trunc exceeds 1e-4.
    """
    if not b >= 0:
        raise ValueError("gain b must be non-negative")
    if cutoff < 4:
        raise ValueError("cutoff must be at least 4")
    bs, bi = sj.bins_s, sj.bins_i
    n_modes = bs + bi
    if n_modes > 4:
        raise ValueError("at most 4 modes supported")
    dim = (cutoff + 1) ** n_modes
    if dim > MAX_STATE_DIM:
        raise ValueError(
            f"state dimension {dim} exceeds the supported maximum {MAX_STATE_DIM}"
        )
    modes = tuple(("signal", a) for a in range(bs)) + tuple(
        ("idler", k) for k in range(bi)
    )

    cap_b = cutoff + 2
    levels_b = cap_b + 1
    dims_b = (levels_b,) * n_modes
    dim_b = levels_b**n_modes
    occ_b = np.stack(np.unravel_index(np.arange(dim_b), dims_b), axis=1)
    strides = [1] * n_modes
    for k in range(n_modes - 2, -1, -1):
        strides[k] = strides[k + 1] * levels_b

    rows, cols, vals = [], [], []
    for a in range(bs):
        for k in range(bi):
            coeff = b * sj.f[a, k]
            if coeff == 0:
                continue
            ms, mi = a, bs + k
            na = occ_b[:, ms]
            nk = occ_b[:, mi]
            src = np.nonzero((na < cap_b) & (nk < cap_b))[0]
            dst = src + strides[ms] + strides[mi]
            amp = coeff * np.sqrt((na[src] + 1.0) * (nk[src] + 1.0))
            rows.append(dst)
            cols.append(src)
            vals.append(amp)
    vac = np.zeros(dim_b, dtype=complex)
    vac[0] = 1.0
    if rows:
        raise_op = coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim_b, dim_b),
        ).tocsc()
        gen = raise_op - raise_op.conj().T
        psi_b = expm_multiply(gen, vac)
    else:
        psi_b = vac

    keep = np.all(occ_b <= cutoff, axis=1)
    psi = psi_b[keep]  # C-order restriction keeps C-order of the small cube
    eps = max(0.0, 1.0 - float(np.sum(np.abs(psi) ** 2)))
    if eps > 1e-4:
        warnings.warn(
            f"truncation deficit eps_trunc = {eps:.3e} at cutoff {cutoff}; "
            "raise the cutoff or lower the gain",
            DegradedAccuracyWarning,
            stacklevel=2,
        )
    return FockDensityMatrix(
        modes=modes, cutoff=cutoff, factor=psi[:, None], eps_trunc=eps
    )


def apply_loss(rho: FockDensityMatrix, mode: int, eta: float) -> FockDensityMatrix:
    """Amplitude damping with transmission eta on one mode.

    Kraus operators K_j |n> = sqrt(C(n,j) (1-eta)^j eta^(n-j)) |n-j>;
    they resolve the identity exactly on the truncated space (loss only
    moves population downward), so the trace is preserved.  Each Kraus
    branch becomes an incoherent factor column; all-zero branches are
    dropped.  Note the column count multiplies by up to cutoff + 1 per
    application, so lossy channels on many modes at once only fit in
    memory for small cutoffs.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [0, 1]")
    if not 0 <= mode < rho.n_modes:
        raise ValueError(f"mode index {mode} out of range")
    levels = rho.cutoff + 1
    pre = levels**mode
    post = levels ** (rho.n_modes - mode - 1)
    r = rho.factor.shape[1]
    w = rho.factor.reshape(pre, levels, post, r)

    branches = []
    for j in range(levels):
        n_src = np.arange(j, levels)
        comb = np.array([math.comb(int(n), j) for n in n_src], dtype=float)
        # 0**0 = 1 covers the eta = 0 (j = n) and eta = 1 (j = 0) corners
        coef = np.sqrt(comb) * np.power(1.0 - eta, j / 2.0) * np.power(
            eta, (n_src - j) / 2.0
        )
        branch = np.zeros_like(w)
        branch[:, : levels - j, :, :] = w[:, j:, :, :] * coef[None, :, None, None]
        flat = branch.reshape(-1, r)
        if np.any(flat != 0):
            branches.append(flat)
    if not branches:
        factor = np.zeros((rho.dim, 1), dtype=complex)
    else:
        factor = np.concatenate(branches, axis=1)
    return FockDensityMatrix(
        modes=rho.modes, cutoff=rho.cutoff, factor=factor, eps_trunc=rho.eps_trunc
    )


def _falling(x: np.ndarray, k: int) -> np.ndarray:
    out = np.ones_like(x, dtype=float)
    for j in range(k):
        out = out * (x - j)
    return out


def _beam_totals(rho: FockDensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    occ = rho.occupations()
    s_cols = [k for k, (beam, _) in enumerate(rho.modes) if beam == "signal"]
    i_cols = [k for k, (beam, _) in enumerate(rho.modes) if beam == "idler"]
    ns_tot = occ[:, s_cols].sum(axis=1) if s_cols else np.zeros(rho.dim, dtype=int)
    ni_tot = occ[:, i_cols].sum(axis=1) if i_cols else np.zeros(rho.dim, dtype=int)
    return ns_tot, ni_tot


def factorial_moment(rho: FockDensityMatrix, n: int, m: int) -> float:
    """<: n_s^n n_i^m :> over the beam-total photon numbers.

    Normal ordering of powers of a total photon number is the falling
    factorial, so only the diagonal of rho contributes.  The state is
    not renormalized: what truncation removed (eps_trunc) is simply
    missing from the sum, which is the honest oracle answer.
    """
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError("need non-negative orders with n + m >= 1")
    if rho.cutoff - (n + m) < 2:
        warnings.warn(
            f"cutoff {rho.cutoff} leaves under 2 photons of headroom for a "
            f"moment of order {n + m}; result is truncation-dominated",
            DegradedAccuracyWarning,
            stacklevel=2,
        )
    ns_tot, ni_tot = _beam_totals(rho)
    weights = rho.diagonal
    return float(np.sum(weights * _falling(ns_tot, n) * _falling(ni_tot, m)))


def click_conditioned_g2(
    rho: FockDensityMatrix, trigger_beam: str, eta_t: float
) -> float:
    """Normalized second factorial moment of one beam, conditioned on an
    inefficient threshold detector clicking on the other.

    Detector model: loss eta_t on every trigger-beam mode followed by an
    ideal on/off detector (click = not all trigger modes in vacuum).
    Returns <:n_c^2:>_cond / <n_c>_cond^2 for the conditioned beam.
    """
    if not 0.0 < eta_t <= 1.0:
        raise ValueError("eta_t must lie in (0, 1]")
    if trigger_beam not in ("signal", "idler"):
        raise ValueError("trigger_beam must be 'signal' or 'idler'")
    beams = {beam for beam, _ in rho.modes}
    if trigger_beam not in beams or len(beams) < 2:
        raise ValueError("state must contain both beams to condition")

    state = rho
    for k, (beam, _) in enumerate(rho.modes):
        if beam == trigger_beam:
            state = apply_loss(state, k, eta_t)

    ns_tot, ni_tot = _beam_totals(state)
    trig_tot, cond_tot = (
        (ns_tot, ni_tot) if trigger_beam == "signal" else (ni_tot, ns_tot)
    )
    weights = state.diagonal
    click = trig_tot > 0
    p_click = float(np.sum(weights[click]))
    if p_click < 1e-12:
        raise UndefinedConditionalError(
            f"click probability {p_click:.3e} is too small to condition on"
        )
    w = weights[click]
    nc = cond_tot[click]
    mean = float(np.sum(w * nc)) / p_click
    if mean <= 0.0:
        raise UndefinedMomentError("conditioned beam has zero mean photon number")
    second = float(np.sum(w * _falling(nc, 2))) / p_click
    return second / mean**2
