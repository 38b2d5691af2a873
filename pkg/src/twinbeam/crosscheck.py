"""Cross-validation of the Gaussian correlator engine against the Fock
oracle on randomly drawn few-bin systems.

The two computations share nothing but the input matrix: one goes
through Schmidt decomposition, Gaussian second moments and Wick
pairings; the other through explicit state-vector evolution and photon
number statistics.  Agreement across random complex inputs pins down
every sign, transpose and conjugation convention at once.

Used by the test suite and exposed through the command line for
on-demand verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .correlators import TwinBeamCorrelators, build_correlators
from .fock_oracle import SmallJsa, build_pdc_state, factorial_moment
from .schmidt import SchmidtDecomposition
from . import wick

__all__ = [
    "correlators_from_small",
    "random_small_jsa",
    "CrosscheckCase",
    "run_crosscheck",
    "DEFAULT_ORDERS",
]

# all moment orders with n + m <= 3
DEFAULT_ORDERS = (
    (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3),
)


def correlators_from_small(sj: SmallJsa, b: float) -> TwinBeamCorrelators:
    """Gaussian kernels of the state exp(b sum f[a,k] s+_a i+_k - h.c.)|0>.

    The (possibly unnormalized) matrix is folded into an effective gain:
    b * f has singular values b*||f||*lambda_k with unit-norm lambdas.
    """
    u, s, vh = np.linalg.svd(np.asarray(sj.f, dtype=complex))
    norm = float(np.linalg.norm(s))
    dec = SchmidtDecomposition(
        lambdas=s / norm, modes_s=u, modes_i=vh.conj().T, grid=None
    )
    return build_correlators(dec, b * norm)


def random_small_jsa(rng: np.random.Generator, bins_s: int = 2, bins_i: int = 2) -> SmallJsa:
    """Complex matrix with unit Frobenius norm (keeps truncation tame)."""
    f = rng.normal(size=(bins_s, bins_i)) + 1j * rng.normal(size=(bins_s, bins_i))
    return SmallJsa(f=f / np.linalg.norm(f))


@dataclass(frozen=True)
class CrosscheckCase:
    index: int
    b: float
    eps_trunc: float
    worst_rel: float
    worst_order: tuple
    tol: float
    passed: bool


def run_crosscheck(
    n_cases: int = 20,
    seed: int = 1234,
    cutoff: int = 12,
    b_max: float = 0.3,
    orders=DEFAULT_ORDERS,
    rel_tol: float = 1e-6,
) -> list[CrosscheckCase]:
    """Compare both engines moment-by-moment on random 2x2-bin systems.

    The per-case tolerance is rel_tol, widened to 10x the truncation
    deficit when that is larger (the oracle is missing exactly that much
    population).
    """
    rng = np.random.default_rng(seed)
    results = []
    for idx in range(n_cases):
        sj = random_small_jsa(rng)
        b = float(rng.uniform(0.05, b_max))
        corr = correlators_from_small(sj, b)
        state = build_pdc_state(sj, b, cutoff)
        tol = max(rel_tol, 10.0 * state.eps_trunc)
        worst, worst_order = 0.0, orders[0]
        for n, m in orders:
            gauss = wick.matching_moment(corr.ns, corr.ni, corr.m, n, m).real
            fock = factorial_moment(state, n, m)
            rel = abs(gauss - fock) / max(abs(gauss), 1e-300)
            if rel > worst:
                worst, worst_order = rel, (n, m)
        results.append(
            CrosscheckCase(
                index=idx,
                b=b,
                eps_trunc=state.eps_trunc,
                worst_rel=worst,
                worst_order=worst_order,
                tol=tol,
                passed=worst <= tol,
            )
        )
    return results
