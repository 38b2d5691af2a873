"""Acceptance checks: the eleven guarantees this package ships with.

One test per criterion, named by number.  A verbose pytest run gives a
checklist with one PASSED/FAILED line per criterion; each test also
prints a one-line summary of the measured figure (visible with -s or in
the captured output of a failure).
"""

import math
import time
import warnings

import numpy as np
import pytest

from twinbeam import correlators as co
from twinbeam import crosscheck as cc
from twinbeam import fock_oracle as fo
from twinbeam import runner as rn
from twinbeam import schmidt as sch
from twinbeam.errors import DegradedAccuracyWarning
from twinbeam.schmidt import SchmidtDecomposition
from twinbeam.spectral import SpectralFilter, build_grid

# calibration targets for the shipped source profile: effective mode
# numbers of the signal and idler beams behind equal gaussian filters,
# reproduced within +-30% (the sensitivity to unpublished dispersion
# data makes tighter bands meaningless; see the calibration notes)
K_S_TARGETS = {1.0: 2.63, 2.5: 3.33, 10.0: 12.7, math.inf: 26.0}
K_I_TARGETS = {1.0: 2.03, 2.5: 2.67, 10.0: 10.4, math.inf: 27.3}


@pytest.fixture(autouse=True)
def quiet_clip_warnings():
    # the calibrated source's sinc tails are clipped by any finite grid;
    # the engine flags that honestly, and here it is expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegradedAccuracyWarning)
        yield


def _report(label: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    assert ok, f"{label}: {detail}"


def equal_mode_dec(k: int) -> SchmidtDecomposition:
    """Synthetic decomposition with exactly k equally weighted modes."""
    lam = np.full(k, 1.0 / math.sqrt(k))
    eye = np.eye(k)
    return SchmidtDecomposition(lambdas=lam, modes_s=eye, modes_i=eye, grid=None)


def random_dec(rng, size: int) -> SchmidtDecomposition:
    f = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    u, s, vh = np.linalg.svd(f)
    return SchmidtDecomposition(
        lambdas=s / np.linalg.norm(s), modes_s=u, modes_i=vh.conj().T, grid=None
    )


def flat_filter(points: int, eta: float) -> SpectralFilter:
    grid = build_grid(0.0, 0.0, 1.0, points)
    return SpectralFilter(
        grid=grid,
        kind="flat",
        center=0.0,
        fwhm=float("inf"),
        samples=np.full(points, math.sqrt(eta)),
    )


@pytest.fixture(scope="module")
def fig2_sweep():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegradedAccuracyWarning)
        return rn.run_g_sweep(rn.bundled_config("fig2"))


def test_criterion_01_g2_equals_one_plus_inverse_k():
    t0 = time.monotonic()
    target_mean = 1e-3
    worst = 0.0
    for k in (1, 2, 5, 20):
        dec = equal_mode_dec(k)
        assert sch.k_parameter(dec.lambdas) == pytest.approx(k, rel=1e-9)
        b = math.sqrt(k) * math.asinh(math.sqrt(target_mean / k))
        corr = co.build_correlators(dec, b)
        assert corr.mean_signal == pytest.approx(target_mean, rel=1e-9)
        worst = max(worst, abs(co.g(corr, 2, 0) - (1.0 + 1.0 / k)))
    elapsed = time.monotonic() - t0
    ok = worst <= 1e-4 and elapsed < 5.0
    _report(
        "criterion 1 (g2 vs mode number)",
        ok,
        f"worst |g20-(1+1/K)| = {worst:.2e} (<= 1e-4), {elapsed:.2f}s (< 5s)",
    )


def test_criterion_02_marginal_g2_bounds():
    rng = np.random.default_rng(20260815)
    lo, hi = math.inf, -math.inf
    for _ in range(50):
        dec = random_dec(rng, 8)
        corr = co.build_correlators(dec, rng.uniform(0.02, 0.31))
        assert corr.mean_signal <= 0.1
        for order in ((2, 0), (0, 2)):
            val = co.g(corr, *order)
            lo = min(lo, val)
            hi = max(hi, val)
    ok = lo > 1.0 and hi <= 2.0 + 1e-9
    _report(
        "criterion 2 (marginal g2 bounds)",
        ok,
        f"g2 range [{lo:.6f}, {hi:.6f}] inside (1, 2+1e-9]",
    )


def test_criterion_03_single_and_many_mode_loci():
    worst_sm = 0.0
    for b in np.geomspace(0.02, 0.6, 8):
        corr = co.build_correlators(equal_mode_dec(1), float(b))
        g11 = co.g(corr, 1, 1)
        g12 = co.g(corr, 1, 2)
        worst_sm = max(worst_sm, abs(g12 - (4.0 * g11 - 2.0)) / g12)
    worst_mm = 0.0
    for b in (0.05, 0.2):
        corr = co.build_correlators(equal_mode_dec(50), b)
        g11 = co.g(corr, 1, 1)
        g12 = co.g(corr, 1, 2)
        worst_mm = max(worst_mm, abs(g12 - (2.0 * g11 - 1.0)) / g12)
    ok = worst_sm <= 1e-6 and worst_mm < 0.05
    _report(
        "criterion 3 (SM/MM loci)",
        ok,
        f"SM residual {worst_sm:.2e} (<= 1e-6), MM residual {worst_mm:.2%} (< 5%)",
    )


def test_criterion_04_fitted_slope_tracks_conditioned_g2(fig2_sweep):
    slope = fig2_sweep.metadata["fit_slope"]
    g02 = [v for v in fig2_sweep.columns["g02"] if v is not None]
    reference = 2.0 * float(np.mean(g02))
    dev = abs(slope - reference) / reference
    ok = dev <= 0.05
    _report(
        "criterion 4 (g12 vs g11 slope)",
        ok,
        f"slope {slope:.4f} vs 2*g02 = {reference:.4f}, deviation {dev:.2%} (<= 5%)",
    )


def test_criterion_05_g2_gain_independence(fig2_sweep):
    g20 = [v for v in fig2_sweep.columns["g20"] if v is not None]
    spread = (max(g20) - min(g20)) / min(g20)
    ok = spread < 0.01
    _report(
        "criterion 5 (g2 gain independence)",
        ok,
        f"g20 spread over the sweep {spread:.3%} (< 1%)",
    )


def test_criterion_06_loss_invariance():
    rng = np.random.default_rng(42)
    dec = random_dec(rng, 6)
    corr = co.build_correlators(dec, 0.25)
    orders = [(n, m) for n in range(5) for m in range(5) if 1 <= n + m <= 4]
    base = {order: co.g(corr, *order) for order in orders}
    worst = 0.0
    for eta in (0.9, 0.5, 0.1, 0.01):
        fs = flat_filter(6, eta)
        for filters in ((fs, None), (None, fs), (fs, fs)):
            lossy = co.apply_filters(corr, *filters)
            for order in orders:
                worst = max(worst, abs(co.g(lossy, *order) - base[order]))
    ok = worst <= 1e-9
    _report(
        "criterion 6 (loss invariance)",
        ok,
        f"worst |delta g| over eta in {{0.9,0.5,0.1,0.01}}, n+m<=4: {worst:.2e} (<= 1e-9)",
    )


def test_criterion_07_filtered_mode_structure():
    t0 = time.monotonic()
    table = rn.run_k_table(rn.bundled_config("table1"))
    fwhms = table.columns["filter_fwhm_nm"]
    ks = dict(zip(fwhms, table.columns["K_s"]))
    ki = dict(zip(fwhms, table.columns["K_i"]))
    problems = []
    if abs(ks[math.inf] - ki[math.inf]) / ki[math.inf] > 1e-6:
        problems.append("unfiltered K_s != K_i")
    for f in (1.0, 2.5, 10.0):
        if not ki[f] < ks[f]:
            problems.append(f"K_i !< K_s at {f} nm")
    for seq in (ks, ki):
        if not seq[10.0] > seq[2.5] > seq[1.0]:
            problems.append("not monotone through 10/2.5/1 nm")
    for f, target in K_S_TARGETS.items():
        if abs(ks[f] - target) / target > 0.30:
            problems.append(f"K_s({f}) = {ks[f]:.2f} vs {target} out of +-30%")
    for f, target in K_I_TARGETS.items():
        if abs(ki[f] - target) / target > 0.30:
            problems.append(f"K_i({f}) = {ki[f]:.2f} vs {target} out of +-30%")
    elapsed = time.monotonic() - t0
    if elapsed >= 60.0:
        problems.append(f"took {elapsed:.0f}s")
    ok = not problems
    _report(
        "criterion 7 (filtered mode structure)",
        ok,
        "all eight targets within +-30%, ordering and monotonicity hold, "
        f"{elapsed:.1f}s (< 60s)" if ok else "; ".join(problems),
    )


def test_criterion_08_filtering_destroys_number_correlation(fig2_sweep):
    config = rn.bundled_config("fig2")
    grid, jsa = rn._build_jsa(config.source, config.source.grid_points)
    dec = sch.schmidt_decompose(jsa)
    worst_unfiltered = max(
        abs(co.noise_reduction_factor(co.build_correlators(dec, b)))
        for b in (0.05, 0.15, 0.3)
    )
    filtered_nrf = [v for v in fig2_sweep.columns["nrf"] if v is not None]
    ok = worst_unfiltered <= 1e-9 and min(filtered_nrf) > 0.05
    _report(
        "criterion 8 (number-correlation destruction)",
        ok,
        f"unfiltered |NRF| <= {worst_unfiltered:.2e} (<= 1e-9), "
        f"one-sided 1 nm NRF >= {min(filtered_nrf):.3f} (> 0.05)",
    )


def test_criterion_09_oracle_equivalence():
    t0 = time.monotonic()
    cases = cc.run_crosscheck(n_cases=20, seed=1234, b_max=0.3, rel_tol=1e-6)
    elapsed = time.monotonic() - t0
    worst = max(c.worst_rel for c in cases)
    ok = all(c.passed for c in cases) and elapsed < 120.0
    _report(
        "criterion 9 (Gaussian engine vs Fock oracle)",
        ok,
        f"20/20 cases, worst relative deviation {worst:.2e} (<= 1e-6, "
        f"truncation-adjusted), {elapsed:.1f}s (< 120s)",
    )


def test_criterion_10_click_conditioned_heralding():
    sj = fo.SmallJsa(np.array([[0.8, 0.15], [0.1, -0.5 + 0.2j]]))
    b = 0.22
    gauss = co.heralded_g2_click(cc.correlators_from_small(sj, b), "signal")
    state = fo.build_pdc_state(sj, b, cutoff=12)
    low = fo.click_conditioned_g2(state, "signal", 1e-3)
    unit = fo.click_conditioned_g2(state, "signal", 1.0)
    dev = abs(low - gauss) / gauss
    ok = dev <= 0.02 and unit < low
    _report(
        "criterion 10 (heralded g2)",
        ok,
        f"click g2 at eta_T=1e-3 within {dev:.2%} of g12/g11^2 (<= 2%), "
        f"eta_T=1 value {unit:.4f} < {low:.4f}",
    )


def test_criterion_11_byte_deterministic_scenarios(tmp_path):
    mismatches = []
    for name in ("table1", "fig2"):
        config = rn.bundled_config(name)
        first = rn.run_scenario(config, tmp_path / f"{name}_a", fmt="csv")
        second = rn.run_scenario(config, tmp_path / f"{name}_b", fmt="csv")
        for p1, p2 in zip(first, second):
            if open(p1, "rb").read() != open(p2, "rb").read():
                mismatches.append(p1)
    ok = not mismatches
    _report(
        "criterion 11 (byte-deterministic outputs)",
        ok,
        "table1 and fig2 reproduce byte-identically" if ok else f"differs: {mismatches}",
    )
