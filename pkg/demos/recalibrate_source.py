#!/usr/bin/env python3
"""Refit the bundled source profile from scratch.

The shipped (pump_sigma, kappa_s, kappa_i) are calibration parameters,
not first-principles dispersion.  They were chosen so the trace-form
mode counts behind gaussian bandpasses of {1, 2.5, 10} nm, plus the
unfiltered value, land within 30% of the reference counts below.  This
script reruns that fit with Nelder-Mead on log-parameters.

Two caveats the fit makes visible.  The pump width it finds is well
below what doubling a 10 nm fundamental would give; treat it as an
effective width absorbing the spectral narrowing of the doubling stage.
And the unfiltered model has K_s == K_i exactly, so the two unfiltered
reference counts can only be met by a compromise between them.

Runtime: a minute or two with the defaults.
"""
import argparse
import warnings

import numpy as np
from scipy import optimize

import twinbeam as tb

warnings.simplefilter("ignore")

L = 1.45          # mm, fixed by the device
CENTER_NM = 796.0
BANDS_NM = (1.0, 2.5, 10.0)

# reference mode counts the shipped profile is tuned to reproduce
TARG_S = (2.63, 3.33, 12.7)
TARG_I = (2.03, 2.67, 10.4)
TARG_UNF = (26.0, 27.3)

# gaussian surrogate of sinc^2: exp(-gamma x^2) matching the FWHM
GAMMA_G = np.log(2.0) / 1.391557377204354 ** 2


def surrogate_spans(sigma_p, ks, ki):
    """Marginal standard deviations of the gaussian-surrogate JSA.

    Used only to pick a grid span; the actual model keeps the sinc.
    """
    aq = 1.0 / (2.0 * sigma_p**2)
    uq = GAMMA_G * L**2 / 4.0
    det = (ks - ki) ** 2
    var_s = (aq + uq * ki**2) / (2.0 * aq * uq * det)
    var_i = (aq + uq * ks**2) / (2.0 * aq * uq * det)
    return np.sqrt(var_s), np.sqrt(var_i)


def k_table(sigma_p, ks, ki, points, span_mult=14.0, kind="gaussian"):
    std_s, std_i = surrogate_spans(sigma_p, ks, ki)
    span = span_mult * max(std_s, std_i)
    grid = tb.build_grid(0.0, 0.0, span, points)
    jsa = tb.build_jsa(grid, tb.PumpEnvelope(sigma=sigma_p),
                       tb.PhaseMatching(length_mm=L, kappa_s=ks, kappa_i=ki))
    a_s = tb.marginal_kernel(jsa, "signal")
    a_i = tb.marginal_kernel(jsa, "idler")
    out_s, out_i = [], []
    for b_nm in BANDS_NM:
        f = tb.make_filter(kind, 0.0,
                           tb.bandwidth_to_detuning_fwhm(b_nm, CENTER_NM), grid)
        out_s.append(tb.effective_k(tb.filtered_kernel(a_s, f)))
        out_i.append(tb.effective_k(tb.filtered_kernel(a_i, f)))
    return out_s, out_i, tb.effective_k(a_s), span


def objective(x, points):
    sigma_p, ks, dk = np.exp(x)
    ki = ks - dk
    if ki <= 0:
        return 1e6
    try:
        s_vals, i_vals, k_unf, _ = k_table(sigma_p, ks, ki, points)
    except Exception:
        return 1e6
    err = 0.0
    for v, t in zip(s_vals, TARG_S):
        err += np.log(v / t) ** 2
    for v, t in zip(i_vals, TARG_I):
        err += np.log(v / t) ** 2
    for t in TARG_UNF:
        err += np.log(k_unf / t) ** 2
    return err


def report(sigma_p, ks, ki, points, kind="gaussian"):
    s_vals, i_vals, k_unf, span = k_table(sigma_p, ks, ki, points, kind=kind)
    print(f"  sigma_p = {sigma_p:.6g}  kappa_s = {ks:.6g}  "
          f"kappa_i = {ki:.6g}  (span {span:.4g}, {points} pts, {kind})")
    ok_all = True
    for name, vals, targs in (("K_s", s_vals, TARG_S), ("K_i", i_vals, TARG_I)):
        for b_nm, v, t in zip(BANDS_NM, vals, targs):
            dev = v / t - 1.0
            ok = abs(dev) <= 0.30
            ok_all &= ok
            print(f"    {name}({b_nm:4g} nm) = {v:7.3f}  ref {t:6.2f}  "
                  f"dev {dev:+7.1%}  {'ok' if ok else 'FAIL'}")
    for t in TARG_UNF:
        dev = k_unf / t - 1.0
        ok = abs(dev) <= 0.30
        ok_all &= ok
        print(f"    K(unfilt)    = {k_unf:7.3f}  ref {t:6.2f}  "
              f"dev {dev:+7.1%}  {'ok' if ok else 'FAIL'}")
    print(f"    all within 30%: {ok_all}")
    return ok_all


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--fit-points", type=int, default=256,
                    help="grid points during fit iterations (default 256)")
    ap.add_argument("--report-points", type=int, default=512,
                    help="grid points for the final report (default 512)")
    ap.add_argument("--maxiter", type=int, default=300)
    args = ap.parse_args()

    # starting point from the gaussian surrogate: match the unfiltered K
    # and the marginal widths roughly, then let the optimizer move
    x0 = np.log([5.6, 1.03, 0.23])
    res = optimize.minimize(objective, x0, args=(args.fit_points,),
                            method="Nelder-Mead",
                            options={"xatol": 1e-4, "fatol": 1e-8,
                                     "maxiter": args.maxiter})
    sigma_p, ks, dk = np.exp(res.x)
    ki = ks - dk
    print(f"fit done: residual {res.fun:.3e} after {res.nit} iterations\n")

    print("optimum, gaussian filters:")
    report(sigma_p, ks, ki, args.report_points)

    print("\nsame optimum, rectangular filters (shape sensitivity):")
    report(sigma_p, ks, ki, args.report_points, kind="rectangular")

    s1, i1, k1, _ = k_table(sigma_p, ks, ki, args.report_points)
    s2, i2, k2, _ = k_table(sigma_p, ks, ki, 2 * args.report_points)
    worst = max(np.max(np.abs(np.array(s2) / np.array(s1) - 1.0)),
                np.max(np.abs(np.array(i2) / np.array(i1) - 1.0)),
                abs(k2 / k1 - 1.0))
    print(f"\ngrid-doubling movement: {worst:.2e}")
    print("\nshipped profile for comparison: pump_sigma = 7.877, "
          "kappa_s = 1.568, kappa_i = 1.111")


if __name__ == "__main__":
    main()
