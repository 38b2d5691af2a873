#!/usr/bin/env python3
"""Normalized correlators across a gain sweep, 1 nm filter on the signal.

Two things to watch.  g^(2,0) stays pinned at 1 + 1/K over the whole
sweep while the photon number grows by orders of magnitude: normalized
moments see mode structure, not brightness.  And g^(1,2) rides a
straight line in g^(1,1) whose slope is twice the marginal g^(0,2) of
the idler, which is how the mode count of an undetected beam can be
read off a coincidence measurement.
"""
import warnings

import numpy as np

import twinbeam as tb

warnings.simplefilter("ignore")

cfg = tb.bundled_config("fig2")
table = tb.run_g_sweep(cfg)
c = table.columns

print(f"{'B':>8} {'<n_s>':>10} {'g11':>8} {'g20':>8} {'g02':>8} "
      f"{'g12':>8} {'g2click':>8} {'nrf':>8}")
for row in zip(c["B"], c["mean_ns"], c["g11"], c["g20"], c["g02"],
               c["g12"], c["g2_click"], c["nrf"]):
    print(("{:8.4f} {:10.3e}" + " {:8.4f}" * 6).format(*row))

slope = table.metadata["fit_slope"]
intercept = table.metadata["fit_intercept"]
print(f"\nlinear fit:  g12 = {slope:.4f} * g11 + {intercept:+.4f}")
print(f"2 * mean(g02) = {2.0 * np.mean(c['g02']):.4f}  (the slope tracks this)")

g20 = np.asarray(c["g20"])
print(f"g20 spread over the sweep: {np.ptp(g20) / g20.mean():.2e}  "
      f"(1 + 1/K = constant)")
print(f"filtered-beam nrf stays below 1 but is lifted off 0 "
      f"(min {min(c['nrf']):.3f}): filtering breaks pairing")
