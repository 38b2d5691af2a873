#!/usr/bin/env python3
"""Conditioning on a partner click: heralded photons and detector efficiency.

Each beam of a single-mode twin beam is thermal on its own, g2 = 2.
Conditioned on a click in the partner beam it antibunches: heralded
g2 -> 4<n> at low gain, the heralded-single-photon workhorse.

The covariance-level expression g^(1,2)/[g^(1,1)]^2 is the limit of the
exact click-conditioned moment as the trigger efficiency goes to zero.
The Fock engine evaluates the exact version at any efficiency; brighter
triggers bias toward lower-occupation events and push the conditioned
g2 down.  Loss on the conditioned beam itself cancels entirely.
"""
import numpy as np

import twinbeam as tb
from twinbeam import fock_oracle as fo
from twinbeam.crosscheck import correlators_from_small

print("single mode, trigger efficiency -> 0:")
for b in (0.05, 0.1, 0.2, 0.4):
    corr = correlators_from_small(fo.SmallJsa([[1.0]]), b)
    nbar = corr.mean_idler
    print(f"  <n> = {nbar:8.5f}:  unheralded g2 = {tb.g(corr, 0, 2):.4f}   "
          f"heralded g2 = {tb.heralded_g2_click(corr, 'signal'):.4f}   "
          f"4<n> = {4 * nbar:.4f}")

sj = fo.SmallJsa([[0.8, 0.15], [0.1, -0.5 + 0.2j]])
b = 0.22
limit = tb.heralded_g2_click(correlators_from_small(sj, b), "signal")
state = fo.build_pdc_state(sj, b, cutoff=12)
print(f"\ntwo mode pairs at b = {b}:")
print(f"  covariance-level limit              {limit:.5f}")
for eta in (1e-3, 0.05, 0.3, 1.0):
    exact = fo.click_conditioned_g2(state, "signal", eta)
    print(f"  exact, trigger efficiency {eta:5g}:   {exact:.5f}")

# flat loss on the conditioned beam: the normalized moment is unmoved.
# Smaller system here (one idler bin), since every Kraus application
# multiplies the factored-state width by up to cutoff + 1.
sj2 = fo.SmallJsa([[0.9], [0.35 + 0.1j]])
state2 = fo.build_pdc_state(sj2, 0.3, cutoff=12)
idler_idx = next(i for i, (beam, _) in enumerate(state2.modes) if beam == "idler")
lossy = fo.apply_loss(state2, idler_idx, 0.4)
print(f"\ntwo signal bins, one idler bin at b = 0.3, trigger on signal:")
print(f"  idler lossless:  {fo.click_conditioned_g2(state2, 'signal', 1e-3):.6f}")
print(f"  idler 60% lossy: {fo.click_conditioned_g2(lossy, 'signal', 1e-3):.6f}")
