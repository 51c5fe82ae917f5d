"""Scan the probe across the resonant dip and watch the window open.

Prints a small table of on-resonance transmission versus intracavity
photon number, then the window profile at one photon number, all from
the analytic model with the realistic correction stack.
"""

import numpy as np

from vitlab.config import MHZ, corrections, load_config, physical_config
from vitlab.core import Detunings, transmission
from vitlab.spatial import corrected_transmission, effective_cooperativity

conf = load_config()
cfg = physical_config(conf)
corr = corrections(conf, average=True, side=True, jitter=True)

t_bare = np.exp(-cfg.od)
print(f"bare two-level transmission exp(-OD) = {t_bare:.4f}")
print()
print(" n_c   eta_eff   T(0,0)   contrast")
for n_c in range(0, 11, 2):
    eta = effective_cooperativity(5.0, n_c)
    t0 = corrected_transmission(cfg, eta, Detunings(0.0, 0.0), corr)
    theta = (t0 - t_bare) / (1.0 - t_bare)
    print(f"{n_c:4d}  {eta:8.1f}  {t0:.4f}     {theta:.3f}")

print()
print("window profile at n_c = 4 (uncorrected single atom for comparison):")
grid = np.linspace(-4.0, 4.0, 17) * MHZ
eta = effective_cooperativity(5.0, 4)
print(" delta/2pi (MHz)   corrected   ideal")
for d in grid:
    tc = corrected_transmission(cfg, eta, Detunings(d, 0.0), corr)
    ti = transmission(cfg, eta, Detunings(d, 0.0))
    print(f"{d / MHZ:15.2f}   {tc:.4f}      {ti:.4f}")
