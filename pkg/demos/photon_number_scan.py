"""Reproduce the photon-number calibration: eta_eff versus n_c.

Runs a short synthetic scan at each intracavity photon number, fits
eta_eff from every spectrum, then fits the weighted line
eta_eff = slope * (n_c + intercept/slope). For the full-size version see
`vitlab reproduce fig4`.
"""

import argparse

import numpy as np

from vitlab.config import MHZ, load_config, physical_config
from vitlab.fitting import (
    fit_linear_weighted,
    fit_vit_spectra,
    format_value_error,
    ratio_with_error,
)
from vitlab.spatial import Corrections, effective_cooperativity
from vitlab.synth import ScanPlan, generate_scan, spectrum_from_records

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--seed", type=int, default=42)
args = parser.parse_args()

conf = load_config()
cfg = physical_config(conf)
corr = Corrections(averaging_nodes=64)

print(" n_c   truth   fitted eta_eff")
rows = []
for i, n_c in enumerate(range(4, 23, 3)):
    truth = effective_cooperativity(3.4, n_c)
    plan = ScanPlan(
        delta_cavity_list=(0.0,),
        probe_grid=tuple(np.linspace(-4.0, 4.0, 81) * MHZ),
        photon_flux=2e6,
        dwell=20e-3,
        rng_seed=args.seed + i,
    )
    scans = generate_scan(cfg, truth, plan, corr)
    datasets = [(d, spectrum_from_records(recs, plan)) for d, recs in scans]
    fit = fit_vit_spectra(datasets, cfg, corrections=corr)
    rows.append((n_c, fit.value("eta_eff"), fit.error("eta_eff")))
    print(f"{n_c:4d}  {truth:6.1f}   "
          f"{format_value_error(fit.value('eta_eff'), fit.error('eta_eff'))}")

line = fit_linear_weighted([r[0] for r in rows], [r[1] for r in rows],
                           [r[2] for r in rows])
ratio, ratio_err = ratio_with_error(line.intercept, line.intercept_err,
                                    line.slope, line.slope_err,
                                    line.cov_slope_intercept)
print()
print(f"slope          {format_value_error(line.slope, line.slope_err)}  (truth 3.4)")
print(f"intercept      {format_value_error(line.intercept, line.intercept_err)}  (truth 3.4)")
print(f"intercept/slope {format_value_error(ratio, ratio_err)}  (truth 1; "
      "the n_c -> n_c + 1 vacuum offset)")
