"""Synthetic photon-counting scans with reproducible Poisson shot noise.

A scan steps the probe detuning across a grid for each of several
resonator detunings and records counts on two detectors: D1 behind the
ensemble (transmission) and D2 on the resonator output (emission).
Expected counts are flux * dwell * efficiency * model; observed counts
are Poisson draws.

Noise streams are derived per grid point from
numpy.random.SeedSequence([seed, scan_index, point_index]) feeding
PCG64, so results are identical whether points are generated serially
or in parallel, and the scheme is explicit enough to reproduce outside
this package.

File format: CSV with columns delta_probe_MHz, delta_cavity_MHz,
counts_d1, counts_d2, expected_d1, expected_d2, plus a JSON sidecar
carrying the plan, the physical constants and the seed.
"""

import csv
import json
from dataclasses import dataclass, replace

import numpy as np

from vitlab.core import Detunings, TWO_PI, resonant_transmission
from vitlab.spatial import IDEAL, corrected_spectrum

MHZ = TWO_PI * 1e6


@dataclass(frozen=True)
class ScanPlan:
    """Measurement plan for one synthetic run.

    delta_cavity_list: resonator detunings to scan (rad/s)
    probe_grid: probe detunings (rad/s)
    photon_flux: mean probe photons per second
    dwell: integration time per grid point (s)
    efficiency_d1, efficiency_d2: detection efficiencies in [0, 1]
    rng_seed: nonnegative integer
    """

    delta_cavity_list: tuple
    probe_grid: tuple
    photon_flux: float
    dwell: float
    efficiency_d1: float = 1.0
    efficiency_d2: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if len(self.delta_cavity_list) == 0 or len(self.probe_grid) == 0:
            raise ValueError("plan needs at least one detuning on each axis")
        if self.dwell <= 0:
            raise ValueError("dwell must be positive")
        if self.photon_flux < 0:
            raise ValueError("photon flux must be nonnegative")
        for eff in (self.efficiency_d1, self.efficiency_d2):
            if not 0.0 <= eff <= 1.0:
                raise ValueError("efficiencies must lie in [0, 1]")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be nonnegative")


@dataclass(frozen=True)
class CountRecord:
    delta_probe: float
    counts_d1: int
    counts_d2: int
    expected_d1: float
    expected_d2: float


@dataclass(frozen=True)
class Spectrum:
    """Normalized spectra on a probe-detuning grid, with optional sigmas."""

    delta_probe: object
    transmission: object
    emission: object = None
    sigma_transmission: object = None
    sigma_emission: object = None


def _point_rng(seed, scan_index, point_index):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence([seed, scan_index, point_index]))
    )


def generate_scan(cfg, eta, plan, corrections=IDEAL, emission_scale=1.0):
    """Generate counts for every (resonator detuning, probe detuning) point.

    Returns a list of (delta_cavity, [CountRecord ...]) in plan order.
    Identical (cfg, eta, plan) always produce identical records.
    """
    grid = np.asarray(plan.probe_grid, dtype=float)
    out = []
    for i, dcav in enumerate(plan.delta_cavity_list):
        det = Detunings(grid, float(dcav))
        trans, emis = corrected_spectrum(cfg, eta, det, corrections, emission_scale)
        e1 = plan.photon_flux * plan.dwell * plan.efficiency_d1 * trans
        e2 = plan.photon_flux * plan.dwell * plan.efficiency_d2 * emis
        records = []
        for j in range(len(grid)):
            rng = _point_rng(plan.rng_seed, i, j)
            records.append(
                CountRecord(
                    delta_probe=float(grid[j]),
                    counts_d1=int(rng.poisson(e1[j])),
                    counts_d2=int(rng.poisson(e2[j])),
                    expected_d1=float(e1[j]),
                    expected_d2=float(e2[j]),
                )
            )
        out.append((float(dcav), records))
    return out


def absorbed_photon_budget(od, eta, flux, duration, cfg=None, det=None):
    """Expected number of photons the ensemble absorbs.

    On double resonance this is flux * duration * (1 - e^{-OD/(eta+1)}).
    Given a detuning object (and a config for the remaining constants),
    the absorbed fraction is instead averaged over the scan grid, one
    equal dwell per point.
    """
    if od < 0 or eta < 0 or flux < 0 or duration < 0:
        raise ValueError("inputs must be nonnegative")
    if det is None:
        return flux * duration * (1.0 - resonant_transmission(od, eta))
    if cfg is None:
        raise ValueError("cfg required for the scan-averaged budget")
    cfg = replace(cfg, od=od)
    trans = corrected_spectrum(cfg, eta, det)[0]
    return flux * duration * float(np.mean(1.0 - trans))


def spectrum_from_records(records, plan):
    """Counts to normalized two-channel spectrum with Poisson sigmas.

    Count variance uses a floor of one count so zero-count points keep
    a finite weight.
    """
    norm1 = plan.photon_flux * plan.dwell * plan.efficiency_d1
    norm2 = plan.photon_flux * plan.dwell * plan.efficiency_d2
    if norm1 <= 0 or norm2 <= 0:
        raise ValueError("plan normalization is zero; cannot form a spectrum")
    dp = np.array([r.delta_probe for r in records])
    c1 = np.array([r.counts_d1 for r in records], dtype=float)
    c2 = np.array([r.counts_d2 for r in records], dtype=float)
    return Spectrum(
        delta_probe=dp,
        transmission=c1 / norm1,
        emission=c2 / norm2,
        sigma_transmission=np.sqrt(np.maximum(c1, 1.0)) / norm1,
        sigma_emission=np.sqrt(np.maximum(c2, 1.0)) / norm2,
    )


def write_scan_csv(path, scans):
    """Write generate_scan output; detunings go out in MHz."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["delta_probe_MHz", "delta_cavity_MHz", "counts_d1", "counts_d2",
             "expected_d1", "expected_d2"]
        )
        for dcav, records in scans:
            for r in records:
                writer.writerow(
                    [repr(float(r.delta_probe) / MHZ), repr(float(dcav) / MHZ),
                     r.counts_d1, r.counts_d2,
                     repr(float(r.expected_d1)), repr(float(r.expected_d2))]
                )


def read_scan_csv(path):
    """Read a scan CSV back into (delta_cavity, [CountRecord ...]) groups."""
    groups = {}
    order = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        expected = ["delta_probe_MHz", "delta_cavity_MHz", "counts_d1", "counts_d2",
                    "expected_d1", "expected_d2"]
        if header[: len(expected)] != expected:
            raise ValueError("not a scan file (bad header)")
        for row in reader:
            dcav = float(row[1]) * MHZ
            rec = CountRecord(
                delta_probe=float(row[0]) * MHZ,
                counts_d1=int(row[2]),
                counts_d2=int(row[3]),
                expected_d1=float(row[4]),
                expected_d2=float(row[5]),
            )
            key = row[1]
            if key not in groups:
                groups[key] = (dcav, [])
                order.append(key)
            groups[key][1].append(rec)
    return [groups[k] for k in order]


def write_scan_sidecar(path, plan, cfg, eta, corrections=IDEAL, emission_scale=1.0):
    """JSON sidecar recording everything needed to regenerate a scan."""
    side = corrections.side
    meta = {
        "plan": {
            "delta_cavity_MHz": [d / MHZ for d in plan.delta_cavity_list],
            "probe_grid_MHz": [d / MHZ for d in np.asarray(plan.probe_grid)],
            "photon_flux_per_s": plan.photon_flux,
            "dwell_us": plan.dwell * 1e6,
            "efficiency_d1": plan.efficiency_d1,
            "efficiency_d2": plan.efficiency_d2,
            "rng_seed": plan.rng_seed,
        },
        "physics": {
            "gamma_MHz": cfg.gamma / MHZ,
            "kappa_MHz": cfg.kappa / MHZ,
            "wavelength_um": cfg.wavelength * 1e6,
            "od": cfg.od,
            "length_um": cfg.length * 1e6,
            "f_ef": cfg.f_probe,
            "f_eg": cfg.f_cavity,
            "eta": eta,
        },
        "corrections": {
            "averaging_nodes": corrections.averaging_nodes,
            "side_weight": side.weight if side else 0.0,
            "side_shift_MHz": side.zeeman_shift / MHZ if side else 0.0,
            "jitter_fwhm_MHz": corrections.jitter_fwhm / MHZ,
            "jitter_nodes": corrections.jitter_nodes,
        },
        "emission_scale": emission_scale,
        "rng": "numpy PCG64, SeedSequence([rng_seed, scan_index, point_index]) per point",
    }
    with open(path, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return meta
