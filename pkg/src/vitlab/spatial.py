"""Corrections that map the ideal single-coupling model onto the apparatus.

Four effects are modeled, each switchable:

  * standing-wave averaging: atoms sit at random positions z along the
    resonator axis, so each sees a coupling eta(z) = eta_max cos^2(kz);
    detected quantities are intensity averages over a quarter period.
  * photon-number scaling: a control field with mean photon number n_c
    raises the effective antinode cooperativity to eta_eff_0 (n_c + 1).
  * a weak parallel transition, two-photon shifted by a Zeeman splitting,
    that adds its own susceptibility on top of the main channel.
  * resonator frequency jitter, modeled as a Gaussian spread of the
    cavity detuning and applied as a Gauss-Hermite quadrature.

Everything here is a pure function; quadrature node/weight choices are
deterministic so results never depend on evaluation order.
"""

from dataclasses import dataclass, replace

import numpy as np

from vitlab.core import (
    Detunings,
    Susceptibility,
    TWO_PI,
    coupling_from_cooperativity,
    susceptibility,
    transfer_amplitude,
)
from vitlab.errors import ConvergenceError
from vitlab.oracle import DriveSpec, branching_ratio, steady_state_amplitudes

SIGMA_PER_FWHM = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


@dataclass(frozen=True)
class CouplingDistribution:
    """Discrete distribution of cooperativities with normalized weights."""

    etas: tuple
    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        e = np.asarray(self.etas, dtype=float)
        if e.shape != w.shape or e.ndim != 1 or len(e) == 0:
            raise ValueError("etas and weights must be matching 1-d sequences")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-12):
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(e < 0):
            raise ValueError("cooperativities must be nonnegative")


def point_distribution(eta):
    """All weight at a single coupling; reduces every average to the ideal model."""
    return CouplingDistribution(etas=(float(eta),), weights=(1.0,))


def standing_wave_distribution(eta_max, nodes=64):
    """Gauss-Legendre discretization of eta_max cos^2(kz) over a quarter period."""
    if eta_max < 0:
        raise ValueError("eta_max must be nonnegative")
    if nodes < 1:
        raise ValueError("need at least one node")
    x, w = np.polynomial.legendre.leggauss(nodes)
    kz = (x + 1.0) * (np.pi / 4.0)
    return CouplingDistribution(
        etas=tuple(eta_max * np.cos(kz) ** 2), weights=tuple(w / w.sum())
    )


@dataclass(frozen=True)
class SideChannel:
    """Weak parallel transition: relative strength and two-photon shift (rad/s)."""

    weight: float = 0.25
    zeeman_shift: float = TWO_PI * 0.6e6

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("side-channel weight must lie in [0, 1]")


def effective_cooperativity(eta_eff_0, n_c):
    """Effective antinode cooperativity eta_eff_0 (n_c + 1); exactly linear in n_c."""
    if eta_eff_0 <= 0:
        raise ValueError("eta_eff_0 must be positive")
    if n_c < 0:
        raise ValueError("n_c must be nonnegative")
    return eta_eff_0 * (n_c + 1.0)


def composite_susceptibility(cfg, eta, det, side):
    """Main plus side-channel susceptibility with the total resonant OD conserved.

    The side channel carries od * weight/(1 + weight), the main channel
    the rest, so the wide-scan integrated absorption is unchanged.  Both
    share the coupling eta; the side channel's two-photon resonance is
    displaced by zeeman_shift.
    """
    if side is None or side.weight == 0.0:
        return susceptibility(cfg, eta, det)
    od_main = cfg.od / (1.0 + side.weight)
    cfg_main = replace(cfg, od=od_main)
    cfg_side = replace(cfg, od=cfg.od - od_main)
    det_side = Detunings(det.delta_probe,
                         np.asarray(det.delta_cavity) + side.zeeman_shift)
    chi = susceptibility(cfg_main, eta, det).value \
        + susceptibility(cfg_side, eta, det_side).value
    return Susceptibility(chi)


def averaged_transmission(cfg, dist, det):
    """Intensity-averaged transmission over a coupling distribution.

    Atoms at different positions act as independent transmission paths
    in the dilute limit, so the detector sees the weighted average of
    |t|^2, not a single medium with averaged chi.
    """
    acc = 0.0
    for eta, w in zip(dist.etas, dist.weights):
        t = transfer_amplitude(susceptibility(cfg, eta, det), cfg)
        acc = acc + w * np.abs(t) ** 2
    return acc


def jitter_quadrature(sigma, nodes=16):
    """Gauss-Hermite offsets and weights for an rms frequency jitter sigma."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return np.zeros(1), np.ones(1)
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return np.sqrt(2.0) * sigma * x, w / w.sum()


def jitter_broadened(spectrum_fn, sigma, nodes=16, check_tol=None):
    """Average a spectrum over Gaussian resonator-frequency jitter.

    spectrum_fn(delta_probe, delta_cavity) is evaluated at displaced
    cavity detunings and Gauss-Hermite averaged.  sigma is the rms
    jitter (rad/s); sigma = 0 returns the function unchanged.  With
    check_tol set, the quadrature is repeated at twice the node count
    and a ConvergenceError is raised if the two disagree beyond the
    tolerance (relative).
    """
    if sigma == 0:
        return spectrum_fn

    def broadened(delta_probe, delta_cavity):
        def quad(n):
            offs, wts = jitter_quadrature(sigma, n)
            return sum(
                w * spectrum_fn(delta_probe, np.asarray(delta_cavity) + off)
                for off, w in zip(offs, wts)
            )

        val = quad(nodes)
        if check_tol is not None:
            ref = quad(2 * nodes)
            err = np.max(np.abs(val - ref)) / max(np.max(np.abs(ref)), 1e-300)
            if err > check_tol:
                raise ConvergenceError(
                    f"jitter quadrature not converged: rel change {err:.2e} on node doubling"
                )
        return val

    return broadened


@dataclass(frozen=True)
class Corrections:
    """Which apparatus corrections to apply, and their knobs.

    averaging_nodes: 0 disables standing-wave averaging, otherwise the
        Gauss-Legendre node count (64 is plenty; doubling changes
        results by < 1e-6).
    side: SideChannel or None.
    jitter_fwhm: FWHM of the resonator frequency jitter (rad/s), 0 off.
    jitter_nodes: Gauss-Hermite node count.
    """

    averaging_nodes: int = 0
    side: object = None
    jitter_fwhm: float = 0.0
    jitter_nodes: int = 16

    def distribution(self, eta_max):
        if self.averaging_nodes:
            return standing_wave_distribution(eta_max, self.averaging_nodes)
        return point_distribution(eta_max)

    def jitter(self):
        return jitter_quadrature(self.jitter_fwhm * SIGMA_PER_FWHM, self.jitter_nodes)


IDEAL = Corrections()


def corrected_spectrum(cfg, eta_max, det, corrections=IDEAL, emission_scale=1.0):
    """Transmission and resonator-emission spectra with the full correction stack.

    Returns (transmission, emission), each the intensity-level average
    over the coupling distribution and the jitter quadrature.  The
    emission channel multiplies the absorbed fraction by the branching
    ratio of the main two-photon channel and by emission_scale.
    """
    dist = corrections.distribution(eta_max)
    joffs, jwts = corrections.jitter()
    dp = np.asarray(det.delta_probe, dtype=float)
    dcav = np.asarray(det.delta_cavity, dtype=float)

    trans = 0.0
    emis = 0.0
    for eta, wz in zip(dist.etas, dist.weights):
        g = coupling_from_cooperativity(eta, cfg.kappa, cfg.gamma) if eta > 0 else 0.0
        for off, wj in zip(joffs, jwts):
            det_j = Detunings(dp, dcav + off)
            chi = composite_susceptibility(cfg, eta, det_j, corrections.side)
            t2 = np.abs(transfer_amplitude(chi, cfg)) ** 2
            trans = trans + wz * wj * t2
            if eta > 0:
                state = steady_state_amplitudes(cfg, DriveSpec(1.0, g), det_j)
                beta = branching_ratio(state, cfg)
            else:
                beta = 0.0
            emis = emis + wz * wj * (1.0 - t2) * beta
    return trans, emission_scale * emis


def corrected_transmission(cfg, eta_max, det, corrections=IDEAL):
    """Transmission channel of corrected_spectrum alone."""
    return corrected_spectrum(cfg, eta_max, det, corrections)[0]
