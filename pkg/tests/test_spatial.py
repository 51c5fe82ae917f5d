import numpy as np
import pytest
from dataclasses import replace

from vitlab.config import MHZ
from vitlab.core import Detunings, transmission
from vitlab.errors import ConvergenceError
from vitlab.spatial import (
    IDEAL,
    Corrections,
    SIGMA_PER_FWHM,
    SideChannel,
    composite_susceptibility,
    corrected_spectrum,
    corrected_transmission,
    effective_cooperativity,
    jitter_broadened,
    jitter_quadrature,
    point_distribution,
    standing_wave_distribution,
)


def test_point_distribution():
    d = point_distribution(3.4)
    assert d.etas == (3.4,) and d.weights == (1.0,)


def test_standing_wave_distribution_moments():
    d = standing_wave_distribution(4.0, nodes=64)
    w = np.asarray(d.weights)
    e = np.asarray(d.etas)
    assert np.isclose(w.sum(), 1.0, atol=1e-14)
    assert np.all(e >= 0) and np.all(e <= 4.0)
    # mean of cos^2 over a quarter period is 1/2
    assert np.isclose((w * e).sum(), 2.0, rtol=1e-10)
    # mean of cos^4 is 3/8
    assert np.isclose((w * e**2).sum(), 16.0 * 3.0 / 8.0, rtol=1e-10)


def test_distribution_validation():
    from vitlab.spatial import CouplingDistribution

    with pytest.raises(ValueError):
        CouplingDistribution(etas=(1.0, 2.0), weights=(0.6,))
    with pytest.raises(ValueError):
        CouplingDistribution(etas=(1.0,), weights=(0.5,))


def test_averaging_lowers_transparency(cfg):
    # nodes of the standing wave absorb like bare atoms, so the averaged
    # dip at two-photon resonance is deeper than the antinode-only one
    det = Detunings(0.0, 0.0)
    ideal = corrected_transmission(cfg, 5.0, det, IDEAL)
    avg = corrected_transmission(cfg, 5.0, det, Corrections(averaging_nodes=64))
    assert avg < ideal
    assert avg > transmission(cfg, 0.0, det)


def test_side_channel_conserves_optical_depth(cfg):
    # far off resonance both channels absorb in their 1/delta^2 tails;
    # splitting od must not change the total wing absorbance
    far = Detunings(2000.0 * cfg.gamma, 0.0)
    t_plain = corrected_transmission(cfg, 5.0, far, IDEAL)
    t_side = corrected_transmission(
        cfg, 5.0, far, Corrections(side=SideChannel())
    )
    assert np.isclose(np.log(t_plain), np.log(t_side), rtol=1e-6)


def test_side_channel_shifts_weight(cfg):
    side = SideChannel()
    det = Detunings(0.0, 0.0)
    chi_plain = composite_susceptibility(cfg, 5.0, det, None)
    chi_split = composite_susceptibility(cfg, 5.0, det, side)
    # the shifted channel leaks absorption into the window
    assert chi_split.value.imag > chi_plain.value.imag


def test_jitter_quadrature_is_normal():
    off, w = jitter_quadrature(sigma=1.0, nodes=16)
    assert np.isclose(np.sum(w), 1.0, atol=1e-12)
    assert np.isclose(np.sum(w * off), 0.0, atol=1e-12)
    assert np.isclose(np.sum(w * off**2), 1.0, rtol=1e-12)
    assert np.isclose(np.sum(w * off**4), 3.0, rtol=1e-10)


def test_jitter_zero_width_identity(cfg):
    det = Detunings(np.linspace(-2, 2, 21) * MHZ, 0.0)
    t0 = corrected_transmission(cfg, 5.0, det, IDEAL)
    t1 = corrected_transmission(cfg, 5.0, det, Corrections(jitter_fwhm=0.0))
    assert np.allclose(t0, t1, rtol=1e-14)


def test_jitter_broadened_convergence_guard():
    # feature much narrower than the node spacing defeats the quadrature
    def narrow(dp, dc):
        return 1.0 / (1.0 + (np.asarray(dc) / 1e-3) ** 2)

    wrapped = jitter_broadened(narrow, sigma=1.0, nodes=16, check_tol=1e-6)
    with pytest.raises(ConvergenceError):
        wrapped(0.0, 0.0)
    # smooth function sails through the same check
    smooth = jitter_broadened(lambda dp, dc: np.cos(dc), sigma=0.1,
                              nodes=16, check_tol=1e-6)
    assert smooth(0.0, 0.0) > 0.9
    # zero width short-circuits to the original function
    assert jitter_broadened(narrow, sigma=0.0) is narrow


def test_jitter_softens_the_window(cfg):
    det = Detunings(0.0, 0.0)
    sharp = corrected_transmission(cfg, 5.0, det, IDEAL)
    fuzzy = corrected_transmission(
        cfg, 5.0, det, Corrections(jitter_fwhm=0.2 * MHZ)
    )
    assert fuzzy < sharp


def test_effective_cooperativity_ladder():
    assert effective_cooperativity(3.4, 0) == pytest.approx(3.4)
    assert effective_cooperativity(3.4, 10) == pytest.approx(37.4)
    with pytest.raises(ValueError):
        effective_cooperativity(3.4, -1)


def test_corrections_factory_roundtrip():
    c = Corrections(averaging_nodes=32, side=SideChannel(), jitter_fwhm=0.2 * MHZ)
    d = c.distribution(5.0)
    assert len(d.etas) == 32
    off, w = c.jitter()
    assert len(off) == c.jitter_nodes
    assert np.isclose(np.std([0.0]) + np.sqrt(np.sum(w * off**2)),
                      0.2 * MHZ * SIGMA_PER_FWHM, rtol=1e-10)
    # IDEAL collapses to a single member
    assert IDEAL.distribution(5.0).etas == (5.0,)
    assert IDEAL.jitter() == ((0.0,), (1.0,))


def test_corrected_spectrum_channels(cfg):
    det = Detunings(np.linspace(-4, 4, 81) * MHZ, 0.0)
    trans, emis = corrected_spectrum(cfg, 5.0, det,
                                     Corrections(averaging_nodes=16))
    assert trans.shape == emis.shape == (81,)
    assert np.all((trans > 0) & (trans <= 1))
    assert np.all((emis >= 0) & (emis <= 1))
    # transparency is a local peak at two-photon resonance (the far wings
    # transmit more, so only compare against the line shoulders)
    assert trans[40] > trans[32] and trans[40] > trans[48]
    assert abs(int(np.argmax(emis)) - 40) <= 1


def test_corrected_transmission_matches_spectrum(cfg):
    det = Detunings(np.linspace(-1, 1, 11) * MHZ, 0.3 * MHZ)
    corr = Corrections(averaging_nodes=8, side=SideChannel(), jitter_fwhm=0.2 * MHZ)
    t, _ = corrected_spectrum(cfg, 5.0, det, corr)
    assert np.allclose(corrected_transmission(cfg, 5.0, det, corr), t, rtol=1e-14)


def test_measured_regime_transparency_endpoints(cfg):
    # full correction stack at the fitted antinode cooperativity
    corr = Corrections(averaging_nodes=64, side=SideChannel(),
                       jitter_fwhm=0.2 * MHZ)
    det = Detunings(0.0, 0.0)
    t_bare = np.exp(-cfg.od)
    for n_c, want in ((0, 0.4356), (10, 0.8123)):
        tp = corrected_transmission(cfg, effective_cooperativity(5.0, n_c), det, corr)
        theta = (tp - t_bare) / (1.0 - t_bare)
        assert abs(theta - want) < 5e-4
