import numpy as np
import pytest
from dataclasses import replace

from conftest import STIFF_GAMMA
from vitlab.core import (
    CavityGeometry,
    Detunings,
    PhysicalConfig,
    cooperativity_from_coupling,
    cooperativity_geometric,
    coupling_from_cooperativity,
    fock_delay_ladder,
    group_delay_analytic,
    group_delay_numeric,
    group_velocity,
    resonant_transmission,
    susceptibility,
    transfer_amplitude,
    transmission,
    transparency,
    transparency_window_width,
)
from vitlab.errors import ConvergenceError


def test_config_validation():
    with pytest.raises(ValueError):
        PhysicalConfig(gamma=-1.0, kappa=1.0, wavelength=852e-9, od=0.4, length=20e-6)
    with pytest.raises(ValueError):
        PhysicalConfig(gamma=1.0, kappa=1.0, wavelength=852e-9, od=-0.1, length=20e-6)
    with pytest.raises(ValueError):
        CavityGeometry(finesse=0.0, waist=35e-6, wavelength=852e-9)


def test_wavenumber(cfg):
    assert np.isclose(cfg.wavenumber, 2.0 * np.pi / cfg.wavelength, rtol=1e-12)
    assert np.isclose(cfg.kl, cfg.wavenumber * cfg.length, rtol=1e-12)


def test_geometric_cooperativity_value(geom):
    # 24 F / (pi k^2 w^2) at the default cavity
    k = 2.0 * np.pi / geom.wavelength
    expected = 24.0 * geom.finesse / (np.pi * k**2 * geom.waist**2)
    assert np.isclose(cooperativity_geometric(geom), expected, rtol=1e-12)
    assert abs(cooperativity_geometric(geom) - 7.2241) < 1e-3


def test_cooperativity_coupling_round_trip(cfg):
    for eta in (0.1, 1.0, 3.4, 7.2):
        g = coupling_from_cooperativity(eta, cfg.kappa, cfg.gamma)
        assert np.isclose(
            cooperativity_from_coupling(g, cfg.kappa, cfg.gamma), eta, rtol=1e-14
        )


def test_susceptibility_rejects_negative_eta(cfg):
    with pytest.raises(ValueError):
        susceptibility(cfg, -0.5, Detunings(0.0, 0.0))


def test_resonant_transmission_identity(cfg):
    rng = np.random.default_rng(11)
    for _ in range(200):
        od = rng.uniform(0.0, 3.0)
        eta = rng.uniform(0.0, 20.0)
        c = replace(cfg, od=od)
        got = transmission(c, eta, Detunings(0.0, 0.0))
        assert np.isclose(got, np.exp(-od / (eta + 1.0)), rtol=1e-13, atol=0)
        assert np.isclose(resonant_transmission(od, eta), got, rtol=1e-13, atol=0)


def test_two_level_limit(cfg):
    delta = np.linspace(-10, 10, 401) * cfg.gamma
    chi = susceptibility(cfg, 0.0, Detunings(delta, 0.0)).value
    dt = 2.0 * delta / cfg.gamma
    ref = -(cfg.od / cfg.kl) * (dt - 1j) / (1.0 + dt**2)
    assert np.max(np.abs(chi - ref) / np.abs(ref)) < 1e-13


def test_transfer_amplitude_is_exponential(cfg):
    det = Detunings(0.3 * cfg.gamma, -0.1 * cfg.gamma)
    chi = susceptibility(cfg, 2.0, det)
    t = transfer_amplitude(chi, cfg)
    assert np.isclose(t, np.exp(0.5j * cfg.kl * chi.value), rtol=1e-14)


def test_detuning_normalization(cfg):
    det = Detunings(0.7 * cfg.gamma, 0.2 * cfg.gamma)
    dt, dc = det.normalized(cfg)
    assert np.isclose(dt, 1.4, rtol=1e-12)
    assert np.isclose(dc, 2.0 * (0.7 - 0.2) * cfg.gamma / cfg.kappa, rtol=1e-12)


def test_group_delay_matches_exact_slope(cfg):
    # linear-response slope carries a small anomalous-dispersion term from
    # the bare line: (OD/kappa) (eta - kappa/gamma) / (eta+1)^2
    for eta in (0.5, 1.0, 3.4, 5.0):
        for od in (0.1, 0.5):
            c = replace(cfg, od=od)
            num = group_delay_numeric(c, eta)
            exact = (od / c.kappa) * (eta - c.kappa / c.gamma) / (eta + 1.0) ** 2
            assert abs(num - exact) / exact < 1e-9


def test_group_delay_stiff_atom_matches_analytic(cfg):
    stiff = replace(cfg, gamma=STIFF_GAMMA)
    for eta in (0.5, 1.0, 3.4, 5.0):
        num = group_delay_numeric(stiff, eta)
        ana = group_delay_analytic(stiff.od, stiff.kappa, eta)
        assert abs(num - ana) / ana < 5e-3


def test_group_delay_nonconvergence_flagged(cfg):
    # absurd step: the two stencil widths disagree wildly
    with pytest.raises(ConvergenceError):
        group_delay_numeric(cfg, 3.4, step=50.0 * cfg.gamma, tol=1e-12)


def test_delay_maximum_location(cfg):
    # d tau / d eta = 0 at eta = 1 + 2 kappa/gamma for the exact slope
    etas = np.arange(0.90, 1.10, 0.002)
    delays = [group_delay_numeric(cfg, e) for e in etas]
    peak = etas[int(np.argmax(delays))]
    assert abs(peak - (1.0 + 2.0 * cfg.kappa / cfg.gamma)) < 0.005


def test_group_velocity():
    assert group_velocity(25e-9, 40e-6) == pytest.approx(1600.0, rel=1e-12)
    with pytest.raises(ValueError):
        group_velocity(0.0, 40e-6)


def test_transparency_window_width(cfg):
    assert np.isclose(
        transparency_window_width(3.4, cfg.kappa), 4.4 * cfg.kappa, rtol=1e-12
    )


def test_transparency_definition():
    t = np.exp(-0.4)
    assert transparency(t, t) == pytest.approx(0.0, abs=1e-15)
    assert transparency(1.0, t) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        transparency(0.5, 1.0)


def test_fock_delay_ladder(cfg):
    # photon number n sees cooperativity eta_vac (n+1)
    taus = fock_delay_ladder(cfg, 0.4, 5)
    assert len(taus) == 6
    for n, tau in enumerate(taus):
        ref = group_delay_analytic(cfg.od, cfg.kappa, 0.4 * (n + 1))
        assert np.isclose(tau, ref, rtol=1e-12)
    # vacuum eta below 1: adding the first photon pushes the delay up
    assert taus[1] > taus[0]
