"""Run configuration: the one place units are converted.

Configs are flat JSON documents in laboratory units (frequencies in
ordinary MHz, lengths in um, times in us).  Everything downstream of
this module works in angular rad/s and meters.  A config file may list
any subset of the known keys; missing keys take the packaged defaults
(vitlab/defaults.json).  Unknown keys are rejected outright rather
than silently ignored.

Resolution order for the default document: explicit path argument,
then the VIT_LAB_CONFIG environment variable, then the packaged file.
"""

import json
import os
from importlib import resources

from vitlab.core import CavityGeometry, PhysicalConfig, TWO_PI
from vitlab.spatial import Corrections, SideChannel

MHZ = TWO_PI * 1e6    # MHz (ordinary frequency) -> rad/s
UM = 1e-6
US = 1e-6
NS = 1e-9

ENV_VAR = "VIT_LAB_CONFIG"

_POSITIVE = ("gamma_MHz", "kappa_MHz", "wavelength_um", "finesse", "waist_um",
             "length_um")
_NONNEGATIVE = ("od", "side_weight", "side_shift_MHz", "jitter_fwhm_MHz")
_UNIT_INTERVAL = ("f_ef", "f_eg", "side_weight")
KNOWN_KEYS = set(_POSITIVE) | set(_NONNEGATIVE) | set(_UNIT_INTERVAL)


def packaged_defaults():
    """The in-repo default constants, as a fresh dict."""
    text = resources.files("vitlab").joinpath("defaults.json").read_text()
    return json.loads(text)


def validate_config(doc):
    """Schema-check a config dict; raises ValueError with a usable message."""
    if not isinstance(doc, dict):
        raise ValueError("config must be a JSON object")
    for key, value in doc.items():
        if key not in KNOWN_KEYS:
            raise ValueError(f"unknown config key '{key}'")
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"config key '{key}' must be a number")
    merged = packaged_defaults()
    merged.update(doc)
    for key in _POSITIVE:
        if merged[key] <= 0:
            raise ValueError(f"config key '{key}' must be positive")
    for key in _NONNEGATIVE:
        if merged[key] < 0:
            raise ValueError(f"config key '{key}' must be nonnegative")
    for key in _UNIT_INTERVAL:
        if not 0 <= merged[key] <= 1:
            raise ValueError(f"config key '{key}' must lie in [0, 1]")
    return merged


def load_config(path=None):
    """Load and validate a config document (see module docstring for order)."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return validate_config({})
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"config file {path} is not valid JSON: {err}") from err
    return validate_config(doc)


def physical_config(conf):
    """PhysicalConfig (rad/s, m) from a validated config dict."""
    return PhysicalConfig(
        gamma=conf["gamma_MHz"] * MHZ,
        kappa=conf["kappa_MHz"] * MHZ,
        wavelength=conf["wavelength_um"] * UM,
        od=conf["od"],
        length=conf["length_um"] * UM,
        f_probe=conf["f_ef"],
        f_cavity=conf["f_eg"],
    )


def cavity_geometry(conf):
    return CavityGeometry(
        finesse=conf["finesse"],
        waist=conf["waist_um"] * UM,
        wavelength=conf["wavelength_um"] * UM,
    )


def side_channel(conf):
    return SideChannel(
        weight=conf["side_weight"], zeeman_shift=conf["side_shift_MHz"] * MHZ
    )


def corrections(conf, average=False, side=False, jitter=False,
                averaging_nodes=64, jitter_nodes=16):
    """Build a Corrections stack from boolean switches plus config knobs."""
    return Corrections(
        averaging_nodes=averaging_nodes if average else 0,
        side=side_channel(conf) if side else None,
        jitter_fwhm=conf["jitter_fwhm_MHz"] * MHZ if jitter else 0.0,
        jitter_nodes=jitter_nodes,
    )
