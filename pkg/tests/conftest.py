import numpy as np
import pytest

from vitlab.config import cavity_geometry, load_config, physical_config

# stiff-atom knob: same resonator, atomic line 100x wider, so the small
# kappa/gamma dispersion correction to the delay formula is negligible
STIFF_GAMMA = 2.0 * np.pi * 520e6


@pytest.fixture(scope="session")
def conf():
    return load_config()


@pytest.fixture(scope="session")
def cfg(conf):
    return physical_config(conf)


@pytest.fixture(scope="session")
def geom(conf):
    return cavity_geometry(conf)
