import math

import numpy as np
import pytest

from polyrabi import ModeConfig, build_hamiltonian, evolve


@pytest.fixture(scope="session")
def fig1_cfg():
    return ModeConfig(j=1, m=(0, 2), omega=(0.5, 0.5), delta0=1.0)


@pytest.fixture(scope="session")
def taus_4pi():
    return np.linspace(0.0, 4.0 * math.pi, 1000)


@pytest.fixture(scope="session")
def fig1_oracle(fig1_cfg, taus_4pi):
    h, basis = build_hamiltonian(fig1_cfg, 200)
    return evolve(h, basis, taus_4pi, channels=[1, 3, -1])


def dominant_peak(tau, values):
    """Angular frequency of the largest nonzero-frequency Fourier line."""
    spec = np.abs(np.fft.rfft(values - np.mean(values)))
    k = int(np.argmax(spec[1:])) + 1
    width = 2.0 * math.pi / (tau[-1] - tau[0])
    return k * width, width
