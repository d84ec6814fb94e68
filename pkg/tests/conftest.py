import math

import numpy as np
import pytest
from hypothesis import strategies as st

from coldcoherence.constants import atomic_mass, nm
from coldcoherence.scattering import BathSpec, Channel, ChannelPair

M_HE4 = 6.646479071583153e-27


def chan(alpha, beta, b=0j, c=0j, energy=0.0, label="ch", unit=nm):
    """Channel from lengths in units of ``unit`` (b in unit^2, c in unit^3)."""
    return Channel.from_parts(label, energy, alpha * unit, beta * unit, complex(b) * unit**2, complex(c) * unit**3)


def scenario_pair():
    """Generic pair used by several oracle checks."""
    nu = chan(1.0, 0.3, 0.4 + 0.6j, -0.3 + 0.2j, label="nu")
    nup = chan(0.5, 0.2, -0.2 + 0.3j, 0.1 + 0.1j, energy=1e-30, label="nup")
    return ChannelPair.pure(nu, nup)


def bath_with_r(r, n_gas=1e20, T=1e-4):
    return BathSpec(M_HE4, M_HE4 / r, n_gas, T)


@pytest.fixture
def he_bath():
    return BathSpec(M_HE4, 100 * atomic_mass, 1e19, 1e-4)


@pytest.fixture
def pair():
    return scenario_pair()


def random_pair(rng, scale=1.0):
    """Random valid pair: beta >= 0, complex b and c of order one in nm units."""
    def one(label):
        a = rng.normal(0, 2 * scale)
        b = rng.uniform(0, 2 * scale)
        bb = complex(rng.normal(0, scale), rng.normal(0, scale))
        cc = complex(rng.normal(0, scale), rng.normal(0, scale))
        return chan(a, b, bb, cc, energy=rng.normal(0, 1e-30), label=label)
    return ChannelPair.pure(one("nu"), one("nup"), p_nu=rng.uniform(0.05, 0.95))


finite = st.floats(-5, 5, allow_nan=False)
nonneg = st.floats(0, 5, allow_nan=False)


@st.composite
def channels(draw):
    return chan(draw(finite), draw(nonneg), complex(draw(finite), draw(finite)),
                complex(draw(finite), draw(finite)), energy=draw(st.floats(-1e-29, 1e-29)))


@st.composite
def pairs(draw):
    return ChannelPair.pure(draw(channels()), draw(channels()), p_nu=draw(st.floats(0.05, 0.95)))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
