"""
Rate coefficients and the low-temperature coherence series
==========================================================

A heavy molecule in a cold helium buffer gas, prepared in a superposition of
two internal states.  Each state scatters helium through its own s-wave
amplitude (scattering length, effective-range term, complex b and c).  The
difference between the two amplitudes is what destroys the coherence.
"""

import numpy as np

from coldcoherence import BathSpec, Channel, ChannelPair, coherence_series, cross_sections, rate_coefficients
from coldcoherence.constants import atomic_mass, nm

# %% Bath and channels, in SI
m_he = 4.002602 * atomic_mass
bath = BathSpec(m=m_he, M=30 * atomic_mass, n_gas=1e20, T=1e-3)
print(f"mass ratio r = m/M = {bath.r:.4f}")

nu = Channel.from_parts("nu", 0.0, 1.0 * nm, 0.3 * nm, (0.4 + 0.6j) * nm**2, (-0.3 + 0.2j) * nm**3)
nup = Channel.from_parts("nu'", 6.6e-28, 0.5 * nm, 0.2 * nm, (-0.2 + 0.3j) * nm**2, (0.1 + 0.1j) * nm**3)
pair = ChannelPair.pure(nu, nup)

# %% Cross sections at a thermal relative momentum
p = np.sqrt(2 * bath.m_star * 1.380649e-23 * bath.T)
for ch in (nu, nup):
    cs = cross_sections(ch, p)
    print(f"{ch.label:>4}: sigma_el = {cs.elastic:.3e} m^2, sigma_in = {cs.inelastic:.3e} m^2")

# %% Coefficients of the T^(1/2) expansion
c = rate_coefficients(bath, pair)
for name, value, unit in c.as_rows():
    print(f"{name:>8} = {value: .4e} {unit}")

# %% |rho| and eta up to order T, out to five zeroth-order decay times
t = np.linspace(0.0, 5.0 / c.zeta0, 6)
for order in (0, 1, 2):
    tr = coherence_series(c, pair, bath.T, t, order=order)
    print(f"order {order}: |rho| =", np.array2string(tr.abs_rho, precision=4))
    print(f"         eta  =", np.array2string(tr.eta, precision=6))
