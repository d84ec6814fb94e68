"""
Where the truncated series can be trusted
=========================================

Boundary curves in the (t, sqrt T) plane, below which the next term of the
expansion stays under a fraction `margin` of the kept terms.  The first set
is for |rho|, the second for the purity.
"""

import numpy as np

from coldcoherence import BathSpec, Channel, ChannelPair, fig1_curves, fig2_curves, rate_coefficients
from coldcoherence.constants import atomic_mass, nm

m_he = 4.002602 * atomic_mass
bath = BathSpec(m=m_he, M=30 * atomic_mass, n_gas=1e20, T=1e-3)
nu = Channel.from_parts("nu", 0.0, 1.0 * nm, 0.3 * nm, (0.4 + 0.6j) * nm**2, (-0.3 + 0.2j) * nm**3)
nup = Channel.from_parts("nu'", 0.0, 0.5 * nm, 0.2 * nm, (-0.2 + 0.3j) * nm**2, (0.1 + 0.1j) * nm**3)
c = rate_coefficients(bath, ChannelPair.pure(nu, nup))

f1 = fig1_curves(c, margin=0.1)
print(f"|rho| curves: pole of the solid curve at t = {f1.poles[0]:.3e} s")
for name in ("solid", "dashed", "dotted"):
    curve = getattr(f1, name)
    idx = np.linspace(1, len(curve) - 1, 4).astype(int)
    print(f"  {name:>6}:", ", ".join(f"({t:.2e}, {s:.3e})" for t, s in curve[idx]))

f2 = fig2_curves(c, margin=0.1)
print(f"purity curves: flags {f2.flags}")
for name in ("solid", "dashed", "dotted"):
    curve = getattr(f2, name)
    if len(curve):
        idx = np.linspace(1, len(curve) - 1, 4).astype(int)
        print(f"  {name:>6}:", ", ".join(f"({t:.2e}, {s:.3e})" for t, s in curve[idx]))
