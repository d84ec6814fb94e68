"""Direct numerical integration of the isotropic s-wave master equation.

The momentum-diagonal pseudodistribution gamma(Q, tau) of one internal
element obeys d gamma / d tau = G[gamma] with (scaled variables, theta the
dimensionless temperature, r = m/M, f/l = -A + B theta^{1/2} q + C theta q^2)

    G[h](Q) = kappa_eps h(Q) + (1+r)^4 { Lambda(Q) h(Q)
              + theta^{1/2} sum_k phi_k theta^{k/2} Gamma_k[h](Q) }.

Lambda is the forward-scattering (loss and refraction) term,
Lambda(Q) = 2 pi i sum_k coefL_k theta^{k/2} M_k(Q) with the Gaussian
moments M_k(Q) = int d^3q q^k e^{-[rQ + (1+r)q]^2} / pi^{3/2}, and Gamma_k is
the gain term

    Gamma_k[h](Q) = int d^3q d^2n q^{k+1} h(Q - q + q n) e^{-(rQ + r q n + q)^2} / pi^{3/2}.

For an isotropic h the energy-shell delta function is integrated
analytically.  With Q' the post-collision momentum, D = |Q' - Q| and s the
in-plane momentum perpendicular to Q' - Q,

    Gamma_k[h](Q) = int dQ' h(Q') (2 pi Q'/Q) int_{|Q-Q'|}^{Q+Q'} dD
                    e^{-W_par^2} J_k(D, W_perp) / pi^{3/2},

    J_k = 2 pi int rho d rho (D^2/4 + rho^2)^{k/2}
          e^{-alpha (rho - c)^2} I0e(2 alpha rho c),   alpha = (1+r)^2,

with W_par = (D^2 + r(Q^2 - Q'^2)) / (2D), c = W_perp / (1+r) and
|W|^2 = [(1+r)^2 Q^2 + (r-1)^2 Q'^2 + 2 (r^2 - 1) Q.Q'] / 4.  J_k is in
closed form for even k and by Gauss-Legendre quadrature for odd k.  The
kernel has a kink at Q' = Q; the Q' integral is split there and applied to
the global Legendre interpolant of h on the radial grid.
"""

from dataclasses import dataclass, field
import functools
import math

import numpy as np
from scipy import special

from .appendix import mass_factor
from .constants import hbar
from .errors import ContractError, DomainError, NumericalError
from .kinetics import ELEMENTS

__all__ = [
    "RadialGrid",
    "GammaField",
    "loss_moments",
    "gain_kernels",
    "MasterEquationOracle",
    "init_gamma",
    "apply_G",
    "evolve",
    "reduce_rho",
    "OracleTrajectory",
]

PARTS = ("full", "G0", "G1", "G2")


def _matvec(M, v):
    # fixed-order loop, never dispatched to threaded BLAS
    return np.einsum("ij,j->i", M, v)


def _matmul(A, B):
    return np.einsum("ij,jk->ik", A, B)


class RadialGrid:
    """Gauss-Legendre nodes on [0, q_max] with Legendre interpolation."""

    def __init__(self, n=128, q_max=10.0):
        if n < 4 or not q_max > 0:
            raise DomainError("radial grid needs n >= 4 and q_max > 0")
        self.n = int(n)
        self.q_max = float(q_max)
        t, w = np.polynomial.legendre.leggauss(self.n)
        self._t, self._w = t, w
        self.nodes = 0.5 * self.q_max * (t + 1.0)
        self.weights = 0.5 * self.q_max * w
        self.volume_weights = 4.0 * math.pi * self.nodes**2 * self.weights
        V = np.polynomial.legendre.legvander(t, self.n - 1)
        norm = (2.0 * np.arange(self.n) + 1.0) / 2.0
        self._to_coeffs = norm[:, None] * V.T * w[None, :]

    def interp_matrix(self, x):
        """Matrix mapping node values to values of the interpolant at x (0 <= x <= q_max)."""
        t = 2.0 * np.asarray(x, dtype=float) / self.q_max - 1.0
        return _matmul(np.polynomial.legendre.legvander(t, self.n - 1), self._to_coeffs)

    def key(self):
        return (self.n, self.q_max)


def loss_moments(Q, r):
    """M_0, M_1, M_2 of the Gaussian e^{-[rQ + (1+r)q]^2}/pi^{3/2} at radial momenta Q."""
    Q = np.asarray(Q, dtype=float)
    s = 1.0 + r
    M0 = np.full_like(Q, s**-3)
    M2 = s**-5 * (1.5 + (r * Q) ** 2)
    # mean |X| for X ~ N(mu, sig^2 I_3), |mu| = lam
    lam = r * Q / s
    sig = 1.0 / (math.sqrt(2.0) * s)
    x = lam / (sig * math.sqrt(2.0))
    safe = np.where(x > 1e-6, x, 1.0)
    erf_over_x = np.where(x > 1e-6, special.erf(safe) / safe, 2.0 / math.sqrt(math.pi) * (1.0 - x * x / 3.0))
    mean_abs = (sig * math.sqrt(2.0 / math.pi) * np.exp(-x * x)
                + lam * special.erf(x) + sig / math.sqrt(2.0) * erf_over_x)
    M1 = s**-3 * mean_abs
    return M0, M1, M2


def _J_even(k, D2q, c2, alpha):
    base = math.pi / alpha
    if k == 0:
        return np.broadcast_to(base, np.broadcast(D2q, c2).shape)
    if k == 2:
        return base * (D2q + c2 + 1.0 / alpha)
    return base * (D2q**2 + 2.0 * D2q * (c2 + 1.0 / alpha) + c2**2 + 4.0 * c2 / alpha + 2.0 / alpha**2)


def _J_odd(D2q, c, alpha, n_rho):
    """J_1 and J_3 by Gauss-Legendre in rho over the support of the Gaussian factor."""
    x, w = np.polynomial.legendre.leggauss(n_rho)
    half = 8.0 / math.sqrt(alpha)
    lo = np.maximum(c - half, 0.0)
    hi = c + half
    mid, rad = 0.5 * (hi + lo), 0.5 * (hi - lo)
    rho = mid[..., None] + rad[..., None] * x
    weight = (2.0 * math.pi * rad[..., None] * w) * rho * np.exp(-alpha * (rho - c[..., None]) ** 2) \
        * special.i0e(2.0 * alpha * rho * c[..., None])
    q2 = D2q[..., None] + rho * rho
    q1 = np.sqrt(q2)
    return np.sum(weight * q1, axis=-1), np.sum(weight * q1 * q2, axis=-1)


def _D_nodes(Dlo, Dhi, s, xd, wd):
    """Gauss-Legendre nodes on [Dlo, Dhi], split at the peak D = sqrt|s| of e^{-W_par^2}."""
    peak = np.clip(np.sqrt(np.abs(s)), Dlo, Dhi)
    nodes, weights = [], []
    for a, b in ((Dlo, peak), (peak, Dhi)):
        half = 0.5 * (b - a)[..., None]
        nodes.append(half * (xd + 1.0) + a[..., None])
        weights.append(half * wd)
    return np.concatenate(nodes, axis=-1), np.concatenate(weights, axis=-1)


def _kernel_block(Q, Qp, Wp, r, alpha, xd, wd, n_rho, cutoff):
    s = r * (Q**2 - Qp**2)
    root = np.sqrt(np.maximum(cutoff**2 - s, 0.0))
    Dlo = np.maximum(np.abs(Q - Qp), np.abs(cutoff - root))
    Dhi = np.minimum(Q + Qp, cutoff + root)
    live = (s < cutoff**2) & (Dhi > Dlo)
    Dlo = np.where(live, Dlo, 0.0)
    Dhi = np.where(live, Dhi, 1.0)
    D, wD = _D_nodes(Dlo, Dhi, s, xd, wd)
    Qe, Qpe, se = Q[..., None], Qp[..., None], s[..., None]
    Wpar = (D * D + se) / (2.0 * D)
    dot = (Qe**2 + Qpe**2 - D * D) / 2.0
    W2 = ((1.0 + r) ** 2 * Qe**2 + (r - 1.0) ** 2 * Qpe**2 + 2.0 * (r * r - 1.0) * dot) / 4.0
    c2 = np.maximum(W2 - Wpar**2, 0.0) / alpha
    D2q = D * D / 4.0
    gauss = np.exp(-Wpar**2) * wD
    pref = np.where(live, 2.0 * math.pi * Qp / Q * Wp, 0.0) / math.pi**1.5
    J1, J3 = _J_odd(D2q, np.sqrt(c2), alpha, n_rho)
    Js = (_J_even(0, D2q, c2, alpha), J1, _J_even(2, D2q, c2, alpha), J3, _J_even(4, D2q, c2, alpha))
    return np.stack([pref * np.sum(gauss * J, axis=-1) for J in Js])


def _kernel_rows(grid, r, n_fine, n_D, n_rho, band, cutoff, chunk=4):
    """Fine-grid kernels for all k: K[k, i, f] and the fine nodes Qp[i, f]."""
    N = grid.n
    alpha = (1.0 + r) ** 2
    xf, wf = np.polynomial.legendre.leggauss(n_fine)
    xd, wd = np.polynomial.legendre.leggauss(n_D)
    Qs = grid.nodes
    Qp = np.empty((N, 2 * n_fine))
    Wp = np.empty((N, 2 * n_fine))
    for i, Q in enumerate(Qs):
        lo, hi = max(0.0, Q - band), min(grid.q_max, Q + band)
        for side, (a, b) in enumerate(((lo, Q), (Q, hi))):
            sl = slice(side * n_fine, (side + 1) * n_fine)
            Qp[i, sl] = 0.5 * (b - a) * (xf + 1.0) + a
            Wp[i, sl] = 0.5 * (b - a) * wf
    K = np.empty((5, N, 2 * n_fine))
    for start in range(0, N, chunk):
        rows = slice(start, min(N, start + chunk))
        K[:, rows] = _kernel_block(Qs[rows, None], Qp[rows], Wp[rows], r, alpha, xd, wd, n_rho, cutoff)
    return K, Qp


@functools.lru_cache(maxsize=16)
def _gain_kernels_cached(n, q_max, r, n_fine, n_D, n_rho, band, cutoff):
    grid = RadialGrid(n, q_max)
    K, Qp = _kernel_rows(grid, r, n_fine, n_D, n_rho, band, cutoff)
    out = np.empty((5, grid.n, grid.n))
    for i in range(grid.n):
        P = grid.interp_matrix(Qp[i])
        out[:, i, :] = np.einsum("kf,fj->kj", K[:, i, :], P)
    out.setflags(write=False)
    return out


def gain_kernels(grid, r, n_fine=64, n_D=48, n_rho=32, band=14.0, cutoff=8.0):
    """Dense (5, N, N) array of the gain operators Gamma_0..Gamma_4 on ``grid``."""
    return _gain_kernels_cached(grid.n, grid.q_max, float(r), n_fine, n_D, n_rho, band, cutoff)


@dataclass(frozen=True)
class GammaField:
    """Immutable snapshot of gamma(Q_i, tau) for one internal element."""

    grid: RadialGrid
    values: np.ndarray
    pair_tag: str
    theta: float
    r: float
    tau: float = 0.0
    oracle: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1 or v.shape[0] != self.grid.n:
            raise ContractError(
                f"gamma field must be an isotropic radial profile of length {self.grid.n}, got shape {v.shape}"
            )
        v = np.array(v, dtype=complex)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values, tau=None):
        return GammaField(self.grid, values, self.pair_tag, self.theta, self.r,
                          self.tau if tau is None else tau, self.oracle)


def reduce_rho(field):
    """rho_el = int d^3Q gamma by the grid rule, summed with math.fsum."""
    terms = field.grid.volume_weights * field.values
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True)
class OracleTrajectory:
    tau: np.ndarray
    t: np.ndarray
    rho: dict  # element -> complex array
    abs_rho: np.ndarray
    eta: np.ndarray


class MasterEquationOracle:
    """Radial-grid integrator for one channel pair at one temperature.

    Either ``T`` (with the reference ``length`` fixing theta) or ``theta``
    directly may be given; with neither, the bath temperature is used.
    """

    def __init__(self, bath, pair, T=None, theta=None, length=1e-9, n_nodes=128, q_max=None,
                 tol=1e-10, kernel_options=None):
        self.bath, self.pair, self.length = bath, pair, float(length)
        self.r = bath.r
        if theta is None:
            theta = bath.theta(self.length, bath.T if T is None else T)
        theta = float(theta)
        if not (theta >= 0 and math.isfinite(theta)):
            raise DomainError(f"theta must be finite and >= 0, got {theta!r}")
        self.theta = theta
        self.tol = float(tol)
        q_max = 6.0 / math.sqrt(self.r) if q_max is None else float(q_max)
        self.grid = RadialGrid(n_nodes, q_max)
        self._kopts = dict(kernel_options or {})
        self._gamma = None
        self._ops = {}
        self._M = loss_moments(self.grid.nodes, self.r)

    @property
    def tau_per_second(self):
        return self.bath.tau_per_second(self.length)

    @property
    def kernels(self):
        if self._gamma is None:
            self._gamma = gain_kernels(self.grid, self.r, **self._kopts)
        return self._gamma

    def _scaled(self, which):
        x, y = self.pair.channels(which)
        L = self.length
        return (x.a / L, x.b_red / L**2, x.c_red / L**3), (y.a / L, y.b_red / L**2, y.c_red / L**3)

    def kappa_eps(self, which="nu_nup"):
        x, y = self.pair.channels(which)
        return 1j * (y.energy - x.energy) * self.bath.m / (hbar**2 * self.bath.n_gas * self.length)

    def kappa0(self, which="nu_nup"):
        (A, _, _), (Ap, _, _) = self._scaled(which)
        return self.kappa_eps(which) - 2j * math.pi * (A - Ap.conjugate()) * (1.0 + self.r)

    def _pieces(self, which):
        (A, B, C), (Ap, Bp, Cp) = self._scaled(which)
        coefL = (-(A - Ap.conjugate()), B - Bp.conjugate(), C - Cp.conjugate())
        phi = (A * Ap.conjugate(),
               -(A * Bp.conjugate() + B * Ap.conjugate()),
               B * Bp.conjugate() - (A * Cp.conjugate() + C * Ap.conjugate()),
               B * Cp.conjugate() + C * Bp.conjugate(),
               C * Cp.conjugate())
        return coefL, phi

    def order_operator(self, which, n):
        """Coefficient operator of theta^{n/2} without kappa_eps (dense N x N)."""
        coefL, phi = self._pieces(which)
        s4 = (1.0 + self.r) ** 4
        M = np.zeros((self.grid.n, self.grid.n), dtype=complex)
        if n <= 2:
            M[np.diag_indices_from(M)] += 2j * math.pi * coefL[n] * self._M[n]
        if 1 <= n <= 5:
            M = M + phi[n - 1] * self.kernels[n - 1]
        return s4 * M

    def operator(self, which="nu_nup", part="full"):
        """Dense matrix of the selected operator, level splitting excluded for ``full``."""
        key = (which, part)
        if key in self._ops:
            return self._ops[key]
        if part == "full":
            if self.theta == 0:
                M = self.order_operator(which, 0)
            else:
                M = sum(self.theta ** (n / 2.0) * self.order_operator(which, n) for n in range(6))
        elif part == "G0":
            M = self.kappa0(which) * np.eye(self.grid.n, dtype=complex)
        elif part in ("G1", "G2"):
            M = self.order_operator(which, int(part[1]))
        else:
            raise DomainError(f"unknown operator part {part!r}; expected one of {PARTS}")
        self._ops[key] = M
        return M

    def init_gamma(self, which="nu_nup"):
        """gamma(Q, 0) = rho(0) (r/pi)^{3/2} e^{-r Q^2} on the grid."""
        r = self.r
        vals = self.pair.element(which) * (r / math.pi) ** 1.5 * np.exp(-r * self.grid.nodes**2)
        return GammaField(self.grid, vals, which, self.theta, r, 0.0, self)

    def _check_field(self, field):
        if not isinstance(field, GammaField):
            raise ContractError("expected a GammaField")
        if field.grid is not self.grid and field.grid.key() != self.grid.key():
            raise ContractError("field lives on a different radial grid")

    def apply_G(self, field, part="full"):
        self._check_field(field)
        vals = _matvec(self.operator(field.pair_tag, part), field.values)
        if part == "full":
            vals = vals + self.kappa_eps(field.pair_tag) * field.values
        return field.with_values(vals)

    def norm(self, which="nu_nup"):
        """Max row sum of |G| without the level-splitting term."""
        return float(np.max(np.sum(np.abs(self.operator(which, "full")), axis=1)))

    def step_size(self, which, tau_end):
        g = self.norm(which)
        if g == 0:
            return math.inf
        stability = 0.1 / g
        accuracy = (120.0 * self.tol / (max(tau_end, 1e-300) * g**5)) ** 0.25
        return min(stability, accuracy)

    def evolve(self, field, tau_end, dt=None):
        """Classical RK4 from field.tau to tau_end in the level-splitting interaction picture."""
        self._check_field(field)
        tau0 = field.tau
        span = float(tau_end) - tau0
        if span < 0:
            raise DomainError("tau_end precedes the field time")
        if span == 0:
            return field
        which = field.pair_tag
        G = self.operator(which, "full")
        g = self.norm(which)
        if dt is None:
            dt = self.step_size(which, span)
        dt = float(dt)
        if not dt > 0:
            raise DomainError("dt must be positive")
        if dt * g > 2.5:
            raise NumericalError(f"dt = {dt:g} exceeds the RK4 stability bound for ||G|| = {g:g}")
        nsteps = max(1, math.ceil(span / dt))
        h = span / nsteps
        F = np.array(field.values, dtype=complex)
        start = float(np.max(np.abs(F))) or 1.0
        for _ in range(nsteps):
            k1 = _matvec(G, F)
            k2 = _matvec(G, F + 0.5 * h * k1)
            k3 = _matvec(G, F + 0.5 * h * k2)
            k4 = _matvec(G, F + h * k3)
            F = F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        peak = float(np.max(np.abs(F)))
        if not math.isfinite(peak) or peak > 1e6 * start:
            raise NumericalError(f"evolution of element {which} became unstable (peak {peak:g})")
        phase = np.exp(self.kappa_eps(which) * span)
        return field.with_values(F * phase, tau=float(tau_end))

    def trajectory(self, taus, elements=ELEMENTS):
        """rho_el(tau) of the requested elements plus |rho| and eta at the given scaled times."""
        taus = np.asarray(taus, dtype=float)
        if np.any(np.diff(taus) < 0) or np.any(taus < 0):
            raise DomainError("output times must be nondecreasing and >= 0")
        rho = {}
        for which in elements:
            field = self.init_gamma(which)
            dt = self.step_size(which, float(taus[-1]) if len(taus) else 0.0)
            out = []
            for tau in taus:
                field = self.evolve(field, tau, dt=dt) if tau > field.tau else field
                out.append(reduce_rho(field))
            rho[which] = np.array(out, dtype=complex)
        abs_rho = eta = None
        if "nu_nup" in rho:
            other = rho["nup_nu"] if "nup_nu" in rho else np.conj(rho["nu_nup"])
            abs_rho = np.sqrt(np.abs(rho["nu_nup"] * other))
            if "nu_nu" in rho and "nup_nup" in rho:
                eta = abs_rho / np.sqrt(rho["nu_nu"].real * rho["nup_nup"].real)
        return OracleTrajectory(taus, taus / self.tau_per_second, rho, abs_rho, eta)

    # Closed-form pieces of the theta^{1/2} expansion, used to assemble the perturbative solution.
    def perturbative_integrals(self, which="nu_nup"):
        """(int G1[g0], int G2[g0], int G1[G1[g0]]) / rho(0) in closed form."""
        (A, B, C), (Ap, Bp, Cp) = self._scaled(which)
        r = self.r
        Y = 2j * math.pi * (B - Bp.conjugate()) + 4.0 * math.pi * A * Ap.conjugate()
        I1 = 2.0 * math.sqrt(1.0 + r) / math.sqrt(math.pi) * Y
        I21 = 1.5 * (2j * math.pi * (C - Cp.conjugate()) - 4.0 * math.pi * (A * Bp.conjugate() + B * Ap.conjugate()))
        I22 = Y * Y * mass_factor(r) / math.pi
        return I1, I21, I22

    def perturbative_rho(self, taus, which="nu_nup", order=2):
        """rho(0) e^{kappa0 tau}[1 + theta^{1/2} tau I1 + theta (tau I21 + tau^2 I22 / 2)]."""
        taus = np.asarray(taus, dtype=float)
        I1, I21, I22 = self.perturbative_integrals(which)
        th = self.theta
        br = np.ones_like(taus, dtype=complex)
        if order >= 1:
            br = br + math.sqrt(th) * taus * I1
        if order >= 2:
            br = br + th * (taus * I21 + taus**2 * I22 / 2.0)
        return self.pair.element(which) * np.exp(self.kappa0(which) * taus) * br


def init_gamma(bath, pair, which="nu_nup", **oracle_options):
    """Initial field of ``which`` on a fresh oracle for (bath, pair)."""
    return MasterEquationOracle(bath, pair, **oracle_options).init_gamma(which)


def _oracle_of(field):
    if not isinstance(field, GammaField) or field.oracle is None:
        raise ContractError("field is not attached to an oracle")
    return field.oracle


def apply_G(field, part="full"):
    return _oracle_of(field).apply_G(field, part)


def evolve(field, tau_end, dt=None):
    return _oracle_of(field).evolve(field, tau_end, dt)
