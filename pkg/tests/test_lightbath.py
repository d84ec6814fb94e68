import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coldcoherence.constants import hbar, k_B
from coldcoherence.errors import DomainError, NoRealSolutionError
from coldcoherence.lightbath import (invert_alpha, lambda_1, lambda_2, lambda_2_quadrature, omega,
                                     small_r_coefficients, validity_conditions, w_integral)
from coldcoherence.scattering import BathSpec, ChannelPair

from conftest import M_HE4, bath_with_r, chan, pairs, scenario_pair

L = 1e-9


def test_w0_leading_term(pair):
    b = bath_with_r(0.1)
    w = w_integral(0, b, pair, 1e-14)
    lead = -2j * math.pi * (pair.nu.a - pair.nu_prime.a.conjugate()) / L
    assert abs(w - lead) < 1e-6 * abs(lead)
    assert w_integral(0, b, pair, 0.0) == pytest.approx(lead, rel=1e-14)


def test_w0_diagonal_is_real():
    ch = chan(2, 0.7, 0.1 + 0.3j)
    p = ChannelPair.pure(ch, chan(1, 0))
    w = w_integral(0, bath_with_r(0.1), p, 0.0, which="nu_nu")
    assert w.imag == pytest.approx(0.0, abs=1e-12 * abs(w))
    assert w.real == pytest.approx(-4 * math.pi * ch.beta / L, rel=1e-14)


@pytest.mark.parametrize("k", [0, 1])
def test_quadrature_vs_expansion(pair, k):
    b = bath_with_r(0.1)
    theta = 1e-4
    q = w_integral(k, b, pair, theta, mode="quadrature")
    e = w_integral(k, b, pair, theta, mode="expansion")
    assert abs(q - e) / abs(q) < 1e-4
    # the quadrature itself is converged in the node count
    q2 = w_integral(k, b, pair, theta, nodes=192)
    assert abs(q - q2) < 1e-13 * abs(q)


def test_w_domain(pair):
    with pytest.raises(DomainError):
        w_integral(2, bath_with_r(0.1), pair, 1e-4)
    with pytest.raises(DomainError):
        w_integral(0, bath_with_r(0.1), pair, -1.0)


@settings(max_examples=50, deadline=None)
@given(pairs(), st.floats(1e-8, 1e-1))
def test_symmetric_w_equals_omega(p, theta):
    b = bath_with_r(0.1)
    scale = None
    for k in (0, 1):
        w = {x: w_integral(k, b, p, theta, which=x) for x in ("nu_nup", "nup_nu", "nu_nu", "nup_nup")}
        comb = (w["nu_nup"] + w["nup_nu"] - w["nu_nu"] - w["nup_nup"]) / 2
        om = omega(k, p, theta)
        # the k=0 values bound the summed terms; the k=1 weight can cancel them internally
        scale = scale or max(abs(v) for v in w.values())
        assert abs(comb.imag) <= 1e-13 * scale
        assert abs(comb.real - om) <= 1e-10 * abs(om) + 1e-12 * scale


@settings(max_examples=100, deadline=None)
@given(pairs(), st.floats(1e-8, 1.0))
def test_omega0_nonpositive(p, theta):
    assert omega(0, p, theta) <= 0


def test_lambda1():
    nu, nup = chan(1, 0), chan(2, 0)
    b = BathSpec(M_HE4, 1e-25, 1e19, 1e-4)
    assert lambda_1(b, ChannelPair.pure(nu, nup)) == 0.0
    p = ChannelPair.pure(chan(1, 1), chan(2, 0))
    mp.mp.dps = 30
    ref = mp.mpf(10) ** 19 * 2 * mp.pi * mp.mpf(hbar) * mp.mpf(10) ** -9 / mp.mpf(M_HE4)
    assert lambda_1(b, p) == pytest.approx(float(ref), rel=1e-14)
    b2 = BathSpec(b.m, b.M, 2 * b.n_gas, b.T)
    assert lambda_1(b2, p) == 2 * lambda_1(b, p)


def test_lambda2_trivial_cases(pair):
    b = bath_with_r(0.1)
    ch = chan(1, 0.2, 0.3 + 0.1j, 0.2j)
    same = ChannelPair.pure(ch, ch)
    for order in (1, 2, 3):
        assert lambda_2(b, same, 1e-3, order) == 0.0
        assert lambda_2(b, pair, 0.0, order) == 0.0


def test_lambda2_converges_to_quadrature(pair):
    b = bath_with_r(0.1)
    T = 1e-6
    ref = lambda_2_quadrature(b, pair, T)
    errs = [abs(lambda_2(b, pair, T, k) - ref) for k in (1, 2, 3)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-6 * ref


def test_lambda2_order1_shift_invariance(pair):
    b = bath_with_r(0.1)
    moved = ChannelPair.pure(chan(1.0 + 0.7, 0.3, 0.4 + 0.6j), chan(0.5 + 0.7, 0.2))
    base = ChannelPair.pure(chan(1.0, 0.3, 0.4 + 0.6j), chan(0.5, 0.2))
    assert lambda_2(b, moved, 1e-5, 1) == pytest.approx(lambda_2(b, base, 1e-5, 1), rel=1e-14)


def test_small_r_coefficients(pair):
    c = small_r_coefficients(bath_with_r(0.1), pair, 1e-5)
    assert c.omega0 <= 0 and c.lambda1 >= 0 and c.lambda2 >= 0


def test_validity_degenerate():
    b = bath_with_r(0.05)
    p = ChannelPair.pure(chan(1, 0, 0.3j), chan(2, 0, 0.2j))
    v = validity_conditions(b, p, 1e-5)
    assert v.r_ok_abs is None and v.T_ok_abs is None
    assert "r_ok_abs" in v.indeterminate and not v.all_ok
    ch = chan(1, 0.2)
    v = validity_conditions(b, ChannelPair.pure(ch, chan(1, 0.2, 0.3j)), 1e-5)
    assert v.r_ok_eta is None and v.T_ok_eta is None


def _mp_bounds(bath, pair, T):
    mp.mp.dps = 40
    m, kB, hb = mp.mpf(bath.m), mp.mpf(k_B), mp.mpf(hbar)
    nu, nup = pair.nu, pair.nu_prime
    bs = mp.mpf(nu.beta) + mp.mpf(nup.beta)
    a, ap = mp.mpc(nu.a), mp.mpc(nup.a)
    b, bp = mp.mpc(nu.b_red), mp.mpc(nup.b_red)
    c, cp = mp.mpc(nu.c_red), mp.mpc(nup.c_red)
    num1 = mp.im(b) + mp.im(bp) - 2 * (mp.re(a) * mp.re(ap) + mp.im(a) * mp.im(ap))
    num2 = mp.im(c) + mp.im(cp) + 2 * mp.re(a * mp.conj(bp) + b * mp.conj(ap))
    e1 = mp.mpf(2) ** 1.5 * mp.sqrt(m * kB) * num1 / (mp.sqrt(mp.pi) * hb * bs)
    e2 = 6 * m * kB * num2 / (hb**2 * bs)
    ratio_abs = abs(1 + e1 * mp.sqrt(T) + e2 * T)
    da, db, dc = a - ap, (b - bp) / hb, (c - cp) / hb**2
    D0, R = abs(da) ** 2, mp.re(da * mp.conj(db))
    D2 = abs(db) ** 2 - 2 * mp.re(da * mp.conj(dc))
    P = mp.sqrt(2 * m * kB * T)
    lead = 2 * D0 / (3 * mp.sqrt(mp.pi) * R)
    const = 16 * D0 * D2 / (9 * mp.pi * R**2)
    ratio_eta = abs(lead / P - 1 + const)
    T_eta = abs(lead) / (abs(1 - const) * mp.sqrt(2 * m * kB))
    return float(ratio_abs), float(1 / abs(e1)), float(ratio_eta), float(T_eta)


def test_validity_bounds_against_mpmath(pair):
    b = bath_with_r(0.05)
    v = validity_conditions(b, pair, 1e-6)
    ref = _mp_bounds(b, pair, 1e-6)
    got = (v.ratio_abs, v.T_bound_abs, v.ratio_eta, v.T_bound_eta)
    for g, r in zip(got, ref):
        assert g == pytest.approx(r, rel=1e-12)


def test_validity_ratios_match_quadrature():
    """The closed-form ratios are small-T expansions of quadrature ratios."""
    p = scenario_pair()
    b = bath_with_r(0.1)
    err_eta, err_abs = [], []
    for T in (1e-8, 1e-10):
        v = validity_conditions(b, p, T)
        th = b.theta(L, T)
        err_eta.append(abs(v.ratio_eta - abs(omega(0, p, th) / omega(1, p, th))))
        w0, w1 = w_integral(0, b, p, th).real, w_integral(1, b, p, th).real
        err_abs.append(abs(v.ratio_abs - abs(w0 / w1)))
    # remainders O(T^{1/2}) for eta and O(T^{3/2}) for |rho|
    assert err_eta[0] / err_eta[1] == pytest.approx(10.0, rel=0.05)
    assert err_abs[0] / err_abs[1] == pytest.approx(1000.0, rel=0.05)


def test_margin_flags():
    p = scenario_pair()
    b = bath_with_r(0.01)
    v = validity_conditions(b, p, 1e-9, margin=0.1)
    assert v.r_ok_eta == (b.r < 0.1 * v.ratio_eta)
    assert v.T_ok_eta == (math.sqrt(1e-9) < 0.1 * v.T_bound_eta)


def _synthetic(bath, pair, Ts):
    return [(T, lambda_2(bath, pair, T, order=1)) for T in Ts]


def test_inversion_round_trip():
    b = bath_with_r(0.05)
    nu, nup = chan(1.0, 0.3, 0.4j), chan(0.55, 0.2)
    data = _synthetic(b, ChannelPair.pure(nu, nup), [1e-7, 3e-7, 1e-6, 3e-6, 1e-5])
    res = invert_alpha(b, nu, nup.beta, data, prior_sign=+1)
    assert res.preferred == 0
    assert res.alpha_prime_candidates[0] == pytest.approx(nup.alpha, rel=1e-10)
    res = invert_alpha(b, nu, nup.beta, data, prior_sign=-1)
    assert res.alpha_prime_candidates[1] == pytest.approx(nup.alpha, rel=1e-10)
    assert res.fit_residual < 1e-10 * max(r for _, r in data)


def test_inversion_symmetric_and_zero_rates():
    b = bath_with_r(0.05)
    nu = chan(1.0, 0.3)
    data = _synthetic(b, ChannelPair.pure(nu, chan(0.6, 0.3)), [1e-6, 4e-6])
    c = invert_alpha(b, nu, nu.beta, data).alpha_prime_candidates
    assert (c[0] + c[1]) / 2 == pytest.approx(nu.alpha, rel=1e-14)
    res = invert_alpha(b, nu, nu.beta, [(1e-6, 0.0), (4e-6, 0.0)])
    assert res.alpha_prime_candidates == (nu.alpha, nu.alpha)


def test_inversion_errors():
    b = bath_with_r(0.05)
    nu = chan(1.0, 0.3)
    with pytest.raises(DomainError):
        invert_alpha(b, nu, 0.0, [])
    data = _synthetic(b, ChannelPair.pure(nu, chan(1.0, 0.25)), [1e-6, 4e-6])
    with pytest.raises(NoRealSolutionError):
        invert_alpha(b, nu, 2e-9, data)


def test_inversion_weights():
    b = bath_with_r(0.05)
    nu, nup = chan(1.0, 0.3), chan(0.55, 0.2)
    data = _synthetic(b, ChannelPair.pure(nu, nup), [1e-6, 2e-6, 4e-6])
    data[2] = (data[2][0], data[2][1] * 1.5)  # outlier with a huge error bar
    res = invert_alpha(b, nu, nup.beta, data, sigma=[1.0, 1.0, 1e8], prior_sign=1)
    assert res.alpha_prime_candidates[0] == pytest.approx(nup.alpha, rel=1e-8)
