import json
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from rffbounds.bounds import (F_d, bernstein_params, cor1_bound, covering_upper, entropy_integral_upper,
                              khintchine, sigma_of, thm1_bound, thm1_h, thm2_bound, thm3_bound, thm3_H,
                              thm4_failure_prob, vol_factor)
from rffbounds.errors import InvalidA, InvalidDiameter, InvalidR, UnboundedSupport
from rffbounds.norms import Box
from rffbounds.spectral import Discrete, GaussianIso, UniformBox, second_moment

import oracles

# diameters where log(2|S| + 1) >= 1/2, the regime in which h (and H) grow with |S|
MONO_DIAM = (math.exp(0.5) - 1) / 2

dims = st.integers(1, 6)
diams = st.floats(0.01, 1e4)
sigmas = st.floats(0.0, 100.0)
ms = st.integers(1, 10**7)
taus = st.floats(1e-3, 20.0)


# T1

def test_h_examples():
    assert thm1_h(1, 1, 1) == pytest.approx(oracles.H_1_1_1, rel=1e-14)
    assert thm1_h(1, 1, 0) == pytest.approx(oracles.H_1_1_0, rel=1e-14)
    assert thm1_h(2, 1, 1) > thm1_h(1, 1, 1)
    with pytest.raises(InvalidDiameter):
        thm1_h(1, 0.0, 1.0)


def test_thm1_examples():
    rep = thm1_bound(1, 1, 1, 10**4, 1.0)
    assert rep.bound_value == pytest.approx(oracles.T1_1_1_1_M1E4_TAU1, rel=1e-14)
    assert rep.theorem_tag == "T1" and rep.confidence == {"tau": 1.0} and not rep.vacuous
    assert thm1_bound(1, 1, 1, 100, 1e-300).bound_value == pytest.approx(thm1_h(1, 1, 1) / 10, rel=1e-12)
    assert thm1_bound(1, 1, 1, 10, 1.0).vacuous


@given(dims, diams, sigmas, ms, taus)
def test_thm1_scaling(d, diam, sigma, m, tau):
    a = thm1_bound(d, diam, sigma, m, tau).bound_value
    assert thm1_bound(d, diam, sigma, 4 * m, tau).bound_value == pytest.approx(a / 2, rel=1e-14)


@given(dims, diams, diams, sigmas, ms, taus, taus)
def test_thm1_monotonicity(d, a, b, sigma, m, t1, t2):
    lo, hi = sorted((a, b))
    assume(lo >= MONO_DIAM)
    assert thm1_bound(d, lo, sigma, m, t1).bound_value <= thm1_bound(d, hi, sigma, m, t1).bound_value * (1 + 1e-14)
    t1, t2 = sorted((t1, t2))
    assert thm1_bound(d, lo, sigma, m, t1).bound_value <= thm1_bound(d, lo, sigma, m, t2).bound_value
    assert thm1_bound(d, lo, sigma, m + 1, t1).bound_value < thm1_bound(d, lo, sigma, m, t1).bound_value


def test_h_dips_below_the_monotone_regime():
    """The reciprocal-log term makes h decrease in |S| while log(2|S| + 1) < 1/2."""
    assert thm1_h(1, 0.05, 1.0) > thm1_h(1, 0.2, 1.0)


# C1 and T2

def test_vol_factor_examples():
    assert vol_factor(1, 2, 2) == pytest.approx(2.0, rel=1e-14)
    assert vol_factor(2, 2, 2) == pytest.approx(math.pi, rel=1e-14)
    assert vol_factor(3, 2, 1) == pytest.approx(oracles.VOL_D3_DIAM2_R1, rel=1e-14)
    assert 0.0 < vol_factor(1000, 2, 2) < 1e-300 or vol_factor(1000, 2, 2) == 0.0
    assert math.isfinite(vol_factor(1000, 5.0, 3.0))
    assert vol_factor(1000, 1e6, 1.0) == math.inf
    with pytest.raises(InvalidR):
        vol_factor(1, 1, 0.5)


@given(st.integers(1, 1000), st.floats(0.1, 100), st.floats(1, 50))
def test_vol_factor_matches_mpmath(d, diam, r):
    mp.mp.dps = 30
    ref = (mp.pi ** (mp.mpf(d) / 2) * mp.mpf(diam) ** d / (2**d * mp.gamma(mp.mpf(d) / 2 + 1))) ** (2 / mp.mpf(r))
    got = vol_factor(d, diam, r)
    if ref > mp.mpf("1e308"):
        assert got == math.inf
        return
    if ref < mp.mpf("1e-300"):
        return
    assert got == pytest.approx(float(ref), rel=1e-9)


def test_cor1_examples():
    base = thm1_bound(1, 2, 1, 10**4, 1).bound_value
    assert cor1_bound(1, 2, 1, 10**4, 1, 2).bound_value == pytest.approx(2 * base, rel=1e-14)
    assert cor1_bound(3, 1.5, 1, 10**4, 1, 1e12).bound_value == pytest.approx(
        thm1_bound(3, 1.5, 1, 10**4, 1).bound_value, rel=1e-9)


def test_khintchine():
    assert khintchine(1.5) == 1.0
    assert khintchine(2.0) == 1.0
    upper_branch = math.sqrt(2) * math.exp((math.lgamma(1.5) - 0.5 * math.log(math.pi)) / 2)
    assert upper_branch == pytest.approx(1.0, abs=1e-14)
    assert khintchine(3.0) == pytest.approx(oracles.KHINTCHINE_3, rel=1e-14)
    assert khintchine(2 + 1e-12) == pytest.approx(1.0, abs=1e-11)
    with pytest.raises(InvalidR):
        khintchine(1.0)


def test_thm2_examples():
    for r in (2.0, 3.0, 8.0):
        a = thm2_bound(2, 1.0, 100, 1.0, r).bound_value
        assert thm2_bound(2, 1.0, 400, 1.0, r).bound_value == pytest.approx(a / 2, rel=1e-14)
    rep = thm2_bound(1, 2.0, 10**6, 1e-300, 1.5)
    assert rep.bound_value == pytest.approx(2.0 ** (4 / 3) * 1e-2, rel=1e-9)  # C' = 1, m^-1/3
    assert "h" not in rep.constituents and "sigma2" not in rep.constituents
    with pytest.raises(InvalidR):
        thm2_bound(1, 1.0, 10, 1.0, 1.0)


@given(dims, diams, diams, ms, taus, st.floats(1.01, 10))
def test_thm2_monotonicity(d, a, b, m, tau, r):
    lo, hi = sorted((a, b))
    assert thm2_bound(d, lo, m, tau, r).bound_value <= thm2_bound(d, hi, m, tau, r).bound_value * (1 + 1e-14)
    assert thm2_bound(d, lo, m + 1, tau, r).bound_value <= thm2_bound(d, lo, m, tau, r).bound_value


# T3

MEAS = [GaussianIso(1, 1.0), GaussianIso(3, 0.5), UniformBox(2, 2.0), Discrete(1, [[3.0], [-1.0]], [0.5, 0.5])]


@given(st.sampled_from(MEAS), diams)
def test_thm3_reduces_to_thm1(measure, diam):
    z = (0,) * measure.d
    H = thm3_H(measure.d, z, z, diam, measure).bound_value
    assert H == pytest.approx(thm1_h(measure.d, diam, math.sqrt(second_moment(measure))), rel=1e-12)
    a = thm3_bound(measure.d, z, z, diam, measure, 1000, 0.7).bound_value
    b = thm1_bound(measure.d, diam, sigma_of(measure), 1000, 0.7).bound_value
    assert a == pytest.approx(b, rel=1e-12)


def test_thm3_examples():
    rep = thm3_H(1, (1,), (1,), 1.0, UniformBox(1, 1.0))
    assert rep.constituents["T_2p2q"] == pytest.approx(1.0)
    assert rep.constituents["U"] == pytest.approx(math.log(3.0), rel=1e-14)
    rep = thm3_bound(1, (1,), (0,), 1.0, UniformBox(1, 2.0), 100, 2.0)
    assert rep.constituents["T_pq"] == pytest.approx(2.0)
    H = rep.constituents["H"]
    assert rep.bound_value == pytest.approx((H + 2.0 * 2.0) / 10, rel=1e-14)
    with pytest.raises(UnboundedSupport):
        thm3_H(1, (1,), (0,), 1.0, GaussianIso(1, 1.0))


@given(st.integers(0, 2), st.integers(0, 2), ms, st.floats(0.1, 50))
def test_thm3_scaling_and_monotone_in_m(pi, qi, m, diam):
    meas = UniformBox(1, 1.7)
    a = thm3_bound(1, (pi,), (qi,), diam, meas, m, 1.0).bound_value
    assert thm3_bound(1, (pi,), (qi,), diam, meas, 4 * m, 1.0).bound_value == pytest.approx(a / 2, rel=1e-14)


@given(st.integers(0, 2), st.integers(0, 2), st.floats(0.01, 100), st.floats(0.01, 100))
def test_thm3_monotone_in_diam_where_U_above_half(pi, qi, a, b):
    meas = UniformBox(1, 1.3)
    lo, hi = sorted((a, b))
    U = thm3_H(1, (pi,), (qi,), lo, meas).constituents["U"]
    assume(U >= 0.5)
    assert (thm3_bound(1, (pi,), (qi,), lo, meas, 100, 1).bound_value
            <= thm3_bound(1, (pi,), (qi,), hi, meas, 100, 1).bound_value * (1 + 1e-14))


# Bernstein and T4

def test_bernstein_examples():
    bp = bernstein_params(UniformBox(2, 3.0), (0, 0), (0, 0))
    assert bp.L == 4.0 and bp.sigma2 == 1.0
    bp = bernstein_params(UniformBox(1, 2.0), (1,), (0,))
    assert bp.L == pytest.approx(8.0) and bp.sigma2 == pytest.approx(4.0)
    bp = bernstein_params(Discrete(1, [[3.0]]), (1,), (0,))
    assert bp.L == pytest.approx(12.0) and bp.sigma2 == pytest.approx(9.0)
    with pytest.raises(UnboundedSupport):
        bernstein_params(GaussianIso(1, 1.0), (0,), (0,))


@given(st.integers(0, 2), st.integers(0, 2), st.integers(2, 8), st.floats(0.2, 3.0))
def test_bernstein_moment_condition_holds(pi, qi, M, R):
    """E|f|^M <= M! sigma^2 L^(M-2) / 2 for the centred summand, by Monte Carlo."""
    meas = UniformBox(1, R)
    bp = bernstein_params(meas, (pi,), (qi,))
    rng = np.random.default_rng(M)
    om = meas.sample(rng, 20_000)[:, 0]
    z = 0.8
    n = pi + qi
    g = om**n * np.cos(np.pi * n / 2 + om * z)
    f = g - g.mean()
    assert np.mean(np.abs(f) ** M) <= math.factorial(M) * bp.sigma2 * bp.L ** (M - 2) / 2


def test_F_d():
    assert F_d(1) == 2.0
    assert F_d(2) == pytest.approx(2 ** (-2 / 3) + 2 ** (1 / 3))


def test_thm4_worked_example():
    rep = thm4_failure_prob(1, (0,), (0,), 0.5, 1000, None, 1.0, 1.0, 2.0, 1.0, 0.0)
    assert rep.bound_value == pytest.approx(oracles.THM4_TOTAL, rel=1e-12)
    assert rep.constituents["F_d"] == 2.0 and not rep.vacuous
    first = 2.0**0 * math.exp(-250 / 12)
    assert first == pytest.approx(oracles.THM4_FIRST, rel=1e-12)
    unit = Box([0.0], [1.0])
    assert thm4_failure_prob(1, (0,), (0,), 0.5, 1000, None, unit, 1.0, 2.0, 0.4, 0.6).bound_value == rep.bound_value


@given(st.integers(1, 4), st.floats(0.05, 2), st.integers(1, 10**5), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 10), st.floats(0.0, 10))
def test_thm4_monotonicity(d, eps, m, diam, sb, Lb, DE):
    f = lambda **kw: thm4_failure_prob(  # noqa: E731
        d, (0,) * d, (0,) * d, kw.get("eps", eps), kw.get("m", m), None, kw.get("diam", diam), sb, Lb, DE, 0.0
    ).bound_value
    base = f()
    assert f(m=m + 1) < base or base == 0.0
    assert f(diam=2 * diam) >= base
    assert f(eps=1.5 * eps) <= base


def test_thm4_vacuous_flag():
    rep = thm4_failure_prob(1, (0,), (0,), 0.01, 10, None, 5.0, 1.0, 4.0, 1.0, 1.0)
    assert rep.bound_value > 1 and rep.vacuous


# supplement utilities

def test_covering_examples():
    assert covering_upper(1.0, 1.0, 3) == 125.0
    assert covering_upper(1.0, 0.5, 1) == 9.0
    assert covering_upper(1.0, 1.0, 2) == 25.0


def test_entropy_examples():
    assert entropy_integral_upper(math.e) == pytest.approx(1.5, rel=1e-15)
    for a, (lhs, rhs) in oracles.ENTROPY.items():
        assert entropy_integral_upper(a) == pytest.approx(rhs, rel=1e-11)
        assert entropy_integral_upper(a) >= lhs
    with pytest.raises(InvalidA):
        entropy_integral_upper(1.0)


def test_bound_report_json_roundtrip():
    rep = thm3_bound(1, (1,), (1,), 1.0, UniformBox(1, 1.0), 100, 1.0)
    back = json.loads(rep.to_json())
    assert back["theorem_tag"] == "T3"
    assert set(back["constituents"]) == {"H", "U", "T_2p2q", "C_2p2q", "T_pq"}
    assert all(math.isfinite(v) for v in back["constituents"].values())
