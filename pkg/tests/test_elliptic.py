import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shadowhopf.elliptic import (
    Modulus,
    ellip_E,
    ellip_K,
    ellip_KE,
    jacobi_cn,
    jacobi_dn,
    jacobi_sn,
    jacobi_sncndn,
)
from shadowhopf.oracle import quadrature

log_m1 = st.floats(min_value=-300.0, max_value=0.0)


def _mp_KE(m1: float, dps: int = 60):
    with mp.workdps(dps):
        m = 1 - mp.mpf(m1)
        return float(mp.ellipk(m)), float(mp.ellipe(m))


def test_modulus_rejects_out_of_range():
    for bad in (0.0, -1e-3, 1.5, math.nan, math.inf):
        with pytest.raises(ValueError):
            Modulus(bad)
    with pytest.raises(ValueError):
        Modulus.from_k(1.0)


@given(st.floats(min_value=0.0, max_value=0.999999))
def test_k2_plus_m1_is_one(k):
    m = Modulus.from_k(k)
    assert m.k2 + m.m1 == pytest.approx(1.0, abs=2e-16)
    # k is derived from m1, so its absolute error is about sqrt(ulp)
    assert m.k == pytest.approx(k, rel=1e-12, abs=2e-8)


def test_from_k_keeps_small_m1():
    k = 1.0 - 1e-12
    assert Modulus.from_k(k).m1 == pytest.approx((1 - k) * (1 + k), rel=1e-15)


def test_circular_limit():
    assert ellip_K(Modulus(1.0)) == pytest.approx(math.pi / 2, rel=1e-16)
    assert ellip_E(Modulus(1.0)) == pytest.approx(math.pi / 2, rel=1e-16)


@settings(max_examples=60, deadline=None)
@given(log_m1)
def test_KE_against_mpmath(lm):
    m1 = 10.0**lm
    K, E = ellip_KE(Modulus(m1))
    Kr, Er = _mp_KE(m1, dps=max(40, int(-lm) + 30))
    assert K == pytest.approx(Kr, rel=1e-14)
    assert E == pytest.approx(Er, rel=1e-13)


def test_K_E_against_angle_quadrature():
    k = 0.5
    K = quadrature(lambda th: 1.0 / math.sqrt(1.0 - k * k * math.sin(th) ** 2), 0.0, math.pi / 2, tol=1e-14)
    E = quadrature(lambda th: math.sqrt(1.0 - k * k * math.sin(th) ** 2), 0.0, math.pi / 2, tol=1e-14)
    m = Modulus.from_k(k)
    assert ellip_K(m) == pytest.approx(K, rel=1e-12)
    assert ellip_E(m) == pytest.approx(E, rel=1e-12)


def test_log_singularity_of_K():
    gaps = []
    for m1 in (1e-4, 1e-8, 1e-12):
        gaps.append(abs(ellip_K(Modulus(m1)) - math.log(1.0 / math.sqrt(m1)) - 2.0 * math.log(2.0)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[-1] < 1e-10


def test_E_tends_to_one():
    assert 0.0 < ellip_E(Modulus(1e-14)) - 1.0 < 1e-6


# below k ~ 1e-3 the upper gap is O(k^4) and drowns in rounding
@given(st.floats(min_value=1e-3, max_value=0.999999))
def test_E_bounds(k):
    m = Modulus.from_k(k)
    K, E = ellip_KE(m)
    assert m.m1 * K < E < (1.0 - 0.5 * k * k) * K


@pytest.mark.parametrize("k", [0.3, 0.9, 0.999])
def test_integral_of_sn_squared(k):
    m = Modulus.from_k(k)
    K, E = ellip_KE(m)
    val = quadrature(lambda x: jacobi_sn(x, m) ** 2, 0.0, K, tol=1e-13)
    assert val == pytest.approx((K - E) / (k * k), rel=1e-9)


@pytest.mark.parametrize("m1", [0.7, 0.1, 1e-4, 1e-12])
def test_sncndn_against_mpmath(m1):
    m = Modulus(m1)
    K = ellip_K(m)
    xs = np.linspace(-8 * K, 8 * K, 97)
    sn, cn, dn = jacobi_sncndn(xs, m)
    with mp.workdps(50):
        mm = 1 - mp.mpf(m1)
        ref = np.array([[float(mp.ellipfun(f, mp.mpf(x), m=mm)) for f in ("sn", "cn", "dn")] for x in xs])
    assert np.max(np.abs(sn - ref[:, 0])) < 1e-12
    assert np.max(np.abs(cn - ref[:, 1])) < 1e-12
    assert np.max(np.abs(dn - ref[:, 2])) < 1e-12


def test_sharp_layer_regime_against_mpmath():
    m1 = 1e-60
    m = Modulus(m1)
    K = ellip_K(m)
    xs = np.linspace(0.0, 2 * K, 25)
    sn, cn, dn = jacobi_sncndn(xs, m)
    with mp.workdps(150):
        mm = 1 - mp.mpf(m1)
        for x, s, c, d in zip(xs, sn, cn, dn):
            assert abs(s - float(mp.ellipfun("sn", mp.mpf(x), m=mm))) < 1e-12
            assert abs(c - float(mp.ellipfun("cn", mp.mpf(x), m=mm))) < 1e-12
            assert abs(d - float(mp.ellipfun("dn", mp.mpf(x), m=mm))) < 1e-12


def test_special_values():
    for m1 in (0.9, 0.3, 1e-9):
        m = Modulus(m1)
        K = ellip_K(m)
        assert jacobi_sn(0.0, m) == 0.0
        assert jacobi_sn(K, m) == pytest.approx(1.0, abs=1e-14)
        assert jacobi_cn(0.0, m) == 1.0
        assert jacobi_dn(K, m) == pytest.approx(math.sqrt(m1), rel=1e-10, abs=1e-14)


def test_scalar_in_scalar_out():
    assert isinstance(jacobi_sn(0.3, Modulus(0.5)), float)
    assert jacobi_sn(np.array([0.3, 0.4]), Modulus(0.5)).shape == (2,)


def test_pythagorean_identities_random():
    rng = np.random.default_rng(7)
    for _ in range(1000 // 50):
        m = Modulus(10.0 ** rng.uniform(-15, 0))
        K = ellip_K(m)
        x = rng.uniform(-8 * K, 8 * K, 50)
        sn, cn, dn = jacobi_sncndn(x, m)
        assert np.max(np.abs(sn**2 + cn**2 - 1)) < 1e-12
        assert np.max(np.abs(dn**2 + m.k2 * sn**2 - 1)) < 1e-12


@given(st.floats(-50, 50), st.floats(1e-12, 1.0))
def test_antiperiodicity(x, m1):
    m = Modulus(m1)
    K = ellip_K(m)
    sn0, cn0, dn0 = jacobi_sncndn(x, m)
    sn1, cn1, dn1 = jacobi_sncndn(x + 2 * K, m)
    assert sn1 == pytest.approx(-sn0, abs=1e-11)
    assert cn1 == pytest.approx(-cn0, abs=1e-11)
    assert dn1 == pytest.approx(dn0, abs=1e-11)


def test_sn_solves_its_ode():
    k = 0.9
    m = Modulus.from_k(k)
    rng = np.random.default_rng(3)
    x = rng.uniform(-4, 4, 100)
    h = 1e-3
    f = lambda z: jacobi_sn(z, m)
    ypp = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h)
    y = f(x)
    assert np.max(np.abs(ypp + (1 + k * k) * y - 2 * k * k * y**3)) < 1e-8
