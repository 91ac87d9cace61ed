import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from shadowhopf import oracle, spectrum as S
from shadowhopf.stationary import Params, build_profile, chi, one_minus_mass2

TAU1 = 6.3828409010676614
PERIOD1 = 38.929920651496360
SWEEP = (0.1, 0.08, 0.06, 0.05, 0.04)


@pytest.fixture(scope="module")
def hopf1():
    return S.hopf_point(Params(0.2, 1.0), 1)


# ---------------------------------------------------------------- mu


def test_mu_extremes_vieta(profile1):
    mu0, mun = S.mu_extremes(profile1)
    q = profile1.q
    assert mu0 > 0 > mun
    assert mu0 + mun == pytest.approx(-2.0, abs=1e-15)
    assert mu0 * mun == pytest.approx(-3 * q * q, rel=1e-14)


def test_mu_extremes_sharp_limit():
    mu0, mun = S.mu_extremes(build_profile(0.02, 1))
    assert mu0 == pytest.approx(0.0, abs=1e-12)
    assert mun == pytest.approx(-2.0, abs=1e-12)


def test_mu0_against_discrete_operator(profile1):
    op = oracle.profile_operator(profile1, 2001)
    est = oracle.dominant_eig(op, 0.5, invert=True)
    assert est.value == pytest.approx(S.mu_extremes(profile1)[0], rel=1e-3)


def test_mu_asymptotic_branches():
    eps, n = 0.05, 2
    e = math.exp(-math.sqrt(2) / (n * eps))
    assert S.mu_asymptotic(0, n, eps) == pytest.approx(96 * e)
    assert S.mu_asymptotic(n, n, eps) == pytest.approx(-1.5 + 12 * math.exp(-1 / (math.sqrt(2) * n * eps)))
    assert S.mu_asymptotic(2 * n, n, eps) == pytest.approx(-2 - 96 * e)
    assert S.mu_asymptotic(2 * n + 3, n, eps) == pytest.approx(-2 - 9 * math.pi**2 * eps**2)
    with pytest.raises(ValueError):
        S.mu_asymptotic(-1, n, eps)


def test_mu0_matches_its_asymptotic_form():
    p = build_profile(0.05, 1)
    assert S.mu_extremes(p)[0] / S.mu_asymptotic(0, 1, 0.05) == pytest.approx(1.0, rel=0.1)


# ---------------------------------------------------------------- cubic


def test_constant_term_positive_on_sweep():
    for eps in SWEEP + (0.2,):
        for n in (1, 2):
            p = Params(eps / n, 3.0)
            prof = build_profile(p.eps, n)
            assert chi(prof) < p.delta
            assert S.cubic_coeffs(p, prof)[3] > 0


def test_quadratic_fallback(profile1):
    c3, c2, c1, c0 = S.cubic_coeffs(Params(0.2, 1.0), profile1)
    roots = S.cubic_roots((0.0, 1.0, c1, c0))
    assert len(roots) == 2
    for r in roots:
        assert abs(r * r + c1 * r + c0) < 1e-12


def test_roots_at_critical_tau(hopf1, profile1):
    p = Params(0.2, hopf1.tau_n)
    coeffs = S.cubic_coeffs(p, profile1)
    real, z, zc = S.cubic_roots(coeffs)
    assert real.real < 0 and real.imag == 0
    assert abs(z.real) < 1e-10
    assert z.imag == pytest.approx(hopf1.lambda_In, rel=1e-10)
    assert zc == z.conjugate()
    ref = sorted(np.roots(coeffs), key=lambda r: r.imag)
    assert ref[2] == pytest.approx(z, abs=1e-10)


def _rounding_floor(coeffs):
    # residual of the correctly rounded roots is at least about ulp * sum |c_i| |z|^i
    return max(
        np.finfo(float).eps * sum(abs(c) * abs(z) ** k for c, k in zip(coeffs, (3, 2, 1, 0)))
        for z in np.roots(coeffs)
    )


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_cubic_roots_random(coeffs):
    assume(abs(coeffs[0]) > 1e-3)
    scale = max(1.0, *map(abs, coeffs))
    try:
        roots = S.cubic_roots(coeffs)
    except S.IllConditionedError:
        # only acceptable when double precision cannot reach the target at all
        assert _rounding_floor(coeffs) > 0.1 * 1e-10 * scale
        return
    for r in roots:
        assert abs(S.cubic_eval(coeffs, r)) <= 1e-10 * scale
    nonreal = [r for r in roots if r.imag != 0]
    assert len(nonreal) in (0, 2)
    if nonreal:
        assert nonreal[0] == nonreal[1].conjugate()


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0.1, 10), min_size=4, max_size=4), st.lists(st.sampled_from([-1.0, 1.0]), min_size=4, max_size=4))
def test_well_scaled_cubics_always_succeed(mags, signs):
    coeffs = [m * s for m, s in zip(mags, signs)]
    roots = S.cubic_roots(coeffs)
    assert len(roots) == 3
    ref = np.sort_complex(np.roots(coeffs))
    assert np.allclose(np.sort_complex(np.array(roots)), ref, atol=1e-6)


def test_ill_conditioned_is_signalled():
    with pytest.raises(S.IllConditionedError):
        S.cubic_roots((1e-300, 1.0, 1.0, 1.0))


def test_large_tau_roots_approach_scalar_spectrum(profile1):
    roots = S.cubic_roots(S.cubic_coeffs(Params(0.2, 1e9), profile1))
    assert all(r.imag == 0 for r in roots)
    targets = sorted([0.0, *S.mu_extremes(profile1)])
    for r, t in zip(sorted(r.real for r in roots), targets):
        assert abs(r - t) < 1e-3


# ---------------------------------------------------------------- Hopf point


def test_hopf_reference_values(hopf1):
    assert hopf1.valid
    assert hopf1.tau_n == pytest.approx(TAU1, rel=1e-12)
    assert hopf1.period == pytest.approx(PERIOD1, rel=1e-12)
    assert hopf1.period * hopf1.lambda_In == pytest.approx(2 * math.pi, rel=1e-15)


def test_hopf_n_eps_invariance(hopf1):
    h2 = S.hopf_point(Params(0.1, 1.0), 2)
    assert h2.tau_n == pytest.approx(hopf1.tau_n, rel=1e-12)
    assert h2.period == pytest.approx(hopf1.period, rel=1e-12)


@pytest.mark.parametrize("eps,n", [(0.2, 1), (0.1, 2), (0.05, 1), (0.04, 1), (0.02, 3)])
def test_hopf_consistency(eps, n):
    p = Params(eps, 1.0)
    hd = S.hopf_point(p, n)
    coeffs = S.cubic_coeffs(p.with_tau(hd.tau_n), hd.profile)
    scale = max(1.0, *map(abs, coeffs))
    assert abs(S.cubic_eval(coeffs, 1j * hd.lambda_In)) < 1e-10 * scale
    q2 = hd.profile.q ** 2
    assert hd.tau_n == pytest.approx((p.delta + 2) * p.gamma / (hd.lambda_In**2 + 3 * q2), rel=1e-12)


def test_hopf_invalid_when_chi_exceeds_delta():
    p = Params(0.3, 1.0, alpha=0.01, beta=0.5, gamma=0.5)
    hd = S.hopf_point(p, 1)
    assert not hd.valid
    assert hd.chi_n >= p.delta
    assert math.isnan(hd.tau_n) and math.isnan(hd.period)


def test_asymptotic_ratios():
    rows = []
    for eps in SWEEP:
        p = Params(eps, 1.0)
        hd = S.hopf_point(p, 1)
        pa, ta, ca = S.hopf_asymptotics(1, eps, p)
        rows.append((hd.period / pa, hd.tau_n / ta, hd.chi_n / ca))
    rows = np.array(rows)
    assert np.all(np.abs(rows[-1] - 1) < 0.05)
    dev = np.abs(rows[-3:] - 1)
    assert np.all(np.diff(dev, axis=0) < 0)


def test_asymptotic_tau_exponent():
    p = Params(0.07, 1.0)
    _, ta, _ = S.hopf_asymptotics(1, 0.07, p)
    assert math.log(ta / (p.gamma * (p.delta + 2)) * 192) == pytest.approx(math.sqrt(2) / 0.07, rel=1e-14)
    with pytest.raises(ValueError):
        S.hopf_asymptotics(1, 0.4, p)


# ---------------------------------------------------------------- tracking


def test_track_pair_locates_crossing(hopf1):
    tr = S.track_pair(Params(0.2, 1.0), 1, 0.9 * hopf1.tau_n, 1.1 * hopf1.tau_n)
    assert tr.tau_star == pytest.approx(hopf1.tau_n, rel=1e-10)
    assert tr.pairs[0].real < 0 < tr.pairs[-1].real
    assert np.all(np.diff(tr.pairs.imag) < 0)


def test_track_pair_errors(hopf1):
    p = Params(0.2, 1.0)
    with pytest.raises(S.NoCrossingError):
        S.track_pair(p, 1, 0.5 * hopf1.tau_n, 0.8 * hopf1.tau_n)
    with pytest.raises(S.NoComplexPairError):
        S.track_pair(p, 1, 100 * hopf1.tau_n, 200 * hopf1.tau_n)
    with pytest.raises(ValueError):
        S.track_pair(p, 1, 2.0, 1.0)


@pytest.mark.parametrize("eps,n", [(0.2, 1), (0.1, 2), (0.05, 1)])
def test_single_crossing(eps, n):
    p = Params(eps, 1.0)
    hd = S.hopf_point(p, n)
    re = []
    for tau in np.logspace(-3, 3, 10_000) * hd.tau_n:
        roots = S.cubic_roots(S.cubic_coeffs(p.with_tau(tau), hd.profile))
        assert any(r.imag == 0 and r.real < 0 for r in roots)
        z = S.complex_pair(roots)
        if z is not None:
            re.append(z.real)
    re = np.array(re)
    assert np.count_nonzero(np.diff(np.sign(re))) == 1


def test_transversality_against_finite_difference(hopf1):
    p = Params(0.2, 1.0)
    td = S.transversality(p, 1)
    h = 1e-4 * hopf1.tau_n
    hi = S.complex_pair(S.cubic_roots(S.cubic_coeffs(p.with_tau(hopf1.tau_n + h), hopf1.profile)))
    lo = S.complex_pair(S.cubic_roots(S.cubic_coeffs(p.with_tau(hopf1.tau_n - h), hopf1.profile)))
    fd = (hi - lo) / (2 * h)
    assert td.dRe_dtau == pytest.approx(fd.real, rel=1e-4)
    assert td.dIm_dtau == pytest.approx(fd.imag, rel=1e-4)
    assert td.dRe_dtau > 0 > td.dIm_dtau
    assert td.Delta > 0
    assert td.dRe_dtau == td.zeta_R / td.Delta


@pytest.mark.parametrize("eps,n", [(0.1, 1), (0.1, 2), (0.04, 1)])
def test_transversality_implicit_derivative(eps, n):
    p = Params(eps, 1.0)
    hd = S.hopf_point(p, n)
    c3, c2, c1, _ = S.cubic_coeffs(p.with_tau(hd.tau_n), hd.profile)
    lam = 1j * hd.lambda_In
    q2 = hd.profile.q ** 2
    g_tau = (lam**3 + 2 * lam**2 - 3 * q2 * lam) / p.gamma
    g_lam = 3 * c3 * lam**2 + 2 * c2 * lam + c1
    d = -g_tau / g_lam
    td = S.transversality(p, n)
    assert td.dRe_dtau == pytest.approx(d.real, rel=1e-9)
    assert td.dIm_dtau == pytest.approx(d.imag, rel=1e-9)


# ---------------------------------------------------------------- resolvent and h


def test_resolvent_closed_form(profile1):
    lam = 0.1 + 0.2j
    phi = S.resolvent_one(profile1, lam)
    q = profile1.q
    assert phi(0.0) == pytest.approx((-3 - lam + 3 * profile1.rho**2) / (lam**2 + 2 * lam - 3 * q * q))
    op = oracle.profile_operator(profile1, 10_001)
    assert oracle.resolvent_residual(op, lam, phi) < 1e-5
    far = S.mu_extremes(profile1)[0] + 10
    assert oracle.resolvent_residual(op, far, S.resolvent_one(profile1, far)) < 1e-5


def test_resolvent_poles(profile1):
    for mu in S.mu_extremes(profile1):
        with pytest.raises(S.PoleError):
            S.resolvent_one(profile1, mu)


def test_resolvent_at_hopf_frequency(hopf1, profile1):
    L = hopf1.lambda_In
    q2 = profile1.q ** 2
    phi = S.resolvent_one(profile1, 1j * L)
    x = np.linspace(0, 1, 11)
    u = profile1(x)
    expected = (-3 + 3 * u**2 - 1j * L) / (-L * L - 3 * q2 + 2j * L)
    assert np.allclose(phi(x), expected, rtol=1e-14)


def test_h_vanishes_at_hopf_point(hopf1, profile1):
    p = Params(0.2, hopf1.tau_n)
    assert abs(S.h_function(p, profile1, 1j * hopf1.lambda_In)) < 1e-10


def test_h_far_left(profile1):
    assert abs(S.h_function(Params(0.2, 6.0), profile1, -100.0) - 1) < 0.1


def test_h_poles(profile1):
    p = Params(0.2, 6.0)
    with pytest.raises(S.PoleError):
        S.h_function(p, profile1, -p.gamma / p.tau)
    with pytest.raises(S.PoleError):
        S.h_function(p, profile1, S.mu_extremes(profile1)[1])


def test_cubic_equals_scaled_h(profile1):
    p = Params(0.2, 6.0)
    coeffs = S.cubic_coeffs(p, profile1)
    q2 = profile1.q ** 2
    rng = np.random.default_rng(11)
    for lam in rng.uniform(-3, 3, 50) + 1j * rng.uniform(-3, 3, 50):
        g = S.cubic_eval(coeffs, lam)
        rhs = S.h_function(p, profile1, lam) * (p.tau * lam + p.gamma) * (lam * lam + 2 * lam - 3 * q2) / p.gamma
        assert abs(g - rhs) <= 1e-10 * max(1.0, abs(g))


# ---------------------------------------------------------------- simplicity and stability


def test_simplicity_margin(hopf1):
    p = Params(0.2, 1.0)
    m = S.simplicity_margin(p, 1)
    assert m > 0
    s = one_minus_mass2(hopf1.profile)
    assert m / hopf1.lambda_In == pytest.approx(6 * s + 4 * (p.delta + 2) * p.gamma / (p.alpha * p.beta), rel=1e-14)
    for eps in SWEEP:
        for n in (1, 2):
            assert S.simplicity_margin(Params(eps / n, 1.0), n) > 0


def test_simplicity_margin_is_imaginary_part_of_pairing(hopf1):
    # <phi, phi> - tau/(alpha beta) at the Hopf point, scaled by the squared denominator
    p = Params(0.2, hopf1.tau_n)
    prof = hopf1.profile
    L = hopf1.lambda_In
    lam = 1j * L
    den = lam * lam + 2 * lam - 3 * prof.q ** 2
    num_sq = oracle.quadrature(lambda x: ((-3 - lam + 3 * prof(x) ** 2) ** 2).real, tol=1e-13) + 1j * oracle.quadrature(
        lambda x: ((-3 - lam + 3 * prof(x) ** 2) ** 2).imag, tol=1e-13
    )
    pairing = num_sq - p.tau / (p.alpha * p.beta) * den**2
    assert pairing.imag == pytest.approx(S.simplicity_margin(p, 1), rel=1e-9)


def test_classification():
    assert S.classify_stability(Params(0.2, 6.0), 1).verdict == "stable"
    assert S.classify_stability(Params(0.2, 6.0), 1).asymptotically_stable
    assert S.classify_stability(Params(0.2, 6.7), 1).verdict == "unstable"
    for tau in (1.0, 6.0, 6.7, 50.0):
        v = S.classify_stability(Params(0.1, tau), 2)
        assert not v.asymptotically_stable
        assert v.verdict in ("metastable", "hopf-unstable")
        assert v.positive_mu_asymptotic and all(m > 0 for m in v.positive_mu_asymptotic)
    bad = S.classify_stability(Params(0.3, 6.0, alpha=0.01), 1)
    assert bad.verdict == "hypothesis-violated" and not bad.valid


def test_discrete_nonlocal_pair_at_critical_tau(hopf1, profile1):
    op = oracle.profile_operator(profile1, 2001)
    z = oracle.discrete_pair(op, Params(0.2, hopf1.tau_n), 1j * hopf1.lambda_In)
    assert abs(z.real) < 1e-3 * hopf1.lambda_In
    assert z.imag == pytest.approx(hopf1.lambda_In, rel=1e-3)
