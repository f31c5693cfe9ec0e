import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize

from orlicz_lab import ri_spaces as R
from orlicz_lab import young
from orlicz_lab.errors import DomainError, InputError
from orlicz_lab.fields import RearrangedProfile


def test_fundamental_lebesgue_and_lorentz():
    for t in (0.01, 0.3, 1.0):
        assert R.fundamental_function(R.RISpace.lebesgue(3), t) == pytest.approx(t ** (1 / 3))
        p, q = 3.0, 2.0
        assert R.fundamental_function(R.RISpace.lorentz(p, q), t) == \
            pytest.approx((p / q) ** (1 / q) * t ** (1 / p), rel=1e-12)


def test_fundamental_orlicz_bisection_oracle():
    psi = young.power_log(3, 1)
    X = R.RISpace.orlicz(psi)
    for t in (0.01, 0.5):
        lam = optimize.brentq(lambda lam: t * psi(1 / lam) - 1.0, 1e-6, 1e6, xtol=1e-14)
        assert R.fundamental_function(X, t) == pytest.approx(lam, rel=1e-8)
        assert lam == pytest.approx(1 / young.left_inverse(psi, 1 / t), rel=1e-8)


def test_fundamental_domain():
    with pytest.raises(DomainError):
        R.fundamental_function(R.RISpace.lebesgue(2), 0.0)
    with pytest.raises(DomainError):
        R.fundamental_function(R.RISpace.lebesgue(2), 2.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_boyd_lebesgue(p):
    b = R.boyd_indices(R.RISpace.lebesgue(p))
    assert b.ok
    assert b.lower == pytest.approx(1 / p, abs=1e-2) and b.upper == pytest.approx(1 / p, abs=1e-2)


@pytest.mark.parametrize("p,q", [(2, 1), (3, 3), (4, 2), (3, np.inf)])
def test_boyd_lorentz(p, q):
    b = R.boyd_indices(R.RISpace.lorentz(p, q))
    assert abs(b.lower - 1 / p) <= 2e-2 and abs(b.upper - 1 / p) <= 2e-2


def test_boyd_insufficient_battery():
    one = RearrangedProfile(np.array([1.0]), np.array([1.0]))
    b = R.boyd_indices(R.RISpace.lebesgue(2), battery=[one])
    assert not b.ok and "insufficient" in b.flag


def test_stieltjes_indicator():
    prof = RearrangedProfile(np.array([1.0]), np.array([1.0]))
    S = R.stieltjes(prof, 3.0, 1.0)
    assert S(1.0) == pytest.approx(1.0, abs=1e-14)
    t = np.array([1e-12, 1e-6, 0.1, 0.5])
    assert np.allclose(S(t), 3 - 2 * t ** (1 / 3), rtol=1e-12)
    assert S(1e-15) == pytest.approx(3.0, abs=1e-4)


def test_stieltjes_random_step_quadrature():
    rng = np.random.default_rng(7)
    b = np.sort(rng.uniform(0, 1, 8))
    b[-1] = 1.0
    v = np.sort(rng.uniform(0.1, 3, 8))[::-1]
    prof = RearrangedProfile(b, v)
    a = 2.5
    S = R.stieltjes(prof, a, 1.0)
    f = lambda s: prof(np.array([s]))[0]
    for t in (0.05, 0.3, 0.77):
        head, _ = integrate.quad(f, 0, t, points=b[b < t], epsabs=0, epsrel=1e-13, limit=200)
        tail, _ = integrate.quad(lambda s: f(s) * s ** (1 / a - 1), t, 1.0, points=b[b > t],
                                 epsabs=0, epsrel=1e-13, limit=200)
        assert S(t) == pytest.approx(t ** (1 / a - 1) * head + tail, rel=1e-10)


def test_stieltjes_errors():
    prof = RearrangedProfile(np.array([1.0]), np.array([1.0]))
    with pytest.raises(InputError):
        R.stieltjes(prof, 1.0)
    with pytest.raises(DomainError):
        R.stieltjes(prof, 3.0, 1.0)(0.0)


def test_power_norm_against_numeric_norm():
    X = R.RISpace.lorentz(4, 2)
    prof = R._sample_profile(lambda s: s ** -0.1, 1.0, n=4000, floor=1e-14)
    assert X.power_norm(0.1, 1.0) == pytest.approx(X.norm(prof), rel=1e-2)
    assert np.isinf(X.power_norm(0.3, 1.0))


def test_associate_exponents():
    A = R.RISpace.lorentz(4, 1).associate()
    assert A.p == pytest.approx(4 / 3) and np.isinf(A.q)


@pytest.mark.parametrize("p,q,expected", [(4, 2, True), (3.5, np.inf, True), (3, 1, True),
                                          (3, 2, False), (2.5, 1, False)])
def test_class_c_lorentz(p, q, expected):
    assert R.class_c_check(R.RISpace.lorentz(p, q), 3).overall is expected


def test_class_c_report_fields():
    cc = R.class_c_check(R.RISpace.lorentz(3, 2), 3)
    assert cc.c_i and not cc.c_iv
    d = cc.as_dict()
    assert set(d) >= {"C-i", "C-ii", "C-iii", "C-iv", "overall"}


@pytest.mark.parametrize("name", ["lebesgue", "oneil", "trudinger", "double-exponential"])
def test_classical_pairs(name):
    pair = R.classical_pairs(3, 1.0)[name]
    assert R.cianchi_conditions(*pair, 3, 1.0).passed


def test_mismatch_pair_rejected():
    assert not R.cianchi_conditions(*R.mismatch_pair(3, 1.0), 3, 1.0).passed


def test_double_exponential_literal_log_power_is_not_a_pair():
    # the log power (d - alpha)/d on the Young function itself is too small:
    # the domination psi <= gamma_{d/alpha} fails against exp(exp(s^beta))
    gamma = young.power_log(3.0, 2.0 / 3.0, shift=1.0)
    rep = R.cianchi_conditions(gamma, young.double_exp(1.5), 3, 1.0)
    assert not rep.passed


def test_wrong_pairs_rejected():
    for gamma, psi in ((young.power(1.5), young.power(6.5)),
                       (R._oneil_gamma(3, 1.0), young.power(1.8)),
                       (young.power(3.0), young.exp_power(1.7))):
        assert not R.cianchi_conditions(gamma, psi, 3, 1.0).passed


def test_lebesgue_pair_not_applicable():
    rep = R.classical_pairs_suite(3, 1.0, p=3.5)
    assert "lebesgue" in rep.provenance and rep.passed


def test_space_validation():
    with pytest.raises(InputError):
        R.RISpace.lebesgue(1.0)
    with pytest.raises(InputError):
        R.RISpace.lorentz(3, 0.5)
    with pytest.raises(InputError):
        R.RISpace("sobolev")


@settings(max_examples=15)
@given(p=st.floats(1.2, 8.0), q=st.floats(1.0, 8.0), t=st.floats(1e-4, 1.0),
       s=st.floats(1.5, 50.0))
def test_lorentz_dilation_exact(p, q, t, s):
    # ||f(./s)|| = s^(1/p) ||f|| on indicators
    X = R.RISpace.lorentz(p, q, measure_total=np.inf)
    prof = RearrangedProfile(np.array([t]), np.array([1.0]))
    assert X.norm(R.dilate(prof, s)) == pytest.approx(s ** (1 / p) * X.norm(prof), rel=1e-10)


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), a=st.floats(1.2, 6.0))
def test_stieltjes_majorizes_profile(seed, a):
    # S_a f >= f for nonincreasing f: the head average alone is at least f(t)
    rng = np.random.default_rng(seed)
    b = np.concatenate([np.sort(rng.uniform(0.01, 0.99, 5)), [1.0]])
    v = np.sort(rng.uniform(0.0, 2.0, 6))[::-1]
    prof = RearrangedProfile(b, v)
    S = R.stieltjes(prof, a, 1.0)
    t = np.linspace(0.02, 1.0, 30)
    assert np.all(S(t) >= prof(t) * t ** (1 / a) - 1e-12)
