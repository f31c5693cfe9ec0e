import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import optimize

from orlicz_lab import young
from orlicz_lab.errors import DomainError, InputError


def test_power_value():
    assert young.power(2)(3.0) == pytest.approx(9.0, rel=1e-14)


def test_entropy_at_zero():
    assert young.entropy()(0.0) == 0.0


def test_power_log_value():
    t = 1e6
    psi = young.power_log(4, 1)
    assert psi(t) == pytest.approx(t ** 4 * np.log(t), rel=5e-3)


def test_left_inverse_power():
    assert young.left_inverse(young.power(3), 8.0) == pytest.approx(2.0, rel=1e-12)


@pytest.mark.parametrize("psi", [young.power(2), young.entropy(), young.power_log(4, 1),
                                 young.exp_power(2)])
def test_left_inverse_at_zero(psi):
    assert young.left_inverse(psi, 0.0) == 0.0


def test_left_inverse_entropy_root():
    root = optimize.brentq(lambda t: (1 + t) * np.log1p(t) - t - 1.0, 0.1, 10, xtol=1e-15)
    assert young.left_inverse(young.entropy(), 1.0) == pytest.approx(root, abs=1e-10)


def test_conjugate_quadratic():
    s = np.array([0.5, 1.0, 3.0, 10.0])
    conj = young.conjugate(young.power(2))
    assert np.allclose(conj(s), s ** 2 / 4, rtol=1e-10)


@pytest.mark.parametrize("q", [1.5, 2.5, 4.0])
def test_conjugate_power_equivalent_to_dual_power(q):
    qq = q / (q - 1)
    t = np.geomspace(1e-3, 1e6, 200)
    ok, c = young.equivalent(young.conjugate(young.power(q)), young.power(qq), 8.0, t)
    assert ok


def test_entropy_exponential_pair():
    s = np.array([0.1, 1.0, 5.0, 20.0])
    assert np.allclose(young.conjugate(young.entropy())(s), np.expm1(s) - s, rtol=1e-10)


def test_lazy_conjugate_matches_direct_sup():
    psi = young.power_log(3, 1)
    conj = young.conjugate(psi)
    for s in (2.0, 30.0, 1e3):
        res = optimize.minimize_scalar(lambda lt: -(s * np.exp(lt) - psi(np.exp(lt))),
                                       bounds=(-10, 10), method="bounded",
                                       options={"xatol": 1e-12})
        assert conj(s) == pytest.approx(-res.fun, rel=1e-8)


def test_growth_power_two():
    g = young.growth_report(young.power(2), window=(1e-4, 1e4), per_decade=50)
    assert g.delta2 and g.nabla2
    assert g.ell == pytest.approx(4.0, rel=1e-9)
    assert g.p_minus == pytest.approx(2.0, abs=1e-12)
    assert g.p_plus == pytest.approx(2.0, abs=1e-12)


def test_growth_entropy_delta2_not_nabla2():
    g = young.growth_report(young.entropy(), window=(1e-4, 1e4), per_decade=50)
    assert g.delta2 and not g.nabla2


def test_growth_power_log_indices_match_secant_oracle():
    # secant slopes of t^4 log(e + t) under the finite dilation net, straight from the formula
    t = young.log_grid(1e2, 1e8, 50)
    f = lambda x: 4 * np.log(x) + np.log(np.log(np.e + x))
    slopes = np.concatenate([(f(a * t) - f(t)) / np.log(a) for a in (2.0, 4.0, 8.0, 16.0)])
    g = young.growth_report(young.power_log(4, 1), window=(1e2, 1e8), per_decade=50)
    assert g.p_minus == pytest.approx(slopes.min(), abs=1e-10)
    assert g.p_plus == pytest.approx(slopes.max(), abs=1e-10)


def test_growth_power_log_indices_near_four_far_out():
    # the local index is 4 + 1/log t asymptotically, within 0.05 of 4 once log t > 20
    g = young.growth_report(young.power_log(4, 1), window=(1e9, 1e15), per_decade=50)
    assert abs(g.p_minus - 4) < 0.05 and abs(g.p_plus - 4) < 0.05


def test_precedes_t2_t4():
    t = np.geomspace(1.0, 1e8, 100)
    pr = young.precedes(young.power(2), young.power(4), 8.0, t)
    assert pr.holds and pr.c == pytest.approx(1.0)


def test_precedes_power_and_power_log():
    t = np.geomspace(1e2, 1e8, 100)
    pr = young.precedes(young.power(3), young.power_log(3, 1), 8.0, t)
    assert pr.holds and 1.0 <= pr.c < 1.5


def test_precedes_fails_for_faster_growth():
    t = np.geomspace(1e2, 1e8, 100)
    assert not young.precedes(young.power(4), young.power(3), 8.0, t).holds


@pytest.mark.parametrize("psi", [young.power(3), young.power_log(4, 1), young.entropy(),
                                 young.power_loglog(3, 1)])
def test_biconjugate(psi):
    t = np.geomspace(1e-2, 1e4, 80)
    ok, c = young.equivalent(young.conjugate(young.conjugate(psi)), psi, 8.0, t)
    assert ok and c <= 1 + 1e-6


def test_from_spec_and_errors():
    psi = young.from_spec({"family": "power-log", "q": 4, "alpha": 1})
    assert psi(10.0) == pytest.approx(young.power_log(4, 1)(10.0))
    with pytest.raises(InputError):
        young.from_spec({"family": "power", "q": 0.5})
    with pytest.raises(InputError):
        young.from_spec({"family": "nope"})
    with pytest.raises(InputError):
        young.from_spec({"family": "power"})


def test_negative_argument_rejected():
    with pytest.raises(DomainError):
        young.power(2)(-1.0)


def test_validate_catalog():
    v = young.validate(young.power_log(3, 1))
    assert all(bool(x) for x in v.values() if isinstance(x, (bool, np.bool_)))


@given(q=st.floats(1.2, 8.0), t=st.floats(1e-3, 1e3), lam=st.floats(1.01, 50.0))
def test_power_homogeneity(q, t, lam):
    psi = young.power(q)
    assert psi(lam * t) == pytest.approx(lam ** q * psi(t), rel=1e-10)


@given(q=st.floats(1.2, 6.0), alpha=st.floats(-0.9, 3.0), s=st.floats(1e-4, 1e6))
def test_left_inverse_round_trip(q, alpha, s):
    psi = young.power_log(q, alpha)
    assert psi(young.left_inverse(psi, s)) == pytest.approx(s, rel=1e-9)


@given(q=st.floats(1.3, 5.0), s=st.floats(1e-2, 1e3), t=st.floats(1e-2, 1e3))
def test_young_inequality(q, s, t):
    psi = young.power_log(q, 1)
    conj = young.conjugate(psi)
    assert s * t <= (psi(t) + conj(s)) * (1 + 1e-9)


@given(q=st.floats(1.2, 6.0), t1=st.floats(1e-3, 1e3), t2=st.floats(1e-3, 1e3))
def test_monotone(q, t1, t2):
    psi = young.power_loglog(q, 1.0)
    lo, hi = sorted((t1, t2))
    assert psi(lo) <= psi(hi)
