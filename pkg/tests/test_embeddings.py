import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from orlicz_lab import embeddings as emb
from orlicz_lab import young
from orlicz_lab.errors import FitError, PreconditionError

WINDOW = (1e3, 1e8)


@pytest.mark.parametrize("s", [1e-6, 0.3, 1.0, 40.0])
def test_I0_square(s):
    val, verdict = emb.integral_I0(young.power(2), 3, s)
    assert verdict == "converges"
    assert val == pytest.approx(2 * np.sqrt(s), rel=1e-8)
    quad, _ = integrate.quad(lambda t: t ** -0.5, 0, s)
    assert val == pytest.approx(quad, rel=1e-8)


def test_I0_vanishes_at_zero():
    vals = [emb.integral_I0(young.power(1.7), 3, s)[0] for s in (1e-2, 1e-4, 1e-8)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-3


def test_I0_entropy_quadrature_oracle():
    psi = young.entropy()
    val, verdict = emb.integral_I0(psi, 3, 1.0)
    f = lambda t: np.sqrt(t / ((1 + t) * np.log1p(t) - t))
    # substitute t = x^2 to remove the t^(-1/2) endpoint singularity
    quad, _ = integrate.quad(lambda x: 2 * x * f(x * x), 0, 1, epsabs=0, epsrel=1e-11)
    assert verdict == "converges" and val == pytest.approx(quad, rel=1e-7)


def test_I0_diverges_for_fast_growth():
    val, verdict = emb.integral_I0(young.power(4), 3, 1.0)
    assert verdict == "diverges" and np.isinf(val)


def test_sobolev_conjugate_square_closed_form():
    psid = emb.sobolev_conjugate(young.power(2), 3)
    t = np.array([0.5, 2.0, 10.0, 1e3])
    assert np.allclose(psid(t), t ** 6 / 16, rtol=1e-4)
    fit = emb.fit_asymptotics(psid, WINDOW, basis=())
    assert fit.exponent == pytest.approx(6.0, abs=0.02)


@pytest.mark.parametrize("q", [1.5, 2.2, 2.5])
def test_sobolev_conjugate_power_exponent(q):
    fit = emb.fit_asymptotics(emb.sobolev_conjugate(young.power(q), 3), WINDOW, basis=())
    assert fit.exponent == pytest.approx(3 * q / (3 - q), abs=1e-2)


def test_sobolev_conjugate_limiting_case_exp_type():
    # psi = t^3 (log t)^0.5 (quadratic near 0): log psi_d(t) grows like t^(3/1.5) = t^2
    psid = emb.sobolev_conjugate(young.quadratic_floor(young.power_log(3, 0.5)), 3)
    lo, hi = psid.hull
    t = np.geomspace(max(1e3, lo), min(hi, 1e150), 400)
    t = t[np.isfinite(psid.log_eval(np.log(t), strict=False))]
    lp = psid.log_eval(np.log(t))
    sel = t > t[-1] ** 0.5  # fit on the upper half in log t
    inner = np.polyfit(np.log(t[sel]), np.log(lp[sel]), 1)[0]
    assert inner == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("q", [4.0, 6.0])
def test_modulus_power(q):
    mod = emb.continuity_modulus(young.power(q), 3)
    fit = emb.fit_asymptotics(lambda t: mod(1 / t), WINDOW, basis=())
    assert fit.exponent == pytest.approx(-(1 - 3 / q), abs=1e-2)


def test_modulus_limiting_case_log_decay():
    # psi = t^3 (log t)^4: varpi(r) ~ (-log r)^(-(4 - 2)/3); the correction decays like
    # 1/log log(1/r), so the fitted slope approaches -2/3 monotonically and slowly
    mod = emb.continuity_modulus(young.power_log(3, 4), 3)
    slopes = []
    for lo, hi in ((1e10, 1e40), (1e40, 1e100), (1e100, 1e300)):
        t = np.geomspace(lo, hi, 200)
        slopes.append(np.polyfit(np.log(np.log(t)), np.log(mod(1 / t)), 1)[0])
    err = np.abs(np.array(slopes) + 2 / 3)
    assert np.all(np.diff(err) < 0)
    assert err[-1] < 0.03


def test_modulus_precondition():
    with pytest.raises(PreconditionError):
        emb.continuity_modulus(young.power(3), 3)


@pytest.mark.parametrize("q", [4.0, 5.0, 6.0])
def test_associated_power_exponent(q):
    g = emb.associated_space(young.power(q), 3)
    fit = emb.fit_asymptotics(g, (1e2, 1e8), basis=())
    assert fit.exponent == pytest.approx(3 * q / (3 + q), abs=1e-2)


def test_associated_power_log():
    eps, alpha = 1.0, 1.0
    g = emb.associated_space(young.power_log(3 + eps, alpha), 3)
    fit = emb.fit_asymptotics(g, (1e3, 1e8), basis=("log", "loglog"))
    assert fit.exponent == pytest.approx(3 * (3 + eps) / (6 + eps), abs=1e-2)
    assert fit.log_power == pytest.approx(alpha * 3 / (6 + eps), abs=5e-2)


def test_associated_matches_shortcut():
    psi = young.power_log(4, 1)
    g = emb.associated_space(psi, 3)
    t = np.geomspace(1e2, 1e8, 40)
    ratio = young.left_inverse(g, t) / emb.gamma_inverse_shortcut(psi, 3, t)
    assert 1 / 8 <= ratio.min() and ratio.max() <= 8


def test_fit_exact_power():
    fit = emb.fit_asymptotics(lambda t: t ** 3, WINDOW)
    assert fit.exponent == pytest.approx(3.0, abs=1e-9)
    assert abs(fit.log_power) < 1e-8 and abs(fit.loglog_power) < 1e-8
    assert fit.residual < 1e-10


def test_fit_power_log_synthetic():
    fit = emb.fit_asymptotics(lambda t: t ** 2 * np.log(t) ** 1.5, WINDOW,
                              basis=("log", "loglog"))
    assert fit.exponent == pytest.approx(2.0, abs=1e-3)
    assert fit.log_power == pytest.approx(1.5, abs=1e-3)


def test_fit_decaying_perturbation():
    fit = emb.fit_asymptotics(lambda t: t ** 2 * (1 + 1 / t), (1e4, 1e8), basis=())
    assert fit.exponent == pytest.approx(2.0, abs=1e-4)


def test_fit_window_too_short():
    with pytest.raises(FitError):
        emb.fit_asymptotics(lambda t: t, (1e3, 1e4))


def test_table_cells_enumerate_parameter_set():
    cells = emb.table_cells(3)
    assert len(cells) > 0


@settings(max_examples=8)
@given(q=st.floats(1.3, 2.7))
def test_sobolev_conjugate_exponent_property(q):
    fit = emb.fit_asymptotics(emb.sobolev_conjugate(young.power(q), 3), WINDOW, basis=())
    assert fit.exponent == pytest.approx(3 * q / (3 - q), rel=2e-3)


@settings(max_examples=8)
@given(q=st.floats(3.3, 8.0))
def test_associated_below_psi_property(q):
    # gamma grows slower than psi: gamma is dominated by psi at large t
    psi = young.power(q)
    g = emb.associated_space(psi, 3)
    t = np.geomspace(1e2, 1e8, 30)
    assert young.precedes(g, psi, 8.0, t).holds
