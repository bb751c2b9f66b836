import math

import numpy as np
import pytest
from hypothesis import given, settings

from fbwaves.model import (
    ModelParams,
    asymptotic_rates,
    compute_rates,
    compute_taus,
    phi_prime,
    sgn_kappa,
)

from conftest import kappas, nus, speeds


def theta_taus(nu, kappa, S):
    # independent closed form via theta = 1/(2 nu S kappa)
    th = 1 / (2 * nu * S * kappa)
    a = math.sqrt(kappa**2 * th**2 + 1)
    b = math.sqrt((1 - kappa) ** 2 * th**2 + 1)
    return ((-th + a - b) / nu, (-th + a + b) / nu, (-th - a - b) / nu, (-th - a + b) / nu)


def test_params_reject_invalid():
    for bad in [dict(nu=0, kappa=0.5), dict(nu=1, kappa=1.0), dict(nu=1, kappa=0.0),
                dict(nu=1, kappa=0.5, S=-1), dict(nu=float("nan"), kappa=0.5)]:
        with pytest.raises(ValueError):
            ModelParams(**bad)


def test_phi_prime_branches():
    k = 0.5
    assert phi_prime(-2.0, k) == -1.0
    assert phi_prime(2.0, k) == 1.0
    assert phi_prime(0.25, k) == pytest.approx(-0.25)
    # continuous at both spinodal edges
    assert phi_prime(k, k) == pytest.approx(-(1 - k))
    assert phi_prime(-k, k) == pytest.approx(1 - k)
    u = np.linspace(-3, 3, 101)
    assert np.allclose(phi_prime(u, k), u - sgn_kappa(u, k))


def test_rates_reference_values():
    # nu = S = 1, kappa = 1/2: both quadratics reduce to golden-ratio roots
    r = compute_rates(ModelParams(1.0, 0.5, 1.0))
    g = (1 + math.sqrt(5)) / 2
    assert r.lambda_minus == pytest.approx(-g, rel=1e-14)
    assert r.lambda_plus == pytest.approx(g - 1, rel=1e-14)
    assert r.mu_minus == pytest.approx(1 - g, rel=1e-14)
    assert r.mu_plus == pytest.approx(g, rel=1e-14)


def test_taus_reference_values():
    t = compute_taus(ModelParams(1.0, 0.5, 1.0))
    assert t.tau_mm == pytest.approx(-1.0, rel=1e-13)
    assert t.tau_mp == pytest.approx(math.sqrt(5) - 1, rel=1e-13)
    assert t.tau_pm == pytest.approx(-1 - math.sqrt(5), rel=1e-13)
    assert t.tau_pp == pytest.approx(-1.0, rel=1e-13)


@settings(max_examples=300, deadline=None)
@given(nus, kappas, speeds)
def test_taus_match_theta_form(nu, kappa, S):
    t = compute_taus(ModelParams(nu, kappa, S))
    ref = theta_taus(nu, kappa, S)
    # the theta form cancels badly for large theta; compare on the scale of the largest term
    scale = (1 / (nu * S * kappa) + 2) / nu
    for got, want in zip(t, ref):
        assert abs(got - want) <= 1e-9 * scale


@settings(max_examples=500, deadline=None)
@given(nus, kappas, speeds)
def test_rate_signs_and_quadratics(nu, kappa, S):
    p = ModelParams(nu, kappa, S)
    r = compute_rates(p)
    assert r.lambda_minus < 0 < r.lambda_plus
    assert r.mu_minus < 0 < r.mu_plus
    # Vieta: product -1/nu^2 for both, sums -1/(nu^2 S) and (1-kappa)/(nu^2 S kappa)
    c = 1 / nu**2
    assert r.lambda_minus * r.lambda_plus == pytest.approx(-c, rel=1e-10)
    assert r.mu_minus * r.mu_plus == pytest.approx(-c, rel=1e-10)
    assert r.lambda_minus + r.lambda_plus == pytest.approx(-1 / (nu**2 * S), rel=1e-10)
    assert r.mu_minus + r.mu_plus == pytest.approx((1 - kappa) / (nu**2 * S * kappa), rel=1e-10)


def test_asymptotic_rates_second_order():
    errs = []
    nus_ = [0.1, 0.05, 0.025]
    for nu in nus_:
        p = ModelParams(nu, 0.5, 1.0)
        r, a = compute_rates(p), asymptotic_rates(p)
        errs.append((abs(r.lambda_plus - a.lambda_plus), abs(r.mu_minus - a.mu_minus)))
    errs = np.array(errs)
    slopes = np.polyfit(np.log(nus_), np.log(errs), 1)[0]
    assert np.all(np.abs(slopes - 2) < 0.2)
