import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from selfgrav.errors import DomainError, NumericsError
from selfgrav.kernels import GravityKernel, kernel_eval
from selfgrav.units import PhysicalParams, natural_scales
from selfgrav.variational import (SIGMA_IDG_DEEP_COEFF, SIGMA_NEWTON_COEFF,
                                  SpreadResult, _denergy, _energy, classify_regime,
                                  energy_idg, energy_newton, energy_yukawa,
                                  minimize_spread, pair_energy_quadrature,
                                  sigma_idg_asymptotic, sigma_newton_closed_form,
                                  sweep)

SQ2PI = math.sqrt(2.0 / math.pi)


def pair_energy_oracle(sigma, kernel_func):
    """Independent reduction of the 6D pair integral to one radial quadrature.

    The displacement of two independent packet samples is Gaussian with
    per-axis variance sigma^2; integrate the kernel against that density.
    """
    def f(r):
        p = (2 * math.pi * sigma**2) ** -1.5 * math.exp(-r * r / (2 * sigma**2))
        return 4 * math.pi * r * r * p * kernel_func(r)
    val, _ = quad(f, 0, 15 * sigma, limit=300, epsabs=1e-14, epsrel=1e-13)
    return val


# ---------------------------------------------------------------------------
# closed forms

def test_newton_energy_shape_and_minimum():
    s_star = SIGMA_NEWTON_COEFF
    assert s_star == pytest.approx(1.87997120597325037681182396361, rel=1e-15)
    # stationary and a minimum
    assert _denergy("newtonian", s_star) == pytest.approx(0.0, abs=1e-15)
    assert energy_newton(s_star) < energy_newton(0.9 * s_star)
    assert energy_newton(s_star) < energy_newton(1.1 * s_star)
    # limits
    assert energy_newton(1e9) < 0 and abs(energy_newton(1e9)) < 1e-8
    assert energy_newton(1e-6) > 1e10


def test_idg_energy_reaches_newtonian_at_large_beta():
    for s in (0.3, 1.0, 7.0):
        assert energy_idg(s, 1e9) == pytest.approx(energy_newton(s), rel=1e-12)


def test_idg_energy_frozen_value():
    # E(1, 1) = 3/4 - sqrt(2/pi)/sqrt(3), 20-digit reference
    assert energy_idg(1.0, 1.0) == pytest.approx(0.28934113403821936098, rel=1e-14)


def test_idg_energy_matches_pair_quadrature():
    for s in (0.2, 1.0, 3.0):
        for beta in (0.1, 1.0, 8.0):
            k = GravityKernel(model="idg", beta=beta)
            expected = 0.75 / s**2 + pair_energy_oracle(s, lambda r: kernel_eval(k, r))
            assert energy_idg(s, beta) == pytest.approx(expected, rel=1e-10)


@settings(max_examples=120, deadline=None, derandomize=True)
@given(s=st.floats(1e-4, 1e4), beta=st.floats(1e-6, 1e8))
def test_idg_energy_never_below_newtonian(s, beta):
    assert energy_idg(s, beta) >= energy_newton(s)


def test_yukawa_energy_limits():
    s = 1.3
    assert energy_yukawa(s, 1e10) == pytest.approx(energy_newton(s), rel=1e-12)
    # mu -> 0: 1/r coupling scaled by 4/3
    tiny = energy_yukawa(s, 1e-9)
    assert tiny == pytest.approx(0.75 / s**2 - (4.0 / 3.0) * SQ2PI / s, rel=1e-8)


def test_yukawa_energy_below_newtonian():
    for s in (0.3, 1.0, 5.0):
        for mu in (0.05, 1.0, 30.0):
            assert energy_yukawa(s, mu) <= energy_newton(s)


def test_yukawa_closed_form_agrees_with_quadrature_route():
    # quadrature is the source of truth for this model
    for s in (0.4, 1.0, 2.7):
        for mu in (0.1, 1.0, 12.0):
            a = energy_yukawa(s, mu, method="closed")
            b = energy_yukawa(s, mu, method="quadrature")
            assert a == pytest.approx(b, rel=1e-10)
    with pytest.raises(DomainError):
        energy_yukawa(1.0, 1.0, method="guess")


def test_pair_energy_quadrature_matches_oracle():
    k = GravityKernel(model="yukawa", mu=2.3)
    got = pair_energy_quadrature(k, 0.8)
    assert got == pytest.approx(-1.05577862865245433270, rel=1e-10)
    assert got == pytest.approx(pair_energy_oracle(0.8, lambda r: kernel_eval(k, r)), rel=1e-10)


def test_denergy_is_derivative_of_energy():
    h = 1e-6
    cases = [("newtonian", {}), ("idg", {"beta": 0.7}), ("idg", {"beta": 40.0}),
             ("yukawa", {"mu": 0.3}), ("yukawa", {"mu": 15.0})]
    for model, kw in cases:
        for s in (0.4, 1.9, 6.0):
            num = (_energy(model, s + h, **kw) - _energy(model, s - h, **kw)) / (2 * h)
            assert _denergy(model, s, **kw) == pytest.approx(num, rel=2e-6), (model, kw, s)


# ---------------------------------------------------------------------------
# stationary widths

def test_minimize_matches_reference_cells():
    got = minimize_spread(PhysicalParams(mass_kg=1e-14)).sigma_m
    assert got == pytest.approx(3.02e-16, rel=0.05)
    got = minimize_spread(PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=0.004)).sigma_m
    assert got == pytest.approx(1.01e-7, rel=0.05)
    res = minimize_spread(PhysicalParams(mass_kg=1e-16, model="idg", ms_ev=1e9))
    assert res.sigma_m == pytest.approx(3.02e-10, rel=0.05)
    assert res.regime == "newtonian_limit"


def test_minimize_result_contract():
    res = minimize_spread(PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=1e9))
    assert isinstance(res, SpreadResult)
    assert res.residual < 1e-12
    assert res.bracket[0] < res.sigma_natural < res.bracket[1]
    assert res.energy_natural == pytest.approx(energy_idg(res.sigma_natural, res.beta), rel=1e-12)
    assert res.iterations > 0


def test_newton_closed_form_values():
    p = PhysicalParams(mass_kg=1e-14)
    got = sigma_newton_closed_form(p)
    assert got == pytest.approx(3.132548440875608e-16, rel=1e-12)   # pinned CODATA evaluation
    assert got == pytest.approx(3.02e-16, rel=0.05)                 # published reference
    # m^-3 scaling
    big = sigma_newton_closed_form(PhysicalParams(mass_kg=1e-10))
    assert got / big == pytest.approx(1e12, rel=1e-10)
    # same stationary point as the solver
    assert minimize_spread(p).sigma_m == pytest.approx(got, rel=1e-10)


def test_asymptotic_width():
    p = PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=0.004)
    got = sigma_idg_asymptotic(p)
    assert got == pytest.approx(1.01e-7, rel=0.05)
    # algebraic identity with the newtonian closed form
    scales = natural_scales(p)
    sigma_n = sigma_newton_closed_form(p)
    ms_inv_length = 0.004 / scales.hbar_c_ev_m
    alt = (2 * math.sqrt(2)) ** 0.25 * sigma_n**0.25 * (1 / ms_inv_length) ** 0.75
    assert got == pytest.approx(alt, rel=1e-12)
    # m^{-3/4} scaling
    p10 = PhysicalParams(mass_kg=1e-13, model="idg", ms_ev=0.004)
    assert sigma_idg_asymptotic(p10) == pytest.approx(got / 10**0.75, rel=1e-12)
    with pytest.raises(DomainError):
        sigma_idg_asymptotic(PhysicalParams(mass_kg=1e-14))


def test_asymptotic_agrees_with_full_solution_in_deep_regime():
    # beta * sigma < 0.2 requires beta < (0.2 / deep coeff)^4 ~ 3e-4
    for beta_target in (1e-8, 1e-6, 1e-5, 2e-4):
        p = _params_for_beta(beta_target)
        res = minimize_spread(p)
        assert res.beta * res.sigma_natural < 0.2
        assert res.sigma_m == pytest.approx(sigma_idg_asymptotic(p), rel=0.01)


def _params_for_beta(beta_target, mass_kg=1e-14):
    scales = natural_scales(PhysicalParams(mass_kg=mass_kg))
    ms_ev = beta_target / scales.l0_m * scales.hbar_c_ev_m
    return PhysicalParams(mass_kg=mass_kg, model="idg", ms_ev=ms_ev)


def test_spread_ordering_idg_above_newton_above_yukawa():
    p_n = PhysicalParams(mass_kg=1e-14)
    s_n = minimize_spread(p_n).sigma_m
    scales = natural_scales(p_n)
    for scale_inv_m in (1e10, 1e15, 5e15, 1e17):
        p_i = PhysicalParams(mass_kg=1e-14, model="idg",
                             ms_ev=scale_inv_m * scales.hbar_c_ev_m)
        p_y = PhysicalParams(mass_kg=1e-14, model="yukawa", yukawa_mu_inv_m=scale_inv_m)
        assert minimize_spread(p_i).sigma_m >= s_n * (1 - 1e-12)
        assert minimize_spread(p_y).sigma_m <= s_n * (1 + 1e-12)


def test_unit_rescaling_invariance():
    p = PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=1e9)
    base = minimize_spread(p)
    l0 = natural_scales(p).l0_m
    for factor in (1e-3, 17.0, 1e6):
        other = minimize_spread(p, length_unit_m=factor * l0)
        assert other.sigma_m == pytest.approx(base.sigma_m, rel=1e-10)
        assert other.energy_natural == pytest.approx(base.energy_natural, rel=1e-10)


def test_regime_classification():
    assert classify_regime(0.5) == "deep_nonlocal"
    assert classify_regime(5.0) == "crossover"
    assert classify_regime(200.0) == "newtonian_limit"
    deep = minimize_spread(PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=0.004))
    assert deep.regime == "deep_nonlocal"
    cross = minimize_spread(PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=1e9))
    assert cross.regime == "crossover"


# ---------------------------------------------------------------------------
# sweeps

def test_sweep_rows_ordered_and_complete():
    masses = [1e-12, 1e-14]
    templates = [PhysicalParams(mass_kg=1.0),
                 PhysicalParams(mass_kg=1.0, model="idg", ms_ev=1.0)]
    rows = sweep(masses, templates)
    assert [(r.mass_kg, r.model) for r in rows] == [
        (1e-12, "newtonian"), (1e-12, "idg"), (1e-14, "newtonian"), (1e-14, "idg")]
    assert all(r.result is not None and r.error is None for r in rows)


def test_sweep_requires_masses():
    with pytest.raises(DomainError):
        sweep([], PhysicalParams(mass_kg=1.0))


def test_sweep_captures_per_row_failures():
    rows = sweep([1e-14, -1.0], PhysicalParams(mass_kg=1.0))
    assert rows[0].result is not None
    assert rows[1].result is None and rows[1].error


def test_sweep_single_template_accepted():
    rows = sweep([1e-14], PhysicalParams(mass_kg=1.0))
    assert len(rows) == 1


def test_fig1_style_monotonicity_and_merge():
    masses = np.geomspace(1e-18, 1e-8, 26)
    for ms in (0.004, 1e-2, 1e-1):
        template = PhysicalParams(mass_kg=1.0, model="idg", ms_ev=ms)
        rows = sweep(list(masses), template)
        sig_idg = np.array([r.result.sigma_m for r in rows])
        assert np.all(np.diff(sig_idg) < 0)     # spread shrinks with mass
        sig_n = np.array([sigma_newton_closed_form(PhysicalParams(mass_kg=m)) for m in masses])
        assert np.all(sig_idg >= sig_n * (1 - 1e-12))
        # merge onto the newtonian curve once beta*sigma is comfortably large;
        # the residual offset falls off as ~3/(beta*sigma)^2
        prod = np.array([r.result.beta * r.result.sigma_natural for r in rows])
        merged = prod > 20
        if merged.any():
            assert np.all(np.abs(sig_idg[merged] - sig_n[merged]) / sig_n[merged] < 0.01)
        deep = prod > 100
        if deep.any():
            assert np.all(np.abs(sig_idg[deep] - sig_n[deep]) / sig_n[deep] < 1e-3)


def test_ordering_in_nonlocal_scale():
    # larger nonlocal scale, smaller spread, never below newtonian
    mass = 1e-13
    sig = [minimize_spread(PhysicalParams(mass_kg=mass, model="idg", ms_ev=ms)).sigma_m
           for ms in (0.004, 1.0, 1e9, 1e14)]
    assert all(a >= b * (1 - 1e-12) for a, b in zip(sig, sig[1:]))
    assert sig[-1] >= sigma_newton_closed_form(PhysicalParams(mass_kg=mass)) * (1 - 1e-12)
