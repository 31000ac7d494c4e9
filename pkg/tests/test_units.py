import math

import pytest

from selfgrav.errors import DomainError
from selfgrav.units import (EV_J, G_SI, HBAR_J_S, HBARC_EV_M, PhysicalParams,
                            constants_table, length_from_si, length_to_si,
                            natural_scales)
from selfgrav.variational import SIGMA_NEWTON_COEFF, minimize_spread, sigma_newton_closed_form


def test_gravitational_length_direct_evaluation():
    # independent constant arithmetic, spelled out
    expected = (1.054571817e-34) ** 2 / (6.67430e-11 * (1e-14) ** 3)
    s = natural_scales(PhysicalParams(mass_kg=1e-14))
    assert s.l0_m == pytest.approx(expected, rel=1e-12)
    assert s.l0_m == pytest.approx(1.67e-16, rel=5e-3)


def test_nonlocal_length_for_milli_ev_scale():
    s = natural_scales(PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=0.004))
    nonlocal_length = HBARC_EV_M / 0.004
    assert nonlocal_length == pytest.approx(4.93e-5, rel=2e-3)
    assert s.beta == pytest.approx(0.004 / HBARC_EV_M * s.l0_m, rel=1e-14)


def test_doubling_mass_shrinks_l0_by_eight():
    a = natural_scales(PhysicalParams(mass_kg=1e-14)).l0_m
    b = natural_scales(PhysicalParams(mass_kg=2e-14)).l0_m
    assert a / b == pytest.approx(8.0, rel=1e-12)


def test_length_round_trip():
    s = natural_scales(PhysicalParams(mass_kg=3.7e-13))
    for x in (1.0, 0.0, 2.5e-7, 9.1e11):
        assert length_from_si(length_to_si(x, s), s) == pytest.approx(x, rel=1e-12, abs=1e-300)


def test_length_to_si_basics():
    s = natural_scales(PhysicalParams(mass_kg=1e-14))
    assert length_to_si(1.0, s) == s.l0_m
    assert length_to_si(0.0, s) == 0.0


def test_newton_spread_is_scaled_l0():
    p = PhysicalParams(mass_kg=1e-14)
    s = natural_scales(p)
    assert length_to_si(SIGMA_NEWTON_COEFF, s) == pytest.approx(sigma_newton_closed_form(p), rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(mass_kg=-1.0),
    dict(mass_kg=0.0),
    dict(mass_kg=1e-14, model="idg"),                       # missing ms_ev
    dict(mass_kg=1e-14, model="idg", ms_ev=-2.0),
    dict(mass_kg=1e-14, model="yukawa"),                    # missing mu
    dict(mass_kg=1e-14, model="yukawa", yukawa_mu_inv_m=0.0),
    dict(mass_kg=1e-14, model="elsewhere"),
])
def test_invalid_params_raise(kwargs):
    with pytest.raises(DomainError):
        PhysicalParams(**kwargs)


def test_constants_table_pinned():
    t = constants_table()
    assert t["hbar_J_s"] == HBAR_J_S == 1.054571817e-34
    assert t["G_si_m3_kg_s2"] == G_SI == 6.67430e-11
    assert t["eV_J"] == EV_J == 1.602176634e-19
    assert t["hbar_c_eV_m"] == pytest.approx(1.9732698e-7, rel=1e-7)
    assert t["convention"] == "CODATA 2018"


def test_mass_rescaling_maps_solutions_by_l0():
    # same dimensionless coupling: (m, Ms) and (kappa m, kappa^3 Ms)
    kappa = 3.0
    p1 = PhysicalParams(mass_kg=1e-14, model="idg", ms_ev=1.0)
    p2 = PhysicalParams(mass_kg=kappa * 1e-14, model="idg", ms_ev=kappa**3 * 1.0)
    s1, s2 = natural_scales(p1), natural_scales(p2)
    assert s1.beta == pytest.approx(s2.beta, rel=1e-12)
    r1, r2 = minimize_spread(p1), minimize_spread(p2)
    assert r1.sigma_natural == pytest.approx(r2.sigma_natural, rel=1e-12)
    assert r1.sigma_m / r2.sigma_m == pytest.approx(s1.l0_m / s2.l0_m, rel=1e-10)


def test_natural_scales_mu():
    p = PhysicalParams(mass_kg=1e-14, model="yukawa", yukawa_mu_inv_m=2.0e15)
    s = natural_scales(p)
    assert s.mu == pytest.approx(2.0e15 * s.l0_m, rel=1e-14)
