"""Unit handling: SI-facing inputs, dimensionless internals.

All solvers work in a gravitational length unit

    l0 = hbar^2 / (G m^3)

so that widths are s = sigma/l0 and the only surviving dimensionless
couplings are beta = (nonlocal scale as inverse length) * l0 and, for the
Yukawa model, mu_tilde = mu * l0.  Energies are then measured in units of
G^2 m^5 / hbar^2.  Raw SI magnitudes for interesting masses are of order
1e-28 m, which would wreck floating-point conditioning; the rescaled
problem is O(1) up to the physical regime spread.

Constants are pinned to CODATA 2018 and echoed verbatim into every output
manifest, because reproduced reference numbers depend on the constant
choices made when those numbers were first computed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

# CODATA 2018.  h and e are exact SI definitions; G is the recommended value.
HBAR_J_S = 1.054571817e-34       # reduced Planck constant, J s (derived from exact h)
G_SI = 6.67430e-11               # Newton constant, m^3 kg^-1 s^-2
C_M_S = 299792458.0              # speed of light, m/s (exact)
EV_J = 1.602176634e-19           # electron volt, J (exact)
HBARC_EV_M = HBAR_J_S * C_M_S / EV_J   # hbar*c = 1.9732698...e-7 eV m

MODELS = ("newtonian", "idg", "yukawa")


def constants_table() -> dict:
    """Pinned constant table, embedded in every run manifest."""
    return {
        "hbar_J_s": HBAR_J_S,
        "G_si_m3_kg_s2": G_SI,
        "c_m_s": C_M_S,
        "eV_J": EV_J,
        "hbar_c_eV_m": HBARC_EV_M,
        "convention": "CODATA 2018",
    }


@dataclass(frozen=True)
class PhysicalParams:
    """SI-facing problem definition.

    mass_kg is the particle (or condensate) mass.  ms_ev is the nonlocal
    gravity scale in eV, required for the "idg" model.  yukawa_mu_inv_m is
    the Yukawa range parameter in inverse meters, required for "yukawa".
    """

    mass_kg: float
    model: str = "newtonian"
    ms_ev: float | None = None
    yukawa_mu_inv_m: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown gravity model {self.model!r}, expected one of {MODELS}")
        if not (self.mass_kg > 0):
            raise DomainError(f"mass_kg must be positive, got {self.mass_kg!r}")
        if self.model == "idg":
            if self.ms_ev is None or not (self.ms_ev > 0):
                raise DomainError("idg model requires ms_ev > 0")
        if self.model == "yukawa":
            if self.yukawa_mu_inv_m is None or not (self.yukawa_mu_inv_m > 0):
                raise DomainError("yukawa model requires yukawa_mu_inv_m > 0")


@dataclass(frozen=True)
class NaturalScales:
    """Nondimensionalization bundle for one PhysicalParams instance.

    l0_m converts internal lengths to meters.  beta is the dimensionless
    nonlocal coupling (None unless the model carries a nonlocal scale);
    mu is the dimensionless Yukawa range (None otherwise).
    """

    l0_m: float
    beta: float | None
    mu: float | None
    hbar_c_ev_m: float
    g_si: float


def natural_scales(p: PhysicalParams) -> NaturalScales:
    """Build the internal unit system for ``p``.

    l0 = hbar^2/(G m^3) in meters; beta = (M_s/hbar c) * l0, dimensionless.
    """
    l0 = HBAR_J_S**2 / (G_SI * p.mass_kg**3)
    beta = None
    mu = None
    if p.ms_ev is not None:
        if not (p.ms_ev > 0):
            raise DomainError(f"ms_ev must be positive, got {p.ms_ev!r}")
        beta = (p.ms_ev / HBARC_EV_M) * l0
    if p.yukawa_mu_inv_m is not None:
        if not (p.yukawa_mu_inv_m > 0):
            raise DomainError(f"yukawa_mu_inv_m must be positive, got {p.yukawa_mu_inv_m!r}")
        mu = p.yukawa_mu_inv_m * l0
    return NaturalScales(l0_m=l0, beta=beta, mu=mu, hbar_c_ev_m=HBARC_EV_M, g_si=G_SI)


def length_to_si(x_natural: float, s: NaturalScales) -> float:
    """Dimensionless length -> meters."""
    return x_natural * s.l0_m


def length_from_si(x_m: float, s: NaturalScales) -> float:
    """Meters -> dimensionless length."""
    return x_m / s.l0_m


def energy_unit_j(p: PhysicalParams) -> float:
    """SI value (J) of one internal energy unit, G^2 m^5 / hbar^2."""
    return G_SI**2 * p.mass_kg**5 / HBAR_J_S**2
