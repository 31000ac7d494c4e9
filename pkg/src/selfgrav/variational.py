"""Gaussian-ansatz ground-state energies and optimal packet widths.

For a normalized Gaussian packet of width sigma (dimensionless, in units
of l0 = hbar^2/(G m^3)) the energy per internal energy unit is

    newtonian  E(s) = 3/(4 s^2) - sqrt(2/pi) / s
    idg        E(s) = 3/(4 s^2) - sqrt(2/pi) beta / sqrt(2 + beta^2 s^2)
    yukawa     E(s) = 3/(4 s^2) - (4/3) sqrt(2/pi)/s
                      + (mu/3) erfcx(mu s / sqrt(2))

The yukawa closed form follows from the Gaussian expectation of
exp(-mu r)/r over the relative-separation distribution; the quadrature
route (pair_energy_quadrature) is kept as the source of truth and the
closed form is cross-validated against it in the test suite.

The optimal spread solves dE/ds = 0.  The newtonian case has the closed
form s = (3/2) sqrt(pi/2); the idg case interpolates between that value
(beta s >> 2) and the deep-nonlocal power law s = (3 sqrt(pi))^(1/4)
beta^(-3/4) (beta s << 2), which sigma_idg_asymptotic exposes directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import erfcx

from .errors import DomainError, NumericsError
from .kernels import GravityKernel, kernel_eval
from .units import NaturalScales, PhysicalParams, natural_scales

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
SIGMA_NEWTON_COEFF = 1.5 * math.sqrt(math.pi / 2.0)      # optimal newtonian s
SIGMA_IDG_DEEP_COEFF = (3.0 * math.sqrt(math.pi)) ** 0.25

# regime bands on beta*sigma (advisory metadata, never branches the math):
# below DEEP_MAX the nonlocal plateau dominates, above NEWTONIAN_MIN the
# newtonian solution is recovered to better than ~1%, in between crossover.
REGIME_DEEP_MAX = 2.0
REGIME_NEWTONIAN_MIN = 20.0

_SCAN_STEP = 0.05
_SCAN_MARGIN = 3.0
_RESIDUAL_TOL = 1e-12


# ---------------------------------------------------------------------------
# energies (dimensionless), with internal kinetic rescale lam and coupling
# factor c used by the nondimensionalization-invariance machinery and by the
# solver functional that carries half the pair-interaction weight

def _energy(model, s, beta=None, mu=None, lam=1.0, coupling=1.0):
    s = np.asarray(s, dtype=float)
    kin = 0.75 * lam / (s * s)
    if model == "newtonian":
        pot = -SQRT_2_OVER_PI / s
    elif model == "idg":
        x = beta * s
        # two algebraically equal forms of beta/sqrt(2 + beta^2 s^2),
        # each overflow-safe on its side of x = beta*s = 1
        with np.errstate(over="ignore", divide="ignore"):
            pot_small = -SQRT_2_OVER_PI * x / (s * np.sqrt(2.0 + x * x))
            pot_big = -SQRT_2_OVER_PI / (s * np.sqrt(1.0 + 2.0 / (x * x)))
        pot = np.where(x > 1.0, pot_big, pot_small)
    else:  # yukawa
        y = mu * s / math.sqrt(2.0)
        pot = (-(4.0 / 3.0) * SQRT_2_OVER_PI + (math.sqrt(2.0) / 3.0) * y * erfcx(y)) / s
    out = kin + coupling * pot
    return out if out.shape else float(out)


def _denergy(model, s, beta=None, mu=None, lam=1.0, coupling=1.0):
    """dE/ds, same conventions as _energy."""
    s = np.asarray(s, dtype=float)
    dkin = -1.5 * lam / s**3
    if model == "newtonian":
        dpot = SQRT_2_OVER_PI / (s * s)
    elif model == "idg":
        x = beta * s
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            direct = (x**3 / (s * s)) / (2.0 + x * x) ** 1.5
            asym = (1.0 + 2.0 / (x * x)) ** -1.5 / (s * s)
        dpot = SQRT_2_OVER_PI * np.where(x > 1e6, asym, direct)
    else:  # yukawa
        y = mu * s / math.sqrt(2.0)
        # direct form cancels two y^2-size terms; beyond y = 30 its noise
        # floor (~y^2 eps) exceeds the asymptotic-series truncation error
        ys = np.where(y > 30.0, 1.0, y)
        direct = (SQRT_2_OVER_PI * (4.0 / 3.0)
                  + (2.0 * math.sqrt(2.0) / 3.0) * ys**3 * erfcx(ys)
                  - (2.0 / 3.0) * SQRT_2_OVER_PI * ys * ys) / (s * s)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            z = 1.0 / (y * y)
            tail = SQRT_2_OVER_PI * (1.0 + z * (0.5 + z * (-1.25 + z * (4.375 + z * (-19.6875 + z * 108.28125))))) / (s * s)
        dpot = np.where(y > 30.0, tail, direct)
    out = dkin + coupling * dpot
    return out if out.shape else float(out)


def energy_newton(sigma: float) -> float:
    """Gaussian-ansatz energy under the plain 1/r self-potential."""
    if not np.all(np.asarray(sigma) > 0):
        raise DomainError("sigma must be positive")
    return _energy("newtonian", sigma)


def energy_idg(sigma: float, beta: float) -> float:
    """Gaussian-ansatz energy under the erf-regularized self-potential."""
    if not np.all(np.asarray(sigma) > 0) or not beta > 0:
        raise DomainError("sigma and beta must be positive")
    return _energy("idg", sigma, beta=beta)


def energy_yukawa(sigma: float, mu: float, method: str = "closed") -> float:
    """Gaussian-ansatz energy under the Yukawa-corrected self-potential.

    method="closed" uses the erfcx closed form, method="quadrature" the
    1D relative-separation quadrature (source of truth, slower).
    """
    if not np.all(np.asarray(sigma) > 0) or not mu > 0:
        raise DomainError("sigma and mu must be positive")
    if method == "closed":
        return _energy("yukawa", sigma, mu=mu)
    if method == "quadrature":
        k = GravityKernel(model="yukawa", mu=mu)
        return 0.75 / sigma**2 + pair_energy_quadrature(k, sigma)
    raise DomainError(f"unknown method {method!r}")


def pair_energy_quadrature(kernel: GravityKernel, sigma: float) -> float:
    """Expectation of K(|x - x'|) over two independent packet samples.

    The 6D double integral over the pair of Gaussian densities reduces to
    a 1D radial quadrature against the relative-displacement distribution,
    which is Gaussian with per-axis variance sigma^2.
    """
    if not (sigma > 0):
        raise DomainError("sigma must be positive")

    def integrand(t):
        if t == 0.0:
            return 0.0
        return SQRT_2_OVER_PI * t * t * math.exp(-0.5 * t * t) * kernel_eval(kernel, sigma * t)

    val, err = integrate.quad(integrand, 0.0, 14.0, limit=300, epsabs=1e-14, epsrel=1e-13)
    if not math.isfinite(val):
        raise NumericsError("pair-energy quadrature failed",
                            diagnostics={"model": kernel.model, "sigma": sigma, "abserr": err})
    return val


# ---------------------------------------------------------------------------
# stationary widths

def classify_regime(scale_times_sigma: float) -> str:
    if scale_times_sigma < REGIME_DEEP_MAX:
        return "deep_nonlocal"
    if scale_times_sigma > REGIME_NEWTONIAN_MIN:
        return "newtonian_limit"
    return "crossover"


@dataclass(frozen=True)
class SpreadResult:
    """Variational solution record for one physical instance."""

    sigma_m: float
    energy_natural: float
    model: str
    regime: str
    iterations: int
    bracket: tuple[float, float]   # dimensionless root bracket
    sigma_natural: float
    residual: float                # scaled stationarity residual
    beta: float | None = None
    mu: float | None = None


def _scan_anchors(model, beta, mu, lam, coupling):
    s_n = SIGMA_NEWTON_COEFF * lam / coupling
    if model == "newtonian":
        return [s_n]
    if model == "idg":
        s_deep = (3.0 * math.sqrt(math.pi) * lam / coupling) ** 0.25 * beta**-0.75
        return [s_n, s_deep]
    return [0.5 * s_n, s_n]   # yukawa optimum sits in [3/4 s_n, s_n]


def _solve_stationary(model, beta=None, mu=None, lam=1.0, coupling=1.0):
    """Global minimizer of the dimensionless energy over s in (0, inf).

    Scans log10(s) over a window anchored on the closed-form limits of the
    model (the fixed window [-12, 12] cannot bracket deep-nonlocal optima,
    which reach s ~ 1e18 for laboratory masses), then polishes each sign
    change of dE/ds with the Brent bracketing hybrid and keeps the root of
    lowest energy.  Returns (s, iterations, bracket, residual).
    """
    anchors = _scan_anchors(model, beta, mu, lam, coupling)
    lo = math.log10(min(anchors)) - _SCAN_MARGIN
    hi = math.log10(max(anchors)) + _SCAN_MARGIN
    xs = np.arange(lo, hi + _SCAN_STEP, _SCAN_STEP)
    g = _denergy(model, 10.0**xs, beta=beta, mu=mu, lam=lam, coupling=coupling)
    sign_flip = np.where(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
    if len(sign_flip) == 0:
        raise NumericsError(
            "no stationary point bracketed in scan window",
            diagnostics={"model": model, "log10_s": xs.tolist(), "dE_ds": g.tolist()},
        )

    def gfun(x):
        return _denergy(model, 10.0**x, beta=beta, mu=mu, lam=lam, coupling=coupling)

    candidates = []
    iters = 0
    for i in sign_flip:
        x_root, info = optimize.brentq(gfun, xs[i], xs[i + 1], xtol=1e-15,
                                       rtol=4 * np.finfo(float).eps, full_output=True)
        iters += info.iterations
        s_root = 10.0**x_root
        e_root = _energy(model, s_root, beta=beta, mu=mu, lam=lam, coupling=coupling)
        candidates.append((e_root, s_root))
    e_min, s = min(candidates)

    # polish with guarded Newton steps on the raw variable
    for _ in range(3):
        resid = _scaled_residual(model, s, beta, mu, lam, coupling)
        if resid < 1e-14:
            break
        h = s * 1e-7
        dg = (_denergy(model, s + h, beta=beta, mu=mu, lam=lam, coupling=coupling)
              - _denergy(model, s - h, beta=beta, mu=mu, lam=lam, coupling=coupling)) / (2 * h)
        if dg == 0:
            break
        step = _denergy(model, s, beta=beta, mu=mu, lam=lam, coupling=coupling) / dg
        if not math.isfinite(step) or abs(step) > 0.1 * s:
            break
        s -= step
        iters += 1

    residual = _scaled_residual(model, s, beta, mu, lam, coupling)
    if residual > _RESIDUAL_TOL:
        raise NumericsError("stationarity residual above tolerance",
                            diagnostics={"model": model, "s": s, "residual": residual})
    bracket = _verified_bracket(gfun, s)
    return s, iters, bracket, residual


def _scaled_residual(model, s, beta, mu, lam, coupling):
    g = _denergy(model, s, beta=beta, mu=mu, lam=lam, coupling=coupling)
    t_kin = 1.5 * lam / s**3
    scale = t_kin + abs(g + t_kin)
    return abs(g) / scale


def _verified_bracket(gfun, s):
    """Tight bracket around the root with a confirmed sign change."""
    x = math.log10(s)
    w = 1e-14
    for _ in range(8):
        a, b = x - w, x + w
        if np.sign(gfun(a)) * np.sign(gfun(b)) <= 0:
            return (10.0**a, 10.0**b)
        w *= 10.0
    return (10.0 ** (x - w), 10.0 ** (x + w))


def minimize_spread(p: PhysicalParams, length_unit_m: float | None = None) -> SpreadResult:
    """Optimal packet width for the model of ``p``, in meters.

    The solve runs in dimensionless variables; length_unit_m overrides the
    internal unit (default l0) and exists so the nondimensionalization
    invariance can be exercised directly.  The reported energy is always
    in the standard l0-based unit.
    """
    scales = natural_scales(p)
    unit = scales.l0_m if length_unit_m is None else float(length_unit_m)
    if not (unit > 0):
        raise DomainError("length_unit_m must be positive")
    lam = scales.l0_m / unit
    beta_u = None if scales.beta is None else scales.beta / lam
    mu_u = None if scales.mu is None else scales.mu / lam

    s_u, iters, bracket_u, residual = _solve_stationary(p.model, beta=beta_u, mu=mu_u, lam=lam)
    sigma_m = s_u * unit
    s_nat = sigma_m / scales.l0_m
    energy = _energy(p.model, s_nat, beta=scales.beta, mu=scales.mu)

    if p.model == "newtonian":
        product = math.inf
    elif p.model == "idg":
        product = scales.beta * s_nat
    else:
        product = scales.mu * s_nat
    return SpreadResult(
        sigma_m=sigma_m,
        energy_natural=energy,
        model=p.model,
        regime=classify_regime(product),
        iterations=iters,
        bracket=(bracket_u[0] * unit / scales.l0_m, bracket_u[1] * unit / scales.l0_m),
        sigma_natural=s_nat,
        residual=residual,
        beta=scales.beta,
        mu=scales.mu,
    )


def sigma_newton_closed_form(p: PhysicalParams) -> float:
    """Closed-form optimal newtonian width (3/2) sqrt(pi/2) l0, meters."""
    scales = natural_scales(p)
    return SIGMA_NEWTON_COEFF * scales.l0_m


def sigma_idg_asymptotic(p: PhysicalParams) -> float:
    """Deep-nonlocal power law (3 sqrt(pi))^(1/4) beta^(-3/4) l0, meters.

    Meaningful where beta * sigma < 2; the caller checks the regime.
    """
    if p.ms_ev is None:
        raise DomainError("asymptotic width requires ms_ev")
    scales = natural_scales(p)
    return SIGMA_IDG_DEEP_COEFF * scales.beta**-0.75 * scales.l0_m


def stationary_width_for_coupling(model, beta=None, mu=None, coupling=1.0) -> float:
    """Dimensionless optimal Gaussian width for a rescaled pair coupling.

    coupling=0.5 gives the Gaussian minimizer of the solver functional
    T + W/2, which the radial solver uses for grid sizing and the
    functional-gap bookkeeping.
    """
    s, _, _, _ = _solve_stationary(model, beta=beta, mu=mu, coupling=coupling)
    return s


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepRow:
    """One (mass, model) cell of a sweep; error is set when the solve failed."""

    mass_kg: float
    model: str
    ms_ev: float | None
    mu_inv_m: float | None
    result: SpreadResult | None
    error: str | None = None


def sweep(masses_kg: Sequence[float], templates: Sequence[PhysicalParams] | PhysicalParams) -> list[SweepRow]:
    """Solve every (mass, template) combination, in deterministic order.

    Rows are ordered by mass index then template index.  Per-row failures
    are captured in the row instead of aborting the sweep.  Rows are
    independent pure solves, safe to fan out if a caller wants to.
    """
    if isinstance(templates, PhysicalParams):
        templates = [templates]
    if len(masses_kg) == 0:
        raise DomainError("sweep requires at least one mass")
    rows = []
    for m in masses_kg:
        for t in templates:
            try:
                p = replace(t, mass_kg=m)
                res = minimize_spread(p)
                rows.append(SweepRow(m, p.model, p.ms_ev, p.yukawa_mu_inv_m, res))
            except (DomainError, NumericsError) as exc:
                rows.append(SweepRow(m, t.model, t.ms_ev, t.yukawa_mu_inv_m, None, str(exc)))
    return rows
