"""Gravitational pair-potential kernels K(r), dimensionless (per mass^2).

Three models, all normalized so that K(r) -> -1/r far away:

    newtonian   K(r) = -1/r
    idg         K(r) = -erf(beta r / 2) / r      finite at r = 0: -beta/sqrt(pi)
    yukawa      K(r) = -(1/r) (1 + exp(-mu r)/3)

The idg kernel is the position-space Green function of the exponentially
form-factored momentum propagator -4 pi exp(-k^2/beta^2)/k^2; the module
also carries a direct numerical inversion of that propagator
(kernel_from_form_factor) which serves as the independent oracle for the
erf closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erf

from .errors import DomainError, NumericsError, SingularInputError
from .units import MODELS, NaturalScales, PhysicalParams

SQRT_PI = math.sqrt(math.pi)

# truncate spectral integrals where the Gaussian damping is below 1e-30
_QMAX = math.sqrt(30.0 * math.log(10.0))


@dataclass(frozen=True)
class GravityKernel:
    """Immutable kernel description; all evaluations are pure."""

    model: str
    beta: float | None = None     # dimensionless nonlocal coupling (idg)
    mu: float | None = None       # dimensionless Yukawa range (yukawa)
    strength: float = 1.0         # coupling prefactor, 1 in natural units

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown gravity model {self.model!r}")
        if self.model == "idg" and not (self.beta is not None and self.beta > 0):
            raise DomainError("idg kernel requires beta > 0")
        if self.model == "yukawa" and not (self.mu is not None and self.mu > 0):
            raise DomainError("yukawa kernel requires mu > 0")

    def eval(self, r):
        return kernel_eval(self, r)

    def shell_primitive(self, s):
        return shell_primitive(self, s)


def kernel_for(p: PhysicalParams, scales: NaturalScales, strength: float = 1.0) -> GravityKernel:
    """Dimensionless kernel matching a physical parameter set."""
    return GravityKernel(model=p.model, beta=scales.beta, mu=scales.mu, strength=strength)


def kernel_eval(k: GravityKernel, r):
    """Evaluate K(r) at dimensionless radius r (scalar or array), r >= 0.

    The idg kernel takes its analytic r -> 0 limit; the newtonian and
    yukawa kernels are singular there and raise, callers must regularize.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("kernel radius must be nonnegative")
    if k.model == "idg":
        x = 0.5 * k.beta * r
        # erf(x)/x series below x=1e-4 keeps the removable singularity exact
        small = x < 1e-4
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(small,
                           -(k.beta / SQRT_PI) * (1.0 - x * x / 3.0),
                           -erf(x) / np.where(r > 0, r, 1.0))
        return k.strength * (out if out.shape else float(out))
    if np.any(r == 0):
        raise SingularInputError(f"{k.model} kernel is singular at r = 0")
    if k.model == "newtonian":
        out = -1.0 / r
    else:  # yukawa
        out = -(1.0 + np.exp(-k.mu * r) / 3.0) / r
    out = k.strength * out
    return out if out.shape else float(out)


def shell_primitive(k: GravityKernel, s):
    """A(s) = integral_0^s (-t K(t)) dt, the line-integrated kernel.

    This is the piece the bipolar (two-shell) reduction of the 3D
    convolution needs: the spherical average of K over a shell of radius
    rp seen from radius r is -(A(r+rp) - A(|r-rp|)) / (2 r rp).  For the
    newtonian kernel A(s) = s, which reproduces the interior/exterior
    1/max(r, rp) shell rule.
    """
    s = np.asarray(s, dtype=float)
    if k.model == "newtonian":
        out = s.copy()
    elif k.model == "idg":
        b = k.beta
        # expm1 avoids cancellation for beta*s << 1 where A ~ beta s^2 / (2 sqrt(pi))
        out = s * erf(0.5 * b * s) + (2.0 / (b * SQRT_PI)) * np.expm1(-0.25 * b * b * s * s)
    else:  # yukawa
        out = s - np.expm1(-k.mu * s) / (3.0 * k.mu)
    out = k.strength * out
    return out if out.shape else float(out)


def kernel_from_form_factor(beta: float, r: float) -> float:
    """Position-space kernel from the momentum-space propagator, numerically.

    Inverts -4 pi exp(-k^2/beta^2)/k^2 through the 3D radial Fourier
    transform, reduced to the 1D integral

        K(r) = -(2 / (pi r)) * I(beta r),
        I(z) = integral_0^inf exp(-q^2) sin(z q) / q dq,

    with the Gaussian factor truncated where it falls below 1e-30.  Serves
    as the independent oracle for the erf closed form in kernel_eval.
    """
    if not (beta > 0):
        raise DomainError("kernel_from_form_factor requires beta > 0")
    if not (r > 0):
        raise DomainError("kernel_from_form_factor requires r > 0")
    z = beta * r

    def integrand(q):
        return math.exp(-q * q) * math.sin(z * q) / q

    if z * _QMAX <= 50.0:
        val, err, info = integrate.quad(integrand, 0.0, _QMAX, limit=300,
                                        epsabs=1e-14, epsrel=1e-12, full_output=True)[:3]
        pieces = [(val, err)]
    else:
        # many oscillation periods: direct rule near 0, QAWO sine weight beyond
        q0 = 8.0 / z
        v1, e1 = integrate.quad(integrand, 0.0, q0, limit=100, epsabs=1e-14)
        v2, e2 = integrate.quad(lambda q: math.exp(-q * q) / q, q0, _QMAX,
                                weight="sin", wvar=z, limit=500, epsabs=1e-14)
        val, err = v1 + v2, e1 + e2
        pieces = [(v1, e1), (v2, e2)]
    if not math.isfinite(val) or err > 1e-8 * abs(val) + 1e-13:
        raise NumericsError(
            "spectral kernel inversion did not converge",
            diagnostics={"beta": beta, "r": r, "value": val, "abserr": err, "pieces": pieces},
        )
    return -(2.0 / (math.pi * r)) * val


def potential_at_origin(k: GravityKernel, sigma: float) -> float:
    """Potential at the center of a normalized Gaussian packet of width sigma.

    Computes Phi(0) = integral 4 pi r^2 phi^2(r) K(r) dr by adaptive radial
    quadrature against the kernel; the 4 pi r^2 measure cancels the 1/r
    singularity of the newtonian and yukawa kernels.
    """
    if not (sigma > 0):
        raise DomainError("potential_at_origin requires sigma > 0")
    norm = 4.0 * math.pi / (SQRT_PI**3 * sigma**3)

    def integrand(r):
        if r == 0.0:
            return 0.0
        return norm * r * r * math.exp(-(r / sigma) ** 2) * kernel_eval(k, r)

    upper = 12.0 * sigma
    pts = [sigma]
    if k.model == "idg" and 2.0 / k.beta < upper:
        pts.append(2.0 / k.beta)   # kernel saturation scale
    if k.model == "yukawa" and 1.0 / k.mu < upper:
        pts.append(1.0 / k.mu)
    val, err = integrate.quad(integrand, 0.0, upper, points=sorted(pts),
                              limit=300, epsabs=1e-14, epsrel=1e-12)
    if not math.isfinite(val):
        raise NumericsError("potential quadrature failed",
                            diagnostics={"model": k.model, "sigma": sigma, "abserr": err})
    return val
