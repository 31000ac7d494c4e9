"""Radial ground states of the nonlinear self-gravitating wave equation.

Solves, on a uniform radial grid and beyond the Gaussian ansatz,

    eps psi = -(1/2) lap psi + Phi[psi] psi,
    Phi[psi](x) = integral K(|x - x'|) |psi(x')|^2 d^3x',

in the internal dimensionless units (unit mass, lengths in l0).  The grid
variable is u(r) = r R(r) with Dirichlet ends, which regularizes the
origin and makes the second-order central Laplacian exact bookkeeping for
the discrete kinetic quadratic form.

The solver minimizes the discrete functional

    F[u] = T[u] + W[u] / 2

whose constrained stationary points satisfy the eigenproblem above
exactly on the grid (the pair energy W carries 1/2 because each pair is
counted twice in the double sum).  The reported "paper convention" energy
is E = T + W, the expectation value of kinetic plus full self-potential;
both numbers appear in every report.

Descent scheme: fictitious-time steps with the kinetic term implicit
(banded tridiagonal solve, unconditionally stable) and the local
potential explicit, followed by renormalization.  Steps that fail to
decrease F are rejected and the step halves; accepted steps grow it by
1.2x up to a ceiling set by the current potential scale.  Acceptance by
descent makes F monotone over accepted steps by construction.

The self-consistent potential uses the bipolar (two-shell) reduction of
the 3D convolution: with A(s) the line-integrated kernel
(kernels.shell_primitive),

    Phi_i = -(1/(2 r_i)) sum_j (q_j / r_j) [A(r_i + r_j) - A(|r_i - r_j|)],

where q_j are the shell weights 4 pi dr u_j^2.  On a uniform grid both
index structures (i+j and |i-j|) are convolutions, evaluated with FFTs in
O(N log N); a direct O(N^2) path is kept as the test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize, signal

from .errors import DomainError, NumericsError, ResolutionError
from .kernels import GravityKernel, kernel_eval, kernel_for, shell_primitive
from .units import PhysicalParams, natural_scales
from .variational import minimize_spread, stationary_width_for_coupling

_FFT_MIN_N = 192   # below this the direct sums win


class RadialGrid:
    """Uniform interior grid r_j = j dr, j = 1..n, with dr = r_max/(n+1).

    Both endpoints (r = 0 and r = r_max) carry Dirichlet zeros of u = r R
    and are not stored.
    """

    def __init__(self, n: int, r_max: float):
        if n < 8:
            raise DomainError("grid needs at least 8 interior points")
        if not (r_max > 0):
            raise DomainError("r_max must be positive")
        self.n = int(n)
        self.r_max = float(r_max)
        self.dr = self.r_max / (self.n + 1)
        self.r = self.dr * np.arange(1, self.n + 1)

    def __repr__(self):
        return f"RadialGrid(n={self.n}, r_max={self.r_max!r})"


@dataclass(frozen=True)
class GridConfig:
    """Solver configuration; all lengths dimensionless (units of l0)."""

    n: int = 2000
    r_max: float | None = None          # None: auto-size from predicted width
    residual_tol: float = 1e-9
    max_iter: int = 60000
    dt_init: float = 0.5
    auto_expand: bool = True
    expand_factor: float = 1.6
    max_expansions: int = 6
    tail_tol: float = 1e-8              # R(r_max)/max R admissibility bound
    min_width_cells: float = 5.0
    rmax_nonlocal_cap: float = 64.0     # cap auto r_max at this many 2/beta (idg)

    def __post_init__(self):
        if self.n < 8 or self.max_iter < 1:
            raise DomainError("invalid grid configuration")
        if self.r_max is not None and not (self.r_max > 0):
            raise DomainError("r_max must be positive")


@dataclass
class RadialState:
    """Normalized radial wave function R(r) on its grid."""

    r: np.ndarray
    R: np.ndarray
    norm: float
    chemical_potential: float

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def u(self) -> np.ndarray:
        return self.r * self.R

    def grid(self) -> RadialGrid:
        n = len(self.r)
        return RadialGrid(n, (n + 1) * self.dr)

    def width(self) -> float:
        """sqrt(2/3 <r^2>), the Gaussian-sigma-compatible width measure."""
        u2 = self.u**2
        r2 = 4.0 * math.pi * self.dr * np.sum(self.r**2 * u2)
        nrm = 4.0 * math.pi * self.dr * np.sum(u2)
        return math.sqrt(2.0 / 3.0 * r2 / nrm)


@dataclass
class SolverReport:
    converged: bool
    residual: float
    energy_functional: float            # F = T + W/2
    energy_paper_convention: float      # E = T + W
    width: float
    iterations: int
    chemical_potential: float
    kinetic: float
    pair_energy: float                  # W = <Phi>
    virial_ratio: float                 # <Phi>/T, -4 for newtonian stationary states
    weakly_bound: bool
    n: int
    r_max: float
    dr: float
    expansions: int
    residual_history: list = field(default_factory=list)
    f_history: list = field(default_factory=list)

    def summary_dict(self, history: bool = False) -> dict:
        d = {
            "converged": self.converged,
            "residual": self.residual,
            "energy_functional": self.energy_functional,
            "energy_paper_convention": self.energy_paper_convention,
            "width": self.width,
            "iterations": self.iterations,
            "chemical_potential": self.chemical_potential,
            "kinetic": self.kinetic,
            "pair_energy": self.pair_energy,
            "virial_ratio": self.virial_ratio,
            "weakly_bound": self.weakly_bound,
            "n": self.n,
            "r_max": self.r_max,
            "dr": self.dr,
            "expansions": self.expansions,
        }
        if history:
            d["residual_history"] = list(self.residual_history)
            d["f_history"] = list(self.f_history)
        return d


class SelfPotential:
    """Phi[rho] on a radial grid via the two-shell kernel reduction."""

    def __init__(self, grid: RadialGrid, kernel: GravityKernel, method: str = "auto"):
        if method not in ("auto", "fft", "direct"):
            raise DomainError(f"unknown potential method {method!r}")
        self.grid = grid
        self.kernel = kernel
        self.method = ("fft" if grid.n >= _FFT_MIN_N else "direct") if method == "auto" else method
        # line-integrated kernel at every reachable separation (i +/- j) dr
        self._B = shell_primitive(kernel, np.arange(0, 2 * grid.n + 2) * grid.dr)
        self._M = None

    def _weights(self, u2: np.ndarray) -> np.ndarray:
        return 4.0 * math.pi * self.grid.dr * u2

    def from_u_squared(self, u2: np.ndarray) -> np.ndarray:
        """Potential samples Phi(r_j) for the density with u^2 = u2."""
        if self.kernel.strength == 0.0:
            return np.zeros(self.grid.n)
        c = self._weights(u2) / self.grid.r
        if self.method == "fft":
            n = self.grid.n
            b_sym = self._B[np.abs(np.arange(-(n - 1), n))]
            s_minus = signal.fftconvolve(c, b_sym)[n - 1:2 * n - 1]
            s_plus = signal.fftconvolve(c[::-1], self._B)[n + 1:2 * n + 1]
        else:
            m = self._matrix()
            s_plus_minus = m @ c
            return -s_plus_minus / (2.0 * self.grid.r)
        return -(s_plus - s_minus) / (2.0 * self.grid.r)

    def _matrix(self) -> np.ndarray:
        if self._M is None:
            idx = np.arange(1, self.grid.n + 1)
            self._M = self._B[np.add.outer(idx, idx)] - self._B[np.abs(np.subtract.outer(idx, idx))]
        return self._M

    def at_origin(self, u2: np.ndarray) -> float:
        """Phi(0), the direct shell sum (every shell sees the bare kernel)."""
        if self.kernel.strength == 0.0:
            return 0.0
        q = self._weights(u2)
        return float(np.sum(q * kernel_eval(self.kernel, self.grid.r)))


def self_consistent_potential(state: RadialState, kernel: GravityKernel,
                              method: str = "auto") -> np.ndarray:
    """Phi[|psi|^2] sampled on the state's grid; state must be normalized."""
    if abs(state.norm - 1.0) > 1e-8:
        raise DomainError(f"state not normalized: norm = {state.norm!r}")
    pot = SelfPotential(state.grid(), kernel, method=method)
    return pot.from_u_squared(state.u**2)


# ---------------------------------------------------------------------------
# discrete functional bookkeeping (shared by solver, gap, and evolution)

def norm_u(u: np.ndarray, dr: float) -> float:
    return float(4.0 * math.pi * dr * np.sum(np.abs(u) ** 2))


def kinetic_u(u: np.ndarray, dr: float) -> float:
    """T = 2 pi integral (u')^2 dr, the exact discrete kinetic quadratic form."""
    d = np.diff(u, prepend=0.0, append=0.0)
    return float(2.0 * math.pi / dr * np.sum(np.abs(d) ** 2))


def functional_parts(u: np.ndarray, grid: RadialGrid, pot: SelfPotential):
    """(F, T, W) of the discrete functional F = T + W/2 for real u."""
    phi = pot.from_u_squared(u * u)
    t = kinetic_u(u, grid.dr)
    w = float(4.0 * math.pi * grid.dr * np.sum(u * u * phi))
    return t + 0.5 * w, t, w


def gaussian_u(grid: RadialGrid, sigma: float) -> np.ndarray:
    """Normalized Gaussian packet sampled as u = r R on the grid."""
    u = grid.r * np.exp(-grid.r**2 / (2.0 * sigma * sigma))
    nrm = norm_u(u, grid.dr)
    if nrm <= 0.0 or not math.isfinite(nrm):
        raise ResolutionError(f"Gaussian of width {sigma!r} not representable on grid {grid!r}")
    return u / math.sqrt(nrm)


def _apply_kinetic(u: np.ndarray, dr: float) -> np.ndarray:
    """(-1/2) discrete Laplacian of u with Dirichlet ends."""
    out = np.empty_like(u)
    out[1:-1] = u[2:] + u[:-2]
    out[0] = u[1]
    out[-1] = u[-2]
    return -0.5 * (out - 2.0 * u) / (dr * dr)


def _descend(grid: RadialGrid, pot: SelfPotential, u: np.ndarray, cfg: GridConfig):
    """Monotone F-descent; returns state vectors and convergence bookkeeping."""
    dr, n = grid.dr, grid.n
    kin_main = np.full(n, 1.0 / dr**2)
    kin_off = np.full(n - 1, -0.5 / dr**2)

    phi = pot.from_u_squared(u * u)
    t = kinetic_u(u, dr)
    w = float(4.0 * math.pi * dr * np.sum(u * u * phi))
    f = t + 0.5 * w
    dt = cfg.dt_init
    f_hist = [f]
    res_hist = []
    iterations = 0
    converged = False
    residual = math.inf
    eps = t + w

    for iterations in range(1, cfg.max_iter + 1):
        t = kinetic_u(u, dr)
        eps = t + w
        hu = _apply_kinetic(u, dr) + phi * u
        residual = math.sqrt(4.0 * math.pi * dr * np.sum((hu - eps * u) ** 2))
        res_hist.append(residual)
        if residual < cfg.residual_tol:
            converged = True
            break
        # ceiling: implicit kinetic part is unconditionally stable, the
        # explicit local part needs dt |phi - eps| bounded
        dt_max = 4.0 / max(float(np.max(np.abs(phi - eps))), 1e-300)
        while True:
            rhs = u - dt * (phi - eps) * u
            ab = np.zeros((3, n))
            ab[0, 1:] = dt * kin_off
            ab[1] = 1.0 + dt * kin_main
            ab[2, :-1] = dt * kin_off
            u_new = linalg.solve_banded((1, 1), ab, rhs)
            u_new /= math.sqrt(norm_u(u_new, dr))
            phi_new = pot.from_u_squared(u_new * u_new)
            t_new = kinetic_u(u_new, dr)
            w_new = float(4.0 * math.pi * dr * np.sum(u_new * u_new * phi_new))
            f_new = t_new + 0.5 * w_new
            if f_new <= f + 1e-14 * abs(f) or dt <= 1e-12:
                u, phi, w, f = u_new, phi_new, w_new, f_new
                f_hist.append(f)
                dt = min(dt * 1.1, dt_max)
                break
            dt *= 0.5

    t = kinetic_u(u, dr)
    w = float(4.0 * math.pi * dr * np.sum(u * u * phi))
    eps = t + w
    return u, phi, dict(converged=converged, residual=residual, iterations=iterations,
                        kinetic=t, pair_energy=w, eps=eps, f=t + 0.5 * w,
                        f_history=f_hist, residual_history=res_hist)


def _predicted_widths(p: PhysicalParams):
    scales = natural_scales(p)
    s_var = minimize_spread(p).sigma_natural
    s_half = stationary_width_for_coupling(p.model, beta=scales.beta, mu=scales.mu, coupling=0.5)
    return scales, s_var, s_half


def solve_ground_state(p: PhysicalParams, cfg: GridConfig = GridConfig()):
    """Ground state of the full nonlinear problem for ``p``.

    Returns (RadialState, SolverReport).  The initial guess is a Gaussian
    at the variational width; r_max auto-sizes to the solver-functional
    Gaussian width and expands until the tail admissibility bound holds.
    """
    scales, s_var, s_half = _predicted_widths(p)
    kernel = kernel_for(p, scales)

    # plateau-regime guard: with marginal binding the domain must not grow
    # without bound, so cap it at a multiple of the nonlocal range 2/beta
    cap = math.inf
    if p.model == "idg" and scales.beta * s_half < 2.0:
        cap = cfg.rmax_nonlocal_cap * 2.0 / scales.beta

    weakly_bound = False
    if cfg.r_max is not None:
        r_max = cfg.r_max
    else:
        r_max = 16.0 * s_half
        if r_max > cap:
            r_max = cap
            weakly_bound = True
    n = cfg.n

    expansions = 0
    while True:
        grid = RadialGrid(n, r_max)
        if s_half / grid.dr < cfg.min_width_cells:
            raise ResolutionError(
                f"predicted width {s_half:.3g} spans fewer than {cfg.min_width_cells} cells "
                f"at dr = {grid.dr:.3g}; refine the grid")
        pot = SelfPotential(grid, kernel)
        u0 = gaussian_u(grid, s_var)
        u, phi, stats = _descend(grid, pot, u0, cfg)

        big_r = np.abs(u / grid.r)
        tail = big_r[-1] / np.max(big_r)
        if tail <= cfg.tail_tol or weakly_bound or not cfg.auto_expand:
            break
        if r_max * cfg.expand_factor > cap:
            weakly_bound = True
            break
        if expansions >= cfg.max_expansions:
            raise NumericsError(
                "tail admissibility not reached within expansion budget",
                diagnostics={"tail": float(tail), "r_max": r_max, "expansions": expansions})
        expansions += 1
        r_max *= cfg.expand_factor
        n = min(int(n * cfg.expand_factor) + 1, 32768)

    state = RadialState(r=grid.r, R=u / grid.r, norm=norm_u(u, grid.dr),
                        chemical_potential=stats["eps"])
    width = state.width()
    if width / grid.dr < cfg.min_width_cells:
        raise ResolutionError(
            f"converged width {width:.3g} spans fewer than {cfg.min_width_cells} cells "
            f"at dr = {grid.dr:.3g}")
    report = SolverReport(
        converged=stats["converged"],
        residual=stats["residual"],
        energy_functional=stats["f"],
        energy_paper_convention=stats["kinetic"] + stats["pair_energy"],
        width=width,
        iterations=stats["iterations"],
        chemical_potential=stats["eps"],
        kinetic=stats["kinetic"],
        pair_energy=stats["pair_energy"],
        virial_ratio=stats["pair_energy"] / stats["kinetic"],
        weakly_bound=weakly_bound,
        n=grid.n,
        r_max=grid.r_max,
        dr=grid.dr,
        expansions=expansions,
        residual_history=stats["residual_history"],
        f_history=stats["f_history"],
    )
    return state, report


@dataclass(frozen=True)
class GapResult:
    gap: float            # F[best grid Gaussian] - F[solver state], >= 0
    sigma_f: float        # width of the best Gaussian on the shared functional
    f_gaussian: float
    f_solver: float
    width_solver: float


def gaussian_functional_gap(p: PhysicalParams, cfg: GridConfig = GridConfig(),
                            solved=None) -> GapResult:
    """How far the best Gaussian sits above the solver on the same functional.

    Both sides are evaluated with the identical discrete functional on the
    solver's grid, so the gap is nonnegative by the variational principle.
    ``solved`` may pass a (state, report) pair to reuse an existing solve.
    """
    if solved is None:
        solved = solve_ground_state(p, cfg)
    state, report = solved
    if not report.converged:
        raise NumericsError("gap requires a converged solve",
                            diagnostics={"residual": report.residual})
    grid = state.grid()
    scales = natural_scales(p)
    kernel = kernel_for(p, scales)
    pot = SelfPotential(grid, kernel)

    s_half = stationary_width_for_coupling(p.model, beta=scales.beta, mu=scales.mu, coupling=0.5)

    def f_of_log_sigma(x):
        return functional_parts(gaussian_u(grid, math.exp(x)), grid, pot)[0]

    res = optimize.minimize_scalar(f_of_log_sigma,
                                   bounds=(math.log(s_half / 6.0), math.log(6.0 * s_half)),
                                   method="bounded", options={"xatol": 1e-12})
    sigma_f = math.exp(res.x)
    f_gauss = float(res.fun)
    f_solver = report.energy_functional
    return GapResult(gap=f_gauss - f_solver, sigma_f=sigma_f, f_gaussian=f_gauss,
                     f_solver=f_solver, width_solver=report.width)
