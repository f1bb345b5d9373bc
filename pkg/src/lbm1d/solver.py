"""Time marching for the two-level, four-speed lattice Boltzmann model.

The stored field is the transformed distribution ``g = f + pi*theta*(f - f_eq)``
with ``pi = dt/tau``, which turns the theta-weighted BGK collision into an
explicit update. ``g`` shares its mass, momentum and energy moments with ``f``,
so macroscopic fields are read straight off it.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .advection import GHOSTS, interface_fluxes
from .equilibrium import (EnergyLevels, VelocitySet, Zeta2TooSmallError,
                          Zeta2Warning, moment_matrix)
from .gas import ConservedState, DegenerateStateError, GasModel, MacroState


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    left: MacroState
    right: MacroState
    gas: GasModel = GasModel()
    tau: float = 1e-4
    theta: float = 0.5
    zeta2: float = 4.0
    cells: int = 201
    dt_factor: float = 0.25
    t_end: float = 0.22
    domain: tuple = (-0.5, 0.5)
    velocities: VelocitySet = VelocitySet()
    strict_zeta2: bool = False

    def __post_init__(self):
        if not self.tau > 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.zeta2 > 0:
            raise ConfigError(f"zeta2 must be positive, got {self.zeta2}")
        if int(self.cells) != self.cells or self.cells < 10:
            raise ConfigError(f"cells must be an integer >= 10, got {self.cells}")
        if not self.dt_factor > 0:
            raise ConfigError(f"dt_factor must be positive, got {self.dt_factor}")
        if not self.t_end >= 0:
            raise ConfigError(f"t_end must be non-negative, got {self.t_end}")
        lo, hi = self.domain
        if not hi > lo:
            raise ConfigError(f"empty domain {self.domain}")
        if not self.cfl < 1.0:
            raise ConfigError(f"CFL number {self.cfl:.4g} >= 1")

    @property
    def dt(self):
        return self.tau * self.dt_factor

    @property
    def dx(self):
        lo, hi = self.domain
        return (hi - lo) / self.cells

    @property
    def cfl(self):
        return float(np.max(np.abs(self.velocities.xi))) * self.dt / self.dx

    @property
    def levels(self):
        return EnergyLevels(self.zeta2)

    def cell_centers(self):
        lo, _ = self.domain
        return lo + (np.arange(self.cells) + 0.5) * self.dx


@dataclass
class FieldState:
    g: np.ndarray  # (velocity, level, cell) incl. ghosts
    t: float = 0.0
    step: int = 0
    pi: float = 0.0  # dt/tau that defines the stored g
    warned_zeta2: bool = False
    macros: tuple = None  # (rho, u, eps) of g, when already known

    @property
    def interior(self):
        return self.g[..., GHOSTS:-GHOSTS]


class Model:
    """Precomputed per-run constants and the vectorised kernels."""

    def __init__(self, config: SimulationConfig):
        self.config = config
        self.gas = config.gas
        self.matrix = moment_matrix(config.velocities)
        self.xi = config.velocities.xi
        self.zeta2 = config.zeta2
        # population index order is (velocity, level) flattened
        self.e_flat = np.repeat(self.xi, 2)
        self.kinetic = 0.5 * self.xi**2

    # -- macroscopic moments ------------------------------------------------

    def conserved(self, g):
        per_velocity = g.sum(axis=1)
        rho = per_velocity.sum(axis=0)
        mom = self.xi @ per_velocity
        etot = self.kinetic @ per_velocity + self.zeta2 * g[:, 1].sum(axis=0)
        return rho, mom, etot

    def primitives(self, g, t=None, step=None):
        rho, mom, etot = self.conserved(g)
        bad = ~(rho > 0)
        if np.any(bad):
            raise DegenerateStateError("non-positive density",
                                       cell=_interior_index(bad), time=t, step=step)
        u = mom / rho
        eps = etot / rho - 0.5 * u**2
        bad = ~(eps > 0)
        if np.any(bad):
            raise DegenerateStateError("non-positive internal energy",
                                       cell=_interior_index(bad), time=t, step=step)
        return rho, u, eps

    # -- equilibrium -----------------------------------------------------------

    def equilibrium(self, rho, u, eps):
        p = self.gas.pressure(rho, eps)
        s = np.stack([rho, rho * u, rho * u**2 + p, rho * u**3 + 3.0 * p * u])
        f_eq = self.matrix.v_inv @ s
        upper = self.gas.rest_energy(eps) / self.zeta2
        w = np.stack([1.0 - upper, upper])
        return f_eq[:, None, :] * w[None, :, :]

    def check_zeta2(self, state: FieldState, eps):
        zmax = float(np.max(self.gas.rest_energy(eps)))
        if zmax <= self.zeta2:
            return
        msg = (f"local rest energy {zmax:.6g} exceeds zeta2={self.zeta2:.6g} "
               f"at t={state.t:.6g}")
        if self.config.strict_zeta2:
            raise Zeta2TooSmallError(msg)
        if not state.warned_zeta2:
            warnings.warn(msg, Zeta2Warning, stacklevel=3)
            state.warned_zeta2 = True

    # -- update --------------------------------------------------------------

    def advect(self, f):
        """Conservative TVD divergence for all populations, interior cells only."""
        m = f.shape[-1]
        flux = interface_fluxes(f.reshape(-1, m), self.e_flat)
        return (np.diff(flux, axis=-1) / self.config.dx).reshape(f.shape[:-1] + (-1,))

    def boundary_fluxes(self, g, pi):
        """Interface fluxes through the two domain boundaries, per population."""
        theta = self.config.theta
        rho, u, eps = self.primitives(g)
        f_eq = self.equilibrium(rho, u, eps)
        f = f_from_g(g, f_eq, pi, theta)
        m = f.shape[-1]
        flux = interface_fluxes(f.reshape(-1, m), self.e_flat).reshape(f.shape[:-1] + (-1,))
        return flux[..., 0], flux[..., -1]


def _interior_index(bad):
    idx = int(np.flatnonzero(bad)[0])
    return idx - GHOSTS


def f_from_g(g, f_eq, pi, theta):
    a = pi * theta
    return (g + a * f_eq) / (1.0 + a)


def g_from_f(f, f_eq, pi, theta):
    return f + pi * theta * (f - f_eq)


def moments_from_g(g, levels: EnergyLevels, vs: VelocitySet = VelocitySet()):
    """Mass, momentum and total energy of a (4, 2, ...) population block."""
    g = np.asarray(g, dtype=float)
    xi = vs.xi
    per_velocity = g.sum(axis=1)
    rho = per_velocity.sum(axis=0)
    mom = np.tensordot(xi, per_velocity, axes=1)
    etot = (np.tensordot(0.5 * xi**2, per_velocity, axes=1)
            + np.tensordot(levels.values, g.sum(axis=0), axes=1))
    return ConservedState(rho, mom, etot)


def initial_primitives(config: SimulationConfig):
    """Initial (rho, u, eps) on all cells including ghosts.

    A cell whose centre sits on the diaphragm at x = 0 gets the equilibrium of
    the average conserved state of its two halves.
    """
    n = config.cells + 2 * GHOSTS
    lo, _ = config.domain
    centers = lo + (np.arange(n) - GHOSTS + 0.5) * config.dx
    tol = 1e-9 * config.dx
    left, right = config.left, config.right

    def cons(s):
        return np.array([s.rho, s.rho * s.u, s.rho * (s.eps + 0.5 * s.u**2)])

    ul, ur = cons(left), cons(right)
    q = np.where(centers[None, :] < -tol, ul[:, None], ur[:, None])
    mid = np.abs(centers) <= tol
    if np.any(mid):
        q[:, mid] = (0.5 * (ul + ur))[:, None]
    rho = q[0]
    u = q[1] / rho
    eps = q[2] / rho - 0.5 * u**2
    return rho, u, eps


def initialize(config: SimulationConfig) -> FieldState:
    model = Model(config)
    rho, u, eps = initial_primitives(config)
    g = model.equilibrium(rho, u, eps)
    state = FieldState(g=g, t=0.0, step=0, pi=config.dt / config.tau,
                       macros=model.primitives(g))
    model.check_zeta2(state, eps)
    return state


def step(state: FieldState, config: SimulationConfig, dt=None, model=None) -> FieldState:
    """Advance one time step; ``dt`` defaults to ``config.dt``.

    Ghost cells keep their initial equilibria.
    """
    if model is None:
        model = Model(config)
    if dt is None:
        dt = config.dt
    theta = config.theta
    g = state.g

    if state.macros is not None:
        rho, u, eps = state.macros
    else:
        rho, u, eps = model.primitives(g, state.t, state.step)
    f_eq = model.equilibrium(rho, u, eps)
    f = f_from_g(g, f_eq, state.pi, theta)

    pi = dt / config.tau
    div = model.advect(f)
    inner = slice(GHOSTS, -GHOSTS)
    g_new = g.copy()
    g_new[..., inner] = (-dt * div
                         + (1.0 - pi + pi * theta) * f[..., inner]
                         + pi * (1.0 - theta) * f_eq[..., inner])

    new = replace(state, g=g_new, t=state.t + dt, step=state.step + 1, pi=pi)
    new.macros = model.primitives(g_new, new.t, new.step)
    model.check_zeta2(new, new.macros[2])
    return new


@dataclass
class Snapshot:
    t: float
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    e: np.ndarray
    step: int = 0


def snapshot(state: FieldState, config: SimulationConfig, model=None) -> Snapshot:
    if model is None:
        model = Model(config)
    rho, u, eps = model.primitives(state.interior, state.t, state.step)
    return Snapshot(state.t, config.cell_centers(), rho, u,
                    config.gas.pressure(rho, eps), eps, state.step)


def _segment_steps(span, dt):
    """Step sizes covering ``span``: full steps then one shortened final step."""
    if span <= 0:
        return []
    n = max(1, math.ceil(span / dt - 1e-9))
    return [dt] * (n - 1) + [span - (n - 1) * dt]


def run(config: SimulationConfig, snapshot_times=(), on_step=None):
    """March to ``config.t_end``; return snapshots at the requested times and at
    ``t_end``.

    ``on_step(state, model)`` is called after every step.
    """
    model = Model(config)
    state = initialize(config)
    targets = sorted({float(t) for t in snapshot_times if 0 <= t <= config.t_end}
                     | {config.t_end})
    out = []
    for target in targets:
        for dt in _segment_steps(target - state.t, config.dt):
            state = step(state, config, dt=dt, model=model)
            if on_step is not None:
                on_step(state, model)
        state.t = target
        out.append(snapshot(state, config, model))
    return out


def n_steps(config: SimulationConfig):
    return len(_segment_steps(config.t_end, config.dt))


def viscosity_diagnostic(state: MacroState, tau, gas: GasModel = GasModel()):
    """Dynamic viscosity of the recovered flow, mu = p * tau."""
    return gas.pressure(state.rho, state.eps) * tau
