"""Polytropic-gas relations linking the kinetic quantities (rest energy, peculiar
speed) to the macroscopic state.

All functions accept scalars or numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateStateError(ValueError):
    """Non-positive density or internal energy somewhere in the flow."""

    def __init__(self, message, cell=None, time=None, step=None):
        parts = [message]
        if cell is not None:
            parts.append(f"cell={cell}")
        if time is not None:
            parts.append(f"t={time:.17g}")
        if step is not None:
            parts.append(f"step={step}")
        super().__init__(", ".join(parts))
        self.cell = cell
        self.time = time
        self.step = step


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4
    r_gas: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise ValueError(f"only dim=1 is supported, got {self.dim}")
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        # zeta >= 0 requires gamma <= 1 + 2/D
        if self.gamma > 1.0 + 2.0 / self.dim:
            raise ValueError(
                f"gamma={self.gamma} gives a negative rest energy; need gamma <= {1 + 2 / self.dim}")
        if not self.r_gas > 0.0:
            raise ValueError(f"r_gas must be positive, got {self.r_gas}")

    @property
    def rest_energy_factor(self):
        return 1.0 - 0.5 * self.dim * (self.gamma - 1.0)

    def pressure(self, rho, eps):
        return rho * (self.gamma - 1.0) * eps

    def peculiar_speed_sq(self, eps):
        return 2.0 * (self.gamma - 1.0) * eps

    def rest_energy(self, eps):
        return self.rest_energy_factor * eps


def _check_positive(rho, eps):
    rho = np.asarray(rho)
    eps = np.asarray(eps)
    bad = ~((rho > 0) & (eps > 0))
    if np.any(bad):
        idx = int(np.flatnonzero(bad.ravel())[0]) if bad.ndim else None
        raise DegenerateStateError(
            "non-positive density or internal energy", cell=idx)


@dataclass(frozen=True)
class MacroState:
    """Primitive state (density, velocity, specific internal energy)."""

    rho: float
    u: float
    eps: float

    def __post_init__(self):
        _check_positive(self.rho, self.eps)


@dataclass(frozen=True)
class ConservedState:
    rho: float
    mom: float
    etot: float


@dataclass(frozen=True)
class ThermoRecord:
    p: float
    c: float
    zeta: float
    e_total: float
    temperature: float


def thermo(state: MacroState, gas: GasModel) -> ThermoRecord:
    p = gas.pressure(state.rho, state.eps)
    return ThermoRecord(
        p=p,
        c=np.sqrt(gas.peculiar_speed_sq(state.eps)),
        zeta=gas.rest_energy(state.eps),
        e_total=state.eps + 0.5 * state.u**2,
        temperature=p / (state.rho * gas.r_gas),
    )


def conserved_to_primitive(U: ConservedState) -> MacroState:
    rho = np.asarray(U.rho, dtype=float)
    if np.any(~(rho > 0)):
        bad = np.flatnonzero(~(rho > 0).ravel())
        raise DegenerateStateError("non-positive density",
                                   cell=int(bad[0]) if rho.ndim else None)
    u = U.mom / rho
    eps = U.etot / rho - 0.5 * u**2
    if rho.ndim == 0:
        return MacroState(float(rho), float(u), float(eps))
    return MacroState(rho, u, eps)


def primitive_to_conserved(state: MacroState) -> ConservedState:
    mom = state.rho * state.u
    return ConservedState(state.rho, mom, state.rho * state.eps + 0.5 * mom * state.u)

