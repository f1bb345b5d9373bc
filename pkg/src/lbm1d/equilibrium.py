"""Discrete equilibria from the assignment matrix.

The four discrete speeds carry the moments of order 0..3 of the local state
exactly: ``f_eq = V^{-1} S_N`` where row ``k`` of ``V`` holds ``xi_i**k``.
The energy moments are then met by sharing each population between two
rest-energy levels, 0 and ``zeta2``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .gas import GasModel, MacroState

N_MOMENTS = 4
DEFAULT_VELOCITIES = (1, -1, 2, -2)


class SingularMatrixError(ValueError):
    pass


class Zeta2TooSmallError(ValueError):
    pass


class Zeta2Warning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class VelocitySet:
    velocities: tuple = DEFAULT_VELOCITIES

    def __post_init__(self):
        vel = tuple(self.velocities)
        object.__setattr__(self, "velocities", vel)
        if len(vel) != N_MOMENTS:
            raise ValueError(f"need exactly {N_MOMENTS} velocities, got {len(vel)}")
        seen, dups = set(), []
        for v in vel:
            if v in seen and v not in dups:
                dups.append(v)
            seen.add(v)
        if dups:
            raise SingularMatrixError(
                f"moment matrix is singular: repeated velocities {dups}")

    @property
    def xi(self):
        return np.array([float(v) for v in self.velocities])

    def __len__(self):
        return len(self.velocities)


def invert(matrix):
    """Gauss-Jordan inverse with partial pivoting.

    Works on any field type supporting ``abs`` and the arithmetic operators, so
    the same routine serves float arrays and exact ``Fraction`` tables.
    """
    n = len(matrix)
    one, zero = type(matrix[0][0])(1), type(matrix[0][0])(0)
    a = [list(row) + [one if i == j else zero for j in range(n)]
         for i, row in enumerate(matrix)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[piv][col] == 0:
            raise SingularMatrixError("moment matrix is singular")
        a[col], a[piv] = a[piv], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def _vandermonde(values):
    return [[v**k for v in values] for k in range(N_MOMENTS)]


@dataclass(frozen=True, eq=False)
class MomentMatrix:
    velocities: VelocitySet
    v: np.ndarray
    v_inv: np.ndarray


@lru_cache(maxsize=None)
def _cached_matrix(velocities):
    vs = VelocitySet(velocities)
    v = np.array(_vandermonde(vs.xi.tolist()))
    v_inv = np.array(invert(v.tolist()))
    v.setflags(write=False)
    v_inv.setflags(write=False)
    return MomentMatrix(vs, v, v_inv)


def moment_matrix(vs: VelocitySet = VelocitySet()) -> MomentMatrix:
    return _cached_matrix(vs.velocities)


@dataclass(frozen=True)
class EnergyLevels:
    zeta2: float
    zeta1: float = 0.0

    def __post_init__(self):
        if self.zeta1 != 0.0:
            raise ValueError("the lower rest-energy level is fixed at 0")
        if not self.zeta2 > 0.0:
            raise ValueError(f"zeta2 must be positive, got {self.zeta2}")

    @property
    def values(self):
        return np.array([self.zeta1, self.zeta2])


def moment_vector(state: MacroState, gas: GasModel):
    """Non-energy moment targets (rho, rho u, rho u^2 + p, rho u^3 + 3 p u)."""
    rho, u = state.rho, state.u
    p = gas.pressure(rho, state.eps)
    return np.array([rho, rho * u, rho * u**2 + p, rho * u**3 + 3.0 * p * u])


def equilibrium_populations(state: MacroState, gas: GasModel, m: MomentMatrix = None):
    if m is None:
        m = moment_matrix()
    s = moment_vector(state, gas)
    return np.tensordot(m.v_inv, s, axes=1)


def level_weights(zeta, levels: EnergyLevels):
    zeta = np.asarray(zeta, dtype=float)
    upper = zeta / levels.zeta2
    return np.stack([1.0 - upper, upper])


def split_energy(f_eq, zeta, levels: EnergyLevels, strict=False):
    """Share ``f_eq`` between the two levels so the mean rest energy is ``zeta``.

    Returns an array of shape ``(4, 2, ...)``. A ``zeta`` above ``zeta2`` makes
    the lower-level weight negative; the moment identities still hold, so this
    only warns unless ``strict`` is set.
    """
    zmax = float(np.max(zeta))
    if zmax > levels.zeta2:
        msg = (f"local rest energy {zmax:.6g} exceeds zeta2={levels.zeta2:.6g}; "
               "level weights are negative")
        if strict:
            raise Zeta2TooSmallError(msg)
        warnings.warn(msg, Zeta2Warning, stacklevel=2)
    f_eq = np.asarray(f_eq, dtype=float)
    w = level_weights(zeta, levels)
    return f_eq[:, None] * w[None]


def split_equilibrium(state: MacroState, gas: GasModel, levels: EnergyLevels,
                      m: MomentMatrix = None, strict=False):
    f_eq = equilibrium_populations(state, gas, m)
    return split_energy(f_eq, gas.rest_energy(state.eps), levels, strict=strict)


# -- exact polynomial forms ----------------------------------------------------

# Monomials are keyed by (power of c^2, power of u); the common factor rho is
# implied. p = rho c^2 / 2.
_HALF = Fraction(1, 2)
_SYMBOLIC_MOMENTS = (
    {(0, 0): Fraction(1)},
    {(0, 1): Fraction(1)},
    {(0, 2): Fraction(1), (1, 0): _HALF},
    {(0, 3): Fraction(1), (1, 1): 3 * _HALF},
)


def polynomial_coefficients(vs: VelocitySet = VelocitySet()):
    """Exact rational coefficients of each ``f_i^eq / rho`` as a polynomial in
    ``(c^2, u)``.

    Returns one ``{(c2_power, u_power): Fraction}`` dict per velocity.
    """
    v = _vandermonde([Fraction(x) for x in vs.velocities])
    v_inv = invert(v)
    polys = []
    for row in v_inv:
        poly = {}
        for weight, moment in zip(row, _SYMBOLIC_MOMENTS):
            for mono, coef in moment.items():
                poly[mono] = poly.get(mono, Fraction(0)) + weight * coef
        polys.append({k: c for k, c in poly.items() if c != 0})
    return polys


def _monomial(c2_pow, u_pow):
    parts = []
    if c2_pow:
        parts.append("c2" if c2_pow == 1 else f"c2^{c2_pow}")
    if u_pow:
        parts.append("u" if u_pow == 1 else f"u^{u_pow}")
    return "*".join(parts)


def format_polynomial(name, poly):
    terms = []
    for (c2_pow, u_pow) in sorted(poly, key=lambda k: (-k[0], -k[1])):
        coef = poly[(c2_pow, u_pow)]
        mono = _monomial(c2_pow, u_pow)
        mag = abs(coef)
        if mono and mag == 1:
            body = mono
        elif mono:
            body = f"{mag}*{mono}"
        else:
            body = str(mag)
        sign = "-" if coef < 0 else "+"
        if not terms:
            terms.append(body if sign == "+" else f"-{body}")
        else:
            terms.append(f"{sign} {body}")
    return f"{name} = rho*({' '.join(terms) if terms else '0'})"


def format_coefficients(vs: VelocitySet = VelocitySet()):
    return "\n".join(format_polynomial(f"f{i + 1}", poly)
                     for i, poly in enumerate(polynomial_coefficients(vs)))


def evaluate_polynomial(poly, rho, u, c2):
    total = 0.0
    for (c2_pow, u_pow), coef in poly.items():
        total = total + float(coef) * c2**c2_pow * u**u_pow
    return rho * total


# -- moment audit --------------------------------------------------------------

CONDITION_NAMES = (
    "mass", "momentum", "momentum_flux", "third_moment",
    "energy", "energy_flux", "energy_flux_2",
)


@dataclass(frozen=True)
class MomentReport:
    """Absolute residuals of the seven discrete moment conditions.

    The last condition (second-order energy flux) needs the fourth velocity
    moment, which four speeds cannot set independently, so it is reported but
    not expected to vanish.
    """

    residuals: np.ndarray
    targets: np.ndarray

    def relative(self):
        return np.abs(self.residuals) / np.maximum(1.0, np.abs(self.targets))

    def satisfied(self, tol=1e-12, conditions=6):
        return bool(np.all(self.relative()[:conditions] <= tol))

    def as_dict(self):
        return {name: {"residual": float(r), "target": float(t)}
                for name, r, t in zip(CONDITION_NAMES, self.residuals, self.targets)}


def verify_moments(f_split, state: MacroState, gas: GasModel, levels: EnergyLevels,
                   vs: VelocitySet = VelocitySet()):
    f_split = np.asarray(f_split, dtype=float)
    xi = vs.xi
    zeta = levels.values
    rho, u, eps = state.rho, state.u, state.eps
    p = gas.pressure(rho, eps)
    e_total = eps + 0.5 * u**2
    rgt = p / rho  # R_g T

    f = f_split.sum(axis=1)
    # per-population energy weight (1/2 xi^2 + zeta_j)
    w = 0.5 * xi[:, None] ** 2 + zeta[None, :]

    computed = np.array([
        f.sum(axis=0),
        np.tensordot(xi, f, axes=1),
        np.tensordot(xi**2, f, axes=1),
        np.tensordot(xi**3, f, axes=1),
        np.tensordot(w, f_split, axes=([0, 1], [0, 1])),
        np.tensordot(w * xi[:, None], f_split, axes=([0, 1], [0, 1])),
        np.tensordot(w * xi[:, None] ** 2, f_split, axes=([0, 1], [0, 1])),
    ])
    targets = np.array([
        rho,
        rho * u,
        rho * u**2 + p,
        rho * u**3 + 3.0 * p * u,
        rho * e_total,
        (rho * e_total + p) * u,
        (rho * e_total + 2.0 * p) * u**2 + p * (e_total + rgt),
    ])
    return MomentReport(computed - targets, targets)
