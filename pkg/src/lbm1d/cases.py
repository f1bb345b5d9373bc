"""Shock-tube presets, reference scaling, CSV output and error norms."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .gas import GasModel, MacroState
from .riemann import sample_profile, star_state
from .solver import SimulationConfig, Snapshot

CSV_HEADER = ("x", "rho", "u", "p", "e")
VARIABLES = CSV_HEADER[1:]
NORMS = ("l1", "l2", "linf")


class UnknownPresetError(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True)
class CaseSpec:
    name: str
    config: SimulationConfig
    output_times: tuple = ()
    output: str = "out.csv"


_PRESETS = {
    "sod": dict(left=(1.0, 0.0, 2.5), right=(0.125, 0.0, 2.0), zeta2=4.0, t_end=0.22),
    "lax": dict(left=(0.445, 0.698, 19.82), right=(0.5, 0.0, 2.855), zeta2=30.0, t_end=0.14),
}
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> CaseSpec:
    try:
        p = _PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}") from None
    config = SimulationConfig(
        left=MacroState(*p["left"]),
        right=MacroState(*p["right"]),
        gas=GasModel(gamma=1.4),
        tau=1e-4,
        theta=0.5,
        zeta2=p["zeta2"],
        cells=201,
        dt_factor=0.25,
        t_end=p["t_end"],
        domain=(-0.5, 0.5),
    )
    return CaseSpec(name, config, output=f"{name}.csv")


# -- reference scales ---------------------------------------------------------

@dataclass(frozen=True)
class ReferenceScales:
    rho0: float = 1.0
    L0: float = 1.0
    e0: float = 1.0

    def __post_init__(self):
        for k in ("rho0", "L0", "e0"):
            if not getattr(self, k) > 0:
                raise ValueError(f"reference scale {k} must be positive")

    @property
    def u0(self):
        return math.sqrt(self.e0)

    @property
    def t0(self):
        return self.L0 / self.u0

    def unit(self, kind):
        units = {"t": self.t0, "x": self.L0, "rho": self.rho0, "u": self.u0, "e": self.e0}
        try:
            return units[kind]
        except KeyError:
            raise ValueError(f"no reference scale for {kind!r}") from None


def nondimensionalize(quantities: dict, scales: ReferenceScales) -> dict:
    """Divide each of ``t, x, rho, u, e`` by its reference unit."""
    return {k: np.asarray(v) / scales.unit(k) if not np.isscalar(v) else v / scales.unit(k)
            for k, v in quantities.items()}


def dimensionalize(quantities: dict, scales: ReferenceScales) -> dict:
    return {k: np.asarray(v) * scales.unit(k) if not np.isscalar(v) else v * scales.unit(k)
            for k, v in quantities.items()}


# -- profiles and CSV ---------------------------------------------------------

@dataclass
class Profile:
    x: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    e: np.ndarray
    t: float = float("nan")

    @classmethod
    def from_snapshot(cls, s: Snapshot):
        return cls(s.x, s.rho, s.u, s.p, s.e, s.t)

    def column(self, name):
        return getattr(self, name)


def exact_profile(config: SimulationConfig, t=None) -> Profile:
    t = config.t_end if t is None else t
    sol = star_state(config.left, config.right, config.gas)
    x = config.cell_centers()
    rho, u, p, eps = sample_profile(sol, x, t)
    return Profile(x, rho, u, p, eps, t)


def write_csv(path, profile):
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(*(np.asarray(profile.column(c)) for c in CSV_HEADER)):
            w.writerow([f"{float(v):.17g}" for v in row])


def read_csv(path) -> Profile:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}, got {','.join(header)}")
        data = np.array([[float(v) for v in row] for row in r if row], dtype=float)
    data = data.reshape(-1, len(CSV_HEADER))
    return Profile(*data.T)


def snapshot_path(base, t, many):
    base = Path(base)
    if not many:
        return base
    return base.with_name(f"{base.stem}_t{t:.6g}{base.suffix or '.csv'}")


# -- comparison ---------------------------------------------------------------

class GridMismatchError(ValueError):
    pass


@dataclass
class ErrorReport:
    norms: dict = field(default_factory=dict)  # variable -> {norm -> value}

    def __getitem__(self, key):
        return self.norms[key]

    def as_dict(self):
        return {v: dict(n) for v, n in self.norms.items()}

    def format(self):
        names = sorted({n for d in self.norms.values() for n in d}, key=NORMS.index)
        lines = ["var   " + "".join(f"{n:>14}" for n in names)]
        for var, d in self.norms.items():
            lines.append(f"{var:<6}" + "".join(f"{d[n]:>14.6e}" for n in names))
        return "\n".join(lines)


def compare(a: Profile, b: Profile, norms=NORMS, variables=VARIABLES) -> ErrorReport:
    """Discrete error norms of ``a - b`` per variable.

    ``l1`` is the mean absolute difference, ``l2`` the root-mean-square and
    ``linf`` the maximum absolute difference, all over cell centres.
    """
    if len(a.x) != len(b.x) or not np.allclose(a.x, b.x, rtol=0, atol=1e-12):
        raise GridMismatchError(f"grids differ ({len(a.x)} vs {len(b.x)} points)")
    report = ErrorReport()
    for var in variables:
        diff = np.abs(np.asarray(a.column(var)) - np.asarray(b.column(var)))
        entry = {}
        for n in norms:
            if n == "l1":
                entry[n] = float(np.mean(diff))
            elif n == "l2":
                entry[n] = float(np.sqrt(np.mean(diff**2)))
            elif n == "linf":
                entry[n] = float(np.max(diff))
            else:
                raise ValueError(f"unknown norm {n!r}")
        report.norms[var] = entry
    return report


def with_overrides(spec: CaseSpec, **overrides) -> CaseSpec:
    """Copy of ``spec`` with config fields replaced (``None`` values ignored)."""
    fields = {k: v for k, v in overrides.items() if v is not None}
    return replace(spec, config=replace(spec.config, **fields))
