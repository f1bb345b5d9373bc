"""Second-order TVD upwind fluxes with a minmod limiter.

Rows carry ``GHOSTS`` ghost cells on each side. Interface ``k`` of a row
separates array cells ``k`` and ``k + 1``; the interior interfaces used by the
update are ``k = GHOSTS - 1 .. n_cells - GHOSTS - 1``.
"""
from dataclasses import dataclass

import numpy as np

GHOSTS = 2


def minmod(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)
    return out if out.ndim else float(out)


def split_flux(e, f):
    """Upwind split of ``e * f`` into the right- and left-moving parts."""
    e = np.asarray(e, dtype=float)
    f_plus = 0.5 * (e + np.abs(e)) * f
    f_minus = 0.5 * (e - np.abs(e)) * f
    return f_plus, f_minus


@dataclass
class PopulationRow:
    values: np.ndarray
    dx: float

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.values.shape[-1] < 2 * GHOSTS + 1:
            raise ValueError("row needs at least one interior cell plus ghosts")

    @property
    def n_interior(self):
        return self.values.shape[-1] - 2 * GHOSTS


def interface_fluxes(values, e, limiter=True):
    """Limited fluxes at every interface that has a full stencil.

    ``values`` may be a single row or a stack of rows (last axis is space);
    ``e`` broadcasts against the leading axes. Returns ``n_cells - 3`` values
    per row, for interfaces ``k = 1 .. n_cells - 3``.
    """
    values = np.asarray(values, dtype=float)
    e = np.asarray(e, dtype=float)
    if e.ndim:
        e = e.reshape(e.shape + (1,) * (values.ndim - e.ndim))
    fp, fm = split_flux(e, values)
    dfp = np.diff(fp, axis=-1)  # dfp[..., k] = F+(k+1) - F+(k), interface k+1/2
    dfm = np.diff(fm, axis=-1)
    # interfaces k = 1 .. n-3
    left = fp[..., 1:-2]
    right = fm[..., 2:-1]
    if limiter:
        left = left + 0.5 * minmod(dfp[..., 1:-1], dfp[..., :-2])
        right = right - 0.5 * minmod(dfm[..., 1:-1], dfm[..., 2:])
    return left + right


def interface_flux(row: PopulationRow, e, k):
    """Flux through the interface between array cells ``k`` and ``k + 1``."""
    n = row.values.shape[-1]
    if not 1 <= k <= n - 3:
        raise IndexError(f"interface {k} lacks a full stencil (valid 1..{n - 3})")
    return float(interface_fluxes(row.values[k - 1:k + 3], e)[0])


def advection_divergence(row: PopulationRow, e, limiter=True):
    """``d(e f)/dx`` at each interior cell, in conservation form."""
    flux = interface_fluxes(row.values, e, limiter=limiter)
    return np.diff(flux, axis=-1) / row.dx
