"""Exact solution of the ideal-gas Riemann problem for the 1D Euler equations.

Used as the reference for the shock-tube runs. The star pressure is bracketed
and bisected, then polished with Newton steps that never leave the bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gas import GasModel, MacroState

BISECT_RTOL = 1e-6
RESIDUAL_TOL = 1e-12
MAX_ITER = 200


class VacuumError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class RiemannSolution:
    p_star: float
    u_star: float
    left_wave: str  # "shock" | "rarefaction"
    right_wave: str
    rho_star_left: float
    rho_star_right: float
    left: MacroState
    right: MacroState
    gas: GasModel

    def wave_speeds(self):
        """Dict of the characteristic speeds bounding each wave."""
        g = self.gas.gamma
        out = {"contact": self.u_star}
        pl, pr = _pressure(self.left, g), _pressure(self.right, g)
        al, ar = sound_speed(self.left, g), sound_speed(self.right, g)
        if self.left_wave == "shock":
            out["left_shock"] = self.left.u - al * math.sqrt(
                (g + 1) / (2 * g) * self.p_star / pl + (g - 1) / (2 * g))
        else:
            out["left_head"] = self.left.u - al
            out["left_tail"] = self.u_star - al * (self.p_star / pl) ** ((g - 1) / (2 * g))
        if self.right_wave == "shock":
            out["right_shock"] = self.right.u + ar * math.sqrt(
                (g + 1) / (2 * g) * self.p_star / pr + (g - 1) / (2 * g))
        else:
            out["right_head"] = self.right.u + ar
            out["right_tail"] = self.u_star + ar * (self.p_star / pr) ** ((g - 1) / (2 * g))
        return out


def _pressure(s: MacroState, gamma):
    return (gamma - 1.0) * s.rho * s.eps


def sound_speed(s: MacroState, gamma):
    return math.sqrt(gamma * _pressure(s, gamma) / s.rho)


def _wave_function(p, s: MacroState, gamma):
    """Velocity jump across one wave and its derivative in p."""
    pk = _pressure(s, gamma)
    ak = sound_speed(s, gamma)
    if p > pk:
        a = 2.0 / ((gamma + 1.0) * s.rho)
        b = (gamma - 1.0) / (gamma + 1.0) * pk
        root = math.sqrt(a / (p + b))
        return (p - pk) * root, root * (1.0 - 0.5 * (p - pk) / (p + b))
    ratio = p / pk
    expo = (gamma - 1.0) / (2.0 * gamma)
    val = 2.0 * ak / (gamma - 1.0) * (ratio**expo - 1.0)
    deriv = ratio ** (-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * ak)
    return val, deriv


def pressure_function(p, left, right, gas):
    fl, dl = _wave_function(p, left, gas.gamma)
    fr, dr = _wave_function(p, right, gas.gamma)
    return fl + fr + (right.u - left.u), dl + dr


def star_pressure(left: MacroState, right: MacroState, gas: GasModel, newton=True):
    """Root of the pressure function. ``newton=False`` gives pure bisection."""
    g = gas.gamma
    al, ar = sound_speed(left, g), sound_speed(right, g)
    if 2.0 * (al + ar) / (g - 1.0) <= right.u - left.u:
        raise VacuumError("initial data generate a vacuum")

    def fn(p):
        return pressure_function(p, left, right, gas)[0]

    pl, pr = _pressure(left, g), _pressure(right, g)
    lo, hi = 0.0, max(pl, pr)
    while fn(hi) < 0.0:
        lo, hi = hi, 2.0 * hi
    # fn(0+) < 0 is guaranteed by the no-vacuum condition
    tol = BISECT_RTOL if newton else 4.0 * np.finfo(float).eps
    for _ in range(MAX_ITER):
        mid = 0.5 * (lo + hi)
        if fn(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * hi:
            break
    else:
        raise ConvergenceError("bisection did not converge")
    p = 0.5 * (lo + hi)
    if not newton:
        return p
    for _ in range(MAX_ITER):
        val, deriv = pressure_function(p, left, right, gas)
        if abs(val) <= RESIDUAL_TOL:
            return p
        if val < 0.0:
            lo = p
        else:
            hi = p
        p_new = p - val / deriv
        if not lo < p_new < hi:
            p_new = 0.5 * (lo + hi)
        if p_new == p:
            return p
        p = p_new
    raise ConvergenceError(f"Newton polish stalled at p={p!r}")


def star_state(left: MacroState, right: MacroState, gas: GasModel = GasModel()) -> RiemannSolution:
    g = gas.gamma
    p = star_pressure(left, right, gas)
    fl, _ = _wave_function(p, left, g)
    fr, _ = _wave_function(p, right, g)
    u = 0.5 * (left.u + right.u) + 0.5 * (fr - fl)

    def star_density(s):
        pk = _pressure(s, g)
        ratio = p / pk
        if p > pk:
            k = (g - 1.0) / (g + 1.0)
            return s.rho * (ratio + k) / (k * ratio + 1.0)
        return s.rho * ratio ** (1.0 / g)

    pl, pr = _pressure(left, g), _pressure(right, g)
    return RiemannSolution(
        p_star=p,
        u_star=u,
        left_wave="shock" if p > pl else "rarefaction",
        right_wave="shock" if p > pr else "rarefaction",
        rho_star_left=star_density(left),
        rho_star_right=star_density(right),
        left=left,
        right=right,
        gas=gas,
    )


def _primitive(rho, u, p, gamma):
    return MacroState(rho, u, p / ((gamma - 1.0) * rho))


def sample(sol: RiemannSolution, x_over_t) -> MacroState:
    """Self-similar solution at ``x/t``."""
    g = sol.gas.gamma
    left, right = sol.left, sol.right
    s = float(x_over_t)
    ps, us = sol.p_star, sol.u_star
    if s <= us:
        pl = _pressure(left, g)
        al = sound_speed(left, g)
        if sol.left_wave == "shock":
            speed = left.u - al * math.sqrt((g + 1) / (2 * g) * ps / pl + (g - 1) / (2 * g))
            if s <= speed:
                return left
            return _primitive(sol.rho_star_left, us, ps, g)
        head = left.u - al
        tail = us - al * (ps / pl) ** ((g - 1) / (2 * g))
        if s <= head:
            return left
        if s >= tail:
            return _primitive(sol.rho_star_left, us, ps, g)
        # inside the left fan
        c = 2.0 / (g + 1) + (g - 1) / ((g + 1) * al) * (left.u - s)
        rho = left.rho * c ** (2.0 / (g - 1))
        u = 2.0 / (g + 1) * (al + 0.5 * (g - 1) * left.u + s)
        return _primitive(rho, u, pl * c ** (2.0 * g / (g - 1)), g)

    pr = _pressure(right, g)
    ar = sound_speed(right, g)
    if sol.right_wave == "shock":
        speed = right.u + ar * math.sqrt((g + 1) / (2 * g) * ps / pr + (g - 1) / (2 * g))
        if s >= speed:
            return right
        return _primitive(sol.rho_star_right, us, ps, g)
    head = right.u + ar
    tail = us + ar * (ps / pr) ** ((g - 1) / (2 * g))
    if s >= head:
        return right
    if s <= tail:
        return _primitive(sol.rho_star_right, us, ps, g)
    c = 2.0 / (g + 1) - (g - 1) / ((g + 1) * ar) * (right.u - s)
    rho = right.rho * c ** (2.0 / (g - 1))
    u = 2.0 / (g + 1) * (-ar + 0.5 * (g - 1) * right.u + s)
    return _primitive(rho, u, pr * c ** (2.0 * g / (g - 1)), g)


def sample_profile(sol: RiemannSolution, x, t, x0=0.0):
    """Arrays (rho, u, p, eps) at positions ``x`` and time ``t``."""
    x = np.asarray(x, dtype=float)
    g = sol.gas.gamma
    out = np.empty((4, x.size))
    for k, xk in enumerate(x.ravel()):
        if t > 0:
            st = sample(sol, (xk - x0) / t)
        else:
            st = sol.left if xk < x0 else sol.right
        out[:, k] = (st.rho, st.u, (g - 1.0) * st.rho * st.eps, st.eps)
    return tuple(a.reshape(x.shape) for a in out)
