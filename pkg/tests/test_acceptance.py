"""Exit criteria for the build. Each test records one PASS/FAIL line, printed in
the terminal summary."""
import json
import os
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from conftest import record_criterion
from lbm1d import cases
from lbm1d.advection import minmod, split_flux
from lbm1d.equilibrium import (EnergyLevels, VelocitySet, equilibrium_populations,
                               format_coefficients, split_equilibrium, verify_moments)
from lbm1d.gas import GasModel, MacroState
from lbm1d.riemann import pressure_function, sample, star_pressure, star_state
from lbm1d.solver import Model, f_from_g, initialize, run, step

GAS = GasModel(gamma=1.4)
ARTIFACT = Path(__file__).parent / "artifacts" / "moment_residuals.json"

PRINTED_COEFFICIENTS = [
    "f1 = rho*(-1/4*c2*u - 1/12*c2 - 1/6*u^3 - 1/6*u^2 + 2/3*u + 2/3)",
    "f2 = rho*(1/4*c2*u - 1/12*c2 + 1/6*u^3 - 1/6*u^2 - 2/3*u + 2/3)",
    "f3 = rho*(1/8*c2*u + 1/12*c2 + 1/12*u^3 + 1/6*u^2 - 1/12*u - 1/6)",
    "f4 = rho*(-1/8*c2*u + 1/12*c2 - 1/12*u^3 + 1/6*u^2 + 1/12*u - 1/6)",
]

pytestmark = pytest.mark.acceptance


def printed_equilibria(rho, u, c2):
    return np.array([
        -rho * (c2 * u / 4 + c2 / 12 + u**3 / 6 + u**2 / 6 - 2 * u / 3 - 2 / 3),
        -rho * (-c2 * u / 4 + c2 / 12 - u**3 / 6 + u**2 / 6 + 2 * u / 3 - 2 / 3),
        rho * (c2 * u / 8 + c2 / 12 + u**3 / 12 + u**2 / 6 - u / 12 - 1 / 6),
        rho * (-c2 * u / 8 + c2 / 12 - u**3 / 12 + u**2 / 6 + u / 12 - 1 / 6),
    ])


def random_states(n=1000, seed=20240601):
    rng = np.random.default_rng(seed)
    return MacroState(rng.uniform(0.1, 2.0, n), rng.uniform(-1.5, 1.5, n), rng.uniform(0.5, 25.0, n))


def plateau_point(config):
    """Midpoint between the exact contact and right shock at t_end."""
    sol = star_state(config.left, config.right, config.gas)
    ws = sol.wave_speeds()
    return 0.5 * (ws["contact"] + ws["right_shock"]) * config.t_end


def at(profile, name, x):
    return float(np.interp(x, profile.x, profile.column(name)))


def shock_position(profile, x_from, rho_post, rho_pre):
    """Right-most crossing of the mid-density level to the right of ``x_from``."""
    level = 0.5 * (rho_post + rho_pre)
    x, rho = profile.x, profile.rho
    idx = np.flatnonzero((x[:-1] >= x_from) & (rho[:-1] >= level) & (rho[1:] < level))
    k = idx[-1]
    return x[k] + (rho[k] - level) / (rho[k] - rho[k + 1]) * (x[k + 1] - x[k])


def test_1_golden_formula():
    t0 = time.perf_counter()
    s = random_states()
    f = equilibrium_populations(s, GAS)
    ref = printed_equilibria(s.rho, s.u, GAS.peculiar_speed_sq(s.eps))
    rel = np.max(np.abs(f - ref) / np.maximum(np.abs(ref), 1e-300).max(axis=0))
    text = format_coefficients(VelocitySet((1, -1, 2, -2))).splitlines()
    seconds = time.perf_counter() - t0
    ok = rel <= 1e-12 and text == PRINTED_COEFFICIENTS and seconds < 1.0
    record_criterion(1, "golden-formula equivalence", ok,
                     f"max rel err {rel:.2e} (<=1e-12), coefficients exact={text == PRINTED_COEFFICIENTS}, "
                     f"{seconds:.3f}s (<1s)")
    assert ok


def moment_report():
    s = random_states()
    levels = EnergyLevels(30.0)
    f = split_equilibrium(s, GAS, levels)
    rep = verify_moments(f, s, GAS, levels)
    rel = rep.relative()
    names = ("mass", "momentum", "momentum_flux", "third_moment", "energy", "energy_flux",
             "energy_flux_2")
    return {
        "sample": {"n": 1000, "seed": 20240601, "zeta2": 30.0, "gamma": 1.4},
        "max_relative_residual": {n: float(r.max()) for n, r in zip(names, rel)},
        "energy_flux_2_mean_relative": float(rel[6].mean()),
    }


def test_2_moment_conditions():
    t0 = time.perf_counter()
    report = moment_report()
    seconds = time.perf_counter() - t0
    maxima = report["max_relative_residual"]
    worst = max(v for k, v in maxima.items() if k != "energy_flux_2")
    if os.environ.get("LBM1D_UPDATE_ARTIFACTS"):
        ARTIFACT.parent.mkdir(exist_ok=True)
        ARTIFACT.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    archived = json.loads(ARTIFACT.read_text())
    g_now = maxima["energy_flux_2"]
    g_then = archived["max_relative_residual"]["energy_flux_2"]
    regression_ok = abs(g_now - g_then) <= 1e-9 * abs(g_then)
    ok = worst <= 1e-12 and regression_ok and seconds < 1.0
    record_criterion(2, "moment-condition suite", ok,
                     f"worst conserved-condition residual {worst:.2e} (<=1e-12); "
                     f"second energy flux residual max {g_now:.3e} (reported, archived match={regression_ok}); "
                     f"{seconds:.3f}s (<1s)")
    assert ok


def test_3_sod_reproduction(sod_run):
    r = sod_run
    cfg = r.config
    err = cases.compare(r.profile, r.exact, norms=("l1",))
    sol = star_state(cfg.left, cfg.right, cfg.gas)
    xp = plateau_point(cfg)
    checks = {
        "rho@plateau": (at(r.profile, "rho", xp), at(r.exact, "rho", xp)),
        "u@plateau": (at(r.profile, "u", xp), sol.u_star),
        "p@plateau": (at(r.profile, "p", xp), sol.p_star),
        "u@0.2": (at(r.profile, "u", 0.2), sol.u_star),
        "p@0.2": (at(r.profile, "p", 0.2), sol.p_star),
    }
    plateau_dev = {k: abs(a / b - 1.0) for k, (a, b) in checks.items()}
    x_shock_exact = sol.wave_speeds()["right_shock"] * cfg.t_end
    x_shock = shock_position(r.profile, sol.u_star * cfg.t_end, sol.rho_star_right, cfg.right.rho)
    shock_cells = abs(x_shock - x_shock_exact) / cfg.dx
    ok = (err["rho"]["l1"] <= 0.015 and err["u"]["l1"] <= 0.03 and err["p"]["l1"] <= 0.015
          and max(plateau_dev.values()) <= 0.03 and shock_cells <= 3.0 and r.seconds < 10.0)
    record_criterion(3, "Sod reproduction", ok,
                     f"L1 rho {err['rho']['l1']:.4f} (<=0.015), u {err['u']['l1']:.4f} (<=0.03), "
                     f"p {err['p']['l1']:.4f} (<=0.015); plateau max dev {max(plateau_dev.values()):.2%} (<=3%); "
                     f"shock offset {shock_cells:.2f} cells (<=3); {r.seconds:.2f}s (<10s)")
    assert ok


def test_4_lax_reproduction(lax_run):
    r = lax_run
    cfg = r.config
    err = cases.compare(r.profile, r.exact, norms=("l1",))
    sol = star_state(cfg.left, cfg.right, cfg.gas)
    p_dev = abs(at(r.profile, "p", plateau_point(cfg)) / sol.p_star - 1.0)
    finite = r.finite and all(np.all(np.isfinite(r.profile.column(c))) for c in cases.CSV_HEADER)
    positive = bool(np.all(r.profile.rho > 0)) and r.rho_min > 0
    ok = err["rho"]["l1"] <= 0.03 and p_dev <= 0.05 and finite and positive and r.seconds < 10.0
    record_criterion(4, "Lax reproduction", ok,
                     f"L1 rho {err['rho']['l1']:.4f} (<=0.03); plateau p dev {p_dev:.2%} (<=5%); "
                     f"finite={finite}, rho>0={positive}; {r.seconds:.2f}s (<10s)")
    assert ok


def test_5_invariants(sod_run):
    t0 = time.perf_counter()
    results = {}

    # uniform equilibrium is a fixed point
    drift = 0.0
    for st, z2 in [(MacroState(1.0, 0.0, 2.5), 4.0), (MacroState(0.445, 0.698, 19.82), 30.0)]:
        cfg = replace(sod_run.config, left=st, right=st, zeta2=z2, cells=40)
        model = Model(cfg)
        s = initialize(cfg)
        for _ in range(100):
            prev = s.g
            s = step(s, cfg, model=model)
            drift = max(drift, float(np.max(np.abs(s.g - prev))))
    results["fixed point"] = (drift <= 1e-14, f"{drift:.1e}")

    # per-step telescoping of mass, momentum, energy; g/f moment agreement
    cfg = sod_run.config
    model = Model(cfg)
    s = initialize(cfg)
    cons_err = gf_err = 0.0
    for _ in range(200):
        before = np.array(model.conserved(s.interior)).sum(axis=1) * cfg.dx
        fl, fr = model.boundary_fluxes(s.g, s.pi)

        def totals(F):
            pv = F.sum(axis=1)
            return np.array([pv.sum(), model.xi @ pv, model.kinetic @ pv + cfg.zeta2 * F[:, 1].sum()])

        predicted = -cfg.dt * (totals(fr) - totals(fl))
        s = step(s, cfg, model=model)
        after = np.array(model.conserved(s.interior)).sum(axis=1) * cfg.dx
        cons_err = max(cons_err, float(np.max(np.abs(after - before - predicted) / np.maximum(np.abs(before), 1.0))))
        rho, u, eps = s.macros
        f = f_from_g(s.g, model.equilibrium(rho, u, eps), s.pi, cfg.theta)
        mg, mf = np.array(model.conserved(s.g)), np.array(model.conserved(f))
        gf_err = max(gf_err, float(np.max(np.abs(mg - mf) / np.maximum(np.abs(mg), 1.0))))
    results["conservation"] = (cons_err <= 1e-12, f"{cons_err:.1e}")
    results["g/f moments"] = (gf_err <= 1e-13, f"{gf_err:.1e}")

    # mirror symmetry on the full Sod run
    mcfg = replace(cfg, left=MacroState(cfg.right.rho, -cfg.right.u, cfg.right.eps),
                   right=MacroState(cfg.left.rho, -cfg.left.u, cfg.left.eps))
    m = run(mcfg)[-1]
    a = sod_run.snapshot
    mirror = max(float(np.max(np.abs(a.rho - m.rho[::-1]))), float(np.max(np.abs(a.u + m.u[::-1]))))
    results["mirror"] = (mirror <= 1e-12, f"{mirror:.1e}")

    # limiter and flux splitting over random inputs
    rng = np.random.default_rng(99)
    x, y = rng.normal(size=(2, 100000)) * 10.0 ** rng.integers(-6, 6, size=(2, 100000))
    mm = minmod(x, y)
    mm_ok = bool(np.all(np.abs(mm) <= np.minimum(np.abs(x), np.abs(y)))
                 and np.all(mm[x * y <= 0] == 0)
                 and np.all(np.sign(mm[mm != 0]) == np.sign(x[mm != 0])))
    e = rng.choice([-2.0, -1.0, 1.0, 2.0], size=x.size)
    fp, fm = split_flux(e, x)
    sf_ok = bool(np.all(fp + fm == e * x) and np.all(fp * fm == 0))
    results["minmod/split_flux"] = (mm_ok and sf_ok, f"{mm_ok and sf_ok}")

    seconds = time.perf_counter() - t0
    ok = all(v[0] for v in results.values()) and seconds < 5.0
    record_criterion(5, "invariant suite", ok,
                     "; ".join(f"{k} {v[1]}" for k, v in results.items()) + f"; {seconds:.2f}s (<5s)")
    assert ok


def test_6_oracle_self_test():
    t0 = time.perf_counter()
    left, right = MacroState(1.0, 0.0, 2.5), MacroState(0.125, 0.0, 2.0)
    sol = star_state(left, right, GAS)
    p_bis = star_pressure(left, right, GAS, newton=False)
    cross = abs(sol.p_star - p_bis)
    S = sol.wave_speeds()["right_shock"]
    pre, post = sample(sol, S + 1e-9), sample(sol, S - 1e-9)

    def uf(s):
        p = GAS.pressure(s.rho, s.eps)
        E = s.rho * (s.eps + 0.5 * s.u**2)
        return np.array([s.rho, s.rho * s.u, E]), np.array([s.rho * s.u, s.rho * s.u**2 + p, (E + p) * s.u])

    (ua, fa), (ub, fb) = uf(pre), uf(post)
    rh = float(np.max(np.abs((fb - fa) - S * (ub - ua)) / np.maximum(np.abs(fb), 1.0)))
    sym = abs(star_state(MacroState(0.7, -0.4, 3.0), MacroState(0.7, 0.4, 3.0), GAS).u_star)
    resid = abs(pressure_function(sol.p_star, left, right, GAS)[0])
    seconds = time.perf_counter() - t0
    ok = (abs(sol.p_star - 0.30313) <= 1e-4 and abs(sol.u_star - 0.92745) <= 1e-4 and cross <= 1e-10
          and rh <= 1e-10 and sym <= 1e-12 and resid <= 1e-12 and seconds < 1.0)
    record_criterion(6, "oracle self-test", ok,
                     f"p* {sol.p_star:.6f}, u* {sol.u_star:.6f} (+-1e-4); Newton vs bisection {cross:.1e}; "
                     f"RH {rh:.1e} (<=1e-10); symmetric u* {sym:.1e} (<=1e-12); {seconds:.3f}s (<1s)")
    assert ok


def test_7_boundedness(sod_run):
    lo, hi = sod_run.rho_min, sod_run.rho_max
    ok = lo >= 0.095 and hi <= 1.03
    record_criterion(7, "Sod boundedness", ok, f"density range over all steps [{lo:.5f}, {hi:.5f}] within [0.095, 1.03]")
    assert ok
