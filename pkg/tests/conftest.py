import time

import numpy as np
import pytest

ACCEPTANCE = {}


def record_criterion(number, title, ok, detail):
    ACCEPTANCE[number] = (title, bool(ok), detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}: {detail}")


class _Run:
    """A preset run plus per-step density extremes."""

    def __init__(self, name):
        from lbm1d import cases
        from lbm1d.solver import run

        self.spec = cases.preset(name)
        self.config = self.spec.config
        self.rho_min, self.rho_max = np.inf, -np.inf
        self.finite = True

        def monitor(state, model):
            rho = state.macros[0][2:-2]
            self.rho_min = min(self.rho_min, float(rho.min()))
            self.rho_max = max(self.rho_max, float(rho.max()))
            self.finite &= bool(np.all(np.isfinite(state.g)))

        t0 = time.perf_counter()
        self.snapshot = run(self.config, on_step=monitor)[-1]
        self.seconds = time.perf_counter() - t0
        self.profile = cases.Profile.from_snapshot(self.snapshot)
        self.exact = cases.exact_profile(self.config)


@pytest.fixture(scope="session")
def sod_run():
    return _Run("sod")


@pytest.fixture(scope="session")
def lax_run():
    return _Run("lax")
