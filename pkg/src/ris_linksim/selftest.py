"""Quick oracle checks runnable from the command line (``ris-linksim selftest``)."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .analysis import (
    DeploymentScenario,
    array_gain_scaling,
    loglog_slope,
    required_elements,
    thermal_noise_floor_dbm,
)
from .beamforming import OptimizerConfig, brute_force_oracle, optimize_passive, wmmse_precoder
from .geometry import ChannelSet, complex_gaussian, make_rng
from .link import ActiveRisState, NoiseModel, PassiveRisState, PowerBudget, sinrs
from .numerics import hermitian, matmul, solve_hermitian_positive


def _numerics():
    rng = make_rng(11)
    a = complex_gaussian(rng, (4, 4))
    a = matmul(hermitian(a), a) + 4 * np.eye(4)
    b = complex_gaussian(rng, (4, 2))
    x = solve_hermitian_positive(a, b)
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) <= 1e-10


def _single_user_capacity():
    h = complex_gaussian(make_rng(12), (1, 4))
    p, s2 = 1e-2, 1e-3
    sol = wmmse_precoder(h, p, s2)
    assert abs(sol.achieved_sum_rate - math.log2(1 + p * np.sum(np.abs(h) ** 2) / s2)) <= 1e-6


def _orthogonal_users():
    sol = wmmse_precoder(np.eye(2, 4), 2.0, 0.1)
    assert abs(sol.achieved_sum_rate - 2 * math.log2(1 + 1.0 / 0.1)) <= 1e-6


def _calculators():
    for f, n in ((5e9, 10000), (10e9, 20000), (20e9, 40000)):
        assert required_elements(DeploymentScenario(200, 150, 200, f), nominal_wavelength=True) == n
    assert abs(thermal_noise_floor_dbm(100e6, 290, 10000) + 54.0) <= 0.1
    ns = np.unique(np.logspace(2, 4, 21).astype(int))
    assert abs(loglog_slope(array_gain_scaling(ns, 0.0, 1.0)) - 2.0) <= 0.02
    assert abs(loglog_slope(array_gain_scaling(ns, 1.0, 0.0)) - 1.0) <= 0.02


def _passive_oracle():
    rng = make_rng(13)
    for _ in range(5):
        ch = ChannelSet(complex_gaussian(rng, (2, 2)), complex_gaussian(rng, (2, 1)), np.zeros((2, 1)))
        budget, noise = PowerBudget.split(1.0), NoiseModel(0.1)
        opt = optimize_passive(ch, budget, noise)
        assert opt.achieved_sum_rate >= brute_force_oracle(ch, budget, noise, 1).achieved_sum_rate - 1e-9


def _active_degeneracy():
    rng = make_rng(14)
    ch = ChannelSet(complex_gaussian(rng, (8, 3)), complex_gaussian(rng, (8, 2)), complex_gaussian(rng, (3, 2)))
    ph = rng.uniform(0, 2 * np.pi, 8)
    w = complex_gaussian(rng, (3, 2))
    noise = NoiseModel(0.5, 0.0)
    a = sinrs(w, ch, PassiveRisState(ph), noise)
    b = sinrs(w, ch, ActiveRisState(np.exp(1j * ph), 1.0, 0.0), noise)
    assert np.allclose(a, b, rtol=1e-12, atol=0)


CHECKS: dict[str, Callable[[], None]] = {
    "numerics residual": _numerics,
    "single-user WMMSE capacity": _single_user_capacity,
    "orthogonal two-user WMMSE": _orthogonal_users,
    "closed-form calculators": _calculators,
    "passive beats 1-bit oracle": _passive_oracle,
    "active reduces to passive": _active_degeneracy,
}


def run_selftest(out=print) -> bool:
    ok = True
    for name, check in CHECKS.items():
        try:
            check()
            out(f"PASS  {name}")
        except AssertionError as exc:
            ok = False
            out(f"FAIL  {name} {exc}")
    return ok
