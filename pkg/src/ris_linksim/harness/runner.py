"""Monte Carlo execution of the distance sweep.

Every (L, trial) pair is an independent work unit keyed by
``(master_seed, L index, trial index)``. All schemes of a unit run on the
same channel realization, so scheme differences are paired.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..beamforming import (
    BeamformingSolution,
    optimize_active,
    optimize_passive,
    random_phase_scheme,
    without_ris,
)
from ..geometry import (
    LINK_RANDOM_PHASE,
    LINK_USER_DROP,
    ChannelSet,
    SystemGeometry,
    assemble_channels,
    child_key,
    drop_users,
)
from ..link import NoiseModel, PowerBudget, desired_receive_power, reflect_power, snr_upper_bound_check
from .config import ScenarioConfig

log = logging.getLogger(__name__)

FEASIBILITY_RTOL = 1e-9


class TrialAssertionError(AssertionError):
    """An invariant failed on one trial; `key` replays it via :func:`run_trial`."""

    def __init__(self, message: str, key: tuple):
        super().__init__(f"{message} (trial key {key})")
        self.key = key


@dataclass(frozen=True)
class TrialOutcome:
    l_index: int
    trial: int
    channel_digest: str
    rates: dict[str, float]
    iterations: dict[str, int]


@dataclass(frozen=True)
class ResultCell:
    L_m: float
    scheme: str
    mean_sum_rate_bpshz: float
    std_err: float
    trials: int
    mean_iterations: float


@dataclass
class ScenarioResult:
    cells: list[ResultCell]
    master_seed: int
    config_hash: str
    samples: dict[tuple[float, str], np.ndarray] = field(default_factory=dict, repr=False)
    channel_digests: dict[tuple[int, int], str] = field(default_factory=dict, repr=False)

    def cell(self, L_m: float, scheme: str) -> ResultCell:
        for c in self.cells:
            if c.L_m == L_m and c.scheme == scheme:
                return c
        raise KeyError((L_m, scheme))


def trial_key(cfg: ScenarioConfig, l_index: int, trial: int) -> tuple[int, int, int]:
    return (cfg.master_seed, l_index, trial)


def trial_channels(cfg: ScenarioConfig, l_index: int, trial: int) -> ChannelSet:
    """Draw user positions and all sub-links for one work unit."""
    key = trial_key(cfg, l_index, trial)
    center = (cfg.L_values[l_index], 0.0)
    users = drop_users(center, cfg.user_radius, cfg.users, child_key(key, LINK_USER_DROP))
    geom = SystemGeometry(
        bs_position=cfg.bs_position,
        ris_position=cfg.ris_position,
        user_positions=users,
        bs_antennas=cfg.bs_antennas,
        ris_elements=cfg.ris_elements,
        bs_antenna_spacing=cfg.bs_antenna_spacing,
        ris_element_spacing=cfg.ris_element_spacing,
    )
    return assemble_channels(geom, cfg.kappa, key)


def budgets(cfg: ScenarioConfig) -> tuple[PowerBudget, PowerBudget]:
    """(budget of the BS-only schemes, budget of the active scheme)."""
    return PowerBudget.split(cfg.total_power, 1.0), PowerBudget.split(cfg.total_power, cfg.power_split)


def run_scheme(scheme: str, channels: ChannelSet, cfg: ScenarioConfig, key) -> BeamformingSolution:
    full, split = budgets(cfg)
    noise = NoiseModel(cfg.receiver_noise_power, cfg.ris_noise_power)
    if scheme == "without_ris":
        return without_ris(channels, full, noise, cfg.optimizer)
    if scheme == "random_phase":
        return random_phase_scheme(channels, full, noise, child_key(key, LINK_RANDOM_PHASE), cfg.optimizer)
    if scheme == "passive":
        return optimize_passive(channels, full, noise, cfg.optimizer)
    if scheme == "active":
        return optimize_active(channels, split, noise, cfg.optimizer)
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_solution(scheme: str, sol: BeamformingSolution, channels: ChannelSet,
                    cfg: ScenarioConfig, key):
    full, split = budgets(cfg)
    budget = split if scheme == "active" else full
    tx = float(np.sum(np.abs(sol.precoder) ** 2))
    if tx > budget.bs_power * (1 + FEASIBILITY_RTOL):
        raise TrialAssertionError(f"{scheme}: precoder power {tx} exceeds {budget.bs_power}", key)
    if not math.isfinite(sol.achieved_sum_rate):
        raise TrialAssertionError(f"{scheme}: non-finite sum-rate", key)
    if scheme == "active":
        used = reflect_power(sol.ris, channels.g, sol.precoder, cfg.ris_noise_power)
        if used > budget.ris_power * (1 + FEASIBILITY_RTOL):
            raise TrialAssertionError(f"active: reflect power {used} exceeds {budget.ris_power}", key)
    else:
        rx = desired_receive_power(sol.precoder, channels, sol.ris)
        if not all(snr_upper_bound_check(p, budget.bs_power) for p in rx):
            raise TrialAssertionError(f"{scheme}: received power {rx.max()} exceeds transmit power", key)


def run_trial(cfg: ScenarioConfig, l_index: int, trial: int) -> TrialOutcome:
    """Run every configured scheme on one channel realization and check invariants."""
    key = trial_key(cfg, l_index, trial)
    channels = trial_channels(cfg, l_index, trial)
    rates, iters = {}, {}
    for scheme in cfg.schemes:
        sol = run_scheme(scheme, channels, cfg, key)
        _check_solution(scheme, sol, channels, cfg, key)
        rates[scheme] = sol.achieved_sum_rate
        iters[scheme] = sol.iterations_used
    return TrialOutcome(l_index, trial, channels.digest(), rates, iters)


def _run_unit(args):
    cfg, l_index, trial = args
    return run_trial(cfg, l_index, trial)


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    """Run the full sweep; output is independent of the worker count."""
    units = [(cfg, li, t) for li in range(len(cfg.L_values)) for t in range(cfg.trials)]
    log.info("running %d trials x %d distances, schemes %s, %d worker(s)",
             cfg.trials, len(cfg.L_values), ",".join(cfg.schemes), cfg.workers)
    outcomes: list[TrialOutcome] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for i, out in enumerate(pool.map(_run_unit, units, chunksize=4)):
                outcomes.append(out)
                _progress(i + 1, len(units), out)
    else:
        for i, unit in enumerate(units):
            out = _run_unit(unit)
            outcomes.append(out)
            _progress(i + 1, len(units), out)
    return _aggregate(cfg, outcomes)


def _progress(done: int, total: int, out: TrialOutcome):
    log.debug("L#%d trial %d channels %s rates %s", out.l_index, out.trial, out.channel_digest, out.rates)
    if done % 50 == 0 or done == total:
        log.info("%d/%d trials done", done, total)


def _aggregate(cfg: ScenarioConfig, outcomes: list[TrialOutcome]) -> ScenarioResult:
    outcomes = sorted(outcomes, key=lambda o: (o.l_index, o.trial))
    result = ScenarioResult([], cfg.master_seed, cfg.digest())
    for o in outcomes:
        result.channel_digests[(o.l_index, o.trial)] = o.channel_digest
    for li, L in enumerate(cfg.L_values):
        rows = [o for o in outcomes if o.l_index == li]
        for scheme in cfg.schemes:
            rates = np.array([o.rates[scheme] for o in rows], dtype=np.float64)
            iters = np.array([o.iterations[scheme] for o in rows], dtype=np.float64)
            n = rates.size
            mean = math.fsum(rates) / n
            se = float(np.std(rates, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            result.samples[(L, scheme)] = rates
            result.cells.append(ResultCell(L, scheme, mean, se, n, float(iters.mean())))
    return result
