"""Sum-rate beamforming schemes.

Every scheme is block-coordinate descent on the weighted-MSE reformulation
of sum-rate maximization:

* MMSE receive scalars ``u_k`` and weights ``w_k = 1/mse_k`` in closed form,
* the BS precoder from a power-constrained quadratic problem whose Lagrange
  multiplier is found by a bracketed scalar root search,
* (passive) each RIS phase in closed form with all other variables fixed,
* (active) all RIS coefficients jointly, again as a quadratic problem with a
  single quadratic (reflect-power) constraint.

Because every block is solved exactly, the sum-rate recorded after each
iteration is non-decreasing.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .geometry import ChannelSet, make_rng
from .link import (
    ActiveRisState,
    NoiseModel,
    PassiveRisState,
    PowerBudget,
    RisState,
    amplified_noise,
    effective_channels,
    reflect_power,
    sinrs,
    sum_rate,
)
from .numerics import NumericalError, eigh_hermitian, solve_hermitian_positive

_TINY = 1e-300


@dataclass(frozen=True)
class OptimizerConfig:
    max_outer_iters: int = 100
    max_wmmse_iters: int = 200
    convergence_tol: float = 1e-4
    regularization: float = 0.0
    restarts: int = 0
    restart_seed: int = 0

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.max_wmmse_iters < 1:
            raise ValueError("iteration limits must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.regularization < 0:
            raise ValueError("regularization must be non-negative")
        if self.restarts < 0:
            raise ValueError("restarts must be non-negative")


@dataclass
class BeamformingSolution:
    precoder: np.ndarray
    ris: Optional[RisState]
    achieved_sum_rate: float
    iterations_used: int
    rate_trajectory: list = field(default_factory=list)


def _converged(old: float, new: float, tol: float) -> bool:
    return abs(new - old) <= tol * max(abs(old), _TINY)


# ----------------------------------------------------------------------------
# quadratic subproblems with quadratic constraints
# ----------------------------------------------------------------------------

def _bracket_log_root(fn, x0: float) -> tuple[float, float]:
    """Log-scale bracket ``(lo, hi)`` with ``fn(lo) > 0 >= fn(hi)`` for a decreasing `fn`.

    Returns ``(t, t)`` when `fn` stays non-positive down to ~1e-300; the caller
    then takes that (effectively zero) multiplier.
    """
    step = math.log(10.0)
    t = math.log(max(x0, 1e-300))
    if fn(t) > 0:
        while t < 690.0:
            if fn(t + step) <= 0:
                return t, t + step
            t += step
        raise ArithmeticError("failed to bracket dual variable from above")
    while t > -690.0:
        if fn(t - step) > 0:
            return t - step, t
        t -= step
    return t, t


def _solve_ball_qp(a: np.ndarray, b: np.ndarray, budget: float):
    """``argmin_X tr(X^H a X) - 2 Re tr(b^H X)`` subject to ``||X||_F^2 <= budget``.

    `a` is Hermitian positive semidefinite. Returns ``(X, mu)`` where `mu` is
    the multiplier of the norm constraint.
    """
    lam, vecs = eigh_hermitian(a)
    lam = np.maximum(lam, 0.0)
    bt = vecs.conj().T @ b
    c = np.sum(np.abs(bt) ** 2, axis=1)
    total = float(c.sum())
    if total == 0.0 or budget <= 0:
        return np.zeros_like(b), 0.0
    scale = float(lam.max())
    null = lam <= 1e-13 * scale if scale > 0 else np.ones_like(lam, dtype=bool)
    # rhs components along numerically-null directions make the unconstrained problem unbounded
    unbounded = bool(np.any(c[null] > 1e-24 * total))

    mu = 0.0
    if unbounded or float(np.sum(c[~null] / lam[~null] ** 2)) > budget:
        log_budget = math.log(budget)

        def excess(t: float) -> float:
            m = math.exp(t)
            return math.log(float(np.sum(c / (lam + m) ** 2))) - log_budget

        lo, hi = _bracket_log_root(excess, math.sqrt(total / budget))
        t = hi if lo == hi else brentq(excess, lo, hi, xtol=1e-14, rtol=4e-15, maxiter=500)
        mu = math.exp(t)
        inv = 1.0 / (lam + mu)
    else:
        inv = np.zeros_like(lam)
        inv[~null] = 1.0 / lam[~null]
    x = vecs @ (inv[:, None] * bt)
    p = float(np.sum(np.abs(x) ** 2))
    if p > budget:
        x *= math.sqrt(budget / p)
    return x, mu


def _quad_form(x: np.ndarray, q: np.ndarray) -> float:
    return float(np.real(np.sum(np.conj(x) * (q @ x))))


def _solve_two_ball_qp(a, b, budget, q, q_budget):
    """As :func:`_solve_ball_qp` with the extra constraint ``tr(X^H q X) <= q_budget``.

    The multiplier of the second constraint is found by an outer root search;
    for each trial value the first one is solved exactly, which makes the
    outer residual monotone (envelope of a concave dual).
    """
    x, _ = _solve_ball_qp(a, b, budget)
    r = _quad_form(x, q)
    if r <= q_budget:
        return x
    if q_budget <= 0:
        return np.zeros_like(b)
    log_qb = math.log(q_budget)

    def residual(t: float) -> float:
        xx, _ = _solve_ball_qp(a + math.exp(t) * q, b, budget)
        rr = _quad_form(xx, q)
        return (math.log(rr) if rr > 0 else -1e300) - log_qb

    x0 = float(np.real(np.trace(a))) / max(float(np.real(np.trace(q))), _TINY)
    lo, hi = _bracket_log_root(residual, max(x0, 1e-30))
    t = hi if lo == hi else brentq(residual, lo, hi, xtol=1e-13, rtol=4e-15, maxiter=500)
    x, _ = _solve_ball_qp(a + math.exp(t) * q, b, budget)
    r = _quad_form(x, q)
    if r > q_budget:
        x *= math.sqrt(q_budget / r)
    return x


# ----------------------------------------------------------------------------
# WMMSE machinery
# ----------------------------------------------------------------------------

def _receivers(h_eff: np.ndarray, w: np.ndarray, noise: np.ndarray):
    """MMSE receive scalars, MSE weights and sum-rate for rows `h_eff` (K, M) and precoder (M, K)."""
    hw = h_eff @ w
    p = np.abs(hw) ** 2
    d = np.diag(hw).copy()
    total = p.sum(axis=1) + noise
    u = d / total
    residual = total - np.abs(d) ** 2  # interference + noise
    mse = residual / total
    weight = 1.0 / mse
    rate = float(np.sum(np.log2(total / residual)))
    return u, weight, rate


def _precoder_blocks(h_eff, u, weight, regularization=0.0):
    """Quadratic and linear terms of the weighted-MSE objective in the precoder."""
    a = (h_eff.conj().T * (weight * np.abs(u) ** 2)) @ h_eff
    if regularization:
        a = a + regularization * np.eye(a.shape[0])
    b = h_eff.conj().T * (weight * u)
    return a, b


def _mrt_init(h_eff: np.ndarray, p_bs: float) -> np.ndarray:
    k = h_eff.shape[0]
    w = h_eff.conj().T.copy()
    norms = np.linalg.norm(w, axis=0)
    nz = norms > 0
    w[:, nz] /= norms[nz]
    w[:, ~nz] = 0.0
    count = int(nz.sum())
    if count:
        w *= math.sqrt(p_bs / count)
    return w


def _wmmse_loop(h_eff, noise, p_bs, cfg: OptimizerConfig, w0=None, reflect=None):
    """Run WMMSE on fixed effective rows. `reflect` = (q, q_budget) adds a second power constraint."""
    w = _mrt_init(h_eff, p_bs) if w0 is None else np.array(w0, dtype=np.complex128)
    if reflect is not None:
        q, qb = reflect
        r = _quad_form(w, q)
        if r > qb:
            w *= math.sqrt(qb / r) if qb > 0 else 0.0
    u, weight, rate = _receivers(h_eff, w, noise)
    traj = [rate]
    it = 0
    for it in range(1, cfg.max_wmmse_iters + 1):
        a, b = _precoder_blocks(h_eff, u, weight, cfg.regularization)
        if reflect is None:
            w_new, _ = _solve_ball_qp(a, b, p_bs)
        else:
            w_new = _solve_two_ball_qp(a, b, p_bs, *reflect)
        u_new, weight_new, rate_new = _receivers(h_eff, w_new, noise)
        if rate_new < rate:
            # numerical round-off only; keep the better iterate to stay monotone
            traj.append(rate)
            break
        w, u, weight = w_new, u_new, weight_new
        traj.append(rate_new)
        done = _converged(rate, rate_new, cfg.convergence_tol)
        rate = rate_new
        if done:
            break
    return w, rate, it, traj


def _check_finite(*arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise ValueError("channel contains non-finite entries")


def wmmse_precoder(
    channels,
    p_bs: float,
    sigma_sq,
    cfg: OptimizerConfig = OptimizerConfig(),
    init=None,
) -> BeamformingSolution:
    """WMMSE sum-rate precoder for effective row channels.

    Parameters
    ----------
    channels : (K, M) array_like
        Row k is the end-to-end channel h_k^H of user k.
    p_bs : float
        Transmit power budget (W).
    sigma_sq : float or (K,) array_like
        Noise power at each receiver (W).
    init : (M, K) array_like, optional
        Starting precoder; matched-filter with equal power split otherwise.
    """
    h_eff = np.atleast_2d(np.asarray(channels, dtype=np.complex128))
    _check_finite(h_eff)
    if not p_bs > 0:
        raise ValueError("p_bs must be positive")
    noise = np.broadcast_to(np.asarray(sigma_sq, dtype=np.float64), (h_eff.shape[0],))
    w, rate, it, traj = _wmmse_loop(h_eff, noise, p_bs, cfg, init)
    return BeamformingSolution(w, None, rate, it, traj)


# ----------------------------------------------------------------------------
# RIS blocks
# ----------------------------------------------------------------------------

def _ris_surrogate(channels: ChannelSet, casc: np.ndarray, w, u, weight):
    """Low-rank quadratic ``x^H V V^H x - 2 Re(s^H x)`` of the weighted MSE in the RIS coefficients."""
    k = channels.num_users
    c = np.einsum("knm,mj->kjn", casc, w)  # c[k, j] = diag(f_k^*) G w_j
    a = channels.h_d.conj().T @ w  # a[k, j] = h_dk^H w_j
    amp = np.sqrt(weight) * np.abs(u)
    v = (np.conj(c) * amp[:, None, None]).reshape(k * k, -1).T
    s = np.einsum("k,kn->n", weight * u, np.conj(c[np.arange(k), np.arange(k)]))
    s -= np.einsum("kj,knj->n", (weight * np.abs(u) ** 2)[:, None] * a, np.conj(c).transpose(0, 2, 1))
    return v, s


def _phase_sweep(v: np.ndarray, s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """One cyclic pass of closed-form unit-modulus updates; ties keep the current phase."""
    phi = np.asfortranarray(v @ v.conj().T)
    x = x.copy()
    z = phi @ x
    diag = np.real(np.diag(phi)).copy()
    scale = float(np.max(np.abs(s))) + float(diag.max(initial=0.0))
    thresh = 1e-14 * scale
    for n in range(x.shape[0]):
        xn = complex(x[n])
        t = complex(s[n]) - (complex(z[n]) - diag[n] * xn)
        mag = abs(t)
        if mag <= thresh:
            continue
        new = t / mag
        delta = new - xn
        if delta != 0:
            z += phi[:, n] * delta
            x[n] = new
    return x


def _disk_sweep(v, s, extra_diag, d, budget, x, max_gain):
    """Cyclic per-element minimization over the disks set by a gain cap and the power budget."""
    phi = np.asfortranarray(v @ v.conj().T)
    x = x.copy()
    z = phi @ x
    diag = np.real(np.diag(phi)) + extra_diag
    used = float(np.sum(d * np.abs(x) ** 2))
    for n in range(x.shape[0]):
        xn = complex(x[n])
        t = complex(s[n]) - (complex(z[n]) - (diag[n] - extra_diag[n]) * xn)
        rest = max(used - d[n] * abs(xn) ** 2, 0.0)
        radius = math.sqrt(max(budget - rest, 0.0) / d[n]) if d[n] > 0 else math.inf
        if max_gain is not None:
            radius = min(radius, max_gain)
        if diag[n] > 0:
            new = t / diag[n]
            if abs(new) > radius:
                new *= radius / abs(new)
        elif abs(t) > 0 and math.isfinite(radius):
            new = t / abs(t) * radius
        else:
            continue
        delta = new - xn
        if delta != 0:
            z += phi[:, n] * delta
            x[n] = new
            used = rest + d[n] * abs(new) ** 2
    return x


def _woodbury_solve(e: np.ndarray, v: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``(diag(e) + v v^H) x = rhs`` for positive `e` via a small capacitance system."""
    e = np.maximum(e, _TINY)
    ev = v / e[:, None]
    er = rhs / e
    cap = np.eye(v.shape[1]) + v.conj().T @ ev
    return er - ev @ solve_hermitian_positive(cap, v.conj().T @ er)


def _active_coefficient_block(v, s, extra_diag, d, budget):
    """``argmin x^H (diag(extra) + V V^H) x - 2 Re(s^H x)`` s.t. ``sum d_n |x_n|^2 <= budget``."""
    if not np.any(s):
        return np.zeros_like(s)

    def power(lmb: float) -> float:
        x = _woodbury_solve(extra_diag + lmb * d, v, s)
        return float(np.sum(d * np.abs(x) ** 2))

    if np.all(extra_diag > 0):
        x = _woodbury_solve(extra_diag, v, s)
        if float(np.sum(d * np.abs(x) ** 2)) <= budget:
            return x
    log_budget = math.log(budget)

    def excess(t: float) -> float:
        return math.log(power(math.exp(t))) - log_budget

    x0 = float(np.sqrt(np.sum(np.abs(s) ** 2 / d) / budget))
    lo, hi = _bracket_log_root(excess, x0)
    t = hi if lo == hi else brentq(excess, lo, hi, xtol=1e-13, rtol=4e-15, maxiter=500)
    x = _woodbury_solve(extra_diag + math.exp(t) * d, v, s)
    p = float(np.sum(d * np.abs(x) ** 2))
    if p > budget:
        x *= math.sqrt(budget / p)
    return x


def cophase_phases(channels: ChannelSet) -> np.ndarray:
    """Phases aligning every reflected component of the strongest cascaded user with its direct path."""
    casc = channels.cascaded()
    k = int(np.argmax(np.linalg.norm(casc.reshape(channels.num_users, -1), axis=1)))
    hd = channels.h_d[:, k]
    if np.linalg.norm(hd) > 0:
        w0 = hd / np.linalg.norm(hd)
    else:
        w0 = np.conj(np.linalg.svd(casc[k], full_matrices=False)[2][0])
    ref = np.vdot(hd, w0)
    contrib = casc[k] @ w0
    base = np.angle(ref) if abs(ref) > 0 else 0.0
    return np.mod(base - np.angle(contrib), 2.0 * np.pi)


def _validate(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel):
    _check_finite(channels.g, channels.f, channels.h_d)
    if not budget.bs_power > 0:
        raise ValueError("BS power budget must be positive")


# ----------------------------------------------------------------------------
# schemes
# ----------------------------------------------------------------------------

def without_ris(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel,
                cfg: OptimizerConfig = OptimizerConfig()) -> BeamformingSolution:
    """WMMSE on the direct links only."""
    _validate(channels, budget, noise)
    return wmmse_precoder(channels.h_d.conj().T, budget.bs_power, noise.receiver_noise_power, cfg)


def random_phase_scheme(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel, seed,
                        cfg: OptimizerConfig = OptimizerConfig()) -> BeamformingSolution:
    """Draw i.i.d. uniform RIS phases from `seed`, then run WMMSE on the resulting channels."""
    _validate(channels, budget, noise)
    phases = make_rng(seed).uniform(0.0, 2.0 * np.pi, channels.num_elements)
    ris = PassiveRisState(phases)
    h_eff = effective_channels(channels, ris.coefficients)
    sol = wmmse_precoder(h_eff, budget.bs_power, noise.receiver_noise_power, cfg)
    sol.ris = ris
    return sol


def _best_of(solutions):
    return max(solutions, key=lambda s: s.achieved_sum_rate)


def _restart_phases(cfg: OptimizerConfig, r: int, n: int) -> np.ndarray:
    return make_rng((cfg.restart_seed, r)).uniform(0.0, 2.0 * np.pi, n)


def optimize_passive(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel,
                     cfg: OptimizerConfig = OptimizerConfig(),
                     init: Optional[np.ndarray] = None) -> BeamformingSolution:
    """Alternating WMMSE precoding and closed-form per-element phase updates.

    Parameters
    ----------
    init : (N,) array_like, optional
        Initial phases (rad). Defaults to :func:`cophase_phases`; with
        ``cfg.restarts > 0`` additional random starts are tried and the best
        result is returned.
    """
    _validate(channels, budget, noise)
    if budget.ris_power != 0:
        raise ValueError("passive RIS consumes no reflect power; budget.ris_power must be 0")
    if channels.num_elements == 0:
        sol = without_ris(channels, budget, noise, cfg)
        sol.ris = PassiveRisState(np.zeros(0))
        return sol
    starts = [cophase_phases(channels) if init is None else np.asarray(init, dtype=np.float64)]
    starts += [_restart_phases(cfg, r, channels.num_elements) for r in range(cfg.restarts)]
    return _best_of(_passive_run(channels, budget, noise, cfg, ph) for ph in starts)


def _passive_run(channels, budget, noise, cfg, phases):
    casc = channels.cascaded()
    sigma = np.full(channels.num_users, noise.receiver_noise_power)
    x = np.exp(1j * np.asarray(phases))
    h_eff = effective_channels(channels, x)
    w, rate, _, _ = _wmmse_loop(h_eff, sigma, budget.bs_power, cfg)
    traj = [rate]
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        u, weight, _ = _receivers(h_eff, w, sigma)
        v, s = _ris_surrogate(channels, casc, w, u, weight)
        x_new = _phase_sweep(v, s, x)
        h_new = effective_channels(channels, x_new)
        w_new, rate_new, _, _ = _wmmse_loop(h_new, sigma, budget.bs_power, cfg, w)
        if rate_new < rate:
            traj.append(rate)
            break
        x, h_eff, w = x_new, h_new, w_new
        traj.append(rate_new)
        done = _converged(rate, rate_new, cfg.convergence_tol)
        rate = rate_new
        if done:
            break
    ris = PassiveRisState(np.angle(x))
    achieved = sum_rate(sinrs(w, channels, ris, noise))
    return BeamformingSolution(w, ris, achieved, it, traj)


def optimize_active(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel,
                    cfg: OptimizerConfig = OptimizerConfig(),
                    init: Optional[BeamformingSolution] = None,
                    max_gain: Optional[float] = None) -> BeamformingSolution:
    """Alternating optimization of the precoder and the active RIS coefficients.

    The precoder block honours both the BS power and the reflect-power budget;
    the coefficient block minimizes the weighted MSE (amplified RIS noise
    included) under the reflect-power budget. With `max_gain` set, each
    coefficient magnitude is additionally capped and the coefficient block
    switches to exact per-element updates.

    Parameters
    ----------
    init : BeamformingSolution, optional
        Starting point (precoder and RIS coefficients, passive or active). It
        must be feasible for `budget`; otherwise it is scaled down.
    """
    _validate(channels, budget, noise)
    if not budget.ris_power > 0:
        raise ValueError("active RIS requires a positive reflect power budget")
    if max_gain is not None and not max_gain > 0:
        raise ValueError("max_gain must be positive")
    if channels.num_elements == 0:
        raise ValueError("active RIS needs at least one element")
    starts = []
    if init is not None:
        starts.append((init.precoder, init.ris.coefficients))
    else:
        start = diagonalizing_start(channels, budget, noise)
        if start is None:
            start = _active_start(channels, budget, noise, cfg, cophase_phases(channels), max_gain)
        starts.append(start)
    for r in range(cfg.restarts):
        ph = _restart_phases(cfg, r, channels.num_elements)
        starts.append(_active_start(channels, budget, noise, cfg, ph, max_gain))
    return _best_of(_active_run(channels, budget, noise, cfg, w, x, max_gain) for w, x in starts)


def diagonalizing_start(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel):
    """Starting point for the active scheme that removes inter-user interference.

    Each stream leaves on its own orthonormal BS beam and the RIS coefficients
    are the cheapest ones (in reflect power plus amplified noise delivered to
    the users) that make the reflected channel diagonal across users; they
    are then scaled to exhaust the reflect budget. Returns ``None`` when the
    RIS is too small to diagonalize (``N < K*M``) or ``K > M``.
    """
    k, m, n = channels.num_users, channels.num_antennas, channels.num_elements
    if k > m or n < k * m:
        return None
    sv = noise.ris_element_noise_power
    beams = np.eye(m, k, dtype=np.complex128)
    w = beams * math.sqrt(budget.bs_power / k)
    d = np.sum(np.abs(channels.g @ w) ** 2, axis=1) + sv
    cost = d * noise.receiver_noise_power / budget.ris_power + sv * np.sum(np.abs(channels.f) ** 2, axis=1)
    # row (k, m) of `a` maps the coefficients to entry (k, m) of the reflected channel
    a = channels.cascaded().transpose(0, 2, 1).reshape(k * m, n)
    a_scaled = a / cost[None, :]
    target = beams.conj().T.ravel()
    try:
        y = solve_hermitian_positive(a_scaled @ a.conj().T, target)
    except NumericalError:
        return None
    x = a_scaled.conj().T @ y
    used = reflect_power(x, channels.g, w, sv)
    if not used > 0:
        return None
    return w, x * math.sqrt(budget.ris_power / used)


def _active_start(channels, budget, noise, cfg, phases, max_gain):
    x = np.exp(1j * phases)
    sigma = np.full(channels.num_users, noise.receiver_noise_power)
    w, _, _, _ = _wmmse_loop(effective_channels(channels, x), sigma, budget.bs_power, cfg)
    used = reflect_power(x, channels.g, w, noise.ris_element_noise_power)
    gain = math.sqrt(budget.ris_power / used) if used > 0 else 1.0
    if max_gain is not None:
        gain = min(gain, max_gain)
    return w, gain * x


def _active_run(channels, budget, noise, cfg, w, x, max_gain):
    casc = channels.cascaded()
    g = channels.g
    sv = noise.ris_element_noise_power
    p_a = budget.ris_power
    x = np.array(x, dtype=np.complex128)
    w = np.array(w, dtype=np.complex128)
    if max_gain is not None:
        big = np.abs(x) > max_gain
        x[big] *= max_gain / np.abs(x[big])
    # restore feasibility of the starting point
    used = reflect_power(x, g, w, sv)
    if used > p_a:
        x *= math.sqrt(p_a / used)
    p_w = float(np.sum(np.abs(w) ** 2))
    if p_w > budget.bs_power:
        w *= math.sqrt(budget.bs_power / p_w)

    f_pow = np.abs(channels.f) ** 2  # (N, K)

    def noise_of(xx):
        return noise.receiver_noise_power + amplified_noise(channels, xx, sv)

    def rate_of(ww, xx):
        return _receivers(effective_channels(channels, xx), ww, noise_of(xx))[2]

    rate = rate_of(w, x)
    traj = [rate]
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        # precoder block: both power constraints, RIS fixed
        gain2 = np.abs(x) ** 2
        q = (g.conj().T * gain2) @ g
        q_budget = max(p_a - sv * float(gain2.sum()), 0.0)
        h_eff = effective_channels(channels, x)
        n_eff = noise_of(x)
        w_new, _, _, _ = _wmmse_loop(h_eff, n_eff, budget.bs_power, cfg, w, reflect=(q, q_budget))
        # coefficient block: reflect budget, precoder fixed
        u, weight, _ = _receivers(h_eff, w_new, n_eff)
        v, s = _ris_surrogate(channels, casc, w_new, u, weight)
        extra = sv * (f_pow @ (weight * np.abs(u) ** 2))
        d = np.sum(np.abs(g @ w_new) ** 2, axis=1) + sv
        if max_gain is None:
            x_new = _active_coefficient_block(v, s, extra, d, p_a)
        else:
            x_new = _disk_sweep(v, s, extra, d, p_a, x, max_gain)
        rate_new = rate_of(w_new, x_new)
        if rate_new < rate:
            traj.append(rate)
            break
        w, x = w_new, x_new
        traj.append(rate_new)
        done = _converged(rate, rate_new, cfg.convergence_tol)
        rate = rate_new
        if done:
            break
    ris = ActiveRisState(x, p_a, sv)
    achieved = sum_rate(sinrs(w, channels, ris, noise))
    return BeamformingSolution(w, ris, achieved, it, traj)


MAX_ORACLE_CONFIGS = 10**7


def brute_force_oracle(channels: ChannelSet, budget: PowerBudget, noise: NoiseModel,
                       phase_bits: int = 1, gain_levels: int = 1,
                       cfg: OptimizerConfig = OptimizerConfig()) -> BeamformingSolution:
    """Exhaustive search over quantized RIS configurations, WMMSE precoding for each.

    Phases take the ``2**phase_bits`` values ``2*pi*i/2**phase_bits``. For a
    passive budget (``ris_power == 0``) every coefficient has unit modulus and
    `gain_levels` must be 1. For an active budget each element additionally
    takes one of `gain_levels` relative gains ``l/gain_levels``; the common
    scale saturates the reflect budget for the precoder found at that scale
    (three fixed-point rounds).
    """
    _validate(channels, budget, noise)
    n = channels.num_elements
    if n > 4 or phase_bits > 8 or phase_bits < 1 or gain_levels < 1:
        raise ValueError("oracle limited to N <= 4, 1 <= phase_bits <= 8, gain_levels >= 1")
    passive = budget.ris_power == 0
    if passive and gain_levels != 1:
        raise ValueError("a passive RIS has a single (unit) gain level")
    count = (2**phase_bits * gain_levels) ** n
    if count > MAX_ORACLE_CONFIGS:
        raise ValueError(f"{count} configurations exceed the enumeration budget")
    if n == 0:
        sol = without_ris(channels, budget, noise, cfg)
        sol.ris = PassiveRisState(np.zeros(0))
        sol.iterations_used = 1
        return sol

    sigma = np.full(channels.num_users, noise.receiver_noise_power)
    sv = noise.ris_element_noise_power
    levels = 2**phase_bits
    phase_grid = 2.0 * np.pi * np.arange(levels) / levels
    gain_grid = np.arange(1, gain_levels + 1) / gain_levels
    best = None
    evaluated = 0
    for ph in itertools.product(phase_grid, repeat=n):
        for gains in itertools.product(gain_grid, repeat=n):
            evaluated += 1
            direction = np.asarray(gains) * np.exp(1j * np.asarray(ph))
            if passive:
                w, rate, _, _ = _wmmse_loop(effective_channels(channels, direction), sigma,
                                            budget.bs_power, cfg)
                ris = PassiveRisState(np.asarray(ph))
            else:
                w, x = _active_start(channels, budget, noise, cfg, np.asarray(ph), None)
                x = direction * abs(x[0])
                for _ in range(3):
                    used = reflect_power(x, channels.g, w, sv)
                    if used > 0:
                        x = x * math.sqrt(budget.ris_power / used)
                    gain2 = np.abs(x) ** 2
                    q = (channels.g.conj().T * gain2) @ channels.g
                    qb = max(budget.ris_power - sv * float(gain2.sum()), 0.0)
                    n_eff = sigma + amplified_noise(channels, x, sv)
                    w, rate, _, _ = _wmmse_loop(effective_channels(channels, x), n_eff,
                                                budget.bs_power, cfg, w, reflect=(q, qb))
                ris = ActiveRisState(x, budget.ris_power, sv)
            if best is None or rate > best[0]:
                best = (rate, w, ris)
    rate, w, ris = best
    achieved = sum_rate(sinrs(w, channels, ris, noise))
    return BeamformingSolution(w, ris, achieved, evaluated, [achieved])
