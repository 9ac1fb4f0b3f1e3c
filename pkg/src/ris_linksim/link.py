"""Signal model and performance metrics for passive and active RIS links."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import ChannelSet


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts / 1e-3)


@dataclass(frozen=True)
class PassiveRisState:
    """Phase-only RIS. Phases are wrapped into [0, 2*pi)."""

    phases: np.ndarray

    def __post_init__(self):
        ph = np.mod(np.asarray(self.phases, dtype=np.float64).ravel(), 2.0 * np.pi)
        # tiny negative inputs round up to exactly 2*pi
        ph[ph >= 2.0 * np.pi] = 0.0
        object.__setattr__(self, "phases", ph)

    @property
    def coefficients(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    @classmethod
    def from_coefficients(cls, coeff) -> "PassiveRisState":
        return cls(np.angle(np.asarray(coeff)))


@dataclass(frozen=True)
class ActiveRisState:
    """Amplify-and-phase RIS: one complex gain per element."""

    coefficients: np.ndarray
    reflect_power_budget: float
    ris_noise_power: float

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=np.complex128).ravel()
        if not np.all(np.isfinite(c)):
            raise ValueError("active RIS coefficients must be finite")
        object.__setattr__(self, "coefficients", c)


RisState = Union[PassiveRisState, ActiveRisState]


@dataclass(frozen=True)
class PowerBudget:
    total_power: float
    bs_power: float
    ris_power: float = 0.0

    def __post_init__(self):
        if min(self.total_power, self.bs_power, self.ris_power) < 0:
            raise ValueError("powers must be non-negative")
        if not math.isclose(self.bs_power + self.ris_power, self.total_power, rel_tol=1e-12):
            raise ValueError(
                f"bs_power + ris_power ({self.bs_power + self.ris_power}) != total ({self.total_power})"
            )

    @classmethod
    def split(cls, total_power: float, bs_fraction: float = 1.0) -> "PowerBudget":
        """Give ``bs_fraction`` of `total_power` (watts) to the BS, the rest to the RIS."""
        if not 0 < bs_fraction <= 1:
            raise ValueError(f"bs_fraction must lie in (0, 1], got {bs_fraction}")
        bs = total_power * bs_fraction
        return cls(total_power=total_power, bs_power=bs, ris_power=total_power - bs)


@dataclass(frozen=True)
class NoiseModel:
    receiver_noise_power: float
    ris_element_noise_power: float = field(default=0.0)

    def __post_init__(self):
        if not self.receiver_noise_power > 0:
            raise ValueError("receiver noise power must be positive")
        if self.ris_element_noise_power < 0:
            raise ValueError("RIS element noise power must be non-negative")


def ris_coefficients(ris: Optional[RisState], num_elements: int) -> np.ndarray:
    if ris is None:
        return np.zeros(num_elements, dtype=np.complex128)
    c = ris.coefficients
    if c.shape[0] != num_elements:
        raise ValueError(f"RIS state has {c.shape[0]} elements, channel has {num_elements}")
    return c


def effective_channel(h_d, f, ris: Optional[RisState], g) -> np.ndarray:
    """End-to-end row channel ``h_d^H + f^H diag(coeff) g`` of one user, shape (1, M)."""
    h_d = np.asarray(h_d, dtype=np.complex128).reshape(-1, 1)
    f = np.asarray(f, dtype=np.complex128).reshape(-1, 1)
    g = np.asarray(g, dtype=np.complex128)
    if g.shape != (f.shape[0], h_d.shape[0]):
        raise ValueError(f"dimension mismatch: g {g.shape}, f {f.shape}, h_d {h_d.shape}")
    c = ris_coefficients(ris, g.shape[0])
    return np.conj(h_d).T + ((np.conj(f[:, 0]) * c) @ g)[None, :]


def effective_channels(channels: ChannelSet, coeff) -> np.ndarray:
    """Stacked effective rows for all users, shape (K, M); row k is h_k^H."""
    coeff = np.asarray(coeff, dtype=np.complex128)
    return np.conj(channels.h_d).T + (np.conj(channels.f).T * coeff[None, :]) @ channels.g


def amplified_noise(channels: ChannelSet, coeff, ris_noise_power: float) -> np.ndarray:
    """Per-user power of RIS thermal noise after reflection: sigma_v^2 ||f_k^H diag(coeff)||^2."""
    if ris_noise_power == 0:
        return np.zeros(channels.num_users)
    gains = np.abs(np.asarray(coeff)) ** 2
    return ris_noise_power * (gains @ (np.abs(channels.f) ** 2))


def sinr_from_rows(h_eff: np.ndarray, w: np.ndarray, noise_per_user) -> np.ndarray:
    """SINR of every user given effective rows (K, M), precoder (M, K) and per-user noise."""
    p = np.abs(h_eff @ w) ** 2
    desired = np.diag(p).copy()
    interference = p.sum(axis=1) - desired
    return desired / (interference + noise_per_user)


def _noise_terms(channels: ChannelSet, ris: Optional[RisState], noise: NoiseModel):
    coeff = ris_coefficients(ris, channels.num_elements)
    n = np.full(channels.num_users, noise.receiver_noise_power, dtype=np.float64)
    if isinstance(ris, ActiveRisState):
        n = n + amplified_noise(channels, coeff, noise.ris_element_noise_power)
    return coeff, n


def sinrs(w, channels: ChannelSet, ris: Optional[RisState], noise: NoiseModel) -> np.ndarray:
    """SINR of all users. Amplified RIS noise only enters for an :class:`ActiveRisState`."""
    coeff, n = _noise_terms(channels, ris, noise)
    return sinr_from_rows(effective_channels(channels, coeff), np.asarray(w), n)


def sinr(k: int, w, channels: ChannelSet, ris: Optional[RisState], noise: NoiseModel) -> float:
    return float(sinrs(w, channels, ris, noise)[k])


def sum_rate(sinr_values: Sequence[float]) -> float:
    s = np.asarray(sinr_values, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("SINR values must be non-negative")
    return float(np.sum(np.log2(1.0 + s)))


def reflect_power(ris: ActiveRisState, g, w, sigma_v_sq: float) -> float:
    """Expected radiated power ``||diag(c) G W||_F^2 + sigma_v^2 sum |c_n|^2`` of an active RIS."""
    c = ris.coefficients if isinstance(ris, (ActiveRisState, PassiveRisState)) else np.asarray(ris)
    gain = np.abs(c) ** 2
    gw = np.asarray(g) @ np.asarray(w)
    return float(gain @ np.sum(np.abs(gw) ** 2, axis=1) + sigma_v_sq * gain.sum())


def desired_receive_power(w, channels: ChannelSet, ris: Optional[RisState]) -> np.ndarray:
    """Per-user desired-signal power |h_k^H w_k|^2 in watts."""
    coeff = ris_coefficients(ris, channels.num_elements)
    return np.abs(np.diag(effective_channels(channels, coeff) @ np.asarray(w))) ** 2


def snr_upper_bound_check(receiver_power: float, transmit_power: float) -> bool:
    """Energy conservation: a passive link cannot deliver more than was transmitted."""
    return receiver_power <= transmit_power
