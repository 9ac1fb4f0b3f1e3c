"""Simulation geometry, path loss and Ricean channel synthesis.

All arrays (BS and RIS) are uniform linear arrays laid out along the y-axis,
so the steering phase of a device pair only depends on ``sin`` of the
direction angle measured from the +x axis. Positions are 2-D, in meters.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# link ids used to derive per-link random streams from a trial key
LINK_BS_RIS = 0
LINK_RIS_USER = 1
LINK_BS_USER = 2
LINK_USER_DROP = 3
LINK_RANDOM_PHASE = 4


class Position2D(NamedTuple):
    x: float
    y: float


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return math.hypot(b[0] - a[0], b[1] - a[1])


def direction_angle(src: Sequence[float], dst: Sequence[float]) -> float:
    """Angle (rad) of the vector ``dst - src`` measured from the +x axis."""
    return math.atan2(dst[1] - src[1], dst[0] - src[0])


def path_loss_db(d: float) -> float:
    """Large-scale path loss ``37.3 + 22.0 * log10(d)`` in dB, `d` in meters."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d!r}")
    return 37.3 + 22.0 * math.log10(d)


def path_gain(d: float) -> float:
    """Linear power gain corresponding to :func:`path_loss_db`."""
    return 10.0 ** (-path_loss_db(d) / 10.0)


def steering_vector(num_elements: int, spacing: float, angle: float) -> np.ndarray:
    """ULA response, shape ``(num_elements, 1)``; entry n is exp(j 2 pi spacing n sin(angle))."""
    if num_elements < 0:
        raise ValueError("num_elements must be non-negative")
    n = np.arange(num_elements)
    return np.exp(1j * 2.0 * np.pi * spacing * n * math.sin(angle)).reshape(-1, 1)


def make_rng(key) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by an int or a tuple of ints."""
    if isinstance(key, np.random.Generator):
        return key
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(k) for k in key])))


def child_key(key, *extra: int) -> tuple:
    if isinstance(key, (int, np.integer)):
        key = (int(key),)
    return tuple(int(k) for k in key) + tuple(int(e) for e in extra)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def generate_ricean(rows: int, cols: int, kappa: float, los, seed) -> np.ndarray:
    """Ricean matrix ``sqrt(k/(1+k)) * los + sqrt(1/(1+k)) * H_nlos``.

    `los` must be ``rows x cols`` with unit-magnitude entries; `H_nlos` has
    i.i.d. unit-variance circularly-symmetric Gaussian entries drawn from
    `seed` (an int, a tuple of ints, or a ``numpy.random.Generator``).
    """
    if not (math.isfinite(kappa) and kappa >= 0):
        raise ValueError(f"Ricean factor must be finite and >= 0, got {kappa!r}")
    los = np.asarray(los, dtype=np.complex128).reshape(rows, cols)
    nlos = complex_gaussian(make_rng(seed), (rows, cols))
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * nlos


@dataclass(frozen=True)
class SystemGeometry:
    bs_position: Position2D
    ris_position: Position2D
    user_positions: tuple[Position2D, ...]
    bs_antennas: int = 4
    ris_elements: int = 512
    bs_antenna_spacing: float = 0.5
    ris_element_spacing: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "bs_position", Position2D(*map(float, self.bs_position)))
        object.__setattr__(self, "ris_position", Position2D(*map(float, self.ris_position)))
        object.__setattr__(
            self, "user_positions", tuple(Position2D(*map(float, p)) for p in self.user_positions)
        )
        if self.bs_antennas < 1 or self.ris_elements < 1 or self.users < 1:
            raise ValueError("bs_antennas, ris_elements and users must all be >= 1")
        if not (self.bs_antenna_spacing > 0 and self.ris_element_spacing > 0):
            raise ValueError("element spacings must be positive")
        for p in (self.bs_position, self.ris_position, *self.user_positions):
            if not (math.isfinite(p.x) and math.isfinite(p.y)):
                raise ValueError(f"non-finite position {p}")

    @property
    def users(self) -> int:
        return len(self.user_positions)


def drop_users(center: Sequence[float], radius: float, count: int, seed) -> tuple[Position2D, ...]:
    """Place `count` users uniformly over the disk of `radius` around `center`."""
    rng = make_rng(seed)
    r = radius * np.sqrt(rng.random(count))
    phi = 2.0 * np.pi * rng.random(count)
    return tuple(
        Position2D(center[0] + ri * math.cos(pi), center[1] + ri * math.sin(pi))
        for ri, pi in zip(r, phi)
    )


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    Attributes
    ----------
    g : (N, M) ndarray
        BS -> RIS.
    f : (N, K) ndarray
        RIS -> users; column k is the user-k vector f_k.
    h_d : (M, K) ndarray
        BS -> users; column k is the user-k vector h_{d,k}.

    User k receives ``(h_d[:, k]^H + f[:, k]^H diag(coeff) g) @ x``.
    """

    g: np.ndarray
    f: np.ndarray
    h_d: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=np.complex128)
        f = np.asarray(self.f, dtype=np.complex128)
        h_d = np.asarray(self.h_d, dtype=np.complex128)
        if g.ndim != 2 or f.ndim != 2 or h_d.ndim != 2:
            raise ValueError("g, f and h_d must be 2-D")
        if g.shape[0] != f.shape[0] or g.shape[1] != h_d.shape[0] or f.shape[1] != h_d.shape[1]:
            raise ValueError(
                f"inconsistent channel shapes g={g.shape}, f={f.shape}, h_d={h_d.shape}"
            )
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "h_d", h_d)

    @property
    def num_elements(self) -> int:
        return self.g.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.g.shape[1]

    @property
    def num_users(self) -> int:
        return self.h_d.shape[1]

    def cascaded(self) -> np.ndarray:
        """Per-user cascaded channels ``diag(f_k^*) g``, shape ``(K, N, M)``."""
        return np.conj(self.f).T[:, :, None] * self.g[None, :, :]

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.g, self.f, self.h_d):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()[:16]


def _link_los(rx_pos, rx_count, rx_spacing, tx_pos, tx_count, tx_spacing) -> np.ndarray:
    a_rx = steering_vector(rx_count, rx_spacing, direction_angle(rx_pos, tx_pos))
    a_tx = steering_vector(tx_count, tx_spacing, direction_angle(tx_pos, rx_pos))
    return a_rx @ a_tx.T


def assemble_channels(geometry: SystemGeometry, kappa: float, seed) -> ChannelSet:
    """Draw one path-loss-scaled Ricean realization of all three sub-links.

    `seed` is the trial key; every link draws from its own child stream so
    the realization does not depend on evaluation order.
    """
    bs, ris = geometry.bs_position, geometry.ris_position
    m, n, k = geometry.bs_antennas, geometry.ris_elements, geometry.users
    sb, sr = geometry.bs_antenna_spacing, geometry.ris_element_spacing

    d_br = distance(bs, ris)
    if d_br == 0:
        raise ValueError("BS and RIS are collocated")
    g_los = _link_los(ris, n, sr, bs, m, sb)
    g = generate_ricean(n, m, kappa, g_los, child_key(seed, LINK_BS_RIS)) * math.sqrt(path_gain(d_br))

    f = np.empty((n, k), dtype=np.complex128)
    h_d = np.empty((m, k), dtype=np.complex128)
    for u, pos in enumerate(geometry.user_positions):
        d_ru = distance(ris, pos)
        d_bu = distance(bs, pos)
        if d_ru == 0 or d_bu == 0:
            raise ValueError(f"user {u} at {pos} is collocated with the BS or the RIS")
        # downlink rows are a^T; stored columns are their conjugates
        f_row = _link_los(pos, 1, 1.0, ris, n, sr)
        h_row = _link_los(pos, 1, 1.0, bs, m, sb)
        f_row = generate_ricean(1, n, kappa, f_row, child_key(seed, LINK_RIS_USER, u))
        h_row = generate_ricean(1, m, kappa, h_row, child_key(seed, LINK_BS_USER, u))
        f[:, u] = np.conj(f_row[0]) * math.sqrt(path_gain(d_ru))
        h_d[:, u] = np.conj(h_row[0]) * math.sqrt(path_gain(d_bu))
    return ChannelSet(g=g, f=f, h_d=h_d)
