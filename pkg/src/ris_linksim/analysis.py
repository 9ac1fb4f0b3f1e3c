"""Closed-form engineering calculators for RIS deployments.

Covers the element count needed before a passive RIS beats the direct link,
the thermal-noise floor introduced by active elements, the path-loss
behaviour of reflected versus amplified links and the N^2 array-gain law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.constants import Boltzmann, speed_of_light

#: wavelength (m) per carrier (Hz) rounded as if c were 3e8 m/s
NOMINAL_WAVELENGTHS = {5e9: 0.06, 10e9: 0.03, 20e9: 0.015}

# absorbs float noise in d_t*d_r*lambda/d before the ceiling
_CEIL_RTOL = 1e-12


@dataclass(frozen=True)
class DeploymentScenario:
    """Transmitter/RIS/receiver distances (m), carrier (Hz) and element spacing (wavelengths)."""

    d: float
    d_t: float
    d_r: float
    frequency: float
    element_spacing: float = 0.5

    def __post_init__(self):
        for name in ("d", "d_t", "d_r", "frequency", "element_spacing"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")

    def wavelength(self, nominal: bool = False) -> float:
        """Carrier wavelength in meters.

        With ``nominal=True`` the rounded value of :data:`NOMINAL_WAVELENGTHS`
        is used (0.06 m at 5 GHz, i.e. c taken as 3e8 m/s).
        """
        if nominal:
            for f, lam in NOMINAL_WAVELENGTHS.items():
                if math.isclose(self.frequency, f, rel_tol=1e-12):
                    return lam
            return 3e8 / self.frequency
        return speed_of_light / self.frequency


def _ceil(value: float) -> int:
    nearest = round(value)
    if math.isclose(value, nearest, rel_tol=_CEIL_RTOL):
        return int(nearest)
    return int(math.ceil(value))


def required_aperture(s: DeploymentScenario, nominal_wavelength: bool = False) -> float:
    """Minimum RIS area (m^2), ``d_t * d_r * lambda / d``."""
    return s.d_t * s.d_r * s.wavelength(nominal_wavelength) / s.d


def required_elements(s: DeploymentScenario, nominal_wavelength: bool = False) -> int:
    """Smallest element count whose aperture reaches :func:`required_aperture`.

    Each element occupies ``(spacing * lambda)^2``. With exact ``c`` the
    5 GHz example of ``d=200, d_t=150, d_r=200`` gives 10007; the
    nominal-wavelength mode gives the rounded 10000.
    """
    lam = s.wavelength(nominal_wavelength)
    return _ceil(required_aperture(s, nominal_wavelength) / (s.element_spacing * lam) ** 2)


def thermal_noise_floor_dbm(bandwidth: float, temperature: float = 290.0, elements: int = 1) -> float:
    """Aggregate thermal noise ``10 log10(k_B T B N / 1 mW)`` of `elements` active elements."""
    if not (bandwidth > 0 and temperature > 0 and elements > 0):
        raise ValueError("bandwidth, temperature and elements must be positive")
    return 10.0 * math.log10(Boltzmann * temperature * bandwidth / 1e-3) + 10.0 * math.log10(elements)


def path_gain_comparison(d_t: float, d_r: float) -> tuple[float, float]:
    """Distance factors ``((d_t d_r)^-2, (d_t + d_r)^-2)`` of a reflected and an amplified link.

    A passive RIS sees the product of both hops' losses; an active RIS that
    re-radiates with enough gain behaves like a single hop of length
    ``d_t + d_r``.
    """
    if not (d_t > 0 and d_r > 0):
        raise ValueError("distances must be positive")
    return (d_t * d_r) ** -2.0, (d_t + d_r) ** -2.0


def array_gain_scaling(
    n_values: Sequence[int],
    per_element_noise: float,
    receiver_noise: float,
    signal_gain: float = 1.0,
    noise_path_gain: float = 1.0,
) -> list[tuple[int, float]]:
    """Co-phased single-user SNR versus element count.

    ``snr(N) = N^2 * signal_gain / (receiver_noise + N * per_element_noise * noise_path_gain)``.
    Signal amplitudes add coherently (N^2) while the independent per-element
    noise adds in power (N), so the slope in log-log falls from 2 to 1 once
    the RIS noise dominates.
    """
    n = [int(v) for v in n_values]
    if not n:
        raise ValueError("n_values must be non-empty")
    if any(v < 1 for v in n) or any(b <= a for a, b in zip(n, n[1:])):
        raise ValueError("n_values must be positive and strictly ascending")
    if per_element_noise < 0 or receiver_noise < 0 or per_element_noise + receiver_noise == 0:
        raise ValueError("noise powers must be non-negative and not both zero")
    out = []
    for v in n:
        denom = receiver_noise + v * per_element_noise * noise_path_gain
        out.append((v, v * v * signal_gain / denom))
    return out


def loglog_slope(curve: Sequence[tuple[int, float]]) -> float:
    """Least-squares slope of ``log10(snr)`` against ``log10(N)``."""
    n, snr = np.asarray(curve, dtype=np.float64).T
    return float(np.polyfit(np.log10(n), np.log10(snr), 1)[0])
