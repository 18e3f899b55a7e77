"""Channel models: monostatic radar CFR, Rician multipath, AWGN.

The radar return is modeled directly in the frequency domain: each target
at distance d contributes a real reflection coefficient, a carrier phase
e^{-j2pi f_c tau} tied to its round-trip delay tau = 2d/c, and a per-bin
phase ramp e^{-j2pi k tau/T_s}. Path delays must stay inside the cyclic
prefix, which caps the unambiguous range at c*T_cp/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .util import SPEED_OF_LIGHT


@dataclass(frozen=True)
class RadarScene:
    """Targets as (distance_m, reflection_coeff) sorted by distance."""

    targets: tuple[tuple[float, float], ...]
    f_c: float
    t_s: float
    t_cp: float

    def __post_init__(self):
        if not self.targets:
            raise ValueError("scene needs at least one target")
        dists = [d for d, _ in self.targets]
        if any(d <= 0 for d in dists):
            raise ValueError("target distances must be positive")
        if sorted(dists) != dists:
            raise ValueError("targets must be sorted by distance")
        if any(a == 0 for _, a in self.targets):
            raise ValueError("reflection coefficients must be nonzero")
        if max(self.delays) > self.t_cp:
            raise ValueError(
                f"round-trip delay {max(self.delays):.3e}s exceeds the CP {self.t_cp:.3e}s "
                f"(unambiguous range {self.max_range:.3f} m)")

    @property
    def delays(self) -> tuple[float, ...]:
        return tuple(2.0 * d / SPEED_OF_LIGHT for d, _ in self.targets)

    @property
    def coeffs(self) -> tuple[float, ...]:
        return tuple(a for _, a in self.targets)

    @property
    def distances(self) -> tuple[float, ...]:
        return tuple(d for d, _ in self.targets)

    @property
    def n_targets(self) -> int:
        return len(self.targets)

    @property
    def max_range(self) -> float:
        return SPEED_OF_LIGHT * self.t_cp / 2.0


def radar_cfr(scene: RadarScene, k: np.ndarray) -> np.ndarray:
    """Frequency response on bins ``k``:
    H_k = sum_s alpha_s e^{-j2pi f_c tau_s} e^{-j2pi k tau_s / T_s}."""
    k = np.asarray(k)
    h = np.zeros(k.shape, dtype=complex)
    for tau, alpha in zip(scene.delays, scene.coeffs):
        h += alpha * np.exp(-2j * np.pi * scene.f_c * tau) * \
            np.exp(-2j * np.pi * k * tau / scene.t_s)
    return h


@dataclass(frozen=True)
class CommChannel:
    """Realized multipath taps: complex gains at (possibly fractional) delays."""

    delays: tuple[float, ...]
    gains: tuple[complex, ...]
    pdp: tuple[tuple[float, float, float], ...] = field(default=())

    def cfr(self, k: np.ndarray, t_s: float) -> np.ndarray:
        """CFR on bins ``k``: taps rendered exactly in frequency,
        H_k = sum_t g_t e^{-j2pi k tau_t / t_s}."""
        k = np.asarray(k)
        h = np.zeros(k.shape, dtype=complex)
        for tau, g in zip(self.delays, self.gains):
            h += g * np.exp(-2j * np.pi * k * tau / t_s)
        return h


def rician_realize(pdp, rng: np.random.Generator,
                   los_phase: float | None = None) -> CommChannel:
    """Draw one channel realization from a power-delay profile.

    ``pdp`` lists taps as (delay_seconds, mean_power_db, rician_k). Mean
    linear powers are normalized to sum to 1. Each tap is
    sqrt(P) * (sqrt(K/(K+1)) e^{j theta} + sqrt(1/(K+1)) CN(0,1)); K = 0 is
    Rayleigh. The LOS phase theta is drawn uniformly unless pinned via
    ``los_phase`` (regression tests want it deterministic).
    """
    pdp = tuple((float(d), float(p), float(kf)) for d, p, kf in pdp)
    if any(kf < 0 for _, _, kf in pdp):
        raise ValueError("Rician K factors must be >= 0")
    powers = np.array([10.0 ** (p / 10.0) for _, p, _ in pdp])
    powers = powers / powers.sum()
    gains = []
    for (_, _, kf), p in zip(pdp, powers):
        theta = rng.uniform(0, 2 * np.pi) if los_phase is None else los_phase
        los = np.sqrt(kf / (kf + 1.0)) * np.exp(1j * theta)
        scatter = np.sqrt(1.0 / (kf + 1.0)) * \
            (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
        gains.append(np.sqrt(p) * (los + scatter))
    return CommChannel(delays=tuple(d for d, _, _ in pdp),
                       gains=tuple(gains), pdp=pdp)


def add_awgn(x: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Add circular complex Gaussian noise of variance ``sigma2`` per sample."""
    if sigma2 < 0:
        raise ValueError("noise variance must be >= 0")
    x = np.asarray(x, dtype=complex)
    if sigma2 == 0:
        return x.copy()
    noise = rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    return x + np.sqrt(sigma2 / 2.0) * noise
