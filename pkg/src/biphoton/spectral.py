"""Spectral model of the down-converted photon pairs.

The pair source emits signal/idler wavenumbers constrained to k1 + k2 = k_pump.
The marginal signal spectrum |phi(k)|^2 is either Gaussian or rectangular,
parameterized by a 1/e half-width ``delta_k`` of the amplitude phi(k).  The
coherence length of the down-converted field is 1/delta_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, SamplingError

TWO_PI = 2.0 * math.pi

#: attempt budget for rejection sampling before giving up
_MAX_REJECTION_ATTEMPTS = 10**6


class SpectralShape(Enum):
    GAUSSIAN = "gaussian"
    RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class SpectralProfile:
    """Signal-photon spectrum around ``k_center`` (defaults to k_pump/2).

    ``delta_k`` is the 1/e half-width of the amplitude phi(k); for the
    Gaussian shape this makes |phi|^2 a normal density with sigma = delta_k/2.
    The rectangular shape has support [k_center - delta_k, k_center + delta_k].
    Normalization of |phi|^2 is fixed analytically at construction.
    """

    k_pump: float
    delta_k: float
    k_center: float | None = None
    shape: SpectralShape = SpectralShape.GAUSSIAN

    def __post_init__(self) -> None:
        if self.k_pump <= 0:
            raise DomainError(f"k_pump must be positive, got {self.k_pump}")
        if self.delta_k <= 0:
            raise DomainError(f"delta_k must be positive, got {self.delta_k}")
        if self.k_center is None:
            object.__setattr__(self, "k_center", self.k_pump / 2.0)
        if not 0.0 < self.k_center < self.k_pump:
            raise DomainError(
                f"k_center must lie in (0, k_pump), got {self.k_center}"
            )

    @property
    def sigma(self) -> float:
        """Standard deviation of the |phi|^2 density (Gaussian shape)."""
        return self.delta_k / 2.0

    def pdf(self, k):
        """|phi(k)|^2, normalized to unit integral over k."""
        k = np.asarray(k, dtype=float)
        if self.shape is SpectralShape.GAUSSIAN:
            s = self.sigma
            z = (k - self.k_center) / s
            return np.exp(-0.5 * z * z) / (s * math.sqrt(TWO_PI))
        half = self.delta_k
        inside = np.abs(k - self.k_center) <= half
        return np.where(inside, 1.0 / (2.0 * half), 0.0)

    def support(self, n_widths: float = 6.0) -> tuple[float, float]:
        """Integration bounds that capture the density to well below 1e-12."""
        if self.shape is SpectralShape.RECTANGULAR:
            return (self.k_center - self.delta_k, self.k_center + self.delta_k)
        return (
            self.k_center - n_widths * self.delta_k,
            self.k_center + n_widths * self.delta_k,
        )


@dataclass(frozen=True)
class WavenumberPair:
    """Signal/idler wavenumbers with k1 + k2 = k_pump held bit-exactly."""

    k1: float
    k2: float

    @classmethod
    def from_signal(cls, k1: float, k_pump: float) -> "WavenumberPair":
        k2 = k_pump - k1
        # one sweep of re-derivation keeps the float sum exact
        if k1 + k2 != k_pump:
            k1 = k_pump - k2
        return cls(k1=k1, k2=k2)


def coherence_length(profile: SpectralProfile) -> float:
    """Coherence length 1/delta_k of the down-converted field (m)."""
    if profile.delta_k <= 0:
        raise DomainError("delta_k must be positive")
    return 1.0 / profile.delta_k


def wavelength_to_wavenumber(wavelength: float) -> float:
    """Angular wavenumber k = 2*pi/lambda (rad/m)."""
    if wavelength <= 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    return TWO_PI / wavelength


def wavenumber_to_wavelength(k: float) -> float:
    """Inverse of :func:`wavelength_to_wavenumber`."""
    if k <= 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    return TWO_PI / k


def sample_signal(
    profile: SpectralProfile, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Draw ``size`` signal wavenumbers from |phi|^2, restricted to (0, k_pump).

    Out-of-range draws are rejected and redrawn; the total attempt budget is
    capped so a pathological profile fails loudly instead of spinning.
    """
    out = np.empty(size, dtype=float)
    n_filled = 0
    attempts = 0
    while n_filled < size:
        n_need = size - n_filled
        if attempts >= _MAX_REJECTION_ATTEMPTS:
            raise SamplingError(
                "rejection sampling exceeded "
                f"{_MAX_REJECTION_ATTEMPTS} attempts ({n_filled}/{size} drawn)"
            )
        attempts += n_need
        if profile.shape is SpectralShape.GAUSSIAN:
            draw = rng.normal(profile.k_center, profile.sigma, n_need)
        else:
            draw = rng.uniform(
                profile.k_center - profile.delta_k,
                profile.k_center + profile.delta_k,
                n_need,
            )
        draw = draw[(draw > 0.0) & (draw < profile.k_pump)]
        out[n_filled : n_filled + draw.size] = draw
        n_filled += draw.size
    return out


def sample_pair(profile: SpectralProfile, rng: np.random.Generator) -> WavenumberPair:
    """Draw one signal/idler pair; k2 is derived so the sum is bit-exact."""
    k1 = float(sample_signal(profile, rng, 1)[0])
    return WavenumberPair.from_signal(k1, profile.k_pump)
