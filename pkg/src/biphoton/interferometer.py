"""Unbalanced Michelson geometry and the biphoton output superposition.

A pair entering the interferometer splits over the short (S) and long (L)
arms; post-selecting on one photon at each output port leaves eight amplitude
terms.  Grouped by the arrival-time difference t_B - t_A they form three
coincidence classes: central (both photons took the same arm, dt = 0) and two
side classes (dt = +/- delta_L/c).

The two photon-to-port assignments (signal at A / idler at B and the swap)
occupy orthogonal states; each class probability is the sum over both
assignments of a coherent amplitude sum within the assignment.  The mode
overlap ``mu`` scales interference cross terms between different path groups.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import DomainError
from .spectral import TWO_PI, WavenumberPair


class PathLabel(Enum):
    S = "S"
    L = "L"


class CoincidenceClass(Enum):
    CENTRAL = "central"     # (S,S) + (L,L), dt = 0
    SHORT_LONG = "side_sl"  # A via S, B via L, dt = +delta_L/c
    LONG_SHORT = "side_ls"  # A via L, B via S, dt = -delta_L/c


@dataclass(frozen=True)
class InterferometerGeometry:
    """Arm lengths and beam-splitter parameters.

    The long arm is stored as a coarse base plus a fine scan offset so that
    nanometre-scale fringe scans keep full phase precision: the phase of a
    metre-scale path is reduced mod 2*pi before the offset term is added.
    """

    path_short: float
    path_long_base: float
    path_long_offset: float = 0.0
    splitter_transmittance: float = 0.5
    mode_overlap: float = 1.0

    def __post_init__(self) -> None:
        if self.path_long_base + self.path_long_offset <= self.path_short:
            raise DomainError("long arm must exceed short arm")
        if not 0.0 < self.splitter_transmittance < 1.0:
            raise DomainError(
                f"transmittance must lie in (0, 1), got {self.splitter_transmittance}"
            )
        if not 0.0 <= self.mode_overlap <= 1.0:
            raise DomainError(f"mode_overlap must lie in [0, 1], got {self.mode_overlap}")

    def with_offset(self, offset: float) -> "InterferometerGeometry":
        return replace(self, path_long_offset=offset)


def delta_L(geometry: InterferometerGeometry) -> float:
    """Optical-path difference L - S; the fine offset enters at full precision."""
    return (geometry.path_long_base - geometry.path_short) + geometry.path_long_offset


def transit_times(geometry: InterferometerGeometry) -> tuple[float, float]:
    """(short-arm, long-arm) propagation times in seconds."""
    t_s = geometry.path_short / SPEED_OF_LIGHT
    t_l = (geometry.path_long_base + geometry.path_long_offset) / SPEED_OF_LIGHT
    return t_s, t_l


def _product_mod_2pi(k, length):
    """k * length reduced mod 2*pi without losing the product's low bits.

    A plain float product of a ~1e7 rad/m wavenumber and a metre-scale path
    carries an absolute error of ~1e-9 rad, which would swamp nanometre-scale
    fringe structure.  A Dekker two-product recovers the exact rounding
    residue, so the reduced phase is accurate to ~1 ulp.
    """
    k = np.asarray(k, dtype=float)
    x = k * length
    split = 134217729.0  # 2**27 + 1
    kh = k * split - (k * split - k)
    kl = k - kh
    lh = length * split - (length * split - length)
    ll = length - lh
    err = ((kh * lh - x) + kh * ll + kl * lh) + kl * ll
    return np.fmod(x, TWO_PI) + err


def path_phase(k, geometry: InterferometerGeometry, path: PathLabel):
    """k * (path length), reduced so the scan offset contributes exactly."""
    if path is PathLabel.S:
        return _product_mod_2pi(k, geometry.path_short)
    base = _product_mod_2pi(k, geometry.path_long_base)
    return base + np.multiply(k, geometry.path_long_offset)


def fringe_phase(k, geometry: InterferometerGeometry):
    """Phase k * delta_L, safe for nanometre offsets on metre-scale arms."""
    base = _product_mod_2pi(k, geometry.path_long_base - geometry.path_short)
    return base + np.multiply(k, geometry.path_long_offset)


def offset_for_phase(
    k: float, geometry: InterferometerGeometry, target_phase: float
) -> float:
    """Scan offset that puts ``fringe_phase(k, .)`` at ``target_phase`` mod 2*pi."""
    zero = geometry.with_offset(0.0)
    residual = (target_phase - float(fringe_phase(k, zero))) % TWO_PI
    return residual / k


@dataclass(frozen=True)
class DetectorAmplitudes:
    """Single-photon amplitudes at the two output ports, per arm."""

    a_short: complex
    a_long: complex
    b_short: complex
    b_long: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.a_short, self.a_long, self.b_short, self.b_long)


def detector_amplitudes(k: float, geometry: InterferometerGeometry) -> DetectorAmplitudes:
    """Amplitudes for one photon of wavenumber k reaching port A/B via S/L.

    Symmetric beam-splitter convention with the minus sign on the (B, L)
    element; for T = 0.5 the four magnitudes are 1/2.  Unitary for any T:
    the squared magnitudes sum to 1.
    """
    if k <= 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    t = geometry.splitter_transmittance
    cross = math.sqrt(t * (1.0 - t))
    ph_s = np.exp(1j * path_phase(k, geometry, PathLabel.S))
    ph_l = np.exp(1j * path_phase(k, geometry, PathLabel.L))
    return DetectorAmplitudes(
        a_short=cross * ph_s,
        a_long=cross * ph_l,
        b_short=t * ph_s,
        b_long=-(1.0 - t) * ph_l,
    )


@dataclass(frozen=True)
class CoincidenceTerm:
    """One of the eight amplitude terms of the post-selected output state."""

    path_at_a: PathLabel
    path_at_b: PathLabel
    k_at_a: float
    k_at_b: float
    amplitude: complex


@dataclass(frozen=True)
class CoincidenceClassSet:
    """Per-pair class probabilities and their arrival-time signatures."""

    p_central: float
    p_short_long: float
    p_long_short: float
    dt_central: float
    dt_short_long: float
    dt_long_short: float

    @property
    def p_total(self) -> float:
        return self.p_central + self.p_short_long + self.p_long_short

    def probability(self, cls: CoincidenceClass) -> float:
        return {
            CoincidenceClass.CENTRAL: self.p_central,
            CoincidenceClass.SHORT_LONG: self.p_short_long,
            CoincidenceClass.LONG_SHORT: self.p_long_short,
        }[cls]


def _port_amplitude_arrays(k, geometry: InterferometerGeometry):
    """Vectorized (a_S, a_L, b_S, b_L) for an array of wavenumbers."""
    t = geometry.splitter_transmittance
    cross = math.sqrt(t * (1.0 - t))
    ph_s = np.exp(1j * path_phase(k, geometry, PathLabel.S))
    ph_l = np.exp(1j * path_phase(k, geometry, PathLabel.L))
    return cross * ph_s, cross * ph_l, t * ph_s, -(1.0 - t) * ph_l


def class_probabilities_pair(k1, k2, geometry: InterferometerGeometry):
    """Class probabilities for pairs (k1, k2), vectorized.

    Within each photon-to-port assignment the four path terms are grouped as
    central = SS + LL (coherent, cross term scaled by mu) and two side
    singlets whose mutual cross term (also scaled by mu) is split between the
    side classes in proportion to their weights, which keeps every class
    nonnegative for any splitter transmittance.
    """
    k1 = np.asarray(k1, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    mu = geometry.mode_overlap

    p_c = np.zeros(np.broadcast(k1, k2).shape)
    p_sl = np.zeros_like(p_c)
    p_ls = np.zeros_like(p_c)
    for ka, kb in ((k1, k2), (k2, k1)):
        a_s, a_l, b_s, b_l = _port_amplitude_arrays(ka, geometry)
        _, _, bb_s, bb_l = _port_amplitude_arrays(kb, geometry)
        t_ss = a_s * bb_s
        t_ll = a_l * bb_l
        t_sl = a_s * bb_l
        t_ls = a_l * bb_s
        p_c += (
            np.abs(t_ss) ** 2
            + np.abs(t_ll) ** 2
            + 2.0 * mu * np.real(t_ss * np.conj(t_ll))
        )
        w_sl = np.abs(t_sl) ** 2
        w_ls = np.abs(t_ls) ** 2
        cross = 2.0 * mu * np.real(t_sl * np.conj(t_ls))
        total = w_sl + w_ls
        p_sl += w_sl + cross * w_sl / total
        p_ls += w_ls + cross * w_ls / total
    # clamp rounding residue; exact nulls otherwise land at ~-1e-17
    return (
        np.maximum(p_c, 0.0),
        np.maximum(p_sl, 0.0),
        np.maximum(p_ls, 0.0),
    )


def coincidence_terms(
    pair: WavenumberPair, geometry: InterferometerGeometry
) -> list[CoincidenceTerm]:
    """The eight amplitude terms, ordered by assignment then path group."""
    terms = []
    for ka, kb in ((pair.k1, pair.k2), (pair.k2, pair.k1)):
        amps_a = detector_amplitudes(ka, geometry)
        amps_b = detector_amplitudes(kb, geometry)
        for pa, pb, amp in (
            (PathLabel.S, PathLabel.S, amps_a.a_short * amps_b.b_short),
            (PathLabel.L, PathLabel.L, amps_a.a_long * amps_b.b_long),
            (PathLabel.S, PathLabel.L, amps_a.a_short * amps_b.b_long),
            (PathLabel.L, PathLabel.S, amps_a.a_long * amps_b.b_short),
        ):
            terms.append(
                CoincidenceTerm(
                    path_at_a=pa, path_at_b=pb, k_at_a=ka, k_at_b=kb,
                    amplitude=complex(amp),
                )
            )
    return terms


def coincidence_classes(
    pair: WavenumberPair, geometry: InterferometerGeometry
) -> CoincidenceClassSet:
    """Group the eight output terms into the three arrival-time classes."""
    p_c, p_sl, p_ls = class_probabilities_pair(pair.k1, pair.k2, geometry)
    dt = delta_L(geometry) / SPEED_OF_LIGHT
    return CoincidenceClassSet(
        p_central=float(p_c),
        p_short_long=float(p_sl),
        p_long_short=float(p_ls),
        dt_central=0.0,
        dt_short_long=+dt,
        dt_long_short=-dt,
    )


def state_norm(pair: WavenumberPair, geometry: InterferometerGeometry) -> float:
    """Squared norm of the full eight-term output state.

    The two photon-to-port assignments add incoherently; within each, all
    cross terms between different path groups carry the mode overlap mu.
    For mu = 1, T = 0.5 this equals half of
    1 - cos(k_p dL)/2 - cos((k_p - 2 k1) dL)/2.
    """
    mu = geometry.mode_overlap
    norm = 0.0
    for ka, kb in ((pair.k1, pair.k2), (pair.k2, pair.k1)):
        amps_a = detector_amplitudes(ka, geometry)
        amps_b = detector_amplitudes(kb, geometry)
        terms = np.array(
            [
                amps_a.a_short * amps_b.b_short,
                amps_a.a_long * amps_b.b_long,
                amps_a.a_short * amps_b.b_long,
                amps_a.a_long * amps_b.b_short,
            ]
        )
        incoherent = float(np.sum(np.abs(terms) ** 2))
        coherent = float(np.abs(np.sum(terms)) ** 2)
        norm += (1.0 - mu) * incoherent + mu * coherent
    return norm
