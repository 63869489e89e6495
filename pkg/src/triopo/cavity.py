"""Self-homodyne rotation: reflection of a bright beam off a detuned cavity.

A cavity reflects carrier and sidebands with different phases, which rotates
the noise ellipse relative to the mean field: the intensity noise of the
reflected beam then reads out an arbitrary quadrature of the incident beam.
Conversion of the incident phase quadrature into the reflected amplitude
quadrature is complete when the analysis frequency exceeds sqrt(2) times the
cavity bandwidth, at detunings near +/-0.5 and near +/-(analysis
frequency)/bandwidth.

Single-pole model, detuning measured in cavity FWHM units:

    r(x) = (1 - 2g + 2ix) / (1 + 2ix),   x = detuning + offset/bandwidth

with g the coupler fraction of the total loss rate (g = 1: lossless mirror
cavity, |r| = 1; g = 0.5: impedance matched, r(0) = 0).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .gaussian import N_MODES, SpectralCovariance, require_physical

#: analysis-cavity bandwidths (FWHM, Hz) of the default apparatus: pump, signal, idler
DEFAULT_BANDWIDTHS = (11.5e6, 14.5e6, 13.6e6)

#: default coupler fraction; the cavities are designed near-lossless
DEFAULT_COUPLING_RATIO = 0.95


@dataclass(frozen=True)
class AnalysisCavity:
    """One rotation cavity: FWHM bandwidth, coupler fraction g, detuning in
    FWHM units."""

    bandwidth: float
    coupling_ratio: float = DEFAULT_COUPLING_RATIO
    detuning: float = 0.0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if not 0.0 < self.coupling_ratio <= 1.0:
            raise ValueError("coupling ratio must be in (0, 1]")


def default_cavities(detuning: float = 0.0,
                     coupling_ratio: float = DEFAULT_COUPLING_RATIO):
    """The three analysis cavities, synchronously set to a common detuning."""
    return tuple(AnalysisCavity(bw, coupling_ratio, detuning)
                 for bw in DEFAULT_BANDWIDTHS)


def reflection_coefficient(cav: AnalysisCavity, offset: float = 0.0) -> complex:
    """Amplitude reflection at a sideband offset (Hz; may be negative)."""
    x = cav.detuning + offset / cav.bandwidth
    return (1.0 - 2.0 * cav.coupling_ratio + 2j * x) / (1.0 + 2j * x)


@dataclass(frozen=True)
class RotationCoefficients:
    """Transfer amplitudes from incident (p, q) to the reflected amplitude
    quadrature, referenced to the reflected mean-field phase.  The power
    weights obey |a_pp|^2 + |a_pq|^2 <= 1, with equality for g = 1."""

    a_pp: complex
    a_pq: complex

    @property
    def loss_weight(self) -> float:
        """Vacuum fraction admixed by intracavity loss."""
        return 1.0 - abs(self.a_pp) ** 2 - abs(self.a_pq) ** 2


def rotation_coefficients(cav: AnalysisCavity,
                          analysis_frequency: float) -> RotationCoefficients:
    """Sideband-picture transfer to the reflected amplitude quadrature.

    Combines the carrier reflection r(detuning) and the two sideband
    reflections r(detuning +/- offset), all referenced to the reflected
    carrier phase (direct photodetection of the reflected beam).
    """
    if analysis_frequency <= 0:
        raise ValueError("analysis frequency must be positive")
    r_carrier = reflection_coefficient(cav, 0.0)
    r_up = reflection_coefficient(cav, +analysis_frequency)
    r_low = reflection_coefficient(cav, -analysis_frequency)
    phase = np.exp(-1j * np.angle(r_carrier))
    upper = phase * r_up
    lower = np.conj(phase) * np.conj(r_low)
    return RotationCoefficients(a_pp=(upper + lower) / 2.0,
                                a_pq=1j * (upper - lower) / 2.0)


def beam_transfer_matrix(cav: AnalysisCavity, analysis_frequency: float) -> np.ndarray:
    """Full 2x2 complex map of one beam's (p, q) spectral amplitudes."""
    rc = rotation_coefficients(cav, analysis_frequency)
    return np.array([[rc.a_pp, rc.a_pq], [-rc.a_pq, rc.a_pp]])


def reflect_covariance(S: SpectralCovariance, cavities,
                       analysis_frequency: float) -> SpectralCovariance:
    """Reflect all three beams off their analysis cavities.

    Applies the per-beam 2x2 transfer to every block of the covariance and
    adds the loss-induced vacuum, so vacuum maps to vacuum exactly and
    physicality is preserved.  Requires a complete, physical input.
    """
    if len(cavities) != N_MODES:
        raise ValueError(f"need {N_MODES} cavities, one per beam")
    require_physical(S)
    T = np.zeros((2 * N_MODES, 2 * N_MODES), dtype=complex)
    for b, cav in enumerate(cavities):
        T[2 * b:2 * b + 2, 2 * b:2 * b + 2] = beam_transfer_matrix(
            cav, analysis_frequency)
    spec = T @ S.entries @ T.conj().T + (np.eye(2 * N_MODES) - T @ T.conj().T)
    out = np.real(spec)
    return SpectralCovariance(0.5 * (out + out.T), analysis_frequency)


def synchronous_scan(cavities, detuning: float):
    """All cavities share one detuning value while keeping their bandwidths."""
    return tuple(replace(cav, detuning=detuning) for cav in cavities)
