"""Linearized quadrature-noise model of the triply resonant OPO above threshold.

On exact triple resonance the intracavity quadrature fluctuations obey a
linear Langevin system.  With gain clamping (the intracavity pump amplitude
locks to its threshold value, chi*alpha0 = gamma') and a real twin amplitude
beta, in the basis (p0, q0, p1, q1, p2, q2):

    d(dp1)/dt = -g'*dp1 + g'*dp2 + k*dp0 + inputs      (and 1 <-> 2)
    d(dq1)/dt = -g'*dq1 - g'*dq2 + k*dq0 + inputs      (and 1 <-> 2)
    d(dp0)/dt = -g0'*dp0 - k*(dp1 + dp2) + inputs
    d(dq0)/dt = -g0'*dq0 - k*(dq1 + dq2) + inputs

with k = chi*beta, k^2 = g0'*g'*(sqrt(sigma) - 1), twin (pump) total decay
rate g' (g0'), and per-mode inputs sqrt(2*g_coupler)*incident +
sqrt(2*mu_loss)*vacuum.  Output fields follow the input-output relation
out = sqrt(2*g_coupler)*intracavity - incident.

Rates derive from per-round-trip fractions, g = T/2 per round-trip time, so
only the fraction ratios and the overall bandwidth scale enter: the twin
total rate is pinned to the cavity FWHM, g' = pi*bandwidth, and the pump
rate follows from the pump coupler/loss fractions with the same round-trip
time.  Amplitude and phase sectors decouple exactly on resonance.

The measured spectra are the in-phase (co-spectrum) parts of the Hermitian
spectral matrix, which is what demodulating all photocurrents with a common
reference extracts; the antisymmetric quadrature-spectrum parts drop out of
every real quadrature combination.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .gaussian import DIM, PHYSICALITY_TOL, SpectralCovariance, require_physical

TWOPI = 2.0 * np.pi


@dataclass(frozen=True)
class OpoParams:
    """Cavity, crystal and pump parameters of the linearized model.

    Loss fractions are per round trip; `sigma` is pump power over threshold
    power; `pump_excess_phase_in` is the spectral variance (SQL units) of the
    incident pump phase quadrature, the single ad hoc knob standing in for
    the excess phase noise generated inside the crystal (1 = shot limited).
    """

    pump_coupler_reflectivity: float = 0.694
    twin_coupler_transmission: float = 0.04
    pump_spurious_loss: float = 0.03
    twin_spurious_loss: float = 0.01
    cavity_bandwidth_twins: float = 45e6
    threshold_power: float = 75e-3
    sigma: float = 1.14
    pump_excess_phase_in: float = 1.0

    def __post_init__(self):
        if self.sigma < 1.0:
            raise ValueError("above-threshold model requires sigma >= 1")
        for name in ("pump_coupler_reflectivity", "twin_coupler_transmission"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {v}")
        for name in ("pump_spurious_loss", "twin_spurious_loss"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {v}")
        if self.cavity_bandwidth_twins <= 0:
            raise ValueError("cavity bandwidth must be positive")
        if self.pump_excess_phase_in <= 0:
            raise ValueError("incident pump phase variance must be positive")

    @classmethod
    def from_pump_power(cls, power: float, **kwargs) -> "OpoParams":
        p = cls(**kwargs)
        return replace(p, sigma=power / p.threshold_power)

    # rate bookkeeping: the twin FWHM fixes the overall scale, fractions fix ratios
    @property
    def twin_decay_total(self) -> float:
        """gamma' [1/s], amplitude decay; FWHM = gamma'/pi."""
        return np.pi * self.cavity_bandwidth_twins

    @property
    def _twin_fraction(self) -> float:
        return self.twin_coupler_transmission + self.twin_spurious_loss

    @property
    def twin_decay_coupler(self) -> float:
        return self.twin_decay_total * self.twin_coupler_transmission / self._twin_fraction

    @property
    def twin_decay_loss(self) -> float:
        return self.twin_decay_total * self.twin_spurious_loss / self._twin_fraction

    @property
    def pump_coupler_transmission(self) -> float:
        return 1.0 - self.pump_coupler_reflectivity

    @property
    def pump_decay_total(self) -> float:
        frac = self.pump_coupler_transmission + self.pump_spurious_loss
        return self.twin_decay_total * frac / self._twin_fraction

    @property
    def pump_decay_coupler(self) -> float:
        return self.twin_decay_total * self.pump_coupler_transmission / self._twin_fraction

    @property
    def pump_decay_loss(self) -> float:
        return self.twin_decay_total * self.pump_spurious_loss / self._twin_fraction

    @property
    def cavity_bandwidth_pump(self) -> float:
        return self.pump_decay_total / np.pi


@dataclass(frozen=True)
class SteadyState:
    """Clamped classical operating point.

    `pump_amplitude` is chi*alpha0/gamma' (exactly 1 above threshold: gain
    clamping), `twin_amplitude` is chi*beta/gamma' which scales as
    sqrt(sqrt(sigma) - 1), and `effective_gain` is chi*alpha0 in rate units.
    """

    pump_amplitude: float
    twin_amplitude: float
    effective_gain: float


def steady_state(params: OpoParams) -> SteadyState:
    if params.sigma < 1.0:
        raise ValueError("below-threshold operation is out of scope (sigma < 1)")
    gp = params.twin_decay_total
    coupling = np.sqrt(params.pump_decay_total * gp * (np.sqrt(params.sigma) - 1.0))
    return SteadyState(
        pump_amplitude=1.0,
        twin_amplitude=coupling / gp,
        effective_gain=gp,
    )


def drift_matrix(params: OpoParams) -> np.ndarray:
    """Langevin drift matrix M in the (p0,q0,p1,q1,p2,q2) basis."""
    gp = params.twin_decay_total
    g0p = params.pump_decay_total
    k = steady_state(params).twin_amplitude * gp   # chi*beta
    M = np.zeros((DIM, DIM))
    M[0, 0] = -g0p; M[0, 2] = -k; M[0, 4] = -k
    M[1, 1] = -g0p; M[1, 3] = -k; M[1, 5] = -k
    M[2, 0] = k; M[2, 2] = -gp; M[2, 4] = +gp
    M[3, 1] = k; M[3, 3] = -gp; M[3, 5] = -gp
    M[4, 0] = k; M[4, 2] = +gp; M[4, 4] = -gp
    M[5, 1] = k; M[5, 3] = -gp; M[5, 5] = -gp
    return M


def input_scales(params: OpoParams):
    """Diagonals of the coupler and loss input matrices, and the incident
    white-noise spectral variances (pump phase carries the ad hoc excess)."""
    bc = np.array([np.sqrt(2 * params.pump_decay_coupler)] * 2
                  + [np.sqrt(2 * params.twin_decay_coupler)] * 4)
    bl = np.array([np.sqrt(2 * params.pump_decay_loss)] * 2
                  + [np.sqrt(2 * params.twin_decay_loss)] * 4)
    s_in = np.array([1.0, params.pump_excess_phase_in, 1, 1, 1, 1])
    return bc, bl, s_in


def _output_spectrum_matrix(params: OpoParams, analysis_frequency: float,
                            pump_phase_in: float) -> np.ndarray:
    M = drift_matrix(params)
    bc, bl, s_in = input_scales(params)
    s_in = s_in.copy()
    s_in[1] = pump_phase_in
    w = TWOPI * analysis_frequency
    H = np.linalg.inv(1j * w * np.eye(DIM) - M)
    # out = diag(bc) X - incident; transfer matrices act on white inputs
    t_in = bc[:, None] * H * bc[None, :] - np.eye(DIM)
    t_loss = bc[:, None] * H * bl[None, :]
    spec = (t_in * s_in[None, :]) @ t_in.conj().T + t_loss @ t_loss.conj().T
    out = np.real(spec)
    out = 0.5 * (out + out.T)            # exact matrix symmetry
    # the twins share one parameter set, so signal<->idler relabeling is an
    # exact model symmetry; averaging removes last-bit solver asymmetry and
    # makes the V1 = V2 identity hold bitwise downstream
    swap = [0, 1, 4, 5, 2, 3]
    return 0.5 * (out + out[np.ix_(swap, swap)])


def output_spectra(params: OpoParams, analysis_frequency: float) -> SpectralCovariance:
    """Output spectral covariance of the three fields before detection losses.

    Strictly above threshold only (the linearization needs a nonzero twin
    amplitude).  The result is block diagonal between all-P and all-Q sectors
    and passes the uncertainty-principle check.
    """
    if params.sigma <= 1.0:
        raise ValueError("output spectra require sigma > 1 (strictly above threshold)")
    if analysis_frequency <= 0.0:
        raise ValueError("analysis frequency must be positive")
    m = _output_spectrum_matrix(params, analysis_frequency,
                                params.pump_excess_phase_in)
    S = SpectralCovariance(m, analysis_frequency)
    _require_physical_scaled(S)
    return S


def _require_physical_scaled(S: SpectralCovariance) -> None:
    # near DC the free phase-difference diffusion makes entries huge; scale the
    # eigenvalue tolerance with the matrix norm instead of assuming O(1)
    require_physical(S, tol=PHYSICALITY_TOL * max(1.0, float(np.abs(S.entries).max())))


@dataclass(frozen=True)
class ExcessNoiseSpectrum:
    """Phenomenological comb riding on the incident pump phase noise: evenly
    spaced peaks on a flat plateau, both in dB relative to the SQL.  The peak
    width is not resolved better than the 10 kHz measurement bandwidth."""

    plateau_db: float = 4.0
    peak_spacing: float = 150e3
    peak_height_db: float = 15.0
    peak_width: float = 10e3

    def __post_init__(self):
        if self.peak_spacing <= 0 or self.peak_width <= 0:
            raise ValueError("comb spacing and width must be positive")
        # 0 dB is the neutral comb; below-SQL levels are not allowed
        if self.plateau_db < 0 or self.peak_height_db < self.plateau_db:
            raise ValueError("need peak_height_db >= plateau_db >= 0")

    @classmethod
    def flat(cls) -> "ExcessNoiseSpectrum":
        """Neutral 0 dB comb: multiplies the pump phase input by exactly 1."""
        return cls(plateau_db=0.0, peak_height_db=0.0)


def comb_spectrum(comb: ExcessNoiseSpectrum, frequency: float) -> float:
    """Linear (SQL-units) excess factor at a frequency.

    Lorentzian peaks at integer multiples of the spacing, rescaled so the
    value is exactly the peak level on a peak and exactly the plateau level
    midway between peaks.  Periodic by construction.
    """
    if frequency <= 0.0:
        raise ValueError("frequency must be positive")
    lo = 10.0 ** (comb.plateau_db / 10.0)
    hi = 10.0 ** (comb.peak_height_db / 10.0)
    df = frequency - comb.peak_spacing * np.round(frequency / comb.peak_spacing)
    w2 = comb.peak_width ** 2
    lor = w2 / (w2 + df ** 2)
    lor_mid = w2 / (w2 + (comb.peak_spacing / 2.0) ** 2)
    shape = (lor - lor_mid) / (1.0 - lor_mid)
    return float(lo + (hi - lo) * shape)


def output_spectra_with_excess(params: OpoParams, comb: ExcessNoiseSpectrum,
                               analysis_frequency: float) -> SpectralCovariance:
    """output_spectra with the incident pump phase noise multiplied by the
    comb factor at the analysis frequency."""
    if params.sigma <= 1.0:
        raise ValueError("output spectra require sigma > 1 (strictly above threshold)")
    if analysis_frequency <= 0.0:
        raise ValueError("analysis frequency must be positive")
    factor = comb_spectrum(comb, analysis_frequency) if comb is not None else 1.0
    m = _output_spectrum_matrix(params, analysis_frequency,
                                params.pump_excess_phase_in * factor)
    S = SpectralCovariance(m, analysis_frequency)
    _require_physical_scaled(S)
    return S
