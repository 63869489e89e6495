"""Lossy photodetection, demodulated record synthesis, block variances, SQL
normalization.

The demodulated baseband is synthesized directly as white Gaussian samples
with the target covariance instead of mixing down a simulated carrier: the
demodulation bandwidth equals the acquisition rate, so samples are white
within the band and the block-variance statistics are identical.  One
quadrature per beam reaches the detectors at any instant (whichever the
analysis cavities map onto the reflected amplitude); records carry that
mapping in their metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gaussian import (
    N_MODES,
    QuadratureAxis,
    SpectralCovariance,
    require_physical,
)


@dataclass(frozen=True)
class DetectionParams:
    """Detector efficiencies and acquisition settings."""

    efficiency_twins: float = 0.87
    efficiency_pump: float = 0.74
    analysis_frequency: float = 21e6
    demod_bandwidth: float = 600e3
    sample_rate: float = 600e3
    block_size: int = 1000
    seed: int = 20210

    def __post_init__(self):
        if not (0.0 < self.efficiency_twins <= 1.0 and 0.0 < self.efficiency_pump <= 1.0):
            raise ValueError("efficiencies must be in (0, 1]")
        if self.block_size < 2:
            raise ValueError("block size must be at least 2")
        if self.sample_rate <= 0:
            raise ValueError("sample rate must be positive")

    @property
    def beam_efficiencies(self):
        return (self.efficiency_pump, self.efficiency_twins, self.efficiency_twins)


def apply_efficiency(S: SpectralCovariance, det: DetectionParams) -> SpectralCovariance:
    """Beam-splitter loss model: per beam S' = eta*S + (1-eta)*1 on diagonal
    blocks, sqrt(eta_a*eta_b) on cross blocks.  Vacuum maps to vacuum.

    Partial matrices are mapped entrywise (unknown stays unknown); complete
    inputs must be physical."""
    if S.is_complete():
        require_physical(S)
    eta = np.repeat(det.beam_efficiencies, 2)
    m = np.sqrt(np.outer(eta, eta)) * S.entries + np.diag(1.0 - eta)
    return SpectralCovariance(m, S.analysis_frequency)


@dataclass(frozen=True)
class PhotocurrentRecord:
    """Demodulated samples, one 3-vector per acquisition instant, SQL-scaled."""

    samples: np.ndarray               # (n, 3)
    params: DetectionParams
    quadrature: QuadratureAxis        # which incident quadrature the cavities mapped out
    source_note: str = ""

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != N_MODES:
            raise ValueError("record must be (n_samples, 3)")
        if s.shape[0] % self.params.block_size != 0:
            raise ValueError("record length must be a whole number of blocks")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n_blocks(self) -> int:
        return self.samples.shape[0] // self.params.block_size

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("sample_index,i0,i1,i2\n")
            for i, row in enumerate(self.samples):
                fh.write(f"{i},{row[0]!r},{row[1]!r},{row[2]!r}\n")


@dataclass(frozen=True)
class VarianceEstimate:
    """Block-averaged variance with its standard error."""

    value: float
    standard_error: float
    blocks_used: int


def _beam_block(S: SpectralCovariance, axis: QuadratureAxis) -> np.ndarray:
    sel = [2 * b + (0 if axis is QuadratureAxis.P else 1) for b in range(N_MODES)]
    blk = S.entries[np.ix_(sel, sel)]
    if np.isnan(blk).any():
        raise ValueError("covariance is missing entries of the detected quadrature")
    return blk


def synthesize_record(S: SpectralCovariance, det: DetectionParams, n_blocks: int,
                      quadrature: QuadratureAxis = QuadratureAxis.P,
                      source_note: str = "") -> PhotocurrentRecord:
    """Stationary Gaussian record whose per-beam (co)variances equal the
    selected-quadrature block of S.  Deterministic for a given seed; blocks
    are independent by construction (white samples).

    The quadrature argument names which incident quadrature the analysis
    cavities are currently converting to detected amplitude; after
    reflect_covariance that is P.
    """
    if n_blocks <= 0:
        raise ValueError("need at least one block")
    blk = _beam_block(S, quadrature)
    # PSD factor of the 3x3 block (eigh tolerates the exactly-degenerate cases
    # that trip Cholesky, e.g. the all-zero test covariance)
    w, v = np.linalg.eigh(blk)
    if w.min() < -1e-9:
        raise ValueError("detected-quadrature covariance block is not PSD")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    rng = np.random.default_rng(det.seed)
    z = rng.standard_normal((n_blocks * det.block_size, N_MODES))
    if not source_note:
        source_note = (f"{quadrature.name}-quadrature block of covariance at "
                       f"{S.analysis_frequency!r} Hz")
    return PhotocurrentRecord(z @ root.T, det, quadrature, source_note)


def block_variances(rec: PhotocurrentRecord, combo) -> VarianceEstimate:
    """Variance of a 3-coefficient beam combination, block by block.

    Returns the mean of per-block sample variances and the standard error
    across blocks (std of block variances / sqrt(blocks))."""
    combo = np.asarray(combo, dtype=float)
    if combo.shape != (N_MODES,):
        raise ValueError("combination must have one coefficient per beam")
    if rec.samples.shape[0] == 0:
        raise ValueError("empty record")
    series = rec.samples @ combo
    blocks = series.reshape(rec.n_blocks, rec.params.block_size)
    per_block = blocks.var(axis=1, ddof=1)
    value = float(per_block.mean())
    se = float(per_block.std(ddof=1) / np.sqrt(rec.n_blocks)) if rec.n_blocks >= 2 else 0.0
    return VarianceEstimate(value, se, rec.n_blocks)


def block_covariances(rec: PhotocurrentRecord, combo_a, combo_b) -> VarianceEstimate:
    """Cross covariance of two beam combinations via block samples."""
    a = np.asarray(combo_a, dtype=float)
    b = np.asarray(combo_b, dtype=float)
    sa = rec.samples @ a
    sb = rec.samples @ b
    n = rec.params.block_size
    blocks_a = sa.reshape(rec.n_blocks, n)
    blocks_b = sb.reshape(rec.n_blocks, n)
    ma = blocks_a.mean(axis=1, keepdims=True)
    mb = blocks_b.mean(axis=1, keepdims=True)
    per_block = ((blocks_a - ma) * (blocks_b - mb)).sum(axis=1) / (n - 1)
    value = float(per_block.mean())
    se = float(per_block.std(ddof=1) / np.sqrt(rec.n_blocks)) if rec.n_blocks >= 2 else 0.0
    return VarianceEstimate(value, se, rec.n_blocks)


def sql_normalize(raw: VarianceEstimate, reference: VarianceEstimate) -> VarianceEstimate:
    """Divide by the calibrated shot-noise estimate; errors in quadrature."""
    if reference.value <= 0:
        raise ValueError("SQL reference must be positive")
    value = raw.value / reference.value
    rel = 0.0
    if raw.value != 0:
        rel = (raw.standard_error / raw.value) ** 2
    rel += (reference.standard_error / reference.value) ** 2
    return VarianceEstimate(value, abs(value) * float(np.sqrt(rel)),
                            min(raw.blocks_used, reference.blocks_used))
