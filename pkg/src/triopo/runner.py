"""End-to-end scans: detuning scans, pump-power sweeps, witness points, comb
spectra.  Analytic mode evaluates the model exactly; Monte Carlo mode pushes
synthesized photocurrent records through the detection chain and reports
block-statistics standard errors alongside every value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .cavity import reflect_covariance, synchronous_scan
from .config import (
    RunMode,
    ScanConfig,
    SourceKind,
    SweepKind,
    config_hash,
)
from .detection import (
    apply_efficiency,
    block_covariances,
    block_variances,
    synthesize_record,
)
from .gaussian import (
    QuadratureAxis,
    SpectralCovariance,
    reconstruct_from_measurements,
)
from .opo import comb_spectrum, output_spectra, output_spectra_with_excess
from .witness import WitnessReport, tripartite_witnesses

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class ScanTable:
    """Rectangular numeric result table, one row per sweep point."""

    header: tuple
    rows: tuple
    metadata: tuple = ()

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("rows must match the header width")

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([row[i] for row in self.rows], dtype=float)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv_text())

    def to_csv_text(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.metadata]
        lines.append(",".join(self.header))
        for row in self.rows:
            lines.append(",".join(repr(float(v)) for v in row))
        return "\n".join(lines) + "\n"


def _metadata(cfg: ScanConfig):
    return (("kind", cfg.sweep_kind.value),
            ("mode", cfg.mode.value),
            ("seed", cfg.detection.seed),
            ("config_hash", config_hash(cfg)),
            ("tool_version", __version__))


def _sweep_values(cfg: ScanConfig) -> np.ndarray:
    start, stop, points = cfg.sweep_range
    return np.linspace(start, stop, int(points))


def _source_spectra(cfg: ScanConfig, sigma: float | None = None) -> SpectralCovariance:
    """Model output covariance (or the flat-SQL test source)."""
    f = cfg.detection.analysis_frequency
    if cfg.source is SourceKind.VACUUM:
        return SpectralCovariance.vacuum(f)
    opo = cfg.opo if sigma is None else replace(cfg.opo, sigma=sigma)
    if cfg.comb_enabled:
        return output_spectra_with_excess(opo, cfg.comb, f)
    return output_spectra(opo, f)


def _point_seed(cfg: ScanConfig, index: int) -> int:
    return cfg.detection.seed ^ index


# beam-space combinations (coefficients over the three detected channels)
_BEAM = {
    "sum_12": np.array([0.0, 1.0, 1.0]) / _SQRT2,
    "diff_12": np.array([0.0, 1.0, -1.0]) / _SQRT2,
    "sum_01": np.array([1.0, 1.0, 0.0]) / _SQRT2,
    "diff_01": np.array([-1.0, 1.0, 0.0]) / _SQRT2,
    "sum_02": np.array([1.0, 0.0, 1.0]) / _SQRT2,
    "diff_02": np.array([-1.0, 0.0, 1.0]) / _SQRT2,
    "pump": np.array([1.0, 0.0, 0.0]),
    "signal": np.array([0.0, 1.0, 0.0]),
    "idler": np.array([0.0, 0.0, 1.0]),
}

# corrected curve per pair: (base combo, correction channel); the correction is
# subtracted from the SUM for the twin pair but from the DIFFERENCE for the
# pump-twin pairs, using the remaining beam
_DETUNING_CORRECTIONS = (
    ("corr_sum_12", "sum_12", "pump"),
    ("corr_diff_01", "diff_01", "idler"),
    ("corr_diff_02", "diff_02", "signal"),
)

DETUNING_COLUMNS = ("delta",
                    "sum_12", "diff_12", "corr_sum_12",
                    "sum_01", "diff_01", "corr_diff_01",
                    "sum_02", "diff_02", "corr_diff_02")


def _amplitude_block(S: SpectralCovariance) -> np.ndarray:
    return S.entries[np.ix_([0, 2, 4], [0, 2, 4])]


def _corrected_from_block(P: np.ndarray, base: np.ndarray, corr: np.ndarray) -> float:
    vb = base @ P @ base
    vc = corr @ P @ corr
    cov = base @ P @ corr
    return float(vb - cov * cov / vc)


def _detuning_point_analytic(P: np.ndarray):
    values = {}
    for name in ("sum_12", "diff_12", "sum_01", "diff_01", "sum_02", "diff_02"):
        c = _BEAM[name]
        values[name] = float(c @ P @ c)
    for name, base, corr in _DETUNING_CORRECTIONS:
        values[name] = _corrected_from_block(P, _BEAM[base], _BEAM[corr])
    return values


def _detuning_point_mc(S_det: SpectralCovariance, cfg: ScanConfig, seed: int):
    det = replace(cfg.detection, seed=seed)
    rec = synthesize_record(S_det, det, cfg.mc_blocks, QuadratureAxis.P)
    values, errors = {}, {}
    for name in ("sum_12", "diff_12", "sum_01", "diff_01", "sum_02", "diff_02"):
        est = block_variances(rec, _BEAM[name])
        values[name], errors[name] = est.value, est.standard_error
    for name, base, corr in _DETUNING_CORRECTIONS:
        cb, cc = _BEAM[base], _BEAM[corr]
        cov = block_covariances(rec, cb, cc).value
        var_c = block_variances(rec, cc).value
        alpha = cov / var_c
        est = block_variances(rec, cb - alpha * cc)
        values[name], errors[name] = est.value, est.standard_error
    return values, errors


def run_detuning_scan(cfg: ScanConfig) -> ScanTable:
    """Sum, difference and corrected noise of each beam pair versus the
    common analysis-cavity detuning (reflected amplitude variances after
    detection losses)."""
    if cfg.sweep_kind is not SweepKind.DETUNING_SCAN:
        raise ValueError("config is not a detuning scan")
    S0 = _source_spectra(cfg)
    f = cfg.detection.analysis_frequency
    mc = cfg.mode is RunMode.MONTE_CARLO
    header = list(DETUNING_COLUMNS)
    if mc:
        header += [c + "_se" for c in DETUNING_COLUMNS[1:]]
    rows = []
    for i, delta in enumerate(_sweep_values(cfg)):
        reflected = reflect_covariance(S0, synchronous_scan(cfg.cavities, delta), f)
        detected = apply_efficiency(reflected, cfg.detection)
        if mc:
            values, errors = _detuning_point_mc(detected, cfg, _point_seed(cfg, i))
            row = [delta] + [values[c] for c in DETUNING_COLUMNS[1:]] \
                + [errors[c] for c in DETUNING_COLUMNS[1:]]
        else:
            values = _detuning_point_analytic(_amplitude_block(detected))
            row = [delta] + [values[c] for c in DETUNING_COLUMNS[1:]]
        rows.append(tuple(row))
    return ScanTable(tuple(header), tuple(rows), _metadata(cfg))


SIGMA_COLUMNS = ("sigma", "var_p_minus", "var_q_plus", "var_p0", "var_q0",
                 "var_q_plus_corr", "var_p01", "var_q01_corr", "V0", "V1", "V2")


def _sigma_point_analytic(detected: SpectralCovariance):
    rep = tripartite_witnesses(detected)
    t = rep.terms
    return {
        "var_p_minus": t["var_p_minus"],
        "var_q_plus": t["var_q_plus"],
        "var_p0": detected.entry("p0", "p0"),
        "var_q0": detected.entry("q0", "q0"),
        "var_q_plus_corr": t["var_q_plus_corr"],
        "var_p01": t["var_p01"],
        "var_q01_corr": t["var_q01_corr"],
        "V0": rep.v0, "V1": rep.v1, "V2": rep.v2,
    }


def _estimated_covariance(detected: SpectralCovariance, cfg: ScanConfig, seed: int):
    """Partial covariance with both 3x3 one-quadrature blocks estimated from
    independent synthesized records, plus per-entry standard errors."""
    det_p = replace(cfg.detection, seed=seed)
    det_q = replace(cfg.detection, seed=seed + 0x5DEECE66D)
    terms, errs = {}, {}
    for axis, det in ((QuadratureAxis.P, det_p), (QuadratureAxis.Q, det_q)):
        rec = synthesize_record(detected, det, cfg.mc_blocks, axis)
        a = axis.value
        for b in range(3):
            e = np.zeros(3); e[b] = 1.0
            est = block_variances(rec, e)
            terms[f"var_{a}{b}"] = est.value
            errs[f"var_{a}{b}"] = est.standard_error
        for i in range(3):
            for j in range(i + 1, 3):
                ei = np.zeros(3); ei[i] = 1.0
                ej = np.zeros(3); ej[j] = 1.0
                est = block_covariances(rec, ei, ej)
                terms[f"C_{a}{i}{a}{j}"] = est.value
                errs[f"C_{a}{i}{a}{j}"] = est.standard_error
    # variances can only be positive; block estimates of tiny true values may
    # round to zero but never below
    S_est = reconstruct_from_measurements(terms, detected.analysis_frequency)
    return S_est, errs


def _sigma_point_mc(detected: SpectralCovariance, cfg: ScanConfig, seed: int):
    S_est, errs = _estimated_covariance(detected, cfg, seed)
    values = _sigma_point_analytic(S_est)
    errors = {
        "var_p_minus": np.hypot(errs["var_p1"], errs["var_p2"]) / 2 + errs["C_p1p2"],
        "var_q_plus": np.hypot(errs["var_q1"], errs["var_q2"]) / 2 + errs["C_q1q2"],
        "var_p0": errs["var_p0"],
        "var_q0": errs["var_q0"],
    }
    errors["var_q_plus_corr"] = errors["var_q_plus"]
    errors["var_p01"] = np.hypot(errs["var_p0"], errs["var_p1"]) / 2 + errs["C_p0p1"]
    errors["var_q01_corr"] = np.hypot(errs["var_q0"], errs["var_q1"]) / 2 + errs["C_q0q1"]
    var_p02_se = np.hypot(errs["var_p0"], errs["var_p2"]) / 2 + errs["C_p0p2"]
    var_q02_se = np.hypot(errs["var_q0"], errs["var_q2"]) / 2 + errs["C_q0q2"]
    errors["V0"] = float(np.hypot(errors["var_p_minus"], errors["var_q_plus_corr"]))
    errors["V1"] = float(np.hypot(errors["var_p01"], errors["var_q01_corr"]))
    errors["V2"] = float(np.hypot(var_p02_se, var_q02_se))
    return values, errors


def run_sigma_sweep(cfg: ScanConfig) -> ScanTable:
    """The tracked noise quantities and the three witnesses versus pump power
    (detected values; no analysis-cavity rotation in this idealized sweep)."""
    if cfg.sweep_kind is not SweepKind.SIGMA_SWEEP:
        raise ValueError("config is not a sigma sweep")
    mc = cfg.mode is RunMode.MONTE_CARLO
    header = list(SIGMA_COLUMNS)
    if mc:
        header += [c + "_se" for c in SIGMA_COLUMNS[1:]]
    rows = []
    for i, sigma in enumerate(_sweep_values(cfg)):
        detected = apply_efficiency(_source_spectra(cfg, sigma=sigma), cfg.detection)
        if mc:
            values, errors = _sigma_point_mc(detected, cfg, _point_seed(cfg, i))
            row = [sigma] + [values[c] for c in SIGMA_COLUMNS[1:]] \
                + [errors[c] for c in SIGMA_COLUMNS[1:]]
        else:
            values = _sigma_point_analytic(detected)
            row = [sigma] + [values[c] for c in SIGMA_COLUMNS[1:]]
        rows.append(tuple(row))
    return ScanTable(tuple(header), tuple(rows), _metadata(cfg))


def run_witness_point(cfg: ScanConfig) -> WitnessReport:
    """Full pipeline at one operating point: model -> detection -> witnesses.

    In Monte Carlo mode the covariance entering the witness evaluation is
    estimated from synthesized records instead of taken exactly."""
    if cfg.sweep_kind is not SweepKind.WITNESS_POINT:
        raise ValueError("config is not a witness point")
    detected = apply_efficiency(_source_spectra(cfg), cfg.detection)
    if cfg.mode is RunMode.MONTE_CARLO:
        S_est, _ = _estimated_covariance(detected, cfg, cfg.detection.seed)
        return tripartite_witnesses(S_est)
    return tripartite_witnesses(detected)


def witness_table(cfg: ScanConfig, report: WitnessReport) -> ScanTable:
    return ScanTable(tuple(WitnessReport.csv_header(with_sigma=True)),
                     (tuple(report.to_csv_row(sigma=cfg.opo.sigma)),),
                     _metadata(cfg))


COMB_COLUMNS = ("frequency_hz", "excess_factor")


def run_comb_spectrum(cfg: ScanConfig) -> ScanTable:
    """Phenomenological pump-phase excess-noise factor over a frequency band
    (linear SQL units; figure scripts convert to dB)."""
    if cfg.sweep_kind is not SweepKind.COMB_SPECTRUM:
        raise ValueError("config is not a comb spectrum")
    rows = [(f, comb_spectrum(cfg.comb, f)) for f in _sweep_values(cfg)]
    return ScanTable(COMB_COLUMNS, tuple(rows), _metadata(cfg))


def run(cfg: ScanConfig):
    """Dispatch on the sweep kind; returns (table, optional report)."""
    if cfg.sweep_kind is SweepKind.DETUNING_SCAN:
        return run_detuning_scan(cfg), None
    if cfg.sweep_kind is SweepKind.SIGMA_SWEEP:
        return run_sigma_sweep(cfg), None
    if cfg.sweep_kind is SweepKind.COMB_SPECTRUM:
        return run_comb_spectrum(cfg), None
    report = run_witness_point(cfg)
    return witness_table(cfg, report), report
