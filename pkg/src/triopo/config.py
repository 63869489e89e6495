"""Flat key=value configuration for scans.

Dotted section prefixes map onto the parameter dataclasses, e.g.::

    opo.sigma=1.14
    cavity1.bandwidth=14.5e6
    detection.efficiency_twins=0.87
    sweep.kind=detuning-scan
    sweep.start=-8
    sweep.stop=8
    sweep.points=321
    mode=analytic
    output_path=scan.csv

Unset keys fall back to the defaults of the apparatus description.  Lines
starting with `#` and blank lines are ignored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from enum import Enum

from .cavity import DEFAULT_BANDWIDTHS, DEFAULT_COUPLING_RATIO, AnalysisCavity
from .detection import DetectionParams
from .opo import ExcessNoiseSpectrum, OpoParams


class ConfigError(ValueError):
    """Malformed or inconsistent configuration."""


class SweepKind(Enum):
    DETUNING_SCAN = "detuning-scan"
    SIGMA_SWEEP = "sigma-sweep"
    WITNESS_POINT = "witness"
    COMB_SPECTRUM = "comb-spectrum"


class RunMode(Enum):
    ANALYTIC = "analytic"
    MONTE_CARLO = "montecarlo"


class SourceKind(Enum):
    OPO = "opo"
    VACUUM = "vacuum"      # test-only flat-SQL source


#: default sweep ranges per kind: (start, stop, points)
DEFAULT_RANGES = {
    SweepKind.DETUNING_SCAN: (-8.0, 8.0, 321),
    SweepKind.SIGMA_SWEEP: (1.05, 2.0, 39),
    SweepKind.COMB_SPECTRUM: (1e4, 2e6, 512),
    SweepKind.WITNESS_POINT: (0.0, 0.0, 1),
}


@dataclass(frozen=True)
class ScanConfig:
    opo: OpoParams
    cavities: tuple
    detection: DetectionParams
    sweep_kind: SweepKind
    sweep_range: tuple                 # (start, stop, points)
    mode: RunMode = RunMode.ANALYTIC
    output_path: str = "scan.csv"
    source: SourceKind = SourceKind.OPO
    mc_blocks: int = 100               # blocks per Monte Carlo point
    comb_enabled: bool = False
    comb: ExcessNoiseSpectrum = ExcessNoiseSpectrum()

    def __post_init__(self):
        start, stop, points = self.sweep_range
        if self.sweep_kind is not SweepKind.WITNESS_POINT:
            if points < 2:
                raise ConfigError("sweeps need at least 2 points")
            if not stop > start:
                raise ConfigError("sweep range must be ordered (start < stop)")
        if self.sweep_kind is SweepKind.DETUNING_SCAN and self.source is SourceKind.OPO:
            if start > -3.0 or stop < 3.0:
                raise ConfigError("detuning scans must cover at least [-3, 3]")
        if self.sweep_kind is SweepKind.SIGMA_SWEEP and start <= 1.0:
            raise ConfigError("sigma sweep range must lie strictly above threshold")
        if self.mc_blocks < 2:
            raise ConfigError("mc.blocks must be at least 2")


def default_config(kind: SweepKind = SweepKind.DETUNING_SCAN) -> ScanConfig:
    return ScanConfig(
        opo=OpoParams(),
        cavities=tuple(AnalysisCavity(bw, DEFAULT_COUPLING_RATIO, 0.0)
                       for bw in DEFAULT_BANDWIDTHS),
        detection=DetectionParams(),
        sweep_kind=kind,
        sweep_range=DEFAULT_RANGES[kind],
    )


def _parse_scalar(text: str, target_type):
    if target_type is bool:
        low = text.strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got {text!r}")
    if target_type is int:
        return int(float(text))
    if target_type is float:
        return float(text)
    return text


def parse_config_text(text: str, kind: SweepKind | None = None) -> ScanConfig:
    """Parse flat key=value text into a ScanConfig."""
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in pairs:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value

    def section(prefix, cls, base):
        updates = {}
        names = {f.name for f in fields(cls)}
        for key in list(pairs):
            if key.startswith(prefix + "."):
                name = key[len(prefix) + 1:]
                if name not in names:
                    raise ConfigError(f"unknown key {key!r}")
                ftype = {f.name: f.type for f in fields(cls)}[name]
                pytype = {"float": float, "int": int, "str": str, "bool": bool}.get(
                    ftype, float)
                updates[name] = _parse_scalar(pairs.pop(key), pytype)
        try:
            return replace(base, **updates) if updates else base
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # not a comb-shape field; pop before the comb section consumes the prefix
    comb_enabled = _parse_scalar(pairs.pop("comb.enabled", "false"), bool)
    try:
        opo = section("opo", OpoParams, OpoParams())
        detection = section("detection", DetectionParams, DetectionParams())
        comb = section("comb", ExcessNoiseSpectrum, ExcessNoiseSpectrum())
        cavities = []
        for b in range(3):
            cavities.append(section(
                f"cavity{b}", AnalysisCavity,
                AnalysisCavity(DEFAULT_BANDWIDTHS[b], DEFAULT_COUPLING_RATIO, 0.0)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    kind_text = pairs.pop("sweep.kind", SweepKind.DETUNING_SCAN.value)
    if kind is not None:
        kind_text = kind.value    # the CLI subcommand decides what runs
    try:
        sweep_kind = SweepKind(kind_text)
    except ValueError:
        raise ConfigError(f"unknown sweep kind {kind_text!r}") from None

    d_start, d_stop, d_points = DEFAULT_RANGES[sweep_kind]
    start = _parse_scalar(pairs.pop("sweep.start", repr(d_start)), float)
    stop = _parse_scalar(pairs.pop("sweep.stop", repr(d_stop)), float)
    points = _parse_scalar(pairs.pop("sweep.points", str(d_points)), int)

    mode_text = pairs.pop("mode", RunMode.ANALYTIC.value)
    try:
        mode = RunMode(mode_text)
    except ValueError:
        raise ConfigError(f"unknown mode {mode_text!r}") from None
    source_text = pairs.pop("source", SourceKind.OPO.value)
    try:
        source = SourceKind(source_text)
    except ValueError:
        raise ConfigError(f"unknown source {source_text!r}") from None

    output_path = pairs.pop("output_path", "scan.csv")
    mc_blocks = _parse_scalar(pairs.pop("mc.blocks", "100"), int)

    if pairs:
        raise ConfigError(f"unknown key {sorted(pairs)[0]!r}")
    try:
        return ScanConfig(opo=opo, cavities=tuple(cavities), detection=detection,
                          sweep_kind=sweep_kind, sweep_range=(start, stop, points),
                          mode=mode, output_path=output_path, source=source,
                          mc_blocks=mc_blocks, comb_enabled=comb_enabled, comb=comb)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, kind: SweepKind | None = None) -> ScanConfig:
    with open(path) as fh:
        return parse_config_text(fh.read(), kind)


def render_config(cfg: ScanConfig, include_output: bool = True) -> str:
    """Canonical key=value rendering."""
    lines = []
    for prefix, obj in (("opo", cfg.opo), ("detection", cfg.detection),
                        ("comb", cfg.comb)):
        for f in fields(obj):
            lines.append(f"{prefix}.{f.name}={getattr(obj, f.name)!r}")
    for b, cav in enumerate(cfg.cavities):
        for f in fields(cav):
            lines.append(f"cavity{b}.{f.name}={getattr(cav, f.name)!r}")
    start, stop, points = cfg.sweep_range
    lines += [
        f"sweep.kind={cfg.sweep_kind.value}",
        f"sweep.start={start!r}",
        f"sweep.stop={stop!r}",
        f"sweep.points={points}",
        f"mode={cfg.mode.value}",
        f"source={cfg.source.value}",
        f"mc.blocks={cfg.mc_blocks}",
        f"comb.enabled={str(cfg.comb_enabled).lower()}",
    ]
    if include_output:
        lines.append(f"output_path={cfg.output_path}")
    return "\n".join(sorted(lines)) + "\n"


def config_hash(cfg: ScanConfig) -> str:
    # identifies the physical run, not the destination file
    return hashlib.sha256(
        render_config(cfg, include_output=False).encode()).hexdigest()[:16]
