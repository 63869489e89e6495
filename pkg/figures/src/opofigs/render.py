"""Render scan CSV tables to PNG and SVG figures.

Layouts:
  DetuningTriple - three stacked panels (signal-idler, signal-pump,
                   idler-pump), each with the sum, difference and corrected
                   traces versus the common cavity detuning.
  SigmaPair      - two panels versus pump power: twin quantities and
                   pump/pump-twin quantities.
  CombSingle     - excess-noise comb in dB versus frequency.

The input CSV stays in linear SQL units; dB conversion happens only here,
only for the comb layout.  The SQL reference is drawn as a dashed line at
1.0 (0 dB for the comb).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


class SchemaError(ValueError):
    """Input CSV columns do not match the chosen layout."""


class PanelLayout(Enum):
    DETUNING_TRIPLE = "DetuningTriple"
    SIGMA_PAIR = "SigmaPair"
    COMB_SINGLE = "CombSingle"


#: required columns per layout
SCHEMAS = {
    PanelLayout.DETUNING_TRIPLE: (
        "delta",
        "sum_12", "diff_12", "corr_sum_12",
        "sum_01", "diff_01", "corr_diff_01",
        "sum_02", "diff_02", "corr_diff_02",
    ),
    PanelLayout.SIGMA_PAIR: (
        "sigma", "var_p_minus", "var_q_plus", "var_q_plus_corr",
        "var_p0", "var_q0", "var_p01", "var_q01_corr",
    ),
    PanelLayout.COMB_SINGLE: ("frequency_hz", "excess_factor"),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    panel_layout: PanelLayout
    output_image: str
    sql_reference_line: bool = True


def load_table(path):
    """CSV -> (metadata dict, {column: array}).  `#` lines are metadata."""
    meta = {}
    header = None
    rows = []
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line.lstrip("# ").partition("=")
                meta[key] = val
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None or not rows:
        raise SchemaError(f"{path}: no data rows")
    data = np.array(rows)
    return meta, {name: data[:, i] for i, name in enumerate(header)}


def check_schema(columns, layout: PanelLayout):
    required = set(SCHEMAS[layout])
    present = set(columns)
    missing = sorted(required - present)
    if missing:
        extra = sorted(present - required)
        raise SchemaError(
            f"columns do not match layout {layout.value}: "
            f"missing {missing}; unmatched {extra}")


def to_db(linear):
    """10 log10, the only numeric transformation in this package."""
    return 10.0 * np.log10(np.asarray(linear, dtype=float))


def _sql_line(ax, level):
    ax.axhline(level, color="k", linestyle="--", linewidth=0.8, label="SQL")


def _render_detuning(cols, spec):
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 8.0), sharex=True)
    panels = (
        ("signal - idler", "sum_12", "diff_12", "corr_sum_12", "corrected sum"),
        ("signal - pump", "sum_01", "diff_01", "corr_diff_01", "corrected difference"),
        ("idler - pump", "sum_02", "diff_02", "corr_diff_02", "corrected difference"),
    )
    x = cols["delta"]
    for ax, (title, c_sum, c_diff, c_corr, corr_label) in zip(axes, panels):
        ax.plot(x, cols[c_sum], "o-", color="k", markersize=2.5, label="sum")
        ax.plot(x, cols[c_diff], "-", color="tab:red", label="difference")
        ax.plot(x, cols[c_corr], "o-", color="tab:blue", markersize=2.5,
                markerfacecolor="none", label=corr_label)
        if spec.sql_reference_line:
            _sql_line(ax, 1.0)
        ax.set_ylabel("noise power (SQL units)")
        ax.set_title(title, fontsize=10)
        ax.legend(fontsize=8, loc="upper right")
    axes[-1].set_xlabel(r"analysis cavity detuning $\Delta$ (linewidths)")
    return fig


def _render_sigma(cols, spec):
    fig, axes = plt.subplots(2, 1, figsize=(6.0, 7.0), sharex=True)
    x = cols["sigma"]
    a, b = axes
    a.plot(x, cols["var_p_minus"], "o-", color="tab:red",
           label=r"$\Delta^2 \hat p_-$")
    a.plot(x, cols["var_q_plus"], "s-", color="k", label=r"$\Delta^2 \hat q_+$")
    a.plot(x, cols["var_q_plus_corr"], "^-", color="tab:blue",
           label=r"$\Delta^2 \hat q'_+$")
    b.plot(x, cols["var_p0"], "o-", color="tab:red", label=r"$\Delta^2 \hat p_0$")
    b.plot(x, cols["var_q0"], "s-", color="k", label=r"$\Delta^2 \hat q_0$")
    b.plot(x, cols["var_p01"], "o--", color="tab:orange",
           label=r"$\Delta^2 \hat p_{01}$")
    b.plot(x, cols["var_q01_corr"], "^--", color="tab:blue",
           label=r"$\Delta^2 \hat q'_{01}$")
    for ax in axes:
        if spec.sql_reference_line:
            _sql_line(ax, 1.0)
        ax.set_ylabel("noise power (SQL units)")
        ax.legend(fontsize=8, ncol=2)
    b.set_xlabel(r"pump power over threshold $\sigma$")
    return fig


def _render_comb(cols, spec):
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    ax.plot(cols["frequency_hz"] / 1e3, to_db(cols["excess_factor"]),
            "-", color="tab:purple", linewidth=0.9, label="pump phase excess noise")
    if spec.sql_reference_line:
        _sql_line(ax, 0.0)
    ax.set_xlabel("frequency (kHz)")
    ax.set_ylabel("excess noise (dB rel. SQL)")
    ax.legend(fontsize=8)
    return fig


_RENDERERS = {
    PanelLayout.DETUNING_TRIPLE: _render_detuning,
    PanelLayout.SIGMA_PAIR: _render_sigma,
    PanelLayout.COMB_SINGLE: _render_comb,
}


def render(spec: FigureSpec):
    """Draw the figure and write it as PNG and SVG.

    Returns the list of written paths.  Raises SchemaError (with the column
    diff) when the CSV does not carry the layout's columns.
    """
    _, cols = load_table(spec.input_csv)
    check_schema(cols.keys(), spec.panel_layout)
    fig = _RENDERERS[spec.panel_layout](cols, spec)
    fig.tight_layout()
    out = Path(spec.output_image)
    written = []
    for suffix in (".png", ".svg"):
        target = out.with_suffix(suffix)
        fig.savefig(target, dpi=150)
        written.append(target)
    plt.close(fig)
    return written


def _spec_from_file(path) -> FigureSpec:
    pairs = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, val = line.partition("=")
            pairs[key.strip()] = val.strip()
    try:
        layout = PanelLayout(pairs["panel_layout"])
        return FigureSpec(
            input_csv=pairs["input_csv"],
            panel_layout=layout,
            output_image=pairs["output_image"],
            sql_reference_line=pairs.get("sql_reference_line", "true").lower()
            in ("true", "1", "yes"),
        )
    except KeyError as exc:
        raise SchemaError(f"figure spec is missing key {exc}") from exc
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="opo-render", description="Render OPO scan CSVs to PNG and SVG.")
    parser.add_argument("--spec", metavar="PATH",
                        help="flat key=value figure spec file")
    parser.add_argument("--input", metavar="CSV")
    parser.add_argument("--layout", choices=[p.value for p in PanelLayout])
    parser.add_argument("--out", metavar="IMAGE")
    parser.add_argument("--no-sql-line", action="store_true")
    args = parser.parse_args(argv)
    try:
        if args.spec:
            spec = _spec_from_file(args.spec)
        else:
            if not (args.input and args.layout and args.out):
                parser.error("need --spec or all of --input/--layout/--out")
            spec = FigureSpec(args.input, PanelLayout(args.layout), args.out,
                              sql_reference_line=not args.no_sql_line)
        written = render(spec)
        print("wrote " + ", ".join(str(p) for p in written))
        return 0
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
