"""Figure rendering for OPO scan CSV tables.

Reads the CSV outputs of the scan tool and draws publication-style plots:
triple-panel detuning scans, pump-power sweeps, and excess-noise comb
spectra.  Pure presentation: no numeric transformation beyond the dB
conversion the comb layout demands.
"""

__version__ = "0.1.0"

from .render import (
    FigureSpec,
    PanelLayout,
    SchemaError,
    load_table,
    render,
    to_db,
)
