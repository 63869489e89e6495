"""Simulation and analysis toolkit for the above-threshold optical parametric
oscillator: three-field quadrature noise spectra from a linearized Gaussian
model, the self-homodyne measurement chain (analysis-cavity rotation, lossy
detection, demodulated records, block variances), and bipartite/tripartite
entanglement witnesses with optimized correction terms."""

__version__ = "0.1.0"

from .cavity import (
    AnalysisCavity,
    RotationCoefficients,
    default_cavities,
    reflect_covariance,
    reflection_coefficient,
    rotation_coefficients,
    synchronous_scan,
)
from .config import (
    ConfigError,
    RunMode,
    ScanConfig,
    SourceKind,
    SweepKind,
    config_hash,
    default_config,
    load_config,
    parse_config_text,
)
from .detection import (
    DetectionParams,
    PhotocurrentRecord,
    VarianceEstimate,
    apply_efficiency,
    block_covariances,
    block_variances,
    sql_normalize,
    synthesize_record,
)
from .gaussian import (
    BASIS,
    IncompleteCovarianceError,
    InconsistentTermsError,
    ModeId,
    PhysicalityError,
    QuadratureAxis,
    QuadratureCombination,
    SpectralCovariance,
    combination_variance,
    covariance_between,
    extract_terms,
    reconstruct_from_measurements,
    validate_physicality,
)
from .opo import (
    ExcessNoiseSpectrum,
    OpoParams,
    SteadyState,
    comb_spectrum,
    output_spectra,
    output_spectra_with_excess,
    steady_state,
)
from .runner import (
    ScanTable,
    run,
    run_comb_spectrum,
    run_detuning_scan,
    run_sigma_sweep,
    run_witness_point,
)
from .witness import (
    WitnessCoefficients,
    WitnessReport,
    beta_terms,
    bipartite_duan,
    optimal_alpha,
    tripartite_witnesses,
)
