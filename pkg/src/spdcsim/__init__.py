"""Transverse spatial correlations and EPR certification for Type-I SPDC.

The pipeline, bottom to top:

- :mod:`spdcsim.dispersion` — Sellmeier indices, phase matching, walk-off
- :mod:`spdcsim.biphoton` — phase mismatch and the two-photon angular amplitude
- :mod:`spdcsim.spectral` — filters, spectral sampling, far/near-field JIDs
- :mod:`spdcsim.stats` — moments, conditional inference, EPR width products
- :mod:`spdcsim.camera` — chromatic camera mapping and its compensation
- :mod:`spdcsim.sweep` — parameter studies over bandwidth/length/waist
- :mod:`spdcsim.config` / :mod:`spdcsim.cli` — YAML configs and the CLI
"""

from spdcsim.biphoton import (
    EvanescentInputError,
    GridMemoryError,
    PumpSpec,
    TransverseSlice,
    amplitude,
    evaluate_grid,
    mismatch,
    pump_envelope,
    sinc_efficiency,
)
from spdcsim.camera import (
    CameraJPD,
    CameraSlice,
    camera_slices,
    corrected_jpd,
    map_to_camera,
    rescale_idler,
    slope_report,
    uncorrected_jpd,
    walkoff_correct,
)
from spdcsim.config import ConfigError, RunConfig, load_config, parse_config
from spdcsim.dispersion import (
    CrystalSetup,
    PhaseMatchingError,
    SellmeierSet,
    SpdcWavelengths,
    WavelengthRangeError,
    effective_index,
    idler_wavelength,
    phase_matching_angle,
    walkoff_angle,
)
from spdcsim.spectral import (
    FilterSpec,
    JointDistribution,
    far_field_jid,
    near_field_jid,
    sample_spectrum,
    transmission,
)
from spdcsim.stats import (
    DegenerateDistributionError,
    ProbabilityTable,
    ReidReport,
    StatsSummary,
    moments,
    normalize,
    reid_inference,
    reid_product,
    ridge_slope,
)
from spdcsim.sweep import SweepRow, SweepSpec, run_sweep, rows_to_csv, trend_checks

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # dispersion
    "CrystalSetup",
    "PhaseMatchingError",
    "SellmeierSet",
    "SpdcWavelengths",
    "WavelengthRangeError",
    "effective_index",
    "idler_wavelength",
    "phase_matching_angle",
    "walkoff_angle",
    # biphoton
    "EvanescentInputError",
    "GridMemoryError",
    "PumpSpec",
    "TransverseSlice",
    "amplitude",
    "evaluate_grid",
    "mismatch",
    "pump_envelope",
    "sinc_efficiency",
    # spectral
    "FilterSpec",
    "JointDistribution",
    "far_field_jid",
    "near_field_jid",
    "sample_spectrum",
    "transmission",
    # stats
    "DegenerateDistributionError",
    "ProbabilityTable",
    "ReidReport",
    "StatsSummary",
    "moments",
    "normalize",
    "reid_inference",
    "reid_product",
    "ridge_slope",
    # camera
    "CameraJPD",
    "CameraSlice",
    "camera_slices",
    "corrected_jpd",
    "map_to_camera",
    "rescale_idler",
    "slope_report",
    "uncorrected_jpd",
    "walkoff_correct",
    # sweep
    "SweepRow",
    "SweepSpec",
    "run_sweep",
    "rows_to_csv",
    "trend_checks",
    # config
    "ConfigError",
    "RunConfig",
    "load_config",
    "parse_config",
]
