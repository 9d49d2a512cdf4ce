"""Link-level simulator for CSIT-free downlink transmission in high-mobility
mmWave MU-MISO systems: CP-DFT unitary precoding, Doppler-aware Rician
channels, interference-cancelling combining with two-pilot joint CSIR and
Doppler estimation, and CSIT-based baselines under a Monte Carlo harness."""

from ._version import __version__
from .config import ConfigError, SweepSpec, SystemConfig, load_config, smoke_preset
from .channel import (
    ChannelRealization,
    UserGeometry,
    draw_noise,
    evolve_block,
    realize_channel,
    sample_geometry,
)
from .signal_core import (
    Codebooks,
    array_response,
    build_codebooks,
    build_cp_dft,
    build_precoder,
    circulant_index,
    dft_matrix,
    doppler_vector,
    subcarrier_wavenumbers,
)
from .transmitter import Frame, assemble_frame, precode_block
from .receiver import (
    EstimationResult,
    SinrBreakdown,
    combine,
    decompose_terms,
    detect_symbols,
    estimate_gain,
    estimate_sinr,
    estimate_user,
    select_aod,
    spectral_efficiency,
)
from .baselines import BaselineResult, baseline_sinr, mrt_precoder, zf_precoder
from .experiment import (
    MethodResult,
    SweepReport,
    TrialReport,
    Workspace,
    complexity_count,
    run_sweep,
    run_trial,
    write_report,
)

__all__ = [
    "__version__",
    "ConfigError",
    "SweepSpec",
    "SystemConfig",
    "load_config",
    "smoke_preset",
    "ChannelRealization",
    "UserGeometry",
    "draw_noise",
    "evolve_block",
    "realize_channel",
    "sample_geometry",
    "Codebooks",
    "array_response",
    "build_codebooks",
    "build_cp_dft",
    "build_precoder",
    "circulant_index",
    "dft_matrix",
    "doppler_vector",
    "subcarrier_wavenumbers",
    "Frame",
    "assemble_frame",
    "precode_block",
    "EstimationResult",
    "SinrBreakdown",
    "combine",
    "decompose_terms",
    "detect_symbols",
    "estimate_gain",
    "estimate_sinr",
    "estimate_user",
    "select_aod",
    "spectral_efficiency",
    "BaselineResult",
    "baseline_sinr",
    "mrt_precoder",
    "zf_precoder",
    "MethodResult",
    "SweepReport",
    "TrialReport",
    "Workspace",
    "complexity_count",
    "run_sweep",
    "run_trial",
    "write_report",
]
