"""Hybrid OTFS/OFDM massive MIMO downlink spectral-efficiency simulator.

Thin python layer over the C++ core (`otfsmimo._core`): structured matrix
builders, closed-form SE expressions and the full scenario runner.
"""

from ._core import (  # noqa: F401
    ConfigError,
    NumericalError,
    SingularGramError,
    csv_header,
    delay_shift_power,
    dft_matrix,
    doppler_diag_power,
    hermitian_solve,
    kron,
    logdet_hermitian,
    run_scenario,
    run_scenario_file,
    se_fzf_closed,
    se_pzf_high_approx,
    steering_vector,
    __version__,
)

__all__ = [
    "ConfigError",
    "NumericalError",
    "SingularGramError",
    "csv_header",
    "delay_shift_power",
    "dft_matrix",
    "doppler_diag_power",
    "hermitian_solve",
    "kron",
    "logdet_hermitian",
    "run_scenario",
    "run_scenario_file",
    "se_fzf_closed",
    "se_pzf_high_approx",
    "steering_vector",
    "__version__",
]
