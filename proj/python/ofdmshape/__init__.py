"""Hermitian-pulse OFDM spectral shaping."""

from ._core import (
    Error,
    Infeasible,
    InvalidConfig,
    baseline_waveform,
    builtin_scenario_text,
    cyclic_shift,
    execute,
    pulse,
    pulse_spectrum,
    run_scenario,
    solve_aic,
    symbolic_count,
    validate,
)

__all__ = [
    "Error",
    "Infeasible",
    "InvalidConfig",
    "baseline_waveform",
    "builtin_scenario_text",
    "cyclic_shift",
    "execute",
    "pulse",
    "pulse_spectrum",
    "run_scenario",
    "solve_aic",
    "symbolic_count",
    "validate",
]
