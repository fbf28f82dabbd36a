"""Acoustic mode analysis: wave operators, amplitudes, Duhamel integration and damping fits."""

from src.acoustics.duhamel import direct_mode_integration, duhamel_solve
from src.acoustics.modes import AcousticTrace, ModeSampler, QSplit, acoustic_forcing, mode_amplitudes, q_split
from src.acoustics.oscillation import gradient_pair_residual, oscillation_integral
from src.acoustics.rates import DampingEntry, DampingReport, fit_damping_rate, measure_damping
from src.acoustics.wave import WaveRun, WaveState, apply_wave_operator, linearized_wave_run, wave_state_from

__all__ = [
    "AcousticTrace",
    "DampingEntry",
    "DampingReport",
    "ModeSampler",
    "QSplit",
    "WaveRun",
    "WaveState",
    "acoustic_forcing",
    "apply_wave_operator",
    "direct_mode_integration",
    "duhamel_solve",
    "fit_damping_rate",
    "gradient_pair_residual",
    "linearized_wave_run",
    "measure_damping",
    "mode_amplitudes",
    "oscillation_integral",
    "q_split",
    "wave_state_from",
]
