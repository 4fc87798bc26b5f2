"""Simulation and analysis toolkit for two-tone protected Rabi oscillations.

A driven spin qubit detuned by +Delta from its Larmor frequency performs
Rabi precession at F_R = sqrt(Delta^2 + h_d^2).  Adding a weak second tone
(the mixer "image") at the mirrored frequency f0 - Delta makes the
rotating-frame Hamiltonian time-periodic; when F_R = n*Delta the image
opens an avoided crossing between quasi-energy levels and locks the Rabi
precession to the external 2*Delta clock, protecting the oscillation
against inhomogeneous dephasing.

The package covers the full chain: spin-operator algebra and crystal-field
Hamiltonians for the supported materials (`spinops`, `hamiltonians`), the
two-tone drive model including mixer-imbalance algebra (`drive`),
quasi-energy spectra (`floquet`), open-system time evolution (`dynamics`),
pulse-sequence simulation with ensemble averaging (`sequences`), spectral
and fitting utilities (`analysis`), and a deterministic CLI (`cli`).

Units convention, used everywhere: energies/frequencies in MHz (units of
h), times in microseconds, magnetic fields in mT, angles in radians.
Propagators are exp(-i 2*pi H t).  Spin expectation values are in spin-1/2
units, i.e. bounded by [-1/2, +1/2].
"""

__version__ = "0.1.0"

from .spinops import SpinOperators, spin_matrices, stevens_operator, hermitian_eig, matrix_exp_unitary
from .hamiltonians import (
    SpinSystem,
    EffectiveTLS,
    ForbiddenTransitionError,
    MATERIAL_INFO,
    material,
    material_names,
    build_hamiltonian,
    resonance_fields,
    reduce_to_tls,
)
from .drive import MixerInput, DriveConfig, mixer_tones, lab_hamiltonian, rotating_hamiltonian, rotating_field
from .floquet import (
    FloquetSpec,
    FloquetSpectrum,
    rabi_frequency,
    resonant_drive,
    shirley_floquet_matrix,
    quasi_energies,
    crossing_block_splitting,
    perturbative_splitting,
)
from .dynamics import (
    DensityState,
    Environment,
    IntegrationError,
    TimeSeries,
    propagate_unitary,
    default_time_grid,
    evolve_lindblad,
    evolve_bloch,
    torque_trace,
)
from .sequences import (
    Prepare,
    Burst,
    Wait,
    HardPulse,
    AcquireEcho,
    AcquireFID,
    EnsembleSpec,
    SequenceResult,
    SequenceError,
    EchoTrain,
    PHASE_FOR_AXIS,
    run_sequence,
    protected_drive,
    hahn_echo_decay,
    cpmg,
    inversion_recovery,
)
from .analysis import Spectrum, SweepGrid, FitFailure, fft_spectrum, fit_exp_decay, measure_splitting, sweep

__all__ = [
    "SpinOperators", "spin_matrices", "stevens_operator", "hermitian_eig", "matrix_exp_unitary",
    "SpinSystem", "EffectiveTLS", "ForbiddenTransitionError", "MATERIAL_INFO",
    "material", "material_names", "build_hamiltonian", "resonance_fields", "reduce_to_tls",
    "MixerInput", "DriveConfig", "mixer_tones", "lab_hamiltonian", "rotating_hamiltonian", "rotating_field",
    "FloquetSpec", "FloquetSpectrum", "rabi_frequency", "resonant_drive",
    "shirley_floquet_matrix", "quasi_energies", "crossing_block_splitting", "perturbative_splitting",
    "DensityState", "Environment", "IntegrationError", "TimeSeries",
    "propagate_unitary", "default_time_grid", "evolve_lindblad", "evolve_bloch", "torque_trace",
    "Prepare", "Burst", "Wait", "HardPulse", "AcquireEcho", "AcquireFID",
    "EnsembleSpec", "SequenceResult", "SequenceError", "EchoTrain", "PHASE_FOR_AXIS",
    "run_sequence", "protected_drive", "hahn_echo_decay", "cpmg", "inversion_recovery",
    "Spectrum", "SweepGrid", "FitFailure", "fft_spectrum", "fit_exp_decay", "measure_splitting", "sweep",
    "__version__",
]
