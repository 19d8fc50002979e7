"""Resonator-induced phase gate simulator for transmons sharing a bus cavity."""

from .config import fixture_path, load_device, load_pulse
from .device import (
    CavityParams,
    DeviceConfig,
    EffectiveModel,
    QubitParams,
    compute_couplings,
    effective_diagonal_hamiltonian,
    exact_dressed_energies,
    oracle_chi,
    oracle_zeta,
)
from .dynamics import (
    PhaseLedger,
    SectorTrajectory,
    dephasing_rate,
    photon_number,
    propagate,
    steady_state_rates,
)
from .errors import (
    ConfigError,
    DegenerateQubits,
    DispersiveRegimeViolation,
    DomainError,
    InvalidDensityMatrix,
    OutOfRange,
    ResonantDrive,
    RipSimError,
    StepTooLarge,
    TruncationTooSmall,
    Unreachable,
    UnsupportedTarget,
)
from .experiments import (
    dephasing_sweep,
    ghz_sequence,
    ramsey,
    threshold_scaling,
    tune_up_cz,
    zz_map,
)
from .metrics import RbSummary, coherence_limited_fidelity, f_g_from_alpha, state_fidelity
from .pulses import DriveSpec, PulseEnvelope, adiabatic_drive, idle, sample
from .sequences import (
    EchoSchedule,
    EchoStep,
    SequenceResult,
    build_schedule,
    cancellation_report,
    run_schedule,
)

__version__ = "0.1.0"
