from .budget import (
    ScalingRow,
    analytic_infidelity,
    breit_rabi_transition,
    delta_qss,
    heating_dephasing_infidelity,
    heating_dephasing_rate,
    ion_separation,
    jc_collapse_time,
    lamb_dicke,
    scaling_report,
    stark_shift_rabi,
    two_ion_splitting,
)
from .config import (
    DriveConfig,
    FlatEnvelope,
    GatePlan,
    GaussianRamp,
    QubitDrive,
    RobustnessOffsets,
    TrapConfig,
)
from .hamiltonians import (
    TimeDependentHamiltonian,
    build_double_dressed_hamiltonian,
    build_dressed_hamiltonian,
    build_ms_hamiltonian,
    build_rwa_hamiltonian,
    double_dressed_hamiltonian,
    dressed_frame_unitary,
    dressed_hamiltonian,
    ms_hamiltonian,
    rwa_hamiltonian,
)
from .planning import Condition, effective_coupling, flip_flop_resonance, gate_plan, validity_check
