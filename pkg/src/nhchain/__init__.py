"""Asymmetric-hopping chains with quasi-periodic disorder.

Construction of single-particle and fixed-N many-body Hamiltonians,
biorthogonal spectral decompositions, point-gap winding numbers,
non-unitary time evolution (exact and Krylov), entanglement entropy,
and a parameter-sweep engine with a CLI front end.
"""

from .model import (
    BASIS_SIZE_CAP,
    DENSE_DIM_CAP,
    THETA,
    FockBasis,
    HamiltonianMatrix,
    ModelParams,
    build_fock_basis,
    build_many_body,
    build_single_particle,
    potential,
)
from .spectral import (
    BiorthogonalizationError,
    SpectralDecomposition,
    StaticObservables,
    cdw_order,
    decompose,
    density_profile,
    fock_ipr,
    imag_fraction,
    ipr,
    ipr_per_state,
    static_observables,
)
from .winding import (
    SingularBaseEnergyError,
    WindingConfig,
    WindingIllDefinedError,
    WindingResult,
    WindingWarning,
    log_det_phase,
    winding_from_builder,
    winding_number,
    winding_result,
)
from .dynamics import (
    EvolverConfig,
    EvolverState,
    ObservableSeries,
    arnoldi_step,
    entanglement_entropy,
    evolve_exact,
    initial_domain_wall,
    initial_localized,
    run,
)
from .sweep import (
    ResultRecord,
    SweepSpec,
    inclusive_range,
    read_records_csv,
    read_records_json,
    run_sweep,
    run_sweep_to_file,
    write_records_csv,
    write_records_json,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
