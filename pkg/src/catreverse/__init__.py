"""catreverse: time reversal of chaotic diffusion, quantum versus classical.

A dense state-vector simulator runs the generalized Arnold cat map as a
reversible NOT/CNOT/TOFFOLI circuit on three registers, with optional
random-rotation gate noise.  A classical ensemble integrator runs the same
map in double precision with an imprecise velocity inversion.  Analysis
utilities fit the diffusion law, fidelity decay and the scaling collapse.
"""

__version__ = "0.1.0"

from .analysis import (
    DIFFUSION_COEFFICIENT,
    CollapseFit,
    FidelitySeries,
    FitError,
    MomentSeries,
    YDistribution,
    distribution_distance,
    escape_time,
    fidelity_timescale,
    fit_collapse_constant,
    fit_diffusion,
    fokker_planck_gaussian,
    second_moment,
)
from .circuits import (
    Circuit,
    ConstructionError,
    GateCountReport,
    IterationLog,
    build_adder,
    build_inversion_circuit,
    build_map_circuit,
    gate_count_report,
    resource_estimate,
    run_iterations,
    simulate_basis,
)
from .images import (
    BinaryImage,
    DensityImage,
    ParseError,
    density_to_image,
    generate_demon_image,
    image_to_points,
    load_portable_bitmap,
    points_to_image,
    recovery_overlap,
    save_portable_bitmap,
    save_portable_graymap,
)
from .lattice import (
    KS_ENTROPY,
    ContinuousPoint,
    Ensemble,
    InversionImprecision,
    LatticePoint,
    PhaseSpaceConfig,
    ensemble_histogram,
    evolve_ensemble,
    invert_ensemble_velocities,
    invert_velocity_continuous,
    invert_velocity_lattice,
    lyapunov_exponent,
    map_forward_continuous,
    map_forward_lattice,
    map_inverse_lattice,
    pixel_ensemble,
    uniform_cell_ensemble,
    wrap,
)
from .statevector import (
    Gate,
    NoiseModel,
    QuantumState,
    RegisterLayout,
    apply_circuit,
    apply_gate,
    apply_gate_noisy,
    fidelity,
    marginal_xy,
    marginal_y,
    prepare_uniform_superposition,
    sample_measurements,
)
