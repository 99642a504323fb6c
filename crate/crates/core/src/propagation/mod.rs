//! Time evolution: closed non-Hermitian propagation, Lindblad dynamics,
//! Kraus steps, quantum-jump trajectories and the no-jump pseudo state.

pub mod closed;
pub mod lindblad;
mod model;
pub mod trajectory;

pub use closed::{
    evolve_between, evolve_density_nonhermitian, evolve_nonhermitian, evolve_on_grid, propagator,
    time_ordered_propagator, TimeOrdered,
};
pub use lindblad::{
    delta_p_heff, evolve_lindblad, jump_count_moments, kraus_operators, kraus_step, no_jump_overlap,
    no_jump_propagator, pseudo_density, JumpCountMoments, PseudoDensity,
};
pub use model::{GeneratorFn, LindbladModel, NonHermitianModel, DEFAULT_STEPS_PER_UNIT_TIME};
pub use trajectory::{
    sample_ensemble, sample_trajectories, sample_trajectory, summarize_ensemble, trajectory_rng, EnsembleSummary,
    JumpEvent, Trajectory, TrajectorySettings,
};
