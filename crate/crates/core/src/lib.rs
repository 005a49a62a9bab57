//! Bipartite entanglement left behind when a two-level atom decays into
//! the free-space field: between frequency bands of the emitted photon, and
//! between the atom and the field while the decay is under way.
//!
//! The crate is split along the lines of how the numbers are obtained:
//!
//! * [`model`]: continuum closed forms (partition eigenvalues, entropies,
//!   vacuum fidelity, decay dynamics).
//! * [`oracle`]: a brute-force finite-mode realization of the emitted
//!   one-photon state with exact partial traces and dense eigenspectra.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration of the
//!   Lorentzian-weighted integrals behind the closed forms.
//! * [`sweep`] and [`output`]: parameter sweeps over band, detuning and time, and
//!   their CSV/JSON serialization; [`cli`] wires them to the `wwent` binary.
//!
//! All partition and time quantities are dimensionless: band half-width
//! `eps_tilde = eps / gamma`, detuning `delta_tilde = (nu_q - omega) / gamma`
//! and scaled time `gamma * t`.

pub mod cli;
pub mod error;
pub mod model;
pub mod oracle;
pub mod output;
pub mod parallel;
pub mod quadrature;
pub mod summation;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    atom_field_entanglement, atom_population, binary_entropy, critical_epsilon,
    decay_rate_from_dipole, distillable_bound, field_state_entropy, partition_entanglement,
    partition_weights, vacuum_fidelity, DecaySnapshot, DipoleParams, PartitionSpec,
    SpectralWeights,
};
pub use oracle::{
    assign_partition, atom_reduced_populations, build_mode_grid, eigenvalues_hermitian,
    joint_state_at, reduced_density_matrix, reduced_weights, DiscreteModeGrid, GridSpacing,
    JointStateCoefficients, PartitionLabels,
};
pub use parallel::Execution;
pub use quadrature::{cubic_weight_band_error, lorentzian_band_integral, rho_bb_integral, IntegralResult};
pub use sweep::{AxisRange, SweepResult, Sweeper};
