//! Toolkit for screening random 3D arrangements of excitable sites for
//! coherent excitation-transport efficiency and for classifying the
//! efficient geometries into structural families.
//!
//! The pipeline works on `Structure`s: `n` sites in a unit cube with the
//! input site at one corner and the output site at the diagonally opposite
//! corner. [`dynamics`] evaluates single-excitation transport (efficiency,
//! site occupations, IPR), [`geometry`] measures symmetry-minimized
//! structural similarity, [`network`] and [`cluster`] build the similarity
//! network over efficient structures and split it with Markov clustering,
//! and [`analysis`] characterizes the resulting families (robustness under
//! random displacement, inactive-module detection and ablation, eigenvalue
//! shifts, spectral commensurability).

pub mod analysis;
pub mod cluster;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod network;
pub mod seed;
pub mod structure;

pub use analysis::{
    ablate, commensurability, detect_modules, robustness, spectrum_shift, AblationResult,
    CommensurabilityFit, ModulePartition, RobustnessOptions, RobustnessResult, SpectrumShift,
};
pub use cluster::{
    choose_granularity, cluster_report, consistency_between, consistency_scan, mcl,
    mcl_with_options, ClusterAssignment, ClusterRow, ConsistencyCurve, MclOptions,
};
pub use dynamics::{
    build_hamiltonian, default_window, efficiency, efficiency_with_window, eigendecompose,
    max_ipr, trajectory, transfer_probability, EigenSystem, Hamiltonian, OccupationTrajectory,
    TransportResult,
};
pub use error::{CoreError, Result};
pub use geometry::{
    apply_alignment, canonical_frame, displace, displace_with, generate_structure,
    optimal_rotation, similarity, superpose_cluster, AlignmentTransform, SimilarityResult,
};
pub use network::{
    build_network, pairwise_similarities, select_cutoff, EdgeCandidate, EfficiencyNetwork,
};
pub use seed::{derive_seed, stream_rng};
pub use structure::{Point, Structure, COINCIDENCE_FLOOR};
