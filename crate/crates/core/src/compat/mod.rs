//! Compatibility of strain fields: the flatness ODEs of Z-dependent
//! profiles, moving-frame residuals, and reconstruction of the deformation
//! from a flat strain by transporting its rotation.

pub mod ansatz;
pub mod frames;
pub mod ode;
pub mod reconstruct;
pub mod transport;

pub use ansatz::{
    Branch, BranchParams, CoframeZ, CubicSpline, MetricAnsatzZ, PolyParams, ProfileJet,
};
pub use frames::{frame_scalars, structural_residuals, FrameScalars};
pub use ode::{
    integrate_flat_ansatz, reduced_flatness, ricci_ode_residuals, solve_second_derivatives,
    BranchFit, FlatTrajectory, InitialData,
};
pub use reconstruct::{
    closed_form_defect, reconstruct_map, reconstruct_map_with, MapSample, ReconstructionOptions,
    ReconstructionResult,
};
pub use transport::{
    connection_omega, rodrigues_exp, transport_rotation, transport_rotation_traced, Omega,
    PathSpec, StretchFrame,
};
