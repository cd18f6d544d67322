//! Simulation of a charged quantum wavepacket threading an idealized
//! undulator: a piecewise-constant magnetic field alternating with field-free
//! gaps.
//!
//! The library propagates coherent-state parameters and statistical moments
//! region by region with closed forms, stitches them across boundaries, and
//! carries three independent verification routes: uncertainty functionals,
//! a classical-flow integrator, and direct wavefunction evaluation on a grid.

pub mod error;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod propagators;
pub mod stitching;
pub mod uncertainty;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use model::{
    epsilon_drift, epsilon_magnet, wronskian, CoherentStateParams, DurationRule,
    EpsilonDescriptor, FieldSign, LatticePlan, Means, MomentState, PhysicalParams, RegionKind,
    RegionSpec, SecondMoments, DEFAULT_OVERFLOW_BOUND,
};
pub use propagators::{
    magnet_orbit, mean_drift, mean_magnet, moments_drift, moments_magnet, sample_moment_state,
    OrbitCircle, RegionState,
};
pub use stitching::{
    build_and_propagate, fix_c1, magnet_exit_time, stitch_drift_to_magnet, stitch_magnet_to_drift,
    stitch_means_to_drift, verify_compatibility, BoundaryKind, InterfaceRecord, PropagationConfig,
    PropagationRun, Sample, StitchSolution,
};
pub use uncertainty::{classify_minimization, heisenberg_product, schrodinger_functional, Axis};
