//! Trajectory optimization for powered planetary descent.
//!
//! The library solves the soft-landing optimal control problem under
//! throttle, thrust-pointing and glide-slope constraints, in vacuum or under
//! a constant-pressure atmosphere, and certifies that computed solutions
//! exhibit the Max-Min-Max throttle structure and the contact-count bounds
//! that extremal theory predicts for this problem family.
//!
//! Two solvers are provided: an indirect single-shooting method on the
//! first-order optimality system, for scenarios whose optimal path never
//! rides the glide-slope constraint, and a direct trapezoidal transcription
//! with an augmented-Lagrangian optimizer that handles active state
//! constraints. The `analyze` module classifies bang arcs, detects contacts
//! with the glide-slope boundary and renders pass/fail verdicts for the
//! structural properties.

pub mod analyze;
pub mod cli;
pub mod direct;
pub mod indirect;
pub mod integrate;
pub mod model;
pub mod nlp;
pub mod pmp;
pub mod presets;
pub mod scenario;

pub use integrate::{propagate, rk4_step, Trajectory};
pub use model::{
    eval_dynamics, glide_slope, in_pointing_cone, ConstraintSet, Control, CostKind, DynamicsModel,
    Scenario, State, VehicleParams,
};
pub use pmp::{
    adjoint_rhs, control_law, direction_law, hamiltonian, qr_dot_d, switching_function, ArcKind,
    Costate, DirectionBranch, DirectionResult,
};
