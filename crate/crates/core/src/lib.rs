//! Minimal-energy damping of control systems with time-proportional delay on a star graph.
//!
//! The incoming edge carries `y' + b y + c y(t/q) = u` up to the branch time `T1`; each
//! outgoing edge continues with its own coefficients and reads its delayed history from the
//! incoming edge until the compressed argument passes the vertex. The crate provides
//!
//! * [`problem`]: problem instances, validation, delayed-argument routing, the lifting function;
//! * [`mesh`]: per-edge meshes, piecewise-linear graph functions, exact quadrature;
//! * [`forward`]: a trapezoidal forward solver and the pantograph series oracle;
//! * [`variational`]: the Galerkin energy minimiser;
//! * [`verify`]: vertex-condition, weak-form, round-trip and interval-reduction checks;
//! * [`io`] and [`cli`]: JSON/CSV formats and the command-line front end.

pub mod cli;
pub mod error;
pub mod forward;
pub mod io;
pub mod mesh;
pub mod problem;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use forward::{apply_ell, apply_ell_sided, pantograph_series, solve_cauchy, ControlProfile, EdgeControl, VolterraKernel};
pub use mesh::{integrate_pw, kink_points, GraphGridFunction, GraphMesh, Side};
pub use problem::{DelayTarget, EdgeSpec, StarProblem, ValidatedProblem};
pub use variational::{assemble, bilinear, energy, extract_control, solve_damping, DampingSolution, EnergyForm, SpaceW};
pub use verify::{convergence_study, verify_trajectory, ConvergenceRow, MatchedEdges, VerificationReport};
