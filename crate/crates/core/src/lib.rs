//! Quasi-static soliton statics for 1D nonlinear Klein-Gordon models.
//!
//! The crate computes deformed-kink configurations and static stresses:
//! exact internal-mode deformations of the quartic-double-well kink, and
//! kink-kink / kink-antikink interaction potentials via a gauge-fixed
//! nonlinear-diffusion relaxation plus a large-distance perturbative
//! expansion.
//!
//! Organization:
//! - [`model`]: field theories with analytic kink data (phi4, sine-Gordon)
//! - [`grid`]: uniform discretization, quadrature, fluctuation spectrum
//! - [`exact_phi4`]: closed-form deformed-kink family and its energy
//! - [`relaxation`]: implicit nonlinear-diffusion solver for soliton pairs
//! - [`asymptotic`]: large-distance distortion and interaction coefficients

pub mod asymptotic;
pub mod error;
pub mod exact_phi4;
pub mod grid;
pub mod model;
pub mod relaxation;

pub use asymptotic::{ABCoefficients, EtaProfile};
pub use error::{Error, Result};
pub use grid::{BoundaryCondition, FieldProfile, Grid1D, TridiagonalOperator};
pub use model::{FieldModel, KinkAsymptotics};
pub use relaxation::{EnergyRow, EnergyTable, PairKind, RelaxationConfig, Snapshot, Termination};
