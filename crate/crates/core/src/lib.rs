//! Numerical toolkit for the fractional Laplacian and related nonlocal
//! objects: the carré du champ, regularized difference quotients, weighted
//! norms and Gagliardo seminorms, and the fractional Poisson kernel of a ball.

pub mod cutoff;
pub mod error;
pub mod field;
pub mod norms;
pub mod ops;
pub mod params;
pub mod poisson;
pub mod presets;
pub mod quad;
pub mod special;

pub use cutoff::{make_cutoff, CutoffField, RadialCutoff};
pub use error::{Error, Result, Zone};
pub use field::{Decay, Envelope, Hyperplane, ScalarField, Smoothness};
pub use params::{holder_transfer_exponents, normalization_constant, FracParams, HolderExponents};
pub use poisson::{solve_dirichlet, BallProblem};
pub use presets::preset_field;
pub use quad::{AngularRule, QuadratureSpec};
pub use special::gamma_fn;
