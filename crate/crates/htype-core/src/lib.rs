//! Numerical toolkit for Heisenberg-type groups: exact structure
//! construction, sub-Riemannian calculus via hyperdual numbers, biradial
//! quadrature, closed-form extremal profiles, sharp-constant and Hardy
//! functionals, a Galerkin spectral solver for the linearized operator, and
//! a subcritical minimization scheme.

pub mod calculus;
pub mod closedform;
pub mod error;
pub mod functionals;
pub mod group;
pub mod jet;
pub mod linalg;
pub mod minimizer;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod structure;

pub use calculus::{horizontal_gradient, sublaplacian, Deriv2, ScalarField};
pub use closedform::{bubble, bubble_biradial, omega, BubbleParams};
pub use error::{Error, Result};
pub use group::GroupPoint;
pub use jet::Jet;
pub use quadrature::{make_rule, BiradialField, BiradialRule};
pub use report::CheckReport;
pub use structure::{construct_structure, j_map, radon_hurwitz, HTypeStructure};
