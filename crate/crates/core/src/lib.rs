//! Colombeau-style regularization toolkit for the classical extended electron.
//!
//! The point charge is smeared by a compact-moment mollifier `η`, and every
//! singular field quantity becomes a smooth function of the radial smoothing
//! profile `Υ`. The crate covers the mollifier itself, the `Υ` family and its
//! association with distributions, the radial `Υ`-polynomial integral
//! algebra, the angular dipole algebra, the regularized field derivation and
//! the mass/spin renormalization.

pub mod angular;
pub mod electrodynamics;
pub mod error;
pub mod mollifier;
pub mod quadrature;
pub mod radial;
pub mod renorm;
pub mod scalar;
pub mod upsilon;

pub use error::{Error, Result};
pub use scalar::{Coefficient, Real};

pub type Mollifier64 = mollifier::Mollifier<f64>;
pub type MollifierF32 = mollifier::Mollifier<f32>;
pub type RegularizationPoint64 = upsilon::RegularizationPoint<f64>;
pub type ExactRadial = radial::RadialExpression<num_rational::Rational64>;
pub type Radial64 = radial::RadialExpression<f64>;
pub type ExactAngularVector = angular::AngularVector<num_rational::Rational64>;
pub type ExactFields = electrodynamics::FieldBundle<num_rational::Rational64>;
pub type Fields64 = electrodynamics::FieldBundle<f64>;
pub type PhysicalParams64 = electrodynamics::PhysicalParams<f64>;
