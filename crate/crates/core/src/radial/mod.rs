//! Radial `Υ`-polynomial algebra and its integrals over `[0, ∞)`.
//!
//! Two independent routes: direct quadrature at a finite regularization
//! point, and closed-form asymptotics in `(a, ε)` built from the mollifier
//! moments. Fits of quadrature sweeps connect the two.

mod asymptotic;
mod expr;
mod quad;

pub use asymptotic::{
    default_sweep, fit_asymptotics, integrate_asymptotic, mn_fit_basis, mn_moment, mn_quadrature, AsymptoticSeries,
    DEFAULT_FIT_TOL, MAX_CONDITION,
};
pub use expr::{
    coulomb_field_radial, mn_integrand, ByParts, Monomial, RadialExpression, RadialTerm, MAX_UPSILON_POWER,
};
pub use quad::{integrate_quadrature, integrate_quadrature_with, RadialQuadOptions};
