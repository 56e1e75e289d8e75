//! Mass and spin renormalization: solving for the two lengths `(a, ε)`.
//!
//! With `U_ele = (e²/2) M[2,0]/ε`, `U_mag = (μ²/3) M[2,0]/(a²ε)` and
//! `|S| = (2eμ/3c) M[2,0]/ε`, the conditions `mc² = U_ele + U_mag`,
//! `|S| = sħ` and `μ = g s eħ/(2mc)` give
//!
//! * `U_ele = 3mc²/(2g)`, so `ε = (g/3) M[2,0] α ħ/(mc)`,
//! * `μ²/(e²a²) = g - 3/2`, so `a = g s ħ / (2mc √(g - 3/2))`.
//!
//! For `g = 2` this is `a = √2 s ħ/(mc)`, `ε = (2/3) M[2,0] α ħ/(mc)` and
//! `mc² = (4/3) U_ele`.

use serde::Serialize;

use crate::electrodynamics::{self_energy_electric, self_energy_magnetic, spin, PhysicalParams, ALPHA};
use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::scalar::Real;
use crate::upsilon::RegularizationPoint;

/// `ε/a` above which a solution is flagged.
pub const RATIO_WARN: f64 = 0.1;
/// Closed-form round-trip tolerance.
pub const ROUNDTRIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormInput<T> {
    /// Target rest energy `mc²`.
    pub m: T,
    /// Spin quantum number.
    pub s: T,
    pub g: T,
    pub hbar: T,
    pub c: T,
    pub alpha: T,
    pub m20: T,
}

impl<T: Real> RenormInput<T> {
    /// `ħ = c = 1`, `α = 1/137.035999`; `m` is then also `1/(ħ/mc)`.
    pub fn natural(m: T, s: T, g: T, m20: T) -> Self {
        Self { m, s, g, hbar: T::one(), c: T::one(), alpha: T::of(ALPHA), m20 }
    }

    /// `e = √(α ħ c)`.
    pub fn charge(&self) -> T {
        (self.alpha * self.hbar * self.c).sqrt()
    }

    /// `ħ/(mc)` with `m` given as an energy.
    pub fn compton(&self) -> T {
        self.hbar * self.c / self.m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RenormSolution<T> {
    pub input: RenormInput<T>,
    pub a: T,
    pub epsilon: T,
    /// Magnitude of the moment, aligned with the spin axis.
    pub mu: T,
    pub u_ele: T,
    pub u_mag: T,
    pub ratio: T,
    /// `ε/a > 0.1`.
    pub warn: bool,
}

/// Feasibility of `g`: returns `μ²/(e²a²) = g - 3/2`.
pub fn g_constraint<T: Real>(g: T) -> Result<T> {
    if g <= T::zero() || !g.is_finite() {
        return Err(Error::InvalidParameter(format!("g must be positive, got {g}")));
    }
    let k = g - T::of(1.5);
    if k < T::zero() {
        return Err(Error::InfeasibleG(g.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(k)
}

pub fn renormalize<T: Real>(input: &RenormInput<T>) -> Result<RenormSolution<T>> {
    let positive = |x: T, name: &str| {
        if x > T::zero() && x.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
        }
    };
    positive(input.m, "m")?;
    positive(input.s, "s")?;
    positive(input.hbar, "hbar")?;
    positive(input.c, "c")?;
    positive(input.alpha, "alpha")?;
    positive(input.m20, "M[2,0]")?;
    let k = g_constraint(input.g)?;
    if k == T::zero() {
        return Err(Error::InvalidParameter("g = 3/2 forces mu = 0, which cannot carry spin s > 0".into()));
    }
    let e = input.charge();
    let three = T::of(3.0);
    let u_ele = three * input.m / (T::of(2.0) * input.g);
    let epsilon = e * e * input.m20 / (T::of(2.0) * u_ele);
    let mu = input.g * input.s * e * input.compton() / T::of(2.0);
    let a = mu / (e * k.sqrt());
    let u_mag = mu * mu * input.m20 / (three * a * a * epsilon);
    let ratio = epsilon / a;
    Ok(RenormSolution { input: *input, a, epsilon, mu, u_ele, u_mag, ratio, warn: ratio > T::of(RATIO_WARN) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripCheck {
    pub quantity: String,
    pub target: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub closed_dev: f64,
    pub quadrature_dev: f64,
    pub closed_tol: f64,
    pub quadrature_tol: f64,
}

impl RoundTripCheck {
    pub fn passed(&self) -> bool {
        self.closed_dev <= self.closed_tol && self.quadrature_dev <= self.quadrature_tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundTripReport {
    pub checks: Vec<RoundTripCheck>,
}

/// Re-evaluates `mc²` and `|S|` from the field integrals at the solved
/// `(ε, a)`: closed forms to `1e-10`, quadrature to `3(ε/a + a)` with `a`
/// measured in units of `ħ/mc`.
pub fn roundtrip_check<T: Real>(sol: &RenormSolution<T>, m: &Mollifier<T>) -> Result<RoundTripReport> {
    let input = &sol.input;
    let p = PhysicalParams::gaussian(input.charge(), [T::zero(), T::zero(), sol.mu], input.c)?;
    let rp = RegularizationPoint::physical(sol.epsilon, sol.a)?;
    let ele = self_energy_electric(&p, m, &rp)?;
    let mag = self_energy_magnetic(&p, m, &rp)?;
    let s = spin(&p, m, &rp)?;
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let quad_tol = 3.0 * (f(sol.ratio) + f(sol.a / input.compton()));
    let check = |quantity: &str, target: T, closed: T, quad: T| {
        let rel = |x: T| f(((x - target) / target).abs());
        RoundTripCheck {
            quantity: quantity.into(),
            target: f(target),
            closed_form: f(closed),
            quadrature: f(quad),
            closed_dev: rel(closed),
            quadrature_dev: rel(quad),
            closed_tol: ROUNDTRIP_TOL,
            quadrature_tol: quad_tol,
        }
    };
    let checks = vec![
        check("mc^2", input.m, ele.closed_form + mag.closed_form, ele.quadrature + mag.quadrature),
        check("|S|", input.s * input.hbar, s.closed_form[2].abs(), s.quadrature[2].abs()),
    ];
    for c in &checks {
        if c.closed_dev > c.closed_tol {
            return Err(Error::RoundTripFailure {
                quantity: c.quantity.clone(),
                deviation: c.closed_dev,
                tolerance: c.closed_tol,
            });
        }
        if c.quadrature_dev > c.quadrature_tol {
            return Err(Error::RoundTripFailure {
                quantity: format!("{} (quadrature)", c.quantity),
                deviation: c.quadrature_dev,
                tolerance: c.quadrature_tol,
            });
        }
    }
    Ok(RoundTripReport { checks })
}
