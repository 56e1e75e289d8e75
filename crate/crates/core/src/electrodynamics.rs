//! Fields of the regularized electron (charge `e` plus magnetic dipole `μ`)
//! and their self-interaction integrals.
//!
//! Every field is a sum of `angular monomial × radial expression`, with the
//! angular part in the `{u, μ, μ×u}` basis of [`crate::angular`]. Gradient,
//! divergence and curl act on that factored form:
//!
//! * `∇(f g(x)) = f' g u + (f/r) g' (μ - x u)`
//! * `∇·(f W) = f' (u·W) + (f/r) (2A + B' (m2 - x²))`
//! * `∇×(f W) = f' (u×W) + (f/r) ((A' + x B') n + C' (x² - m2) u + C (μ + x u))`
//!
//! for `W = A u + B μ + C n`, `n = μ×u`, and `'` the derivative in `x = u·μ`.
//! Volume integrals split into the exact sphere table times a radial
//! integral, either closed-form asymptotic or by quadrature.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_rational::Rational64;
use serde::Serialize;

use crate::angular::{
    cross3, dot3, sphere_integrate_exact, sphere_integrate_quadrature, AngularExpression, AngularValue, AngularVector,
    Poly, SphereIntegral, SphereRule,
};
use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::radial::{integrate_asymptotic, integrate_quadrature, AsymptoticSeries, RadialExpression};
use crate::scalar::{Coefficient, Real};
use crate::upsilon::RegularizationPoint;

/// Fine-structure constant used by the natural unit mode.
pub const ALPHA: f64 = 1.0 / 137.035999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    Gaussian,
    /// `c = ħ = 1`, `e = √α`.
    Natural,
}

impl UnitMode {
    pub fn name(&self) -> &'static str {
        match self {
            UnitMode::Gaussian => "gaussian",
            UnitMode::Natural => "natural",
        }
    }
}

/// Charge, magnetic moment vector and speed of light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams<T> {
    pub e: T,
    pub mu: [T; 3],
    pub c: T,
    pub unit_mode: UnitMode,
}

impl<T: Real> PhysicalParams<T> {
    pub fn gaussian(e: T, mu: [T; 3], c: T) -> Result<Self> {
        Self::validate(Self { e, mu, c, unit_mode: UnitMode::Gaussian })
    }

    pub fn natural(mu: [T; 3]) -> Result<Self> {
        Self::validate(Self { e: T::of(ALPHA).sqrt(), mu, c: T::one(), unit_mode: UnitMode::Natural })
    }

    fn validate(p: Self) -> Result<Self> {
        if p.e == T::zero() || !p.e.is_finite() {
            return Err(Error::InvalidParameter(format!("charge must be nonzero and finite, got {}", p.e)));
        }
        if p.c <= T::zero() || !p.c.is_finite() {
            return Err(Error::InvalidParameter(format!("speed of light must be positive, got {}", p.c)));
        }
        if p.mu.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("magnetic moment must be finite".into()));
        }
        Ok(p)
    }

    pub fn mu_squared(&self) -> T {
        dot3(self.mu, self.mu)
    }

    /// Same parameters with `μ → -μ`.
    pub fn flipped(&self) -> Self {
        Self { mu: self.mu.map(|x| -x), ..*self }
    }
}

/// Slot of a vector monomial in the `{u, μ, μ×u}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Component {
    U,
    Mu,
    MuCrossU,
}

fn angular_unit<C: Coefficient>(comp: Component, i: u32, k: u32) -> AngularVector<C> {
    let g = Poly::monomial(C::one(), i, k);
    match comp {
        Component::U => AngularVector::new(g, Poly::zero(), Poly::zero()),
        Component::Mu => AngularVector::new(Poly::zero(), g, Poly::zero()),
        Component::MuCrossU => AngularVector::new(Poly::zero(), Poly::zero(), g),
    }
}

fn merge<K: Ord, C: Coefficient>(map: &mut BTreeMap<K, RadialExpression<C>>, key: K, r: RadialExpression<C>) {
    if r.is_zero() {
        return;
    }
    let sum = match map.remove(&key) {
        Some(prev) => prev + r,
        None => r,
    };
    if !sum.is_zero() {
        map.insert(key, sum);
    }
}

/// `Σ x^i m2^k R_{ik}(r)`, keyed by `(i, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<C> {
    terms: BTreeMap<(u32, u32), RadialExpression<C>>,
}

impl<C: Coefficient> ScalarField<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn new(angular: &Poly<C>, radial: &RadialExpression<C>) -> Self {
        let mut out = Self::zero();
        for (&key, c) in angular.terms() {
            merge(&mut out.terms, key, radial.scale(c));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &RadialExpression<C>)> {
        self.terms.iter()
    }

    /// Radial factor of `x^i m2^k`.
    pub fn radial(&self, i: u32, k: u32) -> RadialExpression<C> {
        self.terms.get(&(i, k)).cloned().unwrap_or_else(RadialExpression::zero)
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (&key, r) in &self.terms {
            merge(&mut out.terms, key, r.scale(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(i1, k1), r1) in &self.terms {
            for (&(i2, k2), r2) in &other.terms {
                merge(&mut out.terms, (i1 + i2, k1 + k2), r1.try_mul(r2)?);
            }
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Result<VectorField<C>> {
        let mut out = VectorField::zero();
        for (&(i, k), f) in &self.terms {
            let g = Poly::monomial(C::one(), i, k);
            let along = AngularVector::new(g.clone(), Poly::zero(), Poly::zero());
            out = out + VectorField::new(&along, &f.differentiate()?);
            if i > 0 {
                let gp = g.dx();
                let tangent = AngularVector::new(-(gp.mul(&Poly::x())), gp, Poly::zero());
                out = out + VectorField::new(&tangent, &f.shift_power(-1));
            }
        }
        Ok(out)
    }

    pub fn to_real<T: Real>(&self) -> ScalarField<T> {
        let mut out = ScalarField::zero();
        for (&key, r) in &self.terms {
            merge(&mut out.terms, key, r.to_real());
        }
        out
    }

    pub fn u_degree(&self) -> u32 {
        self.terms.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }
}

impl<C: Coefficient> Add for ScalarField<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (key, r) in rhs.terms {
            merge(&mut self.terms, key, r);
        }
        self
    }
}

impl<C: Coefficient> Neg for ScalarField<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|(k, r)| (k, -r)).collect() }
    }
}

impl<C: Coefficient> Sub for ScalarField<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// `Σ x^i m2^k R(r) e_c` with `e_c ∈ {u, μ, μ×u}`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<C> {
    terms: BTreeMap<(Component, u32, u32), RadialExpression<C>>,
}

impl<C: Coefficient> VectorField<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn new(angular: &AngularVector<C>, radial: &RadialExpression<C>) -> Self {
        let mut out = Self::zero();
        for (comp, poly) in
            [(Component::U, &angular.u), (Component::Mu, &angular.mu), (Component::MuCrossU, &angular.mu_cross_u)]
        {
            for (&(i, k), c) in poly.terms() {
                merge(&mut out.terms, (comp, i, k), radial.scale(c));
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Radial factor of `x^i m2^k e_c`.
    pub fn radial(&self, comp: Component, i: u32, k: u32) -> RadialExpression<C> {
        self.terms.get(&(comp, i, k)).cloned().unwrap_or_else(RadialExpression::zero)
    }

    /// One `(angular monomial, radial term)` pair per radial term.
    pub fn pairs(&self) -> Vec<(AngularVector<C>, RadialExpression<C>)> {
        let mut out = Vec::new();
        for (&(comp, i, k), r) in &self.terms {
            for t in r.terms() {
                out.push((angular_unit(comp, i, k), RadialExpression::from_terms(vec![t.clone()])));
            }
        }
        out
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero();
        for (&key, r) in &self.terms {
            merge(&mut out.terms, key, r.scale(c));
        }
        out
    }

    /// Multiplies every radial factor by `r^k`.
    pub fn shift_power(&self, k: i32) -> Self {
        Self { terms: self.terms.iter().map(|(&key, r)| (key, r.shift_power(k))).collect() }
    }

    pub fn dot(&self, other: &Self) -> Result<ScalarField<C>> {
        let mut out = ScalarField::zero();
        for (&(c1, i1, k1), r1) in &self.terms {
            for (&(c2, i2, k2), r2) in &other.terms {
                let ang = angular_unit::<C>(c1, i1, k1).dot(&angular_unit(c2, i2, k2));
                out = out + ScalarField::new(&ang, &r1.try_mul(r2)?);
            }
        }
        Ok(out)
    }

    pub fn cross(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(c1, i1, k1), r1) in &self.terms {
            for (&(c2, i2, k2), r2) in &other.terms {
                let ang = angular_unit::<C>(c1, i1, k1).cross(&angular_unit(c2, i2, k2));
                out = out + Self::new(&ang, &r1.try_mul(r2)?);
            }
        }
        Ok(out)
    }

    /// `u × self`.
    pub fn radius_cross(&self) -> Self {
        let mut out = Self::zero();
        for (&(comp, i, k), r) in &self.terms {
            out = out + Self::new(&AngularVector::unit_radius().cross(&angular_unit(comp, i, k)), r);
        }
        out
    }

    /// `u · self`.
    pub fn radial_part(&self) -> ScalarField<C> {
        let mut out = ScalarField::zero();
        for (&(comp, i, k), r) in &self.terms {
            out = out + ScalarField::new(&AngularVector::unit_radius().dot(&angular_unit(comp, i, k)), r);
        }
        out
    }

    pub fn divergence(&self) -> Result<ScalarField<C>> {
        let mut out = ScalarField::zero();
        let x = Poly::<C>::x();
        let m2 = Poly::<C>::m2();
        for (&(comp, i, k), f) in &self.terms {
            let w = angular_unit::<C>(comp, i, k);
            out = out + ScalarField::new(&AngularVector::unit_radius().dot(&w), &f.differentiate()?);
            let r_div = w.u.scale(&C::from_int(2)) + w.mu.dx().mul(&(m2.clone() - x.mul(&x)));
            out = out + ScalarField::new(&r_div, &f.shift_power(-1));
        }
        Ok(out)
    }

    pub fn curl(&self) -> Result<Self> {
        let mut out = Self::zero();
        let x = Poly::<C>::x();
        let m2 = Poly::<C>::m2();
        for (&(comp, i, k), f) in &self.terms {
            let w = angular_unit::<C>(comp, i, k);
            out = out + Self::new(&AngularVector::unit_radius().cross(&w), &f.differentiate()?);
            let c = &w.mu_cross_u;
            let r_curl = AngularVector::new(
                c.dx().mul(&(x.mul(&x) - m2.clone())) + c.mul(&x),
                c.clone(),
                w.u.dx() + x.mul(&w.mu.dx()),
            );
            out = out + Self::new(&r_curl, &f.shift_power(-1));
        }
        Ok(out)
    }

    /// Value of the field at `r u` for a concrete moment, given `Υ, Υ', Υ''` there.
    pub fn eval<T: Real>(&self, r: T, u: [T; 3], mu: [T; 3], ups: [T; 3]) -> [T; 3] {
        let mut acc = [T::zero(); 3];
        for (&(comp, i, k), f) in &self.terms {
            let dir = angular_unit::<C>(comp, i, k).to_real::<T>().eval(u, mu);
            let s = f.eval(r, ups);
            for j in 0..3 {
                acc[j] = acc[j] + s * dir[j];
            }
        }
        acc
    }

    pub fn to_real<T: Real>(&self) -> VectorField<T> {
        let mut out = VectorField::zero();
        for (&key, r) in &self.terms {
            merge(&mut out.terms, key, r.to_real());
        }
        out
    }

    pub fn u_degree(&self) -> u32 {
        self.terms.keys().map(|&(c, i, _)| i + u32::from(c != Component::Mu)).max().unwrap_or(0)
    }
}

impl<C: Coefficient> Add for VectorField<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (key, r) in rhs.terms {
            merge(&mut self.terms, key, r);
        }
        self
    }
}

impl<C: Coefficient> Neg for VectorField<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { terms: self.terms.into_iter().map(|(k, r)| (k, -r)).collect() }
    }
}

impl<C: Coefficient> Sub for VectorField<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Regularized fields and sources. `μ` stays symbolic: magnetic fields are
/// linear in it and the angular basis carries it.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBundle<C> {
    pub e: C,
    pub c: C,
    pub electric: VectorField<C>,
    pub magnetic: VectorField<C>,
    /// `∇·E = 4πρ`.
    pub div_electric: ScalarField<C>,
    /// `∇×H = 4πj/c`.
    pub curl_magnetic: VectorField<C>,
}

impl<C: Coefficient> FieldBundle<C> {
    /// Charge density `ρ = ∇·E / 4π`; isotropic.
    pub fn rho<T: Real>(&self) -> RadialExpression<T> {
        self.div_electric.radial(0, 0).to_real::<T>().scale(&(T::one() / (T::of(4.0) * T::PI())))
    }

    /// Current density `j = c ∇×H / 4π`.
    pub fn current<T: Real>(&self) -> VectorField<T> {
        let k: T = self.c.to_real::<T>() / (T::of(4.0) * T::PI());
        self.curl_magnetic.to_real::<T>().scale(&k)
    }

    /// `∇·H`, identically zero for a curl.
    pub fn div_magnetic(&self) -> Result<ScalarField<C>> {
        self.magnetic.divergence()
    }
}

/// `E = -∇(eΥ/r)`, `H = ∇×(r^{-2}Υ μ×u)`, and their sources, all derived in
/// the factored algebra.
pub fn derive_fields<C: Coefficient>(e: C, c: C) -> Result<FieldBundle<C>> {
    let phi = ScalarField::new(&Poly::constant(e.clone()), &RadialExpression::term(C::one(), -1, 1, 0, 0)?);
    let electric = -phi.gradient()?;
    let potential =
        VectorField::new(&AngularVector::moment_cross_radius(), &RadialExpression::term(C::one(), -2, 1, 0, 0)?);
    let magnetic = potential.curl()?;
    let div_electric = electric.divergence()?;
    let curl_magnetic = magnetic.curl()?;
    Ok(FieldBundle { e, c, electric, magnetic, div_electric, curl_magnetic })
}

pub fn build_fields<T: Real>(p: &PhysicalParams<T>) -> FieldBundle<T> {
    derive_fields(p.e, p.c).expect("field derivation stays within the Υ-power limit")
}

/// Exact bundle with `e = c = 1`.
pub fn exact_fields() -> FieldBundle<Rational64> {
    derive_fields(Rational64::from_integer(1), Rational64::from_integer(1))
        .expect("field derivation stays within the Υ-power limit")
}

fn add_radial<C: Coefficient>(out: &mut Vec<RadialExpression<C>>, k: usize, r: RadialExpression<C>) {
    if out.len() <= k {
        out.resize(k + 1, RadialExpression::zero());
    }
    out[k] = out[k].clone() + r;
}

/// `∭ f d³r / 4π = Σ_k m2^k ∫ R_k dr`; the returned `R_k` include `r²`.
pub fn volume_reduce_scalar<C: Coefficient>(f: &ScalarField<C>) -> Result<Vec<RadialExpression<C>>> {
    let mut out = Vec::new();
    for (&(i, k), r) in f.terms() {
        let SphereIntegral::Scalar(cs) =
            sphere_integrate_exact(&AngularExpression::Scalar(Poly::monomial(C::one(), i, k)))?
        else {
            unreachable!("scalar integrand")
        };
        for (j, c) in cs.iter().enumerate() {
            if !c.is_zero() {
                add_radial(&mut out, j, r.shift_power(2).scale(c));
            }
        }
    }
    Ok(out)
}

/// `∭ V d³r / 4π = μ Σ_k m2^k ∫ R_k dr`; the returned `R_k` include `r²`.
pub fn volume_reduce_vector<C: Coefficient>(v: &VectorField<C>) -> Result<Vec<RadialExpression<C>>> {
    let mut out = Vec::new();
    for (&(comp, i, k), r) in &v.terms {
        let SphereIntegral::Vector(cs) =
            sphere_integrate_exact(&AngularExpression::Vector(angular_unit::<C>(comp, i, k)))?
        else {
            unreachable!("vector integrand")
        };
        for (j, c) in cs.iter().enumerate() {
            if !c.is_zero() {
                add_radial(&mut out, j, r.shift_power(2).scale(c));
            }
        }
    }
    Ok(out)
}

fn series_of<T: Real>(reduced: &[RadialExpression<T>], m2: T, m: &Mollifier<T>) -> Result<AsymptoticSeries<T>> {
    let mut total = AsymptoticSeries::zero();
    for (k, r) in reduced.iter().enumerate() {
        if r.is_zero() {
            continue;
        }
        total = total.add(&integrate_asymptotic(r, m)?.scale(m2.powi(k as i32)));
    }
    Ok(total)
}

fn four_pi<T: Real>() -> T {
    T::of(4.0) * T::PI()
}

/// Closed-form `∭ f d³r` as a series in `(a, ε)`.
pub fn volume_series_scalar<T: Real>(f: &ScalarField<T>, m2: T, m: &Mollifier<T>) -> Result<AsymptoticSeries<T>> {
    Ok(series_of(&volume_reduce_scalar(f)?, m2, m)?.scale(four_pi()))
}

/// Closed-form `∭ V d³r = s μ`, returning the series `s`.
pub fn volume_series_vector<T: Real>(v: &VectorField<T>, m2: T, m: &Mollifier<T>) -> Result<AsymptoticSeries<T>> {
    Ok(series_of(&volume_reduce_vector(v)?, m2, m)?.scale(four_pi()))
}

/// `∭ f d³r` at a finite point: numeric sphere rule per angular monomial
/// times radial quadrature, independent of the exact table.
pub fn volume_quadrature_scalar<T: Real>(
    f: &ScalarField<T>,
    mu: [T; 3],
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
    rule: &SphereRule<T>,
) -> Result<T> {
    let mut total = T::zero();
    for (&(i, k), r) in f.terms() {
        let AngularValue::Scalar(ang) =
            sphere_integrate_quadrature(&AngularExpression::Scalar(Poly::monomial(T::one(), i, k)), mu, rule)
        else {
            unreachable!("scalar integrand")
        };
        total = total + ang * integrate_quadrature(&r.shift_power(2), rp, m)?;
    }
    Ok(total)
}

/// Vector counterpart of [`volume_quadrature_scalar`], plus the sum of the
/// magnitudes of all contributions as a scale for cancellation checks.
pub fn volume_quadrature_vector<T: Real>(
    v: &VectorField<T>,
    mu: [T; 3],
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
    rule: &SphereRule<T>,
) -> Result<([T; 3], T)> {
    let mut total = [T::zero(); 3];
    let mut scale = T::zero();
    for (&(comp, i, k), r) in &v.terms {
        let AngularValue::Vector(ang) =
            sphere_integrate_quadrature(&AngularExpression::Vector(angular_unit::<T>(comp, i, k)), mu, rule)
        else {
            unreachable!("vector integrand")
        };
        let rad = integrate_quadrature(&r.shift_power(2), rp, m)?;
        let ang_scale = four_pi::<T>() * dot3(mu, mu).sqrt().max(T::one()).powi(i as i32 + k as i32 * 2 + 1);
        scale = scale + ang_scale * rad.abs();
        for j in 0..3 {
            total[j] = total[j] + ang[j] * rad;
        }
    }
    Ok((total, scale))
}

/// A quantity by both routes at one regularization point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation<T> {
    pub series: AsymptoticSeries<T>,
    pub closed_form: T,
    pub quadrature: T,
}

impl<T: Real> Evaluation<T> {
    pub fn rel_dev(&self) -> T {
        (self.quadrature - self.closed_form).abs() / self.closed_form.abs()
    }
}

/// Vector quantity `s μ`; `series` is the closed form of `s`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorEvaluation<T> {
    pub series: AsymptoticSeries<T>,
    pub closed_form: [T; 3],
    pub quadrature: [T; 3],
}

impl<T: Real> VectorEvaluation<T> {
    pub fn rel_dev(&self) -> T {
        let d = [0, 1, 2].map(|k| self.quadrature[k] - self.closed_form[k]);
        dot3(d, d).sqrt() / dot3(self.closed_form, self.closed_form).sqrt()
    }
}

fn scalar_eval<T: Real>(
    f: &ScalarField<T>,
    k: T,
    p: &PhysicalParams<T>,
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
) -> Result<Evaluation<T>> {
    let series = volume_series_scalar(f, p.mu_squared(), m)?.scale(k);
    let quadrature = k * volume_quadrature_scalar(f, p.mu, rp, m, &SphereRule::default())?;
    Ok(Evaluation { closed_form: series.eval_at(rp), series, quadrature })
}

fn vector_eval<T: Real>(
    v: &VectorField<T>,
    k: T,
    p: &PhysicalParams<T>,
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
) -> Result<VectorEvaluation<T>> {
    let series = volume_series_vector(v, p.mu_squared(), m)?.scale(k);
    let s = series.eval_at(rp);
    let (quad, _) = volume_quadrature_vector(v, p.mu, rp, m, &SphereRule::default())?;
    Ok(VectorEvaluation { closed_form: p.mu.map(|x| s * x), series, quadrature: quad.map(|x| k * x) })
}

/// `U_ele = (1/8π) ∭ E² d³r = (e²/2) M[2,0]/ε`.
pub fn self_energy_electric<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<Evaluation<T>> {
    let f = build_fields(p);
    scalar_eval(&f.electric.dot(&f.electric)?, T::one() / (T::of(2.0) * four_pi::<T>()), p, rp, m)
}

/// `U_mag = (1/8π) ∭ H² d³r = (μ²/3) M[2,0]/(a²ε)`.
pub fn self_energy_magnetic<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<Evaluation<T>> {
    let f = build_fields(p);
    scalar_eval(&f.magnetic.dot(&f.magnetic)?, T::one() / (T::of(2.0) * four_pi::<T>()), p, rp, m)
}

/// `(1/8π) ∭ (E² + H²) d³r` from one combined integrand.
pub fn self_energy_total<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<Evaluation<T>> {
    let f = build_fields(p);
    let density = f.electric.dot(&f.electric)? + f.magnetic.dot(&f.magnetic)?;
    scalar_eval(&density, T::one() / (T::of(2.0) * four_pi::<T>()), p, rp, m)
}

/// `∭ u×(μ×u) r^{-2} Υ' d³r = (8π/3) μ`: the point-dipole delta term.
pub fn delta_term_flux<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<VectorEvaluation<T>> {
    let ang = AngularVector::unit_radius().cross(&AngularVector::moment_cross_radius());
    let v = VectorField::new(&ang, &RadialExpression::term(T::one(), -2, 0, 1, 0)?);
    vector_eval(&v, T::one(), p, rp, m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfForce<T> {
    /// `∭ ρE d³r` by quadrature.
    pub electric_total: [T; 3],
    /// `(1/c) ∭ j×H d³r` by quadrature.
    pub magnetic_total: [T; 3],
    /// Magnitude scale of the contributions summed into the totals.
    pub scale: T,
    /// `F_r = ∫ r² E ∇·E dr = M_1`.
    pub radial_density: Evaluation<T>,
}

impl<T: Real> SelfForce<T> {
    pub fn total(&self) -> [T; 3] {
        [0, 1, 2].map(|k| self.electric_total[k] + self.magnetic_total[k])
    }
}

/// Self-force on the regularized electron. The radial density is reduced
/// through `r² E (2E/r + E') = (r² E²/2)' + r E²`, so it equals `M_1`.
pub fn self_force<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<SelfForce<T>> {
    let f = build_fields(p);
    let rule = SphereRule::default();
    let inv4pi = T::one() / four_pi::<T>();
    let rho_e = f.electric.scale(&inv4pi);
    let rho_e = {
        let mut out = VectorField::zero();
        for (&key, r) in &rho_e.terms {
            for (&(i, k), d) in f.div_electric.terms() {
                let ang = angular_unit::<T>(key.0, key.1, key.2).scale(&Poly::monomial(T::one(), i, k));
                out = out + VectorField::new(&ang, &r.try_mul(d)?);
            }
        }
        out
    };
    let (electric_total, s1) = volume_quadrature_vector(&rho_e, p.mu, rp, m, &rule)?;
    let j_cross_h = f.curl_magnetic.cross(&f.magnetic)?.scale(&inv4pi);
    let (magnetic_total, s2) = volume_quadrature_vector(&j_cross_h, p.mu, rp, m, &rule)?;

    let e_r = f.electric.radial(Component::U, 0, 0);
    let integrand = e_r.try_mul(&f.div_electric.radial(0, 0))?.shift_power(2);
    let series = integrate_asymptotic(&integrand, m)?;
    let quadrature = integrate_quadrature(&integrand, rp, m)?;
    let radial_density = Evaluation { closed_form: series.eval_at(rp), series, quadrature };
    Ok(SelfForce { electric_total, magnetic_total, scale: s1 + s2, radial_density })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfMomentum<T> {
    /// `(1/4πc) ∭ E×H d³r` by quadrature.
    pub total: [T; 3],
    pub scale: T,
    /// `P_r = e ∫ r² g dr` for `E×H = g(r) μ×u`; equals `M_1`.
    pub radial: Evaluation<T>,
}

/// `E×H = (μ×u) E²/(e r)`.
pub fn poynting<C: Coefficient>(f: &FieldBundle<C>) -> Result<VectorField<C>> {
    f.electric.cross(&f.magnetic)
}

pub fn self_momentum<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<SelfMomentum<T>> {
    let f = build_fields(p);
    let s = poynting(&f)?;
    let k = T::one() / (four_pi::<T>() * p.c);
    let (total, scale) = volume_quadrature_vector(&s.scale(&k), p.mu, rp, m, &SphereRule::default())?;
    let integrand = s.radial(Component::MuCrossU, 0, 0).shift_power(2).scale(&p.e);
    let series = integrate_asymptotic(&integrand, m)?;
    let quadrature = integrate_quadrature(&integrand, rp, m)?;
    Ok(SelfMomentum { total, scale, radial: Evaluation { closed_form: series.eval_at(rp), series, quadrature } })
}

/// `S = (1/4πc) ∭ r×(E×H) d³r = (2/(3ec)) M_2 μ`.
pub fn spin<T: Real>(
    p: &PhysicalParams<T>,
    m: &Mollifier<T>,
    rp: &RegularizationPoint<T>,
) -> Result<VectorEvaluation<T>> {
    let f = build_fields(p);
    let density = poynting(&f)?.radius_cross().shift_power(1);
    vector_eval(&density, T::one() / (four_pi::<T>() * p.c), p, rp, m)
}

/// `|v|`.
pub fn norm3<T: Real>(v: [T; 3]) -> T {
    dot3(v, v).sqrt()
}

/// Rotates `v` about the unit axis `k` by `angle` (Rodrigues).
pub fn rotate3<T: Real>(v: [T; 3], k: [T; 3], angle: T) -> [T; 3] {
    let (s, c) = angle.sin_cos();
    let kxv = cross3(k, v);
    let kv = dot3(k, v);
    [0, 1, 2].map(|i| v[i] * c + kxv[i] * s + k[i] * kv * (T::one() - c))
}
