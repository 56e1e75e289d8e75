//! Angular dipole algebra on the unit sphere.
//!
//! Every expression built from the unit radius `u` and a fixed moment `μ`
//! by dot and cross products reduces to a scalar polynomial in
//! `x = u·μ` and `m2 = |μ|²`, or to a vector `A u + B μ + C (μ×u)` with
//! polynomial coefficients. The reduction uses `u·u = 1` and
//! `u×(μ×u) = μ - x u`.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::{Coefficient, Real};

/// Largest `u`-degree accepted by the exact sphere table.
pub const MAX_U_DEGREE: u32 = 3;

/// Polynomial in `x = u·μ` and `m2 = |μ|²`, keyed by `(x power, m2 power)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Poly<C> {
    terms: BTreeMap<(u32, u32), C>,
}

impl<C: Coefficient> Poly<C> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: C, x_pow: u32, m2_pow: u32) -> Self {
        Self::from_pairs(vec![((x_pow, m2_pow), c)])
    }

    pub fn x() -> Self {
        Self::monomial(C::one(), 1, 0)
    }

    pub fn m2() -> Self {
        Self::monomial(C::one(), 0, 1)
    }

    fn from_pairs(pairs: Vec<((u32, u32), C)>) -> Self {
        let mut sums: BTreeMap<(u32, u32), (C, C)> = BTreeMap::new();
        for (k, c) in pairs {
            let e = sums.entry(k).or_insert_with(|| (C::zero(), C::zero()));
            e.1 = e.1.clone() + c.magnitude();
            e.0 = e.0.clone() + c;
        }
        let terms = sums
            .into_iter()
            .filter(|(_, (s, scale))| !s.is_zero() && !C::is_cancellation(s, scale))
            .map(|(k, (s, _))| (k, s))
            .collect();
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, x_pow: u32, m2_pow: u32) -> C {
        self.terms.get(&(x_pow, m2_pow)).cloned().unwrap_or_else(C::zero)
    }

    /// Highest power of `x`; zero for the zero polynomial.
    pub fn x_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_pairs(self.terms.iter().map(|(k, v)| (*k, v.clone() * c.clone())).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                out.push(((ka.0 + kb.0, ka.1 + kb.1), va.clone() * vb.clone()));
            }
        }
        Self::from_pairs(out)
    }

    /// `∂/∂x` at fixed `m2`.
    pub fn dx(&self) -> Self {
        Self::from_pairs(
            self.terms
                .iter()
                .filter(|(k, _)| k.0 > 0)
                .map(|(k, v)| ((k.0 - 1, k.1), v.clone() * C::from_int(k.0 as i64)))
                .collect(),
        )
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Self {
        Self::from_pairs(
            self.terms.iter().map(|(k, v)| (*k, if k.0 % 2 == 1 { -v.clone() } else { v.clone() })).collect(),
        )
    }

    pub fn eval<T: Real>(&self, x: T, m2: T) -> T {
        self.terms.iter().map(|(k, v)| v.to_real::<T>() * x.powi(k.0 as i32) * m2.powi(k.1 as i32)).sum()
    }

    pub fn to_real<T: Real>(&self) -> Poly<T> {
        Poly::from_pairs(self.terms.iter().map(|(k, v)| (*k, v.to_real::<T>())).collect())
    }
}

impl<C: Coefficient> Add for Poly<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_pairs(self.terms.into_iter().chain(rhs.terms).collect())
    }
}

impl<C: Coefficient> Neg for Poly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(&-C::one())
    }
}

impl<C: Coefficient> Sub for Poly<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// `A u + B μ + C (μ×u)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularVector<C> {
    pub u: Poly<C>,
    pub mu: Poly<C>,
    pub mu_cross_u: Poly<C>,
}

impl<C: Coefficient> AngularVector<C> {
    pub fn zero() -> Self {
        Self { u: Poly::zero(), mu: Poly::zero(), mu_cross_u: Poly::zero() }
    }

    pub fn new(u: Poly<C>, mu: Poly<C>, mu_cross_u: Poly<C>) -> Self {
        Self { u, mu, mu_cross_u }
    }

    pub fn unit_radius() -> Self {
        Self::new(Poly::constant(C::one()), Poly::zero(), Poly::zero())
    }

    pub fn moment() -> Self {
        Self::new(Poly::zero(), Poly::constant(C::one()), Poly::zero())
    }

    pub fn moment_cross_radius() -> Self {
        Self::new(Poly::zero(), Poly::zero(), Poly::constant(C::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.u.is_zero() && self.mu.is_zero() && self.mu_cross_u.is_zero()
    }

    pub fn scale(&self, s: &Poly<C>) -> Self {
        Self::new(self.u.mul(s), self.mu.mul(s), self.mu_cross_u.mul(s))
    }

    pub fn dot(&self, other: &Self) -> Poly<C> {
        let x = Poly::x();
        let m2 = Poly::m2();
        let one = Poly::constant(C::one());
        let (a1, b1, c1) = (&self.u, &self.mu, &self.mu_cross_u);
        let (a2, b2, c2) = (&other.u, &other.mu, &other.mu_cross_u);
        // u·u = 1, u·μ = x, μ·μ = m2, (μ×u)·(μ×u) = m2 - x², the rest vanish
        a1.mul(a2).mul(&one)
            + (a1.mul(b2) + b1.mul(a2)).mul(&x)
            + b1.mul(b2).mul(&m2)
            + c1.mul(c2).mul(&(m2.clone() - x.mul(&x)))
    }

    pub fn cross(&self, other: &Self) -> Self {
        let x = Poly::x();
        let m2 = Poly::m2();
        let (a1, b1, c1) = (&self.u, &self.mu, &self.mu_cross_u);
        let (a2, b2, c2) = (&other.u, &other.mu, &other.mu_cross_u);
        // u×μ = -n, μ×u = n, u×n = μ - x u, μ×n = x μ - m2 u, with n = μ×u
        let n_coeff = b1.mul(a2) - a1.mul(b2);
        let u_n = a1.mul(c2) - c1.mul(a2);
        let mu_n = b1.mul(c2) - c1.mul(b2);
        let u_part = -(u_n.mul(&x)) - mu_n.mul(&m2);
        let mu_part = u_n + mu_n.mul(&x);
        Self::new(u_part, mu_part, n_coeff)
    }

    /// Highest degree in `u`.
    pub fn u_degree(&self) -> u32 {
        let d = |p: &Poly<C>, shift: u32| if p.is_zero() { 0 } else { p.x_degree() + shift };
        d(&self.u, 1).max(d(&self.mu, 0)).max(d(&self.mu_cross_u, 1))
    }

    /// `v(-u)`.
    pub fn reflect(&self) -> Self {
        Self::new(-self.u.reflect(), self.mu.reflect(), -self.mu_cross_u.reflect())
    }

    pub fn eval<T: Real>(&self, u: [T; 3], mu: [T; 3]) -> [T; 3] {
        let x = dot3(u, mu);
        let m2 = dot3(mu, mu);
        let n = cross3(mu, u);
        let (a, b, c) = (self.u.eval(x, m2), self.mu.eval(x, m2), self.mu_cross_u.eval(x, m2));
        [0, 1, 2].map(|k| a * u[k] + b * mu[k] + c * n[k])
    }

    pub fn to_real<T: Real>(&self) -> AngularVector<T> {
        AngularVector::new(self.u.to_real(), self.mu.to_real(), self.mu_cross_u.to_real())
    }
}

impl<C: Coefficient> Add for AngularVector<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.u + rhs.u, self.mu + rhs.mu, self.mu_cross_u + rhs.mu_cross_u)
    }
}

impl<C: Coefficient> Neg for AngularVector<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.u, -self.mu, -self.mu_cross_u)
    }
}

impl<C: Coefficient> Sub for AngularVector<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

/// Scalar or vector angular factor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AngularExpression<C> {
    Scalar(Poly<C>),
    Vector(AngularVector<C>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl<C: Coefficient> AngularExpression<C> {
    pub fn u_degree(&self) -> u32 {
        match self {
            AngularExpression::Scalar(p) => p.x_degree(),
            AngularExpression::Vector(v) => v.u_degree(),
        }
    }

    /// `e(-u)`.
    pub fn reflect(&self) -> Self {
        match self {
            AngularExpression::Scalar(p) => AngularExpression::Scalar(p.reflect()),
            AngularExpression::Vector(v) => AngularExpression::Vector(v.reflect()),
        }
    }

    /// Behaviour under `u → -u`.
    pub fn parity(&self) -> Parity {
        let reflected = self.reflect();
        let (even, odd) = match (self, &reflected) {
            (AngularExpression::Scalar(p), AngularExpression::Scalar(q)) => {
                ((p.clone() - q.clone()).is_zero(), (p.clone() + q.clone()).is_zero())
            }
            (AngularExpression::Vector(p), AngularExpression::Vector(q)) => {
                ((p.clone() - q.clone()).is_zero(), (p.clone() + q.clone()).is_zero())
            }
            _ => unreachable!("reflection keeps the kind"),
        };
        match (even, odd) {
            (true, _) => Parity::Even,
            (_, true) => Parity::Odd,
            _ => Parity::Mixed,
        }
    }
}

/// Exact sphere integral as a multiple of `4π`: a polynomial in `m2`,
/// times `μ` for vector integrands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SphereIntegral<C> {
    Scalar(Vec<C>),
    /// Coefficients of `μ`.
    Vector(Vec<C>),
}

/// Numeric value of a sphere integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AngularValue<T> {
    Scalar(T),
    Vector([T; 3]),
}

impl<T: Real> AngularValue<T> {
    pub fn norm(&self) -> T {
        match self {
            AngularValue::Scalar(s) => s.abs(),
            AngularValue::Vector(v) => dot3(*v, *v).sqrt(),
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        match (self, other) {
            (AngularValue::Scalar(a), AngularValue::Scalar(b)) => (*a - *b).abs(),
            (AngularValue::Vector(a), AngularValue::Vector(b)) => {
                let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
                dot3(d, d).sqrt()
            }
            _ => T::infinity(),
        }
    }
}

impl<C: Coefficient> SphereIntegral<C> {
    pub fn eval<T: Real>(&self, mu: [T; 3]) -> AngularValue<T> {
        let m2 = dot3(mu, mu);
        let four_pi = T::of(4.0) * T::PI();
        let poly = |cs: &[C]| -> T {
            four_pi * cs.iter().enumerate().map(|(k, c)| c.to_real::<T>() * m2.powi(k as i32)).sum::<T>()
        };
        match self {
            SphereIntegral::Scalar(cs) => AngularValue::Scalar(poly(cs)),
            SphereIntegral::Vector(cs) => {
                let s = poly(cs);
                AngularValue::Vector(mu.map(|c| s * c))
            }
        }
    }
}

fn add_at<C: Coefficient>(v: &mut Vec<C>, k: usize, c: C) {
    if v.len() <= k {
        v.resize(k + 1, C::zero());
    }
    v[k] = v[k].clone() + c;
}

/// `∬ x^i dω / 4π = m2^{i/2}/(i+1)` for even `i`, else 0.
fn scalar_table<C: Coefficient>(p: &Poly<C>, out: &mut Vec<C>) {
    for (&(i, k), c) in p.terms() {
        if i % 2 == 0 {
            add_at(out, (k + i / 2) as usize, c.clone() / C::from_int(i as i64 + 1));
        }
    }
}

/// Exact integral over the unit sphere from the identity table:
/// `∬ x^i u dω = 4π m2^{(i-1)/2} μ/(i+2)` for odd `i`,
/// `∬ x^i μ dω = 4π m2^{i/2} μ/(i+1)` for even `i`, `∬ x^i (μ×u) dω = 0`,
/// and odd integrands vanish.
pub fn sphere_integrate_exact<C: Coefficient>(e: &AngularExpression<C>) -> Result<SphereIntegral<C>> {
    let degree = e.u_degree();
    if degree > MAX_U_DEGREE {
        return Err(Error::NotInTable(format!("u-degree {degree} exceeds {MAX_U_DEGREE}")));
    }
    match e {
        AngularExpression::Scalar(p) => {
            let mut out = Vec::new();
            scalar_table(p, &mut out);
            Ok(SphereIntegral::Scalar(out))
        }
        AngularExpression::Vector(v) => {
            let mut out = Vec::new();
            for (&(i, k), c) in v.u.terms() {
                if i % 2 == 1 {
                    add_at(&mut out, (k + (i - 1) / 2) as usize, c.clone() / C::from_int(i as i64 + 2));
                }
            }
            scalar_table(&v.mu, &mut out);
            Ok(SphereIntegral::Vector(out))
        }
    }
}

/// Product rule: Gauss–Legendre in `cos θ` times uniform points in `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule<T> {
    pub nodes: Vec<([T; 3], T)>,
}

impl<T: Real> SphereRule<T> {
    /// Exact for polynomials of degree `2·n_theta - 1` in `cos θ` and
    /// below `n_phi` in `φ`.
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let (xs, ws) = gauss_legendre::<T>(n_theta);
        let dphi = T::of(2.0) * T::PI() / T::of_usize(n_phi);
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&ct, &w) in xs.iter().zip(&ws) {
            let st = (T::one() - ct * ct).max(T::zero()).sqrt();
            for j in 0..n_phi {
                let phi = dphi * (T::of_usize(j) + T::of(0.5));
                nodes.push(([st * phi.cos(), st * phi.sin(), ct], w * dphi));
            }
        }
        Self { nodes }
    }
}

impl<T: Real> Default for SphereRule<T> {
    /// 16 Gauss–Legendre nodes in `cos θ` × 32 uniform `φ`.
    fn default() -> Self {
        Self::product(16, 32)
    }
}

/// Numeric sphere integral of `e` for a concrete moment vector.
pub fn sphere_integrate_quadrature<C: Coefficient, T: Real>(
    e: &AngularExpression<C>,
    mu: [T; 3],
    rule: &SphereRule<T>,
) -> AngularValue<T> {
    let m2 = dot3(mu, mu);
    match e {
        AngularExpression::Scalar(p) => {
            let p = p.to_real::<T>();
            AngularValue::Scalar(rule.nodes.iter().map(|(u, w)| *w * p.eval(dot3(*u, mu), m2)).sum())
        }
        AngularExpression::Vector(v) => {
            let v = v.to_real::<T>();
            let mut acc = [T::zero(); 3];
            for (u, w) in &rule.nodes {
                let val = v.eval(*u, mu);
                for k in 0..3 {
                    acc[k] = acc[k] + *w * val[k];
                }
            }
            AngularValue::Vector(acc)
        }
    }
}

pub fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// `V₁ = 3u(μ·u) - μ`, the angular factor of the static dipole field.
pub fn dipole_v1<C: Coefficient>() -> AngularVector<C> {
    AngularVector::new(Poly::monomial(C::from_int(3), 1, 0), Poly::constant(-C::one()), Poly::zero())
}

/// `V₂ = u(μ·u) - μ = -u×(μ×u)`.
pub fn dipole_v2<C: Coefficient>() -> AngularVector<C> {
    AngularVector::new(Poly::x(), Poly::constant(-C::one()), Poly::zero())
}
