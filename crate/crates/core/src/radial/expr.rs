//! Finite sums of `coeff · r^p · Υ^α (Υ')^β (Υ'')^γ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Coefficient, Real};

/// Largest total power `α + β + γ` the engine accepts.
pub const MAX_UPSILON_POWER: u32 = 4;

/// Exponents `(p, α, β, γ)` of one monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Monomial {
    pub p: i32,
    pub alpha: u32,
    pub beta: u32,
    pub gamma: u32,
}

impl Monomial {
    pub fn new(p: i32, alpha: u32, beta: u32, gamma: u32) -> Result<Self> {
        let total = alpha + beta + gamma;
        if total > MAX_UPSILON_POWER {
            return Err(Error::ExpressionTooLarge(total));
        }
        Ok(Self { p, alpha, beta, gamma })
    }

    pub fn total_power(&self) -> u32 {
        self.alpha + self.beta + self.gamma
    }

    /// `r^p Υ^α (Υ')^β (Υ'')^γ` given `[Υ, Υ', Υ'']` at `r`.
    pub fn eval<T: Real>(&self, r: T, ups: [T; 3]) -> T {
        // zero factors first, so that r^p never multiplies an exact zero into NaN
        let u = ups[0].powi(self.alpha as i32) * ups[1].powi(self.beta as i32) * ups[2].powi(self.gamma as i32);
        if u == T::zero() {
            return T::zero();
        }
        u * r.powi(self.p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialTerm<C> {
    pub coeff: C,
    pub mono: Monomial,
}

impl<C: Coefficient> RadialTerm<C> {
    pub fn new(coeff: C, p: i32, alpha: u32, beta: u32, gamma: u32) -> Result<Self> {
        Ok(Self { coeff, mono: Monomial::new(p, alpha, beta, gamma)? })
    }
}

/// Canonical sum of radial terms: like monomials merged, zeros dropped,
/// sorted by exponents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialExpression<C> {
    terms: Vec<RadialTerm<C>>,
}

/// Splitting of an expression `e` into `normal + G'`.
#[derive(Debug, Clone, PartialEq)]
pub struct ByParts<C> {
    /// No `Υ^α Υ'` with `α ≥ 1` and no single `Υ''` factor.
    pub normal: RadialExpression<C>,
    /// Antiderivative part `G`; vanishes at `r = 0`.
    pub boundary: RadialExpression<C>,
}

impl<C: Coefficient> RadialExpression<C> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// Single term `coeff · r^p Υ^α (Υ')^β (Υ'')^γ`.
    pub fn term(coeff: C, p: i32, alpha: u32, beta: u32, gamma: u32) -> Result<Self> {
        Ok(Self::from_terms(vec![RadialTerm::new(coeff, p, alpha, beta, gamma)?]))
    }

    pub fn from_terms(terms: Vec<RadialTerm<C>>) -> Self {
        let mut sums: BTreeMap<Monomial, (C, C)> = BTreeMap::new();
        for t in terms {
            let entry = sums.entry(t.mono).or_insert_with(|| (C::zero(), C::zero()));
            entry.1 = entry.1.clone() + t.coeff.magnitude();
            entry.0 = entry.0.clone() + t.coeff;
        }
        let terms = sums
            .into_iter()
            .filter(|(_, (sum, scale))| !sum.is_zero() && !C::is_cancellation(sum, scale))
            .map(|(mono, (coeff, _))| RadialTerm { coeff, mono })
            .collect();
        Self { terms }
    }

    pub fn terms(&self) -> &[RadialTerm<C>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of a monomial, zero if absent.
    pub fn coeff(&self, p: i32, alpha: u32, beta: u32, gamma: u32) -> C {
        let key = Monomial { p, alpha, beta, gamma };
        self.terms.iter().find(|t| t.mono == key).map_or_else(C::zero, |t| t.coeff.clone())
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::from_terms(
            self.terms.iter().map(|t| RadialTerm { coeff: t.coeff.clone() * c.clone(), mono: t.mono }).collect(),
        )
    }

    /// Multiplies every term by `r^k`.
    pub fn shift_power(&self, k: i32) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| RadialTerm { coeff: t.coeff.clone(), mono: Monomial { p: t.mono.p + k, ..t.mono } });
        Self::from_terms(terms.collect())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for x in &self.terms {
            for y in &other.terms {
                let mono = Monomial::new(
                    x.mono.p + y.mono.p,
                    x.mono.alpha + y.mono.alpha,
                    x.mono.beta + y.mono.beta,
                    x.mono.gamma + y.mono.gamma,
                )?;
                out.push(RadialTerm { coeff: x.coeff.clone() * y.coeff.clone(), mono });
            }
        }
        Ok(Self::from_terms(out))
    }

    /// `d/dr` by the product rule.
    pub fn differentiate(&self) -> Result<Self> {
        let mut out = Vec::new();
        for t in &self.terms {
            let Monomial { p, alpha, beta, gamma } = t.mono;
            if gamma > 0 {
                return Err(Error::DerivativeOrderExceeded);
            }
            let c = &t.coeff;
            if p != 0 {
                out.push(RadialTerm {
                    coeff: c.clone() * C::from_int(p as i64),
                    mono: Monomial { p: p - 1, ..t.mono },
                });
            }
            if alpha > 0 {
                out.push(RadialTerm {
                    coeff: c.clone() * C::from_int(alpha as i64),
                    mono: Monomial { p, alpha: alpha - 1, beta: beta + 1, gamma },
                });
            }
            if beta > 0 {
                out.push(RadialTerm {
                    coeff: c.clone() * C::from_int(beta as i64),
                    mono: Monomial { p, alpha, beta: beta - 1, gamma: gamma + 1 },
                });
            }
        }
        Ok(Self::from_terms(out))
    }

    /// Integration-by-parts normal form, applied until no rule fires:
    /// `r^p Υ^α Υ' = (1/(α+1)) [ (r^p Υ^{α+1})' - p r^{p-1} Υ^{α+1} ]` for `α ≥ 1`, and
    /// `r^p Υ^α Υ'^β Υ'' = (1/(β+1)) [ (r^p Υ^α Υ'^{β+1})' - p r^{p-1} Υ^α Υ'^{β+1} - α r^p Υ^{α-1} Υ'^{β+2} ]`.
    /// Terms with `Υ''^γ`, `γ ≥ 2`, are left in place.
    pub fn by_parts(&self) -> ByParts<C> {
        let mut normal = Vec::new();
        let mut boundary = Vec::new();
        let mut work: Vec<RadialTerm<C>> = self.terms.clone();
        while let Some(t) = work.pop() {
            let Monomial { p, alpha, beta, gamma } = t.mono;
            let c = t.coeff;
            if gamma == 1 {
                let k = C::from_int(beta as i64 + 1);
                let lifted = Monomial { p, alpha, beta: beta + 1, gamma: 0 };
                boundary.push(RadialTerm { coeff: c.clone() / k.clone(), mono: lifted });
                if p != 0 {
                    let coeff = -(c.clone() * C::from_int(p as i64)) / k.clone();
                    work.push(RadialTerm { coeff, mono: Monomial { p: p - 1, ..lifted } });
                }
                if alpha > 0 {
                    let coeff = -(c * C::from_int(alpha as i64)) / k;
                    work.push(RadialTerm { coeff, mono: Monomial { p, alpha: alpha - 1, beta: beta + 2, gamma: 0 } });
                }
            } else if alpha >= 1 && beta == 1 && gamma == 0 {
                let k = C::from_int(alpha as i64 + 1);
                let lifted = Monomial { p, alpha: alpha + 1, beta: 0, gamma: 0 };
                boundary.push(RadialTerm { coeff: c.clone() / k.clone(), mono: lifted });
                if p != 0 {
                    let coeff = -(c * C::from_int(p as i64)) / k;
                    normal.push(RadialTerm { coeff, mono: Monomial { p: p - 1, ..lifted } });
                }
            } else {
                normal.push(RadialTerm { coeff: c, mono: t.mono });
            }
        }
        ByParts { normal: Self::from_terms(normal), boundary: Self::from_terms(boundary) }
    }

    pub fn eval<T: Real>(&self, r: T, ups: [T; 3]) -> T {
        self.terms.iter().map(|t| t.coeff.to_real::<T>() * t.mono.eval(r, ups)).sum()
    }

    /// Converts the coefficients to a floating type.
    pub fn to_real<T: Real>(&self) -> RadialExpression<T> {
        RadialExpression::from_terms(
            self.terms.iter().map(|t| RadialTerm { coeff: t.coeff.to_real::<T>(), mono: t.mono }).collect(),
        )
    }
}

impl<C: Coefficient> Add for RadialExpression<C> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.terms.extend(rhs.terms);
        Self::from_terms(self.terms)
    }
}

impl<C: Coefficient> Neg for RadialExpression<C> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_terms(self.terms.into_iter().map(|t| RadialTerm { coeff: -t.coeff, mono: t.mono }).collect())
    }
}

impl<C: Coefficient> Sub for RadialExpression<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<C: Coefficient> Mul<C> for RadialExpression<C> {
    type Output = Self;
    fn mul(self, rhs: C) -> Self {
        self.scale(&rhs)
    }
}

impl<C: Coefficient> fmt::Display for RadialExpression<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:?})", t.coeff)?;
            let Monomial { p, alpha, beta, gamma } = t.mono;
            if p != 0 {
                write!(f, "·r^{p}")?;
            }
            for (name, k) in [("Υ", alpha), ("Υ'", beta), ("Υ''", gamma)] {
                match k {
                    0 => {}
                    1 => write!(f, "·{name}")?,
                    _ => write!(f, "·{name}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Integrand `r^n E²/e²` of the Coulomb moment `M_n`, with
/// `E = e(r^{-2}Υ - r^{-1}Υ')`: `r^{n-4}Υ² - 2r^{n-3}ΥΥ' + r^{n-2}Υ'²`.
pub fn mn_integrand<C: Coefficient>(n: i32) -> RadialExpression<C> {
    let field = coulomb_field_radial::<C>();
    field.try_mul(&field).expect("square of the Coulomb field is within limits").shift_power(n)
}

/// Radial factor `r^{-2}Υ - r^{-1}Υ'` of the Coulomb field, per unit charge.
pub fn coulomb_field_radial<C: Coefficient>() -> RadialExpression<C> {
    RadialExpression::from_terms(vec![
        RadialTerm::new(C::one(), -2, 1, 0, 0).unwrap(),
        RadialTerm::new(-C::one(), -1, 0, 1, 0).unwrap(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    type Q = Rational64;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn derivative_of_upsilon() {
        let e = RadialExpression::<Q>::term(q(1, 1), 0, 1, 0, 0).unwrap();
        assert_eq!(e.differentiate().unwrap(), RadialExpression::term(q(1, 1), 0, 0, 1, 0).unwrap());
    }

    #[test]
    fn derivative_of_inverse_cube_upsilon_squared() {
        let e = RadialExpression::<Q>::term(q(1, 1), -3, 2, 0, 0).unwrap();
        let d = e.differentiate().unwrap();
        assert_eq!(d.coeff(-4, 2, 0, 0), q(-3, 1));
        assert_eq!(d.coeff(-3, 1, 1, 0), q(2, 1));
        assert_eq!(d.terms().len(), 2);

        let third = e.scale(&q(1, 3)).differentiate().unwrap();
        assert_eq!(third.coeff(-4, 2, 0, 0), q(-1, 1));
        assert_eq!(third.coeff(-3, 1, 1, 0), q(2, 3));
    }

    #[test]
    fn third_derivative_is_rejected() {
        let e = RadialExpression::<Q>::term(q(1, 1), 0, 0, 0, 1).unwrap();
        assert_eq!(e.differentiate(), Err(Error::DerivativeOrderExceeded));
        let ok = RadialExpression::<Q>::term(q(1, 1), 0, 0, 1, 0).unwrap();
        assert!(ok.differentiate().unwrap().differentiate().is_err());
    }

    #[test]
    fn power_limit_is_enforced() {
        assert_eq!(RadialTerm::<Q>::new(q(1, 1), 0, 3, 2, 0), Err(Error::ExpressionTooLarge(5)));
        let sq = RadialExpression::<Q>::term(q(1, 1), 0, 2, 0, 0).unwrap();
        let cube = RadialExpression::<Q>::term(q(1, 1), 0, 3, 0, 0).unwrap();
        assert!(sq.try_mul(&sq).is_ok());
        assert_eq!(sq.try_mul(&cube), Err(Error::ExpressionTooLarge(5)));
    }

    #[test]
    fn mn_integrand_structure() {
        for n in -1..=5 {
            let e = mn_integrand::<Q>(n);
            assert_eq!(e.coeff(n - 4, 2, 0, 0), q(1, 1));
            assert_eq!(e.coeff(n - 3, 1, 1, 0), q(-2, 1));
            assert_eq!(e.coeff(n - 2, 0, 2, 0), q(1, 1));
            assert_eq!(e.terms().len(), 3);
        }
    }

    #[test]
    fn by_parts_normal_form_of_mn() {
        for n in 0..=5 {
            let raw = mn_integrand::<Q>(n);
            let ByParts { normal, boundary } = raw.by_parts();
            assert_eq!(normal.coeff(n - 4, 2, 0, 0), q(n as i64 - 2, 1));
            assert_eq!(normal.coeff(n - 2, 0, 2, 0), q(1, 1));
            assert_eq!(boundary, RadialExpression::term(q(-1, 1), n - 3, 2, 0, 0).unwrap());
            // normal + G' reproduces the raw integrand exactly
            assert_eq!(normal + boundary.differentiate().unwrap(), raw);
        }
    }

    #[test]
    fn by_parts_removes_second_derivative() {
        let e = RadialExpression::<Q>::term(q(5, 2), 1, 0, 0, 1).unwrap();
        let bp = e.by_parts();
        assert_eq!(bp.normal, RadialExpression::term(q(-5, 2), 0, 0, 1, 0).unwrap());
        assert_eq!(bp.normal.clone() + bp.boundary.differentiate().unwrap(), e);
    }

    #[test]
    fn by_parts_removes_mixed_second_derivatives() {
        // Υ Υ'' = (Υ Υ')' - Υ'², with (ΥΥ')' kept as boundary
        let e = RadialExpression::<Q>::term(q(1, 1), 0, 1, 0, 1).unwrap();
        let bp = e.by_parts();
        assert_eq!(bp.normal, RadialExpression::term(q(-1, 1), 0, 0, 2, 0).unwrap());
        // r Υ' Υ'' = (r Υ'²/2)' - Υ'²/2
        let e = RadialExpression::<Q>::term(q(1, 1), 1, 0, 1, 1).unwrap();
        let bp = e.by_parts();
        assert_eq!(bp.normal, RadialExpression::term(q(-1, 2), 0, 0, 2, 0).unwrap());
        assert_eq!(bp.normal.clone() + bp.boundary.differentiate().unwrap(), e);
    }

    #[test]
    fn float_cancellation_collapses_to_zero() {
        let a = RadialExpression::<f64>::term(0.1 + 0.2, -2, 2, 0, 0).unwrap();
        let b = RadialExpression::<f64>::term(0.3, -2, 2, 0, 0).unwrap();
        assert!((a - b).is_zero());
    }

    fn arb_expr() -> impl Strategy<Value = RadialExpression<Q>> {
        prop::collection::vec((-6i64..6, 1i64..4, -4i32..3, 0u32..3, 0u32..2), 0..4).prop_map(|v| {
            RadialExpression::from_terms(
                v.into_iter().map(|(n, d, p, a, b)| RadialTerm::new(Q::new(n, d), p, a, b, 0).unwrap()).collect(),
            )
        })
    }

    fn arb_with_second() -> impl Strategy<Value = RadialExpression<Q>> {
        prop::collection::vec((-6i64..6, 1i64..4, -4i32..3, 0u32..2, 0u32..2, 0u32..2), 0..4).prop_map(|v| {
            RadialExpression::from_terms(
                v.into_iter().map(|(n, d, p, a, b, g)| RadialTerm::new(Q::new(n, d), p, a, b, g).unwrap()).collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn derivative_is_linear(x in arb_expr(), y in arb_expr(), c in -5i64..5) {
            let lhs = (x.clone() + y.scale(&Q::from_int(c))).differentiate().unwrap();
            let rhs = x.differentiate().unwrap() + y.differentiate().unwrap().scale(&Q::from_int(c));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn leibniz_rule(x in arb_expr(), y in arb_expr()) {
            let x = RadialExpression::from_terms(x.terms().iter().filter(|t| t.mono.total_power() <= 2).cloned().collect());
            let y = RadialExpression::from_terms(y.terms().iter().filter(|t| t.mono.total_power() <= 2).cloned().collect());
            let lhs = x.try_mul(&y).unwrap().differentiate().unwrap();
            let rhs = x.differentiate().unwrap().try_mul(&y).unwrap() + x.try_mul(&y.differentiate().unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn by_parts_is_an_identity(x in arb_with_second()) {
            let bp = x.by_parts();
            prop_assert!(bp.normal.terms().iter().all(|t| t.mono.gamma == 0 && !(t.mono.alpha >= 1 && t.mono.beta == 1)));
            prop_assert_eq!(bp.normal + bp.boundary.differentiate().unwrap(), x);
        }
    }
}
