//! Direct quadrature of radial expressions at a finite regularization point.

use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::quadrature::{integrate, integrate_pieces, integrate_to_infinity, QuadConfig};
use crate::radial::expr::RadialExpression;
use crate::scalar::{Coefficient, Real};
use crate::upsilon::{upsilon_triple, RegularizationPoint};

/// Optional outer cutoff and multiplicative weight `w(r)`.
pub struct RadialQuadOptions<'w, T> {
    pub r_max: Option<T>,
    pub weight: Option<&'w (dyn Fn(T) -> T + Sync)>,
}

impl<T> Default for RadialQuadOptions<'_, T> {
    fn default() -> Self {
        Self { r_max: None, weight: None }
    }
}

impl<T> RadialQuadOptions<'_, T> {
    pub fn cutoff(r_max: T) -> Self {
        Self { r_max: Some(r_max), weight: None }
    }
}

fn cfg<T: Real>() -> QuadConfig<T> {
    let rel = T::of(1e-13).max(T::of(64.0) * T::epsilon());
    QuadConfig { abs_tol: T::zero(), rel_tol: rel, max_subdivisions: 1000 }
}

/// `∫_0^∞ e(r) dr` (or up to `r_max`) at finite `(ε, a)`.
pub fn integrate_quadrature<C: Coefficient, T: Real>(
    e: &RadialExpression<C>,
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
) -> Result<T> {
    integrate_quadrature_with(e, rp, m, &RadialQuadOptions::default())
}

/// Quadrature over the transition shell `[a - Zε, a + Zε]`, where all of
/// `Υ, Υ', Υ''` vary, plus the outer region where `Υ = 1` and only
/// derivative-free terms survive. Below the shell `Υ` vanishes identically.
pub fn integrate_quadrature_with<C: Coefficient, T: Real>(
    e: &RadialExpression<C>,
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
    opts: &RadialQuadOptions<'_, T>,
) -> Result<T> {
    for t in e.terms() {
        let mono = t.mono;
        let derivative_free = mono.beta == 0 && mono.gamma == 0;
        if mono.total_power() == 0 && (opts.r_max.is_none() || mono.p < 0) {
            return Err(Error::DivergentTail { p: mono.p });
        }
        if derivative_free && mono.p >= -1 && opts.r_max.is_none() && opts.weight.is_none() {
            return Err(Error::DivergentTail { p: mono.p });
        }
    }
    let weight = |r: T| opts.weight.map_or(T::one(), |w| w(r));
    let upper = opts.r_max.unwrap_or(T::infinity());
    let (lo, hi) = rp.transition(m);
    let (eps, a) = (rp.epsilon(), rp.a());
    if lo == T::zero() {
        if let Some(t) = e.terms().iter().find(|t| t.mono.total_power() > 0 && t.mono.p <= -1) {
            return Err(Error::InvalidRegularization(format!(
                "transition shell a ± Zε reaches r = 0 (eps={eps}, a={a}), where r^{} times Upsilon factors is not integrable",
                t.mono.p
            )));
        }
    }
    let five = T::of(5.0) * eps;

    let mut points: Vec<T> = [lo, a - five, a, a + five, hi].into_iter().filter(|&p| p >= lo && p < upper).collect();
    points.push(hi.min(upper));
    points.dedup();
    let shell = |r: T| weight(r) * e.eval(r, upsilon_triple(rp, m, r));
    let mut total = if points.len() >= 2 { integrate_pieces(shell, &points, &cfg()).value } else { T::zero() };

    // Υ ≡ 0 below the shell: only r^p terms with no Υ factor
    let bare: Vec<(T, i32)> =
        e.terms().iter().filter(|t| t.mono.total_power() == 0).map(|t| (t.coeff.to_real::<T>(), t.mono.p)).collect();
    let inner_hi = lo.min(upper);
    if !bare.is_empty() && inner_hi > T::zero() {
        total = total
            + match opts.weight {
                None => bare.iter().map(|&(c, p)| c * power_integral(T::zero(), inner_hi, p)).sum(),
                Some(_) => {
                    let f = |r: T| weight(r) * bare.iter().map(|&(c, p)| c * r.powi(p)).sum::<T>();
                    integrate(f, T::zero(), inner_hi, &cfg()).value
                }
            };
    }

    // Υ ≡ 1 above the shell: derivative-free terms reduce to powers of r
    if hi < upper {
        let outer: Vec<(T, i32)> = e
            .terms()
            .iter()
            .filter(|t| t.mono.beta == 0 && t.mono.gamma == 0)
            .map(|t| (t.coeff.to_real::<T>(), t.mono.p))
            .collect();
        if !outer.is_empty() {
            total = total
                + match opts.weight {
                    None => outer.iter().map(|&(c, p)| c * power_integral(hi, upper, p)).sum(),
                    Some(_) => {
                        let f = |r: T| weight(r) * outer.iter().map(|&(c, p)| c * r.powi(p)).sum::<T>();
                        if upper.is_finite() {
                            integrate(f, hi, upper, &cfg()).value
                        } else {
                            integrate_to_infinity(f, hi, &cfg()).value
                        }
                    }
                };
        }
    }
    Ok(total)
}

/// `∫_lo^hi r^p dr`; `hi` may be infinite when `p ≤ -2`.
fn power_integral<T: Real>(lo: T, hi: T, p: i32) -> T {
    if p == -1 {
        return (hi / lo).ln();
    }
    let k = T::of((p + 1) as f64);
    let upper = if hi.is_infinite() { T::zero() } else { hi.powi(p + 1) };
    (upper - lo.powi(p + 1)) / k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::expr::{mn_integrand, RadialTerm};
    use crate::upsilon::{upsilon, TestFunction};
    use proptest::prelude::*;

    fn q2() -> Mollifier<f64> {
        Mollifier::build(2).unwrap()
    }

    fn term(c: f64, p: i32, a: u32, b: u32, g: u32) -> RadialExpression<f64> {
        RadialExpression::term(c, p, a, b, g).unwrap()
    }

    #[test]
    fn sifting_recovers_test_function_at_cutoff() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        let t = TestFunction::Bump { radius: 1.0 };
        let w = |r: f64| t.eval(r);
        let opts = RadialQuadOptions { r_max: None, weight: Some(&w) };
        let v = integrate_quadrature_with(&term(1.0, 0, 0, 1, 0), &rp, &m, &opts).unwrap();
        assert!((v - t.eval(1e-2)).abs() < 1e-8, "{v}");
    }

    #[test]
    fn delta_squared_law() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-3, 1e-1).unwrap();
        let v = integrate_quadrature(&term(1.0, 0, 0, 2, 0), &rp, &m).unwrap();
        let expected = m.moment(2, 0) / 1e-3;
        assert!((v - expected).abs() / expected < 1e-4);
    }

    #[test]
    fn step_squared_over_r_squared() {
        let m = q2();
        // Υ² - H has a nonzero first moment, so the gap is O(ε/a)
        let rp = RegularizationPoint::new(1e-5, 1e-2).unwrap();
        let v = integrate_quadrature(&term(1.0, -2, 2, 0, 0), &rp, &m).unwrap();
        assert!((v - 100.0).abs() / 100.0 < 1e-3, "{v}");
    }

    #[test]
    fn shell_touching_origin_is_rejected() {
        let m = q2();
        let rp = RegularizationPoint::physical(0.2, 0.5).unwrap();
        assert!(matches!(integrate_quadrature(&term(1.0, -2, 0, 2, 0), &rp, &m), Err(Error::InvalidRegularization(_))));
        assert!(integrate_quadrature(&term(1.0, 0, 0, 2, 0), &rp, &m).is_ok());
    }

    #[test]
    fn divergent_tails_are_rejected() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        for p in [-1, 0, 2] {
            assert_eq!(integrate_quadrature(&term(1.0, p, 2, 0, 0), &rp, &m), Err(Error::DivergentTail { p }));
        }
        assert_eq!(integrate_quadrature(&term(1.0, -3, 0, 0, 0), &rp, &m), Err(Error::DivergentTail { p: -3 }));
        assert!(integrate_quadrature_with(&term(1.0, 1, 2, 0, 0), &rp, &m, &RadialQuadOptions::cutoff(1.0)).is_ok());
    }

    #[test]
    fn bare_powers_with_cutoff() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        let v = integrate_quadrature_with(&term(3.0, 2, 0, 0, 0), &rp, &m, &RadialQuadOptions::cutoff(2.0)).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn upsilon_step_matches_heaviside_with_cutoff() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        let v = integrate_quadrature_with(&term(1.0, 0, 1, 0, 0), &rp, &m, &RadialQuadOptions::cutoff(1.0)).unwrap();
        // first moment vanishes, so ∫Υ = 1 - a up to O(ε³)
        assert!((v - 0.99).abs() < 1e-12, "{v}");
    }

    #[test]
    fn m2_is_independent_of_cutoff() {
        let m = q2();
        let m20 = m.moment(2, 0);
        for a in [1e-1, 1e-2, 1e-3] {
            let rp = RegularizationPoint::new(a * 1e-2, a).unwrap();
            let v = integrate_quadrature(&mn_integrand::<f64>(2), &rp, &m).unwrap();
            let expected = m20 / rp.epsilon();
            assert!((v - expected).abs() / expected < 1e-9, "a={a}: {v} vs {expected}");
        }
    }

    #[test]
    fn by_parts_identity_holds_under_quadrature() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-5, 1e-3).unwrap();
        for n in [0, 1, 2, 4, 5] {
            let raw = mn_integrand::<f64>(n);
            let bp = raw.by_parts();
            let opts = if n >= 3 { RadialQuadOptions::cutoff(1.0) } else { RadialQuadOptions::default() };
            let lhs = integrate_quadrature_with(&raw, &rp, &m, &opts).unwrap();
            let mut rhs = integrate_quadrature_with(&bp.normal, &rp, &m, &opts).unwrap();
            if let Some(r) = opts.r_max {
                rhs += bp.boundary.eval(r, upsilon_triple(&rp, &m, r));
            }
            assert!((lhs - rhs).abs() <= 1e-6 * lhs.abs(), "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn derivative_integral_consistency() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-5, 1e-3).unwrap();
        for n in [0, 1, 2] {
            let g = term(1.0, n - 3, 2, 0, 0);
            let whole = integrate_quadrature(&g.differentiate().unwrap(), &rp, &m).unwrap();
            let parts = (n - 3) as f64 * integrate_quadrature(&term(1.0, n - 4, 2, 0, 0), &rp, &m).unwrap()
                + 2.0 * integrate_quadrature(&term(1.0, n - 3, 1, 1, 0), &rp, &m).unwrap();
            let scale = integrate_quadrature(&term(1.0, n - 4, 2, 0, 0), &rp, &m).unwrap();
            assert!((whole - parts).abs() < 1e-8 * scale);
            // G vanishes at both ends, so ∫G' = 0
            assert!(whole.abs() < 1e-8 * scale, "n={n}: {whole}");
        }
    }

    #[test]
    fn second_derivative_terms_integrate() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        // ∫ r Υ'' = -∫ Υ' = -1
        let v = integrate_quadrature(&term(1.0, 1, 0, 0, 1), &rp, &m).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
        let direct = upsilon(&rp, &m, 1e-2, 2);
        assert_eq!(direct, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quadrature_is_linear(c1 in -3.0f64..3.0, c2 in -3.0f64..3.0, n in 0i32..3) {
            let m = q2();
            let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
            let e1 = mn_integrand::<f64>(n);
            let e2 = RadialExpression::from_terms(vec![RadialTerm::new(1.0, n - 2, 0, 1, 0).unwrap()]);
            let combined = e1.scale(&c1) + e2.scale(&c2);
            let lhs = integrate_quadrature(&combined, &rp, &m).unwrap();
            let i1 = integrate_quadrature(&e1, &rp, &m).unwrap();
            let i2 = integrate_quadrature(&e2, &rp, &m).unwrap();
            let scale = (c1 * i1).abs() + (c2 * i2).abs();
            prop_assert!((lhs - (c1 * i1 + c2 * i2)).abs() <= 1e-12 * scale);
        }
    }
}
