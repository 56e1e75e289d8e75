//! Closed-form small-`(a, ε)` expansions and least-squares extraction of
//! the same expansions from quadrature sweeps.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::radial::expr::{mn_integrand, Monomial, RadialExpression};
use crate::radial::quad::{integrate_quadrature_with, RadialQuadOptions};
use crate::scalar::{Coefficient, Real};
use crate::upsilon::RegularizationPoint;

pub const MAX_CONDITION: f64 = 1e10;
pub const DEFAULT_FIT_TOL: f64 = 1e-2;

/// `Σ c_{ij} a^i ε^j` over a basis of exponent pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticSeries<T> {
    pub basis: Vec<(i32, i32)>,
    pub coeffs: Vec<T>,
    /// Largest relative residual of the fit; zero for closed forms.
    pub residual: T,
}

impl<T: Real> AsymptoticSeries<T> {
    /// Exact series from `(i, j) → c`, merging repeated exponents.
    pub fn from_terms(terms: impl IntoIterator<Item = ((i32, i32), T)>) -> Self {
        let mut map: BTreeMap<(i32, i32), T> = BTreeMap::new();
        for (k, c) in terms {
            let slot = map.entry(k).or_insert(T::zero());
            *slot = *slot + c;
        }
        let (basis, coeffs) = map.into_iter().filter(|(_, c)| *c != T::zero()).unzip();
        Self { basis, coeffs, residual: T::zero() }
    }

    pub fn zero() -> Self {
        Self { basis: Vec::new(), coeffs: Vec::new(), residual: T::zero() }
    }

    /// Coefficient of `a^i ε^j`, zero if absent.
    pub fn coeff(&self, i: i32, j: i32) -> T {
        self.basis.iter().position(|&b| b == (i, j)).map_or(T::zero(), |k| self.coeffs[k])
    }

    pub fn eval(&self, a: T, epsilon: T) -> T {
        self.basis.iter().zip(&self.coeffs).map(|(&(i, j), &c)| c * a.powi(i) * epsilon.powi(j)).sum()
    }

    pub fn eval_at(&self, rp: &RegularizationPoint<T>) -> T {
        self.eval(rp.a(), rp.epsilon())
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * k).collect(),
            residual: self.residual,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut s = Self::from_terms(self.terms().chain(other.terms()));
        s.residual = self.residual.max(other.residual);
        s
    }

    pub fn terms(&self) -> impl Iterator<Item = ((i32, i32), T)> + '_ {
        self.basis.iter().copied().zip(self.coeffs.iter().copied())
    }
}

fn falling<T: Real>(p: i32, n: u32) -> T {
    (0..n as i32).fold(T::one(), |acc, k| acc * T::of((p - k) as f64))
}

/// Leading behaviour of `∫_0^∞ e dr` as `ε ≪ a → 0`.
///
/// Mixed `Υ^α Υ'` terms and lone `Υ''` terms go through the by-parts normal
/// form first. Then `Υ^α r^p → ∫_a^∞ r^p dr` and
/// `(Υ')^β r^p → Σ_{n<β} M[β,n] (r^p)^{(n)}(a) ε^{n+1-β}`. Positive powers
/// of an outer cutoff are dropped (finite part); the boundary term
/// `G(∞)` contributes only when it tends to a constant.
pub fn integrate_asymptotic<C: Coefficient, T: Real>(
    e: &RadialExpression<C>,
    m: &Mollifier<T>,
) -> Result<AsymptoticSeries<T>> {
    let parts = e.by_parts();
    let mut out: Vec<((i32, i32), T)> = Vec::new();
    for t in parts.normal.terms() {
        let c: T = t.coeff.to_real();
        let Monomial { p, alpha, beta, gamma } = t.mono;
        if gamma > 0 {
            return Err(Error::UnreducibleTerm(format!("Υ'' remains in r^{p}Υ^{alpha}Υ'^{beta}Υ''^{gamma}")));
        }
        match (alpha, beta) {
            (0, 0) => return Err(Error::UnreducibleTerm(format!("bare power r^{p} has no finite radial integral"))),
            (_, 0) => {
                if p == -1 {
                    return Err(Error::UnreducibleTerm(format!("r^-1 Υ^{alpha} integrates to a logarithm")));
                }
                out.push(((p + 1, 0), -c / T::of((p + 1) as f64)));
            }
            (0, _) => {
                for n in 0..beta {
                    let mom = m.moment(beta, n);
                    if mom == T::zero() {
                        continue;
                    }
                    let deriv = falling::<T>(p, n);
                    if deriv == T::zero() {
                        continue;
                    }
                    out.push(((p - n as i32, n as i32 + 1 - beta as i32), c * mom * deriv));
                }
            }
            _ => {
                return Err(Error::UnreducibleTerm(format!("mixed product r^{p}Υ^{alpha}Υ'^{beta} has no closed form")))
            }
        }
    }
    for t in parts.boundary.terms() {
        let Monomial { p, beta, .. } = t.mono;
        if beta == 0 && p == 0 {
            out.push(((0, 0), t.coeff.to_real()));
        }
    }
    Ok(AsymptoticSeries::from_terms(out))
}

/// Coulomb moment `M_n = ∫ r^n E² dr` in units of `e²`, from the field
/// square through [`integrate_asymptotic`].
pub fn mn_moment<T: Real>(n: i32, m: &Mollifier<T>) -> Result<AsymptoticSeries<T>> {
    if n == 3 {
        return Err(Error::SingularCoefficient(3));
    }
    integrate_asymptotic(&mn_integrand::<T>(n), m)
}

/// Quadrature value of `M_n / e²` comparable with [`mn_moment`]: for
/// `n ≥ 4` the integral is cut at `r_max` and its growing part
/// `r_max^{n-3}/(n-3)` is removed.
pub fn mn_quadrature<T: Real>(n: i32, rp: &RegularizationPoint<T>, m: &Mollifier<T>, r_max: T) -> Result<T> {
    if n == 3 {
        return Err(Error::SingularCoefficient(3));
    }
    let e = mn_integrand::<T>(n);
    if n < 3 {
        return integrate_quadrature_with(&e, rp, m, &RadialQuadOptions::default());
    }
    let raw = integrate_quadrature_with(&e, rp, m, &RadialQuadOptions::cutoff(r_max))?;
    let k = T::of((n - 3) as f64);
    Ok(raw - r_max.powi(n - 3) / k)
}

/// Fit basis used for `M_n` sweeps: the two leading terms plus the first
/// `O(ε)` correction.
pub fn mn_fit_basis(n: i32) -> Vec<(i32, i32)> {
    vec![(n - 3, 0), (n - 2, -1), (n - 4, 1)]
}

fn decades(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi / lo).log10()
}

/// Weighted least squares over `a^i ε^j`, each sample weighted by
/// `1/|value|`. The condition number is that of the column-equilibrated
/// weighted design matrix.
pub fn fit_asymptotics<T: Real>(
    samples: &[(RegularizationPoint<T>, T)],
    basis: &[(i32, i32)],
) -> Result<AsymptoticSeries<T>> {
    if basis.is_empty() {
        return Err(Error::InvalidParameter("empty fit basis".into()));
    }
    if samples.len() < 2 * basis.len() {
        return Err(Error::InsufficientSamples(format!(
            "{} samples for {} basis functions; need at least {}",
            samples.len(),
            basis.len(),
            2 * basis.len()
        )));
    }
    let eps: Vec<f64> = samples.iter().map(|s| s.0.epsilon().to_f64().unwrap()).collect();
    let a: Vec<f64> = samples.iter().map(|s| s.0.a().to_f64().unwrap()).collect();
    let vals: Vec<f64> = samples.iter().map(|s| s.1.to_f64().unwrap()).collect();
    if vals.iter().any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::InsufficientSamples("sample values must be finite and nonzero".into()));
    }
    if basis.iter().any(|b| b.1 != 0) && decades(eps.iter().copied()) < 2.0 - 1e-9 {
        return Err(Error::InsufficientSamples("samples span less than two decades in eps".into()));
    }
    if basis.iter().any(|b| b.0 != 0) && decades(a.iter().copied()) < 2.0 - 1e-9 {
        return Err(Error::InsufficientSamples("samples span less than two decades in a".into()));
    }

    let rows = samples.len();
    let cols = basis.len();
    let mut design = DMatrix::<f64>::zeros(rows, cols);
    let mut rhs = DVector::<f64>::zeros(rows);
    for r in 0..rows {
        let w = 1.0 / vals[r].abs();
        for (c, &(i, j)) in basis.iter().enumerate() {
            design[(r, c)] = w * a[r].powi(i) * eps[r].powi(j);
        }
        rhs[r] = vals[r] * w;
    }
    let norms: Vec<f64> = (0..cols).map(|c| design.column(c).norm()).collect();
    if norms.iter().any(|n| *n == 0.0 || !n.is_finite()) {
        return Err(Error::IllConditionedFit(f64::INFINITY));
    }
    for (c, n) in norms.iter().enumerate() {
        design.column_mut(c).scale_mut(1.0 / n);
    }
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if cond > MAX_CONDITION {
        return Err(Error::IllConditionedFit(cond));
    }
    let scaled = svd.solve(&rhs, 0.0).map_err(|_| Error::IllConditionedFit(cond))?;
    let coeffs: Vec<f64> = scaled.iter().zip(&norms).map(|(x, n)| x / n).collect();

    let residual = (0..rows)
        .map(|r| {
            let fit: f64 = basis.iter().zip(&coeffs).map(|(&(i, j), c)| c * a[r].powi(i) * eps[r].powi(j)).sum();
            ((fit - vals[r]) / vals[r]).abs()
        })
        .fold(0.0, f64::max);
    Ok(AsymptoticSeries {
        basis: basis.to_vec(),
        coeffs: coeffs.into_iter().map(T::of).collect(),
        residual: T::of(residual),
    })
}

/// The standard sweep: `a ∈ {1e-1, 3.16e-2, 1e-2, 3.16e-3, 1e-3}` and
/// `ε/a ∈ {1e-2, 3e-3, 1e-3}`.
pub fn default_sweep<T: Real>() -> Vec<RegularizationPoint<T>> {
    let mut out = Vec::new();
    for k in 0..5 {
        let a = 10f64.powf(-1.0 - 0.5 * k as f64);
        for ratio in [1e-2, 3e-3, 1e-3] {
            out.push(RegularizationPoint::new(T::of(ratio * a), T::of(a)).expect("default sweep is valid"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::expr::RadialTerm;
    use crate::radial::quad::integrate_quadrature;
    use num_rational::Rational64;

    fn q2() -> Mollifier<f64> {
        Mollifier::build(2).unwrap()
    }

    /// Transcribed `M_n = (n-2)/(3-n) a^{n-3} + M[2,0] a^{n-2}/ε`.
    fn mn_formula(n: i32, m20: f64, a: f64, eps: f64) -> f64 {
        (n - 2) as f64 / (3 - n) as f64 * a.powi(n - 3) + m20 * a.powi(n - 2) / eps
    }

    #[test]
    fn m2_series_has_no_cutoff_dependence() {
        let m = q2();
        let s = mn_moment(2, &m).unwrap();
        assert_eq!(s.basis, vec![(0, -1)]);
        assert_eq!(s.coeff(0, -1), m.moment(2, 0));
    }

    #[test]
    fn m1_series() {
        let m = q2();
        let s = mn_moment(1, &m).unwrap();
        assert_eq!(s.coeff(-1, -1), m.moment(2, 0));
        assert_eq!(s.coeff(-2, 0), -0.5);
        assert_eq!(s.basis.len(), 2);
    }

    #[test]
    fn mn_series_reproduces_formula() {
        let m = q2();
        let m20 = m.moment(2, 0);
        for n in [-1, 0, 1, 2, 4, 5] {
            let s = mn_moment(n, &m).unwrap();
            for (a, eps) in [(1e-1, 1e-3), (1e-2, 1e-5)] {
                let f = mn_formula(n, m20, a, eps);
                assert!((s.eval(a, eps) - f).abs() < 1e-12 * f.abs(), "n={n}");
            }
        }
        assert_eq!(mn_moment(3, &m), Err(Error::SingularCoefficient(3)));
    }

    #[test]
    fn simple_closed_forms() {
        let m = q2();
        let s = integrate_asymptotic(&RadialExpression::<f64>::term(1.0, -2, 2, 0, 0).unwrap(), &m).unwrap();
        assert_eq!(s.basis, vec![(-1, 0)]);
        assert_eq!(s.coeff(-1, 0), 1.0);
        let exact =
            integrate_asymptotic(&RadialExpression::term(Rational64::new(1, 3), -3, 1, 1, 0).unwrap(), &m).unwrap();
        // (1/3)∫r^-3 ΥΥ' = (1/3)(3/2)∫r^-4 Υ² = (1/2)(1/3)a^-3
        assert!((exact.coeff(-3, 0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn unreducible_terms() {
        let m = q2();
        for (p, a, b, g) in [(0, 0, 0, 2), (0, 1, 2, 0), (-1, 2, 0, 0), (2, 0, 0, 0)] {
            let e = RadialExpression::<f64>::term(1.0, p, a, b, g).unwrap();
            assert!(matches!(integrate_asymptotic(&e, &m), Err(Error::UnreducibleTerm(_))), "{e}");
        }
    }

    #[test]
    fn sifting_and_higher_powers_of_the_derivative() {
        let m = q2();
        let e = RadialExpression::<f64>::term(1.0, 2, 0, 1, 0).unwrap();
        let s = integrate_asymptotic(&e, &m).unwrap();
        assert_eq!(s.basis, vec![(2, 0)]);
        let cube = RadialExpression::<f64>::term(1.0, 2, 0, 3, 0).unwrap();
        let s = integrate_asymptotic(&cube, &m).unwrap();
        assert_eq!(s.coeff(2, -2), m.moment(3, 0));
        assert_eq!(s.coeff(0, 0), 2.0 * m.moment(3, 2));
    }

    #[test]
    fn oracle_agreement_over_the_sweep() {
        let m = q2();
        for n in [0, 1, 2, 4, 5] {
            let series = mn_moment(n, &m).unwrap();
            for rp in default_sweep::<f64>() {
                let q = mn_quadrature(n, &rp, &m, 1.0).unwrap();
                let s = series.eval_at(&rp);
                let tol = 3.0 * (rp.ratio() + rp.a());
                assert!((q - s).abs() <= tol * s.abs(), "n={n} rp={rp:?}: {q} vs {s}");
            }
        }
    }

    #[test]
    fn fit_recovers_constant() {
        let rp = RegularizationPoint::<f64>::new(1e-4, 1e-2).unwrap();
        let s = fit_asymptotics(&[(rp, 5.0), (rp, 5.0)], &[(0, 0)]).unwrap();
        assert!((s.coeff(0, 0) - 5.0).abs() < 1e-14);
        assert!(s.residual < 1e-14);
    }

    #[test]
    fn fit_of_m2_sweep() {
        let m = q2();
        let samples: Vec<_> =
            default_sweep().into_iter().map(|rp| (rp, mn_quadrature(2, &rp, &m, 1.0).unwrap())).collect();
        let s = fit_asymptotics(&samples, &[(0, -1), (0, 0)]).unwrap();
        assert!((s.coeff(0, -1) - m.moment(2, 0)).abs() < 1e-2 * m.moment(2, 0));
    }

    #[test]
    fn fit_of_m1_sweep() {
        let m = q2();
        let samples: Vec<_> =
            default_sweep().into_iter().map(|rp| (rp, mn_quadrature(1, &rp, &m, 1.0).unwrap())).collect();
        let s = fit_asymptotics(&samples, &[(-1, -1), (-2, 0)]).unwrap();
        assert!((s.coeff(-1, -1) - m.moment(2, 0)).abs() < 2e-2 * m.moment(2, 0));
        assert!((s.coeff(-2, 0) + 0.5).abs() < 2e-2 * 0.5, "{s:?}");
    }

    #[test]
    fn fit_rejects_degenerate_designs() {
        let samples: Vec<_> = default_sweep::<f64>().into_iter().map(|rp| (rp, 1.0 + rp.a())).collect();
        // a^0 ε^0 listed twice is exactly collinear
        assert!(matches!(fit_asymptotics(&samples, &[(0, 0), (0, 0)]), Err(Error::IllConditionedFit(_))));
        assert!(matches!(fit_asymptotics(&samples[..3], &[(0, 0), (1, 0)]), Err(Error::InsufficientSamples(_))));
        let narrow: Vec<_> =
            (0..6).map(|k| (RegularizationPoint::new(1e-5 * (1.0 + k as f64), 1e-2).unwrap(), 1.0)).collect();
        assert!(matches!(fit_asymptotics(&narrow, &[(0, -1), (0, 0)]), Err(Error::InsufficientSamples(_))));
    }

    #[test]
    fn series_arithmetic() {
        let s = AsymptoticSeries::from_terms([((0, -1), 2.0), ((1, 0), 1.0)]);
        let t = AsymptoticSeries::from_terms([((0, -1), -2.0), ((2, 0), 3.0)]);
        let sum = s.add(&t);
        assert_eq!(sum.basis, vec![(1, 0), (2, 0)]);
        assert_eq!(s.scale(2.0).coeff(1, 0), 2.0);
        assert_eq!(s.eval(0.5, 0.25), 2.0 / 0.25 + 0.5);
    }

    #[test]
    fn pure_step_term_against_quadrature() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-5, 1e-2).unwrap();
        let e = RadialExpression::from_terms(vec![RadialTerm::new(1.0, -3, 2, 0, 0).unwrap()]);
        let q = integrate_quadrature(&e, &rp, &m).unwrap();
        let s = integrate_asymptotic(&e, &m).unwrap().eval_at(&rp);
        assert!((q - s).abs() < 3e-3 * s);
    }
}
