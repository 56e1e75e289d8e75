//! The smoothed step `Υ` and its derivatives at a finite regularization
//! point, the mollified Coulomb sequences, and association checks against
//! compactly supported test functions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mollifier::Mollifier;
use crate::quadrature::{integrate_pieces, QuadConfig};
use crate::scalar::Real;

pub const DEFAULT_RATIO_MAX: f64 = 1e-2;
pub const DEFAULT_ASSOC_TOL: f64 = 1e-6;

/// Regularization width `ε` and radial cutoff `a`, with `ε ≪ a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularizationPoint<T> {
    epsilon: T,
    a: T,
}

impl<T: Real> RegularizationPoint<T> {
    /// `0 < ε < a < 1` and `ε/a ≤ 1e-2`.
    pub fn new(epsilon: T, a: T) -> Result<Self> {
        Self::with_ratio_max(epsilon, a, T::of(DEFAULT_RATIO_MAX))
    }

    pub fn with_ratio_max(epsilon: T, a: T, ratio_max: T) -> Result<Self> {
        let rp = Self::physical(epsilon, a)?;
        if a >= T::one() {
            return Err(Error::InvalidRegularization(format!("cutoff a={a} must be below 1")));
        }
        // slack so that grids built as a = ε / ratio_max are accepted
        if epsilon / a > ratio_max * (T::one() + T::of(64.0) * T::epsilon()) {
            return Err(Error::InvalidRegularization(format!(
                "ratio eps/a={:e} exceeds ratio_max={ratio_max:e}",
                epsilon / a
            )));
        }
        Ok(rp)
    }

    /// Only `0 < ε < a`; lengths in physical units may exceed 1.
    pub fn physical(epsilon: T, a: T) -> Result<Self> {
        let finite = epsilon.is_finite() && a.is_finite();
        if !finite || epsilon <= T::zero() || epsilon >= a {
            return Err(Error::InvalidRegularization(format!("need 0 < eps < a, got eps={epsilon}, a={a}")));
        }
        Ok(Self { epsilon, a })
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn ratio(&self) -> T {
        self.epsilon / self.a
    }

    /// Mollifier argument `(a - r)/ε`.
    pub fn argument(&self, r: T) -> T {
        (self.a - r) / self.epsilon
    }

    /// Radii where `Υ` stops being constant: `a ∓ Zε`, clipped at 0.
    pub fn transition(&self, m: &Mollifier<T>) -> (T, T) {
        let w = m.support() * self.epsilon;
        ((self.a - w).max(T::zero()), self.a + w)
    }
}

/// `Υ^{(deriv)}(r)` for `deriv ∈ {0, 1, 2}`.
///
/// # Panics
/// If `deriv > 2`.
pub fn upsilon<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, r: T, deriv: u8) -> T {
    let s = rp.argument(r);
    match deriv {
        0 => m.tail(s),
        1 => m.eval(s) / rp.epsilon,
        2 => -m.eval_derivative(s) / (rp.epsilon * rp.epsilon),
        _ => panic!("Upsilon derivative order {deriv} is not supported"),
    }
}

/// `Υ`, `Υ'`, `Υ''` at one radius.
pub fn upsilon_triple<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, r: T) -> [T; 3] {
    [upsilon(rp, m, r, 0), upsilon(rp, m, r, 1), upsilon(rp, m, r, 2)]
}

fn kernel_cfg<T: Real>() -> QuadConfig<T> {
    QuadConfig { abs_tol: T::of(1e-300), rel_tol: T::of(1e-13), max_subdivisions: 400 }
}

/// `e ∫_{(a-r)/ε}^{Z} η(y)/(r + εy)^k dy` for raw `(ε, a)`.
fn coulomb_kernel<T: Real>(epsilon: T, a: T, m: &Mollifier<T>, r: T, k: i32) -> Result<T> {
    let lower = (a - r) / epsilon;
    let pole = -r / epsilon;
    if a <= T::zero() || pole >= lower {
        return Err(Error::PoleInDomain { a: a.to_f64().unwrap_or(f64::NAN) });
    }
    let z = m.support();
    if lower >= z {
        return Ok(T::zero());
    }
    let lo = lower.max(-z);
    let mut points = vec![lo];
    if lo < T::zero() {
        points.push(T::zero());
    }
    points.push(z);
    let f = |y: T| m.eval(y) / (r + epsilon * y).powi(k);
    Ok(integrate_pieces(f, &points, &kernel_cfg()).value)
}

/// Mollified Coulomb potential `e ∫_{(a-r)/ε}^∞ η(y)/(r + εy) dy` for raw
/// `(ε, a)`. The pole `y = -r/ε` lies outside the range iff `a > 0`.
pub fn coulomb_potential_sequence<T: Real>(epsilon: T, a: T, m: &Mollifier<T>, r: T, e: T) -> Result<T> {
    if epsilon <= T::zero() || r < T::zero() {
        return Err(Error::InvalidRegularization(format!("need eps > 0 and r >= 0, got eps={epsilon}, r={r}")));
    }
    Ok(e * coulomb_kernel(epsilon, a, m, r, 1)?)
}

pub fn embed_coulomb_potential<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, r: T, e: T) -> Result<T> {
    coulomb_potential_sequence(rp.epsilon, rp.a, m, r, e)
}

/// Radial component of `-∇φ_ε`, differentiated under the integral sign.
pub fn embed_coulomb_field<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, r: T, e: T) -> Result<T> {
    let j2 = coulomb_kernel(rp.epsilon, rp.a, m, r, 2)?;
    Ok(e * (j2 - m.eval(rp.argument(r)) / (rp.epsilon * rp.a)))
}

/// `∇·E_ε / 4π` expanded term by term from the mollified potential. Only a
/// cross-check for the compact `Υ''` form.
pub fn raw_charge_density<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, r: T, e: T) -> Result<T> {
    let (eps, a) = (rp.epsilon, rp.a);
    let j2 = coulomb_kernel(eps, a, m, r, 2)?;
    let j3 = coulomb_kernel(eps, a, m, r, 3)?;
    let s = rp.argument(r);
    let (eta, deta) = (m.eval(s), m.eval_derivative(s));
    let two = T::of(2.0);
    let div = two * j2 / r - two * eta / (eps * a * r) + eta / (eps * a * a) - two * j3 + deta / (eps * eps * a);
    Ok(e * div / (T::of(4.0) * T::PI()))
}

/// Compactly supported radial test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `exp(-1/(1 - (r/R)²))` on `r < R`.
    Bump { radius: f64 },
    /// `cos(k r)·(1 - (r/R)²)^6` on `r < R`; five times continuously differentiable.
    WindowedCosine { radius: f64, wavenumber: f64 },
}

impl TestFunction {
    pub fn radius(&self) -> f64 {
        match *self {
            TestFunction::Bump { radius } | TestFunction::WindowedCosine { radius, .. } => radius,
        }
    }

    pub fn eval<T: Real>(&self, r: T) -> T {
        let radius = T::of(self.radius());
        let x = r / radius;
        let w = T::one() - x * x;
        if w <= T::zero() {
            return T::zero();
        }
        match *self {
            TestFunction::Bump { .. } => (-T::one() / w).exp(),
            TestFunction::WindowedCosine { wavenumber, .. } => (T::of(wavenumber) * r).cos() * w.powi(6),
        }
    }

    /// Bumps with `R ∈ {1, 2, 5}` and windowed cosines with `R ∈ {1, 5}`.
    pub fn bank() -> Vec<TestFunction> {
        vec![
            TestFunction::Bump { radius: 1.0 },
            TestFunction::Bump { radius: 2.0 },
            TestFunction::Bump { radius: 5.0 },
            TestFunction::WindowedCosine { radius: 1.0, wavenumber: 2.0 },
            TestFunction::WindowedCosine { radius: 5.0, wavenumber: 1.0 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    /// Plain `dr` on `[0, ∞)`.
    Line,
    /// `4π r² dr`, a radial function on R³.
    Spherical,
}

/// Distribution the sequence is compared against.
pub enum Shadow<'f, T> {
    /// Locally integrable density.
    Density(&'f (dyn Fn(T) -> T + Sync)),
    /// `weight·δ` at the origin, acting as `weight·T(0)`.
    Dirac {
        weight: T,
    },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// Decreasing, but still above tolerance at the finest point.
    Decaying,
    NonConvergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub epsilon: Vec<f64>,
    pub a: Vec<f64>,
    /// `I = ∫(g - shadow)·T` at each schedule point.
    pub values: Vec<f64>,
    /// `|I| / scale`.
    pub relative: Vec<f64>,
    /// `|⟨shadow, T⟩|`, or `|⟨g, T⟩|` at the coarsest point when the shadow is zero.
    pub scale: f64,
    /// Least-squares slope of `log|I|` against `log ε`; positive means decay.
    pub order: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// `ε = 10^{-3} … 10^{-9}` by decades, with `a = 100 ε`.
pub fn default_schedule<T: Real>() -> Vec<RegularizationPoint<T>> {
    (3..=9)
        .map(|k| {
            let eps = T::of(10f64.powi(-k));
            RegularizationPoint::new(eps, eps * T::of(100.0)).expect("default schedule is valid")
        })
        .collect()
}

/// Fixed `ε`, decreasing cutoffs `a`.
pub fn a_sweep_schedule<T: Real>(epsilon: T, a_values: &[T]) -> Result<Vec<RegularizationPoint<T>>> {
    a_values.iter().map(|&a| RegularizationPoint::new(epsilon, a)).collect()
}

fn breakpoints<T: Real>(rp: &RegularizationPoint<T>, m: &Mollifier<T>, radius: T) -> Vec<T> {
    let (lo, hi) = rp.transition(m);
    let mut pts = vec![T::zero(), lo, rp.a, hi, radius];
    pts.retain(|&p| p >= T::zero() && p <= radius);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup();
    pts
}

fn assoc_cfg<T: Real>() -> QuadConfig<T> {
    QuadConfig { abs_tol: T::of(1e-300), rel_tol: T::of(1e-12), max_subdivisions: 1000 }
}

/// `∫ f·T` over the test function's support in the chosen measure.
pub fn pair_with_test<T: Real, F: Fn(T) -> T>(
    f: F,
    test: &TestFunction,
    measure: Measure,
    rp: &RegularizationPoint<T>,
    m: &Mollifier<T>,
) -> T {
    let radius = T::of(test.radius());
    let four_pi = T::of(4.0) * T::PI();
    let integrand = |r: T| {
        let w = match measure {
            Measure::Line => T::one(),
            Measure::Spherical => four_pi * r * r,
        };
        w * f(r) * test.eval(r)
    };
    integrate_pieces(integrand, &breakpoints(rp, m, radius), &assoc_cfg()).value
}

fn decay_order(eps: &[f64], values: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        eps.iter().zip(values).filter(|(_, v)| v.abs() > 0.0).map(|(e, v)| (e.ln(), v.abs().ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Evaluates `I(rp) = ∫(g - shadow)·T` along the schedule and classifies it.
/// Schedule points are evaluated in parallel; the report keeps their order.
#[allow(clippy::too_many_arguments)]
pub fn association_report<T, G>(
    g: G,
    shadow: &Shadow<'_, T>,
    test: &TestFunction,
    measure: Measure,
    schedule: &[RegularizationPoint<T>],
    m: &Mollifier<T>,
    tolerance: f64,
) -> Result<ConvergenceReport>
where
    T: Real,
    G: Fn(&RegularizationPoint<T>, T) -> T + Sync,
{
    if schedule.len() < 3 {
        return Err(Error::InvalidParameter("association schedule needs at least three points".into()));
    }
    if schedule.windows(2).any(|w| w[1].epsilon >= w[0].epsilon || w[1].a > w[0].a) {
        return Err(Error::InvalidParameter("schedule must have decreasing eps and non-increasing a".into()));
    }
    let rows: Vec<(f64, f64)> = schedule
        .par_iter()
        .map(|rp| {
            let diff = |r: T| {
                let s = match shadow {
                    Shadow::Density(h) => h(r),
                    _ => T::zero(),
                };
                g(rp, r) - s
            };
            let mut value = pair_with_test(diff, test, measure, rp, m);
            if let Shadow::Dirac { weight } = shadow {
                value = value - *weight * test.eval(T::zero());
            }
            let paired = pair_with_test(|r| g(rp, r), test, measure, rp, m);
            (value.to_f64().unwrap(), paired.to_f64().unwrap())
        })
        .collect();

    let scale = match shadow {
        Shadow::Zero => rows[0].1.abs(),
        Shadow::Dirac { weight } => (*weight * test.eval(T::zero())).abs().to_f64().unwrap(),
        // ⟨shadow, T⟩ = ⟨g, T⟩ - I
        Shadow::Density(_) => (rows[rows.len() - 1].1 - rows[rows.len() - 1].0).abs(),
    };
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let relative: Vec<f64> = values.iter().map(|v| v.abs() / scale).collect();
    let epsilon: Vec<f64> = schedule.iter().map(|rp| rp.epsilon.to_f64().unwrap()).collect();
    let a: Vec<f64> = schedule.iter().map(|rp| rp.a.to_f64().unwrap()).collect();
    let order = decay_order(&epsilon, &values);

    let n = values.len();
    let decreasing = |i: usize| values[i].abs() < values[i - 1].abs();
    let verdict = if !(decreasing(n - 1) && decreasing(n - 2)) {
        Verdict::NonConvergent
    } else if (1..n).all(decreasing) && relative[n - 1] < tolerance {
        Verdict::Pass
    } else {
        Verdict::Decaying
    };
    Ok(ConvergenceReport { epsilon, a, values, relative, scale, order, tolerance, verdict })
}

/// Like [`association_report`], but a non-decreasing tail is an error.
#[allow(clippy::too_many_arguments)]
pub fn association_check<T, G>(
    g: G,
    shadow: &Shadow<'_, T>,
    test: &TestFunction,
    measure: Measure,
    schedule: &[RegularizationPoint<T>],
    m: &Mollifier<T>,
    tolerance: f64,
) -> Result<ConvergenceReport>
where
    T: Real,
    G: Fn(&RegularizationPoint<T>, T) -> T + Sync,
{
    let report = association_report(g, shadow, test, measure, schedule, m, tolerance)?;
    if report.verdict == Verdict::NonConvergent {
        return Err(Error::NonConvergent { values: report.values, order: report.order });
    }
    Ok(report)
}

/// The three distributional limits studied by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationCase {
    /// `e(r^{-2}Υ - r^{-1}Υ')` against `e/r²` for `r > a`.
    CoulombField,
    /// `-(e/4π) r^{-1}Υ''` against `e δ³`.
    ChargeDensity,
    /// `(Υ')²/M[2,0]` against zero; has no shadow.
    DeltaSquared,
}

impl AssociationCase {
    pub const ALL: [AssociationCase; 3] =
        [AssociationCase::CoulombField, AssociationCase::ChargeDensity, AssociationCase::DeltaSquared];

    pub fn name(&self) -> &'static str {
        match self {
            AssociationCase::CoulombField => "coulomb-field",
            AssociationCase::ChargeDensity => "charge-density",
            AssociationCase::DeltaSquared => "delta-squared",
        }
    }

    /// Runs the case; `e` is the charge.
    pub fn report<T: Real>(
        &self,
        m: &Mollifier<T>,
        test: &TestFunction,
        schedule: &[RegularizationPoint<T>],
        e: T,
        tolerance: f64,
    ) -> Result<ConvergenceReport> {
        let four_pi = T::of(4.0) * T::PI();
        match self {
            AssociationCase::CoulombField => {
                let g = |rp: &RegularizationPoint<T>, r: T| {
                    let [u0, u1, _] = upsilon_triple(rp, m, r);
                    e * (u0 / (r * r) - u1 / r)
                };
                // the shadow's cutoff follows the schedule's a; it is folded into g
                let g_minus = |rp: &RegularizationPoint<T>, r: T| {
                    let classical = if r > rp.a { e / (r * r) } else { T::zero() };
                    g(rp, r) - classical
                };
                let mut report =
                    association_report(g_minus, &Shadow::Zero, test, Measure::Spherical, schedule, m, tolerance)?;
                // scale against the classical pairing 4πe∫T dr, not the residual itself
                let finest = schedule[schedule.len() - 1];
                let classical = pair_with_test(
                    |r: T| if r > finest.a { e / (r * r) } else { T::zero() },
                    test,
                    Measure::Spherical,
                    &finest,
                    m,
                );
                rescale(&mut report, classical.abs().to_f64().unwrap());
                Ok(report)
            }
            AssociationCase::ChargeDensity => {
                let g = |rp: &RegularizationPoint<T>, r: T| -e / four_pi * upsilon(rp, m, r, 2) / r;
                association_report(g, &Shadow::Dirac { weight: e }, test, Measure::Spherical, schedule, m, tolerance)
            }
            AssociationCase::DeltaSquared => {
                let m20 = m.moment(2, 0);
                let g = |rp: &RegularizationPoint<T>, r: T| {
                    let d = upsilon(rp, m, r, 1);
                    d * d / m20
                };
                association_report(g, &Shadow::Zero, test, Measure::Line, schedule, m, tolerance)
            }
        }
    }
}

fn rescale(report: &mut ConvergenceReport, scale: f64) {
    report.scale = scale;
    report.relative = report.values.iter().map(|v| v.abs() / scale).collect();
    let n = report.values.len();
    if report.verdict != Verdict::NonConvergent {
        let monotone = report.values.windows(2).all(|w| w[1].abs() < w[0].abs());
        report.verdict =
            if monotone && report.relative[n - 1] < report.tolerance { Verdict::Pass } else { Verdict::Decaying };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q2() -> Mollifier<f64> {
        Mollifier::build(2).unwrap()
    }

    #[test]
    fn regularization_point_validation() {
        assert!(RegularizationPoint::new(1e-4, 1e-2).is_ok());
        assert!(RegularizationPoint::new(1e-3, 1e-2).is_err());
        assert!(RegularizationPoint::new(1e-3, 1.5).is_err());
        assert!(RegularizationPoint::new(0.0, 1e-2).is_err());
        assert!(RegularizationPoint::new(-1e-4, 1e-2).is_err());
        assert!(RegularizationPoint::with_ratio_max(1e-3, 1e-2, 0.2).is_ok());
        assert!(RegularizationPoint::physical(3e-3, 0.35).is_ok());
        assert!(RegularizationPoint::physical(0.5, 2.0).is_ok());
        assert!(RegularizationPoint::physical(2.0, 0.5).is_err());
    }

    #[test]
    fn point_values() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        assert!(upsilon(&rp, &m, 0.0, 0) < 1e-12);
        assert!((upsilon(&rp, &m, 2e-2, 0) - 1.0).abs() < 1e-12);
        assert!((upsilon(&rp, &m, 1e-2, 1) - m.eval(0.0) / 1e-4).abs() < 1e-9);
        assert!((upsilon(&rp, &m, 1e-2, 0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        let h = 1e-8;
        for r in [1e-2, 1e-2 - 7e-5, 1e-2 + 1.3e-4] {
            let d0 = (upsilon(&rp, &m, r + h, 0) - upsilon(&rp, &m, r - h, 0)) / (2.0 * h);
            let d1 = upsilon(&rp, &m, r, 1);
            assert!((d0 - d1).abs() <= 1e-6 * d1.abs().max(1.0), "r={r}: {d0} vs {d1}");
            let f1 = (upsilon(&rp, &m, r + h, 1) - upsilon(&rp, &m, r - h, 1)) / (2.0 * h);
            let d2 = upsilon(&rp, &m, r, 2);
            assert!((f1 - d2).abs() <= 1e-6 * d2.abs().max(1e4), "r={r}: {f1} vs {d2}");
        }
    }

    proptest! {
        #[test]
        fn upsilon_stays_near_unit_interval(r in 0.0f64..0.05, ratio in 1e-4f64..1e-2) {
            let m = q2();
            let rp = RegularizationPoint::new(ratio * 1e-2, 1e-2).unwrap();
            let v = upsilon(&rp, &m, r, 0);
            prop_assert!((-0.2..=1.2).contains(&v));
        }

        #[test]
        fn endpoint_values_within_ratio_power(k in 2.0f64..4.0) {
            let m = q2();
            let ratio = 10f64.powf(-k);
            let rp = RegularizationPoint::new(ratio * 0.1, 0.1).unwrap();
            let bound = ratio.powi(4);
            prop_assert!(upsilon(&rp, &m, 0.0, 0).abs() < bound);
            prop_assert!((upsilon(&rp, &m, 0.2, 0) - 1.0).abs() < bound);
        }
    }

    #[test]
    fn coulomb_potential_limits() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-5, 1e-2).unwrap();
        let e = 1.0;
        let far = embed_coulomb_potential(&rp, &m, 0.1, e).unwrap();
        assert!((far - 10.0).abs() / 10.0 < 1e-8);
        let inside = embed_coulomb_potential(&rp, &m, 5e-3, e).unwrap();
        assert!(inside.abs() < 1e-10 * e / 1e-2);
        let ups = e / 0.1 * upsilon(&rp, &m, 0.1, 0);
        assert!((far - ups).abs() / ups < 1e-6);
    }

    #[test]
    fn coulomb_potential_near_cutoff_matches_upsilon_form() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-5, 1e-2).unwrap();
        for r in [1e-2 - 2e-5, 1e-2, 1e-2 + 3e-5] {
            let raw = embed_coulomb_potential(&rp, &m, r, 1.0).unwrap();
            let ups = upsilon(&rp, &m, r, 0) / r;
            // the two embeddings differ by O(ε/a) relative
            assert!((raw - ups).abs() < 2e-3 * (1.0 / r), "r={r}: {raw} vs {ups}");
        }
    }

    #[test]
    fn pole_in_domain_is_rejected() {
        let m = q2();
        assert!(matches!(coulomb_potential_sequence(1e-4, 0.0, &m, 0.5, 1.0), Err(Error::PoleInDomain { .. })));
        assert!(matches!(coulomb_potential_sequence(1e-4, -1e-2, &m, 0.5, 1.0), Err(Error::PoleInDomain { .. })));
        assert!(coulomb_potential_sequence(1e-4, 1e-2, &m, 0.0, 1.0).is_ok());
    }

    #[test]
    fn mollified_field_is_minus_gradient_of_potential() {
        let m = q2();
        let rp = RegularizationPoint::new(1e-4, 1e-2).unwrap();
        let h = 1e-7;
        for r in [9.8e-3, 1e-2, 1.03e-2, 2e-2] {
            let fd = -(embed_coulomb_potential(&rp, &m, r + h, 1.0).unwrap()
                - embed_coulomb_potential(&rp, &m, r - h, 1.0).unwrap())
                / (2.0 * h);
            let field = embed_coulomb_field(&rp, &m, r, 1.0).unwrap();
            assert!((fd - field).abs() < 1e-5 * field.abs().max(1e4), "r={r}: {fd} vs {field}");
        }
    }

    #[test]
    fn raw_and_compact_charge_densities_share_their_shadow() {
        let m = q2();
        let test = TestFunction::Bump { radius: 1.0 };
        let e = 1.0;
        let mut last_gap = f64::INFINITY;
        for k in [2, 3] {
            let eps = 10f64.powi(-k - 2);
            let rp = RegularizationPoint::new(eps, eps * 100.0).unwrap();
            let raw =
                pair_with_test(|r| raw_charge_density(&rp, &m, r, e).unwrap(), &test, Measure::Spherical, &rp, &m);
            let compact = pair_with_test(
                |r| -e / (4.0 * std::f64::consts::PI) * upsilon(&rp, &m, r, 2) / r,
                &test,
                Measure::Spherical,
                &rp,
                &m,
            );
            let target = e * test.eval(0.0);
            assert!((raw - target).abs() < 1e-2 * target, "raw {raw} vs {target}");
            assert!((compact - target).abs() < 1e-2 * target);
            let gap = (raw - compact).abs();
            assert!(gap < last_gap);
            last_gap = gap;
        }
    }

    #[test]
    fn test_functions_vanish_outside_support() {
        for t in TestFunction::bank() {
            assert_eq!(t.eval(t.radius() * 1.0001), 0.0);
            assert!(t.eval(0.0f64) > 0.0);
        }
    }

    #[test]
    fn coulomb_field_associates_with_classical_field() {
        let m = q2();
        let report = AssociationCase::CoulombField
            .report(&m, &TestFunction::Bump { radius: 1.0 }, &default_schedule(), 1.0, DEFAULT_ASSOC_TOL)
            .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        assert!((report.order - 1.0).abs() < 0.1, "{report:?}");
    }

    #[test]
    fn charge_density_associates_with_point_charge() {
        let m = q2();
        let report = AssociationCase::ChargeDensity
            .report(&m, &TestFunction::Bump { radius: 1.0 }, &default_schedule(), 1.0, DEFAULT_ASSOC_TOL)
            .unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{report:?}");
        assert!(report.order > 1.5, "{report:?}");
    }

    #[test]
    fn delta_squared_has_no_shadow() {
        let m = q2();
        let test = TestFunction::Bump { radius: 1.0 };
        let report =
            AssociationCase::DeltaSquared.report(&m, &test, &default_schedule(), 1.0, DEFAULT_ASSOC_TOL).unwrap();
        assert_eq!(report.verdict, Verdict::NonConvergent);
        assert!((report.order + 1.0).abs() < 0.05, "{report:?}");
        // ε·I → T(a)
        let n = report.values.len();
        let t_a = test.eval(report.a[n - 1]);
        assert!((report.values[n - 1] * report.epsilon[n - 1] - t_a).abs() < 1e-3 * t_a);

        let check = association_check(
            |rp: &RegularizationPoint<f64>, r| upsilon(rp, &m, r, 1).powi(2),
            &Shadow::Zero,
            &test,
            Measure::Line,
            &default_schedule(),
            &m,
            DEFAULT_ASSOC_TOL,
        );
        assert!(matches!(check, Err(Error::NonConvergent { .. })));
    }

    #[test]
    fn density_shadow_pairs_inside_the_integral() {
        let m = q2();
        let shadow_fn = |r: f64| r * r;
        let report = association_report(
            |_: &RegularizationPoint<f64>, r| r * r,
            &Shadow::Density(&shadow_fn),
            &TestFunction::Bump { radius: 2.0 },
            Measure::Line,
            &default_schedule(),
            &m,
            DEFAULT_ASSOC_TOL,
        )
        .unwrap();
        assert!(report.values.iter().all(|v| *v == 0.0));
        assert!(report.scale > 0.0);
    }

    #[test]
    fn schedule_must_be_ordered() {
        let m = q2();
        let mut sched = default_schedule::<f64>();
        sched.reverse();
        let r = association_report(
            |_: &RegularizationPoint<f64>, _| 1.0,
            &Shadow::Zero,
            &TestFunction::Bump { radius: 1.0 },
            Measure::Line,
            &sched,
            &m,
            DEFAULT_ASSOC_TOL,
        );
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn a_sweep_schedule_validates() {
        assert!(a_sweep_schedule(1e-5, &[1e-1, 1e-2, 1e-3]).is_ok());
        assert!(a_sweep_schedule(1e-5, &[1e-1, 1e-4]).is_err());
    }
}
