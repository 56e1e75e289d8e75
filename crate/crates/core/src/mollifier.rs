//! Even polynomial × Gaussian mollifiers with vanishing moments.
//!
//! `η(z) = P(z) e^{-z²}` with `P(z) = Σ c_{2k} z^{2k}`, `k = 0..=q/2`. The
//! coefficients solve the linear system `∫ z^{2j} η = δ_{j0}` for
//! `j = 0..=q/2`, whose matrix entries are `Γ(j + k + 1/2)`. Odd moments
//! vanish by symmetry, so the result has moments 1..=q equal to zero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_pieces, QuadConfig};
use crate::scalar::{factorial, gamma_half_integer, Real};

/// Largest accepted order; beyond it the Γ-matrix is too ill-conditioned
/// for double precision to meet the moment tolerance.
pub const MAX_ORDER: i64 = 16;

/// Tolerance used to verify the moment constraints.
pub const MOMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mollifier<T> {
    q: u32,
    /// Coefficients of `z^0, z^2, ..., z^q`.
    coeffs: Vec<T>,
    support: T,
    peak: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

/// `M[m,n] = (1/n!) ∫ z^n η^m(-z) dz` for `m = 1..=m_max`, `n = 0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable<T> {
    pub method: MomentMethod,
    /// `entries[m - 1][n]`
    pub entries: Vec<Vec<T>>,
}

impl<T: Real> MomentTable<T> {
    pub fn get(&self, m: u32, n: u32) -> T {
        self.entries[m as usize - 1][n as usize]
    }

    pub fn m_max(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn n_max(&self) -> u32 {
        self.entries.first().map_or(0, |row| row.len() as u32 - 1)
    }
}

impl<T: Real> Mollifier<T> {
    /// Builds the order-`q` mollifier. `q` must be even and at least 2.
    pub fn build(q: i64) -> Result<Self> {
        if q < 2 || q % 2 != 0 || q > MAX_ORDER {
            return Err(Error::InvalidOrder(q));
        }
        let dim = (q / 2 + 1) as usize;
        let mut matrix: Vec<Vec<T>> =
            (0..dim).map(|j| (0..dim).map(|k| gamma_half_integer::<T>((j + k) as u32)).collect()).collect();
        let mut rhs = vec![T::zero(); dim];
        rhs[0] = T::one();
        let coeffs = solve_linear(&mut matrix, &mut rhs)?;

        let mut m = Self { q: q as u32, coeffs, support: T::zero(), peak: T::zero() };
        m.peak = m.scan_peak();
        m.support = m.find_support();
        Ok(m)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Support cutoff `Z`: `η` is treated as zero for `|z| > Z`.
    pub fn support(&self) -> T {
        self.support
    }

    /// `max |η|`.
    pub fn peak(&self) -> T {
        self.peak
    }

    fn poly(&self, z: T) -> T {
        let w = z * z;
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * w + c)
    }

    fn poly_derivative(&self, z: T) -> T {
        let w = z * z;
        let mut acc = T::zero();
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * w + c * T::of((2 * k) as f64);
        }
        acc * z
    }

    /// `η(z)`; exactly zero beyond the support cutoff.
    pub fn eval(&self, z: T) -> T {
        if z.abs() > self.support {
            return T::zero();
        }
        self.poly(z) * (-z * z).exp()
    }

    /// `η'(z) = (P'(z) - 2 z P(z)) e^{-z²}`.
    pub fn eval_derivative(&self, z: T) -> T {
        if z.abs() > self.support {
            return T::zero();
        }
        (self.poly_derivative(z) - T::of(2.0) * z * self.poly(z)) * (-z * z).exp()
    }

    /// `∫_s^∞ η(z) dz` in closed form.
    pub fn tail(&self, s: T) -> T {
        if s >= self.support {
            return T::zero();
        }
        if s <= -self.support {
            return T::one();
        }
        if s < T::zero() {
            return T::one() - self.upper_tail(-s);
        }
        self.upper_tail(s)
    }

    // s >= 0: Σ c_k I_k(s) with I_k(s) = ∫_s^∞ z^{2k} e^{-z²} dz,
    // I_k = s^{2k-1} e^{-s²}/2 + (2k-1)/2 · I_{k-1}
    fn upper_tail(&self, s: T) -> T {
        let half = T::of(0.5);
        let gauss = (-s * s).exp();
        let mut ik = half * T::PI().sqrt() * s.erfc();
        let mut total = self.coeffs[0] * ik;
        let mut s_pow = T::one() / s.max(T::min_positive_value()); // s^{2k-1} at k = 0
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            s_pow = s_pow * s * s;
            let kf = T::of(k as f64);
            let boundary = if s == T::zero() && k == 1 { T::zero() } else { half * s_pow * gauss };
            ik = boundary + (kf - half) * ik;
            total = total + c * ik;
        }
        total
    }

    /// `M[m,n]` from exact Gaussian moments; odd `n` give exactly zero.
    pub fn moment(&self, m: u32, n: u32) -> T {
        assert!(m >= 1, "mollifier power must be positive");
        if n % 2 == 1 {
            return T::zero();
        }
        // coefficients of P^m in powers of z²
        let mut pm = vec![T::one()];
        for _ in 0..m {
            let mut next = vec![T::zero(); pm.len() + self.coeffs.len() - 1];
            for (i, &a) in pm.iter().enumerate() {
                for (k, &b) in self.coeffs.iter().enumerate() {
                    next[i + k] = next[i + k] + a * b;
                }
            }
            pm = next;
        }
        // ∫ z^{2j} e^{-m z²} dz = Γ(j + 1/2) / m^{j + 1/2}
        let mf = T::of(m as f64);
        let half_n = n / 2;
        let sum: T = pm
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let j = half_n + k as u32;
                c * gamma_half_integer::<T>(j) / mf.powf(T::of(j as f64 + 0.5))
            })
            .sum();
        sum / factorial::<T>(n)
    }

    /// `M[m,n]` by adaptive quadrature over the support.
    pub fn moment_quadrature(&self, m: u32, n: u32) -> T {
        assert!(m >= 1, "mollifier power must be positive");
        let cfg = QuadConfig { abs_tol: T::of(1e-15), rel_tol: T::of(1e-13), max_subdivisions: 400 };
        let z = self.support;
        let f = |x: T| x.powi(n as i32) * self.eval(-x).powi(m as i32);
        integrate_pieces(f, &[-z, T::zero(), z], &cfg).value / factorial::<T>(n)
    }

    pub fn moment_table(&self, m_max: u32, n_max: u32, method: MomentMethod) -> MomentTable<T> {
        let entries = (1..=m_max)
            .map(|m| {
                (0..=n_max)
                    .map(|n| match method {
                        MomentMethod::ClosedForm => self.moment(m, n),
                        MomentMethod::Quadrature => self.moment_quadrature(m, n),
                    })
                    .collect()
            })
            .collect();
        MomentTable { method, entries }
    }

    fn scan_peak(&self) -> T {
        let steps = 4000;
        (0..=steps)
            .map(|i| {
                let z = T::of(10.0 * i as f64 / steps as f64);
                (self.poly(z) * (-z * z).exp()).abs()
            })
            .fold(T::zero(), T::max)
    }

    // largest grid point where the envelope Σ|c| z^{2k} e^{-z²} still exceeds 1e-18·peak
    fn find_support(&self) -> T {
        let threshold = T::of(1e-18) * self.peak;
        let envelope = |z: T| {
            let w = z * z;
            self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * w + c.abs()) * (-w).exp()
        };
        let step = 1.0 / 128.0;
        let mut z = 40.0;
        while z > 0.0 && envelope(T::of(z)) < threshold {
            z -= step;
        }
        T::of(z + step)
    }
}

/// Gaussian elimination with partial pivoting; consumes the system.
fn solve_linear<T: Real>(a: &mut [Vec<T>], b: &mut [T]) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        if a[pivot][col].abs() <= T::epsilon() * T::of(1e-3) {
            return Err(Error::SingularMomentSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            let pivot_row = a[col].clone();
            for (x, &v) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - factor * v;
            }
            let v = b[col];
            b[row] = b[row] - factor * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let s: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMomentSystem);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn raw_moment(m: &Mollifier<f64>, n: i32) -> f64 {
        let z = m.support();
        let cfg = QuadConfig { abs_tol: 1e-16, rel_tol: 1e-14, max_subdivisions: 400 };
        integrate_pieces(|x| x.powi(n) * m.eval(x), &[-z, 0.0, z], &cfg).value
    }

    #[test]
    fn order_two_coefficients() {
        let m = Mollifier::<f64>::build(2).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        // solved by hand: c0√π + c2√π/2 = 1, c0√π/2 + 3c2√π/4 = 0
        assert!((m.coeffs()[0] - 1.5 / sqrt_pi).abs() < 1e-15);
        assert!((m.coeffs()[1] + 1.0 / sqrt_pi).abs() < 1e-15);
    }

    #[test]
    fn order_two_and_four_moments_vanish() {
        for q in [2, 4] {
            let m = Mollifier::<f64>::build(q).unwrap();
            assert!((raw_moment(&m, 0) - 1.0).abs() < 1e-12);
            for n in 1..=q as i32 {
                assert!(raw_moment(&m, n).abs() < 1e-12, "q={q} n={n}");
            }
        }
    }

    #[test]
    fn higher_orders_meet_moment_tolerance() {
        for q in (2..=MAX_ORDER).step_by(2) {
            let m = Mollifier::<f64>::build(q).unwrap();
            assert!((m.moment(1, 0) - 1.0).abs() < MOMENT_TOL, "q={q}");
            for n in 1..=q as u32 {
                assert!(m.moment(1, n).abs() < MOMENT_TOL, "q={q} n={n}: {}", m.moment(1, n));
            }
        }
    }

    #[test]
    fn invalid_orders_rejected() {
        for q in [-2, 0, 1, 3, 7, MAX_ORDER + 2] {
            assert_eq!(Mollifier::<f64>::build(q), Err(Error::InvalidOrder(q)));
        }
    }

    #[test]
    fn pointwise_values() {
        let m = Mollifier::<f64>::build(2).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((m.eval(0.0) - 1.5 / sqrt_pi).abs() < 1e-15);
        assert!((m.eval(0.0) - 0.84628).abs() < 1e-5);
        assert!(m.eval(1.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.eval(50.0), 0.0);
        assert_eq!(m.eval(-50.0), 0.0);
    }

    #[test]
    fn support_cutoff_bounds_the_kernel() {
        for q in [2, 4, 8] {
            let m = Mollifier::<f64>::build(q).unwrap();
            let z = m.support();
            assert!(z > 5.0 && z < 8.0, "q={q} Z={z}");
            for i in 0..200 {
                let x = z + i as f64 * 0.01;
                let raw = m.poly(x) * (-x * x).exp();
                assert!(raw.abs() < 1e-16 * m.peak());
            }
        }
    }

    #[test]
    fn second_moment_of_square() {
        let m = Mollifier::<f64>::build(2).unwrap();
        let expected = 27.0 / (16.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((m.moment(2, 0) - expected).abs() < 1e-14);
        assert!((m.moment_quadrature(2, 0) - expected).abs() / expected < 1e-12);
        assert!((m.moment(1, 0) - 1.0).abs() < 1e-14);
        assert_eq!(m.moment(2, 1), 0.0);
        assert_eq!(m.moment(3, 5), 0.0);
    }

    #[test]
    fn closed_form_and_quadrature_moments_agree() {
        for q in [2, 4] {
            let m = Mollifier::<f64>::build(q).unwrap();
            let closed = m.moment_table(4, 6, MomentMethod::ClosedForm);
            let quad = m.moment_table(4, 6, MomentMethod::Quadrature);
            for mm in 1..=4 {
                for n in 0..=6 {
                    let (c, d) = (closed.get(mm, n), quad.get(mm, n));
                    assert!((c - d).abs() <= 1e-9 * c.abs().max(1e-3), "q={q} M[{mm},{n}]: {c} vs {d}");
                }
            }
        }
    }

    #[test]
    fn tail_matches_quadrature() {
        let m = Mollifier::<f64>::build(4).unwrap();
        let cfg = QuadConfig { abs_tol: 1e-16, rel_tol: 1e-14, max_subdivisions: 200 };
        for s in [-6.0, -2.5, -0.3, 0.0, 0.4, 1.7, 3.3, 6.0] {
            let q = integrate(|x| m.eval(x), s, m.support(), &cfg).value;
            assert!((m.tail(s) - q).abs() < 1e-14, "s={s}: {} vs {q}", m.tail(s));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let m = Mollifier::<f64>::build(2).unwrap();
        let h = 1e-5;
        for z in [-2.0, -0.7, 0.0, 0.3, 1.9] {
            let fd = (m.eval(z + h) - m.eval(z - h)) / (2.0 * h);
            assert!((fd - m.eval_derivative(z)).abs() < 1e-9);
        }
    }

    #[test]
    fn single_precision_mollifier() {
        let m = Mollifier::<f32>::build(2).unwrap();
        assert!((m.moment(2, 0) - 0.673_17).abs() < 1e-4);
    }
}
