use colombeau_kit::mollifier::Mollifier;
use colombeau_kit::radial::{
    default_sweep, fit_asymptotics, integrate_asymptotic, integrate_quadrature, mn_fit_basis, mn_integrand, mn_moment,
    mn_quadrature, RadialExpression,
};
use colombeau_kit::upsilon::RegularizationPoint;
use colombeau_kit::{Error, ExactRadial};
use num_rational::Rational64;

fn q2() -> Mollifier<f64> {
    Mollifier::build(2).unwrap()
}

fn sweep(n: i32, m: &Mollifier<f64>) -> Vec<(RegularizationPoint<f64>, f64)> {
    default_sweep().into_iter().map(|rp| (rp, mn_quadrature(n, &rp, m, 1.0).unwrap())).collect()
}

#[test]
fn fitted_moments_match_closed_form() {
    let m = q2();
    let m20 = m.moment(2, 0);
    for n in [0, 1, 2, 4] {
        let fit = fit_asymptotics(&sweep(n, &m), &mn_fit_basis(n)).unwrap();
        let lead = (n - 2) as f64 / (3 - n) as f64;
        let c_a = fit.coeff(n - 3, 0);
        let c_e = fit.coeff(n - 2, -1);
        assert!((c_e - m20).abs() < 0.02 * m20, "n={n}: ε-coefficient {c_e}");
        if n == 2 {
            let baseline = RadialExpression::term(1.0, -2, 2, 0, 0).unwrap();
            let samples: Vec<_> = default_sweep::<f64>()
                .into_iter()
                .map(|rp| (rp, integrate_quadrature(&baseline, &rp, &m).unwrap()))
                .collect();
            let base = fit_asymptotics(&samples, &[(-1, 0), (0, -1), (-2, 1)]).unwrap().coeff(-1, 0);
            assert!((base - 1.0).abs() < 0.02);
            assert!(c_a.abs() < 1e-3 * base.abs(), "n=2: a-coefficient {c_a} against baseline {base}");
        } else {
            assert!((c_a - lead).abs() < 0.02 * lead.abs(), "n={n}: a-coefficient {c_a} against {lead}");
        }
    }
}

#[test]
fn closed_form_series_shape() {
    let m = q2();
    let m20 = m.moment(2, 0);
    let s = mn_moment(2, &m).unwrap();
    assert_eq!(s.basis, vec![(0, -1)]);
    assert!((s.coeffs[0] - m20).abs() < 1e-15);
    let s = mn_moment(1, &m).unwrap();
    assert!((s.coeff(-2, 0) + 0.5).abs() < 1e-15);
    assert!((s.coeff(-1, -1) - m20).abs() < 1e-15);
    assert_eq!(mn_moment(3, &m).unwrap_err(), Error::SingularCoefficient(3));
}

#[test]
fn exact_normal_form_of_moment_integrands() {
    for n in [0, 1, 2, 4, 5] {
        let bp = mn_integrand::<Rational64>(n).by_parts();
        let q = |k: i64| Rational64::from_integer(k);
        let expected: ExactRadial = RadialExpression::term(q((n - 2) as i64), n - 4, 2, 0, 0).unwrap()
            + RadialExpression::term(q(1), n - 2, 0, 2, 0).unwrap();
        assert_eq!(bp.normal, expected, "n={n}");
        assert_eq!(bp.boundary, RadialExpression::term(q(-1), n - 3, 2, 0, 0).unwrap(), "n={n}");
    }
}

#[test]
fn self_force_integrand_reduces_to_first_moment() {
    // r² E ∇·E with E = r^{-2}Υ - r^{-1}Υ' and ∇·E = -r^{-1}Υ''
    let m = q2();
    let e =
        RadialExpression::<f64>::term(1.0, -2, 1, 0, 0).unwrap() + RadialExpression::term(-1.0, -1, 0, 1, 0).unwrap();
    let div = RadialExpression::term(-1.0, -1, 0, 0, 1).unwrap();
    let integrand = e.try_mul(&div).unwrap().shift_power(2);
    assert_eq!(integrate_asymptotic(&integrand, &m).unwrap(), mn_moment(1, &m).unwrap());
}
