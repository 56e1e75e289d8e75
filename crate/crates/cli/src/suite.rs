//! Report builders behind the subcommands.

use anyhow::Context;
use colombeau_kit::electrodynamics::{
    delta_term_flux, norm3, self_energy_electric, self_energy_magnetic, self_energy_total, self_force, self_momentum,
    spin, PhysicalParams, UnitMode,
};
use colombeau_kit::mollifier::Mollifier;
use colombeau_kit::radial::{fit_asymptotics, mn_fit_basis, mn_moment, mn_quadrature};
use colombeau_kit::renorm::{renormalize, roundtrip_check, RenormInput};
use colombeau_kit::upsilon::{default_schedule, AssociationCase, RegularizationPoint, TestFunction, Verdict};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::report::{Check, Meta, Report, Solution};

pub fn meta(cfg: &RunConfig, point: Option<(f64, f64)>) -> Meta {
    Meta {
        q: cfg.q,
        eps: point.map(|p| p.0),
        a: point.map(|p| p.1),
        unit_mode: cfg.unit_mode.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn mollifier(cfg: &RunConfig) -> anyhow::Result<Mollifier<f64>> {
    Ok(Mollifier::build(cfg.q)?)
}

/// Electron parameters with `|μ| = 1` along `z`.
pub fn params(mode: UnitMode) -> PhysicalParams<f64> {
    let mu = [0.0, 0.0, 1.0];
    match mode {
        UnitMode::Gaussian => PhysicalParams::gaussian(1.0, mu, 1.0),
        UnitMode::Natural => PhysicalParams::natural(mu),
    }
    .expect("fixed parameters are valid")
}

/// `3 (ε/a + a)`.
pub fn error_model(rp: &RegularizationPoint<f64>) -> f64 {
    3.0 * (rp.ratio() + rp.a())
}

/// `M[1,n]` for `1 ≤ n ≤ q` and every odd `n` vanish identically.
fn vanishes(m: &Mollifier<f64>, i: u32, j: u32) -> bool {
    j % 2 == 1 || (i == 1 && (1..=m.q()).contains(&j))
}

/// Absolute deviation of both routes for vanishing entries, relative otherwise.
fn moment_check(name: String, reference: &str, zero: bool, closed: f64, quad: f64, tol: f64) -> Check {
    let dev = if zero { closed.abs().max(quad.abs()) } else { (quad - closed).abs() / closed.abs() };
    Check::with_dev(name, reference, closed, quad, dev, tol)
}

pub fn mollifier_report(cfg: &RunConfig) -> anyhow::Result<Report> {
    let m = mollifier(cfg)?;
    let mut r = Report::new(meta(cfg, None));
    for n in 0..=m.q() {
        let reference =
            if n == 0 { "M[1,0] = ∫η dz = 1" } else { "M[1,n] = (1/n!)∫z^n η(-z) dz = 0 for 1 ≤ n ≤ q" };
        r.checks.push(moment_check(
            format!("moment z^{n}"),
            reference,
            vanishes(&m, 1, n),
            m.moment(1, n),
            m.moment_quadrature(1, n),
            cfg.moment_tol,
        ));
    }
    r.checks.push(Check::compare("M[2,0]", "∫η² dz", m.moment(2, 0), m.moment_quadrature(2, 0), 1e-9));
    Ok(r)
}

pub fn moments_report(cfg: &RunConfig, m_max: u32, n_max: u32) -> anyhow::Result<Report> {
    let m = mollifier(cfg)?;
    let mut r = Report::new(meta(cfg, None));
    for i in 1..=m_max {
        for j in 0..=n_max {
            r.checks.push(moment_check(
                format!("M[{i},{j}]"),
                "M[m,n] = (1/n!)∫z^n η^m(-z) dz",
                vanishes(&m, i, j),
                m.moment(i, j),
                m.moment_quadrature(i, j),
                1e-9,
            ));
        }
    }
    Ok(r)
}

fn test_label(t: &TestFunction) -> String {
    match *t {
        TestFunction::Bump { radius } => format!("bump(R={radius})"),
        TestFunction::WindowedCosine { radius, wavenumber } => format!("cosine(R={radius},k={wavenumber})"),
    }
}

fn case_reference(case: AssociationCase) -> &'static str {
    match case {
        AssociationCase::CoulombField => "e(r^-2 Υ - r^-1 Υ') ≈ e/r² outside a",
        AssociationCase::ChargeDensity => "-(e/4π) r^-1 Υ'' ≈ e δ",
        AssociationCase::DeltaSquared => "(Υ')² has no associated distribution",
    }
}

/// Charge and density are expected to associate; `(Υ')²` is expected not to.
pub fn associate_report(cfg: &RunConfig, cases: &[AssociationCase]) -> anyhow::Result<Report> {
    let m = mollifier(cfg)?;
    let schedule = default_schedule::<f64>();
    let mut r = Report::new(meta(cfg, None));
    let jobs: Vec<(AssociationCase, TestFunction)> =
        cases.iter().flat_map(|&c| TestFunction::bank().into_iter().map(move |t| (c, t))).collect();
    let reports = jobs
        .par_iter()
        .map(|(case, t)| case.report(&m, t, &schedule, 1.0, cfg.assoc_tol))
        .collect::<Result<Vec<_>, _>>()?;
    for ((case, t), rep) in jobs.iter().zip(reports) {
        let expected = match case {
            AssociationCase::DeltaSquared => Verdict::NonConvergent,
            _ => Verdict::Pass,
        };
        let n = rep.values.len();
        let check = Check::with_dev(
            format!("{}/{} order={:.3}", case.name(), test_label(t), rep.order),
            case_reference(*case),
            rep.scale,
            rep.values[n - 1],
            rep.relative[n - 1],
            cfg.assoc_tol,
        )
        .verdict(rep.verdict == expected);
        r.checks.push(check);
    }
    Ok(r)
}

/// Every closed form against its quadrature at one `(ε, a)`.
pub fn reproduce_report(cfg: &RunConfig) -> anyhow::Result<Report> {
    let m = mollifier(cfg)?;
    let rp = RegularizationPoint::with_ratio_max(cfg.eps, cfg.a, cfg.ratio_max)?;
    let p = params(cfg.unit_mode);
    let tol = error_model(&rp);
    let e2 = p.e * p.e;
    let mut r = Report::new(meta(cfg, Some((cfg.eps, cfg.a))));

    r.checks.push(Check::compare(
        "mollifier normalization",
        "∫η dz = 1",
        1.0,
        m.moment_quadrature(1, 0),
        cfg.moment_tol,
    ));
    r.checks.push(Check::compare("M[2,0]", "∫η² dz", m.moment(2, 0), m.moment_quadrature(2, 0), 1e-9));
    for n in [0, 1, 2, 4] {
        let closed = e2 * mn_moment(n, &m)?.eval_at(&rp);
        let quad = e2 * mn_quadrature(n, &rp, &m, 1.0)?;
        r.checks.push(Check::compare(
            format!("M_{n}"),
            "∫r^n E² dr = e²((n-2)/(3-n) a^(n-3) + M[2,0] a^(n-2)/ε)",
            closed,
            quad,
            tol,
        ));
    }
    let ele = self_energy_electric(&p, &m, &rp)?;
    r.checks.push(Check::compare("U_ele", "(e²/2) M[2,0]/ε", ele.closed_form, ele.quadrature, tol));
    let mag = self_energy_magnetic(&p, &m, &rp)?;
    r.checks.push(Check::compare("U_mag", "(μ²/3) M[2,0]/(a²ε)", mag.closed_form, mag.quadrature, tol));
    let tot = self_energy_total(&p, &m, &rp)?;
    r.checks.push(Check::compare("U_ele + U_mag", "(1/8π)∭(E² + H²) d³r", tot.closed_form, tot.quadrature, tol));
    let flux = delta_term_flux(&p, &m, &rp)?;
    r.checks.push(Check::compare(
        "dipole delta flux",
        "∭u×(μ×u) r^-2 Υ' d³r = (8π/3)μ",
        norm3(flux.closed_form),
        norm3(flux.quadrature),
        1e-6,
    ));
    let force = self_force(&p, &m, &rp)?;
    let fr = &force.radial_density;
    r.checks.push(Check::compare(
        "self-force radial density",
        "F_r = M_1 = e²(M[2,0]/(aε) - 1/(2a²))",
        fr.closed_form,
        fr.quadrature,
        tol,
    ));
    let total = norm3(force.total());
    r.checks.push(Check::with_dev("self-force total", "∭(ρE + j×H/c) d³r = 0", 0.0, total, total / force.scale, 1e-12));
    let mom = self_momentum(&p, &m, &rp)?;
    r.checks.push(Check::compare(
        "self-momentum radial",
        "P_r = M_1",
        mom.radial.closed_form,
        mom.radial.quadrature,
        tol,
    ));
    let total = norm3(mom.total);
    r.checks.push(Check::with_dev("self-momentum total", "(1/4πc)∭E×H d³r = 0", 0.0, total, total / mom.scale, 1e-12));
    let s = spin(&p, &m, &rp)?;
    r.checks.push(Check::compare("spin", "S = (2eμ/3c) M[2,0]/ε", s.closed_form[2], s.quadrature[2], tol));

    let sol = renormalize(&RenormInput::natural(1.0, 0.5, 2.0, m.moment(2, 0)))?;
    for c in roundtrip_check(&sol, &m)?.checks {
        r.checks.push(Check::with_dev(
            format!("renormalized {} (s=1/2, g=2)", c.quantity),
            "mc² = U_ele + U_mag and |S| = sħ",
            c.target,
            c.closed_form,
            c.closed_dev,
            c.closed_tol,
        ));
    }
    Ok(r)
}

pub fn renorm_report(cfg: &RunConfig, s: f64, g: f64, mass: f64) -> anyhow::Result<Report> {
    let m = mollifier(cfg)?;
    let sol = renormalize(&RenormInput::natural(mass, s, g, m.moment(2, 0)))?;
    let rep = roundtrip_check(&sol, &m).context("round trip")?;
    let mut r = Report::new(meta(cfg, Some((sol.epsilon, sol.a))));
    r.solution = Some(Solution {
        a: sol.a,
        epsilon: sol.epsilon,
        mu: sol.mu,
        u_ele: sol.u_ele,
        u_mag: sol.u_mag,
        ratio: sol.ratio,
        warn: sol.warn,
    });
    for c in rep.checks {
        r.checks.push(Check::with_dev(
            format!("{} closed form", c.quantity),
            "closed forms at the solved (ε, a)",
            c.target,
            c.closed_form,
            c.closed_dev,
            c.closed_tol,
        ));
        r.checks.push(Check::with_dev(
            format!("{} quadrature", c.quantity),
            "field quadrature at the solved (ε, a)",
            c.target,
            c.quadrature,
            c.quadrature_dev,
            c.quadrature_tol,
        ));
    }
    Ok(r)
}

struct SweepRow {
    rp: RegularizationPoint<f64>,
    m2: (f64, f64),
    u_ele: (f64, f64),
    u_mag: (f64, f64),
    spin: (f64, f64),
}

/// Closed form against quadrature over the `ε × a` grid (pairs with
/// `ε/a ≤ ratio_max`), plus a fit of the `M_2` sweep.
pub fn sweep_report(cfg: &RunConfig) -> anyhow::Result<Report> {
    cfg.validate()?;
    let m = mollifier(cfg)?;
    let p = params(cfg.unit_mode);
    let e2 = p.e * p.e;
    let mut points = Vec::new();
    for eps in cfg.eps_grid.values() {
        for a in cfg.a_grid.values() {
            if let Ok(rp) = RegularizationPoint::with_ratio_max(eps, a, cfg.ratio_max) {
                points.push(rp);
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|rp| -> anyhow::Result<SweepRow> {
            let ele = self_energy_electric(&p, &m, rp)?;
            let mag = self_energy_magnetic(&p, &m, rp)?;
            let s = spin(&p, &m, rp)?;
            Ok(SweepRow {
                rp: *rp,
                m2: (e2 * mn_moment(2, &m)?.eval_at(rp), e2 * mn_quadrature(2, rp, &m, 1.0)?),
                u_ele: (ele.closed_form, ele.quadrature),
                u_mag: (mag.closed_form, mag.quadrature),
                spin: (s.closed_form[2], s.quadrature[2]),
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let mut r = Report::new(meta(cfg, None));
    for row in &rows {
        let tag = format!("eps={:e},a={:e}", row.rp.epsilon(), row.rp.a());
        let tol = error_model(&row.rp);
        for (name, reference, (c, q)) in [
            ("M_2", "e² M[2,0]/ε", row.m2),
            ("U_ele", "(e²/2) M[2,0]/ε", row.u_ele),
            ("U_mag", "(μ²/3) M[2,0]/(a²ε)", row.u_mag),
            ("spin", "(2eμ/3c) M[2,0]/ε", row.spin),
        ] {
            r.checks.push(Check::compare(format!("{name}@{tag}"), reference, c, q, tol));
        }
    }
    let samples: Vec<_> = rows.iter().map(|row| (row.rp, row.m2.1 / e2)).collect();
    let m20 = m.moment(2, 0);
    match fit_asymptotics(&samples, &mn_fit_basis(2)) {
        Ok(fit) => r.checks.push(Check::compare(
            "fit M_2: ε^-1 coefficient",
            "M_2 = M[2,0]/ε, independent of a",
            m20,
            fit.coeff(0, -1),
            cfg.fit_tol,
        )),
        Err(err) => r
            .checks
            .push(Check::with_dev("fit M_2", err.to_string(), m20, f64::NAN, f64::NAN, cfg.fit_tol).verdict(false)),
    }
    Ok(r)
}
