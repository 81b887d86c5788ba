//! The acceptance grid run by `verify-all`. Each criterion is a handful of
//! named checks at pinned tolerances; a criterion passes iff all do.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use regdet::anomaly::{residue_phase_space, thm1_prefactor, verify_massless, verify_thm2};
use regdet::gff::verify_measure_identity;
use regdet::green::{cf_mean, det2, gamma0, torus_cf_image_sum};
use regdet::heat::{fit_constant_term, heat_integral, heat_trace_with, HeatMethod};
use regdet::special::{EULER_GAMMA, RIEMANN_ZETA_PRIME_MINUS_ONE};
use regdet::zeta::{default_s_grid, mainlemma_fit, zeta_det};
use regdet::{Result, Surface};

use crate::report::Check;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Criterion {
    pub id: String,
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl Criterion {
    fn new(id: &str, title: &str, checks: Vec<Check>, notes: Vec<String>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Self {
            id: id.into(),
            title: title.into(),
            checks,
            notes,
            pass,
        }
    }

    /// `A1 PASS  title  (worst residual r vs tol t)`
    pub fn summary_line(&self) -> String {
        let worst = self
            .checks
            .iter()
            .max_by(|a, b| (a.residual / a.tol).total_cmp(&(b.residual / b.tol)))
            .map(|c| format!("worst {}: {:.3e} (tol {:.0e})", c.name, c.residual, c.tol))
            .unwrap_or_default();
        format!("{} {}  {}  [{}]", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title, worst)
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

fn sphere() -> Surface {
    Surface::sphere(1.0).expect("valid radius")
}

fn torus(l1: f64, l2: f64) -> Surface {
    Surface::torus(l1, l2).expect("valid sides")
}

/// The three model surfaces the grid runs on.
pub fn surfaces() -> [Surface; 3] {
    [sphere(), torus(1.0, 1.0), torus(1.0, 2.0)]
}

pub fn a1() -> Result<Criterion> {
    let mut checks = Vec::new();
    for (model, m0_sq, m1_sq) in [(sphere(), 1.0, 1.0), (torus(1.0, 1.0), 1.0, 2.0)] {
        let r = verify_thm2(&model, m0_sq, m1_sq, 1e-6)?;
        checks.push(Check::abs(
            format!("{model} m0^2={m0_sq} m1^2={m1_sq}: |lhs/rhs - 1|"),
            r.rel_residual,
            0.0,
            1e-6,
        ));
    }
    Ok(Criterion::new("A1", "mass-shift identity residual", checks, vec![]))
}

pub fn a2() -> Result<Criterion> {
    let model = sphere();
    let fit = mainlemma_fit(&model, 1.0, &default_s_grid())?;
    let integral = heat_integral(&model, 1.0, 1e-9)?;
    let checks = vec![
        Check::abs("residue vs A/4pi", fit.residue, model.weyl_density(), 1e-4),
        Check::abs("finite part vs heat integral", fit.finite_part, integral.value, 1e-4),
    ];
    let notes = vec![format!("fit residual rms {:.3e}", fit.fit_diagnostics.residual_rms)];
    Ok(Criterion::new("A2", "Laurent structure of tr C^(1+s) (sphere R=1, m^2=1)", checks, notes))
}

pub fn a3() -> Result<Criterion> {
    let mut checks = Vec::new();
    for (model, m_sq) in surfaces().into_iter().zip([1.0, 2.0, 1.0]) {
        let fit = mainlemma_fit(&model, m_sq, &default_s_grid())?;
        let phase = residue_phase_space(&model);
        let weyl = model.weyl_density();
        checks.push(Check::abs(format!("{model}: fit residue vs A/4pi"), fit.residue, weyl, 1e-4));
        checks.push(Check::abs(format!("{model}: phase-space volume vs A/4pi"), phase, weyl, 1e-4));
        checks.push(Check::abs(format!("{model}: fit residue vs phase-space volume"), fit.residue, phase, 1e-4));
    }
    Ok(Criterion::new("A3", "residue three ways", checks, vec![]))
}

pub fn a4() -> Result<Criterion> {
    let sphere_grid: Vec<f64> = (3..=12).map(|j| 2f64.powi(-j)).collect();
    let s = fit_constant_term(&sphere(), 0.0, &sphere_grid, HeatMethod::Auto)?;
    // dyadic fractions of t = 0.05; the image terms e^{−1/4t} fall below the
    // tolerance from the top node 0.0125 down
    let torus_grid: Vec<f64> = (2..=11).map(|j| 0.05 * 2f64.powi(-j)).collect();
    let model = torus(1.0, 1.0);
    let t = fit_constant_term(&model, 0.0, &torus_grid, HeatMethod::ImageSum)?;
    let direct = heat_trace_with(&model, 0.0, 0.05, 1e-12, HeatMethod::Direct)?;
    let images = heat_trace_with(&model, 0.0, 0.05, 1e-12, HeatMethod::ImageSum)?;
    let checks = vec![
        Check::abs("sphere constant term vs chi/6", s.constant, 1.0 / 3.0, 1e-4),
        Check::abs("torus constant term (image-sum form)", t.constant, 0.0, 1e-8),
        Check::rel("torus trace at t=0.05: direct vs image sum", direct.value, images.value, 1e-10),
    ];
    Ok(Criterion::new("A4", "small-time heat coefficients", checks, vec![]))
}

pub fn a5() -> Result<Criterion> {
    let model = torus(1.0, 1.0);
    let heat = cf_mean(&model, 1.0)?;
    let images = torus_cf_image_sum(1.0, 1.0, 1.0)?;
    let gap = heat.cf_mean - images.cf_mean;
    let predicted = (3.0 * 2f64.ln() - 2.0 * EULER_GAMMA) / (2.0 * PI);
    let checks = vec![Check::abs("heat-integral cf_mean vs image-sum C_f", heat.cf_mean, images.cf_mean, 1e-6)];
    let notes = vec![format!(
        "the two finite parts differ by {gap:.15e}; (3 ln 2 - 2 gamma)/2pi = {predicted:.15e}. \
         The offset is the same on every surface and mass: the gamma0 convention of the heat-side \
         definition and the short-distance subtraction of the Green's function differ by a constant, \
         so agreement to 1e-6 is not attainable with both definitions as stated"
    )];
    Ok(Criterion::new("A5", "two-oracle C_f (torus 1x1, m0=1)", checks, notes))
}

pub fn a6() -> Result<Criterion> {
    let special = 4.0 * (-EULER_GAMMA).exp();
    let mut checks = vec![Check::abs("gamma0(4 e^-gamma)", gamma0(special)?, 0.0, 1e-14)];
    for model in surfaces() {
        for m1_sq in [0.5, 1.0, 2.0] {
            checks.push(Check::abs(
                format!("{model} m1^2={m1_sq}: prefactor at 4 e^-gamma"),
                thm1_prefactor(&model, special, m1_sq)?,
                1.0,
                1e-14,
            ));
        }
    }
    Ok(Criterion::new("A6", "special bare mass 4 e^-gamma", checks, vec![]))
}

pub fn a7(seed: u64, samples: usize) -> Result<Criterion> {
    let model = sphere();
    let lambda_max = 42.0;
    let r = verify_measure_identity(&model, 1.0, 1.0, lambda_max, samples, seed)?;
    let d = det2(&model, 1.0, 1.0, lambda_max)?;
    let target_from_det2 = (-0.5 * d.truncated_log).exp();
    let checks = vec![
        Check::z("measure identity z-score", r.identity.z_score, 3.0),
        Check::z("reweighted variance of the constant mode z-score", r.reweighted_variance.z_score, 4.0),
        Check::rel("MC target vs truncated det2^(-1/2)", r.identity.target, target_from_det2, 1e-12),
    ];
    let notes = vec![format!(
        "seed {seed}, {samples} samples, {} modes; mean {:.6} +- {:.1e}, target {:.6}",
        r.modes, r.identity.mean, r.identity.stderr, r.identity.target
    )];
    Ok(Criterion::new("A7", "Gaussian free field change of measure (sphere R=1, Lambda=42)", checks, notes))
}

pub fn a8() -> Result<Criterion> {
    let model = sphere();
    let report = verify_massless(&model, 1.0, &[0.2, 0.1, 0.05], 1e-4)?;
    let limit = &report.checks[0];
    let primed = zeta_det(&model, 0.0, true, 1e-9)?;
    let literature = (0.5 - 4.0 * RIEMANN_ZETA_PRIME_MINUS_ONE).exp();
    let checks = vec![
        Check::rel("Richardson limit of det_zeta(D+m0^2)/m0^2 vs det'_zeta", limit.value, limit.reference, 1e-4),
        Check::rel("det'_zeta(D) vs exp(1/2 - 4 zeta_R'(-1))", primed.det_zeta, literature, 1e-4),
    ];
    Ok(Criterion::new("A8", "massless limit on the unit sphere", checks, vec![]))
}

pub fn a9() -> Result<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let m0: f64 = rng.random_range(0.01..3.0);
        let sigma: f64 = rng.random_range(0.1..5.0);
        for model in surfaces() {
            let area = model.area();
            let w = sigma * area / (4.0 * PI);
            let m = sigma.sqrt();
            let lhs = (m / m0).powf(w) * (sigma * gamma0(m0)? * area / 2.0).exp();
            let rhs = (m * EULER_GAMMA.exp() / 4.0).powf(w);
            worst = worst.max((lhs / rhs - 1.0).abs());
        }
    }
    let mut checks = vec![Check::abs("prefactor identity, 10 random (m0, sigma) pairs x 3 surfaces", worst, 0.0, 1e-12)];
    let report = verify_massless(&torus(1.0, 1.0), 2.0, &[0.2, 0.1, 0.05], 1e-4)?;
    for c in &report.checks[2..] {
        checks.push(Check {
            name: format!("torus 1x1 sigma=2: {}", c.name),
            value: c.value,
            reference: c.reference,
            residual: c.residual,
            tol: c.tol,
            pass: c.pass,
        });
    }
    Ok(Criterion::new("A9", "massless-background prefactor and continuity", checks, report.notes))
}

/// A1–A9. Determinism (A10) is a property of the rendered report and is
/// checked by running the binary twice.
pub fn run_all(seed: u64, samples: usize) -> Result<Vec<Criterion>> {
    Ok(vec![a1()?, a2()?, a3()?, a4()?, a5()?, a6()?, a7(seed, samples)?, a8()?, a9()?])
}
