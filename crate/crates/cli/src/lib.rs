//! Command-line front end for the `regdet` verifiers.
//!
//! `run` parses nothing itself: it takes an already-parsed command and
//! [`RunConfig`], validates the flags, dispatches and returns a [`Report`].

pub mod acceptance;
pub mod report;

use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use regdet::anomaly::{residue_phase_space, verify_massless, verify_thm2};
use regdet::gff::verify_measure_identity;
use regdet::green::{cf_mean, det2, det2_auto, gamma0, sphere_cf_series, torus_cf_image_sum};
use regdet::heat::{heat_coeffs, heat_integral, heat_trace};
use regdet::zeta::{default_s_grid, dirichlet_finite_part, mainlemma_fit, zeta_det};
use regdet::{Geometry, Surface};

pub use report::{Check, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    HeatTrace,
    DetZeta,
    Det2,
    Cf,
    VerifyAnomaly,
    VerifyMainlemma,
    VerifyMassless,
    GffVerify,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every command. Masses are given as masses, not squares.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunConfig {
    /// `sphere:R=<float>` or `torus:L1=<float>,L2=<float>`
    #[arg(long, default_value = "sphere:R=1")]
    pub surface: String,
    /// bare mass m0
    #[arg(long, default_value_t = 1.0)]
    pub m0: f64,
    /// mass shift m1 (the identities involve m1^2)
    #[arg(long, default_value_t = 1.0)]
    pub m1: f64,
    /// background mass squared for verify-massless
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// tolerance; each command has its own default
    #[arg(long)]
    pub tol: Option<f64>,
    /// spectral cutoff; det2 picks one automatically when omitted
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = acceptance::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = acceptance::DEFAULT_SAMPLES)]
    pub samples: usize,
    /// times for heat-trace (repeatable)
    #[arg(long = "t")]
    pub times: Vec<f64>,
    /// write the report here instead of standard output
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// worker threads; 0 = available parallelism
    #[arg(long, env = "REGDET_THREADS", default_value_t = 0)]
    pub threads: usize,
}

/// Failure modes of a run, mapped to exit codes by [`CliError::exit_code`].
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flag or precondition violation: exit 1.
    Usage(String),
    /// The engine could not certify a result: exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<regdet::Error> for CliError {
    fn from(e: regdet::Error) -> Self {
        match e {
            regdet::Error::ToleranceNotReached { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

impl RunConfig {
    fn default_tol(command: Command) -> f64 {
        match command {
            Command::HeatTrace => 1e-10,
            Command::DetZeta => 1e-8,
            Command::Det2 => 1e-10,
            Command::Cf => 1e-9,
            Command::VerifyAnomaly => 1e-6,
            Command::VerifyMainlemma | Command::VerifyMassless => 1e-4,
            Command::GffVerify | Command::VerifyAll => 0.0,
        }
    }

    /// Flag-level checks, naming the offending flag.
    fn validate(&self, command: Command) -> Result<Surface, CliError> {
        let surface: Surface = self.surface.parse().or_else(|e: regdet::Error| usage(format!("--surface: {e}")))?;
        let massless_ok = matches!(command, Command::HeatTrace | Command::DetZeta);
        if !(self.m0.is_finite() && (self.m0 > 0.0 || (massless_ok && self.m0 == 0.0))) {
            return usage(format!(
                "--m0 must be {} (got {})",
                if massless_ok { "nonnegative" } else { "positive" },
                self.m0
            ));
        }
        if !(self.m1.is_finite() && self.m1 >= 0.0) {
            return usage(format!("--m1 must be nonnegative (got {})", self.m1));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return usage(format!("--sigma must be positive (got {})", self.sigma));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return usage(format!("--tol must lie in (0, 1) (got {tol})"));
            }
            if matches!(command, Command::DetZeta | Command::Cf) && tol > 1e-4 {
                return usage(format!("--tol must be at most 1e-4 for {} (got {tol})", command.name()));
            }
        }
        if let Some(l) = self.lambda_max {
            if !(l.is_finite() && l > 0.0) {
                return usage(format!("--lambda-max must be positive (got {l})"));
            }
        }
        if command == Command::GffVerify && self.samples < 2 {
            return usage(format!("--samples must be at least 2 (got {})", self.samples));
        }
        if let Some(t) = self.times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return usage(format!("--t must be positive (got {t})"));
        }
        Ok(surface)
    }

    fn inputs(&self, command: Command) -> Value {
        let mut v = serde_json::to_value(self).expect("config serializes");
        v["tol"] = json!(self.tol.unwrap_or(Self::default_tol(command)));
        v
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("records serialize")
}

/// Validate, dispatch and assemble the report. `pass` in the report decides
/// between exit codes 0 and 2.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let model = cfg.validate(command)?;
    let tol = cfg.tol.unwrap_or(RunConfig::default_tol(command));
    let (m0_sq, m1_sq) = (cfg.m0 * cfg.m0, cfg.m1 * cfg.m1);
    let mut results = Vec::new();
    let pass = match command {
        Command::HeatTrace => {
            results.push(to_value(&heat_coeffs(&model, m0_sq)?));
            let times = if cfg.times.is_empty() {
                (0..=6).map(|j| 2f64.powi(-j)).collect()
            } else {
                cfg.times.clone()
            };
            for t in times {
                let tr = heat_trace(&model, m0_sq, t, tol.min(1e-3))?;
                let mut v = to_value(&tr);
                v["t"] = json!(t);
                results.push(v);
            }
            if m0_sq > 0.0 {
                results.push(to_value(&heat_integral(&model, m0_sq, tol.min(1e-4))?));
            }
            true
        }
        Command::DetZeta => {
            results.push(to_value(&zeta_det(&model, m0_sq, m0_sq == 0.0, tol)?));
            true
        }
        Command::Det2 => {
            let d = match cfg.lambda_max {
                Some(l) => det2(&model, m0_sq, m1_sq, l)?,
                None => det2_auto(&model, m0_sq, m1_sq, tol)?,
            };
            let mut v = to_value(&d);
            v["value"] = json!(d.value());
            results.push(v);
            true
        }
        Command::Cf => {
            results.push(to_value(&cf_mean(&model, m0_sq)?));
            let oracle = match model.geometry() {
                Geometry::Sphere { radius } => sphere_cf_series(radius, cfg.m0)?,
                Geometry::RectTorus { l1, l2 } => torus_cf_image_sum(l1, l2, cfg.m0)?,
            };
            results.push(to_value(&oracle));
            results.push(json!({ "m0": cfg.m0, "gamma0": gamma0(cfg.m0)? }));
            true
        }
        Command::VerifyAnomaly => {
            let r = verify_thm2(&model, m0_sq, m1_sq, tol)?;
            results.push(to_value(&r));
            r.pass
        }
        Command::VerifyMainlemma => {
            let fit = mainlemma_fit(&model, m0_sq, &default_s_grid())?;
            let integral = heat_integral(&model, m0_sq, 1e-9)?;
            let pinned = dirichlet_finite_part(&model, m0_sq, &default_s_grid())?;
            let phase = residue_phase_space(&model);
            let weyl = model.weyl_density();
            let checks = [
                Check::abs("fit residue vs A/4pi", fit.residue, weyl, tol),
                Check::abs("phase-space volume vs A/4pi", phase, weyl, tol),
                Check::abs("fit residue vs phase-space volume", fit.residue, phase, tol),
                Check::abs("fit finite part vs heat integral", fit.finite_part, integral.value, tol),
                Check::abs("pinned-residue finite part vs heat integral", pinned, integral.value, tol),
            ];
            results.push(to_value(&fit));
            results.push(to_value(&integral));
            let pass = checks.iter().all(|c| c.pass);
            results.extend(checks.iter().map(to_value));
            pass
        }
        Command::VerifyMassless => {
            let r = verify_massless(&model, cfg.sigma, &[0.2, 0.1, 0.05], tol)?;
            results.push(to_value(&r));
            r.pass
        }
        Command::GffVerify => {
            let lambda_max = cfg.lambda_max.unwrap_or(42.0);
            let r = verify_measure_identity(&model, cfg.m0, cfg.m1, lambda_max, cfg.samples, cfg.seed)?;
            let d = det2(&model, m0_sq, m1_sq, lambda_max)?;
            let checks = [
                Check::z("measure identity z-score", r.identity.z_score, 3.0),
                Check::z("reweighted constant-mode variance z-score", r.reweighted_variance.z_score, 4.0),
                Check::abs("truncated log det2: sampler vs det2", r.truncated_log_det2, d.truncated_log, 1e-12),
            ];
            results.push(to_value(&r));
            let pass = checks.iter().all(|c| c.pass);
            results.extend(checks.iter().map(to_value));
            pass
        }
        Command::VerifyAll => {
            let criteria = acceptance::run_all(cfg.seed, cfg.samples)?;
            let pass = criteria.iter().all(|c| c.pass);
            results.extend(criteria.iter().map(to_value));
            pass
        }
    };
    Ok(Report {
        command: command.name(),
        inputs: cfg.inputs(command),
        results,
        pass,
        runtime_ms: start.elapsed().as_millis() as u64,
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        version: env!("CARGO_PKG_VERSION").to_string(),
    })
}

pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report::to_json(report),
        Format::Csv => report::to_csv(report),
    }
}
