//! Incidence functions `φ` multiplying the infection pressure, and a grid
//! based conformity check (`φ(0) = 1`, `φ(1) = 0`, decreasing on `[0, 1]`).

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on the endpoint values `φ(0) = 1` and `φ(1) = 0`.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Non-negative steps up to this size are reported as plateaus (warnings).
pub const PLATEAU_TOL: f64 = 1e-14;
/// Smallest grid accepted by [`Incidence::check_conformity`].
pub const MIN_GRID: usize = 16;

type PhiFn = dyn Fn(f64) -> f64 + Send + Sync;

/// The incidence function of the SIS vector field.
#[derive(Clone)]
pub enum Incidence {
    /// `1 - u`.
    MassAction,
    /// `(1 - u)(1 - a u)`.
    LondonYorke { a: f64 },
    /// `(1 - u)^alpha`.
    Power { alpha: f64 },
    /// `(1 - u) / (1 + c u)`.
    Saturation { c: f64 },
    /// `(1 - u)(1 - exp(-c u)) / (c u)`, equal to 1 at `u = 0`.
    ExponentialSaturation { c: f64 },
    /// `(1 - u) log(1 + c u) / (c u)`, equal to 1 at `u = 0`.
    LogSaturation { c: f64 },
    /// Values on a uniform grid of `[0, 1]`, linearly interpolated (and
    /// linearly extrapolated from the end segments).
    Tabulated { values: Vec<f64> },
    /// Arbitrary user function.
    Custom { name: String, f: Arc<PhiFn> },
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidIncidence(format!("parameter {name} must be finite, got {v}")))
    }
}

impl Incidence {
    pub fn mass_action() -> Self {
        Incidence::MassAction
    }

    pub fn london_yorke(a: f64) -> Result<Self> {
        Ok(Incidence::LondonYorke { a: finite("a", a)? })
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Ok(Incidence::Power { alpha: finite("alpha", alpha)? })
    }

    pub fn saturation(c: f64) -> Result<Self> {
        Ok(Incidence::Saturation { c: finite("c", c)? })
    }

    pub fn exponential_saturation(c: f64) -> Result<Self> {
        Ok(Incidence::ExponentialSaturation { c: finite("c", c)? })
    }

    pub fn log_saturation(c: f64) -> Result<Self> {
        Ok(Incidence::LogSaturation { c: finite("c", c)? })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidIncidence(
                "a tabulated incidence needs at least two values".into(),
            ));
        }
        for (i, v) in values.iter().enumerate() {
            finite(&format!("values[{i}]"), *v)?;
        }
        Ok(Incidence::Tabulated { values })
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Incidence::Custom { name: name.into(), f: Arc::new(f) }
    }

    /// Family name as used in model files.
    pub fn family(&self) -> &str {
        match self {
            Incidence::MassAction => "mass_action",
            Incidence::LondonYorke { .. } => "london_yorke",
            Incidence::Power { .. } => "power",
            Incidence::Saturation { .. } => "saturation",
            Incidence::ExponentialSaturation { .. } => "exponential_saturation",
            Incidence::LogSaturation { .. } => "log_saturation",
            Incidence::Tabulated { .. } => "tabulated",
            Incidence::Custom { .. } => "custom",
        }
    }

    /// Evaluates `φ(r)`. Arguments outside `[0, 1]` use a continuous,
    /// decreasing extension of each formula.
    pub fn evaluate(&self, r: f64) -> f64 {
        match self {
            Incidence::MassAction => 1.0 - r,
            Incidence::LondonYorke { a } => (1.0 - r) * (1.0 - a * r),
            Incidence::Power { alpha } => {
                if r <= 1.0 {
                    (1.0 - r).powf(*alpha)
                } else {
                    -(r - 1.0).powf(*alpha)
                }
            }
            Incidence::Saturation { c } => (1.0 - r) / (1.0 + c * r),
            Incidence::ExponentialSaturation { c } => {
                let x = c * r;
                let ratio = if x.abs() < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
                (1.0 - r) * ratio
            }
            Incidence::LogSaturation { c } => {
                let x = c * r;
                let ratio = if x.abs() < 1e-8 {
                    1.0 - 0.5 * x + x * x / 3.0
                } else {
                    x.ln_1p() / x
                };
                (1.0 - r) * ratio
            }
            Incidence::Tabulated { values } => interpolate(values, r),
            Incidence::Custom { f, .. } => f(r),
        }
    }

    /// Root `u ∈ [0, 1]` of `φ(u)·pressure = gamma·u` for `pressure ≥ 0`,
    /// `gamma > 0`. Unique when `φ` is decreasing and nonnegative on `[0, 1]`;
    /// the map `pressure ↦ u` is then non-decreasing.
    pub fn balance_root(&self, pressure: f64, gamma: f64) -> f64 {
        if pressure <= 0.0 {
            return 0.0;
        }
        if let Incidence::MassAction = self {
            return pressure / (pressure + gamma);
        }
        let g = |u: f64| self.evaluate(u) * pressure - gamma * u;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        if g(hi) >= 0.0 {
            return 1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Samples `φ` on `grid_size + 1` uniform points of `[0, 1]` and checks
    /// the endpoint values, strict decrease and nonnegativity.
    pub fn check_conformity(&self, grid_size: usize) -> Result<ConformityReport> {
        if grid_size < MIN_GRID {
            return Err(Error::Precondition(format!(
                "grid_size must be at least {MIN_GRID}, got {grid_size}"
            )));
        }
        let h = 1.0 / grid_size as f64;
        let samples: Vec<f64> = (0..=grid_size)
            .map(|i| self.evaluate(if i == grid_size { 1.0 } else { i as f64 * h }))
            .collect();
        let mut report = ConformityReport {
            family: self.family().to_string(),
            grid_size,
            phi_at_zero: samples[0],
            phi_at_one: samples[grid_size],
            lipschitz_estimate: 0.0,
            violations: Vec::new(),
            warnings: Vec::new(),
        };
        if samples.iter().any(|v| !v.is_finite()) {
            report.violations.push("phi is not finite on [0, 1]".into());
            return Ok(report);
        }
        if (samples[0] - 1.0).abs() > ENDPOINT_TOL {
            report.violations.push(format!("phi(0) = {} must equal 1", samples[0]));
        }
        if samples[grid_size].abs() > ENDPOINT_TOL {
            report.violations.push(format!("phi(1) = {} must equal 0", samples[grid_size]));
        }
        let mut plateaus = 0usize;
        let mut first_increase = None;
        for (i, w) in samples.windows(2).enumerate() {
            let step = w[1] - w[0];
            report.lipschitz_estimate = report.lipschitz_estimate.max(step.abs() / h);
            if step > PLATEAU_TOL {
                first_increase.get_or_insert(i);
            } else if step >= 0.0 {
                plateaus += 1;
            }
        }
        if let Some(i) = first_increase {
            report.violations.push(format!(
                "phi is not decreasing: increases between u = {} and u = {}",
                i as f64 * h,
                (i + 1) as f64 * h
            ));
        }
        if plateaus > 0 {
            report
                .warnings
                .push(format!("{plateaus} grid step(s) with phi flat within {PLATEAU_TOL:e}"));
        }
        if let Some(i) = samples.iter().position(|v| *v < 0.0) {
            report.violations.push(format!("phi is negative at u = {}", i as f64 * h));
        }
        Ok(report)
    }
}

fn interpolate(values: &[f64], r: f64) -> f64 {
    let segments = values.len() - 1;
    let pos = r * segments as f64;
    let i = (pos.floor().max(0.0) as usize).min(segments - 1);
    let frac = pos - i as f64;
    values[i] + frac * (values[i + 1] - values[i])
}

impl fmt::Debug for Incidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Incidence::MassAction => write!(f, "MassAction"),
            Incidence::LondonYorke { a } => write!(f, "LondonYorke {{ a: {a} }}"),
            Incidence::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            Incidence::Saturation { c } => write!(f, "Saturation {{ c: {c} }}"),
            Incidence::ExponentialSaturation { c } => {
                write!(f, "ExponentialSaturation {{ c: {c} }}")
            }
            Incidence::LogSaturation { c } => write!(f, "LogSaturation {{ c: {c} }}"),
            Incidence::Tabulated { values } => write!(f, "Tabulated({} values)", values.len()),
            Incidence::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Outcome of [`Incidence::check_conformity`].
#[derive(Debug, Clone, Serialize)]
pub struct ConformityReport {
    pub family: String,
    pub grid_size: usize,
    pub phi_at_zero: f64,
    pub phi_at_one: f64,
    /// Largest slope between adjacent grid points.
    pub lipschitz_estimate: f64,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ConformityReport {
    pub fn is_conforming(&self) -> bool {
        self.violations.is_empty()
    }
}
