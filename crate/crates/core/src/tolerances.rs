use serde::Serialize;

use crate::error::{Error, Result};

/// Numerical thresholds shared by the analysis routines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Perron-root accuracy.
    pub spectral: f64,
    /// Half-width of the critical band around `R0 = 1`.
    pub classification: f64,
    /// Entries above this count as part of a support.
    pub support: f64,
    /// Target `‖F(g)‖∞` for equilibria.
    pub equilibrium: f64,
    /// Distance below which a state matches an equilibrium.
    pub matching: f64,
    /// Early-stop residual of trajectories.
    pub residual: f64,
    /// Local error of the Runge–Kutta pair.
    pub rk: f64,
    /// Clamps into `[0, 1]` larger than this are flagged.
    pub clamp_warning: f64,
    /// Slack on monotonicity checks along trajectories.
    pub monotone: f64,
    pub t_max: f64,
    /// Limit on the number of supercritical atoms for antichain enumeration.
    pub antichain_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            spectral: 1e-10,
            classification: 1e-9,
            support: 1e-8,
            equilibrium: 1e-10,
            matching: 1e-6,
            residual: 1e-10,
            rk: 1e-10,
            clamp_warning: 1e-9,
            monotone: 1e-9,
            t_max: 1e4,
            antichain_cap: 20,
        }
    }
}

impl Tolerances {
    /// Overrides one field by name, as in `--tol matching=1e-5`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::Input(format!("tolerance {key} must be positive, got {value}")));
        }
        let slot = match key {
            "spectral" => &mut self.spectral,
            "classification" => &mut self.classification,
            "support" => &mut self.support,
            "equilibrium" => &mut self.equilibrium,
            "matching" | "match" => &mut self.matching,
            "residual" => &mut self.residual,
            "rk" => &mut self.rk,
            "clamp_warning" => &mut self.clamp_warning,
            "monotone" => &mut self.monotone,
            "t_max" => &mut self.t_max,
            "antichain_cap" => {
                self.antichain_cap = value as usize;
                return Ok(());
            }
            _ => return Err(Error::Input(format!("unknown tolerance {key}"))),
        };
        *slot = value;
        Ok(())
    }
}
