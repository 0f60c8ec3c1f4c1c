//! Semi-flow of `u' = F(u)`, maximal equilibria and long-time limits.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::model::{sup_distance, sup_norm, SisModel, StateVector, SubsetMask};
use crate::ode::{self, Control, OdeOptions, OdeStatus};
use crate::spectral;
use crate::structure::{decompose, Antichain, AtomDecomposition};
use crate::tolerances::Tolerances;

/// Residual at which the descent from `1_A` hands over to the fixed-point
/// polish.
const DESCENT_RESIDUAL: f64 = 1e-8;
const POLISH_MAX_ITER: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalReason {
    ResidualConverged,
    TMaxReached,
    StepFailure,
}

/// Sampled solution of the semi-flow.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `‖F(u(t))‖∞` per sample.
    pub residuals: Vec<f64>,
    pub terminal_reason: TerminalReason,
    /// Largest correction applied when clamping states into `[0, 1]`.
    pub max_clamp: f64,
    /// Some clamp exceeded the warning threshold.
    pub clamp_warning: bool,
    pub accepted_steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("trajectory has at least the initial sample")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the initial sample")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("trajectory has at least the initial sample")
    }

    /// CSV with header `t,feature_0,…,feature_{n−1},residual`; floats carry
    /// 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, StateVector::len);
        let mut header = String::from("t");
        for i in 0..n {
            header.push_str(&format!(",feature_{i}"));
        }
        header.push_str(",residual");
        writeln!(out, "{header}")?;
        for ((t, s), r) in self.times.iter().zip(&self.states).zip(&self.residuals) {
            let mut line = fmt_float(*t);
            for v in s.values() {
                line.push(',');
                line.push_str(&fmt_float(*v));
            }
            line.push(',');
            line.push_str(&fmt_float(*r));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Round-trip exact float formatting used by every CSV writer.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Settings of [`integrate_with`].
#[derive(Debug, Clone)]
pub struct IntegrateOptions {
    pub t_max: f64,
    /// Early stop once `‖F(u)‖∞` falls to this value; 0 disables it.
    pub residual_tol: f64,
    pub rk_tol: f64,
    /// Record every `stride`-th accepted step (first and last always).
    pub stride: usize,
    /// Times that are always hit and recorded.
    pub checkpoints: Vec<f64>,
    pub clamp_warning: f64,
}

impl IntegrateOptions {
    pub fn new(t_max: f64, residual_tol: f64) -> Self {
        let tol = Tolerances::default();
        IntegrateOptions {
            t_max,
            residual_tol,
            rk_tol: tol.rk,
            stride: 1,
            checkpoints: Vec::new(),
            clamp_warning: tol.clamp_warning,
        }
    }

    pub fn from_tolerances(tol: &Tolerances) -> Self {
        IntegrateOptions { rk_tol: tol.rk, clamp_warning: tol.clamp_warning, ..Self::new(tol.t_max, tol.residual) }
    }
}

/// Integrates `u' = F(u)` from `h` up to `t_max`, stopping early when the
/// residual reaches `residual_tol`.
pub fn integrate(model: &SisModel, h: &StateVector, t_max: f64, residual_tol: f64) -> Result<Trajectory> {
    integrate_with(model, h, &IntegrateOptions::new(t_max, residual_tol))
}

pub fn integrate_with(model: &SisModel, h: &StateVector, opts: &IntegrateOptions) -> Result<Trajectory> {
    check_len(model.n(), h.len())?;
    integrate_field(|u, out| model.field_into(u, out), h, opts, |_, _| Ok(()))
}

/// Integrates an arbitrary vector field on `[0, 1]^n` with the clamping,
/// sampling and stopping rules of [`integrate_with`]. `hook` sees every
/// accepted state and may abort.
pub fn integrate_field<F, H>(field: F, h: &StateVector, opts: &IntegrateOptions, mut hook: H) -> Result<Trajectory>
where
    F: Fn(&[f64], &mut [f64]),
    H: FnMut(f64, &[f64]) -> Result<()>,
{
    if !(opts.t_max > 0.0) {
        return Err(Error::Input(format!("t_max must be positive, got {}", opts.t_max)));
    }
    let n = h.len();
    let mut dy = vec![0.0; n];
    field(h.values(), &mut dy);
    let r0 = sup_norm(&dy);
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![h.clone()],
        residuals: vec![r0],
        terminal_reason: TerminalReason::TMaxReached,
        max_clamp: 0.0,
        clamp_warning: false,
        accepted_steps: 0,
    };
    let reached = |r: f64| opts.residual_tol > 0.0 && r <= opts.residual_tol;
    if reached(r0) {
        traj.terminal_reason = TerminalReason::ResidualConverged;
        return Ok(traj);
    }
    let ode_opts = OdeOptions {
        rtol: opts.rk_tol,
        atol: opts.rk_tol,
        checkpoints: opts.checkpoints.clone(),
        ..OdeOptions::default()
    };
    let stride = opts.stride.max(1);
    let mut hook_error = None;
    let mut last_recorded = 0usize;
    let mut scratch = vec![0.0; n];
    let mut step_index = 0usize;
    let mut converged = false;
    let outcome = ode::integrate(&field, 0.0, h.values().to_vec(), opts.t_max, &ode_opts, |step| {
        step_index += 1;
        let mut clamp = 0.0_f64;
        for v in step.y.iter_mut() {
            let c = v.clamp(0.0, 1.0);
            clamp = clamp.max((c - *v).abs());
            *v = c;
        }
        traj.max_clamp = traj.max_clamp.max(clamp);
        let residual = if clamp > 0.0 {
            field(step.y, &mut scratch);
            sup_norm(&scratch)
        } else {
            sup_norm(step.dy)
        };
        if let Err(e) = hook(step.t, step.y) {
            hook_error = Some(e);
            return Control::Stop;
        }
        converged = reached(residual);
        if converged || step.checkpoint || step_index % stride == 0 {
            traj.times.push(step.t);
            traj.states.push(StateVector::clamped(step.y.to_vec()).0);
            traj.residuals.push(residual);
            last_recorded = step_index;
        }
        if converged {
            Control::Stop
        } else if clamp > 0.0 {
            Control::Modified
        } else {
            Control::Continue
        }
    });
    if let Some(e) = hook_error {
        return Err(e);
    }
    traj.accepted_steps = outcome.accepted;
    traj.clamp_warning = traj.max_clamp > opts.clamp_warning;
    if last_recorded != step_index && outcome.accepted > 0 {
        field(&outcome.y, &mut scratch);
        traj.times.push(outcome.t);
        traj.states.push(StateVector::clamped(outcome.y.clone()).0);
        traj.residuals.push(sup_norm(&scratch));
    }
    traj.terminal_reason = match outcome.status {
        OdeStatus::Stopped if converged => TerminalReason::ResidualConverged,
        OdeStatus::Completed | OdeStatus::Stopped => TerminalReason::TMaxReached,
        OdeStatus::StepUnderflow | OdeStatus::StepLimit => TerminalReason::StepFailure,
    };
    Ok(traj)
}

/// An equilibrium with its support and the antichain it corresponds to.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumRecord {
    pub state: StateVector,
    pub support: SubsetMask,
    pub antichain: Antichain,
    /// `‖F(g)‖∞`.
    pub residual: f64,
    pub is_maximal: bool,
}

/// Maximal equilibrium `g*_A` of the model projected on `mask`.
///
/// Only the future (inside `A`) of the supercritical atoms of the projected
/// model can carry infection; there the flow from the indicator function is
/// non-increasing, and it is followed until the residual is small. The
/// result is refined by the monotone iteration `g ← Ψ(T_A g)`, where `Ψ`
/// solves `φ(u)·p = γ·u` coordinatewise. The antichain of the record is
/// indexed by atoms of the decomposition of the projected model.
pub fn maximal_equilibrium(model: &SisModel, mask: &SubsetMask, tol: &Tolerances) -> Result<EquilibriumRecord> {
    check_len(model.n(), mask.len())?;
    let n = model.n();
    let projected = model.project(mask)?;
    let dp = decompose(&projected, tol)?;
    let antichain = dp.maximal_supercritical_antichain(mask)?;
    let carrier = dp.future_of(&antichain);
    if carrier.is_empty() {
        return Ok(EquilibriumRecord {
            state: StateVector::zeros(n),
            support: SubsetMask::empty(n),
            antichain,
            residual: 0.0,
            is_maximal: true,
        });
    }
    let restricted = model.project(&carrier)?;
    let start = StateVector::indicator(&carrier);
    let mut opts = IntegrateOptions::from_tolerances(tol);
    opts.residual_tol = DESCENT_RESIDUAL.max(tol.equilibrium);
    opts.stride = usize::MAX;
    let mut previous = start.values().to_vec();
    let slack = tol.monotone;
    let traj = integrate_field(|u, out| restricted.field_into(u, out), &start, &opts, |t, u| {
        if let Some(x) = (0..u.len()).find(|&x| u[x] > previous[x] + slack) {
            return Err(Error::Consistency(format!(
                "flow from the indicator increased at feature {x}, t = {t}: {} -> {}",
                previous[x], u[x]
            )));
        }
        previous.copy_from_slice(u);
        Ok(())
    })?;
    let state = polish(&restricted, &carrier, traj.final_state().values().to_vec(), tol.equilibrium)?;
    let residual = projected.residual(state.values());
    Ok(EquilibriumRecord { support: state.support(tol.support), state, antichain, residual, is_maximal: true })
}

/// Monotone fixed-point refinement `g ← Ψ(T g)` on `carrier`.
fn polish(model: &SisModel, carrier: &SubsetMask, mut g: Vec<f64>, target: f64) -> Result<StateVector> {
    let phi = model.incidence();
    let gamma = model.gamma();
    let mut pressure = vec![0.0; g.len()];
    let mut residual = model.residual(&g);
    let mut iterations = 0;
    while residual > target {
        if iterations >= POLISH_MAX_ITER {
            return Err(Error::Convergence { iterations, estimate: sup_norm(&g), residual });
        }
        for _ in 0..16 {
            model.apply_t_into(&g, &mut pressure);
            for x in carrier.indices() {
                g[x] = phi.balance_root(pressure[x], gamma[x]);
            }
        }
        iterations += 16;
        residual = model.residual(&g);
    }
    Ok(StateVector::clamped(g).0)
}

/// Long-time limit from `h`: the maximal equilibrium of `F(supp h)`.
pub fn predict_limit(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    h: &StateVector,
    tol: &Tolerances,
) -> Result<EquilibriumRecord> {
    check_len(model.n(), h.len())?;
    let reach = decomposition.future(&h.support(tol.support))?;
    let mut record = maximal_equilibrium(model, &reach, tol)?;
    record.antichain = decomposition.maximal_supercritical_antichain(&reach)?;
    let top = decomposition.maximal_supercritical_antichain(&SubsetMask::full(model.n()))?;
    record.is_maximal = record.antichain == top;
    record.residual = model.residual(record.state.values());
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    /// Fitted exponential rate of `‖u(t)‖∞` over the second half of the run.
    pub fitted_rate: f64,
    /// `−s(T − γ)`.
    pub bound_rate: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub initial_distance: f64,
    pub final_time: f64,
    pub final_residual: f64,
    pub terminal_reason: TerminalReason,
    pub sup_distance: f64,
    /// `‖γ (u − g)‖∞`.
    pub gamma_distance: f64,
    pub matched: bool,
    pub decay: Option<DecayFit>,
}

/// Integrates from `h` and compares the terminal state with `predicted`.
pub fn verify_limit(
    model: &SisModel,
    h: &StateVector,
    predicted: &EquilibriumRecord,
    t_max: f64,
    match_tol: f64,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_len(model.n(), h.len())?;
    let mut opts = IntegrateOptions::from_tolerances(tol);
    opts.t_max = t_max;
    let traj = integrate_with(model, h, &opts)?;
    compare_trajectory(model, &traj, predicted, match_tol, tol)
}

/// Compares the terminal state of an existing trajectory with `predicted`.
pub fn compare_trajectory(
    model: &SisModel,
    traj: &Trajectory,
    predicted: &EquilibriumRecord,
    match_tol: f64,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    check_len(model.n(), predicted.state.len())?;
    let h = &traj.states[0];
    let g = predicted.state.values();
    let end = traj.final_state().values();
    let gamma = model.gamma();
    let sup = sup_distance(end, g);
    let weighted = end
        .iter()
        .zip(g)
        .zip(gamma)
        .fold(0.0_f64, |m, ((u, v), c)| m.max(c * (u - v).abs()));
    let bound = spectral::spectral_bound(model, tol.spectral)?;
    let decay = if bound.sign == spectral::Sign::Negative { fit_decay(traj, -bound.value) } else { None };
    Ok(VerificationReport {
        initial_distance: sup_distance(h.values(), g),
        final_time: traj.final_time(),
        final_residual: traj.final_residual(),
        terminal_reason: traj.terminal_reason,
        sup_distance: sup,
        gamma_distance: weighted,
        matched: sup < match_tol && weighted < match_tol,
        decay,
    })
}

fn fit_decay(traj: &Trajectory, bound_rate: f64) -> Option<DecayFit> {
    let t_end = traj.final_time();
    let points: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| **t >= 0.5 * t_end)
        .filter_map(|(t, s)| {
            let norm = sup_norm(s.values());
            (norm > 0.0).then(|| (*t, norm.ln()))
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mean_t = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let fitted_rate = -sxy / sxx;
    Some(DecayFit { fitted_rate, bound_rate, relative_gap: (fitted_rate - bound_rate).abs() / bound_rate })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneFlowReport {
    pub steps: usize,
    /// Largest `u1 − u2` seen over all coordinates and accepted steps.
    pub max_violation: f64,
    pub ordered: bool,
}

/// Co-integrates from `h1 ≤ h2` and checks the entrywise order at every
/// accepted step.
pub fn check_monotone_flow(
    model: &SisModel,
    h1: &StateVector,
    h2: &StateVector,
    horizon: f64,
    tol: &Tolerances,
) -> Result<MonotoneFlowReport> {
    let n = model.n();
    check_len(n, h1.len())?;
    check_len(n, h2.len())?;
    if h1.values().iter().zip(h2.values()).any(|(a, b)| a > b) {
        return Err(Error::Precondition("h1 must be entrywise below h2".into()));
    }
    let mut stacked = h1.values().to_vec();
    stacked.extend_from_slice(h2.values());
    let start = StateVector::new(stacked)?;
    let mut opts = IntegrateOptions::from_tolerances(tol);
    opts.t_max = horizon;
    opts.residual_tol = 0.0;
    opts.stride = usize::MAX;
    let mut worst = f64::NEG_INFINITY;
    let mut steps = 0;
    integrate_field(
        |u, out| {
            let (a, b) = u.split_at(n);
            let (oa, ob) = out.split_at_mut(n);
            model.field_into(a, oa);
            model.field_into(b, ob);
        },
        &start,
        &opts,
        |_, u| {
            steps += 1;
            let (a, b) = u.split_at(n);
            for (x, y) in a.iter().zip(b) {
                worst = worst.max(x - y);
            }
            Ok(())
        },
    )?;
    let initial = h1.values().iter().zip(h2.values()).fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
    let max_violation = worst.max(initial).max(0.0);
    Ok(MonotoneFlowReport { steps, max_violation, ordered: max_violation <= tol.monotone })
}
