//! Explicit adaptive Dormand–Prince 5(4) integrator with FSAL, step-size
//! control on the embedded error estimate, optional exact checkpoints and a
//! per-step observer that may project or stop the solution.

/// Settings of [`integrate`].
#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
    /// Times the integrator must land on exactly (sorted, inside `(t0, t_end]`).
    pub checkpoints: Vec<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-10, h_max: f64::INFINITY, max_steps: 5_000_000, checkpoints: Vec::new() }
    }
}

/// Returned by the observer after each accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    /// The observer changed the state; the cached derivative is refreshed.
    Modified,
    Stop,
}

/// Accepted step handed to the observer.
pub struct Step<'a> {
    pub t: f64,
    pub y: &'a mut [f64],
    /// Derivative at `(t, y)` before any modification by the observer.
    pub dy: &'a [f64],
    /// The step landed on a checkpoint.
    pub checkpoint: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStatus {
    Completed,
    Stopped,
    StepUnderflow,
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub status: OdeStatus,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the autonomous system `y' = rhs(y)` from `t0` to `t_end`.
pub fn integrate<F, O>(
    mut rhs: F,
    t0: f64,
    y0: Vec<f64>,
    t_end: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> OdeOutcome
where
    F: FnMut(&[f64], &mut [f64]),
    O: FnMut(Step<'_>) -> Control,
{
    let n = y0.len();
    let mut y = y0;
    let mut t = t0;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut accepted = 0;
    let mut rejected = 0;
    let mut checkpoints = opts.checkpoints.iter().copied().filter(|&c| c > t0 && c <= t_end).peekable();

    rhs(&y, &mut k1);
    let mut h = initial_step(&mut rhs, &y, &k1, opts).min(opts.h_max).min(t_end - t0);
    let mut last_err = 1e-4_f64;

    while t < t_end {
        if accepted + rejected >= opts.max_steps {
            return OdeOutcome { t, y, accepted, rejected, status: OdeStatus::StepLimit };
        }
        let mut target = t_end;
        if let Some(&c) = checkpoints.peek() {
            target = target.min(c);
        }
        let mut landing = false;
        if t + h >= target || target - (t + h) < 1e-12 * target.abs().max(1.0) {
            h = target - t;
            landing = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return OdeOutcome { t, y, accepted, rejected, status: OdeStatus::StepUnderflow };
        }

        combine(&mut tmp, &y, h, &[(A21, &k1)]);
        rhs(&tmp, &mut k2);
        combine(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        rhs(&tmp, &mut k3);
        combine(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(&tmp, &mut k4);
        combine(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(&tmp, &mut k5);
        combine(&mut tmp, &y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        rhs(&tmp, &mut k6);
        combine(&mut y_new, &y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        rhs(&y_new, &mut k7);

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / scale).powi(2);
        }
        let err = if n > 0 { (err / n as f64).sqrt() } else { 0.0 };

        if err <= 1.0 {
            t = if landing { target } else { t + h };
            std::mem::swap(&mut y, &mut y_new);
            accepted += 1;
            let mut at_checkpoint = false;
            if landing && checkpoints.peek().is_some_and(|&c| c == target) {
                checkpoints.next();
                at_checkpoint = true;
            }
            match observer(Step { t, y: &mut y, dy: &k7, checkpoint: at_checkpoint }) {
                Control::Stop => {
                    return OdeOutcome { t, y, accepted, rejected, status: OdeStatus::Stopped };
                }
                Control::Modified => rhs(&y, &mut k1),
                Control::Continue => std::mem::swap(&mut k1, &mut k7),
            }
            // PI step-size controller.
            let e = err.max(1e-10);
            let factor = (0.9 * e.powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0)).clamp(0.2, 5.0);
            last_err = e;
            h = (h * factor).min(opts.h_max);
        } else {
            rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.1) } else { 0.1 };
            h *= factor;
        }
    }
    OdeOutcome { t, y, accepted, rejected, status: OdeStatus::Completed }
}

fn combine(out: &mut [f64], y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o = y[i] + h * acc;
    }
}

fn initial_step<F>(rhs: &mut F, y: &[f64], dy: &[f64], opts: &OdeOptions) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = y.len().max(1) as f64;
    let scale: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let norm = |v: &[f64]| (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n).sqrt();
    let d0 = norm(y);
    let d1 = norm(dy);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y.iter().zip(dy).map(|(a, b)| a + h0 * b).collect();
    let mut dy1 = vec![0.0; y.len()];
    rhs(&y1, &mut dy1);
    let diff: Vec<f64> = dy1.iter().zip(dy).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1)
}
