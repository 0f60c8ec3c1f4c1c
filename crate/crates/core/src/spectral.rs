//! Perron roots of nonnegative matrices and the reproduction numbers built
//! on them.
//!
//! The spectral radius of a nonnegative matrix is the largest Perron root of
//! its irreducible diagonal blocks, so every computation first splits the
//! matrix into strongly connected classes. Each class is solved with power
//! iteration on the shifted block `B + δI` (`δ = 1 + max diag`), which makes
//! the block primitive; slow cases switch to Noda's shifted inverse
//! iteration. Both phases stop on the Collatz–Wielandt bracket
//! `min (Bv)ᵢ/vᵢ ≤ ρ ≤ max (Bv)ᵢ/vᵢ`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::graph::DiGraph;
use crate::model::{sup_norm, SisModel, StateVector, SubsetMask};
use crate::structure::AtomDecomposition;

pub const DEFAULT_TOL: f64 = 1e-10;
/// Power iterations tried on a class before switching to Noda iteration.
const POWER_PHASE: usize = 200;
/// Slack of the entrywise supersolution inequality.
pub const SUPERSOLUTION_SLACK: f64 = 1e-12;
/// Target of the `ψ(a) = 1` bisection.
pub const PSI_TOL: f64 = 1e-9;

/// Perron root of a nonnegative matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralResult {
    pub radius: f64,
    /// Nonnegative eigenvector with sup-norm 1, when requested.
    pub eigenvector: Option<Vec<f64>>,
    pub iterations: usize,
    /// `‖Mv − ρv‖∞` for the eigenvector (or the dominant class vector).
    pub residual: f64,
}

pub fn iteration_cap(n: usize) -> usize {
    100 * n + 1000
}

fn check_nonnegative_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Input(format!(
            "matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(v) = m.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Input(format!("matrix entries must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

/// `ρ(M)` within `tol` (relative to `max(1, ρ)`).
pub fn spectral_radius(m: &DMatrix<f64>, tol: f64) -> Result<SpectralResult> {
    perron(m, tol, false)
}

/// `ρ(M)` together with a nonnegative right eigenvector.
pub fn perron_pair(m: &DMatrix<f64>, tol: f64) -> Result<SpectralResult> {
    perron(m, tol, true)
}

struct ClassRoot {
    radius: f64,
    vector: Vec<f64>,
    iterations: usize,
}

fn perron(m: &DMatrix<f64>, tol: f64, want_vector: bool) -> Result<SpectralResult> {
    check_nonnegative_square(m)?;
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(SpectralResult { radius: 0.0, eigenvector: Some(vec![]), iterations: 0, residual: 0.0 });
    }
    let graph = DiGraph::from_matrix(m);
    let classes = graph.strongly_connected_components();
    let cap = iteration_cap(n);
    let mut roots = Vec::with_capacity(classes.len());
    let mut iterations = 0;
    for class in &classes {
        let root = class_root(m, class, tol, cap)?;
        iterations += root.iterations;
        roots.push(root);
    }
    let (best, radius) = roots
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.radius > acc.1 { (i, r.radius) } else { acc });

    if !want_vector {
        let class = &classes[best];
        let residual = class_residual(m, class, &roots[best].vector, radius);
        return Ok(SpectralResult { radius, eigenvector: None, iterations, residual });
    }

    // Most downstream class attaining the radius: every class it reaches
    // has a strictly smaller root, so the eigenvector extends downstream.
    let near = |r: f64| r >= radius - tol * radius.max(1.0);
    let class_of: Vec<usize> = {
        let mut c = vec![0; n];
        for (ci, class) in classes.iter().enumerate() {
            for &x in class {
                c[x] = ci;
            }
        }
        c
    };
    let mut chosen = best;
    loop {
        let reach = graph.reachable(&SubsetMask::from_indices(n, &classes[chosen]));
        let next = (0..classes.len()).find(|&ci| {
            ci != chosen && near(roots[ci].radius) && reach.contains(classes[ci][0])
        });
        match next {
            Some(ci) => chosen = ci,
            None => break,
        }
    }
    let root = &roots[chosen];
    let mut v = vec![0.0; n];
    for (&x, &val) in classes[chosen].iter().zip(&root.vector) {
        v[x] = val;
    }
    let reach = graph.reachable(&SubsetMask::from_indices(n, &classes[chosen]));
    let down: Vec<usize> = reach.indices().filter(|&x| class_of[x] != chosen).collect();
    if !down.is_empty() {
        let k = down.len();
        let rho = root.radius;
        let a = DMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { rho } else { 0.0 };
            id - m[(down[i], down[j])]
        });
        let rhs = DVector::from_fn(k, |i, _| {
            classes[chosen].iter().map(|&y| m[(down[i], y)] * v[y]).sum::<f64>()
        });
        let sol = a.lu().solve(&rhs).ok_or_else(|| Error::Convergence {
            iterations,
            estimate: radius,
            residual: f64::NAN,
        })?;
        for (i, &x) in down.iter().enumerate() {
            v[x] = sol[i].max(0.0);
        }
    }
    let scale = sup_norm(&v);
    if scale > 0.0 {
        v.iter_mut().for_each(|x| *x /= scale);
    }
    let mv = m * DVector::from_column_slice(&v);
    let residual = v.iter().zip(mv.iter()).fold(0.0_f64, |r, (vi, mvi)| r.max((mvi - root.radius * vi).abs()));
    Ok(SpectralResult { radius, eigenvector: Some(v), iterations, residual })
}

fn class_residual(m: &DMatrix<f64>, class: &[usize], v: &[f64], rho: f64) -> f64 {
    class
        .iter()
        .zip(v)
        .map(|(&x, &vx)| {
            let mv: f64 = class.iter().zip(v).map(|(&y, &vy)| m[(x, y)] * vy).sum();
            (mv - rho * vx).abs()
        })
        .fold(0.0, f64::max)
}

/// Collatz–Wielandt bracket of `B v` against `v` (v > 0).
fn bracket(bv: &[f64], v: &[f64]) -> (f64, f64) {
    bv.iter().zip(v).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
        let r = a / b;
        (lo.min(r), hi.max(r))
    })
}

fn class_root(m: &DMatrix<f64>, class: &[usize], tol: f64, cap: usize) -> Result<ClassRoot> {
    let k = class.len();
    if k == 1 {
        let x = class[0];
        return Ok(ClassRoot { radius: m[(x, x)], vector: vec![1.0], iterations: 0 });
    }
    let block = DMatrix::from_fn(k, k, |i, j| m[(class[i], class[j])]);
    let shift = 1.0 + block.diagonal().max();
    let mut v = DVector::from_element(k, 1.0);
    let mut iterations = 0;
    let converged = |lo: f64, hi: f64| hi - lo <= tol * hi.abs().max(1.0);
    let finish = |v: DVector<f64>, lo: f64, hi: f64, iterations| {
        let scale = v.max();
        ClassRoot { radius: 0.5 * (lo + hi), vector: (v / scale).iter().copied().collect(), iterations }
    };

    let mut bv = &block * &v;
    let (mut lo, mut hi) = bracket(bv.as_slice(), v.as_slice());
    while iterations < POWER_PHASE.min(cap) {
        if converged(lo, hi) {
            return Ok(finish(v, lo, hi, iterations));
        }
        iterations += 1;
        let w = &bv + &v * shift;
        v = &w / w.max();
        bv = &block * &v;
        (lo, hi) = bracket(bv.as_slice(), v.as_slice());
    }

    // Noda iteration: v ← (σ − B)⁻¹ v with σ the upper bracket.
    let mut sigma = hi;
    while iterations < cap {
        if converged(lo, hi) {
            return Ok(finish(v, lo, hi, iterations));
        }
        iterations += 1;
        let a = DMatrix::from_fn(k, k, |i, j| if i == j { sigma } else { 0.0 }) - &block;
        let y = match a.lu().solve(&v) {
            Some(y) if y.iter().all(|t| t.is_finite() && *t > 0.0) => y,
            // σ fell onto the root in floating point.
            _ => return Ok(finish(v, lo, hi, iterations)),
        };
        v = &y / y.max();
        bv = &block * &v;
        (lo, hi) = bracket(bv.as_slice(), v.as_slice());
        sigma = hi;
    }
    if converged(lo, hi) {
        return Ok(finish(v, lo, hi, iterations));
    }
    Err(Error::Convergence { iterations, estimate: 0.5 * (lo + hi), residual: hi - lo })
}

/// Matrix of `(T M_{1/γ})_A`: entries `1_A(x)·k(x,y)·μ(y)/γ(y)·1_A(y)`.
pub fn next_generation_matrix(model: &SisModel, mask: &SubsetMask) -> Result<DMatrix<f64>> {
    check_len(model.n(), mask.len())?;
    let t = model.operator_matrix();
    let g = model.gamma();
    let n = model.n();
    Ok(DMatrix::from_fn(n, n, |x, y| {
        if mask.contains(x) && mask.contains(y) {
            t[(x, y)] / g[y]
        } else {
            0.0
        }
    }))
}

/// Basic reproduction number of the model restricted to `mask`.
pub fn r0(model: &SisModel, mask: &SubsetMask, tol: f64) -> Result<f64> {
    model.require_valid_signs()?;
    if mask.is_empty() {
        check_len(model.n(), mask.len())?;
        return Ok(0.0);
    }
    Ok(spectral_radius(&next_generation_matrix(model, mask)?, tol)?.radius)
}

/// Effective reproduction number `ρ(T M_{1/γ} M_η)`.
pub fn re(model: &SisModel, eta: &StateVector, tol: f64) -> Result<f64> {
    model.require_valid_signs()?;
    check_len(model.n(), eta.len())?;
    let t = model.operator_matrix();
    let g = model.gamma();
    let e = eta.values();
    let n = model.n();
    let m = DMatrix::from_fn(n, n, |x, y| t[(x, y)] * e[y] / g[y]);
    Ok(spectral_radius(&m, tol)?.radius)
}

/// `max R0(B)` over non-zero atoms `B ⊂ A`. `A` must be a union of atoms.
pub fn schwartz_radius(decomposition: &AtomDecomposition, mask: &SubsetMask) -> Result<f64> {
    check_len(decomposition.n(), mask.len())?;
    let mut best = 0.0_f64;
    for atom in decomposition.atoms() {
        if atom.mask.is_subset_of(mask) {
            if !atom.class.is_zero() {
                best = best.max(atom.r0);
            }
        } else if !atom.mask.is_disjoint(mask) {
            return Err(Error::NotAdmissible(format!(
                "set {} splits atom {}",
                mask.bitstring(),
                atom.mask.bitstring()
            )));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(value: f64, band: f64) -> Sign {
        if value > band {
            Sign::Positive
        } else if value < -band {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Sign of the spectral bound `s(T − γ)` with its cross-check against `R0 − 1`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralBound {
    pub sign: Sign,
    pub value: f64,
    /// Shift `c` with `s(T − γ) = ρ(T − γ + c) − c`.
    pub shift: f64,
    pub r0: f64,
    /// `sign(R0 − 1)` agrees with `sign`.
    pub consistent_with_r0: bool,
}

pub fn spectral_bound(model: &SisModel, tol: f64) -> Result<SpectralBound> {
    model.require_valid_signs()?;
    let n = model.n();
    let g = model.gamma();
    let c = g.iter().cloned().fold(0.0, f64::max) + 1.0;
    let t = model.operator_matrix();
    let shifted = DMatrix::from_fn(n, n, |x, y| t[(x, y)] + if x == y { c - g[x] } else { 0.0 });
    let rho = spectral_radius(&shifted, tol)?.radius;
    let value = rho - c;
    let band = 10.0 * tol * rho.max(1.0);
    let sign = Sign::of(value, band);
    let r0 = r0(model, &SubsetMask::full(n), tol)?;
    let r0_sign = Sign::of(r0 - 1.0, 10.0 * tol * r0.max(1.0));
    Ok(SpectralBound { sign, value, shift: c, r0, consistent_with_r0: sign == r0_sign })
}

/// Solution of `Tw − γw = λw`, `λ > 0`, `w ≥ 0`, `‖w‖∞ = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Eigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    /// `‖Tw − γw − λw‖∞`.
    pub residual: f64,
    pub bisection_steps: usize,
}

/// `ψ(a) = ρ(T M_{1/(γ+a)})`.
fn psi(model: &SisModel, a: f64, tol: f64, want_vector: bool) -> Result<SpectralResult> {
    let t = model.operator_matrix();
    let g = model.gamma();
    let n = model.n();
    let m = DMatrix::from_fn(n, n, |x, y| t[(x, y)] / (g[y] + a));
    perron(&m, tol, want_vector)
}

/// Finds `a > 0` with `ψ(a) = 1` by bisection; then `λ = a` and `w` is the
/// Perron vector of `T M_{1/(γ+a)}` divided by `γ + a`.
pub fn supersolution_eigenpair(model: &SisModel, tol: f64) -> Result<Eigenpair> {
    let n = model.n();
    let r0_full = r0(model, &SubsetMask::full(n), tol)?;
    if r0_full <= 1.0 {
        return Err(Error::Precondition(format!("R0 = {r0_full} must exceed 1")));
    }
    let t = model.operator_matrix();
    let upper = (0..n).map(|x| t.row(x).sum()).fold(0.0, f64::max);
    let inner_tol = tol.min(1e-13);
    let mut lo = 0.0_f64;
    let mut hi = upper;
    let psi_hi = psi(model, hi, inner_tol, false)?.radius;
    if psi_hi > 1.0 {
        return Err(Error::Convergence { iterations: 0, estimate: hi, residual: psi_hi - 1.0 });
    }
    let mut steps = 0;
    let mut a = 0.5 * (lo + hi);
    while steps < 200 {
        steps += 1;
        a = 0.5 * (lo + hi);
        let value = psi(model, a, inner_tol, false)?.radius;
        if (value - 1.0).abs() <= 1e-3 * PSI_TOL || hi - lo <= 4.0 * f64::EPSILON * (1.0 + upper) {
            break;
        }
        if value > 1.0 {
            lo = a;
        } else {
            hi = a;
        }
    }
    let pair = psi(model, a, inner_tol, true)?;
    if (pair.radius - 1.0).abs() > PSI_TOL {
        return Err(Error::Convergence { iterations: steps, estimate: a, residual: pair.radius - 1.0 });
    }
    let w = pair.eigenvector.expect("eigenvector requested");
    let g = model.gamma();
    let mut z: Vec<f64> = w.iter().zip(g).map(|(wi, gi)| wi / (gi + a)).collect();
    let scale = sup_norm(&z);
    z.iter_mut().for_each(|v| *v /= scale);
    let tz = model.apply_t(&z)?;
    let residual = tz
        .iter()
        .zip(&z)
        .zip(g)
        .map(|((tzi, zi), gi)| (tzi - gi * zi - a * zi).abs())
        .fold(0.0, f64::max);
    Ok(Eigenpair { lambda: a, vector: z, residual, bisection_steps: steps })
}

/// Which conclusion a supersolution `S v ≥ λ v` supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SupersolutionBound {
    /// `ρ(S_A) ≥ λ`.
    AtLeast,
    /// `S v = λ v` on `A`: `ρ(S_A) = λ`.
    Equal,
    /// `S v − λ v > 0` on `A`: `ρ(S_A) > λ`.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SupersolutionCheck {
    Certified { lambda: f64, support: SubsetMask, bound: SupersolutionBound },
    Refused { coordinate: usize, deficit: f64 },
}

/// Checks `S v ≥ λ v` for `S = T M_{1/γ}` and classifies the resulting
/// bound on `ρ(S_{supp v})`.
pub fn check_supersolution(model: &SisModel, v: &[f64], lambda: f64) -> Result<SupersolutionCheck> {
    model.require_valid_signs()?;
    check_len(model.n(), v.len())?;
    if v.iter().any(|x| *x < 0.0) || v.iter().all(|x| *x == 0.0) {
        return Err(Error::Precondition("v must be nonnegative and non-zero".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let scaled: Vec<f64> = v.iter().zip(model.gamma()).map(|(x, g)| x / g).collect();
    let sv = model.apply_t(&scaled)?;
    let mut equal = true;
    let mut strict = true;
    for (x, (&s, &vx)) in sv.iter().zip(v).enumerate() {
        let gap = s - lambda * vx;
        if gap < -SUPERSOLUTION_SLACK {
            return Ok(SupersolutionCheck::Refused { coordinate: x, deficit: -gap });
        }
        if vx > 0.0 {
            equal &= gap.abs() <= SUPERSOLUTION_SLACK;
            strict &= gap > SUPERSOLUTION_SLACK;
        }
    }
    let bound = if equal {
        SupersolutionBound::Equal
    } else if strict {
        SupersolutionBound::Strict
    } else {
        SupersolutionBound::AtLeast
    };
    let support = SubsetMask::new(v.iter().map(|x| *x > 0.0).collect());
    Ok(SupersolutionCheck::Certified { lambda, support, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::Incidence;

    fn mat(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    fn scalar(k: f64, g: f64) -> SisModel {
        SisModel::from_rows(&[vec![k]], vec![g], Incidence::mass_action()).unwrap()
    }

    #[test]
    fn radius_examples() {
        assert_eq!(spectral_radius(&mat(&[&[2.0]]), DEFAULT_TOL).unwrap().radius, 2.0);
        let periodic = spectral_radius(&mat(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_TOL).unwrap();
        assert!((periodic.radius - 1.0).abs() < DEFAULT_TOL);
        let tri = spectral_radius(&mat(&[&[1.0, 0.0], &[5.0, 2.0]]), DEFAULT_TOL).unwrap();
        assert!((tri.radius - 2.0).abs() < DEFAULT_TOL);
    }

    #[test]
    fn radius_errors() {
        assert!(matches!(spectral_radius(&DMatrix::zeros(2, 3), 1e-10), Err(Error::Input(_))));
        assert!(matches!(spectral_radius(&mat(&[&[-1.0]]), 1e-10), Err(Error::Input(_))));
    }

    #[test]
    fn tiny_entries_converge() {
        // The unit shift dominates this block; the Noda phase takes over.
        let m = mat(&[&[0.0, 1e-4, 0.0], &[0.0, 0.0, 2e-4], &[3e-4, 1e-5, 0.0]]);
        let r = spectral_radius(&m, 1e-12).unwrap();
        // Characteristic polynomial λ³ − (2e-4·1e-5)λ − 1e-4·2e-4·3e-4.
        let p = |l: f64| l * l * l - 2e-9 * l - 6e-12;
        let (mut lo, mut hi) = (0.0, 1e-3);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p(mid) > 0.0 { hi = mid } else { lo = mid }
        }
        assert!((r.radius - lo).abs() < 1e-12, "{} vs {lo}", r.radius);
    }

    #[test]
    fn eigenvector_of_reducible_matrix() {
        // Dominant class {0} feeds {1}: v = (1, 5/(3-1)) normalized.
        let m = mat(&[&[3.0, 0.0], &[5.0, 1.0]]);
        let r = perron_pair(&m, DEFAULT_TOL).unwrap();
        let v = r.eigenvector.unwrap();
        assert!((r.radius - 3.0).abs() < 1e-12);
        assert!((v[0] - 0.4).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-12);

        let nil = perron_pair(&mat(&[&[0.0, 0.0], &[1.0, 0.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(nil.radius, 0.0);
        assert_eq!(nil.eigenvector.unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn r0_and_re_examples() {
        let m = scalar(3.0, 1.5);
        assert!((r0(&m, &SubsetMask::full(1), DEFAULT_TOL).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(r0(&m, &SubsetMask::empty(1), DEFAULT_TOL).unwrap(), 0.0);
        let z = SisModel::from_rows(
            &[vec![2.0, 0.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 2.0]],
            vec![1.0; 3],
            Incidence::mass_action(),
        )
        .unwrap();
        assert!((r0(&z, &SubsetMask::full(3), DEFAULT_TOL).unwrap() - 2.0).abs() < DEFAULT_TOL);

        let z_r0 = r0(&z, &SubsetMask::full(3), DEFAULT_TOL).unwrap();
        assert!((re(&z, &StateVector::ones(3), DEFAULT_TOL).unwrap() - z_r0).abs() < 1e-15);
        assert_eq!(re(&z, &StateVector::zeros(3), DEFAULT_TOL).unwrap(), 0.0);
        let four = scalar(4.0, 1.0);
        let half = StateVector::new(vec![0.5]).unwrap();
        assert_eq!(re(&four, &half, DEFAULT_TOL).unwrap(), 2.0);
    }

    #[test]
    fn spectral_bound_examples() {
        let b = spectral_bound(&scalar(2.0, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(b.sign, Sign::Positive);
        assert!((b.value - 1.0).abs() < 1e-12);
        let b = spectral_bound(&scalar(1.0, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(b.sign, Sign::Zero);
        assert!(b.consistent_with_r0);
        let b = spectral_bound(&scalar(0.5, 1.0), DEFAULT_TOL).unwrap();
        assert_eq!(b.sign, Sign::Negative);
        assert!((b.value + 0.5).abs() < 1e-12);
        assert!(b.consistent_with_r0);
    }

    #[test]
    fn eigenpair_examples() {
        let p = supersolution_eigenpair(&scalar(2.0, 1.0), DEFAULT_TOL).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-9);
        assert_eq!(p.vector, vec![1.0]);
        let p = supersolution_eigenpair(&scalar(3.0, 2.0), DEFAULT_TOL).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-9);

        let d = SisModel::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]], vec![1.0, 1.0], Incidence::mass_action())
            .unwrap();
        let p = supersolution_eigenpair(&d, DEFAULT_TOL).unwrap();
        assert!((p.lambda - 2.0).abs() < 1e-9);
        assert_eq!(p.vector, vec![0.0, 1.0]);
        assert!(p.residual <= 1e-9);

        assert!(matches!(
            supersolution_eigenpair(&scalar(0.5, 1.0), DEFAULT_TOL),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn supersolution_examples() {
        let m = scalar(2.0, 1.0);
        let c = check_supersolution(&m, &[1.0], 2.0).unwrap();
        assert!(matches!(c, SupersolutionCheck::Certified { bound: SupersolutionBound::Equal, .. }));
        let c = check_supersolution(&m, &[1.0], 1.5).unwrap();
        assert!(matches!(c, SupersolutionCheck::Certified { bound: SupersolutionBound::Strict, .. }));
        let c = check_supersolution(&m, &[1.0], 3.0).unwrap();
        assert_eq!(c, SupersolutionCheck::Refused { coordinate: 0, deficit: 1.0 });
    }
}
