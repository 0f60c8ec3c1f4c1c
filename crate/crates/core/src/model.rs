//! Model data: the weighted feature space, the kernel and recovery rates, the
//! SIS vector field `F(u) = φ(u)·Tu − γ·u` and projections onto subsets.

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::incidence::{ConformityReport, Incidence};

/// Grid used by [`SisModel::validate_assumptions`] for the incidence check.
pub const VALIDATION_GRID: usize = 4096;

/// Finite set of features with strictly positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpace {
    weights: Vec<f64>,
    labels: Vec<String>,
}

impl FeatureSpace {
    pub fn new(weights: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidModel("at least one feature is required".into()));
        }
        check_len(weights.len(), labels.len())?;
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidModel(format!(
                "weight of feature {i} must be finite and strictly positive, got {}",
                weights[i]
            )));
        }
        Ok(FeatureSpace { weights, labels })
    }

    /// Unit weights, labels `x0, x1, ...`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n], (0..n).map(|i| format!("x{i}")).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// A subset of the features.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask(Vec<bool>);

impl SubsetMask {
    pub fn new(members: Vec<bool>) -> Self {
        SubsetMask(members)
    }

    pub fn empty(n: usize) -> Self {
        SubsetMask(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        SubsetMask(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut m = vec![false; n];
        for &i in indices {
            m[i] = true;
        }
        SubsetMask(m)
    }

    /// Length of the underlying feature space.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i] = true;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn union(&self, other: &SubsetMask) -> SubsetMask {
        SubsetMask(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &SubsetMask) -> SubsetMask {
        SubsetMask(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn complement(&self) -> SubsetMask {
        SubsetMask(self.0.iter().map(|b| !b).collect())
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }

    pub fn is_disjoint(&self, other: &SubsetMask) -> bool {
        !self.0.iter().zip(&other.0).any(|(a, b)| *a && *b)
    }

    /// One character per feature, `1` for members.
    pub fn bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    /// Entrywise product of `f` with the indicator of the set.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        f.iter().zip(&self.0).map(|(v, &b)| if b { *v } else { 0.0 }).collect()
    }
}

impl Serialize for SubsetMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.bitstring())
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

/// Proportions infected per feature, every entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Input(format!(
                "state entry {i} = {} is outside [0, 1]",
                values[i]
            )));
        }
        Ok(StateVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        StateVector(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        StateVector(vec![1.0; n])
    }

    /// Indicator function of `mask`.
    pub fn indicator(mask: &SubsetMask) -> Self {
        StateVector(mask.as_slice().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect())
    }

    /// Clamps every entry into `[0, 1]`; returns the state and the largest
    /// correction applied.
    pub fn clamped(mut values: Vec<f64>) -> (Self, f64) {
        let mut worst = 0.0_f64;
        for v in values.iter_mut() {
            let c = v.clamp(0.0, 1.0);
            worst = worst.max((c - *v).abs());
            *v = c;
        }
        (StateVector(values), worst)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Entries strictly above `tol`.
    pub fn support(&self, tol: f64) -> SubsetMask {
        SubsetMask(self.0.iter().map(|&v| v > tol).collect())
    }
}

/// The SIS model `(T, γ, φ)` in finite dimension.
///
/// The transmission operator acts as `(T f)(x) = Σ_y kernel[x][y]·f(y)·μ(y)`;
/// the product `kernel[x][y]·μ(y)` is cached as the matrix of `T`.
#[derive(Debug, Clone)]
pub struct SisModel {
    space: FeatureSpace,
    kernel: DMatrix<f64>,
    gamma: Vec<f64>,
    incidence: Incidence,
    operator: DMatrix<f64>,
}

impl SisModel {
    /// Checks dimensions and finiteness only; sign conditions are reported by
    /// [`SisModel::validate_assumptions`].
    pub fn new(
        space: FeatureSpace,
        kernel: DMatrix<f64>,
        gamma: Vec<f64>,
        incidence: Incidence,
    ) -> Result<Self> {
        let n = space.len();
        if kernel.nrows() != n || kernel.ncols() != n {
            return Err(Error::InvalidModel(format!(
                "kernel must be {n}x{n}, got {}x{}",
                kernel.nrows(),
                kernel.ncols()
            )));
        }
        check_len(n, gamma.len())?;
        if kernel.iter().any(|v| !v.is_finite()) || gamma.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("kernel and gamma must be finite".into()));
        }
        let weights = space.weights();
        let operator = DMatrix::from_fn(n, n, |x, y| kernel[(x, y)] * weights[y]);
        Ok(SisModel { space, kernel, gamma, incidence, operator })
    }

    /// Unit weights and generated labels; `kernel` given row-major.
    pub fn from_rows(kernel: &[Vec<f64>], gamma: Vec<f64>, incidence: Incidence) -> Result<Self> {
        let n = kernel.len();
        if let Some(row) = kernel.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension { expected: n, got: row.len() });
        }
        let space = FeatureSpace::uniform(n)?;
        let k = DMatrix::from_fn(n, n, |x, y| kernel[x][y]);
        SisModel::new(space, k, gamma, incidence)
    }

    pub fn n(&self) -> usize {
        self.space.len()
    }

    pub fn space(&self) -> &FeatureSpace {
        &self.space
    }

    pub fn labels(&self) -> &[String] {
        self.space.labels()
    }

    pub fn weights(&self) -> &[f64] {
        self.space.weights()
    }

    pub fn kernel(&self) -> &DMatrix<f64> {
        &self.kernel
    }

    /// Matrix of `T`: `kernel[x][y]·μ(y)`.
    pub fn operator_matrix(&self) -> &DMatrix<f64> {
        &self.operator
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn incidence(&self) -> &Incidence {
        &self.incidence
    }

    pub fn apply_t(&self, f: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), f.len())?;
        let mut out = vec![0.0; self.n()];
        self.apply_t_into(f, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_t_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n();
        for (x, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (y, fy) in f.iter().enumerate() {
                acc += self.operator[(x, y)] * fy;
            }
            *o = acc;
        }
    }

    /// `F(u) = φ(u)·Tu − γ·u`.
    pub fn vector_field(&self, u: &StateVector) -> Result<Vec<f64>> {
        check_len(self.n(), u.len())?;
        let mut out = vec![0.0; self.n()];
        self.field_into(u.values(), &mut out);
        Ok(out)
    }

    /// Vector field on raw coordinates (no range check), for integrators.
    pub(crate) fn field_into(&self, u: &[f64], out: &mut [f64]) {
        self.apply_t_into(u, out);
        for ((o, &ux), &g) in out.iter_mut().zip(u).zip(&self.gamma) {
            *o = self.incidence.evaluate(ux) * *o - g * ux;
        }
    }

    /// Sup-norm of the vector field.
    pub fn residual(&self, u: &[f64]) -> f64 {
        let mut out = vec![0.0; self.n()];
        self.field_into(u, &mut out);
        sup_norm(&out)
    }

    /// Model with kernel `M_A K M_A`; weights, `γ` and `φ` unchanged.
    pub fn project(&self, mask: &SubsetMask) -> Result<SisModel> {
        check_len(self.n(), mask.len())?;
        let n = self.n();
        let kernel = DMatrix::from_fn(n, n, |x, y| {
            if mask.contains(x) && mask.contains(y) {
                self.kernel[(x, y)]
            } else {
                0.0
            }
        });
        SisModel::new(self.space.clone(), kernel, self.gamma.clone(), self.incidence.clone())
    }

    /// Model with recovery rates `λ·γ`.
    pub fn with_gamma_scaled(&self, lambda: f64) -> Result<SisModel> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Input(format!("scaling factor must be positive, got {lambda}")));
        }
        let gamma = self.gamma.iter().map(|g| g * lambda).collect();
        SisModel::new(self.space.clone(), self.kernel.clone(), gamma, self.incidence.clone())
    }

    pub fn with_kernel(&self, kernel: DMatrix<f64>) -> Result<SisModel> {
        SisModel::new(self.space.clone(), kernel, self.gamma.clone(), self.incidence.clone())
    }

    pub fn with_gamma(&self, gamma: Vec<f64>) -> Result<SisModel> {
        SisModel::new(self.space.clone(), self.kernel.clone(), gamma, self.incidence.clone())
    }

    /// Checks the model assumptions; violations are collected, never raised.
    pub fn validate_assumptions(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.weights().iter().any(|w| *w <= 0.0) {
            violations.push("weights must be strictly positive".to_string());
        }
        if self.gamma.iter().any(|g| *g <= 0.0) {
            violations.push("gamma must be strictly positive".to_string());
        }
        if self.kernel.iter().any(|k| *k < 0.0) {
            violations.push("kernel must be nonnegative".to_string());
        }
        let conformity = self
            .incidence
            .check_conformity(VALIDATION_GRID)
            .expect("validation grid is above the minimum");
        violations.extend(conformity.violations.iter().map(|v| format!("incidence: {v}")));
        ValidationReport {
            violations,
            operator_bounds: "auto-satisfied (finite dimension)".to_string(),
            conformity,
        }
    }

    pub(crate) fn require_valid_signs(&self) -> Result<()> {
        if self.gamma.iter().any(|g| *g <= 0.0) {
            return Err(Error::Precondition("gamma must be strictly positive".into()));
        }
        if self.kernel.iter().any(|k| *k < 0.0) {
            return Err(Error::Precondition("kernel must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Outcome of [`SisModel::validate_assumptions`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    /// Status of the operator-norm conditions.
    pub operator_bounds: String,
    pub conformity: ConformityReport,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(self.violations.join("; ")))
        }
    }
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
