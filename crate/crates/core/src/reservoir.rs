//! SIS model with an external reservoir of infection,
//! `u' = φ(u)(Tu + κ) − γu`, through a one-node augmentation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::{self, predict_limit, EquilibriumRecord, IntegrateOptions, Trajectory};
use crate::equilibria::equilibrium_for_antichain;
use crate::error::{check_len, Error, Result};
use crate::model::{FeatureSpace, SisModel, StateVector, SubsetMask, VALIDATION_GRID};
use crate::structure::{decompose, Antichain, AtomDecomposition};
use crate::tolerances::Tolerances;

/// Allowed gap between the reservoir coordinate of an equilibrium and `a`.
pub const RESERVOIR_LEVEL_TOL: f64 = 1e-9;
pub const RESERVOIR_LABEL: &str = "reservoir";

#[derive(Debug, Clone, Serialize)]
pub struct ReservoirModel {
    #[serde(skip)]
    base: SisModel,
    kappa: Vec<f64>,
    a: f64,
    b: f64,
    r_weight: f64,
}

impl ReservoirModel {
    /// Reservoir at level `a = 1/2` with self-rate `b = 1` and weight 1.
    pub fn new(base: SisModel, kappa: Vec<f64>) -> Result<Self> {
        Self::with_params(base, kappa, 0.5, 1.0, 1.0)
    }

    pub fn with_params(base: SisModel, kappa: Vec<f64>, a: f64, b: f64, r_weight: f64) -> Result<Self> {
        check_len(base.n(), kappa.len())?;
        if let Some(k) = kappa.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(Error::InvalidModel(format!("kappa must be finite and nonnegative, got {k}")));
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidModel(format!("reservoir level a must lie in (0, 1), got {a}")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidModel(format!("reservoir rate b must be positive, got {b}")));
        }
        if !(r_weight.is_finite() && r_weight > 0.0) {
            return Err(Error::InvalidModel(format!("reservoir weight must be positive, got {r_weight}")));
        }
        let phi_a = base.incidence().evaluate(a);
        if !(phi_a > 0.0) {
            return Err(Error::Precondition(format!("phi(a) must be positive, got phi({a}) = {phi_a}")));
        }
        Ok(ReservoirModel { base, kappa, a, b, r_weight })
    }

    pub fn base(&self) -> &SisModel {
        &self.base
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn r_weight(&self) -> f64 {
        self.r_weight
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Features with `κ > 0`.
    pub fn kappa_support(&self) -> SubsetMask {
        SubsetMask::new(self.kappa.iter().map(|&k| k > 0.0).collect())
    }

    /// `(n+1)`-feature model whose last feature is the reservoir; along
    /// states with `u(r) = a` its restriction to the base features is `F_κ`.
    pub fn augment(&self) -> Result<SisModel> {
        let n = self.n();
        let r = n;
        let k = self.base.kernel();
        let kernel = DMatrix::from_fn(n + 1, n + 1, |x, y| match (x == r, y == r) {
            (false, false) => k[(x, y)],
            (false, true) => self.kappa[x] / self.a / self.r_weight,
            (true, true) => self.b / self.r_weight,
            (true, false) => 0.0,
        });
        let mut weights = self.base.weights().to_vec();
        weights.push(self.r_weight);
        let mut labels = self.base.labels().to_vec();
        let mut label = RESERVOIR_LABEL.to_string();
        while labels.contains(&label) {
            label.push('\'');
        }
        labels.push(label);
        let mut gamma = self.base.gamma().to_vec();
        gamma.push(self.b * self.base.incidence().evaluate(self.a));
        SisModel::new(FeatureSpace::new(weights, labels)?, kernel, gamma, self.base.incidence().clone())
    }

    /// `h` extended by the reservoir level `a`.
    pub fn augmented_state(&self, h: &StateVector) -> Result<StateVector> {
        check_len(self.n(), h.len())?;
        let mut v = h.values().to_vec();
        v.push(self.a);
        StateVector::new(v)
    }

    /// `F_κ(u) = φ(u)(Tu + κ) − γu` evaluated directly.
    pub fn field_into(&self, u: &[f64], out: &mut [f64]) {
        self.base.apply_t_into(u, out);
        let phi = self.base.incidence();
        let gamma = self.base.gamma();
        for x in 0..u.len() {
            out[x] = phi.evaluate(u[x]) * (out[x] + self.kappa[x]) - gamma[x] * u[x];
        }
    }

    pub fn residual(&self, u: &[f64]) -> f64 {
        let mut out = vec![0.0; u.len()];
        self.field_into(u, &mut out);
        crate::model::sup_norm(&out)
    }
}

/// Integrates `u' = F_κ(u)` on the base features without augmentation.
pub fn integrate_direct(rm: &ReservoirModel, h: &StateVector, opts: &IntegrateOptions) -> Result<Trajectory> {
    check_len(rm.n(), h.len())?;
    dynamics::integrate_field(|u, out| rm.field_into(u, out), h, opts, |_, _| Ok(()))
}

/// Integrates the augmented model from `(h, a)`.
pub fn integrate_augmented(rm: &ReservoirModel, h: &StateVector, opts: &IntegrateOptions) -> Result<Trajectory> {
    dynamics::integrate_with(&rm.augment()?, &rm.augmented_state(h)?, opts)
}

/// Supercritical atoms of the base model disjoint from `F(supp κ)`.
pub fn free_supercritical_atoms(rm: &ReservoirModel, base: &AtomDecomposition) -> Result<Vec<usize>> {
    let forced = base.future(&rm.kappa_support())?;
    Ok(base.supercritical().into_iter().filter(|&a| base.atom(a).mask.is_disjoint(&forced)).collect())
}

struct Augmented {
    model: SisModel,
    decomposition: AtomDecomposition,
    base: AtomDecomposition,
    reservoir_atom: usize,
}

fn prepare(rm: &ReservoirModel, tol: &Tolerances) -> Result<Augmented> {
    let model = rm.augment()?;
    let decomposition = decompose(&model, tol)?;
    let base = decompose(rm.base(), tol)?;
    let reservoir_atom = decomposition.atom_of(rm.n());
    Ok(Augmented { model, decomposition, base, reservoir_atom })
}

impl Augmented {
    /// Restricts an augmented record to the base features, re-indexing its
    /// antichain by base atoms.
    fn restrict(&self, rm: &ReservoirModel, rec: EquilibriumRecord) -> Result<EquilibriumRecord> {
        let n = rm.n();
        let values = rec.state.values();
        let level = values[n];
        if (level - rm.a()).abs() > RESERVOIR_LEVEL_TOL {
            return Err(Error::Consistency(format!("reservoir level {level} differs from a = {}", rm.a())));
        }
        let state = StateVector::new(values[..n].to_vec())?;
        let chain = Antichain::new(
            rec.antichain
                .members()
                .iter()
                .filter(|&&a| a != self.reservoir_atom)
                .map(|&a| self.base.atom_of(self.decomposition.atom(a).members[0]))
                .collect(),
        );
        Ok(EquilibriumRecord {
            support: SubsetMask::new(rec.support.as_slice()[..n].to_vec()),
            residual: rm.residual(state.values()),
            state,
            antichain: chain,
            is_maximal: rec.is_maximal,
        })
    }
}

/// Equilibria of the reservoir model, one per antichain of the free
/// supercritical atoms, restricted to the base features.
pub fn reservoir_equilibria(rm: &ReservoirModel, tol: &Tolerances) -> Result<Vec<EquilibriumRecord>> {
    let conformity = rm.base().incidence().check_conformity(VALIDATION_GRID)?;
    if !conformity.is_conforming() {
        return Err(Error::Precondition(format!(
            "the reservoir catalog needs a conforming incidence: {}",
            conformity.violations.join("; ")
        )));
    }
    let aug = prepare(rm, tol)?;
    if !aug.decomposition.atom(aug.reservoir_atom).class.is_supercritical() {
        return Err(Error::Consistency("reservoir atom is not supercritical".into()));
    }
    let forced = aug.base.future(&rm.kappa_support())?;
    let chains: Vec<Antichain> = aug
        .decomposition
        .supercritical_antichains(tol.antichain_cap + 1)?
        .into_iter()
        .filter(|c| c.members().contains(&aug.reservoir_atom))
        .collect();
    let mut out = Vec::with_capacity(chains.len());
    for chain in &chains {
        let rec = equilibrium_for_antichain(&aug.model, &aug.decomposition, chain, tol)?;
        let rec = aug.restrict(rm, rec)?;
        let expected = aug.base.future_of(&rec.antichain).union(&forced);
        if rec.support != expected {
            return Err(Error::Consistency(format!(
                "reservoir equilibrium for {} has support {} instead of {}",
                rec.antichain, rec.support, expected
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Long-time limit of the reservoir model from `h`.
pub fn reservoir_predict_limit(rm: &ReservoirModel, h: &StateVector, tol: &Tolerances) -> Result<EquilibriumRecord> {
    let aug = prepare(rm, tol)?;
    let rec = predict_limit(&aug.model, &aug.decomposition, &rm.augmented_state(h)?, tol)?;
    let rec = aug.restrict(rm, rec)?;
    let free = free_supercritical_atoms(rm, &aug.base)?;
    let reach = aug.base.future(&h.support(tol.support))?;
    let inside: Vec<usize> = free.iter().copied().filter(|&a| aug.base.atom(a).mask.is_subset_of(&reach)).collect();
    let maximal: Vec<usize> =
        inside.iter().copied().filter(|&a| !inside.iter().any(|&b| b != a && aug.base.precedes(a, b))).collect();
    if rec.antichain != Antichain::new(maximal) {
        return Err(Error::Consistency(format!("predicted reservoir antichain {} is inconsistent", rec.antichain)));
    }
    Ok(rec)
}
