//! Equilibrium catalog from supercritical antichains, random-start
//! validation and the critical vaccination identity.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{self, fmt_float, maximal_equilibrium, predict_limit, EquilibriumRecord, TerminalReason};
use crate::error::{Error, Result};
use crate::model::{sup_distance, SisModel, StateVector, SubsetMask};
use crate::spectral;
use crate::structure::{decompose, Antichain, AtomDecomposition};
use crate::tolerances::Tolerances;

/// Tolerance of the identity `Re(φ(g*)) = 1`.
pub const CRITICAL_IDENTITY_TOL: f64 = 1e-6;
/// Margin required in `Re(φ(h)) > 1` for intermediate equilibria.
pub const INTERMEDIATE_MARGIN: f64 = 1e-8;

/// The equilibrium whose antichain is `chain`: the maximal equilibrium of
/// its future.
pub fn equilibrium_for_antichain(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    chain: &Antichain,
    tol: &Tolerances,
) -> Result<EquilibriumRecord> {
    let k = decomposition.atoms().len();
    if let Some(&a) = chain.members().iter().find(|&&a| a >= k || !decomposition.atom(a).class.is_supercritical()) {
        return Err(Error::Precondition(format!("atom {a} is not a supercritical atom")));
    }
    if !decomposition.is_antichain(chain.members()) {
        return Err(Error::Precondition(format!("{chain} is not an antichain")));
    }
    let top = decomposition.maximal_supercritical_antichain(&SubsetMask::full(model.n()))?;
    let reach = decomposition.future_of(chain);
    let mut record = maximal_equilibrium(model, &reach, tol)?;
    if record.support != reach {
        return Err(Error::Consistency(format!(
            "equilibrium for {chain} has support {} instead of {}",
            record.support, reach
        )));
    }
    let recovered = decomposition.maximal_supercritical_antichain(&record.support)?;
    if &recovered != chain {
        return Err(Error::Consistency(format!("support of the equilibrium for {chain} yields antichain {recovered}")));
    }
    record.antichain = chain.clone();
    record.residual = model.residual(record.state.values());
    record.is_maximal = *chain == top;
    Ok(record)
}

/// One equilibrium per supercritical antichain, in the enumeration order.
pub fn equilibrium_catalog(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    tol: &Tolerances,
) -> Result<Vec<EquilibriumRecord>> {
    let chains = decomposition.supercritical_antichains(tol.antichain_cap)?;
    let catalog: Vec<EquilibriumRecord> = chains
        .par_iter()
        .map(|c| equilibrium_for_antichain(model, decomposition, c, tol))
        .collect::<Result<_>>()?;
    for (i, a) in catalog.iter().enumerate() {
        if let Some(b) = catalog[..i].iter().find(|b| b.support == a.support) {
            return Err(Error::Consistency(format!(
                "antichains {} and {} give the same support {}",
                b.antichain, a.antichain, a.support
            )));
        }
    }
    Ok(catalog)
}

/// Index of the catalog entry matching `state`: same support first, then
/// nearest in sup-norm; `None` if the distance is not below `match_tol`.
pub fn match_catalog(catalog: &[EquilibriumRecord], state: &StateVector, tol: &Tolerances) -> Option<(usize, f64)> {
    let support = state.support(tol.support);
    let distance = |i: usize| sup_distance(catalog[i].state.values(), state.values());
    let by_support = catalog.iter().position(|e| e.support == support).map(|i| (i, distance(i)));
    if let Some(hit) = by_support.filter(|(_, d)| *d < tol.matching) {
        return Some(hit);
    }
    (0..catalog.len())
        .map(|i| (i, distance(i)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .filter(|(_, d)| *d < tol.matching)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    /// `zeros`, `ones`, `atom:<i>` or `random:<k>`.
    pub label: String,
    pub start: StateVector,
    pub terminal: StateVector,
    pub terminal_reason: TerminalReason,
    pub terminal_residual: f64,
    /// Catalog index of the terminal state and its distance.
    pub matched: Option<(usize, f64)>,
    /// Catalog index of the predicted limit.
    pub predicted: Option<usize>,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub entries: Vec<SweepEntry>,
    pub unmatched: usize,
    pub disagreements: usize,
}

impl SweepReport {
    pub fn all_matched(&self) -> bool {
        self.unmatched == 0
    }

    pub fn all_agree(&self) -> bool {
        self.disagreements == 0
    }
}

/// Random initial states: each coordinate uniform on `[0, 1]`; with
/// probability 1/2 every feature is then zeroed independently with
/// probability 1/2.
pub fn random_starts(n: usize, count: usize, seed: u64) -> Vec<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            if rng.random_bool(0.5) {
                for x in v.iter_mut() {
                    if rng.random_bool(0.5) {
                        *x = 0.0;
                    }
                }
            }
            StateVector::new(v).expect("uniform samples lie in [0, 1)")
        })
        .collect()
}

/// Integrates from 0, 1, every atom indicator and `num_starts` random
/// states; matches each terminal state to the catalog and compares with
/// [`predict_limit`].
pub fn random_start_sweep(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    catalog: &[EquilibriumRecord],
    num_starts: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<SweepReport> {
    if num_starts == 0 {
        return Err(Error::Precondition("num_starts must be at least 1".into()));
    }
    let n = model.n();
    let mut starts = vec![("zeros".to_string(), StateVector::zeros(n)), ("ones".to_string(), StateVector::ones(n))];
    for (i, atom) in decomposition.atoms().iter().enumerate() {
        starts.push((format!("atom:{i}"), StateVector::indicator(&atom.mask)));
    }
    for (k, s) in random_starts(n, num_starts, seed).into_iter().enumerate() {
        starts.push((format!("random:{k}"), s));
    }
    let entries: Vec<SweepEntry> = starts
        .into_par_iter()
        .map(|(label, start)| {
            let traj = dynamics::integrate_with(model, &start, &dynamics::IntegrateOptions::from_tolerances(tol))?;
            let terminal = traj.final_state().clone();
            let matched = match_catalog(catalog, &terminal, tol);
            let prediction = predict_limit(model, decomposition, &start, tol)?;
            let predicted = catalog.iter().position(|e| e.antichain == prediction.antichain);
            let agrees = matched.is_some() && matched.map(|m| m.0) == predicted;
            Ok(SweepEntry {
                label,
                start,
                terminal,
                terminal_reason: traj.terminal_reason,
                terminal_residual: traj.final_residual(),
                matched,
                predicted,
                agrees,
            })
        })
        .collect::<Result<_>>()?;
    let unmatched = entries.iter().filter(|e| e.matched.is_none()).count();
    let disagreements = entries.iter().filter(|e| !e.agrees).count();
    Ok(SweepReport { seed, entries, unmatched, disagreements })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    DiseaseFree,
    Maximal,
    Intermediate,
}

#[derive(Debug, Clone, Serialize)]
pub struct VaccinationEntry {
    pub antichain: Antichain,
    pub kind: EquilibriumKind,
    /// `Re(φ(h))`.
    pub re_phi: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VaccinationReport {
    pub r0: f64,
    pub entries: Vec<VaccinationEntry>,
    pub violations: Vec<String>,
}

impl VaccinationReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `Re(φ(h))` for the state `h`.
pub fn re_of_phi(model: &SisModel, h: &StateVector, tol: f64) -> Result<f64> {
    let phi = model.incidence();
    let eta: Vec<f64> = h.values().iter().map(|&v| phi.evaluate(v).clamp(0.0, 1.0)).collect();
    spectral::re(model, &StateVector::new(eta)?, tol)
}

/// Checks `Re(φ(g*)) = 1` when `R0 > 1`, `Re(φ(h)) > 1` for intermediate
/// equilibria and `Re(φ(0)) = R0`.
pub fn critical_vaccination_check(
    model: &SisModel,
    catalog: &[EquilibriumRecord],
    tol: &Tolerances,
) -> Result<VaccinationReport> {
    let r0 = spectral::r0(model, &SubsetMask::full(model.n()), tol.spectral)?;
    let mut entries = Vec::with_capacity(catalog.len());
    let mut violations = Vec::new();
    for e in catalog {
        let re_phi = re_of_phi(model, &e.state, tol.spectral)?;
        let kind = if e.support.is_empty() {
            EquilibriumKind::DiseaseFree
        } else if e.is_maximal {
            EquilibriumKind::Maximal
        } else {
            EquilibriumKind::Intermediate
        };
        let ok = match kind {
            EquilibriumKind::DiseaseFree => (re_phi - r0).abs() <= 10.0 * tol.spectral * r0.max(1.0),
            EquilibriumKind::Maximal => (re_phi - 1.0).abs() <= CRITICAL_IDENTITY_TOL,
            EquilibriumKind::Intermediate => re_phi > 1.0 + INTERMEDIATE_MARGIN,
        };
        if !ok {
            violations.push(match kind {
                EquilibriumKind::DiseaseFree => format!("Re(phi(0)) = {re_phi} differs from R0 = {r0}"),
                EquilibriumKind::Maximal => format!("Re(phi(g*)) = {re_phi} is not 1"),
                EquilibriumKind::Intermediate => format!("Re(phi(h)) = {re_phi} for {} is not above 1", e.antichain),
            });
        }
        entries.push(VaccinationEntry { antichain: e.antichain.clone(), kind, re_phi, ok });
    }
    Ok(VaccinationReport { r0, entries, violations })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonatomicityReport {
    pub lambdas: Vec<f64>,
    /// Non-null equilibria of `(T, λγ, φ)` per `λ`.
    pub counts: Vec<usize>,
    pub at_most_one: bool,
    pub some_positive: bool,
    pub monatomic_by_counts: bool,
    pub monatomic_by_structure: bool,
    pub agree: bool,
}

/// Counts non-null equilibria of the models with recovery rates `λγ`.
pub fn monatomicity_by_equilibrium_counts(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    lambdas: &[f64],
    tol: &Tolerances,
) -> Result<MonatomicityReport> {
    let mut counts = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let scaled = model.with_gamma_scaled(lambda)?;
        let d = decompose(&scaled, tol)?;
        let catalog = equilibrium_catalog(&scaled, &d, tol)?;
        counts.push(catalog.iter().filter(|e| !e.support.is_empty()).count());
    }
    let at_most_one = counts.iter().all(|&c| c <= 1);
    let some_positive = counts.iter().any(|&c| c >= 1);
    let by_counts = at_most_one && some_positive;
    let by_structure = decomposition.is_monatomic();
    Ok(MonatomicityReport {
        lambdas: lambdas.to_vec(),
        counts,
        at_most_one,
        some_positive,
        monatomic_by_counts: by_counts,
        monatomic_by_structure: by_structure,
        agree: by_counts == by_structure,
    })
}

/// Human-readable catalog: antichain, support labels, values, residual and
/// `Re(φ(g))` per equilibrium.
pub fn catalog_report(
    model: &SisModel,
    decomposition: &AtomDecomposition,
    catalog: &[EquilibriumRecord],
    vaccination: &VaccinationReport,
) -> String {
    let labels = model.labels();
    let mut out = String::new();
    let _ = writeln!(out, "{} equilibria", catalog.len());
    for (i, (e, v)) in catalog.iter().zip(&vaccination.entries).enumerate() {
        let atoms: Vec<String> = e.antichain.members().iter().map(|&a| decomposition.atom_label(a, labels)).collect();
        let support: Vec<&str> = e.support.indices().map(|x| labels[x].as_str()).collect();
        let tag = match v.kind {
            EquilibriumKind::DiseaseFree if e.is_maximal => " (DFE, maximal)",
            EquilibriumKind::DiseaseFree => " (DFE)",
            EquilibriumKind::Maximal => " (maximal)",
            EquilibriumKind::Intermediate => "",
        };
        let _ = writeln!(out, "#{i}{tag}");
        let _ = writeln!(out, "  antichain: [{}]", atoms.join(", "));
        let _ = writeln!(out, "  support:   {{{}}}", support.join(","));
        let values: Vec<String> = labels.iter().zip(e.state.values()).map(|(l, v)| format!("{l}={v:.10}")).collect();
        let _ = writeln!(out, "  state:     {}", values.join(" "));
        let _ = writeln!(out, "  residual:  {:.3e}", e.residual);
        let _ = writeln!(out, "  Re(phi(g)): {:.10}", v.re_phi);
    }
    for msg in &vaccination.violations {
        let _ = writeln!(out, "violation: {msg}");
    }
    out
}

/// CSV with columns `antichain,support,value_0..value_{n−1},residual,re_phi`.
pub fn write_catalog_csv<W: Write>(catalog: &[EquilibriumRecord], re_phi: &[f64], mut out: W) -> io::Result<()> {
    let n = catalog.first().map_or(0, |e| e.state.len());
    let mut header = String::from("antichain,support");
    for i in 0..n {
        let _ = write!(header, ",value_{i}");
    }
    header.push_str(",residual,re_phi");
    writeln!(out, "{header}")?;
    for (e, re) in catalog.iter().zip(re_phi) {
        let mut line = format!("{},{}", e.antichain, e.support.bitstring());
        for v in e.state.values() {
            line.push(',');
            line.push_str(&fmt_float(*v));
        }
        let _ = write!(line, ",{},{}", fmt_float(e.residual), fmt_float(*re));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::Incidence;
    use proptest::prelude::*;

    fn zoonosis() -> SisModel {
        SisModel::from_rows(
            &[vec![2.0, 0.0, 0.0], vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 2.0]],
            vec![1.0; 3],
            Incidence::mass_action(),
        )
        .unwrap()
    }

    fn west_nile() -> SisModel {
        SisModel::from_rows(
            &[vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
            vec![1.0; 3],
            Incidence::mass_action(),
        )
        .unwrap()
    }

    fn scalar(k: f64) -> SisModel {
        SisModel::from_rows(&[vec![k]], vec![1.0], Incidence::mass_action()).unwrap()
    }

    fn atom_with(d: &AtomDecomposition, feature: usize) -> usize {
        d.atom_of(feature)
    }

    #[test]
    fn zoonosis_antichain_examples() {
        let m = zoonosis();
        let tol = Tolerances::default();
        let d = decompose(&m, &tol).unwrap();
        let dfe = equilibrium_for_antichain(&m, &d, &Antichain::empty(), &tol).unwrap();
        assert_eq!(dfe.state.values(), &[0.0; 3]);
        let g_d = equilibrium_for_antichain(&m, &d, &Antichain::new(vec![atom_with(&d, 1)]), &tol).unwrap();
        assert_eq!(g_d.support, SubsetMask::from_indices(3, &[1, 2]));
        assert!(!g_d.is_maximal);
        let g_w = equilibrium_for_antichain(&m, &d, &Antichain::new(vec![atom_with(&d, 0)]), &tol).unwrap();
        assert_eq!(g_w.support, SubsetMask::full(3));
        assert!(g_w.is_maximal);
        // W alone solves (1-u)2u = u.
        assert!((g_w.state.values()[0] - 0.5).abs() < 1e-10);
        assert!(equilibrium_for_antichain(&m, &d, &Antichain::new(vec![0, 1]), &tol).is_err());
    }

    #[test]
    fn catalog_sizes() {
        let tol = Tolerances::default();
        for (m, size) in [(zoonosis(), 4), (west_nile(), 2), (scalar(0.5), 1), (scalar(1.0), 1), (scalar(2.0), 2)] {
            let d = decompose(&m, &tol).unwrap();
            let c = equilibrium_catalog(&m, &d, &tol).unwrap();
            assert_eq!(c.len(), size);
            assert_eq!(c.iter().filter(|e| e.is_maximal).count(), 1);
            let top = c.iter().find(|e| e.is_maximal).unwrap();
            for e in &c {
                assert!(e.residual <= tol.equilibrium);
                assert!(e.state.values().iter().zip(top.state.values()).all(|(a, b)| a <= &(b + 1e-12)));
            }
        }
    }

    #[test]
    fn sweep_examples() {
        let tol = Tolerances::default();
        for m in [zoonosis(), west_nile()] {
            let d = decompose(&m, &tol).unwrap();
            let c = equilibrium_catalog(&m, &d, &tol).unwrap();
            let r = random_start_sweep(&m, &d, &c, 8, 7, &tol).unwrap();
            assert!(r.all_matched() && r.all_agree(), "{r:?}");
            let zero = &r.entries[0];
            assert!(c[zero.matched.unwrap().0].support.is_empty());
        }
        let m = west_nile();
        let d = decompose(&m, &tol).unwrap();
        let c = equilibrium_catalog(&m, &d, &tol).unwrap();
        let g = predict_limit(&m, &d, &StateVector::indicator(&SubsetMask::from_indices(3, &[0])), &tol).unwrap();
        assert!(g.is_maximal);
        assert_eq!(g.support, SubsetMask::full(3));
        let start = StateVector::indicator(&SubsetMask::from_indices(3, &[2]));
        let g = predict_limit(&m, &d, &start, &tol).unwrap();
        assert!(g.support.is_empty());
        assert!(match_catalog(&c, &g.state, &tol).is_some());
        assert!(random_start_sweep(&m, &d, &c, 0, 1, &tol).is_err());
    }

    #[test]
    fn random_starts_are_deterministic() {
        let a = random_starts(5, 10, 42);
        let b = random_starts(5, 10, 42);
        assert_eq!(
            a.iter().map(|s| s.values().to_vec()).collect::<Vec<_>>(),
            b.iter().map(|s| s.values().to_vec()).collect::<Vec<_>>()
        );
        assert!(a.iter().any(|s| s.values().contains(&0.0)));
    }

    #[test]
    fn vaccination_examples() {
        let tol = Tolerances::default();
        let m = scalar(2.0);
        let d = decompose(&m, &tol).unwrap();
        let c = equilibrium_catalog(&m, &d, &tol).unwrap();
        let v = critical_vaccination_check(&m, &c, &tol).unwrap();
        assert!(v.holds());
        let g = v.entries.iter().find(|e| e.kind == EquilibriumKind::Maximal).unwrap();
        assert!((g.re_phi - 1.0).abs() < 1e-9);
        let dfe = v.entries.iter().find(|e| e.kind == EquilibriumKind::DiseaseFree).unwrap();
        assert!((dfe.re_phi - 2.0).abs() < 1e-9);

        let m = zoonosis();
        let d = decompose(&m, &tol).unwrap();
        let c = equilibrium_catalog(&m, &d, &tol).unwrap();
        let v = critical_vaccination_check(&m, &c, &tol).unwrap();
        assert!(v.holds(), "{:?}", v.violations);
        assert_eq!(v.entries.iter().filter(|e| e.kind == EquilibriumKind::Intermediate).count(), 2);
    }

    #[test]
    fn monatomicity_examples() {
        let tol = Tolerances::default();
        let m = west_nile();
        let d = decompose(&m, &tol).unwrap();
        let r = monatomicity_by_equilibrium_counts(&m, &d, &[0.5, 1.0], &tol).unwrap();
        assert_eq!(r.counts, vec![1, 1]);
        assert!(r.monatomic_by_counts && r.agree);

        let m = zoonosis();
        let d = decompose(&m, &tol).unwrap();
        let r = monatomicity_by_equilibrium_counts(&m, &d, &[0.5, 1.0, 4.0], &tol).unwrap();
        assert_eq!(r.counts, vec![3, 3, 0]);
        assert!(!r.monatomic_by_counts && r.agree);

        let m = SisModel::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0; 2], Incidence::mass_action()).unwrap();
        let d = decompose(&m, &tol).unwrap();
        let r = monatomicity_by_equilibrium_counts(&m, &d, &[0.1, 1.0], &tol).unwrap();
        assert_eq!(r.counts, vec![0, 0]);
        assert!(!r.monatomic_by_counts && r.agree);
    }

    #[test]
    fn csv_and_report() {
        let tol = Tolerances::default();
        let m = zoonosis();
        let d = decompose(&m, &tol).unwrap();
        let c = equilibrium_catalog(&m, &d, &tol).unwrap();
        let v = critical_vaccination_check(&m, &c, &tol).unwrap();
        let re: Vec<f64> = v.entries.iter().map(|e| e.re_phi).collect();
        let mut buf = Vec::new();
        write_catalog_csv(&c, &re, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "antichain,support,value_0,value_1,value_2,residual,re_phi");
        assert_eq!(text.lines().count(), 5);
        let report = catalog_report(&m, &d, &c, &v);
        assert!(report.starts_with("4 equilibria"));
        assert!(report.contains("support:   {x1,x2}"));
    }

    fn random_model() -> impl Strategy<Value = SisModel> {
        (1usize..=4).prop_flat_map(|n| {
            (
                proptest::collection::vec(prop_oneof![Just(0.0), 0.1f64..3.0], n * n),
                proptest::collection::vec(0.3f64..2.0, n),
            )
                .prop_map(move |(k, g)| {
                    let rows: Vec<Vec<f64>> = k.chunks(n).map(|r| r.to_vec()).collect();
                    SisModel::from_rows(&rows, g, Incidence::mass_action()).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gamma_scaling_divides_r0(m in random_model(), lambda in 0.2f64..5.0) {
            let tol = Tolerances::default();
            let d = decompose(&m, &tol).unwrap();
            let scaled = m.with_gamma_scaled(lambda).unwrap();
            for atom in d.atoms() {
                let r = spectral::r0(&scaled, &atom.mask, tol.spectral).unwrap();
                prop_assert!((r - atom.r0 / lambda).abs() <= 1e-9 * atom.r0.max(1.0));
            }
        }

        #[test]
        fn count_non_increasing_in_lambda(m in random_model()) {
            let tol = Tolerances::default();
            let d = decompose(&m, &tol).unwrap();
            let grid = [0.25, 0.5, 1.0, 2.0, 4.0];
            let r = monatomicity_by_equilibrium_counts(&m, &d, &grid, &tol).unwrap();
            prop_assert!(r.counts.windows(2).all(|w| w[0] >= w[1]), "{:?}", r.counts);
        }
    }
}
