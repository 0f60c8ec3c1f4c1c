//! The `analyze`, `equilibria`, `simulate` and `vaccinate` commands. Each
//! returns a text report together with its structured JSON mirror.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde_json::{json, Value};
use sis_atoms::dynamics::{compare_trajectory, integrate_with, predict_limit, IntegrateOptions};
use sis_atoms::equilibria::{
    catalog_report, critical_vaccination_check, equilibrium_catalog, re_of_phi, write_catalog_csv,
    EquilibriumKind,
};
use sis_atoms::reservoir::{free_supercritical_atoms, reservoir_equilibria};
use sis_atoms::spectral::{self, Sign};
use sis_atoms::structure::decompose;
use sis_atoms::{AtomDecomposition, EquilibriumRecord, SisModel, StateVector, SubsetMask, Tolerances};

use crate::config::{load_model, ModelFile};
use crate::error::{CliError, CliResult};
use crate::input::{load_vector, parse_init, state_from_values};

/// A finished command: what to print, and the same content as JSON.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    pub json: Value,
}

/// Parses repeated `key=value` tolerance overrides.
pub fn tolerances_from(overrides: &[String]) -> CliResult<Tolerances> {
    let mut tol = Tolerances::default();
    for item in overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("tolerance override `{item}` must look like key=value")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("tolerance `{key}` has a non-numeric value `{value}`")))?;
        tol.set(key.trim(), value)?;
    }
    Ok(tol)
}

/// Loads a model file and rejects models that break the standing assumptions.
pub fn load_valid(path: &Path) -> CliResult<ModelFile> {
    let file = load_model(path)?;
    let report = file.model.validate_assumptions();
    if !report.is_valid() {
        return Err(CliError::Input(format!("{}: {}", path.display(), report.violations.join("; "))));
    }
    Ok(file)
}

fn label_set(model: &SisModel, mask: &SubsetMask) -> String {
    let names: Vec<&str> = mask.indices().map(|x| model.labels()[x].as_str()).collect();
    format!("{{{}}}", names.join(","))
}

fn chain_label(model: &SisModel, d: &AtomDecomposition, members: &[usize]) -> String {
    let parts: Vec<String> = members.iter().map(|&a| d.atom_label(a, model.labels())).collect();
    format!("[{}]", parts.join(", "))
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Negative => "negative",
        Sign::Zero => "zero",
        Sign::Positive => "positive",
    }
}

pub fn analyze(path: &Path, tol: &Tolerances) -> CliResult<Report> {
    let file = load_valid(path)?;
    let m = &file.model;
    let d = decompose(m, tol)?;
    let validation = m.validate_assumptions();
    let chains = d.supercritical_antichains(tol.antichain_cap)?;
    let full = SubsetMask::full(m.n());
    let r0 = spectral::r0(m, &full, tol.spectral)?;
    let bound = spectral::spectral_bound(m, tol.spectral)?;
    let non_zero = d.non_zero().len();

    let mut t = String::new();
    let _ = writeln!(t, "features: {} ({})", m.n(), m.labels().join(", "));
    let _ = writeln!(t, "incidence: {}", m.incidence().family());
    for w in &validation.conformity.warnings {
        let _ = writeln!(t, "warning: {w}");
    }
    let _ = writeln!(t, "atoms: {} ({non_zero} non-zero)", d.atoms().len());
    for (i, atom) in d.atoms().iter().enumerate() {
        let _ = writeln!(
            t,
            "  #{i} {:<12} {:<13} R0 = {:.10}  future {}",
            d.atom_label(i, m.labels()),
            atom.class.name(),
            atom.r0,
            label_set(m, &atom.future)
        );
    }
    for a in d.critical() {
        let _ = writeln!(t, "warning: atom {} is critical (R0 within {:e} of 1)", d.atom_label(a, m.labels()), tol.classification);
    }
    let hasse = d.hasse();
    let _ = writeln!(t, "order (a < b: a lies in the future of b):");
    if hasse.is_empty() {
        let _ = writeln!(t, "  none");
    }
    for (a, b) in &hasse {
        let _ = writeln!(t, "  {} < {}", d.atom_label(*a, m.labels()), d.atom_label(*b, m.labels()));
    }
    let _ = writeln!(t, "supercritical antichains: {}", chains.len());
    let _ = writeln!(t, "R0: {r0:.10}");
    let _ = writeln!(t, "spectral bound s(T - gamma): {:.10} ({})", bound.value, sign_name(bound.sign));
    if !bound.consistent_with_r0 {
        let _ = writeln!(t, "warning: sign of s(T - gamma) disagrees with R0 - 1");
    }
    let _ = writeln!(t, "monatomic: {}", d.is_monatomic());

    let atoms: Vec<Value> = d
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            json!({
                "index": i,
                "label": d.atom_label(i, m.labels()),
                "members": a.members,
                "class": a.class,
                "r0": a.r0,
                "future": a.future.indices().collect::<Vec<_>>(),
            })
        })
        .collect();
    let json = json!({
        "labels": m.labels(),
        "incidence": m.incidence().family(),
        "warnings": validation.conformity.warnings,
        "atoms": atoms,
        "non_zero_atoms": non_zero,
        "hasse": hasse,
        "supercritical_antichains": chains.iter().map(|c| c.members().to_vec()).collect::<Vec<_>>(),
        "antichain_count": chains.len(),
        "r0": r0,
        "spectral_bound": bound,
        "monatomic": d.is_monatomic(),
    });
    Ok(Report { text: t, json })
}

pub fn equilibria(path: &Path, reservoir: bool, csv: Option<&Path>, tol: &Tolerances) -> CliResult<Report> {
    let file = load_valid(path)?;
    if reservoir {
        return reservoir_catalog(&file, csv, tol);
    }
    let m = &file.model;
    let d = decompose(m, tol)?;
    let catalog = equilibrium_catalog(m, &d, tol)?;
    let vaccination = critical_vaccination_check(m, &catalog, tol)?;
    let re: Vec<f64> = vaccination.entries.iter().map(|e| e.re_phi).collect();
    if let Some(out) = csv {
        write_csv(out, &catalog, &re)?;
    }
    let mut text = catalog_report(m, &d, &catalog, &vaccination);
    for a in d.critical() {
        let _ = writeln!(text, "warning: atom {} is critical and is not counted as supercritical", d.atom_label(a, m.labels()));
    }
    let json = json!({
        "equilibria": catalog_json(m, &catalog, &re),
        "vaccination": vaccination,
    });
    Ok(Report { text, json })
}

fn write_csv(out: &Path, catalog: &[EquilibriumRecord], re: &[f64]) -> CliResult<()> {
    let name = out.display().to_string();
    let f = File::create(out).map_err(|e| CliError::io(&name, e))?;
    write_catalog_csv(catalog, re, BufWriter::new(f)).map_err(|e| CliError::io(&name, e))
}

fn catalog_json(m: &SisModel, catalog: &[EquilibriumRecord], re: &[f64]) -> Vec<Value> {
    catalog
        .iter()
        .zip(re)
        .map(|(e, r)| {
            json!({
                "antichain": e.antichain.members(),
                "support": e.support.indices().map(|x| m.labels()[x].clone()).collect::<Vec<_>>(),
                "support_mask": e.support.bitstring(),
                "state": e.state.values(),
                "residual": e.residual,
                "re_phi": r,
                "is_maximal": e.is_maximal,
            })
        })
        .collect()
}

fn reservoir_catalog(file: &ModelFile, csv: Option<&Path>, tol: &Tolerances) -> CliResult<Report> {
    let rm = file.reservoir_model()?;
    let m = &file.model;
    let d = decompose(m, tol)?;
    let list = reservoir_equilibria(&rm, tol)?;
    let re: Vec<f64> = list.iter().map(|e| re_of_phi(m, &e.state, tol.spectral)).collect::<Result<_, _>>()?;
    if let Some(out) = csv {
        write_csv(out, &list, &re)?;
    }
    let free = free_supercritical_atoms(&rm, &d)?;
    let forced = d.future(&rm.kappa_support())?;
    let mut t = String::new();
    let _ = writeln!(t, "reservoir: a = {}, b = {}, weight = {}", rm.a(), rm.b(), rm.r_weight());
    let _ = writeln!(t, "forced set F(supp kappa): {}", label_set(m, &forced));
    let _ = writeln!(t, "free supercritical atoms: {}", chain_label(m, &d, &free));
    let _ = writeln!(t, "{} equilibria", list.len());
    for (i, (e, r)) in list.iter().zip(&re).enumerate() {
        let tag = if e.is_maximal { " (maximal)" } else { "" };
        let _ = writeln!(t, "#{i}{tag}");
        let _ = writeln!(t, "  antichain: {}", chain_label(m, &d, e.antichain.members()));
        let _ = writeln!(t, "  support:   {}", label_set(m, &e.support));
        let values: Vec<String> = m.labels().iter().zip(e.state.values()).map(|(l, v)| format!("{l}={v:.10}")).collect();
        let _ = writeln!(t, "  state:     {}", values.join(" "));
        let _ = writeln!(t, "  residual:  {:.3e}", e.residual);
        let _ = writeln!(t, "  Re(phi(g)): {r:.10}");
    }
    let json = json!({
        "reservoir": rm,
        "forced": forced.indices().collect::<Vec<_>>(),
        "free_supercritical_atoms": free,
        "equilibria": catalog_json(m, &list, &re),
    });
    Ok(Report { text: t, json })
}

/// Options of the `simulate` command.
#[derive(Debug, Clone)]
pub struct SimulateArgs<'a> {
    pub init: &'a str,
    pub t_max: f64,
    pub out: Option<&'a Path>,
    pub stride: usize,
}

pub fn simulate(path: &Path, args: &SimulateArgs<'_>, tol: &Tolerances) -> CliResult<Report> {
    let file = load_valid(path)?;
    let m = &file.model;
    let h = parse_init(m, args.init)?;
    let d = decompose(m, tol)?;
    let predicted = predict_limit(m, &d, &h, tol)?;
    let mut opts = IntegrateOptions::from_tolerances(tol);
    opts.t_max = args.t_max;
    opts.stride = args.stride;
    let traj = integrate_with(m, &h, &opts)?;
    if let Some(out) = args.out {
        let name = out.display().to_string();
        let f = File::create(out).map_err(|e| CliError::io(&name, e))?;
        traj.write_csv(BufWriter::new(f)).map_err(|e| CliError::io(&name, e))?;
    }
    let v = compare_trajectory(m, &traj, &predicted, tol.matching, tol)?;

    let mut t = String::new();
    let _ = writeln!(t, "predicted limit: antichain {} support {}", chain_label(m, &d, predicted.antichain.members()), label_set(m, &predicted.support));
    let values: Vec<String> = m.labels().iter().zip(predicted.state.values()).map(|(l, x)| format!("{l}={x:.10}")).collect();
    let _ = writeln!(t, "predicted state: {}", values.join(" "));
    let _ = writeln!(t, "terminal time: {:.6} ({:?})", v.final_time, v.terminal_reason);
    let _ = writeln!(t, "terminal residual: {:.3e}", v.final_residual);
    let _ = writeln!(t, "terminal sup-norm: {:.3e}", sis_atoms::model::sup_norm(traj.final_state().values()));
    let _ = writeln!(t, "distance to prediction: sup {:.3e}, gamma-weighted {:.3e}", v.sup_distance, v.gamma_distance);
    let _ = writeln!(t, "matched: {}", v.matched);
    if let Some(fit) = &v.decay {
        let _ = writeln!(t, "decay rate: fitted {:.6}, bound {:.6} (gap {:.2}%)", fit.fitted_rate, fit.bound_rate, 100.0 * fit.relative_gap);
    }
    if traj.clamp_warning {
        let _ = writeln!(t, "warning: clamping into [0,1] reached {:.3e}", traj.max_clamp);
    }
    let json = json!({
        "predicted": {
            "antichain": predicted.antichain.members(),
            "support": predicted.support.indices().map(|x| m.labels()[x].clone()).collect::<Vec<_>>(),
            "state": predicted.state.values(),
            "is_maximal": predicted.is_maximal,
        },
        "verification": v,
        "terminal_state": traj.final_state().values(),
        "samples": traj.times.len(),
        "max_clamp": traj.max_clamp,
    });
    Ok(Report { text: t, json })
}

pub fn vaccinate(path: &Path, eta: &str, tol: &Tolerances) -> CliResult<Report> {
    let file = load_valid(path)?;
    let m = &file.model;
    if eta == "from-equilibrium" {
        let d = decompose(m, tol)?;
        let catalog = equilibrium_catalog(m, &d, tol)?;
        let report = critical_vaccination_check(m, &catalog, tol)?;
        let mut t = String::new();
        let _ = writeln!(t, "R0: {:.6}", report.r0);
        for (e, v) in catalog.iter().zip(&report.entries) {
            let kind = match v.kind {
                EquilibriumKind::DiseaseFree => "DFE",
                EquilibriumKind::Maximal => "g*",
                EquilibriumKind::Intermediate => "EE",
            };
            let flag = if v.kind == EquilibriumKind::Maximal { "  critical identity Re = 1" } else { "" };
            let status = if v.ok { "" } else { "  VIOLATION" };
            let _ = writeln!(
                t,
                "{kind:<4}{:<16} support {:<20} Re(phi(g)) = {:.6}{flag}{status}",
                chain_label(m, &d, e.antichain.members()),
                label_set(m, &e.support),
                v.re_phi
            );
        }
        let _ = writeln!(t, "critical identity holds: {}", report.holds());
        let json = serde_json::to_value(&report).expect("report serializes");
        return Ok(Report { text: t, json });
    }
    let state = parse_eta(m, eta)?;
    let re = spectral::re(m, &state, tol.spectral)?;
    let text = format!("Re(eta): {re:.10}\n");
    Ok(Report { text, json: json!({ "eta": state.values(), "re": re }) })
}

/// An init spec, or else a path to a vector file.
fn parse_eta(m: &SisModel, eta: &str) -> CliResult<StateVector> {
    let spec_like = matches!(eta, "ones" | "zeros")
        || ["mask:", "file:", "random:"].iter().any(|p| eta.starts_with(p));
    if spec_like {
        parse_init(m, eta)
    } else {
        state_from_values(m, load_vector(Path::new(eta))?)
    }
}
