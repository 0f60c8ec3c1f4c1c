//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sis_atoms::dynamics::{check_monotone_flow, integrate_with, maximal_equilibrium, verify_limit, IntegrateOptions};
use sis_atoms::equilibria::{critical_vaccination_check, equilibrium_catalog, random_start_sweep, random_starts};
use sis_atoms::model::{sup_distance, sup_norm};
use sis_atoms::reservoir::{integrate_augmented, integrate_direct, reservoir_equilibria, reservoir_predict_limit};
use sis_atoms::spectral::{r0, schwartz_radius};
use sis_atoms::structure::decompose;
use sis_atoms::{DMatrix, Incidence, ReservoirModel, SisModel, StateVector, SubsetMask, Tolerances};
use sis_atoms_cli::config::load_model;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn model_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(format!("{name}.model"))
}

fn shipped(name: &str) -> SisModel {
    load_model(&model_path(name)).expect("shipped model parses").model
}

fn scalar(k: f64) -> SisModel {
    SisModel::from_rows(&[vec![k]], vec![1.0], Incidence::mass_action()).unwrap()
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    if took < limit {
        Ok(())
    } else {
        Err(format!("{what} took {took:?}, limit {limit:?}"))
    }
}

fn leq(a: &[f64], b: &[f64], slack: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| *x <= y + slack)
}

/// Random model with `n ≤ 8`, kernel entries 0 or in [0.1, 3], `γ` in
/// [0.5, 2] and a conforming incidence. Non-zero atoms are kept at least
/// 0.05 away from `R0 = 1` so that convergence is exponential.
fn random_model(rng: &mut ChaCha8Rng, max_n: usize, require_supercritical: bool) -> SisModel {
    let tol = Tolerances::default();
    loop {
        let n = rng.random_range(2..=max_n);
        let density = rng.random_range(0.25..0.6);
        let k = DMatrix::from_fn(n, n, |_, _| if rng.random_bool(density) { rng.random_range(0.1..3.0) } else { 0.0 });
        let gamma: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let phi = match rng.random_range(0..4) {
            0 => Incidence::power(rng.random_range(0.5..2.0)).unwrap(),
            1 => Incidence::saturation(rng.random_range(0.1..2.0)).unwrap(),
            2 => Incidence::london_yorke(rng.random_range(0.0..1.0)).unwrap(),
            _ => Incidence::mass_action(),
        };
        let space = sis_atoms::FeatureSpace::uniform(n).unwrap();
        let m = SisModel::new(space, k, gamma, phi).unwrap();
        let d = decompose(&m, &tol).unwrap();
        let separated = d.atoms().iter().all(|a| a.class.is_zero() || (a.r0 - 1.0).abs() > 0.05);
        let r = r0(&m, &SubsetMask::full(n), tol.spectral).unwrap();
        if separated && (!require_supercritical || r > 1.05) {
            return m;
        }
    }
}

fn random_models() -> Vec<SisModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(20240501);
    (0..50).map(|_| random_model(&mut rng, 8, true)).collect()
}

fn zoonosis_oracle() -> [[f64; 3]; 3] {
    // Each group alone solves (1 − u)2u = u; a group fed with pressure p
    // from upstream solves 2u² − (1 − p)u − p = 0.
    let fed = |p: f64| ((1.0 - p) + ((1.0 - p).powi(2) + 8.0 * p).sqrt()) / 4.0;
    let h = [0.0, 0.0, 0.5];
    let d = [0.0, 0.5, fed(0.5)];
    let w = [0.5, fed(0.5), fed(fed(0.5))];
    [h, d, w]
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = shipped("zoonosis");
    let tol = Tolerances::default();
    let d = decompose(&m, &tol).map_err(|e| e.to_string())?;
    let c = equilibrium_catalog(&m, &d, &tol).map_err(|e| e.to_string())?;
    within(Duration::from_secs(1), start, "catalog")?;
    ensure!(c.len() == 4, "{} equilibria", c.len());
    let by_support = |bits: &str| c.iter().find(|e| e.support.bitstring() == bits);
    let zero = by_support("000").ok_or("no DFE")?;
    let gh = by_support("001").ok_or("no equilibrium with support {H}")?;
    let gd = by_support("011").ok_or("no equilibrium with support {D,H}")?;
    let gw = by_support("111").ok_or("no equilibrium with support {W,D,H}")?;
    ensure!(gw.is_maximal, "g_W is not flagged maximal");
    let chain = [zero, gh, gd, gw];
    for w in chain.windows(2) {
        let (a, b) = (w[0].state.values(), w[1].state.values());
        ensure!(leq(a, b, 1e-8) && sup_distance(a, b) > 1e-8, "order fails between {:?} and {:?}", a, b);
    }
    let oracle = zoonosis_oracle();
    for (e, o) in [gh, gd, gw].iter().zip(&oracle) {
        ensure!(sup_distance(e.state.values(), o) < 1e-8, "{:?} vs oracle {:?}", e.state.values(), o);
    }
    Ok(format!("4 equilibria, chain 0 < g_H < g_D < g_W in {:?}", start.elapsed()))
}

fn simulate_json(model: &str, init: &str) -> Result<(serde_json::Value, Duration), String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_sis-atoms"))
        .args(["simulate", model_path(model).to_str().unwrap(), "--init", init, "--tmax", "200", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure!(out.status.success(), "simulate failed: {}", String::from_utf8_lossy(&out.stderr));
    let v = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    Ok((v, took))
}

fn criterion_2() -> Outcome {
    let m = shipped("westnile");
    let tol = Tolerances::default();
    let d = decompose(&m, &tol).map_err(|e| e.to_string())?;
    let c = equilibrium_catalog(&m, &d, &tol).map_err(|e| e.to_string())?;
    ensure!(c.len() == 2, "{} equilibria", c.len());
    let (v, took_h) = simulate_json("westnile", "mask:H")?;
    ensure!(took_h < Duration::from_secs(1), "mask:H took {took_h:?}");
    let terminal: Vec<f64> = serde_json::from_value(v["terminal_state"].clone()).map_err(|e| e.to_string())?;
    ensure!(sup_norm(&terminal) < 1e-6, "terminal sup-norm {}", sup_norm(&terminal));
    ensure!(v["verification"]["final_time"].as_f64().unwrap() <= 200.0, "ran past t = 200");
    let (v, took_b) = simulate_json("westnile", "mask:B")?;
    ensure!(took_b < Duration::from_secs(1), "mask:B took {took_b:?}");
    ensure!(v["predicted"]["support"] == serde_json::json!(["B", "M", "H"]), "predicted {}", v["predicted"]["support"]);
    ensure!(v["predicted"]["is_maximal"] == true, "prediction is not g*");
    ensure!(v["verification"]["matched"] == true, "mask:B did not reach g*");
    let terminal: Vec<f64> = serde_json::from_value(v["terminal_state"].clone()).map_err(|e| e.to_string())?;
    ensure!(terminal.iter().all(|x| *x > 1e-8), "terminal support is not {{B,M,H}}: {terminal:?}");
    Ok(format!("2 equilibria; mask:H -> DFE in {took_h:?}, mask:B -> g* in {took_b:?}"))
}

fn criterion_3() -> Outcome {
    let tol = Tolerances::default();
    let mut found = Vec::new();
    for (k, size, g) in [(0.5, 1, 0.0), (1.0, 1, 0.0), (2.0, 2, 0.5)] {
        let m = scalar(k);
        let d = decompose(&m, &tol).map_err(|e| e.to_string())?;
        let c = equilibrium_catalog(&m, &d, &tol).map_err(|e| e.to_string())?;
        ensure!(c.len() == size, "k = {k}: catalog of size {}", c.len());
        let top = c.iter().find(|e| e.is_maximal).ok_or("no maximal entry")?;
        let v = top.state.values()[0];
        // (1 − u)ku = γu has the positive root 1 − γ/k only when k > γ.
        let oracle = if k > 1.0 { 1.0 - 1.0 / k } else { 0.0 };
        ensure!((v - oracle).abs() < 1e-8 && (v - g).abs() < 1e-8, "k = {k}: g* = {v}");
        found.push(format!("{}", c.len()));
    }
    Ok(format!("catalog sizes {{{}}}", found.join(", ")))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let m = shipped("continuum");
    ensure!(m.n() == 32, "grid has {} points", m.n());
    let g = maximal_equilibrium(&m, &SubsetMask::full(32), &Tolerances::default()).map_err(|e| e.to_string())?;
    within(Duration::from_secs(5), start, "maximal equilibrium")?;
    let mut worst = 0.0_f64;
    for (i, v) in g.state.values().iter().enumerate() {
        let x = (i + 1) as f64 / 32.0;
        worst = worst.max((v - 1.0 / (1.0 + x)).abs());
    }
    ensure!(worst < 1e-6, "max deviation from 1/(1+x) is {worst:e}");
    Ok(format!("max |g*(x) - 1/(1+x)| = {worst:.1e} in {:?}", start.elapsed()))
}

fn criterion_5(models: &[SisModel]) -> Outcome {
    let start = Instant::now();
    let tol = Tolerances::default();
    let mut intermediate = 0;
    let mut worst = 0.0_f64;
    for (i, m) in models.iter().enumerate() {
        let d = decompose(m, &tol).map_err(|e| e.to_string())?;
        let c = equilibrium_catalog(m, &d, &tol).map_err(|e| format!("model {i}: {e}"))?;
        let v = critical_vaccination_check(m, &c, &tol).map_err(|e| e.to_string())?;
        ensure!(v.holds(), "model {i}: {:?}", v.violations);
        for e in &v.entries {
            match e.kind {
                sis_atoms::equilibria::EquilibriumKind::Maximal => worst = worst.max((e.re_phi - 1.0).abs()),
                sis_atoms::equilibria::EquilibriumKind::Intermediate => {
                    intermediate += 1;
                    ensure!(e.re_phi > 1.0 + 1e-8, "model {i}: Re(phi(h)) = {}", e.re_phi);
                }
                sis_atoms::equilibria::EquilibriumKind::DiseaseFree => {}
            }
        }
    }
    within(Duration::from_secs(60), start, "50 catalogs")?;
    Ok(format!("max |Re(phi(g*)) - 1| = {worst:.1e}, {intermediate} intermediate equilibria above 1, {:?}", start.elapsed()))
}

fn criterion_6(models: &[SisModel]) -> Outcome {
    let mut tol = Tolerances::default();
    tol.matching = 1e-5;
    let mut runs = 0;
    for (i, m) in models.iter().enumerate() {
        let d = decompose(m, &tol).map_err(|e| e.to_string())?;
        let c = equilibrium_catalog(m, &d, &tol).map_err(|e| e.to_string())?;
        let r = random_start_sweep(m, &d, &c, 32, 1000 + i as u64, &tol).map_err(|e| e.to_string())?;
        ensure!(r.all_matched(), "model {i}: {} unmatched terminal states", r.unmatched);
        ensure!(r.all_agree(), "model {i}: {} runs disagree with the prediction", r.disagreements);
        runs += r.entries.len();
    }
    Ok(format!("{runs} runs matched and agreed with predict_limit"))
}

fn future_sets(m: &SisModel, rng: &mut ChaCha8Rng) -> Vec<SubsetMask> {
    let d = decompose(m, &Tolerances::default()).unwrap();
    let k = d.atoms().len();
    let mut out: Vec<SubsetMask> = Vec::new();
    let mut add = |chosen: Vec<usize>| {
        let mut mask = SubsetMask::empty(m.n());
        for a in chosen {
            mask = mask.union(&d.atom(a).mask);
        }
        let f = d.future(&mask).unwrap();
        if !out.contains(&f) {
            out.push(f);
        }
    };
    if k <= 10 {
        for bits in 0u32..(1 << k) {
            add((0..k).filter(|a| bits & (1 << a) != 0).collect());
        }
    } else {
        for a in 0..k {
            add(vec![a]);
        }
        for _ in 0..200 {
            add((0..k).filter(|_| rng.random_bool(0.3)).collect());
        }
    }
    out
}

fn criterion_7(models: &[SisModel]) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut all: Vec<SisModel> =
        ["zoonosis", "westnile", "scalar_k05", "scalar_k1", "scalar_k2", "continuum"].iter().map(|n| shipped(n)).collect();
    all.extend(models.iter().cloned());
    let mut checked = 0;
    let mut worst = 0.0_f64;
    for m in &all {
        let d = decompose(m, &tol).map_err(|e| e.to_string())?;
        for a in future_sets(m, &mut rng) {
            let direct = r0(m, &a, tol.spectral).map_err(|e| e.to_string())?;
            let by_atoms = schwartz_radius(&d, &a).map_err(|e| e.to_string())?;
            let oracle = d.atoms().iter().filter(|x| x.mask.is_subset_of(&a)).map(|x| x.r0).fold(0.0, f64::max);
            ensure!((by_atoms - oracle).abs() <= 1e-12, "schwartz_radius {by_atoms} vs {oracle}");
            worst = worst.max((direct - oracle).abs());
            ensure!((direct - oracle).abs() <= 1e-8, "R0(A) = {direct}, max atom R0 = {oracle}");
            checked += 1;
        }
    }
    Ok(format!("{checked} future sets, max gap {worst:.1e}"))
}

fn criterion_8(models: &[SisModel]) -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0_f64;
    for p in 0..100 {
        let m = &models[p % models.len()];
        let n = m.n();
        let h2 = random_starts(n, 1, 5000 + p as u64).remove(0);
        let h1: Vec<f64> = h2.values().iter().map(|v| v * rng.random_range(0.0..=1.0)).collect();
        let h1 = StateVector::new(h1).unwrap();
        let r = check_monotone_flow(m, &h1, &h2, 20.0, &tol).map_err(|e| e.to_string())?;
        ensure!(r.ordered, "pair {p}: order violated by {:e}", r.max_violation);
        worst = worst.max(r.max_violation);
    }
    for (i, m) in models.iter().enumerate() {
        let traj = integrate_with(m, &StateVector::ones(m.n()), &IntegrateOptions::new(1e3, 1e-10)).map_err(|e| e.to_string())?;
        for w in traj.states.windows(2) {
            ensure!(leq(w[1].values(), w[0].values(), 1e-9), "model {i}: flow from 1 increased");
        }
    }
    Ok(format!("100 ordered pairs (max violation {worst:.1e}); flow from 1 non-increasing on 50 models"))
}

fn criterion_9() -> Outcome {
    let m = shipped("scalar_k05");
    let tol = Tolerances::default();
    let zero = maximal_equilibrium(&m, &SubsetMask::full(1), &tol).map_err(|e| e.to_string())?;
    let r = verify_limit(&m, &StateVector::ones(1), &zero, tol.t_max, tol.matching, &tol).map_err(|e| e.to_string())?;
    let fit = r.decay.ok_or("no decay fit")?;
    ensure!((fit.bound_rate - 0.5).abs() < 1e-9, "-s(T - gamma) = {}", fit.bound_rate);
    ensure!(fit.relative_gap < 0.1, "fitted rate {} vs 0.5", fit.fitted_rate);
    Ok(format!("fitted rate {:.4} vs 0.5 ({:.2}%)", fit.fitted_rate, 100.0 * fit.relative_gap))
}

fn criterion_10() -> Outcome {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0_f64;
    for i in 0..20 {
        let base = random_model(&mut rng, 6, false);
        let n = base.n();
        let kappa: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.5) { rng.random_range(0.05..1.0) } else { 0.0 }).collect();
        let b = rng.random_range(0.5..2.0);
        let h = random_starts(n, 1, 9000 + i).remove(0);
        let checkpoints: Vec<f64> = (1..=10).map(|j| j as f64).collect();
        for a in [0.25, 0.5] {
            let rm = ReservoirModel::with_params(base.clone(), kappa.clone(), a, b, 1.0).map_err(|e| e.to_string())?;
            let mut opts = IntegrateOptions::new(10.0, 0.0);
            opts.checkpoints = checkpoints.clone();
            let aug = integrate_augmented(&rm, &h, &opts).map_err(|e| e.to_string())?;
            let direct = integrate_direct(&rm, &h, &opts).map_err(|e| e.to_string())?;
            for c in &checkpoints {
                let ia = aug.times.iter().position(|t| t == c).ok_or("augmented run missed a checkpoint")?;
                let id = direct.times.iter().position(|t| t == c).ok_or("direct run missed a checkpoint")?;
                let gap = sup_distance(&aug.states[ia].values()[..n], direct.states[id].values());
                worst = worst.max(gap);
                ensure!(gap < 1e-6, "model {i}, a = {a}, t = {c}: gap {gap:e}");
                ensure!((aug.states[ia].values()[n] - a).abs() < 1e-9, "reservoir level drifted");
            }
        }
        let positive: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let rm = ReservoirModel::new(base.clone(), positive).map_err(|e| e.to_string())?;
        let eq = reservoir_equilibria(&rm, &tol).map_err(|e| e.to_string())?;
        ensure!(eq.len() == 1, "model {i}: {} equilibria with essinf kappa > 0", eq.len());
        ensure!(eq[0].support == SubsetMask::full(n), "model {i}: support {}", eq[0].support);
    }
    Ok(format!("20 models x 2 levels, max gap {worst:.1e}; unique positive equilibrium when kappa > 0"))
}

fn criterion_11() -> Outcome {
    let tol = Tolerances::default();
    let rm = ReservoirModel::new(scalar(2.0), vec![1.0]).map_err(|e| e.to_string())?;
    let target = 0.5f64.sqrt();
    let traj = integrate_augmented(&rm, &StateVector::zeros(1), &IntegrateOptions::new(1e4, 1e-13)).map_err(|e| e.to_string())?;
    let u = traj.final_state().values()[0];
    ensure!((u - target).abs() < 1e-8, "augmented flow ends at {u}");
    let direct = integrate_direct(&rm, &StateVector::zeros(1), &IntegrateOptions::new(1e4, 1e-13)).map_err(|e| e.to_string())?;
    let v = direct.final_state().values()[0];
    ensure!((v - target).abs() < 1e-8, "direct flow ends at {v}");
    let g = reservoir_predict_limit(&rm, &StateVector::zeros(1), &tol).map_err(|e| e.to_string())?;
    ensure!((g.state.values()[0] - target).abs() < 1e-8, "predicted {}", g.state.values()[0]);
    Ok(format!("u = {u:.12} (1/sqrt 2 = {target:.12})"))
}

fn main() {
    let models = random_models();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("zoonosis reproduction", Box::new(criterion_1)),
        ("west nile reproduction", Box::new(criterion_2)),
        ("scalar threshold", Box::new(criterion_3)),
        ("exact continuum check", Box::new(criterion_4)),
        ("critical vaccination identity", Box::new(|| criterion_5(&models))),
        ("bijection sweep", Box::new(|| criterion_6(&models))),
        ("schwartz formula", Box::new(|| criterion_7(&models))),
        ("monotone flow", Box::new(|| criterion_8(&models))),
        ("subcritical decay rate", Box::new(criterion_9)),
        ("reservoir conjugacy", Box::new(criterion_10)),
        ("immigration closed form", Box::new(criterion_11)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let took = start.elapsed();
        match result {
            Ok(detail) => println!("PASS criterion {:>2} {name}: {detail} [{took:.2?}]", i + 1),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {:>2} {name}: {why} [{took:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
