//! Model files: TOML with `labels`, `weights`, `kernel` (dense rows),
//! `gamma`, an `[incidence]` table and optional reservoir fields.
//!
//! ```toml
//! labels = ["W", "D", "H"]
//! kernel = [[2, 0, 0], [1, 2, 0], [0, 1, 2]]
//! gamma = [1, 1, 1]
//!
//! [incidence]
//! family = "power"
//! params = { alpha = 2.0 }
//! ```

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use sis_atoms::model::FeatureSpace;
use sis_atoms::reservoir::ReservoirModel;
use sis_atoms::{Incidence, SisModel};
use toml::Spanned;

use crate::error::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    labels: Option<Spanned<Vec<String>>>,
    weights: Option<Spanned<Vec<f64>>>,
    kernel: Spanned<Vec<Spanned<Vec<f64>>>>,
    gamma: Spanned<Vec<f64>>,
    incidence: Option<Spanned<RawIncidence>>,
    kappa: Option<Spanned<Vec<f64>>>,
    a: Option<Spanned<f64>>,
    b: Option<Spanned<f64>>,
    r_weight: Option<Spanned<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIncidence {
    family: String,
    #[serde(default)]
    params: BTreeMap<String, f64>,
    values: Option<Vec<f64>>,
}

/// Reservoir fields of a model file.
#[derive(Debug, Clone)]
pub struct ReservoirSpec {
    pub kappa: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub r_weight: f64,
}

/// A parsed model file.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub model: SisModel,
    pub reservoir: Option<ReservoirSpec>,
}

impl ModelFile {
    pub fn reservoir_model(&self) -> CliResult<ReservoirModel> {
        let spec = self
            .reservoir
            .as_ref()
            .ok_or_else(|| CliError::Input("model file has no `kappa` field for the reservoir".into()))?;
        Ok(ReservoirModel::with_params(self.model.clone(), spec.kappa.clone(), spec.a, spec.b, spec.r_weight)?)
    }
}

pub fn load_model(path: &Path) -> CliResult<ModelFile> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(&name, e))?;
    parse_model(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{name}:{msg}")),
        other => other,
    })
}

/// Parses model-file text; error messages start with `line:column:`.
pub fn parse_model(text: &str) -> CliResult<ModelFile> {
    let raw: RawModel = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| position(text, s.start)).unwrap_or_else(|| "1:1".into());
        CliError::Input(format!("{at}: {}", e.message().trim_end()))
    })?;
    let fail = |span: Range<usize>, msg: String| CliError::Input(format!("{}: {msg}", position(text, span.start)));

    let n = raw.kernel.get_ref().len();
    if n == 0 {
        return Err(fail(raw.kernel.span(), "kernel must have at least one row".into()));
    }
    let mut rows = Vec::with_capacity(n);
    for (i, row) in raw.kernel.get_ref().iter().enumerate() {
        if row.get_ref().len() != n {
            return Err(fail(row.span(), format!("kernel row {i} has {} entries, expected {n}", row.get_ref().len())));
        }
        if let Some(v) = row.get_ref().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(fail(row.span(), format!("kernel entries must be finite and nonnegative, got {v}")));
        }
        rows.push(row.get_ref().clone());
    }
    let check_len = |field: &Spanned<Vec<f64>>, what: &str| {
        if field.get_ref().len() == n {
            Ok(())
        } else {
            Err(fail(field.span(), format!("`{what}` has {} entries, expected {n}", field.get_ref().len())))
        }
    };
    check_len(&raw.gamma, "gamma")?;
    if let Some(g) = raw.gamma.get_ref().iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(fail(raw.gamma.span(), format!("gamma must be strictly positive, got {g}")));
    }
    let weights = match &raw.weights {
        Some(w) => {
            check_len(w, "weights")?;
            w.get_ref().clone()
        }
        None => vec![1.0; n],
    };
    let labels = match &raw.labels {
        Some(l) => {
            if l.get_ref().len() != n {
                return Err(fail(l.span(), format!("`labels` has {} entries, expected {n}", l.get_ref().len())));
            }
            for (i, a) in l.get_ref().iter().enumerate() {
                if a.is_empty() || a.contains(',') || a.chars().any(char::is_whitespace) {
                    return Err(fail(l.span(), format!("label {a:?} must be non-empty without commas or spaces")));
                }
                if l.get_ref()[..i].contains(a) {
                    return Err(fail(l.span(), format!("duplicate label {a:?}")));
                }
            }
            l.get_ref().clone()
        }
        None => (0..n).map(|i| format!("x{i}")).collect(),
    };
    let space = FeatureSpace::new(weights, labels)
        .map_err(|e| fail(raw.weights.as_ref().map_or(0..0, |w| w.span()), e.to_string()))?;
    let incidence = match &raw.incidence {
        Some(inc) => build_incidence(inc.get_ref()).map_err(|msg| fail(inc.span(), msg))?,
        None => Incidence::mass_action(),
    };
    let kernel = sis_atoms::DMatrix::from_fn(n, n, |x, y| rows[x][y]);
    let model = SisModel::new(space, kernel, raw.gamma.get_ref().clone(), incidence)
        .map_err(|e| fail(raw.kernel.span(), e.to_string()))?;

    let reservoir = match &raw.kappa {
        Some(kappa) => {
            check_len(kappa, "kappa")?;
            let spec = ReservoirSpec {
                kappa: kappa.get_ref().clone(),
                a: raw.a.as_ref().map_or(0.5, |v| *v.get_ref()),
                b: raw.b.as_ref().map_or(1.0, |v| *v.get_ref()),
                r_weight: raw.r_weight.as_ref().map_or(1.0, |v| *v.get_ref()),
            };
            ReservoirModel::with_params(model.clone(), spec.kappa.clone(), spec.a, spec.b, spec.r_weight)
                .map_err(|e| fail(kappa.span(), e.to_string()))?;
            Some(spec)
        }
        None => {
            if let Some(extra) = [&raw.a, &raw.b, &raw.r_weight].into_iter().flatten().next() {
                return Err(fail(extra.span(), "reservoir parameters need a `kappa` field".into()));
            }
            None
        }
    };
    Ok(ModelFile { model, reservoir })
}

fn build_incidence(raw: &RawIncidence) -> Result<Incidence, String> {
    let expect = |names: &[&str]| -> Result<(), String> {
        match raw.params.keys().find(|k| !names.contains(&k.as_str())) {
            Some(k) => Err(format!("unknown parameter `{k}` for family `{}`", raw.family)),
            None => Ok(()),
        }
    };
    let param = |name: &str| -> Result<f64, String> {
        raw.params.get(name).copied().ok_or_else(|| format!("family `{}` needs parameter `{name}`", raw.family))
    };
    if raw.values.is_some() && raw.family != "tabulated" {
        return Err("`values` is only used by the `tabulated` family".into());
    }
    let inc = match raw.family.as_str() {
        "mass_action" => {
            expect(&[])?;
            Ok(Incidence::mass_action())
        }
        "london_yorke" => {
            expect(&["a"])?;
            Incidence::london_yorke(param("a")?)
        }
        "power" => {
            expect(&["alpha"])?;
            Incidence::power(param("alpha")?)
        }
        "saturation" => {
            expect(&["c"])?;
            Incidence::saturation(param("c")?)
        }
        "exponential_saturation" => {
            expect(&["c"])?;
            Incidence::exponential_saturation(param("c")?)
        }
        "log_saturation" => {
            expect(&["c"])?;
            Incidence::log_saturation(param("c")?)
        }
        "tabulated" => {
            expect(&[])?;
            let values = raw.values.clone().ok_or("family `tabulated` needs `values`")?;
            Incidence::tabulated(values)
        }
        other => return Err(format!("unknown incidence family `{other}`")),
    };
    inc.map_err(|e| e.to_string())
}

/// `line:column` (1-based) of a byte offset.
fn position(text: &str, offset: usize) -> String {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    format!("{line}:{column}")
}
