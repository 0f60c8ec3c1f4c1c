//! Vector files and initial-condition specs.

use std::path::Path;

use sis_atoms::equilibria::random_starts;
use sis_atoms::{SisModel, StateVector, SubsetMask};

use crate::error::{CliError, CliResult};

/// Numbers separated by whitespace or commas; `#` starts a comment.
pub fn parse_vector(text: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        for token in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = token
                .parse()
                .map_err(|_| CliError::Input(format!("{}: `{token}` is not a number", i + 1)))?;
            out.push(v);
        }
    }
    Ok(out)
}

pub fn load_vector(path: &Path) -> CliResult<Vec<f64>> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(&name, e))?;
    parse_vector(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{name}:{msg}")),
        other => other,
    })
}

/// A state in `[0, 1]^n` of the right length.
pub fn state_from_values(model: &SisModel, values: Vec<f64>) -> CliResult<StateVector> {
    if values.len() != model.n() {
        return Err(CliError::Input(format!("vector has {} entries, model has {} features", values.len(), model.n())));
    }
    StateVector::new(values).map_err(|e| CliError::Input(e.to_string()))
}

/// Comma-separated labels, as in `mask:B,M`.
pub fn parse_mask(model: &SisModel, labels: &str) -> CliResult<SubsetMask> {
    let mut mask = SubsetMask::empty(model.n());
    for label in labels.split(',').map(str::trim).filter(|l| !l.is_empty()) {
        let i = model
            .space()
            .index_of(label)
            .ok_or_else(|| CliError::Input(format!("unknown label `{label}`")))?;
        mask.insert(i);
    }
    Ok(mask)
}

/// `ones`, `zeros`, `mask:<labels>`, `file:<path>` or `random:<seed>`.
pub fn parse_init(model: &SisModel, spec: &str) -> CliResult<StateVector> {
    let n = model.n();
    match spec.split_once(':') {
        None if spec == "ones" => Ok(StateVector::ones(n)),
        None if spec == "zeros" => Ok(StateVector::zeros(n)),
        Some(("mask", labels)) => Ok(StateVector::indicator(&parse_mask(model, labels)?)),
        Some(("file", path)) => state_from_values(model, load_vector(Path::new(path))?),
        Some(("random", seed)) => {
            let seed: u64 =
                seed.parse().map_err(|_| CliError::Input(format!("random seed `{seed}` is not an integer")))?;
            Ok(random_starts(n, 1, seed).remove(0))
        }
        _ => Err(CliError::Input(format!(
            "unknown init spec `{spec}` (expected ones, zeros, mask:<labels>, file:<path> or random:<seed>)"
        ))),
    }
}
