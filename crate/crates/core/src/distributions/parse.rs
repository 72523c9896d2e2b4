//! Textual distribution specs.
//!
//! ```text
//! uniform
//! beta:A,B
//! texp:R
//! mix:W1*SPEC1+W2*SPEC2      (components are non-mixture specs)
//! discrete:@path             CSV rows `support,mass`
//! empirical:@path            one value per line
//! plinear:@path              CSV rows `x,F`
//! ```
//!
//! Relative `@path`s resolve against `base_dir`.

use std::path::{Path, PathBuf};

use super::{DistError, DistModel};

fn spec_err(spec: &str, reason: impl Into<String>) -> DistError {
    DistError::Spec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(spec: &str, s: &str) -> Result<f64, DistError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| spec_err(spec, format!("`{s}` is not a number")))
}

pub fn parse_dist_spec(spec: &str, base_dir: &Path) -> Result<DistModel, DistError> {
    let spec = spec.trim();
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h.trim(), Some(r.trim())),
        None => (spec, None),
    };
    match (head.to_ascii_lowercase().as_str(), rest) {
        ("uniform", None) => Ok(DistModel::Uniform),
        ("beta", Some(args)) => {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() != 2 {
                return Err(spec_err(spec, "expected beta:A,B"));
            }
            DistModel::beta(parse_f64(spec, parts[0])?, parse_f64(spec, parts[1])?)
        }
        ("texp", Some(arg)) => DistModel::truncated_exponential(parse_f64(spec, arg)?),
        ("mix", Some(args)) => {
            let mut weights = Vec::new();
            let mut components = Vec::new();
            for term in args.split('+') {
                let (w, inner) = term
                    .split_once('*')
                    .ok_or_else(|| spec_err(spec, format!("mixture term `{term}` lacks `W*SPEC`")))?;
                if inner.trim().starts_with("mix:") {
                    return Err(spec_err(spec, "nested mixtures are not supported"));
                }
                weights.push(parse_f64(spec, w)?);
                components.push(parse_dist_spec(inner, base_dir)?);
            }
            DistModel::mixture(weights, components)
        }
        ("discrete", Some(arg)) => {
            let path = file_arg(spec, arg, base_dir)?;
            let rows = read_pairs(&path)?;
            let (support, masses) = rows.into_iter().unzip();
            DistModel::discrete(support, masses)
        }
        ("plinear", Some(arg)) => {
            let path = file_arg(spec, arg, base_dir)?;
            DistModel::piecewise_linear(read_pairs(&path)?)
        }
        ("empirical", Some(arg)) => {
            let path = file_arg(spec, arg, base_dir)?;
            DistModel::empirical(read_values(&path)?)
        }
        _ => Err(spec_err(spec, "unknown distribution family")),
    }
}

fn file_arg(spec: &str, arg: &str, base_dir: &Path) -> Result<PathBuf, DistError> {
    let p = arg
        .strip_prefix('@')
        .ok_or_else(|| spec_err(spec, "file-backed families take `@path`"))?;
    let p = Path::new(p);
    Ok(if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    })
}

fn read_to_string(path: &Path) -> Result<String, DistError> {
    std::fs::read_to_string(path).map_err(|source| DistError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn file_err(path: &Path, line: usize, reason: impl Into<String>) -> DistError {
    DistError::File {
        path: path.display().to_string(),
        line,
        reason: reason.into(),
    }
}

/// Two-column numeric CSV. A first row that does not parse is taken as a header.
fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>, DistError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(file_err(path, i + 1, "expected two comma-separated columns"));
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => out.push((a, b)),
            _ if out.is_empty() && i == 0 => continue,
            _ => return Err(file_err(path, i + 1, format!("cannot parse `{line}`"))),
        }
    }
    Ok(out)
}

fn read_values(path: &Path) -> Result<Vec<f64>, DistError> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = line
            .parse::<f64>()
            .map_err(|_| file_err(path, i + 1, format!("cannot parse `{line}`")))?;
        out.push(v);
    }
    Ok(out)
}
