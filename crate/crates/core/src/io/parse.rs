use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn parse_real(token: &str, what: &str) -> Result<f64> {
    let t = token.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| Error::Config(format!("{what}: `{t}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("{what}: `{t}` is not finite")));
    }
    Ok(v)
}

/// Comma-separated reals, e.g. `2,0`.
pub fn parse_real_list(text: &str, what: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::Config(format!("{what}: empty list")));
    }
    text.split(',').map(|t| parse_real(t, what)).collect()
}

/// `name=value` pairs separated by commas, e.g. `c1=0.5,c2=1`.
pub fn parse_params(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (name, value) = item.split_once('=').ok_or_else(|| {
            Error::Config(format!("--params: `{item}` is not of the form name=value"))
        })?;
        let name = name.trim();
        if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::Config(format!(
                "--params: invalid parameter name `{name}`"
            )));
        }
        let v = parse_real(value, "--params")?;
        if out.insert(name.to_string(), v).is_some() {
            return Err(Error::Config(format!("--params: `{name}` given twice")));
        }
    }
    Ok(out)
}

/// Fitting window `a,b` with `0 <= a < b`.
pub fn parse_window(text: &str) -> Result<(f64, f64)> {
    let v = parse_real_list(text, "--window")?;
    match v[..] {
        [a, b] if a >= 0.0 && a < b => Ok((a, b)),
        [_, _] => Err(Error::Config(format!(
            "--window: need 0 <= a < b, got `{text}`"
        ))),
        _ => Err(Error::Config(format!(
            "--window: expected `a,b`, got `{text}`"
        ))),
    }
}

/// Displacement vectors separated by semicolons, e.g. `1,0;0,1`.
pub fn parse_deltas(text: &str) -> Result<Vec<Vec<f64>>> {
    let vs: Vec<Vec<f64>> = text
        .split(';')
        .map(|part| parse_real_list(part, "--deltas"))
        .collect::<Result<_>>()?;
    let n = vs[0].len();
    if vs.iter().any(|v| v.len() != n) {
        return Err(Error::Config(
            "--deltas: all vectors must have the same length".into(),
        ));
    }
    Ok(vs)
}
