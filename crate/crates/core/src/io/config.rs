use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::NormKind;

/// Run settings read from a JSON file; every field mirrors a command-line flag.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub model: Option<String>,
    pub model_file: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    pub norm: Option<NormKind>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub stride: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub ic: Option<Vec<f64>>,
    pub k: Option<usize>,
    pub deltas: Option<Vec<Vec<f64>>>,
    pub check: Option<String>,
    pub samples: Option<usize>,
    pub pairs: Option<usize>,
    pub ell: Option<usize>,
    pub beta: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub n: Option<usize>,
}

macro_rules! overlay_fields {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f; } )*
    };
}

impl RunConfig {
    /// Fields set in `top` replace those in `self`; parameters merge by name.
    pub fn overlay(mut self, top: RunConfig) -> RunConfig {
        overlay_fields!(self, top; model, model_file, norm, seed, out, dt, t_end, stride, window, ic, k, deltas,
            check, samples, pairs, ell, beta, gamma1, gamma2, n);
        self.params.extend(top.params);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::Config(format!(
                "config: `{name}` must be positive, got {x}"
            ))),
            _ => Ok(()),
        };
        positive("dt", self.dt)?;
        positive("t-end", self.t_end)?;
        positive("beta", self.beta)?;
        if self.stride == Some(0) {
            return Err(Error::Config("config: `stride` must be at least 1".into()));
        }
        if let Some((a, b)) = self.window {
            if !(a >= 0.0 && a < b && b.is_finite()) {
                return Err(Error::Config(format!(
                    "config: `window` needs 0 <= a < b, got ({a}, {b})"
                )));
            }
        }
        if self.model.is_some() && self.model_file.is_some() {
            return Err(Error::Config(
                "config: `model` and `model-file` are mutually exclusive".into(),
            ));
        }
        if self
            .ic
            .as_ref()
            .is_some_and(|v| v.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Config("config: `ic` has a non-finite entry".into()));
        }
        if self.params.values().any(|x| !x.is_finite()) {
            return Err(Error::Config(
                "config: `params` has a non-finite entry".into(),
            ));
        }
        Ok(())
    }
}

/// Parses and validates a run configuration.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_and_overlays() {
        let file = parse_run_config(
            r#"{"model": "hopf", "t-end": 30, "norm": "l1", "params": {"gamma1": 0.2}}"#,
        )
        .unwrap();
        let flags = RunConfig {
            t_end: Some(5.0),
            params: [("gamma2".to_string(), 3.0)].into(),
            ..Default::default()
        };
        let merged = file.overlay(flags);
        assert_eq!(merged.model.as_deref(), Some("hopf"));
        assert_eq!(merged.t_end, Some(5.0));
        assert_eq!(merged.norm, Some(NormKind::L1));
        assert_eq!(merged.params.len(), 2);
    }

    #[test]
    fn rejects_bad_fields() {
        for (text, needle) in [
            (r#"{"modle": "hopf"}"#, "unknown field `modle`"),
            (r#"{"dt": -1}"#, "`dt`"),
            (r#"{"stride": 0}"#, "`stride`"),
            (r#"{"window": [5, 1]}"#, "`window`"),
            (r#"{"norm": "l3"}"#, "unknown variant"),
            (
                r#"{"model": "hopf", "model-file": "m.json"}"#,
                "mutually exclusive",
            ),
        ] {
            let msg = parse_run_config(text).unwrap_err().to_string();
            assert!(msg.contains(needle), "{text}: {msg}");
        }
    }

    proptest! {
        #[test]
        fn never_panics(s in "\\PC*") {
            let _ = parse_run_config(&s);
        }
    }
}
