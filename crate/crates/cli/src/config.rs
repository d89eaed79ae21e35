//! Experiment config files.
//!
//! ```toml
//! k_list = [2, 3, 4]
//! deltas = [0.0, 0.05]
//! sampling_rate = 16
//! trials = 100
//! seed = 7
//! e_cut = 0.5            # used by `sweep`
//! e_cuts = [0.2, 0.5]    # used by `critical`; defaults to [e_cut]
//! persistence = "to-end" # or "until-turn-up"
//!
//! # Either an explicit list ...
//! bandwidths = [1.0, 2.0, 4.0]
//! # ... or a range (inclusive of `stop` when it lands on the grid).
//! [bandwidth_range]
//! start = 0.5
//! stop = 40.0
//! step = 0.5
//! ```

use std::ops::Range;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;
use truncft::experiments::{ExperimentConfig, Persistence};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRange {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    k_list: Option<Spanned<Vec<u32>>>,
    bandwidths: Option<Spanned<Vec<f64>>>,
    bandwidth_range: Option<Spanned<RawRange>>,
    deltas: Option<Spanned<Vec<f64>>>,
    sampling_rate: Option<Spanned<f64>>,
    trials: Option<Spanned<usize>>,
    seed: Option<Spanned<u64>>,
    e_cut: Option<Spanned<f64>>,
    e_cuts: Option<Spanned<Vec<f64>>>,
    persistence: Option<Spanned<Persistence>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub experiment: ExperimentConfig,
    pub e_cuts: Vec<f64>,
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

struct Checker<'a> {
    name: &'a str,
    text: &'a str,
}

impl Checker<'_> {
    fn fail<T>(&self, span: Range<usize>, msg: impl std::fmt::Display) -> Result<T, CliError> {
        Err(CliError::Validation(format!(
            "{}:{}: {msg}",
            self.name,
            line_of(self.text, span)
        )))
    }
}

fn range_grid(r: &RawRange) -> Option<Vec<f64>> {
    if !(r.start > 0.0 && r.step > 0.0 && r.stop >= r.start) {
        return None;
    }
    let n = ((r.stop - r.start) / r.step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return None;
    }
    Some((0..=n).map(|i| r.start + i as f64 * r.step).collect())
}

pub fn parse_config(text: &str, name: &str) -> Result<LoadedConfig, CliError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s)).unwrap_or(1);
        CliError::Validation(format!("{name}:{line}: {}", e.message()))
    })?;
    let chk = Checker { name, text };
    let mut cfg = ExperimentConfig::default();

    if let Some(v) = raw.k_list {
        if v.get_ref().is_empty() || v.get_ref().contains(&0) {
            return chk.fail(v.span(), "k_list must be a nonempty list of integers ≥ 1");
        }
        cfg.k_list = v.into_inner();
    }
    match (raw.bandwidths, raw.bandwidth_range) {
        (Some(_), Some(r)) => {
            return chk.fail(r.span(), "give either bandwidths or bandwidth_range, not both");
        }
        (Some(v), None) => {
            let b = v.get_ref();
            if b.is_empty() || b.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return chk.fail(v.span(), "bandwidths must be positive and finite");
            }
            if b.windows(2).any(|w| w[0] >= w[1]) {
                return chk.fail(v.span(), "bandwidths must be strictly increasing");
            }
            cfg.bandwidths = v.into_inner();
        }
        (None, Some(r)) => match range_grid(r.get_ref()) {
            Some(grid) => cfg.bandwidths = grid,
            None => {
                return chk.fail(
                    r.span(),
                    "bandwidth_range needs 0 < start ≤ stop and step > 0",
                )
            }
        },
        (None, None) => {}
    }
    if let Some(v) = raw.deltas {
        if v.get_ref().is_empty() || v.get_ref().iter().any(|&d| !(d >= 0.0 && d.is_finite())) {
            return chk.fail(v.span(), "deltas must be a nonempty list of finite values ≥ 0");
        }
        cfg.deltas = v.into_inner();
    }
    if let Some(v) = raw.sampling_rate {
        if !(*v.get_ref() > 0.0 && v.get_ref().is_finite()) {
            return chk.fail(v.span(), "sampling_rate must be positive");
        }
        cfg.sampling_rate = v.into_inner();
    }
    if let Some(v) = raw.trials {
        if *v.get_ref() == 0 {
            return chk.fail(v.span(), "trials must be at least 1");
        }
        cfg.trials = v.into_inner();
    }
    if let Some(v) = raw.seed {
        cfg.seed = v.into_inner();
    }
    if let Some(v) = raw.e_cut {
        if !(*v.get_ref() > 0.0) {
            return chk.fail(v.span(), "e_cut must be positive");
        }
        cfg.e_cut = v.into_inner();
    }
    if let Some(v) = raw.persistence {
        cfg.persistence = v.into_inner();
    }
    let e_cuts = match raw.e_cuts {
        Some(v) => {
            if v.get_ref().is_empty() || v.get_ref().iter().any(|&e| !(e > 0.0)) {
                return chk.fail(v.span(), "e_cuts must be a nonempty list of positive values");
            }
            v.into_inner()
        }
        None => vec![cfg.e_cut],
    };
    cfg.validate()
        .map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    Ok(LoadedConfig {
        experiment: cfg,
        e_cuts,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}
