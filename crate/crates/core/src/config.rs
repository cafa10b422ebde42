//! Flat `key = value` parameter files.
//!
//! ```text
//! # unit hypersphere, l = 1
//! n = 3
//! rho = 1.0
//! R_g = 0
//! R_h = 2
//! mu = 2
//! ```
//!
//! The format is a TOML subset: every key is optional, unknown keys and
//! tables are rejected, and values must be finite.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::params::{ModeParams, SpacetimeParams};

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub n: Option<u32>,
    pub rho: Option<f64>,
    #[serde(rename = "R_g")]
    pub r_g: Option<f64>,
    #[serde(rename = "R_h")]
    pub r_h: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse_config(text: &str) -> Result<ParamFile> {
    let file: ParamFile = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let reals = [
        ("rho", file.rho),
        ("R_g", file.r_g),
        ("R_h", file.r_h),
        ("lambda", file.lambda),
        ("mu", file.mu),
        ("nu", file.nu),
    ];
    for (key, value) in reals {
        if let Some(v) = value {
            if !v.is_finite() {
                let line = text
                    .lines()
                    .position(|l| l.trim_start().starts_with(key) && l.contains('='))
                    .map_or(0, |i| i + 1);
                return Err(Error::Config { line, message: format!("{key} = {v} is not finite") });
            }
        }
    }
    Ok(file)
}

impl ParamFile {
    /// Fields of `other` that are set replace ours.
    pub fn overlay(self, other: ParamFile) -> ParamFile {
        ParamFile {
            n: other.n.or(self.n),
            rho: other.rho.or(self.rho),
            r_g: other.r_g.or(self.r_g),
            r_h: other.r_h.or(self.r_h),
            lambda: other.lambda.or(self.lambda),
            mu: other.mu.or(self.mu),
            nu: other.nu.or(self.nu),
        }
    }

    /// `n` and `rho` are required; the curvatures and mode constants
    /// default to zero.
    pub fn resolve(&self) -> Result<(SpacetimeParams, ModeParams)> {
        let n = self.n.ok_or(Error::InvalidParameter { name: "n", reason: "missing".into() })?;
        let rho = self.rho.ok_or(Error::InvalidParameter { name: "rho", reason: "missing".into() })?;
        let p = SpacetimeParams::new(n, rho, self.r_g.unwrap_or(0.0), self.r_h.unwrap_or(0.0))?;
        let m = ModeParams::new(self.lambda.unwrap_or(0.0), self.mu.unwrap_or(0.0), self.nu.unwrap_or(0.0))?;
        Ok((p, m))
    }
}
