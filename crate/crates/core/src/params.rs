//! Background and mode parameters of the Euclidean Schwarzschild-Tangherlini
//! family, and the classification into the two cases where infinity is a
//! regular singular point of the radial equation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Background geometry: space dimension `n` (spacetime is 1+n dimensional),
/// horizon radius `rho`, and the two curvature constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeParams {
    pub n: u32,
    pub rho: f64,
    #[serde(rename = "R_g")]
    pub r_g: f64,
    #[serde(rename = "R_h")]
    pub r_h: f64,
}

impl SpacetimeParams {
    pub fn new(n: u32, rho: f64, r_g: f64, r_h: f64) -> Result<Self> {
        let p = SpacetimeParams { n, rho, r_g, r_h };
        p.validate()?;
        Ok(p)
    }

    /// Round sphere of unit sectional curvature with no cosmological term.
    pub fn schwarzschild(n: u32, rho: f64) -> Result<Self> {
        Self::new(n, rho, 0.0, ((n as f64) - 2.0) * ((n as f64) - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidParameter { name: "n", reason: format!("{} < 3", self.n) });
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            return Err(Error::InvalidParameter { name: "rho", reason: format!("{} is not a positive finite radius", self.rho) });
        }
        if !self.r_g.is_finite() {
            return Err(Error::InvalidParameter { name: "R_g", reason: "not finite".into() });
        }
        if !self.r_h.is_finite() {
            return Err(Error::InvalidParameter { name: "R_h", reason: "not finite".into() });
        }
        Ok(())
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// (n-2)(n-1)
    pub fn h_norm(&self) -> f64 {
        (self.nf() - 2.0) * (self.nf() - 1.0)
    }

    /// n(n+1)
    pub fn g_norm(&self) -> f64 {
        self.nf() * (self.nf() + 1.0)
    }

    /// Sectional curvature R_h / ((n-2)(n-1)) of the Einstein variety.
    pub fn kappa_h(&self) -> f64 {
        self.r_h / self.h_norm()
    }

    /// R_g / (n(n+1)).
    pub fn kappa_g(&self) -> f64 {
        self.r_g / self.g_norm()
    }
}

/// Separation constants: `lambda` on the full space, `mu` on the Einstein
/// variety, `nu` the squared momentum around the time circle.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ModeParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
}

impl ModeParams {
    pub fn new(lambda: f64, mu: f64, nu: f64) -> Result<Self> {
        let m = ModeParams { lambda, mu, nu };
        m.validate()?;
        Ok(m)
    }

    /// Static mode with angular eigenvalue `mu`.
    pub fn angular(mu: f64) -> Self {
        ModeParams { lambda: 0.0, mu, nu: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lambda", self.lambda), ("mu", self.mu), ("nu", self.nu)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "not finite".into() });
            }
        }
        if self.nu < 0.0 {
            return Err(Error::InvalidParameter { name: "nu", reason: format!("{} < 0", self.nu) });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    /// Nonzero cosmological curvature R_g.
    Case1,
    /// R_g = 0 with the eigenvalue tied to the time-circle momentum.
    Case2,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::Case1 => "Case1",
            CaseTag::Case2 => "Case2",
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Case1" | "case1" | "1" => Ok(CaseTag::Case1),
            "Case2" | "case2" | "2" => Ok(CaseTag::Case2),
            other => Err(Error::Document(format!("unknown case `{other}`"))),
        }
    }
}

/// Coefficient of dt^2: kappa_h - (rho/r)^(n-2) - r^2 kappa_g.
pub fn metric_coefficient(p: &SpacetimeParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain { x: r, what: "metric_coefficient (r > 0)" });
    }
    let value = p.kappa_h() - (p.rho / r).powi(p.n as i32 - 2) - r * r * p.kappa_g();
    if !value.is_finite() {
        return Err(Error::Domain { x: r, what: "metric_coefficient (non-finite)" });
    }
    Ok(value)
}

/// Metric coefficient at r = rho; zero exactly when rho is a horizon.
pub fn horizon_residual(p: &SpacetimeParams) -> f64 {
    p.kappa_h() - 1.0 - p.rho * p.rho * p.kappa_g()
}

/// Period of the imaginary time coordinate required for regularity at r = rho.
pub fn time_period(p: &SpacetimeParams) -> f64 {
    4.0 * PI * p.rho
}

pub fn classify_case(p: &SpacetimeParams, m: &ModeParams, tol: f64) -> Result<CaseTag> {
    if p.r_g.abs() > tol {
        return Ok(CaseTag::Case1);
    }
    if p.r_h.abs() <= tol {
        return Err(Error::Unclassifiable("R_g = 0 and R_h = 0".into()));
    }
    let mismatch = m.lambda * p.r_h - p.h_norm() * m.nu;
    if mismatch.abs() > tol {
        return Err(Error::Unclassifiable(format!(
            "R_g = 0 but lambda*R_h - (n-2)(n-1)*nu = {mismatch}"
        )));
    }
    if p.n == 3 && m.nu.abs() > tol {
        return Err(Error::Unclassifiable("n = 3 with nu != 0".into()));
    }
    Ok(CaseTag::Case2)
}
