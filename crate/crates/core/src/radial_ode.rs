//! The radial equation in `r` and in the inverse variable `x = rho / r`,
//! together with the data of its regular singular point at infinity
//! (`x = 0`).
//!
//! In `x` the equation reads
//! `f'' = Q f + P f'`, in `r` it reads `R'' + P R' + Q R = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::params::{metric_coefficient, CaseTag, ModeParams, SpacetimeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    RadialR,
    InverseX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeCoefficients {
    pub p: f64,
    pub q: f64,
    pub variable: Variable,
}

/// Reduced denominator E(x) = x^n + kappa_g rho^2 - kappa_h x^2, so that
/// the full denominator is D(x) = x^2 E(x).
pub(crate) fn reduced_denominator<T: Scalar>(p: &SpacetimeParams, x: &T) -> (T, f64) {
    let (kh, kg) = kappas::<T>(p);
    let rho2 = T::from_f64(p.rho * p.rho);
    let xn = x.powi(p.n);
    let x2 = x.clone() * x.clone();
    let scale = xn.magnitude() + (kg.clone() * rho2.clone()).magnitude() + (kh.clone() * x2.clone()).magnitude();
    (xn + kg * rho2 - kh * x2, scale)
}

/// `(kappa_h, kappa_g)` computed inside the backend, so rational mode keeps
/// them exact.
pub(crate) fn kappas<T: Scalar>(p: &SpacetimeParams) -> (T, T) {
    let n = p.n as i64;
    (
        T::from_f64(p.r_h) / T::from_i64((n - 2) * (n - 1)),
        T::from_f64(p.r_g) / T::from_i64(n * (n + 1)),
    )
}

/// `(P, Q)` of the equation in `x`, in any scalar backend.
pub fn coefficients_x_in<T: Scalar>(p: &SpacetimeParams, m: &ModeParams, x: &T) -> Result<(T, T)> {
    let xf = x.to_c64().re;
    if !(xf > 0.0) {
        return Err(Error::SingularPoint { location: xf, what: "x = 0" });
    }
    let (e, scale) = reduced_denominator(p, x);
    if e.is_negligible(scale) {
        return Err(Error::SingularPoint { location: xf, what: "root of D(x)" });
    }
    let nf = p.nf();
    let (kh, kg) = kappas::<T>(p);
    let rho2 = T::from_f64(p.rho * p.rho);
    let lambda = T::from_f64(m.lambda);
    let mu = T::from_f64(m.mu);
    let nu = T::from_f64(m.nu);
    let xn = x.powi(p.n);
    let x2 = x.clone() * x.clone();
    let d = x2.clone() * e.clone();

    // rho^2 (lambda - mu x^2/rho^2 - nu/F) with F = -E/x^2, regrouped so the
    // Case-2 cancellation lambda*kappa_h = nu happens before any division.
    let lambda_kh = lambda.clone() * kh.clone();
    let q_num = rho2.clone()
        * (lambda.clone() * xn.clone() + lambda * kg.clone() * rho2.clone() + (nu - lambda_kh) * x2.clone())
        - mu * x2.clone() * e.clone();
    let q = q_num / (e.clone() * d);

    let p_num = xn + T::from_f64(1.0 - nf) * rho2 * kg + T::from_f64(nf - 3.0) * kh * x2;
    let pc = -(p_num / (x.clone() * e));
    Ok((pc, q))
}

pub fn coefficients_x(p: &SpacetimeParams, m: &ModeParams, x: f64) -> Result<OdeCoefficients> {
    let (pc, q) = coefficients_x_in(p, m, &x)?;
    Ok(OdeCoefficients { p: pc, q, variable: Variable::InverseX })
}

/// Coefficients of `R'' + P R' + Q R = 0` in the radial variable.
pub fn coefficients_r(p: &SpacetimeParams, m: &ModeParams, r: f64) -> Result<OdeCoefficients> {
    let f = metric_coefficient(p, r)?;
    if f.abs() <= 1e-14 * (p.kappa_h().abs() + 1.0) {
        return Err(Error::SingularPoint { location: r, what: "zero of the metric coefficient" });
    }
    let nf = p.nf();
    let rho_pow = p.rho.powi(p.n as i32 - 2);
    let a_num = rho_pow / r.powi(p.n as i32 - 1) + r * p.r_g / nf - p.r_h / ((nf - 2.0) * r);
    let b_num = m.mu / (r * r) + m.nu / f - m.lambda;
    Ok(OdeCoefficients { p: a_num / (-f), q: b_num / (-f), variable: Variable::RadialR })
}

pub fn residual_in<T: Scalar>(p: &SpacetimeParams, m: &ModeParams, f: &T, fp: &T, fpp: &T, x: &T) -> Result<T> {
    let (pc, q) = coefficients_x_in(p, m, x)?;
    Ok(fpp.clone() - q * f.clone() - pc * fp.clone())
}

/// `f'' - Q f - P f'` at `x`.
pub fn residual(p: &SpacetimeParams, m: &ModeParams, f: f64, fp: f64, fpp: f64, x: f64) -> Result<f64> {
    residual_in(p, m, &f, &fp, &fpp, &x)
}

/// `R'' + P R' + Q R` at `r`.
pub fn residual_r(p: &SpacetimeParams, m: &ModeParams, r_val: f64, rp: f64, rpp: f64, r: f64) -> Result<f64> {
    let c = coefficients_r(p, m, r)?;
    Ok(rpp + c.p * rp + c.q * r_val)
}

/// Limits l1 = lim x(-P), l2 = lim x^2(-Q) as x -> 0, in the closed forms
/// valid for each case.
pub fn singular_limits_in<T: Scalar>(p: &SpacetimeParams, m: &ModeParams, case: CaseTag) -> Result<(T, T)> {
    let n = p.n as i64;
    match case {
        CaseTag::Case1 => {
            if p.r_g == 0.0 {
                return Err(Error::DivisionByZero("R_g in Case-1 limits"));
            }
            let l1 = T::from_i64(1 - n);
            let l2 = -(T::from_i64(n * (n + 1)) * T::from_f64(m.lambda)) / T::from_f64(p.r_g);
            Ok((l1, l2))
        }
        CaseTag::Case2 => {
            if p.r_h == 0.0 {
                return Err(Error::DivisionByZero("R_h in Case-2 limits"));
            }
            let r_h = T::from_f64(p.r_h);
            let l1 = T::from_i64(3 - n);
            let mut l2 = -(T::from_i64((n - 2) * (n - 1)) * T::from_f64(m.mu)) / r_h.clone();
            if n == 4 {
                l2 = l2
                    - T::from_i64(216) * T::from_f64(m.nu) * T::from_f64(p.rho * p.rho)
                        / (r_h.clone() * r_h.clone() * r_h);
            }
            Ok((l1, l2))
        }
    }
}

pub fn singular_limits(p: &SpacetimeParams, m: &ModeParams, case: CaseTag) -> Result<(f64, f64)> {
    singular_limits_in(p, m, case)
}

/// Raw values of `x(-P(x))` and `x^2(-Q(x))` on the grid x = 10^-3 .. 10^-6.
pub fn limit_sequence(p: &SpacetimeParams, m: &ModeParams) -> Result<Vec<(f64, f64, f64)>> {
    (3..=6)
        .map(|k| {
            let x = 10f64.powi(-k);
            let (pc, q) = coefficients_x_in(p, m, &x)?;
            Ok((x, -x * pc, -x * x * q))
        })
        .collect()
}

/// Polynomial (Neville) extrapolation of the limit sequence to x = 0.
pub fn extrapolated_limits(p: &SpacetimeParams, m: &ModeParams) -> Result<(f64, f64)> {
    let seq = limit_sequence(p, m)?;
    let xs: Vec<f64> = seq.iter().map(|s| s.0).collect();
    let l1: Vec<f64> = seq.iter().map(|s| s.1).collect();
    let l2: Vec<f64> = seq.iter().map(|s| s.2).collect();
    Ok((neville_at_zero(&xs, &l1), neville_at_zero(&xs, &l2)))
}

fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut t = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (xa, xb) = (xs[i], xs[i + level]);
            t[i] = (xb * t[i] - xa * t[i + 1]) / (xb - xa);
        }
    }
    t[0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IndicialData {
    pub l1: f64,
    pub l2: f64,
    pub e_minus: Complex64,
    pub e_plus: Complex64,
    pub case: CaseTag,
}

impl IndicialData {
    /// e^2 + (l1 - 1) e + l2
    pub fn characteristic(&self, e: Complex64) -> Complex64 {
        e * e + (self.l1 - 1.0) * e + self.l2
    }

    pub fn is_real(&self) -> bool {
        self.e_minus.im == 0.0 && self.e_plus.im == 0.0
    }
}

/// Roots of e^2 + b e + c = 0 ordered by real part (then imaginary part).
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    let mut roots = if disc >= 0.0 {
        let sq = disc.sqrt();
        let t = -0.5 * (b + b.signum() * sq + if b == 0.0 { sq } else { 0.0 });
        if t == 0.0 {
            [Complex64::new(0.0, 0.0), Complex64::new(-b, 0.0)]
        } else {
            [Complex64::new(t, 0.0), Complex64::new(c / t, 0.0)]
        }
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, -im), Complex64::new(-0.5 * b, im)]
    };
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// The exponents exactly as typeset in closed form for each case.
pub fn explicit_exponents(p: &SpacetimeParams, m: &ModeParams, case: CaseTag) -> [Complex64; 2] {
    let nf = p.nf();
    let c = |v: f64| Complex64::new(v, 0.0);
    let (center, half_width) = match case {
        CaseTag::Case1 => {
            let w = c(nf).sqrt() * c(4.0 * (1.0 + nf) * m.lambda + nf * p.r_g).sqrt() / (2.0 * c(p.r_g).sqrt());
            (c(nf / 2.0), w)
        }
        CaseTag::Case2 => {
            let delta = if p.n == 4 { 432.0 * m.nu * p.rho * p.rho / (p.r_h * p.r_h) } else { 0.0 };
            let w = c(nf - 2.0).sqrt() * c(4.0 * (nf - 1.0) * m.mu + delta + (nf - 2.0) * p.r_h).sqrt()
                / c(p.r_h).sqrt();
            (c((nf - 2.0) / 2.0), w / 2.0)
        }
    };
    let mut roots = [center - half_width, center + half_width];
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

pub fn indicial_exponents(p: &SpacetimeParams, m: &ModeParams, case: CaseTag) -> Result<IndicialData> {
    let (l1, l2) = singular_limits(p, m, case)?;
    let [e_minus, e_plus] = quadratic_roots(l1 - 1.0, l2);
    let explicit = explicit_exponents(p, m, case);
    let scale = 1.0 + e_minus.norm().max(e_plus.norm());
    let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-10 * scale;
    let same = (close(e_minus, explicit[0]) && close(e_plus, explicit[1]))
        || (close(e_minus, explicit[1]) && close(e_plus, explicit[0]));
    if !same {
        return Err(Error::FormulaMismatch {
            quadratic: format!("[{e_minus}, {e_plus}]"),
            explicit: format!("[{}, {}]", explicit[0], explicit[1]),
        });
    }
    Ok(IndicialData { l1, l2, e_minus, e_plus, case })
}
