//! Explicit solutions of the static hypersphere problem (`R_g = lambda = nu
//! = 0`, `R_h = (n-2)(n-1)`, `mu = l(l+n-2)`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{rational, Scalar};
use crate::error::{Error, Result};
use crate::frobenius::FrobeniusSeries;
use crate::params::{CaseTag, ModeParams, SpacetimeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypersphereSpec {
    pub n: u32,
    pub l: u32,
}

impl HypersphereSpec {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter { name: "n", reason: format!("{n} < 3") });
        }
        Ok(HypersphereSpec { n, l })
    }

    pub fn stride(&self) -> u32 {
        self.n - 2
    }

    pub fn params(&self) -> SpacetimeParams {
        SpacetimeParams::schwarzschild(self.n, 1.0).expect("n >= 3")
    }

    pub fn modes(&self) -> ModeParams {
        ModeParams::angular(self.mu())
    }

    pub fn mu(&self) -> f64 {
        (self.l * (self.l + self.n - 2)) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Leading power `x^(-l)`.
    Minus,
    /// Leading power `x^(n-2+l)`.
    Plus,
}

/// Hypergeometric pair `x^e * sum (a)_i^2 / ((c)_i i!) x^(i(n-2))`, with
/// coefficients produced by the ratio `(a+i)^2 / ((c+i)(i+1))`.
///
/// A numerator zero ends the series (polynomial solution). A denominator
/// zero reached before that is a Gamma pole: the branch is logarithmic.
pub fn gamma_series<T: Scalar>(spec: &HypersphereSpec, branch: Branch, terms: usize) -> Result<FrobeniusSeries<T>> {
    let m = spec.stride() as i64;
    let l = spec.l as i64;
    let (e, a, c) = match branch {
        Branch::Minus => (T::from_i64(-l), T::from_i64(-l) / T::from_i64(m), T::from_i64(-2 * l) / T::from_i64(m)),
        Branch::Plus => (
            T::from_i64(m + l),
            T::one() + T::from_i64(l) / T::from_i64(m),
            T::from_i64(2) + T::from_i64(2 * l) / T::from_i64(m),
        ),
    };
    let mut coefficients = Vec::with_capacity(terms);
    let mut current = T::one();
    let mut terminated = false;
    for i in 0..terms {
        coefficients.push(current.clone());
        if terminated {
            continue;
        }
        let ai = a.clone() + T::from_i64(i as i64);
        let ci = c.clone() + T::from_i64(i as i64);
        if ai.is_zero() {
            terminated = true;
            current = T::zero();
            continue;
        }
        if ci.is_zero() {
            if i + 1 < terms {
                return Err(Error::GammaPole { argument: ci.to_c64().re - (i as f64) });
            }
            break;
        }
        current = current * ai.clone() * ai / (ci * T::from_i64(i as i64 + 1));
    }
    Ok(FrobeniusSeries {
        e,
        m: spec.stride(),
        coefficients,
        case: CaseTag::Case2,
        params: spec.params(),
        modes: spec.modes(),
        terminates: terminated,
    })
}

/// Floating evaluation of a single coefficient through Gamma functions,
/// for non-integer diagnostics only.
pub fn gamma_coefficient_direct(spec: &HypersphereSpec, branch: Branch, i: usize) -> Result<f64> {
    use statrs::function::gamma::gamma;
    let m = spec.stride() as f64;
    let l = spec.l as f64;
    let i_f = i as f64;
    let args = match branch {
        Branch::Minus => [-2.0 * l / m, i_f + l / (2.0 - spec.n as f64), i_f - 2.0 * l / m, l / (2.0 - spec.n as f64)],
        Branch::Plus => [2.0 + 2.0 * l / m, i_f + 1.0 + l / m, i_f + 2.0 + 2.0 * l / m, 1.0 + l / m],
    };
    for &a in &args {
        if a <= 0.0 && a.fract() == 0.0 {
            return Err(Error::GammaPole { argument: a });
        }
    }
    let [g_c, g_ai, g_ci, g_a] = args.map(gamma);
    let factorial = gamma(i_f + 1.0);
    Ok(g_c * g_ai * g_ai / (g_ci * g_a * g_a * factorial))
}

/// Coefficients of the `n = 3` rational solution
/// `x^(-l) sum_(i<=l) prod_(j<=i) (1-j+l)^2/(-1+j-2l) x^i / i!`.
pub fn polynomial_solution(l: u32) -> Vec<BigRational> {
    let l = l as i64;
    let mut out = Vec::with_capacity(l as usize + 1);
    let mut product = BigRational::one();
    let mut factorial = BigInt::one();
    for i in 0..=l {
        if i > 0 {
            let j = i;
            let num = (1 - j + l) * (1 - j + l);
            product *= rational(num, -1 + j - 2 * l);
            factorial *= BigInt::from(i);
        }
        out.push(&product / BigRational::from_integer(factorial.clone()));
    }
    out
}

/// The rational solution as a terminating stride-1 series about `x = 0`.
pub fn polynomial_series(l: u32) -> FrobeniusSeries<BigRational> {
    let spec = HypersphereSpec { n: 3, l };
    FrobeniusSeries {
        e: rational(-(l as i64), 1),
        m: 1,
        coefficients: polynomial_solution(l),
        case: CaseTag::Case2,
        params: spec.params(),
        modes: spec.modes(),
        terminates: true,
    }
}

fn signed_pow<T: Scalar>(x: &T, p: i64) -> T {
    if p >= 0 {
        x.powi(p as u32)
    } else {
        T::one() / x.powi((-p) as u32)
    }
}

/// `(f, f', f'')` of the rational solution at `x`, in any backend.
pub fn polynomial_value<T: Scalar>(l: u32, x: &T) -> (T, T, T) {
    let mut f = T::zero();
    let mut fp = T::zero();
    let mut fpp = T::zero();
    for (i, c) in polynomial_solution(l).iter().enumerate() {
        let c = rational_into::<T>(c);
        let p = i as i64 - l as i64;
        f = f + c.clone() * signed_pow(x, p);
        fp = fp + c.clone() * T::from_i64(p) * signed_pow(x, p - 1);
        fpp = fpp + c * T::from_i64(p * (p - 1)) * signed_pow(x, p - 2);
    }
    (f, fp, fpp)
}

fn rational_into<T: Scalar>(r: &BigRational) -> T {
    // numerator and denominator of these coefficients fit comfortably in i64
    use num_traits::ToPrimitive;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => T::from_i64(n) / T::from_i64(d),
        _ => T::from_f64(crate::arith::rational_to_f64(r)),
    }
}

fn factorial(k: i64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

/// Outer constant `-(-1)^l (1+2l)! / (l!)^2` and inner weights
/// `(-1)^i (l+i)! / ((i!)^2 (l-i)!)` of the logarithmic solution.
fn log_solution_weights(l: u32) -> (BigRational, Vec<BigRational>) {
    let l = l as i64;
    let sign = if l % 2 == 0 { -1 } else { 1 };
    let outer = BigRational::new(BigInt::from(sign) * factorial(1 + 2 * l), factorial(l) * factorial(l));
    let inner = (0..=l)
        .map(|i| {
            let s = if i % 2 == 0 { 1 } else { -1 };
            BigRational::new(BigInt::from(s) * factorial(l + i), factorial(i) * factorial(i) * factorial(l - i))
        })
        .collect();
    (outer, inner)
}

/// `log(1-x) + sum_(j<=order) x^j / j` and its first two derivatives,
/// evaluated without cancellation for small `x`.
fn log_remainder(order: u32, x: f64) -> (f64, f64, f64) {
    let mf = order as f64;
    let value = if x <= 0.75 {
        // -sum_(j>order) x^j / j, all terms of one sign
        let mut term_power = x.powi(order as i32 + 1);
        let mut sum = 0.0;
        let mut j = order as f64 + 1.0;
        loop {
            let t = term_power / j;
            sum += t;
            if t <= 1e-18 * sum || j > 1e5 {
                break;
            }
            term_power *= x;
            j += 1.0;
        }
        -sum
    } else {
        let partial: f64 = (1..=order).map(|j| x.powi(j as i32) / j as f64).sum();
        (-x).ln_1p() + partial
    };
    let one_minus = 1.0 - x;
    let d1 = -x.powi(order as i32) / one_minus;
    let d2 = if order == 0 {
        -1.0 / (one_minus * one_minus)
    } else {
        -x.powi(order as i32 - 1) * (mf - (mf - 1.0) * x) / (one_minus * one_minus)
    };
    (value, d1, d2)
}

/// `(f, f', f'')` of the `n = 3` logarithmic solution.
pub fn log_solution_derivatives(l: u32, x: f64) -> Result<(f64, f64, f64)> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain { x, what: "log_solution (0 < x < 1)" });
    }
    let (outer, inner) = log_solution_weights(l);
    let outer = crate::arith::rational_to_f64(&outer);
    let (mut f, mut fp, mut fpp) = (0.0, 0.0, 0.0);
    for (i, w) in inner.iter().enumerate() {
        let w = crate::arith::rational_to_f64(w);
        let i_f = i as f64;
        let (t, t1, t2) = log_remainder(l + i as u32, x);
        let xi = x.powi(-(i as i32));
        f += w * xi * t;
        fp += w * (-i_f * xi / x * t + xi * t1);
        fpp += w * (i_f * (i_f + 1.0) * xi / (x * x) * t - 2.0 * i_f * xi / x * t1 + xi * t2);
    }
    Ok((outer * f, outer * fp, outer * fpp))
}

pub fn log_solution(l: u32, x: f64) -> Result<f64> {
    Ok(log_solution_derivatives(l, x)?.0)
}

/// Taylor coefficients of the logarithmic solution read off its closed
/// form: the coefficient of `x^k` is `-K sum_i w_i / (k + i)` for `k > l`
/// and zero below. Returned as a series with leading power `x^(l+1)`.
pub fn log_solution_series(l: u32, terms: usize) -> FrobeniusSeries<BigRational> {
    let (outer, inner) = log_solution_weights(l);
    let coefficients = (0..terms)
        .map(|t| {
            let k = (l as usize + 1 + t) as i64;
            let s = inner
                .iter()
                .enumerate()
                .fold(BigRational::zero(), |acc, (i, w)| acc + w / rational(k + i as i64, 1));
            -(&outer * s)
        })
        .collect();
    let spec = HypersphereSpec { n: 3, l };
    FrobeniusSeries {
        e: rational(l as i64 + 1, 1),
        m: 1,
        coefficients,
        case: CaseTag::Case2,
        params: spec.params(),
        modes: spec.modes(),
        terminates: false,
    }
}

/// `6(-2 + (1 - 2/x) log(1-x))`: the `l = 1`, `n = 3` plus-branch series
/// summed in closed form.
pub fn l1_closed_form(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain { x, what: "l1_closed_form (0 < x < 1)" });
    }
    Ok(6.0 * (-2.0 + (1.0 - 2.0 / x) * (-x).ln_1p()))
}

/// Partial sum `6 sum_(i<terms) (1+i) x^(2+i) / ((2+i)(3+i))`.
pub fn l1_partial_sum(x: f64, terms: usize) -> f64 {
    (0..terms)
        .map(|i| {
            let i = i as f64;
            6.0 * (1.0 + i) * x.powf(2.0 + i) / ((2.0 + i) * (3.0 + i))
        })
        .sum()
}

/// Static mode `sum_(i<=l) prod_(j<=i) (1-j+l)^2/(-1+j-2l) t^(l-i) / i!`
/// with `t = r / rho`.
pub fn stability_mode(l: u32, t: f64) -> f64 {
    stability_mode_derivatives(l, t).0
}

/// `(S, dS/dt, d^2S/dt^2)`.
pub fn stability_mode_derivatives(l: u32, t: f64) -> (f64, f64, f64) {
    let (mut s, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for (i, c) in polynomial_solution(l).iter().enumerate() {
        let c = crate::arith::rational_to_f64(c);
        let p = l as i32 - i as i32;
        let pf = p as f64;
        s += c * t.powi(p);
        if p >= 1 {
            d1 += c * pf * t.powi(p - 1);
        }
        if p >= 2 {
            d2 += c * pf * (pf - 1.0) * t.powi(p - 2);
        }
    }
    (s, d1, d2)
}
