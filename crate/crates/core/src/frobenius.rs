//! Frobenius series `x^e * sum a_i x^(i m)` about the singular point at
//! infinity (`x = 0`).
//!
//! Two recurrences are available:
//!
//! * the separated three-term relations, one per case, which step in
//!   multiples of the stride `m` ([`build_series`]);
//! * the full five-term relation on absolute power offsets, the coefficient
//!   of `x^(e+j)` for every integer `j` ([`build_master_series`]).
//!
//! The separated relations are a restriction of the full one. Whether the
//! restriction is exact for a given parameter set is decided by
//! [`strided_consistency`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::Scalar;
use crate::error::{Error, Result};
use crate::params::{CaseTag, ModeParams, SpacetimeParams};
use crate::radial_ode::kappas;

/// Default number of stride steps kept in a series.
pub const DEFAULT_TERMS: usize = 64;

/// How the bracket factors of the separated recurrence are indexed.
///
/// The relation is written with factors in `(e + i)` while the series steps
/// in powers `x^(e + i m)`. `Resolved` evaluates the factors at `e + i m`;
/// `Literal` keeps `e + i` and exists to show that it does not reproduce the
/// hypersphere closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    #[default]
    Resolved,
    Literal,
}

pub fn stride(case: CaseTag, n: u32) -> u32 {
    match case {
        CaseTag::Case1 => n,
        CaseTag::Case2 => n - 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusSeries<T> {
    pub e: T,
    /// Powers advance in steps of `m`.
    pub m: u32,
    /// `coefficients[i]` multiplies `x^(e + i m)`.
    pub coefficients: Vec<T>,
    pub case: CaseTag,
    pub params: SpacetimeParams,
    pub modes: ModeParams,
    /// All coefficients beyond the stored ones are known to vanish.
    pub terminates: bool,
}

impl<T: Scalar> FrobeniusSeries<T> {
    /// Coefficient of `x^(e + j)`; `None` when it lies beyond the truncation
    /// of a non-terminating series.
    pub fn coefficient_at_offset(&self, j: i64) -> Option<T> {
        if j < 0 || j % self.m as i64 != 0 {
            return Some(T::zero());
        }
        let idx = (j / self.m as i64) as usize;
        match self.coefficients.get(idx) {
            Some(c) => Some(c.clone()),
            None if self.terminates => Some(T::zero()),
            None => None,
        }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn to_c64(&self) -> FrobeniusSeries<Complex64> {
        FrobeniusSeries {
            e: self.e.to_c64(),
            m: self.m,
            coefficients: self.coefficients.iter().map(Scalar::to_c64).collect(),
            case: self.case,
            params: self.params,
            modes: self.modes,
            terminates: self.terminates,
        }
    }

    /// Value (`order = 0`) or term-wise derivative (`order = 1, 2`) at `x`.
    pub fn eval(&self, x: f64, order: u8) -> Result<Evaluation> {
        eval_series(self, x, order)
    }

    /// Real parts of `(f, f', f'')` at `x`.
    pub fn eval_real(&self, x: f64) -> Result<(f64, f64, f64)> {
        Ok((self.eval(x, 0)?.value.re, self.eval(x, 1)?.value.re, self.eval(x, 2)?.value.re))
    }
}

/// Left-hand factor and the two right-hand brackets of the separated
/// relation `L(i) a_i = B1(i) a_(i+1) + B2(i) a_(i+2)`, each with the
/// magnitude of its parts for zero tests.
struct TwoStep<T> {
    lhs: T,
    b1: T,
    b2: T,
    b2_size: f64,
}

fn two_step<T: Scalar>(
    p: &SpacetimeParams,
    modes: &ModeParams,
    case: CaseTag,
    e: &T,
    i: i64,
    indexing: Indexing,
) -> TwoStep<T> {
    let n = p.n as i64;
    let m = stride(case, p.n) as i64;
    let shift = match indexing {
        Indexing::Resolved => i * m,
        Indexing::Literal => i,
    };
    let s0 = e.clone() + T::from_i64(shift);
    let lhs = s0.clone() * s0.clone();
    let (kh, kg) = kappas::<T>(p);
    let two = T::from_i64(2);
    match case {
        CaseTag::Case1 => {
            let rho2 = T::from_f64(p.rho * p.rho);
            let lambda = T::from_f64(modes.lambda);
            let nn = T::from_i64(n);
            let s1 = s0.clone() + nn.clone();
            let s2 = s0 + nn.clone() + nn.clone();
            let g1 = kg.clone() * s1.clone() * (two * s1 - nn.clone());
            let b1 = rho2.clone() * (lambda.clone() - g1);
            let g2 = kg.clone() * s2.clone() * (s2 - nn);
            let pref = rho2.clone() * rho2 * kg;
            let b2_size = pref.magnitude() * (lambda.magnitude() + g2.magnitude());
            let b2 = pref * (lambda - g2);
            TwoStep { lhs, b1, b2, b2_size }
        }
        CaseTag::Case2 => {
            let mu = T::from_f64(modes.mu);
            let mm = T::from_i64(m);
            let s1 = s0.clone() + mm.clone();
            let s2 = s0 + mm.clone() + mm.clone();
            let b1 = kh.clone() * s1.clone() * (two * s1 - mm.clone()) - mu.clone();
            let h2 = kh.clone() * s2.clone() * (s2 - mm);
            let b2_size = kh.magnitude() * (mu.magnitude() + h2.magnitude());
            let b2 = kh * (mu - h2);
            TwoStep { lhs, b1, b2, b2_size }
        }
    }
}

/// `(L(i), B1(i), B2(i))` of the separated relation with resolved indexing.
pub fn two_step_brackets<T: Scalar>(
    p: &SpacetimeParams,
    modes: &ModeParams,
    case: CaseTag,
    e: &T,
    i: i64,
) -> (T, T, T) {
    let step = two_step(p, modes, case, e, i, Indexing::Resolved);
    (step.lhs, step.b1, step.b2)
}

/// Builds `a_0 = 1, a_1, ..., a_(terms-1)` from the separated relation of
/// `case`, solving each step for the highest-index coefficient.
///
/// With `Indexing::Resolved`, `e` must be a root of the indicial equation;
/// the literal indexing is not consistent at lowest order and skips that
/// check.
pub fn build_series<T: Scalar>(
    p: &SpacetimeParams,
    modes: &ModeParams,
    case: CaseTag,
    e: T,
    terms: usize,
    indexing: Indexing,
) -> Result<FrobeniusSeries<T>> {
    if terms < 2 {
        return Err(Error::InvalidParameter { name: "terms", reason: format!("{terms} < 2") });
    }
    if indexing == Indexing::Resolved {
        let root = two_step(p, modes, case, &e, -2, indexing);
        if !root.b2.is_negligible(root.b2_size) {
            return Err(Error::NotIndicialRoot { exponent: e.describe(), residual: root.b2.magnitude() });
        }
    }
    let mut a: Vec<T> = Vec::with_capacity(terms);
    a.push(T::one());
    for k in 1..terms {
        let step = two_step(p, modes, case, &e, k as i64 - 2, indexing);
        let prev2 = if k >= 2 { a[k - 2].clone() } else { T::zero() };
        let prev1 = a[k - 1].clone();
        let left = step.lhs * prev2;
        let right = step.b1 * prev1;
        let scale = left.magnitude() + right.magnitude();
        let num = left - right;
        let next = if step.b2.is_negligible(step.b2_size) {
            if scale == 0.0 || num.is_negligible(scale) {
                T::zero()
            } else {
                return Err(Error::Resonance { index: k });
            }
        } else {
            num / step.b2
        };
        if !next.is_finite_value() {
            return Err(Error::Overflow { index: k });
        }
        a.push(next);
    }
    Ok(FrobeniusSeries {
        e,
        m: stride(case, p.n),
        coefficients: a,
        case,
        params: *p,
        modes: *modes,
        terminates: false,
    })
}

/// One right-hand term of the five-term relation at an absolute offset.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterTerm<T> {
    pub label: &'static str,
    /// The term multiplies the coefficient at `i + offset`.
    pub offset: i64,
    pub bracket: T,
    /// Sum of magnitudes of the bracket's parts.
    pub size: f64,
}

impl<T: Scalar> MasterTerm<T> {
    pub fn vanishes(&self) -> bool {
        self.bracket.is_negligible(self.size)
    }
}

/// The five right-hand terms of
/// `(e+i)^2 c_i = sum_k bracket_k(e+i) c_(i+offset_k)`.
pub fn master_terms<T: Scalar>(p: &SpacetimeParams, modes: &ModeParams, e: &T, i_abs: i64) -> [MasterTerm<T>; 5] {
    let n = p.n as i64;
    let (kh, kg) = kappas::<T>(p);
    let rho2 = T::from_f64(p.rho * p.rho);
    let lambda = T::from_f64(modes.lambda);
    let mu = T::from_f64(modes.mu);
    let nu = T::from_f64(modes.nu);
    let s = e.clone() + T::from_i64(i_abs);
    let k = |v: i64| T::from_i64(v);
    let two = k(2);

    let g1 = kg.clone() * (s.clone() + k(n)) * (two.clone() * s.clone() + k(n));
    let t1 = MasterTerm {
        label: "lambda_n",
        offset: n,
        size: rho2.magnitude() * (lambda.magnitude() + g1.magnitude()),
        bracket: rho2.clone() * (lambda.clone() - g1),
    };

    let g2 = kg.clone() * (s.clone() + k(n)) * (s.clone() + k(2 * n));
    let pref2 = rho2.clone() * rho2.clone() * kg.clone();
    let t2 = MasterTerm {
        label: "lambda_2n",
        offset: 2 * n,
        size: pref2.magnitude() * (lambda.magnitude() + g2.magnitude()),
        bracket: pref2 * (lambda.clone() - g2),
    };

    let h1 = kh.clone() * (s.clone() + k(n - 2)) * (two.clone() * s.clone() + k(n - 2));
    let t3 = MasterTerm {
        label: "mu_n-2",
        offset: n - 2,
        size: mu.magnitude() + h1.magnitude(),
        bracket: -(mu.clone() - h1),
    };

    let h2 = kh.clone() * (s.clone() + k(n - 2)) * (s.clone() + k(2 * (n - 2)));
    let t4 = MasterTerm {
        label: "mu_2(n-2)",
        offset: 2 * (n - 2),
        size: kh.magnitude() * (mu.magnitude() + h2.magnitude()),
        bracket: kh.clone() * (mu.clone() - h2),
    };

    let (bracket5, size5) = mixed_bracket(&kh, &kg, &rho2, &lambda, &mu, &nu, &s, n);
    let t5 = MasterTerm { label: "mixed_2(n-1)", offset: 2 * (n - 1), bracket: bracket5, size: size5 };

    [t1, t2, t3, t4, t5]
}

#[allow(clippy::too_many_arguments)]
fn mixed_bracket<T: Scalar>(kh: &T, kg: &T, rho2: &T, lambda: &T, mu: &T, nu: &T, s: &T, n: i64) -> (T, f64) {
    let a = mu.clone() * kg.clone();
    let b = lambda.clone() * kh.clone();
    let c = T::from_i64(2)
        * (s.clone() + T::from_i64(n - 1))
        * (s.clone() + T::from_i64(2 * (n - 1)))
        * kg.clone()
        * kh.clone();
    let size = rho2.magnitude() * (nu.magnitude() + a.magnitude() + b.magnitude() + c.magnitude());
    (rho2.clone() * (nu.clone() - a - b + c), size)
}

/// Coefficient of `c_(i + 2(n-1))` in the five-term relation.
pub fn mixed_term<T: Scalar>(p: &SpacetimeParams, modes: &ModeParams, e: &T, i_abs: i64) -> T {
    let (kh, kg) = kappas::<T>(p);
    let rho2 = T::from_f64(p.rho * p.rho);
    let s = e.clone() + T::from_i64(i_abs);
    mixed_bracket(
        &kh,
        &kg,
        &rho2,
        &T::from_f64(modes.lambda),
        &T::from_f64(modes.mu),
        &T::from_f64(modes.nu),
        &s,
        p.n as i64,
    )
    .0
}

/// Five-term relation residual at absolute offset `i_abs`; `None` when a
/// coefficient it needs lies beyond the truncation.
pub fn master_relation_residual<T: Scalar>(series: &FrobeniusSeries<T>, i_abs: i64) -> Option<T> {
    let terms = master_terms(&series.params, &series.modes, &series.e, i_abs);
    let s = series.e.clone() + T::from_i64(i_abs);
    let mut residual = s.clone() * s * series.coefficient_at_offset(i_abs)?;
    for t in terms {
        if t.bracket.is_zero() {
            continue;
        }
        residual = residual - t.bracket * series.coefficient_at_offset(i_abs + t.offset)?;
    }
    Some(residual)
}

/// Offsets at which [`master_relation_residual`] is fully determined.
pub fn checkable_offsets<T: Scalar>(series: &FrobeniusSeries<T>) -> Vec<i64> {
    let n = series.params.n as i64;
    let last = if series.terminates {
        (series.len() as i64 - 1) * series.m as i64
    } else {
        (series.len() as i64 - 1) * series.m as i64 - 2 * n
    };
    (-2 * n..=last).filter(|&i| master_relation_residual(series, i).is_some()).collect()
}

/// Solves the five-term relation on absolute offsets for the coefficient
/// with the largest offset carrying a non-vanishing bracket. Returns a
/// stride-1 series, `coefficients[j]` multiplying `x^(e+j)`.
pub fn build_master_series<T: Scalar>(
    p: &SpacetimeParams,
    modes: &ModeParams,
    case: CaseTag,
    e: T,
    len: usize,
) -> Result<FrobeniusSeries<T>> {
    if len < 2 {
        return Err(Error::InvalidParameter { name: "len", reason: format!("{len} < 2") });
    }
    let n = p.n as i64;
    let lead_offset = match case {
        CaseTag::Case1 => 2 * n,
        CaseTag::Case2 => 2 * (n - 2),
    };
    let mut c: Vec<T> = Vec::with_capacity(len);
    for k in 0..len as i64 {
        let i = k - lead_offset;
        let terms = master_terms(p, modes, &e, i);
        let s = e.clone() + T::from_i64(i);
        let at = |j: i64, c: &Vec<T>| if j < 0 { T::zero() } else { c[j as usize].clone() };
        let mut lead = T::zero();
        let mut lead_size = 0.0;
        let lhs = s.clone() * s * at(i, &c);
        let mut scale = lhs.magnitude();
        let mut num = lhs;
        for t in &terms {
            if t.offset > lead_offset {
                if !t.vanishes() {
                    return Err(Error::Unclassifiable(format!(
                        "term {} above the leading offset does not vanish: the singular point is irregular",
                        t.label
                    )));
                }
            } else if t.offset == lead_offset {
                lead = lead + t.bracket.clone();
                lead_size += t.size;
            } else {
                let v = t.bracket.clone() * at(i + t.offset, &c);
                scale += v.magnitude();
                num = num - v;
            }
        }
        let next = if lead.is_negligible(lead_size) {
            if k == 0 {
                T::one()
            } else if scale == 0.0 || num.is_negligible(scale) {
                T::zero()
            } else {
                return Err(Error::Resonance { index: k as usize });
            }
        } else if k == 0 {
            return Err(Error::NotIndicialRoot { exponent: e.describe(), residual: lead.magnitude() });
        } else {
            num / lead
        };
        if !next.is_finite_value() {
            return Err(Error::Overflow { index: k as usize });
        }
        c.push(next);
    }
    Ok(FrobeniusSeries { e, m: 1, coefficients: c, case, params: *p, modes: *modes, terminates: false })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Offense {
    pub offset: i64,
    pub term: &'static str,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<T> {
    pub series: FrobeniusSeries<T>,
    pub offenses: Vec<Offense>,
    pub checked_offsets: usize,
    pub max_residual: f64,
}

impl<T> ConsistencyReport<T> {
    /// The separated recurrence reproduces the five-term relation exactly.
    pub fn is_exact(&self) -> bool {
        self.offenses.is_empty()
    }
}

fn separated_terms(case: CaseTag) -> [&'static str; 2] {
    match case {
        CaseTag::Case1 => ["lambda_n", "lambda_2n"],
        CaseTag::Case2 => ["mu_n-2", "mu_2(n-2)"],
    }
}

/// Builds the separated series and lists every term of the five-term
/// relation that the separation drops while it still acts on a nonzero
/// coefficient, plus every offset where the relation is not satisfied.
pub fn strided_consistency<T: Scalar>(
    p: &SpacetimeParams,
    modes: &ModeParams,
    case: CaseTag,
    e: T,
    terms: usize,
    indexing: Indexing,
) -> Result<ConsistencyReport<T>> {
    let series = build_series(p, modes, case, e, terms, indexing)?;
    Ok(audit_series(series))
}

/// Audit of an existing series against the five-term relation.
pub fn audit_series<T: Scalar>(series: FrobeniusSeries<T>) -> ConsistencyReport<T> {
    let kept = separated_terms(series.case);
    let mut offenses = Vec::new();
    let mut max_residual: f64 = 0.0;
    let offsets = checkable_offsets(&series);
    for &i in &offsets {
        let terms = master_terms(&series.params, &series.modes, &series.e, i);
        let s = series.e.clone() + T::from_i64(i);
        let lhs = s.clone() * s * series.coefficient_at_offset(i).unwrap_or_else(T::zero);
        let mut scale = lhs.magnitude();
        for t in &terms {
            let Some(c) = series.coefficient_at_offset(i + t.offset) else { continue };
            let contribution = (t.bracket.clone() * c.clone()).magnitude();
            scale += t.size * c.magnitude();
            if !kept.contains(&t.label) && !c.is_zero() && !t.vanishes() {
                offenses.push(Offense { offset: i, term: t.label, magnitude: contribution });
            }
        }
        if let Some(r) = master_relation_residual(&series, i) {
            max_residual = max_residual.max(r.magnitude());
            if scale > 0.0 && !r.is_negligible(scale) {
                offenses.push(Offense { offset: i, term: "residual", magnitude: r.magnitude() });
            }
        }
    }
    ConsistencyReport { series, offenses, checked_offsets: offsets.len(), max_residual }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: Complex64,
    /// Geometric estimate of the truncated remainder.
    pub tail: f64,
}

pub fn eval_series<T: Scalar>(series: &FrobeniusSeries<T>, x: f64, order: u8) -> Result<Evaluation> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain { x, what: "series evaluation (0 < x < 1)" });
    }
    if order > 2 {
        return Err(Error::InvalidParameter { name: "derivative_order", reason: format!("{order} > 2") });
    }
    let e = series.e.to_c64();
    let ln_x = x.ln();
    let terms: Vec<Complex64> = series
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let power = e + (i as f64) * series.m as f64;
            let factor = match order {
                0 => Complex64::new(1.0, 0.0),
                1 => power,
                _ => power * (power - 1.0),
            };
            let a = a.to_c64();
            if a == Complex64::new(0.0, 0.0) {
                return a;
            }
            a * factor * ((power - order as f64) * ln_x).exp()
        })
        .collect();
    let value: Complex64 = terms.iter().sum();
    let tail = tail_estimate(&terms, series.terminates, x)?;
    Ok(Evaluation { value, tail })
}

fn tail_estimate(terms: &[Complex64], terminates: bool, x: f64) -> Result<f64> {
    let n = terms.len();
    if terminates || n < 2 {
        return Ok(0.0);
    }
    let last = terms[n - 1].norm();
    let prev = terms[n - 2].norm();
    if last == 0.0 && prev == 0.0 {
        // two consecutive zeros end a three-term recurrence
        return Ok(0.0);
    }
    if prev == 0.0 {
        return Ok(last);
    }
    let ratio = last / prev;
    if ratio >= 1.0 {
        return Err(Error::Divergence { x, ratio });
    }
    Ok(last / (1.0 - ratio))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use num_rational::BigRational;

    fn hypersphere(n: u32, l: u32) -> (SpacetimeParams, ModeParams) {
        (SpacetimeParams::schwarzschild(n, 1.0).unwrap(), ModeParams::angular((l * (l + n - 2)) as f64))
    }

    #[test]
    fn strides() {
        assert_eq!(stride(CaseTag::Case1, 4), 4);
        assert_eq!(stride(CaseTag::Case2, 4), 2);
        assert_eq!(stride(CaseTag::Case2, 3), 1);
    }

    #[test]
    fn n4_l0_plus_series_is_harmonic() {
        let (p, m) = hypersphere(4, 0);
        let s = build_series::<BigRational>(&p, &m, CaseTag::Case2, rational(2, 1), 31, Indexing::Resolved).unwrap();
        for (i, a) in s.coefficients.iter().enumerate() {
            assert_eq!(*a, rational(1, i as i64 + 1));
        }
    }

    #[test]
    fn literal_indexing_deviates_at_first_step() {
        let (p, m) = hypersphere(4, 0);
        let s = build_series::<BigRational>(&p, &m, CaseTag::Case2, rational(2, 1), 4, Indexing::Literal).unwrap();
        assert_eq!(s.coefficients[1], rational(4, 5));
        assert_ne!(s.coefficients[1], rational(1, 2));
    }

    #[test]
    fn n3_l1_minus_series_terminates() {
        let (p, m) = hypersphere(3, 1);
        let s = build_series::<f64>(&p, &m, CaseTag::Case2, -1.0, 20, Indexing::Resolved).unwrap();
        assert_eq!(s.coefficients[0], 1.0);
        assert_eq!(s.coefficients[1], -0.5);
        assert!(s.coefficients[2..].iter().all(|&a| a == 0.0));
        let v = s.eval(0.3, 0).unwrap();
        assert!((v.value.re - (1.0 / 0.3 - 0.5)).abs() < 1e-12);
        assert_eq!(v.tail, 0.0);
    }

    #[test]
    fn constant_solution() {
        let (p, m) = hypersphere(3, 0);
        let s = build_series::<f64>(&p, &m, CaseTag::Case2, 0.0, 10, Indexing::Resolved).unwrap();
        assert_eq!(s.coefficients, {
            let mut v = vec![0.0; 10];
            v[0] = 1.0;
            v
        });
    }

    #[test]
    fn rejects_non_roots_and_flags_resonance() {
        let (p, m) = hypersphere(4, 0);
        assert!(matches!(
            build_series::<f64>(&p, &m, CaseTag::Case2, 1.0, 8, Indexing::Resolved),
            Err(Error::NotIndicialRoot { .. })
        ));
        // n = 4, l = 1: exponents -1 and 3 differ by 2 m; the minus branch is logarithmic.
        let (p, m) = hypersphere(4, 1);
        assert_eq!(
            build_series::<f64>(&p, &m, CaseTag::Case2, -1.0, 8, Indexing::Resolved),
            Err(Error::Resonance { index: 2 })
        );
    }

    #[test]
    fn mixed_term_vanishes_in_case2() {
        let p = SpacetimeParams::new(5, 1.0, 0.0, 6.0).unwrap();
        // lambda R_h = (n-2)(n-1) nu
        let m = ModeParams::new(2.0, 1.7, 1.0).unwrap();
        for i in 0..10 {
            assert_eq!(mixed_term::<BigRational>(&p, &m, &rational(3, 2), i), rational(0, 1));
        }
        let p0 = SpacetimeParams::new(5, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(mixed_term::<f64>(&p0, &ModeParams::angular(3.0), &0.5, 3), 0.0);
        let p1 = SpacetimeParams::new(4, 1.0, 20.0, 6.0).unwrap();
        let m1 = ModeParams::new(1.0, 1.0, 0.0).unwrap();
        assert!(mixed_term::<f64>(&p1, &m1, &(2.0 + 5f64.sqrt()), 0).abs() > 1.0);
    }

    #[test]
    fn master_relation_closes_on_built_series() {
        let (p, m) = hypersphere(4, 0);
        let s = build_series::<BigRational>(&p, &m, CaseTag::Case2, rational(2, 1), 20, Indexing::Resolved).unwrap();
        let offsets = checkable_offsets(&s);
        assert!(offsets.len() > 20);
        for i in offsets {
            assert_eq!(master_relation_residual(&s, i), Some(rational(0, 1)), "offset {i}");
        }
        let zero = FrobeniusSeries { coefficients: vec![rational(0, 1); 5], terminates: true, ..s };
        assert_eq!(master_relation_residual(&zero, 3), Some(rational(0, 1)));
    }

    #[test]
    fn separation_audit() {
        for l in 0..4 {
            let (p, m) = hypersphere(3, l);
            let r = strided_consistency::<BigRational>(&p, &m, CaseTag::Case2, rational(1 + l as i64, 1), 16, Indexing::Resolved)
                .unwrap();
            assert!(r.is_exact(), "{:?}", r.offenses);
        }
        let p = SpacetimeParams::schwarzschild(5, 1.0).unwrap();
        let m = ModeParams::angular(2.5);
        let d = crate::radial_ode::indicial_exponents(&p, &m, CaseTag::Case2).unwrap();
        let r = strided_consistency::<f64>(&p, &m, CaseTag::Case2, d.e_plus.re, 16, Indexing::Resolved).unwrap();
        assert!(r.is_exact(), "{:?}", r.offenses);

        // Case 1 with an angular eigenvalue: the stride-n ansatz drops live terms.
        let p = SpacetimeParams::new(4, 1.0, 20.0, 6.0).unwrap();
        let m = ModeParams::new(1.0, 1.0, 0.0).unwrap();
        let d = crate::radial_ode::indicial_exponents(&p, &m, CaseTag::Case1).unwrap();
        let r = strided_consistency::<f64>(&p, &m, CaseTag::Case1, d.e_plus.re, 12, Indexing::Resolved).unwrap();
        assert!(!r.is_exact());
        assert!(r.offenses.iter().any(|o| o.term == "mu_n-2"));
    }

    #[test]
    fn literal_indexing_fails_the_audit() {
        let (p, m) = hypersphere(4, 0);
        let r = strided_consistency::<BigRational>(&p, &m, CaseTag::Case2, rational(2, 1), 12, Indexing::Literal).unwrap();
        assert!(r.offenses.iter().any(|o| o.term == "residual"));
    }

    #[test]
    fn master_series_matches_separated_series_when_exact() {
        let (p, m) = hypersphere(5, 2);
        let strided = build_series::<BigRational>(&p, &m, CaseTag::Case2, rational(5, 1), 8, Indexing::Resolved).unwrap();
        let master = build_master_series::<BigRational>(&p, &m, CaseTag::Case2, rational(5, 1), 22).unwrap();
        for (j, c) in master.coefficients.iter().enumerate() {
            assert_eq!(Some(c.clone()), strided.coefficient_at_offset(j as i64), "offset {j}");
        }
    }

    #[test]
    fn master_series_rejects_irregular_points() {
        let p = SpacetimeParams::new(5, 1.0, 0.0, 12.0).unwrap();
        let m = ModeParams::new(1.0, 0.0, 3.0).unwrap();
        assert!(matches!(build_master_series::<f64>(&p, &m, CaseTag::Case2, 0.0, 8), Err(Error::Unclassifiable(_))));
    }

    #[test]
    fn eval_domain_and_divergence() {
        let (p, m) = hypersphere(4, 0);
        let s = build_series::<f64>(&p, &m, CaseTag::Case2, 2.0, 64, Indexing::Resolved).unwrap();
        assert!(s.eval(0.0, 0).is_err());
        assert!(s.eval(1.0, 0).is_err());
        assert!(s.eval(0.5, 3).is_err());
        // -log(1 - x^2)
        let v = s.eval(0.5, 0).unwrap();
        assert!((v.value.re + (-0.25f64).ln_1p()).abs() < 1e-15);
        assert!(v.tail < 1e-30);
        let v = s.eval(1e-4, 0).unwrap();
        assert!(v.value.re.abs() < 1e-7);
        let growing = FrobeniusSeries { coefficients: (0..10).map(|i| 10f64.powi(i)).collect(), ..s };
        assert!(matches!(growing.eval(0.5, 0), Err(Error::Divergence { .. })));
    }

    #[test]
    fn eval_derivatives_match_finite_differences() {
        let (p, m) = hypersphere(5, 1);
        let s = build_series::<f64>(&p, &m, CaseTag::Case2, 4.0, 64, Indexing::Resolved).unwrap();
        let x = 0.4;
        let h = 1e-4;
        let f = |x: f64| s.eval(x, 0).unwrap().value.re;
        let (_, d1, d2) = s.eval_real(x).unwrap();
        assert!((d1 - (f(x + h) - f(x - h)) / (2.0 * h)).abs() < 1e-6 * d1.abs());
        assert!((d2 - (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)).abs() < 1e-4 * d2.abs());
    }
}
