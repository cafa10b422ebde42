//! Forward three-term recurrence `a_(i+2) = q a_(i+1) + b_i a_i`, its
//! path-sum coefficients and the resummed generating series.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{rational, rational_to_f64, Scalar};
use crate::error::{Error, Result};
use crate::frobenius::{build_series, two_step_brackets, Indexing};
use crate::params::{CaseTag, ModeParams, SpacetimeParams};
use crate::radial_ode::kappas;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Seed {
    /// `a_0 = 0, a_1 = 1`
    A,
    /// `a_0 = 1, a_1 = 0`
    B,
}

impl Seed {
    fn initial<T: Scalar>(self) -> (T, T) {
        match self {
            Seed::A => (T::zero(), T::one()),
            Seed::B => (T::one(), T::zero()),
        }
    }
}

/// Which index sets the path sums run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetReading {
    /// Gap-2 subsets of `{1, ..., 2i+j-1}` whose largest element is `2i+j-1`.
    Corrected,
    /// Gap-2 subsets starting at 1, as the set definition reads word for word.
    Literal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTermSpec<T> {
    pub q: T,
    pub b: Vec<T>,
    pub seed: Seed,
}

/// `n(1+n)/(rho^2 R_g)` in the first case, `(n-2)(n-1)/R_h` in the second.
pub fn appendix_q<T: Scalar>(p: &SpacetimeParams, case: CaseTag) -> Result<T> {
    let (kh, kg) = kappas::<T>(p);
    match case {
        CaseTag::Case1 => {
            if p.r_g == 0.0 {
                return Err(Error::DivisionByZero("q needs R_g != 0"));
            }
            let rho2 = T::from_f64(p.rho * p.rho);
            Ok(T::one() / (rho2 * kg))
        }
        CaseTag::Case2 => {
            if p.r_h == 0.0 {
                return Err(Error::DivisionByZero("q needs R_h != 0"));
            }
            Ok(T::one() / kh)
        }
    }
}

/// Two-step weight `b` at the raw argument `t` (the caller decides whether
/// `t` is `e+i` or `e+i m`).
pub fn appendix_b<T: Scalar>(p: &SpacetimeParams, modes: &ModeParams, case: CaseTag, t: &T) -> Result<T> {
    if t.is_zero() {
        return Err(Error::DivisionByZero("b_i at e+i = 0"));
    }
    let (kh, kg) = kappas::<T>(p);
    let (pref, coupling, k, step) = match case {
        CaseTag::Case1 => {
            let rho2 = T::from_f64(p.rho * p.rho);
            let q = appendix_q::<T>(p, case)?;
            (q / rho2, T::from_f64(modes.lambda), kg, T::from_i64(p.n as i64))
        }
        CaseTag::Case2 => (appendix_q::<T>(p, case)?, T::from_f64(modes.mu), kh, T::from_i64(p.n as i64 - 2)),
    };
    let one = T::one();
    let first = one.clone() + step.clone() / t.clone();
    let second = one + T::from_i64(2) * step / t.clone();
    let left = coupling / (t.clone() * t.clone());
    let right = k * first * second;
    let scale = left.magnitude() + right.magnitude();
    let bracket = left - right;
    if bracket.is_negligible(scale) {
        return Err(Error::DivisionByZero("b_i bracket vanishes (resonance)"));
    }
    Ok(pref / bracket)
}

/// `a_0, ..., a_n` from the seed.
pub fn iterate<T: Scalar>(spec: &ThreeTermSpec<T>, n: usize) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "N", reason: format!("{n} < 2") });
    }
    if spec.b.len() + 1 < n {
        return Err(Error::InvalidParameter {
            name: "b",
            reason: format!("{} weights cannot reach a_{n}", spec.b.len()),
        });
    }
    let (a0, a1) = spec.seed.initial::<T>();
    let q = vec![spec.q.clone(); n - 1];
    Ok(iterate_variable(a0, a1, &q, &spec.b, n))
}

/// Same recurrence with an index-dependent `q_i`; `q` and `b` need `n-1`
/// entries.
pub fn iterate_variable<T: Scalar>(a0: T, a1: T, q: &[T], b: &[T], n: usize) -> Vec<T> {
    let mut a = Vec::with_capacity(n + 1);
    a.push(a0);
    a.push(a1);
    for i in 0..n.saturating_sub(1) {
        let next = q[i].clone() * a[i + 1].clone() + b[i].clone() * a[i].clone();
        a.push(next);
    }
    a.truncate(n + 1);
    a
}

/// Index sets summed over by the path coefficient `(i, j)`.
pub fn index_sets(i: usize, j: usize, reading: SetReading) -> Vec<Vec<usize>> {
    let top = 2 * i + j - 1;
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(i);
    let first_range = match reading {
        SetReading::Corrected => 1..=top,
        SetReading::Literal => 1..=1,
    };
    for start in first_range {
        current.push(start);
        extend_sets(i, top, reading, &mut current, &mut out);
        current.pop();
    }
    out
}

fn extend_sets(i: usize, top: usize, reading: SetReading, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *current.last().expect("non-empty");
    if current.len() == i {
        if reading == SetReading::Literal || last == top {
            out.push(current.clone());
        }
        return;
    }
    for next in last + 2..=top {
        current.push(next);
        extend_sets(i, top, reading, current, out);
        current.pop();
    }
}

/// `a_(i,j)` for seed A, `b_(i,j)` (weights shifted by one) for seed B.
pub fn path_coefficient<T: Scalar>(spec: &ThreeTermSpec<T>, i: usize, j: usize, reading: SetReading) -> Result<T> {
    if i == 0 {
        return Err(Error::InvalidParameter { name: "i", reason: "path coefficients start at i = 1".into() });
    }
    let shift = match spec.seed {
        Seed::A => 0,
        Seed::B => 1,
    };
    let mut total = T::zero();
    for set in index_sets(i, j, reading) {
        let mut product = T::one();
        for k in set {
            let w = spec.b.get(k + shift).ok_or_else(|| Error::InvalidParameter {
                name: "b",
                reason: format!("weight b_{} needed", k + shift),
            })?;
            product = product * w.clone();
        }
        total = total + product;
    }
    Ok(total)
}

/// Power-series coefficients of the resummed expression through `order`.
pub fn resummed_coefficients<T: Scalar>(spec: &ThreeTermSpec<T>, order: usize, reading: SetReading) -> Result<Vec<T>> {
    // x^lead / (1 - q x) * inner(x), plus 1 for seed B
    let (lead, factor) = match spec.seed {
        Seed::A => (1, T::one()),
        Seed::B => (2, spec.b.first().cloned().ok_or(Error::InvalidParameter { name: "b", reason: "empty".into() })?),
    };
    let mut inner = vec![T::zero(); order + 1];
    inner[0] = T::one();
    let mut i = 1;
    while lead + 2 * i <= order {
        let mut j = 0;
        while lead + 2 * i + j <= order {
            let c = path_coefficient(spec, i, j, reading)?;
            inner[2 * i + j] = inner[2 * i + j].clone() + c * spec.q.powi(j as u32);
            j += 1;
        }
        i += 1;
    }
    let mut out = vec![T::zero(); order + 1];
    if spec.seed == Seed::B {
        out[0] = T::one();
    }
    for k in lead..=order {
        let mut acc = T::zero();
        for d in 0..=(k - lead) {
            acc = acc + inner[d].clone() * spec.q.powi((k - lead - d) as u32);
        }
        out[k] = out[k].clone() + factor.clone() * acc;
    }
    Ok(out)
}

/// Value of the resummed expression truncated at total degree `order`.
pub fn resummed_value(spec: &ThreeTermSpec<f64>, x: f64, order: usize, reading: SetReading) -> Result<f64> {
    if (spec.q * x).abs() >= 1.0 {
        return Err(Error::Divergence { x, ratio: (spec.q * x).abs() });
    }
    let coefficients = resummed_coefficients(spec, order, reading)?;
    Ok(coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub degree: usize,
    pub recurrence: String,
    pub resummed: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub reading: SetReading,
    pub seed: Seed,
    pub order: usize,
    pub mismatches: Vec<Mismatch>,
}

impl MismatchReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Degree-by-degree comparison of the resummed series against `iterate`.
pub fn mismatch_report<T: Scalar>(spec: &ThreeTermSpec<T>, order: usize, reading: SetReading) -> Result<MismatchReport> {
    let direct = iterate(spec, order)?;
    let resummed = resummed_coefficients(spec, order, reading)?;
    let mismatches = direct
        .iter()
        .zip(&resummed)
        .enumerate()
        .filter(|(_, (a, b))| {
            let d = (*a).clone() - (*b).clone();
            !d.is_negligible(a.magnitude() + b.magnitude())
        })
        .map(|(degree, (a, b))| Mismatch { degree, recurrence: a.describe(), resummed: b.describe() })
        .collect();
    Ok(MismatchReport { reading, seed: spec.seed, order, mismatches })
}

/// Spec with symbolic-looking weights `q = 3, b_k = k+2` that keep every
/// path sum distinguishable, used to exhibit the literal-reading failure.
pub fn witness_spec(seed: Seed, len: usize) -> ThreeTermSpec<BigRational> {
    ThreeTermSpec {
        q: rational(3, 1),
        b: (0..len as i64).map(|k| rational(k + 2, 1)).collect(),
        seed,
    }
}

pub fn random_rational_spec<R: Rng>(rng: &mut R, len: usize, seed: Seed) -> ThreeTermSpec<BigRational> {
    let draw = |rng: &mut R| rational(rng.gen_range(-9..=9), rng.gen_range(1..=9));
    let q = draw(rng);
    let b = (0..len).map(|_| draw(rng)).collect();
    ThreeTermSpec { q, b, seed }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub q: String,
    pub b: Vec<String>,
    pub report: MismatchReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub trials: usize,
    pub order: usize,
    pub passed: usize,
    pub counterexamples: Vec<Counterexample>,
    pub fibonacci_a10: String,
    pub literal_reading: MismatchReport,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.trials && self.fibonacci_a10 == "55"
    }
}

/// Randomized exact check of the generating identity for both seeds, plus
/// the Fibonacci case and the literal-reading witness.
pub fn generating_identity_suite(trials: usize, order: usize, rng_seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut passed = 0;
    let mut counterexamples = Vec::new();
    for trial in 0..trials {
        let seed = if trial % 2 == 0 { Seed::A } else { Seed::B };
        let spec = random_rational_spec(&mut rng, order + 1, seed);
        let report = mismatch_report(&spec, order, SetReading::Corrected)?;
        if report.is_clean() {
            passed += 1;
        } else {
            counterexamples.push(Counterexample {
                trial,
                q: spec.q.to_string(),
                b: spec.b.iter().map(|b| b.to_string()).collect(),
                report,
            });
        }
    }
    let fib = ThreeTermSpec { q: rational(1, 1), b: vec![rational(1, 1); 16], seed: Seed::A };
    let fibonacci_a10 = iterate(&fib, 10)?[10].to_string();
    let literal_reading = mismatch_report(&witness_spec(Seed::A, order + 1), order, SetReading::Literal)?;
    Ok(SuiteReport { trials, order, passed, counterexamples, fibonacci_a10, literal_reading })
}

/// Comparison of the constant-ratio recurrence with the series coefficients of
/// the hypersphere mode `(n, l)` on the `e = n-2+l` branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adjudication {
    pub n: u32,
    pub l: u32,
    pub terms: usize,
    /// `b_i` at argument `e + i m` equals `(e+im)^2 / B2(i)` for every `i`.
    pub b_matches_two_step: bool,
    /// Variable `q_i = -B1(i)/B2(i)` with those `b_i` reproduces the series.
    pub variable_q_reproduces: bool,
    /// First index where the constant `q` iterate departs from the series.
    pub constant_q_first_mismatch: Option<usize>,
    pub constant_q_max_relative_deviation: f64,
    /// First index where the raw argument `e + i` departs from the series.
    pub literal_argument_first_mismatch: Option<usize>,
}

pub fn adjudicate_hypersphere(n: u32, l: u32, terms: usize) -> Result<Adjudication> {
    let p = SpacetimeParams::schwarzschild(n, 1.0)?;
    let modes = ModeParams::angular((l * (l + n - 2)) as f64);
    let case = CaseTag::Case2;
    let m = (n - 2) as i64;
    let e = rational((n - 2 + l) as i64, 1);
    let series = build_series::<BigRational>(&p, &modes, case, e.clone(), terms, Indexing::Resolved)?;
    let a = &series.coefficients;
    let steps = terms - 2;
    let mut b = Vec::with_capacity(steps + 1);
    let mut q_var = Vec::with_capacity(steps + 1);
    let mut b_literal = Vec::with_capacity(steps + 1);
    let mut b_matches_two_step = true;
    for i in 0..=steps as i64 {
        let t = e.clone() + rational(i * m, 1);
        let (lhs, b1, b2) = two_step_brackets(&p, &modes, case, &e, i);
        let bi = appendix_b(&p, &modes, case, &t)?;
        b_matches_two_step &= bi == lhs / b2.clone();
        q_var.push(-b1 / b2);
        b.push(bi);
        b_literal.push(appendix_b(&p, &modes, case, &(e.clone() + rational(i, 1)))?);
    }
    let variable = iterate_variable(a[0].clone(), a[1].clone(), &q_var, &b, terms - 1);
    let variable_q_reproduces = variable == *a;
    let q = appendix_q::<BigRational>(&p, case)?;
    let constant = iterate_variable(a[0].clone(), a[1].clone(), &vec![q.clone(); steps + 1], &b, terms - 1);
    let literal = iterate_variable(a[0].clone(), a[1].clone(), &q_var, &b_literal, terms - 1);
    let first_mismatch = |other: &[BigRational]| other.iter().zip(a).position(|(x, y)| x != y);
    let constant_q_max_relative_deviation = constant
        .iter()
        .zip(a)
        .map(|(x, y)| {
            let d = rational_to_f64(&(x - y)).abs();
            d / rational_to_f64(y).abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    Ok(Adjudication {
        n,
        l,
        terms,
        b_matches_two_step,
        variable_q_reproduces,
        constant_q_first_mismatch: first_mismatch(&constant),
        constant_q_max_relative_deviation,
        literal_argument_first_mismatch: first_mismatch(&literal),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    #[test]
    fn q_values() {
        let p = SpacetimeParams::schwarzschild(4, 1.0).unwrap();
        assert_eq!(appendix_q::<BigRational>(&p, CaseTag::Case2).unwrap(), r(1, 1));
        let g = SpacetimeParams::new(4, 1.0, 20.0, 0.0).unwrap();
        assert_eq!(appendix_q::<BigRational>(&g, CaseTag::Case1).unwrap(), r(1, 1));
        let h = SpacetimeParams::new(5, 1.0, 0.0, 6.0).unwrap();
        assert_eq!(appendix_q::<BigRational>(&h, CaseTag::Case2).unwrap(), r(2, 1));
        assert!(appendix_q::<f64>(&h, CaseTag::Case1).is_err());
    }

    #[test]
    fn b_values() {
        let p = SpacetimeParams::schwarzschild(4, 1.0).unwrap();
        let modes = ModeParams::angular(0.0);
        assert_eq!(appendix_b(&p, &modes, CaseTag::Case2, &r(2, 1)).unwrap(), r(-1, 6));
        assert!(appendix_b(&p, &modes, CaseTag::Case2, &r(0, 1)).is_err());
        // large mu: b ~ (n-2)(n-1) t^2 / (R_h mu)
        let big = ModeParams::angular(1e8);
        let b = appendix_b(&p, &big, CaseTag::Case2, &3.0).unwrap();
        assert!((b * 1e8 / 9.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn b_is_ratio_of_two_step_brackets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let n = rng.gen_range(3..=7);
            let p = SpacetimeParams::new(n, rng.gen_range(0.5..2.0), rng.gen_range(0.5..5.0), rng.gen_range(0.5..5.0))
                .unwrap();
            let modes = ModeParams::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.0..10.0), 0.0).unwrap();
            let e: f64 = rng.gen_range(0.3..4.0);
            let i = rng.gen_range(0..6);
            for case in [CaseTag::Case1, CaseTag::Case2] {
                let m = crate::frobenius::stride(case, n) as f64;
                let (lhs, _, b2) = two_step_brackets(&p, &modes, case, &e, i);
                let b = appendix_b(&p, &modes, case, &(e + i as f64 * m)).unwrap();
                assert!((b - lhs / b2).abs() <= 1e-10 * b.abs().max(1.0), "{case:?}");
            }
        }
    }

    #[test]
    fn iterate_unrollings() {
        let spec = ThreeTermSpec { q: r(2, 3), b: vec![r(5, 1), r(7, 2), r(1, 3), r(4, 1)], seed: Seed::A };
        let a = iterate(&spec, 3).unwrap();
        assert_eq!(a[2], r(2, 3));
        assert_eq!(a[3], r(4, 9) + r(7, 2));
        let b_seed = ThreeTermSpec { seed: Seed::B, ..spec.clone() };
        assert_eq!(iterate(&b_seed, 2).unwrap()[2], r(5, 1));
        let q0 = ThreeTermSpec { q: r(0, 1), b: (1..=8).map(|k| r(k, 1)).collect(), seed: Seed::A };
        let a = iterate(&q0, 7).unwrap();
        assert!(a[2].is_zero() && a[4].is_zero() && a[6].is_zero());
        assert_eq!(a[7], r(2 * 4 * 6, 1));
        assert!(iterate(&spec, 1).is_err());
        assert!(iterate(&spec, 9).is_err());
    }

    #[test]
    fn fibonacci() {
        let spec = ThreeTermSpec { q: 1.0, b: vec![1.0; 12], seed: Seed::A };
        assert_eq!(iterate(&spec, 10).unwrap()[10], 55.0);
    }

    #[test]
    fn small_path_coefficients() {
        let spec = witness_spec(Seed::A, 8);
        let b = |k: i64| r(k + 2, 1);
        assert_eq!(path_coefficient(&spec, 1, 0, SetReading::Corrected).unwrap(), b(1));
        assert_eq!(path_coefficient(&spec, 1, 1, SetReading::Corrected).unwrap(), b(2));
        assert_eq!(path_coefficient(&spec, 2, 0, SetReading::Corrected).unwrap(), b(1) * b(3));
        assert_eq!(path_coefficient(&spec, 2, 1, SetReading::Corrected).unwrap(), b(1) * b(4) + b(2) * b(4));
        assert_eq!(path_coefficient(&spec, 1, 1, SetReading::Literal).unwrap(), b(1));
        assert_eq!(index_sets(3, 1, SetReading::Corrected), vec![vec![1, 3, 6], vec![1, 4, 6], vec![2, 4, 6]]);
    }

    #[test]
    fn resummed_special_cases() {
        let zero = ThreeTermSpec { q: 0.5, b: vec![0.0; 30], seed: Seed::A };
        let x = 0.4;
        let v = resummed_value(&zero, x, 24, SetReading::Corrected).unwrap();
        assert!((v - x / (1.0 - 0.5 * x)).abs() < 1e-15);
        let pure = ThreeTermSpec { q: r(0, 1), b: (0..10).map(|k| r(k + 1, 2)).collect(), seed: Seed::A };
        let c = resummed_coefficients(&pure, 9, SetReading::Corrected).unwrap();
        for i in 1..=4usize {
            assert_eq!(c[2 * i + 1], path_coefficient(&pure, i, 0, SetReading::Corrected).unwrap());
            assert!(c[2 * i].is_zero());
        }
        let far = ThreeTermSpec { q: 2.0, b: vec![1.0; 10], seed: Seed::A };
        assert!(matches!(resummed_value(&far, 0.6, 8, SetReading::Corrected), Err(Error::Divergence { .. })));
    }

    #[test]
    fn corrected_reading_matches_recurrence() {
        let report = generating_identity_suite(20, 10, 11).unwrap();
        assert!(report.all_passed(), "{:?}", report.counterexamples);
    }

    #[test]
    fn literal_reading_fails_at_first_mixed_coefficient() {
        let report = mismatch_report(&witness_spec(Seed::A, 8), 6, SetReading::Literal).unwrap();
        assert_eq!(report.mismatches.first().map(|m| m.degree), Some(4));
    }

    #[test]
    fn hypersphere_adjudication() {
        for (n, l) in [(3, 0), (3, 1), (4, 2), (5, 1)] {
            let adj = adjudicate_hypersphere(n, l, 14).unwrap();
            assert!(adj.b_matches_two_step);
            assert!(adj.variable_q_reproduces);
            assert!(adj.constant_q_first_mismatch.is_some(), "{adj:?}");
        }
    }
}
