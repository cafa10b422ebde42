//! Independent check on every series: adaptive Dormand-Prince 5(4)
//! integration of the radial equation in `x`, and finite-difference
//! residuals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{rational, Scalar};
use crate::error::{Error, Result};
use crate::frobenius::{eval_series, FrobeniusSeries};
use crate::params::{ModeParams, SpacetimeParams};
use crate::radial_ode::{coefficients_x, reduced_denominator, residual};

/// Distance kept from `x = 0`, `x = 1` and the zeros of `D(x)`.
pub const SAFETY_MARGIN: f64 = 1e-4;
pub const DEFAULT_TOL: f64 = 1e-11;
const MAX_STEPS: usize = 1_000_000;
const SIGN_SCAN: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvpState {
    pub x: f64,
    pub f: f64,
    pub fp: f64,
    pub tol: f64,
    /// Sum of accepted local error estimates along the way.
    #[serde(default)]
    pub error_estimate: f64,
}

impl IvpState {
    pub fn new(x: f64, f: f64, fp: f64, tol: f64) -> Self {
        IvpState { x, f, fp, tol, error_estimate: 0.0 }
    }
}

// Dormand-Prince tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

fn rhs(p: &SpacetimeParams, m: &ModeParams, x: f64, y: [f64; 2]) -> Result<[f64; 2]> {
    let c = coefficients_x(p, m, x)?;
    Ok([y[1], c.q * y[0] + c.p * y[1]])
}

/// Rejects intervals that touch `x <= 0`, `x >= 1` or a sign change of `E`.
fn check_interval(p: &SpacetimeParams, a: f64, b: f64) -> Result<()> {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    if !(lo >= SAFETY_MARGIN) {
        return Err(Error::SingularPoint { location: lo, what: "too close to x = 0" });
    }
    if !(hi <= 1.0 - SAFETY_MARGIN) {
        return Err(Error::SingularPoint { location: hi, what: "too close to x = 1" });
    }
    let lo = lo - SAFETY_MARGIN;
    let hi = hi + SAFETY_MARGIN;
    let sign_at = |x: f64| reduced_denominator::<f64>(p, &x).0.signum();
    let first = sign_at(lo);
    for k in 1..=SIGN_SCAN {
        let x = lo + (hi - lo) * k as f64 / SIGN_SCAN as f64;
        let s = sign_at(x);
        if s != first || s == 0.0 {
            return Err(Error::SingularPoint { location: x, what: "root of D(x) within the safety margin" });
        }
    }
    Ok(())
}

struct Stepper<'a> {
    p: &'a SpacetimeParams,
    m: &'a ModeParams,
    tol: f64,
    floor: f64,
    h: f64,
    steps: usize,
}

impl Stepper<'_> {
    /// Advances `state` exactly to `x_end`.
    fn advance(&mut self, state: &mut IvpState, x_end: f64) -> Result<()> {
        let dir = if x_end >= state.x { 1.0 } else { -1.0 };
        let mut y = [state.f, state.fp];
        let mut x = state.x;
        let mut k1 = rhs(self.p, self.m, x, y)?;
        while (x_end - x) * dir > 0.0 {
            if self.steps >= MAX_STEPS {
                return Err(Error::ToleranceFailure { steps: self.steps, x_end });
            }
            let remaining = (x_end - x).abs();
            let h = self.h.min(remaining) * dir;
            if self.h < 1e-14 * x.abs().max(1e-3) {
                return Err(Error::StepSizeCollapse { x });
            }
            let mut k = [[0.0; 2]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys[0] += h * A[s][j] * kj[0];
                    ys[1] += h * A[s][j] * kj[1];
                }
                k[s] = rhs(self.p, self.m, x + C[s] * h, ys)?;
            }
            let mut y5 = y;
            let mut err = [0.0; 2];
            for s in 0..7 {
                for c in 0..2 {
                    y5[c] += h * B5[s] * k[s][c];
                    err[c] += h * (B5[s] - B4[s]) * k[s][c];
                }
            }
            let mut ratio: f64 = 0.0;
            for c in 0..2 {
                let sc = self.tol * (y[c].abs().max(y5[c].abs()) + self.floor);
                ratio = ratio.max(err[c].abs() / sc);
            }
            self.steps += 1;
            if !ratio.is_finite() {
                self.h *= 0.1;
                continue;
            }
            if ratio <= 1.0 {
                x = if h.abs() == remaining { x_end } else { x + h };
                y = y5;
                k1 = k[6];
                state.error_estimate += err[0].abs().max(err[1].abs());
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            self.h = (self.h * factor).max(0.0);
        }
        state.x = x_end;
        state.f = y[0];
        state.fp = y[1];
        Ok(())
    }
}

fn stepper<'a>(p: &'a SpacetimeParams, m: &'a ModeParams, start: &IvpState, span: f64) -> Result<Stepper<'a>> {
    if !(start.tol > 0.0 && start.tol < 1.0) {
        return Err(Error::InvalidParameter { name: "tol", reason: format!("{} outside (0, 1)", start.tol) });
    }
    if !(start.f.is_finite() && start.fp.is_finite()) {
        return Err(Error::InvalidParameter { name: "state", reason: "non-finite initial data".into() });
    }
    let floor = 1e-6 * start.f.abs().max(start.fp.abs()).max(f64::MIN_POSITIVE);
    Ok(Stepper { p, m, tol: start.tol, floor, h: (span.abs() * 1e-3).max(1e-8), steps: 0 })
}

pub fn integrate(p: &SpacetimeParams, m: &ModeParams, start: IvpState, x_end: f64) -> Result<IvpState> {
    check_interval(p, start.x, x_end)?;
    let mut stepper = stepper(p, m, &start, x_end - start.x)?;
    let mut state = start;
    stepper.advance(&mut state, x_end)?;
    Ok(state)
}

/// States at every point of `xs`, which must be monotone away from
/// `start.x` (one direction only).
pub fn integrate_through(p: &SpacetimeParams, m: &ModeParams, start: IvpState, xs: &[f64]) -> Result<Vec<IvpState>> {
    let Some(&last) = xs.last() else { return Ok(Vec::new()) };
    check_interval(p, start.x, last)?;
    let mut stepper = stepper(p, m, &start, last - start.x)?;
    let mut state = start;
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        stepper.advance(&mut state, x)?;
        out.push(state);
    }
    Ok(out)
}

/// Outcome of an anchored comparison between a candidate solution and the
/// integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub anchor: f64,
    pub interval: (f64, f64),
    pub samples: usize,
    /// `max |f_oracle - f| / max |f|` over the sample grid.
    pub max_relative_deviation: f64,
    pub passed: bool,
}

fn sample_grid(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| a + (b - a) * k as f64 / (count - 1) as f64).collect()
}

/// Grid points split into the runs below (descending) and above the anchor.
fn split_grid(grid: &[f64], anchor: f64) -> (Vec<f64>, Vec<f64>) {
    let mut below: Vec<f64> = grid.iter().copied().filter(|&x| x < anchor).collect();
    below.reverse();
    let above = grid.iter().copied().filter(|&x| x >= anchor).collect();
    (below, above)
}

/// Seeds the integrator with `(f(x0), f'(x0))` from `solution` and measures
/// how far it drifts from `solution` over `interval`. Real and imaginary
/// parts are integrated separately, since the equation is real.
pub fn compare_to_function<F>(
    p: &SpacetimeParams,
    m: &ModeParams,
    solution: F,
    interval: (f64, f64),
    anchor: f64,
    tol: f64,
) -> Result<Comparison>
where
    F: Fn(f64) -> Result<(Complex64, Complex64)>,
{
    let (a, b) = interval;
    if !(a < b) || anchor < a || anchor > b {
        return Err(Error::InvalidParameter { name: "interval", reason: format!("anchor {anchor} outside [{a}, {b}]") });
    }
    check_interval(p, a, b)?;
    let grid = sample_grid(a, b, 41);
    let (below, above) = split_grid(&grid, anchor);
    let (f0, fp0) = solution(anchor)?;
    let mut oracle: Vec<(f64, Complex64)> = Vec::with_capacity(grid.len());
    for run in [&below, &above] {
        if run.is_empty() {
            continue;
        }
        let mut parts = Vec::with_capacity(2);
        for (f, fp) in [(f0.re, fp0.re), (f0.im, fp0.im)] {
            if f == 0.0 && fp == 0.0 {
                parts.push(vec![0.0; run.len()]);
                continue;
            }
            let states = integrate_through(p, m, IvpState::new(anchor, f, fp, DEFAULT_TOL), run)?;
            parts.push(states.iter().map(|s| s.f).collect());
        }
        for (k, &x) in run.iter().enumerate() {
            oracle.push((x, Complex64::new(parts[0][k], parts[1][k])));
        }
    }
    let mut max_diff: f64 = 0.0;
    let mut max_val: f64 = 0.0;
    for (x, v) in &oracle {
        let (f, _) = solution(*x)?;
        max_diff = max_diff.max((v - f).norm());
        max_val = max_val.max(f.norm());
    }
    let max_relative_deviation = if max_val == 0.0 { max_diff } else { max_diff / max_val };
    Ok(Comparison {
        anchor,
        interval,
        samples: oracle.len(),
        max_relative_deviation,
        passed: max_relative_deviation < tol,
    })
}

/// Anchored comparison of a truncated series against the integrator.
pub fn compare_to_series<T: Scalar>(
    series: &FrobeniusSeries<T>,
    interval: (f64, f64),
    anchor: f64,
    tol: f64,
) -> Result<Comparison> {
    let c64 = series.to_c64();
    let solution = |x: f64| -> Result<(Complex64, Complex64)> {
        Ok((eval_series(&c64, x, 0)?.value, eval_series(&c64, x, 1)?.value))
    };
    compare_to_function(&series.params, &series.modes, solution, interval, anchor, tol)
}

/// Central-difference residual of the equation in `x` for `func`.
pub fn fd_residual<F>(func: F, p: &SpacetimeParams, m: &ModeParams, x: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (f, fp, fpp) = central_differences(&func, x, h);
    residual(p, m, f, fp, fpp, x)
}

/// Same residual `f'' - Q f - P f'` with caller-supplied `P`, `Q`.
pub fn fd_residual_with<F>(func: F, pc: f64, q: f64, x: f64, h: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    let (f, fp, fpp) = central_differences(&func, x, h);
    fpp - q * f - pc * fp
}

fn central_differences<F: Fn(f64) -> f64>(func: &F, x: f64, h: f64) -> (f64, f64, f64) {
    let (lo, mid, hi) = (func(x - h), func(x), func(x + h));
    (mid, (hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h))
}

/// Interval, anchor and pass threshold used by the verification suite.
pub const SUITE_INTERVAL: (f64, f64) = (0.1, 0.6);
pub const SUITE_ANCHOR: f64 = 0.3;
pub const SUITE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The candidate could not be built or was rejected before comparison.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub deviation: Option<f64>,
    pub detail: String,
}

impl Verdict {
    fn from_comparison(check: String, result: Result<Comparison>) -> Self {
        match result {
            Ok(c) => Verdict {
                check,
                status: if c.passed { Status::Pass } else { Status::Fail },
                deviation: Some(c.max_relative_deviation),
                detail: format!("{} samples on [{}, {}]", c.samples, c.interval.0, c.interval.1),
            },
            Err(e) => Verdict { check, status: Status::Fail, deviation: None, detail: e.to_string() },
        }
    }

    fn skipped(check: String, detail: String) -> Self {
        Verdict { check, status: Status::Skipped, deviation: None, detail }
    }
}

fn real_pair(f: f64, fp: f64) -> (Complex64, Complex64) {
    (Complex64::new(f, 0.0), Complex64::new(fp, 0.0))
}

/// Separated series for the hypersphere mode `(n, l)` on one exponent,
/// compared against the integrator when the five-term audit accepts it.
pub fn strided_verdict(n: u32, l: u32, plus: bool, terms: usize) -> Verdict {
    use crate::closed_forms::HypersphereSpec;
    use crate::frobenius::{strided_consistency, Indexing};
    use crate::params::CaseTag;
    let branch = if plus { "plus" } else { "minus" };
    let check = format!("strided_n{n}_l{l}_{branch}");
    let spec = match HypersphereSpec::new(n, l) {
        Ok(s) => s,
        Err(e) => return Verdict::skipped(check, e.to_string()),
    };
    // hypersphere data are integers, so the recurrence runs exactly
    let e = if plus { rational((n - 2 + l) as i64, 1) } else { rational(-(l as i64), 1) };
    let report = match strided_consistency(&spec.params(), &spec.modes(), CaseTag::Case2, e, terms, Indexing::Resolved) {
        Ok(r) => r,
        Err(err) => return Verdict::skipped(check, format!("{}: {err}", err.kind())),
    };
    if !report.is_exact() {
        return Verdict::skipped(check, format!("rejected by the five-term audit ({} offenses)", report.offenses.len()));
    }
    Verdict::from_comparison(check, compare_to_series(&report.series, SUITE_INTERVAL, SUITE_ANCHOR, SUITE_TOL))
}

/// Every closed form and series family checked against the integrator.
pub fn verify_suite(terms: usize) -> Vec<Verdict> {
    use crate::closed_forms::{gamma_series, log_solution_derivatives, polynomial_value, Branch, HypersphereSpec};
    let mut out = Vec::new();
    let n3 = |l| HypersphereSpec { n: 3, l };
    for l in 0..=5u32 {
        let spec = n3(l);
        let poly = |x: f64| {
            let (f, fp, _) = polynomial_value::<f64>(l, &x);
            Ok(real_pair(f, fp))
        };
        let result = compare_to_function(&spec.params(), &spec.modes(), poly, SUITE_INTERVAL, SUITE_ANCHOR, SUITE_TOL);
        out.push(Verdict::from_comparison(format!("polynomial_l{l}"), result));
    }
    for l in 0..=5u32 {
        let spec = n3(l);
        let log = |x: f64| {
            let (f, fp, _) = log_solution_derivatives(l, x)?;
            Ok(real_pair(f, fp))
        };
        let result = compare_to_function(&spec.params(), &spec.modes(), log, SUITE_INTERVAL, SUITE_ANCHOR, SUITE_TOL);
        out.push(Verdict::from_comparison(format!("logarithmic_l{l}"), result));
    }
    for n in 4..=6u32 {
        for l in 0..=3u32 {
            let check = format!("gamma_plus_n{n}_l{l}");
            let spec = HypersphereSpec { n, l };
            match gamma_series::<f64>(&spec, Branch::Plus, terms) {
                Ok(series) => out.push(Verdict::from_comparison(
                    check,
                    compare_to_series(&series, SUITE_INTERVAL, SUITE_ANCHOR, SUITE_TOL),
                )),
                Err(e) => out.push(Verdict { check, status: Status::Fail, deviation: None, detail: e.to_string() }),
            }
        }
    }
    for n in 3..=6u32 {
        for l in 0..=3u32 {
            for plus in [false, true] {
                out.push(strided_verdict(n, l, plus, terms));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::{gamma_series, l1_closed_form, polynomial_value, Branch, HypersphereSpec};

    fn hyper(n: u32, l: u32) -> (SpacetimeParams, ModeParams) {
        let spec = HypersphereSpec::new(n, l).unwrap();
        (spec.params(), spec.modes())
    }

    #[test]
    fn constant_solution() {
        let (p, m) = hyper(3, 0);
        let end = integrate(&p, &m, IvpState::new(0.1, 1.0, 0.0, 1e-10), 0.9).unwrap();
        assert!((end.f - 1.0).abs() < 1e-12);
        assert_eq!(end.x, 0.9);
    }

    #[test]
    fn polynomial_and_log_solutions() {
        let (p, m) = hyper(3, 1);
        let start = IvpState::new(0.2, 1.0 / 0.2 - 0.5, -1.0 / 0.04, 1e-10);
        let end = integrate(&p, &m, start, 0.6).unwrap();
        assert!((end.f - (1.0 / 0.6 - 0.5)).abs() < 1e-8);
        let (p0, m0) = hyper(3, 0);
        let x0: f64 = 0.1;
        let start = IvpState::new(x0, -(-x0).ln_1p(), 1.0 / (1.0 - x0), 1e-10);
        let end = integrate(&p0, &m0, start, 0.8).unwrap();
        assert!((end.f + (-0.8f64).ln_1p()).abs() < 1e-8);
        // backwards as well
        let back = integrate(&p, &m, IvpState::new(0.6, 1.0 / 0.6 - 0.5, -1.0 / 0.36, 1e-10), 0.2).unwrap();
        assert!((back.f - 4.5).abs() < 1e-8);
    }

    #[test]
    fn tighter_tolerance_helps() {
        let (p, m) = hyper(3, 2);
        let exact = |x: f64| polynomial_value::<f64>(2, &x);
        let (f0, fp0, _) = exact(0.15);
        let err = |tol: f64| {
            let end = integrate(&p, &m, IvpState::new(0.15, f0, fp0, tol), 0.85).unwrap();
            (end.f - exact(0.85).0).abs()
        };
        let loose = err(1e-6);
        let tight = err(1e-10);
        assert!(tight < loose, "{tight} !< {loose}");
    }

    #[test]
    fn guards() {
        let (p, m) = hyper(3, 0);
        assert!(matches!(
            integrate(&p, &m, IvpState::new(0.5, 1.0, 0.0, 1e-8), 1.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(integrate(&p, &m, IvpState::new(0.00001, 1.0, 0.0, 1e-8), 0.5).is_err());
        // Case 1 with an interior zero of E
        let g = SpacetimeParams::new(4, 1.0, 20.0, 6.0).unwrap();
        let modes = ModeParams::new(1.0, 0.0, 0.0).unwrap();
        let root = (1..1000)
            .map(|k| k as f64 / 1000.0)
            .find(|&x| reduced_denominator::<f64>(&g, &x).0 < 0.0);
        if let Some(r) = root {
            assert!(integrate(&g, &modes, IvpState::new(0.01, 1.0, 0.0, 1e-8), (r + 0.05).min(0.99)).is_err());
        }
        assert!(integrate(&p, &m, IvpState::new(0.5, 1.0, 0.0, 0.0), 0.6).is_err());
    }

    #[test]
    fn series_comparison() {
        let spec = HypersphereSpec::new(4, 0).unwrap();
        let series = gamma_series::<f64>(&spec, Branch::Plus, 200).unwrap();
        let ok = compare_to_series(&series, (0.1, 0.6), 0.3, 1e-6).unwrap();
        assert!(ok.passed, "{ok:?}");
        let mut broken = series.clone();
        broken.coefficients[3] += 1e-3;
        let bad = compare_to_series(&broken, (0.1, 0.9), 0.3, 1e-4).unwrap();
        assert!(bad.max_relative_deviation > 1e-4, "{bad:?}");
        let poly = crate::closed_forms::polynomial_series(2);
        let exact = compare_to_series(&poly, (0.1, 0.9), 0.3, 1e-8).unwrap();
        assert!(exact.passed, "{exact:?}");
    }

    #[test]
    fn finite_difference_residuals() {
        let (p, m) = hyper(3, 1);
        let f = |x: f64| l1_closed_form(x).unwrap();
        let r1 = fd_residual(f, &p, &m, 0.5, 1e-3).unwrap();
        let r2 = fd_residual(f, &p, &m, 0.5, 5e-4).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
        assert_eq!(fd_residual(|_| 0.0, &p, &m, 0.5, 1e-3).unwrap(), 0.0);
        let sq = fd_residual_with(|x| x * x, 0.0, 0.0, 0.3, 1e-3);
        assert!((sq - 2.0).abs() < 1e-6);
    }

    #[test]
    fn suite_has_no_failures() {
        let verdicts = verify_suite(64);
        for v in &verdicts {
            assert_ne!(v.status, Status::Fail, "{v:?}");
        }
        let compared = verdicts.iter().filter(|v| v.status == Status::Pass).count();
        assert!(compared >= 24 + 8, "{compared}");
    }
}
