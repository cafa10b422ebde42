//! JSON form of a series:
//!
//! ```json
//! {"schema_version": 1, "e": "2", "m": 2, "case": "Case2",
//!  "params": {"n": 4, "rho": 1, "R_g": 0, "R_h": 6},
//!  "modes": {"lambda": 0, "mu": 0, "nu": 0},
//!  "arithmetic": "rational", "terminates": false,
//!  "coefficients": ["1", "1/2", "1/3"]}
//! ```
//!
//! Doubles are JSON numbers with 17 significant digits, complex values are
//! `[re, im]` pairs and rationals are `"p/q"` strings.

use num_complex::Complex64;
use num_rational::BigRational;
use serde::Deserialize;
use serde_json::{json, Number, Value};

use crate::arith::parse_rational;
use crate::error::{Error, Result};
use crate::frobenius::FrobeniusSeries;
use crate::params::{CaseTag, ModeParams, SpacetimeParams};

pub const SCHEMA_VERSION: u32 = 1;

/// A double rendered with 17 significant digits; `null` if not finite.
pub fn number17(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let text = format!("{x:.16e}");
    serde_json::from_str::<Number>(&text).map(Value::Number).unwrap_or(Value::Null)
}

pub trait DocScalar: Sized {
    const ARITHMETIC: &'static str;
    fn encode(&self) -> Value;
    fn decode(v: &Value) -> Result<Self>;
}

fn number(v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::Document(format!("expected a finite number, found {v}")))
}

impl DocScalar for f64 {
    const ARITHMETIC: &'static str = "double";
    fn encode(&self) -> Value {
        number17(*self)
    }
    fn decode(v: &Value) -> Result<Self> {
        number(v)
    }
}

impl DocScalar for Complex64 {
    const ARITHMETIC: &'static str = "complex";
    fn encode(&self) -> Value {
        Value::Array(vec![number17(self.re), number17(self.im)])
    }
    fn decode(v: &Value) -> Result<Self> {
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok(Complex64::new(number(re)?, number(im)?)),
            _ => Err(Error::Document(format!("expected [re, im], found {v}"))),
        }
    }
}

impl DocScalar for BigRational {
    const ARITHMETIC: &'static str = "rational";
    fn encode(&self) -> Value {
        Value::String(self.to_string())
    }
    fn decode(v: &Value) -> Result<Self> {
        v.as_str()
            .and_then(parse_rational)
            .ok_or_else(|| Error::Document(format!("expected a \"p/q\" string, found {v}")))
    }
}

pub fn encode_series<T: DocScalar>(series: &FrobeniusSeries<T>) -> Value {
    let p = &series.params;
    let m = &series.modes;
    json!({
        "schema_version": SCHEMA_VERSION,
        "e": series.e.encode(),
        "m": series.m,
        "case": series.case.as_str(),
        "params": {"n": p.n, "rho": number17(p.rho), "R_g": number17(p.r_g), "R_h": number17(p.r_h)},
        "modes": {"lambda": number17(m.lambda), "mu": number17(m.mu), "nu": number17(m.nu)},
        "arithmetic": T::ARITHMETIC,
        "terminates": series.terminates,
        "coefficients": series.coefficients.iter().map(DocScalar::encode).collect::<Vec<_>>(),
    })
}

/// A decoded series in whichever arithmetic the document declared.
#[derive(Debug, Clone, PartialEq)]
pub enum AnySeries {
    Double(FrobeniusSeries<f64>),
    Complex(FrobeniusSeries<Complex64>),
    Rational(FrobeniusSeries<BigRational>),
}

impl AnySeries {
    pub fn to_c64(&self) -> FrobeniusSeries<Complex64> {
        match self {
            AnySeries::Double(s) => s.to_c64(),
            AnySeries::Complex(s) => s.clone(),
            AnySeries::Rational(s) => s.to_c64(),
        }
    }

    pub fn encode(&self) -> Value {
        match self {
            AnySeries::Double(s) => encode_series(s),
            AnySeries::Complex(s) => encode_series(s),
            AnySeries::Rational(s) => encode_series(s),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Wire {
    schema_version: u32,
    e: Value,
    m: u32,
    case: String,
    params: SpacetimeParams,
    modes: ModeParams,
    arithmetic: String,
    #[serde(default)]
    terminates: bool,
    coefficients: Vec<Value>,
}

fn typed<T: DocScalar>(wire: &Wire, case: CaseTag) -> Result<FrobeniusSeries<T>> {
    let coefficients = wire.coefficients.iter().map(T::decode).collect::<Result<Vec<_>>>()?;
    Ok(FrobeniusSeries {
        e: T::decode(&wire.e)?,
        m: wire.m,
        coefficients,
        case,
        params: wire.params,
        modes: wire.modes,
        terminates: wire.terminates,
    })
}

pub fn decode_series(text: &str) -> Result<AnySeries> {
    let wire: Wire = serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
    if wire.schema_version != SCHEMA_VERSION {
        return Err(Error::Document(format!("unsupported schema_version {}", wire.schema_version)));
    }
    if wire.m == 0 {
        return Err(Error::Document("stride m must be positive".into()));
    }
    if wire.coefficients.is_empty() {
        return Err(Error::Document("no coefficients".into()));
    }
    wire.params.validate()?;
    wire.modes.validate()?;
    let case: CaseTag = wire.case.parse()?;
    match wire.arithmetic.as_str() {
        "double" => Ok(AnySeries::Double(typed(&wire, case)?)),
        "complex" => Ok(AnySeries::Complex(typed(&wire, case)?)),
        "rational" => Ok(AnySeries::Rational(typed(&wire, case)?)),
        other => Err(Error::Document(format!("unknown arithmetic `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::frobenius::{build_series, Indexing};

    fn sample() -> FrobeniusSeries<BigRational> {
        let p = SpacetimeParams::schwarzschild(4, 1.0).unwrap();
        build_series(&p, &ModeParams::angular(0.0), CaseTag::Case2, rational(2, 1), 6, Indexing::Resolved).unwrap()
    }

    #[test]
    fn formatting() {
        assert_eq!(number17(4.0 * std::f64::consts::PI).to_string(), "1.2566370614359172e+1");
        assert_eq!(number17(0.5).to_string(), "5.0000000000000000e-1");
        assert_eq!(number17(f64::NAN), Value::Null);
    }

    #[test]
    fn round_trips() {
        let exact = sample();
        let text = encode_series(&exact).to_string();
        assert!(text.contains("\"1/3\""));
        assert_eq!(decode_series(&text).unwrap(), AnySeries::Rational(exact.clone()));
        let double = exact.to_c64();
        let real = FrobeniusSeries {
            e: double.e.re,
            m: double.m,
            coefficients: double.coefficients.iter().map(|c| c.re).collect(),
            case: double.case,
            params: double.params,
            modes: double.modes,
            terminates: double.terminates,
        };
        let back = decode_series(&encode_series(&real).to_string()).unwrap();
        assert_eq!(back, AnySeries::Double(real));
        let back = decode_series(&encode_series(&double).to_string()).unwrap();
        assert_eq!(back, AnySeries::Complex(double));
    }

    #[test]
    fn rejects_malformed() {
        let good = encode_series(&sample());
        let mutate = |f: &dyn Fn(&mut Value)| {
            let mut v = good.clone();
            f(&mut v);
            decode_series(&v.to_string())
        };
        assert!(mutate(&|v| v["schema_version"] = json!(2)).is_err());
        assert!(mutate(&|v| v["m"] = json!(0)).is_err());
        assert!(mutate(&|v| v["case"] = json!("Case3")).is_err());
        assert!(mutate(&|v| v["arithmetic"] = json!("quad")).is_err());
        assert!(mutate(&|v| v["coefficients"] = json!([])).is_err());
        assert!(mutate(&|v| v["coefficients"][1] = json!("1/0")).is_err());
        assert!(mutate(&|v| v["coefficients"][1] = json!(0.5)).is_err());
        assert!(mutate(&|v| v["params"]["n"] = json!(2)).is_err());
        assert!(mutate(&|v| v["modes"]["nu"] = json!(-1)).is_err());
        assert!(mutate(&|v| v["extra"] = json!(1)).is_err());
        assert!(decode_series("{").is_err());
        assert!(decode_series("").is_err());
    }
}
