//! JSON and CSV emission helpers.
//!
//! Floats go out with 17 significant digits so every `f64` round-trips
//! exactly; exact integers and rationals go out as decimal strings.  The
//! `arbitrary_precision` feature of `serde_json` keeps the formatted
//! number text intact instead of re-parsing it through `f64`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::One;
use serde_json::{Map, Number, Value};

/// A float as a JSON number with 17 significant digits.  Non-finite
/// values have no JSON number form and fall back to strings.
pub fn num17(x: f64) -> Value {
    if x.is_finite() {
        let text = format!("{:.16e}", x);
        let n: Number = serde_json::from_str(&text).expect("formatted float parses");
        Value::Number(n)
    } else if x.is_nan() {
        Value::String("nan".into())
    } else if x > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

/// 17-significant-digit text for CSV cells.
pub fn csv17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// An exact rational as `"p"` or `"p/q"` in lowest terms.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A quarter-integer exponent as its exact decimal value in `t` units.
/// Quarters are exactly representable, and `Display` for `f64` prints
/// the shortest exact form (`"2"`, `"0.25"`, `"-0.5"`).
pub fn quarter_exponent_string(exp4: i64) -> String {
    format!("{}", exp4 as f64 / 4.0)
}

/// A real matrix as nested JSON arrays of 17-digit numbers.
pub fn real_matrix_json(m: &Array2<f64>) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|row| Value::Array(row.iter().map(|&x| num17(x)).collect()))
            .collect(),
    )
}

/// A complex matrix as nested JSON arrays of `[re, im]` pairs.
pub fn complex_matrix_json(m: &Array2<C64>) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|row| {
                Value::Array(
                    row.iter()
                        .map(|z| Value::Array(vec![num17(z.re), num17(z.im)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

/// Shorthand for building a JSON object from (key, value) pairs.
pub fn obj(pairs: Vec<(&str, Value)>) -> Value {
    let mut map = Map::new();
    for (k, v) in pairs {
        map.insert(k.to_string(), v);
    }
    Value::Object(map)
}
