//! Text rendering of numbers for CSV and JSON output.
//!
//! Every float is printed with 17 significant digits in the style of C's
//! `%.17g`, which is enough to read back the identical `f64`.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `%.17g` rendering of a finite float.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (16 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A float that serializes to JSON with [`sig17`] digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

pub fn sig17_vec(values: &[f64]) -> Vec<Sig17> {
    values.iter().copied().map(Sig17).collect()
}

pub fn sig17_rows(rows: &[Vec<f64>]) -> Vec<Vec<Sig17>> {
    rows.iter().map(|r| sig17_vec(r)).collect()
}

/// `serialize_with` helper for `f64` fields.
pub fn serialize_f64<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(serializer)
}

/// `serialize_with` helper for `Vec<f64>` fields.
#[allow(clippy::ptr_arg)]
pub fn serialize_f64_vec<S: Serializer>(xs: &Vec<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    sig17_vec(xs).serialize(serializer)
}
