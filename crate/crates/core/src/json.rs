//! JSON helpers: floats are written with 17 significant digits.

use serde::ser::{Error as _, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Formats a float with 17 significant digits as a JSON number. Non-finite
/// values have no JSON form and map to `null`.
pub fn format_f17(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

/// `serialize_with` adapter for `f64` fields.
pub fn f17<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    match format_f17(*x) {
        Some(text) => RawValue::from_string(text)
            .map_err(S::Error::custom)?
            .serialize(serializer),
        None => serializer.serialize_none(),
    }
}

/// `serialize_with` adapter for `Option<f64>` fields.
pub fn f17_opt<S: Serializer>(x: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => f17(v, serializer),
        None => serializer.serialize_none(),
    }
}

/// Wrapper serializing its float with [`f17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        f17(&self.0, serializer)
    }
}

/// `serialize_with` adapter for `Vec<f64>` fields.
pub fn f17_seq<S: Serializer>(xs: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&F17(x))?;
    }
    seq.end()
}

/// `serialize_with` adapter for lists of `[re, im]` pairs.
pub fn f17_pairs<S: Serializer>(xs: &[[f64; 2]], serializer: S) -> Result<S::Ok, S::Error> {
    let mut seq = serializer.serialize_seq(Some(xs.len()))?;
    for &[re, im] in xs {
        seq.serialize_element(&[F17(re), F17(im)])?;
    }
    seq.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        #[serde(serialize_with = "f17")]
        x: f64,
        #[serde(serialize_with = "f17_seq")]
        xs: Vec<f64>,
    }

    #[test]
    fn seventeen_digits() {
        let s = serde_json::to_string(&Sample {
            x: 0.1,
            xs: vec![1.0, f64::NAN],
        })
        .unwrap();
        assert_eq!(s, r#"{"x":1.0000000000000001e-1,"xs":[1.0000000000000000e0,null]}"#);
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), 0.1);
    }
}
