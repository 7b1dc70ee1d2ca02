//! Exponent `p` as a JSON number, or the string `"inf"` for `p = ∞`.

use serde::{de, Deserialize, Deserializer, Serializer};

pub fn serialize<S: Serializer>(p: &f64, s: S) -> Result<S::Ok, S::Error> {
    if p.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*p)
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Num(p) => Ok(p),
        Raw::Text(s) => match s.to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(f64::INFINITY),
            other => other
                .parse()
                .map_err(|_| de::Error::custom(format!("invalid exponent {s:?}"))),
        },
    }
}
