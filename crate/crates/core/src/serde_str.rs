//! Serde helpers that keep arbitrary-precision values as decimal
//! strings in JSON ("80", "3/4"), so output is canonical and survives
//! readers without big-integer support.

pub(crate) mod big_str {
    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(D::Error::custom)
    }
}

pub(crate) mod rat_str {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::rational::{parse_rational, Rational};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rational(&raw).map_err(D::Error::custom)
    }
}

pub(crate) mod count_map {
    use std::collections::BTreeMap;

    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<u32, BigInt>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(m.iter().map(|(k, v)| (k, v.to_string())))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<u32, BigInt>, D::Error> {
        let raw = BTreeMap::<u32, String>::deserialize(d)?;
        raw.into_iter()
            .map(|(k, v)| v.parse().map(|b| (k, b)).map_err(D::Error::custom))
            .collect()
    }
}
