//! Serde helpers: big integers go out as JSON numbers when they fit in an
//! `i64` and as decimal strings otherwise.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::ser::SerializeSeq;
use serde::Serializer;

pub fn big<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
    match v.to_i64() {
        Some(x) => s.serialize_i64(x),
        None => s.serialize_str(&v.to_string()),
    }
}

pub fn big_vec<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_i64() {
            Some(small) => seq.serialize_element(&small)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

pub fn poly<S: Serializer>(p: &crate::IntPolynomial, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&p.to_json(), s)
}

pub fn complex<S: Serializer>(v: &num_complex::Complex64, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&[v.re, v.im], s)
}
