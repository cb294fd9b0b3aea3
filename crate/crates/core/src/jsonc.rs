//! JSON shape for complex scalars: `{"re": .., "im": ..}`.
//!
//! Used with `#[serde(with = "crate::jsonc")]` on `Complex64` fields and
//! `crate::jsonc::mat` on nested matrices of them.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
struct Repr {
    re: f64,
    im: f64,
}

pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    Repr { re: z.re, im: z.im }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    let r = Repr::deserialize(d)?;
    Ok(Complex64::new(r.re, r.im))
}

/// The same shape for `Vec<Vec<Complex64>>` matrices.
pub mod mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Vec<Vec<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Repr>> = m
            .iter()
            .map(|row| row.iter().map(|z| Repr { re: z.re, im: z.im }).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        let rows: Vec<Vec<Repr>> = Vec::deserialize(d)?;
        Ok(rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|r| Complex64::new(r.re, r.im))
                    .collect()
            })
            .collect())
    }
}
