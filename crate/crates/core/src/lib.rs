//! Doppler-tolerant pulse trains built from complementary code sets.
//!
//! Codes from a complementary code matrix (CCM) are ordered by the
//! generalized Prouhet-Thue-Morse sequence, or split across antennas as
//! staggered trains derived from partitions with equal sums of like powers,
//! so that the Taylor coefficients of the ambiguity function in the Doppler
//! phase vanish off the zero-delay peak up to a chosen order.

pub mod cli;
pub mod codes;
pub mod doppler;
pub mod error;
pub mod numtheory;
pub mod stagger;

pub use error::{Error, Result};

pub(crate) mod complex_serde {
    use num_complex::Complex64;
    use serde::ser::{SerializeSeq, Serializer};

    /// Serializes a table of complex numbers as nested `[re, im]` pairs.
    pub fn rows<S: Serializer>(rows: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(rows.len()))?;
        for row in rows {
            let pairs: Vec<[f64; 2]> = row.iter().map(|c| [c.re, c.im]).collect();
            seq.serialize_element(&pairs)?;
        }
        seq.end()
    }
}
