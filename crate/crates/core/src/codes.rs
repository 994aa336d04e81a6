//! Unimodular codes, aperiodic autocorrelation and complementary code
//! matrices (CCMs).
//!
//! All indexing is 0-based: `ACF(k) = Σ_{i=0}^{N-1-k} x[i]·conj(x[i+k])`
//! for `k >= 0`, extended to negative lags by conjugate symmetry.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of `|x|` from 1 for a code entry.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Default per-sidelobe tolerance for CCM validation.
pub const DEFAULT_CCM_TOL: f64 = 1e-9;

pub const MAX_GOLAY_EXPONENT: u32 = 20;
pub const MAX_DFT_SIZE: usize = 64;

/// `exp(2πj·phase/order)`, exact for multiples of a quarter turn.
pub fn root_of_unity(order: usize, phase: u64) -> Complex64 {
    let phase = phase % order as u64;
    if (4 * phase).is_multiple_of(order as u64) {
        match 4 * phase / order as u64 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, 2.0 * PI * phase as f64 / order as f64)
    }
}

/// Exact phase representation: entry `i` is `exp(2πj·phases[i]/order)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseRepr {
    pub order: usize,
    pub phases: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularCode {
    entries: Vec<Complex64>,
    phase: Option<PhaseRepr>,
}

impl UnimodularCode {
    pub fn from_entries(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter(
                "code must have at least one entry".into(),
            ));
        }
        for (index, x) in entries.iter().enumerate() {
            let magnitude = x.norm();
            if magnitude.is_nan() || (magnitude - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NotUnimodular { index, magnitude });
            }
        }
        Ok(Self {
            entries,
            phase: None,
        })
    }

    /// Builds a `p`-phase code. Phases are reduced mod `order`.
    pub fn from_phases(order: usize, phases: Vec<u64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter(
                "phase order must be positive".into(),
            ));
        }
        if phases.is_empty() {
            return Err(Error::InvalidParameter(
                "code must have at least one entry".into(),
            ));
        }
        let phases: Vec<u64> = phases.into_iter().map(|ph| ph % order as u64).collect();
        let entries = phases.iter().map(|&ph| root_of_unity(order, ph)).collect();
        Ok(Self {
            entries,
            phase: Some(PhaseRepr { order, phases }),
        })
    }

    /// Binary code from signs; any negative value maps to `-1`.
    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        Self::from_phases(2, signs.iter().map(|&s| u64::from(s < 0)).collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn phase_repr(&self) -> Option<&PhaseRepr> {
        self.phase.as_ref()
    }
}

/// Aperiodic autocorrelation, stored for lags `-(N-1)..=(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Acf {
    values: Vec<Complex64>,
}

impl Acf {
    /// Code length `N`.
    pub fn code_len(&self) -> usize {
        self.values.len().div_ceil(2)
    }

    /// Largest lag magnitude, `N - 1`.
    pub fn max_lag(&self) -> i64 {
        self.code_len() as i64 - 1
    }

    /// Value at lag `k`; panics when `|k| > N - 1`.
    pub fn at(&self, k: i64) -> Complex64 {
        self.values[(k + self.max_lag()) as usize]
    }

    pub fn get(&self, k: i64) -> Option<Complex64> {
        (k.abs() <= self.max_lag()).then(|| self.at(k))
    }

    /// Values ordered from lag `-(N-1)` to `N-1`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

pub fn acf(x: &UnimodularCode) -> Acf {
    let e = x.entries();
    let n = e.len();
    let mut values = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for k in 0..n {
        let s: Complex64 = (0..n - k).map(|i| e[i] * e[i + k].conj()).sum();
        values[n - 1 + k] = s;
        values[n - 1 - k] = s.conj();
    }
    // Lag 0 is real by construction.
    values[n - 1].im = 0.0;
    Acf { values }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcmValidation {
    pub is_ccm: bool,
    /// `max_{k≠0} |Σ_c ACF_c(k)|`.
    pub worst_sidelobe: f64,
    /// `|Σ_c ACF_c(0) - N·K|`.
    pub peak_error: f64,
    /// Summed ACF over lags `-(N-1)..=(N-1)`.
    pub sums: Vec<Complex64>,
}

fn common_length(columns: &[UnimodularCode]) -> Result<usize> {
    let first = columns
        .first()
        .ok_or_else(|| Error::InvalidParameter("code set has no columns".into()))?;
    let n = first.len();
    for c in columns {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    Ok(n)
}

fn summed_acf(acfs: &[Acf]) -> Vec<Complex64> {
    let mut sums = vec![Complex64::new(0.0, 0.0); acfs[0].values.len()];
    for a in acfs {
        for (s, v) in sums.iter_mut().zip(&a.values) {
            *s += v;
        }
    }
    sums
}

fn validation_from_acfs(acfs: &[Acf], tol: f64) -> CcmValidation {
    let n = acfs[0].code_len();
    let sums = summed_acf(acfs);
    let worst_sidelobe = sums
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != n - 1)
        .map(|(_, s)| s.norm())
        .fold(0.0, f64::max);
    let peak_error = (sums[n - 1] - (n * acfs.len()) as f64).norm();
    CcmValidation {
        is_ccm: worst_sidelobe <= tol && peak_error <= tol,
        worst_sidelobe,
        peak_error,
        sums,
    }
}

/// Checks `Σ_k ACF_{x_k}(n) = N·K·δ_n` to within `tol` per lag.
pub fn validate_ccm(columns: &[UnimodularCode], tol: f64) -> Result<CcmValidation> {
    common_length(columns)?;
    let acfs: Vec<Acf> = columns.iter().map(acf).collect();
    Ok(validation_from_acfs(&acfs, tol))
}

/// Exact complementarity check in Gaussian integers.
///
/// Only available when every column carries a phase representation of
/// order 1, 2 or 4; returns `None` otherwise.
pub fn validate_ccm_exact(columns: &[UnimodularCode]) -> Result<Option<bool>> {
    let n = common_length(columns)?;
    let mut gaussian = Vec::with_capacity(columns.len());
    for c in columns {
        let Some(repr) = c.phase_repr() else {
            return Ok(None);
        };
        if !matches!(repr.order, 1 | 2 | 4) {
            return Ok(None);
        }
        let quarter = 4 / repr.order as u64;
        let col: Vec<(i64, i64)> = repr
            .phases
            .iter()
            .map(|&ph| match (ph * quarter) % 4 {
                0 => (1, 0),
                1 => (0, 1),
                2 => (-1, 0),
                _ => (0, -1),
            })
            .collect();
        gaussian.push(col);
    }
    for k in 0..n {
        let (mut re, mut im) = (0i64, 0i64);
        for col in &gaussian {
            for i in 0..n - k {
                // a · conj(b)
                let (a, b) = (col[i], col[i + k]);
                re += a.0 * b.0 + a.1 * b.1;
                im += a.1 * b.0 - a.0 * b.1;
            }
        }
        let expected = if k == 0 {
            (n * columns.len()) as i64
        } else {
            0
        };
        if re != expected || im != 0 {
            return Ok(Some(false));
        }
    }
    Ok(Some(true))
}

/// A validated complementary code matrix; columns are the codes.
#[derive(Debug, Clone, PartialEq)]
pub struct Ccm {
    columns: Vec<UnimodularCode>,
    acfs: Vec<Acf>,
}

impl Ccm {
    pub fn new(columns: Vec<UnimodularCode>) -> Result<Self> {
        Self::with_tolerance(columns, DEFAULT_CCM_TOL)
    }

    pub fn with_tolerance(columns: Vec<UnimodularCode>, tol: f64) -> Result<Self> {
        common_length(&columns)?;
        let acfs: Vec<Acf> = columns.iter().map(acf).collect();
        let report = validation_from_acfs(&acfs, tol);
        if !report.is_ccm {
            return Err(Error::NotComplementary {
                worst_sidelobe: report.worst_sidelobe.max(report.peak_error),
            });
        }
        Ok(Self { columns, acfs })
    }

    /// Code length `N`.
    pub fn code_len(&self) -> usize {
        self.columns[0].len()
    }

    /// Number of codes `K`.
    pub fn code_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[UnimodularCode] {
        &self.columns
    }

    pub fn column(&self, k: usize) -> &UnimodularCode {
        &self.columns[k]
    }

    pub fn acf(&self, k: usize) -> &Acf {
        &self.acfs[k]
    }

    pub fn acfs(&self) -> &[Acf] {
        &self.acfs
    }

    /// Shared phase order when every column carries the same one.
    pub fn phase_order(&self) -> Option<usize> {
        common_phase_order(&self.columns)
    }
}

fn common_phase_order(columns: &[UnimodularCode]) -> Option<usize> {
    let first = columns.first()?.phase_repr()?.order;
    columns
        .iter()
        .all(|c| c.phase_repr().map(|r| r.order) == Some(first))
        .then_some(first)
}

/// Golay complementary pair of length `2^exponent` by recursive doubling:
/// `(a, b) -> (a‖b, a‖-b)` from the seed `a = b = (+1)`.
pub fn gen_golay_pair(exponent: u32) -> Result<Ccm> {
    if !(1..=MAX_GOLAY_EXPONENT).contains(&exponent) {
        return Err(Error::InvalidParameter(format!(
            "Golay exponent must be in 1..={MAX_GOLAY_EXPONENT}, got {exponent}"
        )));
    }
    // phase 0 is +1, phase 1 is -1
    let mut a = vec![0u64];
    let mut b = vec![0u64];
    for _ in 0..exponent {
        let mut a2 = a.clone();
        a2.extend_from_slice(&b);
        let mut b2 = a;
        b2.extend(b.iter().map(|&ph| 1 - ph));
        a = a2;
        b = b2;
    }
    Ccm::with_tolerance(
        vec![
            UnimodularCode::from_phases(2, a)?,
            UnimodularCode::from_phases(2, b)?,
        ],
        1e-12,
    )
}

/// `K×K` DFT matrix: column `k` has entries `exp(2πj·k·n/K)`.
pub fn gen_dft_set(k: usize) -> Result<Ccm> {
    if !(2..=MAX_DFT_SIZE).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "DFT set size must be in 2..={MAX_DFT_SIZE}, got {k}"
        )));
    }
    let columns = (0..k as u64)
        .map(|col| UnimodularCode::from_phases(k, (0..k as u64).map(|n| col * n).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ccm::new(columns)
}

/// `X(z) = Σ x[n] z^{-n}` by Horner's rule in `z^{-1}`.
pub fn ztransform_eval(x: &UnimodularCode, z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter(
            "z-transform is undefined at z = 0".into(),
        ));
    }
    let w = z.inv();
    Ok(x.entries()
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &e| acc * w + e))
}

/// The `count` roots of unity `exp(2πj·i/count)`.
pub fn unit_circle_samples(count: usize) -> Vec<Complex64> {
    (0..count as u64).map(|i| root_of_unity(count, i)).collect()
}

/// Worst relative deviation of `Σ_k |X_k(z)|²` from `N·K` over `points`.
pub fn energy_identity_residual(columns: &[UnimodularCode], points: &[Complex64]) -> Result<f64> {
    let n = common_length(columns)?;
    let target = (n * columns.len()) as f64;
    let mut worst = 0.0f64;
    for &z in points {
        let mut energy = 0.0;
        for c in columns {
            energy += ztransform_eval(c, z)?.norm_sqr();
        }
        worst = worst.max((energy - target).abs() / target);
    }
    Ok(worst)
}

/// Code-set file layout. Exactly one of `columns` (as `[re, im]` pairs) or
/// `phases` (integers mod `phaseOrder`) is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSetFile {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "phaseOrder")]
    pub phase_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<Vec<u64>>>,
}

impl CodeSetFile {
    pub fn from_codes(codes: &[UnimodularCode]) -> Self {
        let n = codes.first().map_or(0, UnimodularCode::len);
        match common_phase_order(codes) {
            Some(order) => Self {
                n,
                k: codes.len(),
                phase_order: Some(order),
                columns: None,
                phases: Some(
                    codes
                        .iter()
                        .map(|c| c.phase_repr().map(|r| r.phases.clone()).unwrap_or_default())
                        .collect(),
                ),
            },
            None => Self {
                n,
                k: codes.len(),
                phase_order: None,
                columns: Some(
                    codes
                        .iter()
                        .map(|c| c.entries().iter().map(|e| [e.re, e.im]).collect())
                        .collect(),
                ),
                phases: None,
            },
        }
    }

    /// Parses the columns and checks the declared `N` and `K`.
    pub fn to_codes(&self) -> Result<Vec<UnimodularCode>> {
        let codes = match (&self.phase_order, &self.phases, &self.columns) {
            (Some(order), Some(phases), None) => phases
                .iter()
                .map(|ph| UnimodularCode::from_phases(*order, ph.clone()))
                .collect::<Result<Vec<_>>>()?,
            (None, None, Some(columns)) => columns
                .iter()
                .map(|col| {
                    UnimodularCode::from_entries(
                        col.iter().map(|&[re, im]| Complex64::new(re, im)).collect(),
                    )
                })
                .collect::<Result<Vec<_>>>()?,
            _ => {
                return Err(Error::Format(
                    "code set needs `phases` with a phaseOrder, or `columns` without one".into(),
                ))
            }
        };
        if codes.len() != self.k {
            return Err(Error::Format(format!(
                "K = {} but {} codes given",
                self.k,
                codes.len()
            )));
        }
        for c in &codes {
            if c.len() != self.n {
                return Err(Error::Format(format!(
                    "N = {} but a code has length {}",
                    self.n,
                    c.len()
                )));
            }
        }
        Ok(codes)
    }
}

impl Serialize for Ccm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeSetFile::from_codes(&self.columns).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ccm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = CodeSetFile::deserialize(d)?;
        let codes = file.to_codes().map_err(D::Error::custom)?;
        Ccm::new(codes).map_err(D::Error::custom)
    }
}
