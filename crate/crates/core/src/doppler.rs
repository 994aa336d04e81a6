//! Pulse trains, their delay-Doppler response and the Taylor coefficients
//! of that response about zero Doppler.
//!
//! A train transmits code `indices[n]` of a CCM in slot `n + delay`. Its
//! ambiguity function is `g(k, θ) = Σ_n e^{j(n+d)θ} ACF_{x_n}(k)` and the
//! Taylor coefficients in `θ` are `c_m(k) = Σ_n (n+d)^m ACF_{x_n}(k)`.
//! On the z side, `C_m(z) = Σ_n (n+d)^m |X_n(z)|²`; `c_m` vanishes off the
//! peak exactly when `C_m` is constant on the unit circle.

use std::fmt::Write as _;
use std::io::BufRead;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codes::{unit_circle_samples, ztransform_eval, Ccm, CodeSetFile};
use crate::error::{Error, Result};
use crate::numtheory::{ptm_length, vp};

/// Relative factor in the null threshold `NULL_REL_TOL · N · max(1, W)^m`,
/// where `W` is the largest slot index carrying a pulse.
pub const NULL_REL_TOL: f64 = 1e-9;

/// Largest Taylor order computed.
pub const MAX_TAYLOR_ORDER: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrain {
    ccm: Ccm,
    indices: Vec<usize>,
    delay: u64,
}

impl PulseTrain {
    pub fn new(ccm: Ccm, indices: Vec<usize>, delay: u64) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidParameter(
                "pulse train must have at least one pulse".into(),
            ));
        }
        let k = ccm.code_count();
        if let Some(&index) = indices.iter().find(|&&i| i >= k) {
            return Err(Error::IndexOutOfRange { index, k });
        }
        Ok(Self {
            ccm,
            indices,
            delay,
        })
    }

    pub fn ccm(&self) -> &Ccm {
        &self.ccm
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    /// Number of pulses `L`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Same pulses shifted to start at slot `delay`.
    pub fn with_delay(&self, delay: u64) -> Self {
        Self {
            delay,
            ..self.clone()
        }
    }

    /// `(slot, code)` for every pulse.
    pub fn slots(&self) -> impl Iterator<Item = (u64, usize)> + Clone + '_ {
        self.indices
            .iter()
            .enumerate()
            .map(move |(n, &c)| (n as u64 + self.delay, c))
    }

    /// `Some(M)` when `indices[n] = v_K(n)` and `L = K^(M+1)`.
    pub fn ptm_order(&self) -> Option<usize> {
        let k = self.ccm.code_count();
        let follows = self
            .indices
            .iter()
            .enumerate()
            .all(|(n, &c)| vp(n as u64, k as u64) == c as u64);
        if !follows {
            return None;
        }
        let mut len = self.len();
        let mut order = 0usize;
        while len.is_multiple_of(k) && len > k {
            len /= k;
            order += 1;
        }
        (len == k).then_some(order)
    }
}

/// PTM train of length `K^(M+1)`: pulse `n` carries code `v_K(n)`.
pub fn build_ptm_train(ccm: &Ccm, degree: usize) -> Result<PulseTrain> {
    if degree == 0 {
        return Err(Error::InvalidParameter("PTM order must be positive".into()));
    }
    let k = ccm.code_count();
    let len = ptm_length(k, degree)?;
    let indices = (0..len).map(|n| vp(n, k as u64) as usize).collect();
    PulseTrain::new(ccm.clone(), indices, 0)
}

/// `g(k, θ)` for one lag and Doppler phase (radians per pulse).
pub fn ambiguity(train: &PulseTrain, lag: i64, theta: f64) -> Result<Complex64> {
    let n = train.ccm.code_len();
    if lag.unsigned_abs() as usize >= n {
        return Err(Error::LagOutOfRange { lag, n });
    }
    Ok(train
        .slots()
        .map(|(slot, c)| Complex64::from_polar(1.0, slot as f64 * theta) * train.ccm.acf(c).at(lag))
        .sum())
}

/// Scale-aware threshold below which `max_{k≠0} |c_m(k)|` counts as zero.
pub fn null_threshold(code_len: usize, max_slot: u64, m: usize) -> f64 {
    NULL_REL_TOL * code_len as f64 * (max_slot.max(1) as f64).powi(m as i32)
}

/// Taylor coefficients `c_m(k)` for `m = 0..=M` and every lag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorReport {
    #[serde(rename = "M")]
    pub max_order: usize,
    #[serde(rename = "N")]
    pub code_len: usize,
    /// Largest slot index carrying a pulse (sets the threshold scale).
    #[serde(rename = "maxSlot")]
    pub max_slot: u64,
    /// Lags `-(N-1)..=(N-1)`, the column order of `coeffs`.
    pub lags: Vec<i64>,
    /// `coeffs[m][i]` is `c_m(lags[i])`.
    #[serde(serialize_with = "crate::complex_serde::rows")]
    pub coeffs: Vec<Vec<Complex64>>,
    #[serde(rename = "maxSidelobeResidual")]
    pub max_sidelobe_residual: Vec<f64>,
    pub thresholds: Vec<f64>,
    #[serde(rename = "nullOrder")]
    pub null_order: Option<usize>,
}

impl TaylorReport {
    pub fn coeff(&self, m: usize, lag: i64) -> Complex64 {
        self.coeffs[m][(lag + self.code_len as i64 - 1) as usize]
    }

    /// Whether `c_m(k)` vanishes off the peak for order `m`.
    pub fn vanishes(&self, m: usize) -> bool {
        self.max_sidelobe_residual[m] <= self.thresholds[m]
    }

    /// `nullOrder >= order`.
    pub fn reaches(&self, order: usize) -> bool {
        self.null_order.is_some_and(|o| o >= order)
    }
}

/// Exact per-code weights `W[m][c] = Σ_{pulses of code c} slot^m`.
pub(crate) fn code_weights(
    code_count: usize,
    slots: impl Iterator<Item = (u64, usize)>,
    max_order: usize,
) -> Result<Vec<Vec<i128>>> {
    let mut weights = vec![vec![0i128; code_count]; max_order + 1];
    for (slot, c) in slots {
        let mut power = 1i128;
        for (m, row) in weights.iter_mut().enumerate() {
            if m > 0 {
                power = power
                    .checked_mul(slot as i128)
                    .ok_or_else(|| Error::Overflow(format!("{slot}^{m} in Taylor weights")))?;
            }
            row[c] = row[c]
                .checked_add(power)
                .ok_or_else(|| Error::Overflow(format!("order-{m} Taylor weight")))?;
        }
    }
    Ok(weights)
}

/// Taylor report for any collection of `(slot, code)` pulses over `ccm`.
pub(crate) fn taylor_from_slots(
    ccm: &Ccm,
    slots: impl Iterator<Item = (u64, usize)> + Clone,
    max_order: usize,
) -> Result<TaylorReport> {
    if max_order > MAX_TAYLOR_ORDER {
        return Err(Error::InvalidParameter(format!(
            "Taylor order {max_order} exceeds the cap {MAX_TAYLOR_ORDER}"
        )));
    }
    let max_slot = slots.clone().map(|(s, _)| s).max().unwrap_or(0);
    let weights = code_weights(ccm.code_count(), slots, max_order)?;
    let n = ccm.code_len();
    let lags: Vec<i64> = (-(n as i64 - 1)..=(n as i64 - 1)).collect();

    let coeffs: Vec<Vec<Complex64>> = weights
        .iter()
        .map(|row| {
            lags.iter()
                .map(|&lag| {
                    row.iter()
                        .enumerate()
                        .map(|(c, &w)| ccm.acf(c).at(lag) * w as f64)
                        .sum()
                })
                .collect()
        })
        .collect();
    let max_sidelobe_residual: Vec<f64> = coeffs
        .iter()
        .map(|row| {
            row.iter()
                .zip(&lags)
                .filter(|&(_, &lag)| lag != 0)
                .map(|(v, _)| v.norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let thresholds: Vec<f64> = (0..=max_order)
        .map(|m| null_threshold(n, max_slot, m))
        .collect();
    let null_order = max_sidelobe_residual
        .iter()
        .zip(&thresholds)
        .take_while(|(r, t)| r <= t)
        .count()
        .checked_sub(1);

    Ok(TaylorReport {
        max_order,
        code_len: n,
        max_slot,
        lags,
        coeffs,
        max_sidelobe_residual,
        thresholds,
        null_order,
    })
}

pub fn taylor_coeffs(train: &PulseTrain, max_order: usize) -> Result<TaylorReport> {
    taylor_from_slots(&train.ccm, train.slots(), max_order)
}

/// `C_m(z)` at each point, summed pulse by pulse.
fn z_coeffs(train: &PulseTrain, m: usize, points: &[Complex64]) -> Result<Vec<f64>> {
    let weights: Vec<f64> = train
        .slots()
        .map(|(slot, _)| {
            (slot as i128)
                .checked_pow(m as u32)
                .map(|w| w as f64)
                .ok_or_else(|| Error::Overflow(format!("{slot}^{m} in z-domain weights")))
        })
        .collect::<Result<_>>()?;
    points
        .iter()
        .map(|&z| {
            let energy = train
                .ccm
                .columns()
                .iter()
                .map(|col| ztransform_eval(col, z).map(|x| x.norm_sqr()))
                .collect::<Result<Vec<_>>>()?;
            Ok(train
                .indices
                .iter()
                .zip(&weights)
                .map(|(&c, w)| w * energy[c])
                .sum())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZDomainReport {
    #[serde(rename = "zSamples")]
    pub z_samples: usize,
    /// `N·K·P_m` for `m = 0..=M`.
    pub expected: Vec<f64>,
    /// `max_z |C_m(z) - N·K·P_m| / (N·K·P_m)` for `m = 0..=M`.
    pub residuals: Vec<f64>,
    /// Largest residual over `m = 1..=M`.
    #[serde(rename = "maxResidual")]
    pub max_residual: f64,
}

/// Compares `C_m(z)` with `N·K·P_m` at `z_samples` roots of unity, where
/// `P_m` is the `m`-th power sum of the slots carrying code 0.
pub fn zdomain_coeff_check(
    train: &PulseTrain,
    max_order: usize,
    z_samples: usize,
) -> Result<ZDomainReport> {
    if z_samples == 0 {
        return Err(Error::InvalidParameter("need at least one z sample".into()));
    }
    if train.ptm_order().is_none() {
        return Err(Error::NotPtmTrain(format!(
            "{} pulses over {} codes do not follow the digit-sum order",
            train.len(),
            train.ccm.code_count()
        )));
    }
    let n = train.ccm.code_len();
    let k = train.ccm.code_count();
    let block0 = code_weights(k, train.slots(), max_order)?;
    let points = unit_circle_samples(z_samples);

    let mut expected = Vec::with_capacity(max_order + 1);
    let mut residuals = Vec::with_capacity(max_order + 1);
    for (m, row) in block0.iter().enumerate() {
        let target = (n * k) as f64 * row[0] as f64;
        let denom = if target > 0.0 { target } else { (n * k) as f64 };
        let worst = z_coeffs(train, m, &points)?
            .into_iter()
            .map(|c| (c - target).abs() / denom)
            .fold(0.0, f64::max);
        expected.push(target);
        residuals.push(worst);
    }
    let max_residual = residuals.iter().skip(1).copied().fold(0.0, f64::max);
    Ok(ZDomainReport {
        z_samples,
        expected,
        residuals,
        max_residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceCheck {
    pub order: usize,
    #[serde(rename = "timeDomainNull")]
    pub time_domain_null: bool,
    #[serde(rename = "zDomainConstant")]
    pub z_domain_constant: bool,
    /// `max_{k≠0} |c_m(k)|`.
    #[serde(rename = "maxSidelobe")]
    pub max_sidelobe: f64,
    /// Standard deviation of `C_m(z)` over the unit-circle samples.
    #[serde(rename = "zSpread")]
    pub z_spread: f64,
    pub threshold: f64,
}

/// Runs the time-domain and z-domain vanishing tests for order `m`
/// independently and requires them to agree.
///
/// With at least `2N - 1` equispaced samples the variance of `C_m(z)` is
/// `2 Σ_{k>0} |c_m(k)|²`, so the z side uses `√2` times the time-domain
/// threshold on the standard deviation.
pub fn equivalence_check(train: &PulseTrain, m: usize) -> Result<EquivalenceCheck> {
    let report = taylor_coeffs(train, m)?;
    let threshold = report.thresholds[m];
    let max_sidelobe = report.max_sidelobe_residual[m];

    let samples = (4 * train.ccm.code_len()).max(8);
    let values = z_coeffs(train, m, &unit_circle_samples(samples))?;
    let mean = values.iter().sum::<f64>() / samples as f64;
    let z_spread = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / samples as f64).sqrt();

    let check = EquivalenceCheck {
        order: m,
        time_domain_null: max_sidelobe <= threshold,
        z_domain_constant: z_spread <= std::f64::consts::SQRT_2 * threshold,
        max_sidelobe,
        z_spread,
        threshold,
    };
    if check.time_domain_null != check.z_domain_constant {
        return Err(Error::DomainDisagreement { order: m });
    }
    Ok(check)
}

/// `|g(k, θ)|` sampled over every lag and an even grid of Doppler phases.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySurface {
    pub thetas: Vec<f64>,
    pub lags: Vec<i64>,
    /// Row-major: `magnitudes[t * lags.len() + l]`.
    pub magnitudes: Vec<f64>,
    pub description: String,
}

impl AmbiguitySurface {
    pub fn magnitude(&self, theta_index: usize, lag_index: usize) -> f64 {
        self.magnitudes[theta_index * self.lags.len() + lag_index]
    }

    pub fn row(&self, theta_index: usize) -> &[f64] {
        let w = self.lags.len();
        &self.magnitudes[theta_index * w..(theta_index + 1) * w]
    }

    /// `max_{k≠0} |g(k, θ_t)|`.
    pub fn max_sidelobe(&self, theta_index: usize) -> f64 {
        self.row(theta_index)
            .iter()
            .zip(&self.lags)
            .filter(|&(_, &lag)| lag != 0)
            .map(|(m, _)| *m)
            .fold(0.0, f64::max)
    }

    /// CSV with header `theta,k,magnitude`, theta outer, lag inner.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,k,magnitude\n");
        for (t, theta) in self.thetas.iter().enumerate() {
            for (l, lag) in self.lags.iter().enumerate() {
                let _ = writeln!(out, "{theta:.11e},{lag},{}", self.magnitude(t, l));
            }
        }
        out
    }

    pub fn from_csv(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::Format(e.to_string()))?
            .unwrap_or_default();
        if header.trim() != "theta,k,magnitude" {
            return Err(Error::Format(format!("unexpected CSV header {header:?}")));
        }
        let mut thetas: Vec<f64> = Vec::new();
        let mut lags: Vec<i64> = Vec::new();
        let mut magnitudes = Vec::new();
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Format(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Format(format!("malformed CSV row {}: {line:?}", row + 2));
            let mut fields = line.split(',');
            let theta: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            let lag: i64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            let mag: f64 = fields.next().and_then(|f| f.parse().ok()).ok_or_else(bad)?;
            if fields.next().is_some() {
                return Err(bad());
            }
            if thetas.last() != Some(&theta) {
                thetas.push(theta);
            }
            if thetas.len() == 1 {
                lags.push(lag);
            }
            magnitudes.push(mag);
        }
        if lags.is_empty() || magnitudes.len() != thetas.len() * lags.len() {
            return Err(Error::Format(
                "CSV rows do not form a full theta x lag grid".into(),
            ));
        }
        Ok(Self {
            thetas,
            lags,
            magnitudes,
            description: String::new(),
        })
    }
}

/// Samples `|g(k, θ)|` at `steps` evenly spaced phases in
/// `[theta_min, theta_max]` for every lag.
pub fn ambiguity_surface(
    train: &PulseTrain,
    theta_min: f64,
    theta_max: f64,
    steps: usize,
) -> Result<AmbiguitySurface> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 theta steps, got {steps}"
        )));
    }
    if !(theta_min.is_finite() && theta_max.is_finite()) || theta_max < theta_min {
        return Err(Error::InvalidParameter(format!(
            "invalid theta range [{theta_min}, {theta_max}]"
        )));
    }
    let n = train.ccm.code_len() as i64;
    let lags: Vec<i64> = (-(n - 1)..=(n - 1)).collect();
    let step = (theta_max - theta_min) / (steps - 1) as f64;
    let thetas: Vec<f64> = (0..steps).map(|i| theta_min + step * i as f64).collect();

    let k = train.ccm.code_count();
    let mut magnitudes = Vec::with_capacity(steps * lags.len());
    for &theta in &thetas {
        // Phasor sums per code, accumulated in pulse order.
        let mut phasors = vec![Complex64::new(0.0, 0.0); k];
        for (slot, c) in train.slots() {
            phasors[c] += Complex64::from_polar(1.0, slot as f64 * theta);
        }
        for &lag in &lags {
            let g: Complex64 = phasors
                .iter()
                .enumerate()
                .map(|(c, ph)| ph * train.ccm.acf(c).at(lag))
                .sum();
            magnitudes.push(g.norm());
        }
    }
    let description = format!(
        "L={} K={} N={} delay={}{}",
        train.len(),
        k,
        n,
        train.delay,
        train
            .ptm_order()
            .map(|m| format!(" ptmOrder={m}"))
            .unwrap_or_default()
    );
    Ok(AmbiguitySurface {
        thetas,
        lags,
        magnitudes,
        description,
    })
}

/// Train file layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TrainFile {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    ptm_order: Option<usize>,
    delay: u64,
    indices: Vec<usize>,
    codes: CodeSetFile,
}

impl Serialize for PulseTrain {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrainFile {
            k: self.ccm.code_count(),
            n: self.ccm.code_len(),
            ptm_order: self.ptm_order(),
            delay: self.delay,
            indices: self.indices.clone(),
            codes: CodeSetFile::from_codes(self.ccm.columns()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PulseTrain {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = TrainFile::deserialize(d)?;
        let codes = file.codes.to_codes().map_err(D::Error::custom)?;
        let ccm = Ccm::new(codes).map_err(D::Error::custom)?;
        if ccm.code_count() != file.k || ccm.code_len() != file.n {
            return Err(D::Error::custom("K/N do not match the embedded code set"));
        }
        PulseTrain::new(ccm, file.indices, file.delay).map_err(D::Error::custom)
    }
}
