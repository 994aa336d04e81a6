//! Oracles shared by the integration tests. Nothing here calls into the
//! library paths being checked.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut StdRng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_unit(rng: &mut StdRng) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Digit sum mod p by writing `n` out in base p, most significant first.
pub fn digit_sum_oracle(n: u64, p: u64) -> u64 {
    let mut digits = Vec::new();
    let mut m = n;
    loop {
        digits.push(m % p);
        m /= p;
        if m == 0 {
            break;
        }
    }
    digits.iter().rev().sum::<u64>() % p
}

/// Aperiodic autocorrelation as the full convolution `x * reverse(conj(x))`,
/// returned for lags `-(N-1)..=(N-1)`.
pub fn acf_by_convolution(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let rev: Vec<Complex64> = x.iter().rev().map(|v| v.conj()).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            out[i + j] += x[i] * rev[j];
        }
    }
    // Convolution index i + j = N - 1 - k for ACF(k) = Σ x[i] conj(x[i+k]).
    out.reverse();
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `g(k, θ)` summed pulse by pulse from raw code entries.
pub fn ambiguity_oracle(
    codes: &[Vec<Complex64>],
    slots: &[(u64, usize)],
    lag: i64,
    theta: f64,
) -> Complex64 {
    let mut g = Complex64::new(0.0, 0.0);
    for &(slot, c) in slots {
        let acf = acf_by_convolution(&codes[c]);
        let n = codes[c].len() as i64;
        g += Complex64::from_polar(1.0, slot as f64 * theta) * acf[(lag + n - 1) as usize];
    }
    g
}

/// Exact `Σ n^m` in i128.
pub fn power_sum_oracle(values: &[u64], m: u32) -> i128 {
    values.iter().map(|&v| (v as i128).pow(m)).sum()
}

/// Code sets for the null-order sweep, built from the library generators:
/// Golay pairs for K = 2, DFT-3 for K = 3, DFT-4 or a doubled Golay pair
/// for K = 4.
pub fn sweep_ccm(k: usize, n: usize) -> Option<doppler_ccm::codes::Ccm> {
    use doppler_ccm::codes::{gen_dft_set, gen_golay_pair, Ccm};
    let golay = |n: usize| gen_golay_pair(n.trailing_zeros()).ok();
    match (k, n) {
        (2, 4 | 8) => golay(n),
        (3, 3) => gen_dft_set(3).ok(),
        (4, 4) => gen_dft_set(4).ok(),
        (4, 8) => {
            let pair = golay(8)?;
            let cols = [0, 1, 0, 1]
                .iter()
                .map(|&c| pair.column(c).clone())
                .collect();
            Ccm::new(cols).ok()
        }
        _ => None,
    }
}

/// `(K, N)` pairs covered by [`sweep_ccm`].
pub const SWEEP: [(usize, usize); 5] = [(2, 4), (2, 8), (3, 3), (4, 4), (4, 8)];

/// Published mod-4 PTM order for 64 pulses, transcribed by hand.
pub const PTM_K4_M2: [usize; 64] = [
    0, 1, 2, 3, 1, 2, 3, 0, 2, 3, 0, 1, 3, 0, 1, 2, 1, 2, 3, 0, 2, 3, 0, 1, 3, 0, 1, 2, 0, 1, 2, 3,
    2, 3, 0, 1, 3, 0, 1, 2, 0, 1, 2, 3, 1, 2, 3, 0, 3, 0, 1, 2, 0, 1, 2, 3, 1, 2, 3, 0, 2, 3, 0, 1,
];
