//! Exact integer machinery behind the PTM construction.
//!
//! Digit sums modulo `p`, generalized Prouhet-Thue-Morse sequences and
//! block partitions, power sums and Prouhet sums, a bounded search for
//! partitions with equal sums of like powers, and the Rademacher-style
//! weight transform used to isolate sidelobes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest PTM length materialized by [`ptm_partition`].
pub const MAX_PTM_LENGTH: u64 = 1 << 24;

/// Largest symbol count accepted by [`weight_table`].
pub const MAX_WEIGHT_TABLE_P: usize = 20;

fn check_base(p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!(
            "base p = {p} must be at least 2"
        )));
    }
    Ok(())
}

/// Base-`p` digit sum of `n` reduced mod `p`, without argument checks.
#[inline]
pub(crate) fn vp(mut n: u64, p: u64) -> u64 {
    let mut sum = 0u64;
    while n > 0 {
        sum += n % p;
        n /= p;
    }
    sum % p
}

/// Sum of the base-`p` digits of `n`, reduced to the least nonnegative
/// residue mod `p`.
pub fn digit_sum_mod(n: u64, p: usize) -> Result<u64> {
    check_base(p)?;
    Ok(vp(n, p as u64))
}

/// First `length` terms of the mod-`p` Prouhet-Thue-Morse sequence.
pub fn ptm_sequence(p: usize, length: usize) -> Result<Vec<u64>> {
    check_base(p)?;
    Ok((0..length as u64).map(|n| vp(n, p as u64)).collect())
}

/// `p^(degree + 1)` with overflow and size checks.
pub fn ptm_length(p: usize, degree: usize) -> Result<u64> {
    check_base(p)?;
    let exp = u32::try_from(degree + 1)
        .map_err(|_| Error::Overflow(format!("degree {degree} too large")))?;
    let len = (p as u64)
        .checked_pow(exp)
        .ok_or_else(|| Error::Overflow(format!("{p}^{exp} does not fit in 64 bits")))?;
    if len > MAX_PTM_LENGTH {
        return Err(Error::Overflow(format!(
            "{p}^{exp} = {len} exceeds the supported length {MAX_PTM_LENGTH}"
        )));
    }
    Ok(len)
}

/// Exact `Σ n^m` over a multiset, with `0^0 = 1`.
pub fn power_sum(values: &[u64], m: u32) -> Result<i128> {
    values.iter().try_fold(0i128, |acc, &n| {
        (n as i128)
            .checked_pow(m)
            .and_then(|t| acc.checked_add(t))
            .ok_or_else(|| Error::Overflow(format!("power sum of degree {m}")))
    })
}

/// Power sums `P_0..=P_degree` of one block.
fn power_sums(values: &[u64], degree: usize) -> Result<Vec<i128>> {
    (0..=degree).map(|m| power_sum(values, m as u32)).collect()
}

/// Partition of `{0, .., p^(M+1) - 1}` by digit sum: `n` lands in block
/// `v_p(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtmPartition {
    p: usize,
    degree: usize,
    blocks: Vec<Vec<u64>>,
}

impl PtmPartition {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Total size `L = p^(M+1)`.
    pub fn len(&self) -> u64 {
        self.blocks.iter().map(|b| b.len() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    /// Prouhet sums `P_0..=P_M`, taken from block 0.
    pub fn prouhet_sums(&self) -> Result<Vec<i128>> {
        power_sums(&self.blocks[0], self.degree)
    }

    /// The same blocks viewed as an ESP partition of degree `M`.
    pub fn to_esp(&self) -> Result<EspPartition> {
        EspPartition::new(self.blocks.clone(), self.degree)
    }
}

impl Serialize for PtmPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let sums = self.prouhet_sums().map_err(serde::ser::Error::custom)?;
        PartitionRecord {
            p: self.p,
            degree: self.degree,
            blocks: self.blocks.clone(),
            prouhet_sums: sums,
        }
        .serialize(s)
    }
}

pub fn ptm_partition(p: usize, degree: usize) -> Result<PtmPartition> {
    let len = ptm_length(p, degree)?;
    let mut blocks = vec![Vec::with_capacity((len / p as u64) as usize); p];
    for n in 0..len {
        blocks[vp(n, p as u64) as usize].push(n);
    }
    Ok(PtmPartition { p, degree, blocks })
}

/// An `m`-th Prouhet sum together with whether `m` lies inside the degree
/// for which equality across blocks is guaranteed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProuhetSum {
    pub value: i128,
    pub within_degree: bool,
}

/// `P_m(p, M)`: the `m`-th power sum of block 0 of the PTM partition.
///
/// Orders above `M` are computed but flagged, since the blocks need not
/// agree there.
pub fn prouhet_sum(p: usize, degree: usize, m: u32) -> Result<ProuhetSum> {
    let partition = ptm_partition(p, degree)?;
    Ok(ProuhetSum {
        value: power_sum(&partition.blocks[0], m)?,
        within_degree: (m as usize) <= degree,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EspCheck {
    /// Power sums agree across blocks for every `m` in `1..=M`.
    pub is_esp: bool,
    /// All blocks have the same cardinality (agreement at `m = 0`).
    pub balanced: bool,
    /// `P_0..=P_M` of block 0.
    pub prouhet_sums: Vec<i128>,
}

pub fn esp_check(blocks: &[Vec<u64>], degree: usize) -> Result<EspCheck> {
    if blocks.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "ESP check needs at least 2 blocks, got {}",
            blocks.len()
        )));
    }
    let sums = blocks
        .iter()
        .map(|b| power_sums(b, degree))
        .collect::<Result<Vec<_>>>()?;
    let reference = &sums[0];
    let is_esp = sums.iter().all(|s| s[1..] == reference[1..]);
    let balanced = sums.iter().all(|s| s[0] == reference[0]);
    Ok(EspCheck {
        is_esp,
        balanced,
        prouhet_sums: reference.clone(),
    })
}

/// A family of blocks (multisets, sorted ascending) with equal cardinality
/// and equal power sums up to `degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EspPartition {
    blocks: Vec<Vec<u64>>,
    degree: usize,
    prouhet_sums: Vec<i128>,
}

impl EspPartition {
    pub fn new(mut blocks: Vec<Vec<u64>>, degree: usize) -> Result<Self> {
        for b in &mut blocks {
            b.sort_unstable();
        }
        let check = esp_check(&blocks, degree)?;
        if !(check.is_esp && check.balanced) {
            return Err(Error::NotEsp { degree });
        }
        Ok(Self {
            blocks,
            degree,
            prouhet_sums: check.prouhet_sums,
        })
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn prouhet_sums(&self) -> &[i128] {
        &self.prouhet_sums
    }

    /// Largest value in any block.
    pub fn max_value(&self) -> Option<u64> {
        self.blocks.iter().filter_map(|b| b.last().copied()).max()
    }

    /// Number of values summed over all blocks (with multiplicity).
    pub fn total_size(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }
}

/// JSON shape shared by PTM and ESP partitions.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PartitionRecord {
    p: usize,
    #[serde(rename = "M")]
    degree: usize,
    blocks: Vec<Vec<u64>>,
    #[serde(rename = "prouhetSums")]
    prouhet_sums: Vec<i128>,
}

impl Serialize for EspPartition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PartitionRecord {
            p: self.blocks.len(),
            degree: self.degree,
            blocks: self.blocks.clone(),
            prouhet_sums: self.prouhet_sums.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EspPartition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let rec = PartitionRecord::deserialize(d)?;
        if rec.p != rec.blocks.len() {
            return Err(D::Error::custom(format!(
                "p = {} but {} blocks given",
                rec.p,
                rec.blocks.len()
            )));
        }
        let partition = EspPartition::new(rec.blocks, rec.degree).map_err(D::Error::custom)?;
        if !rec.prouhet_sums.is_empty() && rec.prouhet_sums != partition.prouhet_sums {
            return Err(D::Error::custom("prouhetSums do not match the blocks"));
        }
        Ok(partition)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EspSearchConfig {
    /// Universes larger than this are rejected.
    pub max_universe: usize,
}

impl Default for EspSearchConfig {
    fn default() -> Self {
        Self { max_universe: 30 }
    }
}

/// Exhaustive search for balanced `p`-block partitions of `universe` with
/// equal power sums up to `degree`.
///
/// Depth-first over the sorted universe. A block is never allowed to exceed
/// the per-block target power sums, a full block must hit them exactly, and
/// blocks are opened in order so that each solution is produced once (block
/// 0 always holds the minimum). Results come out in lexicographic order of
/// the assignment and stop after `max_solutions`.
pub fn esp_search(
    universe: &[u64],
    p: usize,
    degree: usize,
    max_solutions: usize,
    config: &EspSearchConfig,
) -> Result<Vec<EspPartition>> {
    check_base(p)?;
    let mut elems = universe.to_vec();
    elems.sort_unstable();
    elems.dedup();
    if elems.len() > config.max_universe {
        return Err(Error::SearchSpaceTooLarge {
            size: elems.len(),
            limit: config.max_universe,
        });
    }
    if !elems.len().is_multiple_of(p) {
        return Err(Error::InvalidParameter(format!(
            "universe of {} elements cannot be split into {p} equal blocks",
            elems.len()
        )));
    }
    if elems.is_empty() || max_solutions == 0 {
        return Ok(Vec::new());
    }

    let powers = elems
        .iter()
        .map(|&n| power_sums(&[n], degree).map(|v| v[1..].to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let mut targets = vec![0i128; degree];
    for row in &powers {
        for (t, v) in targets.iter_mut().zip(row) {
            *t = t
                .checked_add(*v)
                .ok_or_else(|| Error::Overflow("universe power sums".into()))?;
        }
    }
    if targets.iter().any(|t| t % p as i128 != 0) {
        return Ok(Vec::new());
    }
    for t in &mut targets {
        *t /= p as i128;
    }

    // prefix[j][d] = Σ_{t<j} powers[t][d]; powers rise with the sorted elements
    let mut prefix = vec![vec![0i128; degree]; elems.len() + 1];
    for (j, row) in powers.iter().enumerate() {
        for d in 0..degree {
            prefix[j + 1][d] = prefix[j][d]
                .checked_add(row[d])
                .ok_or_else(|| Error::Overflow("universe power sums".into()))?;
        }
    }

    let mut search = EspDfs {
        elems: &elems,
        powers: &powers,
        prefix: &prefix,
        targets: &targets,
        block_size: elems.len() / p,
        sums: vec![vec![0i128; degree]; p],
        members: vec![Vec::new(); p],
        max_solutions,
        found: Vec::new(),
    };
    search.descend(0, 0);

    search
        .found
        .into_iter()
        .map(|blocks| EspPartition::new(blocks, degree))
        .collect()
}

struct EspDfs<'a> {
    elems: &'a [u64],
    powers: &'a [Vec<i128>],
    prefix: &'a [Vec<i128>],
    targets: &'a [i128],
    block_size: usize,
    sums: Vec<Vec<i128>>,
    members: Vec<Vec<u64>>,
    max_solutions: usize,
    found: Vec<Vec<Vec<u64>>>,
}

impl EspDfs<'_> {
    /// Every block can still land on its targets using the elements from
    /// `next` on: the `r` smallest remaining give a floor, the `r` largest a
    /// ceiling.
    fn reachable(&self, next: usize) -> bool {
        let n = self.elems.len();
        self.members.iter().zip(&self.sums).all(|(members, sums)| {
            let r = self.block_size - members.len();
            if r == 0 {
                return true;
            }
            let lo = &self.prefix[next + r];
            let lo0 = &self.prefix[next];
            let hi = &self.prefix[n];
            let hi0 = &self.prefix[n - r];
            (0..sums.len()).all(|d| {
                let need = self.targets[d] - sums[d];
                lo[d] - lo0[d] <= need && need <= hi[d] - hi0[d]
            })
        })
    }

    fn descend(&mut self, i: usize, opened: usize) {
        if self.found.len() >= self.max_solutions {
            return;
        }
        if i == self.elems.len() {
            self.found.push(self.members.clone());
            return;
        }
        let p = self.members.len();
        let limit = (opened + 1).min(p);
        for b in 0..limit {
            if self.members[b].len() == self.block_size {
                continue;
            }
            let fits = self.sums[b]
                .iter()
                .zip(&self.powers[i])
                .zip(self.targets)
                .all(|((s, v), t)| s + v <= *t);
            if !fits {
                continue;
            }
            let closes = self.members[b].len() + 1 == self.block_size;
            if closes
                && !self.sums[b]
                    .iter()
                    .zip(&self.powers[i])
                    .zip(self.targets)
                    .all(|((s, v), t)| s + v == *t)
            {
                continue;
            }
            for (s, v) in self.sums[b].iter_mut().zip(&self.powers[i]) {
                *s += v;
            }
            self.members[b].push(self.elems[i]);
            if self.reachable(i + 1) {
                self.descend(i + 1, opened.max(b + 1));
            }
            self.members[b].pop();
            for (s, v) in self.sums[b].iter_mut().zip(&self.powers[i]) {
                *s -= v;
            }
            if self.found.len() >= self.max_solutions {
                return;
            }
        }
    }
}

/// Sign table `w_i(v)` for `i < 2^(p-1)` and residues `v < p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightTable {
    p: usize,
    rows: Vec<Vec<i8>>,
}

impl WeightTable {
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of rows, `2^(p-1)`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    /// Row `i` evaluated at residue `v < p`.
    pub fn sign(&self, i: usize, v: usize) -> i8 {
        self.rows[i][v]
    }

    /// `w_i(n)`: row `i` evaluated at `v_p(n)`.
    pub fn weight(&self, i: usize, n: u64) -> i8 {
        self.rows[i][vp(n, self.p as u64) as usize]
    }
}

/// Builds the table with row `i`, column `v` equal to `(-1)^(bit p-1-v of i)`.
pub fn weight_table(p: usize) -> Result<WeightTable> {
    if !(2..=MAX_WEIGHT_TABLE_P).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "weight table needs 2 <= p <= {MAX_WEIGHT_TABLE_P}, got {p}"
        )));
    }
    let rows = (0..1usize << (p - 1))
        .map(|i| {
            (0..p)
                .map(|v| if (i >> (p - 1 - v)) & 1 == 1 { -1 } else { 1 })
                .collect()
        })
        .collect();
    Ok(WeightTable { p, rows })
}

/// `B_i = Σ_n w_i(n) A_n` for `i < 2^(p-1)`.
pub fn forward_transform(a: &[Complex64], table: &WeightTable) -> Result<Vec<Complex64>> {
    if a.len() != table.p {
        return Err(Error::LengthMismatch {
            expected: table.p,
            found: a.len(),
        });
    }
    Ok(table
        .rows
        .iter()
        .map(|row| a.iter().zip(row).map(|(x, &s)| x * f64::from(s)).sum())
        .collect())
}

/// `A_n = 2^(1-p) Σ_i w_i(n) B_i`.
pub fn inverse_transform(b: &[Complex64], table: &WeightTable) -> Result<Vec<Complex64>> {
    if b.len() != table.rows.len() {
        return Err(Error::LengthMismatch {
            expected: table.rows.len(),
            found: b.len(),
        });
    }
    let scale = 1.0 / table.rows.len() as f64;
    Ok((0..table.p)
        .map(|v| {
            let acc: Complex64 = table
                .rows
                .iter()
                .zip(b)
                .map(|(row, x)| x * f64::from(row[v]))
                .sum();
            acc * scale
        })
        .collect())
}

/// One order of the sidelobe-isolation identity `Σ n^m S_p(n) = N_m B_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitTerm {
    pub order: usize,
    /// `N_m = 2^(p-1) P_m - Σ_{n<L} n^m`.
    pub n_coeff: i128,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// `|lhs - rhs|` relative to the magnitude of the summed terms.
    pub residual: f64,
}

/// Evaluates both sides of `Σ_{n<L} n^m S_p(n) = N_m B_0` for `m = 1..=M`,
/// where `S_p(n) = Σ_{i>=1} w_i(n) B_i` and `B = forward_transform(A)`.
pub fn sidelobe_split_check(a: &[Complex64], p: usize, degree: usize) -> Result<Vec<SplitTerm>> {
    let table = weight_table(p)?;
    let b = forward_transform(a, &table)?;
    let len = ptm_length(p, degree)?;
    let partition = ptm_partition(p, degree)?;
    let rows = table.len();

    // S_p(n) depends on n only through v_p(n).
    let s_by_residue: Vec<Complex64> = (0..p)
        .map(|v| (1..rows).map(|i| b[i] * f64::from(table.sign(i, v))).sum())
        .collect();
    let b_tail: f64 = b[1..].iter().map(|x| x.norm()).sum();
    let all: Vec<u64> = (0..len).collect();

    (1..=degree)
        .map(|m| {
            let m32 = m as u32;
            let prouhet = power_sum(&partition.blocks[0], m32)?;
            let total = power_sum(&all, m32)?;
            let n_coeff = prouhet
                .checked_mul(rows as i128)
                .and_then(|x| x.checked_sub(total))
                .ok_or_else(|| Error::Overflow(format!("N_{m}")))?;

            let mut lhs = Complex64::new(0.0, 0.0);
            let mut scale = 0.0;
            for n in 0..len {
                let w = (n as f64).powi(m as i32);
                let s = s_by_residue[vp(n, p as u64) as usize];
                lhs += s * w;
                scale += w * b_tail;
            }
            let rhs = b[0] * n_coeff as f64;
            scale += rhs.norm();
            let diff = (lhs - rhs).norm();
            let residual = if scale > 0.0 { diff / scale } else { diff };
            Ok(SplitTerm {
                order: m,
                n_coeff,
                lhs,
                rhs,
                residual,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn digit_sums() {
        assert_eq!(digit_sum_mod(3, 2).unwrap(), 0);
        assert_eq!(digit_sum_mod(5, 3).unwrap(), 0);
        assert_eq!(digit_sum_mod(7, 10).unwrap(), 7);
        assert_eq!(digit_sum_mod(0, 2).unwrap(), 0);
        assert!(digit_sum_mod(4, 1).is_err());
        assert!(digit_sum_mod(4, 0).is_err());
    }

    #[test]
    fn ptm_sequence_prefixes() {
        assert_eq!(
            ptm_sequence(2, 16).unwrap(),
            [0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0]
        );
        assert_eq!(
            ptm_sequence(3, 18).unwrap(),
            [0, 1, 2, 1, 2, 0, 2, 0, 1, 1, 2, 0, 2, 0, 1, 0, 1, 2]
        );
        assert_eq!(
            ptm_sequence(4, 20).unwrap(),
            [0, 1, 2, 3, 1, 2, 3, 0, 2, 3, 0, 1, 3, 0, 1, 2, 1, 2, 3, 0]
        );
        assert!(ptm_sequence(2, 0).unwrap().is_empty());
    }

    #[test]
    fn ptm_partition_blocks() {
        let part = ptm_partition(2, 3).unwrap();
        assert_eq!(part.blocks()[0], [0, 3, 5, 6, 9, 10, 12, 15]);
        assert_eq!(part.blocks()[1], [1, 2, 4, 7, 8, 11, 13, 14]);
        assert_eq!(part.len(), 16);

        let part = ptm_partition(3, 2).unwrap();
        assert_eq!(part.blocks()[0], [0, 5, 7, 11, 13, 15, 19, 21, 26]);
        assert_eq!(part.blocks()[1], [1, 3, 8, 9, 14, 16, 20, 22, 24]);
        assert_eq!(part.blocks()[2], [2, 4, 6, 10, 12, 17, 18, 23, 25]);
    }

    #[test]
    fn ptm_partition_overflow() {
        assert!(matches!(ptm_partition(2, 70), Err(Error::Overflow(_))));
        assert!(matches!(ptm_partition(10, 12), Err(Error::Overflow(_))));
        assert!(ptm_partition(1, 2).is_err());
    }

    #[test]
    fn power_sums() {
        assert_eq!(power_sum(&[0, 3, 5, 6, 9, 10, 12, 15], 1).unwrap(), 60);
        assert_eq!(power_sum(&[], 3).unwrap(), 0);
        assert_eq!(power_sum(&[0, 4, 5], 2).unwrap(), 41);
        assert_eq!(power_sum(&[1, 2, 6], 2).unwrap(), 41);
        assert_eq!(power_sum(&[0, 0, 7], 0).unwrap(), 3);
        assert!(matches!(power_sum(&[u64::MAX], 3), Err(Error::Overflow(_))));
    }

    #[test]
    fn prouhet_sums() {
        assert_eq!(prouhet_sum(2, 3, 1).unwrap().value, 60);
        assert_eq!(prouhet_sum(3, 2, 0).unwrap().value, 9);
        let s0 = power_sum(&[0, 3, 5, 6, 9, 10, 12, 15], 2).unwrap();
        let s1 = power_sum(&[1, 2, 4, 7, 8, 11, 13, 14], 2).unwrap();
        assert_eq!(s0, s1);
        assert_eq!(prouhet_sum(2, 3, 2).unwrap().value, s0);
        let above = prouhet_sum(2, 3, 4).unwrap();
        assert!(!above.within_degree);
    }

    #[test]
    fn esp_known_partitions() {
        assert!(
            esp_check(&[vec![0, 4, 5], vec![1, 2, 6]], 2)
                .unwrap()
                .is_esp
        );
        assert!(
            !esp_check(&[vec![0, 4, 5], vec![1, 2, 6]], 3)
                .unwrap()
                .is_esp
        );
        assert!(
            esp_check(&[vec![0, 4, 7, 11], vec![1, 2, 9, 10]], 3)
                .unwrap()
                .is_esp
        );
        let six = esp_check(&[vec![0, 5, 6, 16, 17, 22], vec![1, 2, 10, 12, 20, 21]], 5).unwrap();
        assert!(six.is_esp && six.balanced);
        assert_eq!(six.prouhet_sums[0], 6);
        assert_eq!(six.prouhet_sums[1], 66);
    }

    #[test]
    fn esp_check_degenerate_inputs() {
        assert!(esp_check(&[vec![0, 1]], 1).is_err());
        // Zeros do not move the sums for m >= 1, only the cardinality.
        let r = esp_check(&[vec![0, 1, 2], vec![1, 2]], 4).unwrap();
        assert!(r.is_esp);
        assert!(!r.balanced);
        assert!(EspPartition::new(vec![vec![0, 1, 2], vec![1, 2]], 4).is_err());
    }

    #[test]
    fn esp_search_examples() {
        let cfg = EspSearchConfig::default();
        let found = esp_search(&[0, 1, 2, 4, 5, 6], 2, 2, 10, &cfg).unwrap();
        assert!(found
            .iter()
            .any(|p| p.blocks() == [vec![0, 4, 5], vec![1, 2, 6]]));

        assert!(esp_search(&[0, 1], 2, 1, 10, &cfg).unwrap().is_empty());

        let all: Vec<u64> = (0..8).collect();
        let found = esp_search(&all, 2, 2, 100, &cfg).unwrap();
        assert!(found
            .iter()
            .any(|p| p.blocks() == [vec![0, 3, 5, 6], vec![1, 2, 4, 7]]));

        assert!(esp_search(&[0, 1, 2, 3], 2, 3, 10, &cfg)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn esp_search_limits() {
        let big: Vec<u64> = (0..32).collect();
        assert!(matches!(
            esp_search(&big, 2, 2, 1, &EspSearchConfig::default()),
            Err(Error::SearchSpaceTooLarge {
                size: 32,
                limit: 30
            })
        ));
        assert!(esp_search(&[0, 1, 2], 2, 1, 1, &EspSearchConfig::default()).is_err());
        let found = esp_search(&(0..8).collect::<Vec<_>>(), 2, 1, 3, &Default::default()).unwrap();
        assert_eq!(found.len(), 3);
    }

    #[test]
    fn weight_tables() {
        let t2 = weight_table(2).unwrap();
        assert_eq!(t2.rows(), [vec![1, 1], vec![1, -1]]);
        // w_1 on p = 2 is the classical +-1 Thue-Morse sequence.
        let classical: Vec<i8> = (0..8u64).map(|n| t2.weight(1, n)).collect();
        assert_eq!(classical, [1, -1, -1, 1, -1, 1, 1, -1]);

        let t3 = weight_table(3).unwrap();
        assert_eq!(t3.rows()[0], [1, 1, 1]);
        assert_eq!(t3.rows()[1], [1, 1, -1]);
        assert_eq!(t3.rows()[2], [1, -1, 1]);
        assert_eq!(t3.rows()[3], [1, -1, -1]);

        assert!(weight_table(1).is_err());
        assert!(weight_table(21).is_err());
        assert_eq!(weight_table(20).unwrap().len(), 1 << 19);
    }

    #[test]
    fn transforms_small_cases() {
        let t2 = weight_table(2).unwrap();
        let b = forward_transform(&[c(1.0, 0.0), c(1.0, 0.0)], &t2).unwrap();
        assert_eq!(b, [c(2.0, 0.0), c(0.0, 0.0)]);
        let a = inverse_transform(&[c(2.0, 0.0), c(0.0, 0.0)], &t2).unwrap();
        assert_eq!(a, [c(1.0, 0.0), c(1.0, 0.0)]);

        let t3 = weight_table(3).unwrap();
        let (a0, a1, a2) = (c(1.0, 2.0), c(-3.0, 0.5), c(0.25, -1.0));
        let b = forward_transform(&[a0, a1, a2], &t3).unwrap();
        assert_eq!(b, [a0 + a1 + a2, a0 + a1 - a2, a0 - a1 + a2, a0 - a1 - a2]);
        let back = inverse_transform(&b, &t3).unwrap();
        assert_eq!(back[0], (b[0] + b[1] + b[2] + b[3]) * 0.25);

        assert!(forward_transform(&[a0, a1], &t3).is_err());
        assert!(inverse_transform(&[a0, a1, a2], &t3).is_err());
    }

    #[test]
    fn split_identity_equal_entries() {
        // p = 2: every B_i with i >= 1 vanishes and N_m = 2 P_m - 2 P_m = 0.
        let a = vec![c(0.5, -1.5); 2];
        for term in sidelobe_split_check(&a, 2, 3).unwrap() {
            assert_eq!(term.n_coeff, 0);
            assert_eq!(term.lhs, c(0.0, 0.0));
            assert_eq!(term.residual, 0.0);
        }
        // p = 3: S_p(n) = A, and N_m = (4 - 3) P_m.
        let a = vec![c(0.5, -1.5); 3];
        for term in sidelobe_split_check(&a, 3, 2).unwrap() {
            let pm = prouhet_sum(3, 2, term.order as u32).unwrap().value;
            assert_eq!(term.n_coeff, pm);
            assert!(term.residual < 1e-12);
        }
    }

    #[test]
    fn split_identity_tri_phase() {
        let a = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)];
        let terms = sidelobe_split_check(&a, 3, 2).unwrap();
        assert_eq!(terms.len(), 2);
        for t in terms {
            assert!(t.residual < 1e-9, "m = {}: {}", t.order, t.residual);
        }
    }
}
