//! Staggered multi-antenna schedules from partitions with equal sums of
//! like powers.
//!
//! A partition `S_0..S_{K-1}` of slot numbers with equal power sums up to
//! degree `M` is first padded so that every slot up to the horizon is used:
//! any missing slot is added to all blocks, which keeps the power sums
//! equal. Slot `t` then demands code `c` once for every occurrence of `t`
//! in `S_c`. The demands are split into contiguous per-antenna trains with
//! delays, and the summed ambiguity of those trains has the same Taylor
//! nulls as the partition's degree.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::codes::{Ccm, CodeSetFile};
use crate::doppler::{build_ptm_train, taylor_coeffs, taylor_from_slots, TaylorReport};
use crate::error::{Error, Result};
use crate::numtheory::{esp_search, ptm_length, EspPartition, EspSearchConfig};

pub const DEFAULT_ANTENNA_CAP: usize = 8;

/// One antenna's contiguous train starting at slot `delay`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lane {
    pub delay: u64,
    pub indices: Vec<usize>,
}

impl Lane {
    /// One past the last slot used.
    pub fn end(&self) -> u64 {
        self.delay + self.indices.len() as u64
    }
}

/// Smallest horizon containing every value of the partition.
pub fn default_horizon(partition: &EspPartition) -> u64 {
    partition.max_value().map_or(0, |m| m + 1)
}

/// Adds every slot of `0..horizon` that no block uses to all blocks.
pub fn pad_partition(partition: &EspPartition, horizon: u64) -> Result<EspPartition> {
    if let Some(max) = partition.max_value().filter(|&m| m >= horizon) {
        return Err(Error::InvalidParameter(format!(
            "partition value {max} lies outside the horizon 0..{horizon}"
        )));
    }
    let mut used = vec![false; horizon as usize];
    for v in partition.blocks().iter().flatten() {
        used[*v as usize] = true;
    }
    let missing: Vec<u64> = (0..horizon).filter(|&t| !used[t as usize]).collect();
    let blocks = partition
        .blocks()
        .iter()
        .map(|b| {
            let mut b = b.clone();
            b.extend_from_slice(&missing);
            b
        })
        .collect();
    EspPartition::new(blocks, partition.degree())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaggerPlan {
    ccm: Ccm,
    horizon: u64,
    lanes: Vec<Lane>,
    partition: EspPartition,
}

impl StaggerPlan {
    pub fn ccm(&self) -> &Ccm {
        &self.ccm
    }

    /// Slot count `D`.
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn degree(&self) -> usize {
        self.partition.degree()
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    /// The padded partition the lanes were cut from.
    pub fn partition(&self) -> &EspPartition {
        &self.partition
    }

    pub fn total_pulses(&self) -> usize {
        self.lanes.iter().map(|l| l.indices.len()).sum()
    }

    /// Slots from the first to the last transmitted pulse.
    pub fn span(&self) -> u64 {
        let start = self.lanes.iter().map(|l| l.delay).min().unwrap_or(0);
        let end = self.lanes.iter().map(Lane::end).max().unwrap_or(0);
        end - start
    }

    /// `(slot, code)` for every pulse on every lane.
    pub fn slots(&self) -> impl Iterator<Item = (u64, usize)> + Clone + '_ {
        self.lanes.iter().flat_map(|lane| {
            lane.indices
                .iter()
                .enumerate()
                .map(move |(n, &c)| (lane.delay + n as u64, c))
        })
    }

    /// Checks that lanes transmit each code in each slot exactly as often
    /// as the slot occurs in that code's block, and fit in the horizon.
    pub fn verify(&self) -> Result<()> {
        let k = self.ccm.code_count();
        if self.partition.block_count() != k {
            return Err(Error::InvalidParameter(format!(
                "{} blocks for {k} codes",
                self.partition.block_count()
            )));
        }
        let d = self.horizon as usize;
        let mut want = vec![vec![0usize; k]; d];
        for (c, block) in self.partition.blocks().iter().enumerate() {
            for &t in block {
                let row = want.get_mut(t as usize).ok_or_else(|| {
                    Error::InvalidParameter(format!("block value {t} beyond horizon {d}"))
                })?;
                row[c] += 1;
            }
        }
        let mut have = vec![vec![0usize; k]; d];
        for lane in &self.lanes {
            if lane.indices.is_empty() {
                return Err(Error::InvalidParameter("empty lane".into()));
            }
            if lane.end() > self.horizon {
                return Err(Error::InvalidParameter(format!(
                    "lane at delay {} runs past horizon {d}",
                    lane.delay
                )));
            }
        }
        for (t, c) in self.slots() {
            if c >= k {
                return Err(Error::IndexOutOfRange { index: c, k });
            }
            have[t as usize][c] += 1;
        }
        if let Some(t) = (0..d).find(|&t| have[t] != want[t]) {
            return Err(Error::InvalidParameter(format!(
                "slot {t}: lanes transmit {:?}, partition demands {:?}",
                have[t], want[t]
            )));
        }
        if self.span() > self.horizon {
            return Err(Error::InvalidParameter("span exceeds horizon".into()));
        }
        Ok(())
    }
}

/// Splits the per-slot code demands of a padded partition into contiguous
/// antenna lanes.
///
/// Slots are swept in order. Lanes stay open while demand lasts; when a
/// slot needs more lanes, new ones open with delay equal to that slot, and
/// when it needs fewer, the longest-running lanes close first. Codes
/// demanded at a slot go to the open lanes in ascending code order, oldest
/// lane first.
pub fn decompose_to_antennas(
    padded: &EspPartition,
    ccm: &Ccm,
    antenna_cap: usize,
) -> Result<StaggerPlan> {
    let k = ccm.code_count();
    if padded.block_count() != k {
        return Err(Error::InvalidParameter(format!(
            "partition has {} blocks but the code set has {k} codes",
            padded.block_count()
        )));
    }
    let horizon = default_horizon(padded);
    let mut demand = vec![Vec::new(); horizon as usize];
    for (c, block) in padded.blocks().iter().enumerate() {
        for &t in block {
            demand[t as usize].push(c);
        }
    }

    let mut lanes: Vec<Lane> = Vec::new();
    let mut open: VecDeque<usize> = VecDeque::new();
    for (t, codes) in demand.iter_mut().enumerate() {
        let t = t as u64;
        if codes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "slot {t} is not covered by any block; pad the partition first"
            )));
        }
        if codes.len() > antenna_cap {
            return Err(Error::AntennaCapExceeded {
                slot: t,
                demand: codes.len(),
                cap: antenna_cap,
            });
        }
        codes.sort_unstable();
        while open.len() > codes.len() {
            open.pop_front();
        }
        while open.len() < codes.len() {
            if lanes.len() == antenna_cap {
                return Err(Error::AntennaCapExceeded {
                    slot: t,
                    demand: lanes.len() + 1,
                    cap: antenna_cap,
                });
            }
            open.push_back(lanes.len());
            lanes.push(Lane {
                delay: t,
                indices: Vec::new(),
            });
        }
        for (&lane, &c) in open.iter().zip(codes.iter()) {
            lanes[lane].indices.push(c);
        }
    }

    let plan = StaggerPlan {
        ccm: ccm.clone(),
        horizon,
        lanes,
        partition: padded.clone(),
    };
    plan.verify()?;
    Ok(plan)
}

/// Pads the partition to its default horizon and decomposes it.
pub fn plan_from_partition(
    partition: &EspPartition,
    ccm: &Ccm,
    antenna_cap: usize,
) -> Result<StaggerPlan> {
    let padded = pad_partition(partition, default_horizon(partition))?;
    decompose_to_antennas(&padded, ccm, antenna_cap)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositeReport {
    #[serde(flatten)]
    pub taylor: TaylorReport,
    #[serde(rename = "totalPulses")]
    pub total_pulses: usize,
    pub span: u64,
}

/// Taylor coefficients of the summed ambiguity over all lanes, each pulse
/// weighted by its absolute slot `(n + d_j)^m`.
pub fn composite_taylor(plan: &StaggerPlan, max_order: usize) -> Result<CompositeReport> {
    Ok(CompositeReport {
        taylor: taylor_from_slots(&plan.ccm, plan.slots(), max_order)?,
        total_pulses: plan.total_pulses(),
        span: plan.span(),
    })
}

/// Two-block ESP partitions with degrees 2, 3 and 5, small enough to
/// schedule directly.
pub fn builtin_partition(degree: usize) -> Option<EspPartition> {
    let blocks = match degree {
        2 => vec![vec![0, 4, 5], vec![1, 2, 6]],
        3 => vec![vec![0, 4, 7, 11], vec![1, 2, 9, 10]],
        5 => vec![vec![0, 5, 6, 16, 17, 22], vec![1, 2, 10, 12, 20, 21]],
        _ => return None,
    };
    EspPartition::new(blocks, degree).ok()
}

/// Finds an ESP partition for `K` codes and degree `M`: the built-in table
/// when `K = 2`, else the first search result over `0..K^(M+1)`.
pub fn find_partition(code_count: usize, degree: usize) -> Result<EspPartition> {
    if code_count == 2 {
        if let Some(p) = builtin_partition(degree) {
            return Ok(p);
        }
    }
    let config = EspSearchConfig::default();
    let len = ptm_length(code_count, degree).map_err(|_| Error::NoEspPartition { degree })?;
    if len as usize > config.max_universe {
        return Err(Error::NoEspPartition { degree });
    }
    let universe: Vec<u64> = (0..len).collect();
    esp_search(&universe, code_count, degree, 1, &config)?
        .into_iter()
        .next()
        .ok_or(Error::NoEspPartition { degree })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScheduleMetrics {
    pub span: u64,
    pub pulses: usize,
    #[serde(rename = "nullOrder")]
    pub null_order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    #[serde(rename = "M")]
    pub degree: usize,
    pub ptm: ScheduleMetrics,
    pub stagger: ScheduleMetrics,
    /// Both schedules reach null order `M`.
    #[serde(rename = "bothNullOrders")]
    pub both_null_orders: bool,
}

/// PTM train of order `M` against the staggered schedule of a degree-`M`
/// partition (given, or from [`find_partition`]).
pub fn compare_ptm_vs_stagger(
    ccm: &Ccm,
    degree: usize,
    partition: Option<&EspPartition>,
    antenna_cap: usize,
) -> Result<Comparison> {
    let partition = match partition {
        Some(p) if p.degree() < degree => return Err(Error::NotEsp { degree }),
        Some(p) => p.clone(),
        None => find_partition(ccm.code_count(), degree)?,
    };
    let train = build_ptm_train(ccm, degree)?;
    let ptm_report = taylor_coeffs(&train, degree)?;
    let plan = plan_from_partition(&partition, ccm, antenna_cap)?;
    let composite = composite_taylor(&plan, degree)?;

    let ptm = ScheduleMetrics {
        span: train.len() as u64,
        pulses: train.len(),
        null_order: ptm_report.null_order,
    };
    let stagger = ScheduleMetrics {
        span: composite.span,
        pulses: composite.total_pulses,
        null_order: composite.taylor.null_order,
    };
    Ok(Comparison {
        degree,
        ptm,
        stagger,
        both_null_orders: ptm_report.reaches(degree) && composite.taylor.reaches(degree),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PlanFile {
    #[serde(rename = "D")]
    horizon: u64,
    #[serde(rename = "M")]
    degree: usize,
    lanes: Vec<Lane>,
    partition: EspPartition,
    codes: CodeSetFile,
}

impl Serialize for StaggerPlan {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlanFile {
            horizon: self.horizon,
            degree: self.degree(),
            lanes: self.lanes.clone(),
            partition: self.partition.clone(),
            codes: CodeSetFile::from_codes(self.ccm.columns()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StaggerPlan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let file = PlanFile::deserialize(d)?;
        if file.degree != file.partition.degree() {
            return Err(D::Error::custom("M does not match the partition degree"));
        }
        let codes = file.codes.to_codes().map_err(D::Error::custom)?;
        let ccm = Ccm::new(codes).map_err(D::Error::custom)?;
        let plan = StaggerPlan {
            ccm,
            horizon: file.horizon,
            lanes: file.lanes,
            partition: file.partition,
        };
        plan.verify().map_err(D::Error::custom)?;
        Ok(plan)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::gen_golay_pair;
    use crate::numtheory::ptm_partition;

    fn esp(blocks: Vec<Vec<u64>>, degree: usize) -> EspPartition {
        EspPartition::new(blocks, degree).unwrap()
    }

    #[test]
    fn padding_examples() {
        let p = pad_partition(&esp(vec![vec![0, 4, 5], vec![1, 2, 6]], 2), 7).unwrap();
        assert_eq!(p.blocks(), [vec![0, 3, 4, 5], vec![1, 2, 3, 6]]);
        assert_eq!(p.degree(), 2);

        let p = pad_partition(&esp(vec![vec![0, 4, 7, 11], vec![1, 2, 9, 10]], 3), 12).unwrap();
        assert_eq!(
            p.blocks(),
            [vec![0, 3, 4, 5, 6, 7, 8, 11], vec![1, 2, 3, 5, 6, 8, 9, 10]]
        );

        let full = esp(vec![vec![0, 3], vec![1, 2]], 1);
        assert_eq!(pad_partition(&full, 4).unwrap(), full);

        assert!(pad_partition(&full, 3).is_err());
    }

    #[test]
    fn degree_five_padding_matches_listed_blocks() {
        let p = pad_partition(&builtin_partition(5).unwrap(), 23).unwrap();
        assert_eq!(
            p.blocks()[0],
            [0, 3, 4, 5, 6, 7, 8, 9, 11, 13, 14, 15, 16, 17, 18, 19, 22]
        );
        assert_eq!(
            p.blocks()[1],
            [1, 2, 3, 4, 7, 8, 9, 10, 11, 12, 13, 14, 15, 18, 19, 20, 21]
        );
    }

    #[test]
    fn two_lane_schedule() {
        let ccm = gen_golay_pair(2).unwrap();
        let plan = plan_from_partition(&builtin_partition(2).unwrap(), &ccm, 8).unwrap();
        assert_eq!(
            plan.lanes(),
            [
                Lane {
                    delay: 0,
                    indices: vec![0, 1, 1, 0]
                },
                Lane {
                    delay: 3,
                    indices: vec![1, 0, 0, 1]
                },
            ]
        );
        assert_eq!(plan.span(), 7);
        assert_eq!(plan.total_pulses(), 8);
        assert_eq!(plan.horizon(), 7);
    }

    #[test]
    fn four_lane_schedule() {
        let ccm = gen_golay_pair(2).unwrap();
        let plan = plan_from_partition(&builtin_partition(3).unwrap(), &ccm, 8).unwrap();
        let delays: Vec<u64> = plan.lanes().iter().map(|l| l.delay).collect();
        assert_eq!(delays, [0, 3, 5, 8]);
        assert!(plan.lanes().iter().all(|l| l.indices.len() == 4));
        assert_eq!(plan.span(), 12);
        assert_eq!(plan.total_pulses(), 16);
    }

    #[test]
    fn ptm_partition_is_a_single_lane() {
        let ccm = gen_golay_pair(2).unwrap();
        let part = ptm_partition(2, 2).unwrap().to_esp().unwrap();
        let plan = plan_from_partition(&part, &ccm, 8).unwrap();
        assert_eq!(plan.lanes().len(), 1);
        assert_eq!(plan.lanes()[0].delay, 0);
        assert_eq!(plan.lanes()[0].indices, [0, 1, 1, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn antenna_cap_enforced() {
        let ccm = gen_golay_pair(2).unwrap();
        let padded = pad_partition(&builtin_partition(3).unwrap(), 12).unwrap();
        assert!(matches!(
            decompose_to_antennas(&padded, &ccm, 1),
            Err(Error::AntennaCapExceeded {
                slot: 3,
                demand: 2,
                cap: 1
            })
        ));
        assert!(matches!(
            decompose_to_antennas(&padded, &ccm, 3),
            Err(Error::AntennaCapExceeded {
                slot: 8,
                demand: 4,
                cap: 3
            })
        ));
        assert!(decompose_to_antennas(&padded, &ccm, 4).is_ok());
    }

    #[test]
    fn decompose_needs_cover_and_matching_k() {
        let ccm = gen_golay_pair(2).unwrap();
        let unpadded = builtin_partition(2).unwrap();
        assert!(decompose_to_antennas(&unpadded, &ccm, 8).is_err());
        let three = esp(vec![vec![0, 5], vec![1, 4], vec![2, 3]], 1);
        assert!(decompose_to_antennas(&three, &ccm, 8).is_err());
    }

    #[test]
    fn composite_nulls() {
        let ccm = gen_golay_pair(3).unwrap();
        for degree in [2, 3, 5] {
            let plan = plan_from_partition(&builtin_partition(degree).unwrap(), &ccm, 8).unwrap();
            let r = composite_taylor(&plan, degree).unwrap();
            assert!(
                r.taylor.reaches(degree),
                "degree {degree}: {:?}",
                r.taylor.null_order
            );
            // c_m(0) = P_m · N · K
            for m in 0..=degree {
                let expected = plan.partition().prouhet_sums()[m] as f64 * 16.0;
                let got = r.taylor.coeff(m, 0).re;
                assert!((got - expected).abs() <= 1e-9 * expected, "m = {m}");
            }
        }
    }

    #[test]
    fn comparisons() {
        let ccm = gen_golay_pair(2).unwrap();
        let c = compare_ptm_vs_stagger(&ccm, 2, None, 8).unwrap();
        assert_eq!((c.ptm.span, c.ptm.pulses), (8, 8));
        assert_eq!((c.stagger.span, c.stagger.pulses), (7, 8));
        assert!(c.both_null_orders);

        let c = compare_ptm_vs_stagger(&ccm, 1, None, 8).unwrap();
        assert_eq!(c.ptm.span, 4);
        assert!(c.both_null_orders);

        assert!(matches!(
            compare_ptm_vs_stagger(&ccm, 4, None, 8),
            Err(Error::NoEspPartition { degree: 4 })
        ));
        let low = builtin_partition(2).unwrap();
        assert!(compare_ptm_vs_stagger(&ccm, 3, Some(&low), 8).is_err());
    }

    #[test]
    fn plan_json_round_trip() {
        let ccm = gen_golay_pair(2).unwrap();
        let plan = plan_from_partition(&builtin_partition(3).unwrap(), &ccm, 8).unwrap();
        let text = serde_json::to_string(&plan).unwrap();
        assert!(text.starts_with("{\"D\":12,\"M\":3,\"lanes\":[{\"delay\":0,"));
        let back: StaggerPlan = serde_json::from_str(&text).unwrap();
        assert_eq!(back, plan);

        let broken = text.replacen("\"delay\":3", "\"delay\":2", 1);
        assert!(serde_json::from_str::<StaggerPlan>(&broken).is_err());
    }
}
