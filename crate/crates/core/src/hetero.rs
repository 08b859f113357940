//! Heterogeneous devices as groups of virtual weakest-type workers, and
//! recovery from partially finished devices.
//!
//! A device of capacity `c` runs `c` virtual workers of the homogeneous plan.
//! The first `k̄_A` devices contribute `k_A` virtual workers, the rest `s`.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::decoder::{coefficient_matrix, full_column_rank, is_decodable, DECODE_TOL};
use crate::encoder::{proposed_mv_plan, EncodingPlan};
use crate::error::{Error, Result};
use crate::subsets::{binomial, Colex};

/// Largest number of candidate subsets `recover_from_partial` will scan.
pub const RECOVERY_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviceProfile {
    /// Nonincreasing, ending in 1.
    pub capacities: Vec<usize>,
    /// Number of leading devices whose capacities make up `k_A`.
    pub split: usize,
}

impl DeviceProfile {
    pub fn new(capacities: Vec<usize>, split: usize) -> Result<Self> {
        let p = DeviceProfile { capacities, split };
        p.validate()?;
        Ok(p)
    }

    pub fn devices(&self) -> usize {
        self.capacities.len()
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.capacities;
        if c.is_empty() {
            return Err(Error::InvalidProfile("no devices".into()));
        }
        if c.contains(&0) {
            return Err(Error::InvalidProfile("capacities must be positive".into()));
        }
        if c.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidProfile(format!("capacities {c:?} are not sorted nonincreasing")));
        }
        if *c.last().unwrap() != 1 {
            return Err(Error::InvalidProfile("the weakest device must have capacity 1".into()));
        }
        if self.split >= c.len() {
            return Err(Error::InvalidProfile(format!("split {} must be below {} devices", self.split, c.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VirtualMap {
    pub n: usize,
    pub k_a: usize,
    pub s: usize,
    /// Virtual worker ids of each device.
    pub ranges: Vec<Range<usize>>,
}

impl VirtualMap {
    pub fn device_of(&self, virtual_id: usize) -> Option<usize> {
        self.ranges.iter().position(|r| r.contains(&virtual_id))
    }

    /// Virtual id of task `local` on `device`.
    pub fn virtual_id(&self, device: usize, local: usize) -> Result<usize> {
        let range = self
            .ranges
            .get(device)
            .ok_or_else(|| Error::IndexOutOfRange(format!("device {device} of {}", self.ranges.len())))?;
        if local >= range.len() {
            return Err(Error::IndexOutOfRange(format!(
                "task {local} on device {device} with capacity {}",
                range.len()
            )));
        }
        Ok(range.start + local)
    }
}

pub fn expand_profile(profile: &DeviceProfile) -> Result<VirtualMap> {
    profile.validate()?;
    let mut ranges = Vec::with_capacity(profile.devices());
    let mut start = 0;
    for &c in &profile.capacities {
        ranges.push(start..start + c);
        start += c;
    }
    let k_a: usize = profile.capacities[..profile.split].iter().sum();
    Ok(VirtualMap { n: start, k_a, s: start - k_a, ranges })
}

/// Matrix-vector plan on the virtual system; device `d` runs the tasks of
/// `map.ranges[d]`.
pub fn assign_hetero(profile: &DeviceProfile, seed: u64) -> Result<(EncodingPlan, VirtualMap)> {
    let map = expand_profile(profile)?;
    let plan = proposed_mv_plan(map.n, map.k_a, map.s, seed)?;
    Ok((plan, map))
}

/// Tasks finished when device `d` completed its first `counts[d]` tasks.
pub fn completions_in_order(map: &VirtualMap, counts: &[usize]) -> Result<Vec<(usize, usize)>> {
    if counts.len() != map.ranges.len() {
        return Err(Error::InvalidParameters(format!(
            "{} counts for {} devices",
            counts.len(),
            map.ranges.len()
        )));
    }
    let mut out = Vec::new();
    for (d, &c) in counts.iter().enumerate() {
        if c > map.ranges[d].len() {
            return Err(Error::IndexOutOfRange(format!("device {d} has only {} tasks", map.ranges[d].len())));
        }
        out.extend((0..c).map(|t| (d, t)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovery {
    pub decodable: bool,
    /// Distinct virtual tasks reported complete, sorted.
    pub completed: Vec<usize>,
    /// The `k_A` virtual tasks used for decoding.
    pub subset: Option<Vec<usize>>,
}

/// Picks the first decodable `k_A`-subset (colex order) of the completed
/// virtual tasks. `completed` holds `(device, local task index)` pairs.
pub fn recover_from_partial(completed: &[(usize, usize)], plan: &EncodingPlan, map: &VirtualMap) -> Result<Recovery> {
    if plan.n != map.n || plan.k() != map.k_a {
        return Err(Error::InvalidParameters("plan does not match the virtual map".into()));
    }
    let mut ids = completed.iter().map(|&(d, t)| map.virtual_id(d, t)).collect::<Result<Vec<_>>>()?;
    ids.sort_unstable();
    ids.dedup();
    let k = map.k_a;
    if ids.len() < k {
        return Ok(Recovery { decodable: false, completed: ids, subset: None });
    }
    let candidates = binomial(ids.len(), k);
    if candidates > RECOVERY_CAP {
        return Err(Error::CapExceeded { count: candidates, cap: RECOVERY_CAP });
    }
    let subset = Colex::new(ids.len(), k)
        .map(|pick| pick.iter().map(|&i| ids[i]).collect::<Vec<_>>())
        .find(|s| is_decodable(plan, s, DECODE_TOL));
    Ok(Recovery { decodable: subset.is_some(), completed: ids, subset })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureSweep {
    /// Device sets with total capacity at most `s` (including the empty set).
    pub patterns: u64,
    pub failures: Vec<Vec<usize>>,
}

/// Removes every device set whose capacities sum to at most `s` and checks that
/// the remaining virtual tasks still determine all `k_A` unknowns.
pub fn failure_sweep(plan: &EncodingPlan, map: &VirtualMap) -> Result<FailureSweep> {
    let devices = map.ranges.len();
    if devices > 24 {
        return Err(Error::InvalidParameters(format!("{devices} devices is too many to enumerate")));
    }
    let mut patterns = 0;
    let mut failures = Vec::new();
    for mask in 0u32..(1 << devices) {
        let gone: Vec<usize> = (0..devices).filter(|d| mask >> d & 1 == 1).collect();
        let lost: usize = gone.iter().map(|&d| map.ranges[d].len()).sum();
        if lost > map.s {
            continue;
        }
        patterns += 1;
        let rows: Vec<usize> =
            (0..devices).filter(|d| mask >> d & 1 == 0).flat_map(|d| map.ranges[d].clone()).collect();
        if !full_column_rank(&coefficient_matrix(plan, &rows)?, DECODE_TOL) {
            failures.push(gone);
        }
    }
    Ok(FailureSweep { patterns, failures })
}
