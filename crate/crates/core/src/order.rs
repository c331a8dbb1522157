//! Seeded generation of class orders and isolation-run schedules.
//!
//! Small classes are enumerated exhaustively (all `k!` permutations in
//! lexicographic order of their input positions). Larger classes get a
//! fixed number of distinct permutations drawn from a ChaCha stream whose
//! seed mixes the caller's seed with a stable hash of the class id.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{make_order, ClassId, OrderError, TestId, TestOrder};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("cannot plan orders for an empty test list")]
    EmptyTestList,
    #[error("order count must be positive")]
    ZeroCount,
    #[error(transparent)]
    Order(#[from] OrderError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderPlan {
    pub class_id: ClassId,
    pub orders: Vec<TestOrder>,
    pub seed: u64,
    pub exhaustive: bool,
}

/// Domain tags for the two order-generation phases, so the pre-mutation
/// filter and mutant evaluation draw independent plans.
pub const STABILITY_TAG: &str = "stability";
pub const EVALUATION_TAG: &str = "evaluation";

/// Derives a phase seed from the campaign seed.
pub fn phase_seed(campaign_seed: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(campaign_seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    first_u64(&hasher.finalize())
}

/// Mixes a seed with the class identity.
pub fn class_seed(seed: u64, class_id: &ClassId) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(class_id.module_path().as_bytes());
    hasher.update([0u8]);
    hasher.update(class_id.class_name().as_bytes());
    first_u64(&hasher.finalize())
}

fn first_u64(digest: &[u8]) -> u64 {
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// `k! <= limit` without overflow.
fn factorial_at_most(k: usize, limit: usize) -> bool {
    let mut acc: usize = 1;
    for i in 2..=k {
        acc = match acc.checked_mul(i) {
            Some(v) if v <= limit => v,
            _ => return false,
        };
    }
    acc <= limit
}

/// Advances `perm` to the next lexicographic permutation; false when it was
/// the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

pub fn generate_orders(tests: &[TestId], count: usize, seed: u64) -> Result<OrderPlan, PlanError> {
    let first = tests.first().ok_or(PlanError::EmptyTestList)?;
    if count == 0 {
        return Err(PlanError::ZeroCount);
    }
    let class_id = first.class_id().clone();
    let universe: BTreeSet<TestId> = tests.iter().cloned().collect();
    let k = tests.len();
    let build = |indices: &[usize]| {
        make_order(&class_id, indices.iter().map(|&i| tests[i].clone()).collect(), &universe)
    };

    let (orders, exhaustive) = if factorial_at_most(k, count) {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut orders = vec![build(&perm)?];
        while next_permutation(&mut perm) {
            orders.push(build(&perm)?);
        }
        (orders, true)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(class_seed(seed, &class_id));
        let mut seen = HashSet::with_capacity(count);
        let mut orders = Vec::with_capacity(count);
        let mut perm: Vec<usize> = (0..k).collect();
        while orders.len() < count {
            perm.shuffle(&mut rng);
            if seen.insert(perm.clone()) {
                orders.push(build(&perm)?);
            }
        }
        (orders, false)
    };

    Ok(OrderPlan {
        class_id,
        orders,
        seed,
        exhaustive,
    })
}

/// One isolated execution of a test in fresh runtime state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolationDirective {
    pub test: TestId,
    pub ordinal: usize,
}

pub fn isolation_schedule(test: &TestId, runs: usize) -> Vec<IsolationDirective> {
    (0..runs)
        .map(|ordinal| IsolationDirective {
            test: test.clone(),
            ordinal,
        })
        .collect()
}
