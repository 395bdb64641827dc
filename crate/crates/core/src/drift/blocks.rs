//! Miniblocks, blocks, long-block merging and regime labels.
//!
//! Positions run `1..=n`; "left" means larger index. Interval lists are kept
//! right to left, so element 0 always contains position 1.

use serde::{Deserialize, Serialize};

use crate::objective::LinearObjective;

/// Closed index interval `rightmost..=leftmost`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub rightmost: usize,
    pub leftmost: usize,
}

impl Interval {
    pub fn new(rightmost: usize, leftmost: usize) -> Interval {
        debug_assert!(rightmost <= leftmost);
        Interval { rightmost, leftmost }
    }

    pub fn len(&self) -> usize {
        self.leftmost - self.rightmost + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.rightmost <= i && i <= self.leftmost
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Copy,
    Damped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// `ℓ_B`.
    pub leftmost: usize,
    /// `r_B`.
    pub rightmost: usize,
    pub is_long: bool,
    pub regime: Regime,
    /// Indices into the miniblock list, `first..=last`.
    pub miniblocks: (usize, usize),
}

impl Block {
    pub fn interval(&self) -> Interval {
        Interval::new(self.rightmost, self.leftmost)
    }

    pub fn len(&self) -> usize {
        self.leftmost - self.rightmost + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub left_long: Interval,
    pub right_long: Interval,
    pub absorbed_short: usize,
    pub merged: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    pub n: usize,
    pub miniblocks: Vec<Interval>,
    /// Right to left; the last entry is the leftmost block.
    pub blocks: Vec<Block>,
    pub merge_log: Vec<MergeRecord>,
    /// Effective length threshold for long blocks, `max(γn, 2)`.
    pub long_threshold: f64,
}

impl BlockStructure {
    /// Index of the block whose weights define position `i` (the block with
    /// `r_B < i <= ℓ_B`; position 1 belongs to block 0).
    pub fn owner_of(&self, i: usize) -> usize {
        if i <= 1 {
            return 0;
        }
        self.blocks.partition_point(|b| b.leftmost < i)
    }

    /// Regime that defines `w_i`.
    pub fn regime_of(&self, i: usize) -> Regime {
        self.blocks[self.owner_of(i)].regime
    }

    pub fn leftmost_block(&self) -> usize {
        self.blocks.len() - 1
    }
}

/// Left-to-right miniblock scan: a miniblock starting at `j` ends at `n` if
/// `a_n/a_j < n²`, otherwise at the least `i > j` with `a_i/a_j >= n²`.
/// Ratios are compared exactly.
pub fn build_miniblocks(f: &LinearObjective) -> Vec<Interval> {
    let n = f.n();
    if n == 1 {
        return vec![Interval::new(1, 1)];
    }
    let n2 = (n as u128) * (n as u128);
    let reaches = |i: usize, j: usize| f.coefficient(i).ge_scaled(&f.coefficient(j), n2);
    let mut out = Vec::new();
    let mut j = 1;
    loop {
        if !reaches(n, j) {
            out.push(Interval::new(j, n));
            break;
        }
        // coefficients are sorted, so the predicate is monotone in i
        let (mut lo, mut hi) = (j + 1, n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if reaches(mid, j) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        out.push(Interval::new(j, lo));
        if lo == n {
            break;
        }
        j = lo;
    }
    out
}

/// Order in which candidate long-block merges are applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeOrder {
    LeftmostFirst,
    RightmostFirst,
}

/// Pairs miniblocks right to left, marks long blocks and merges long blocks
/// separated by at most two short blocks (leftmost candidate first).
/// Regimes are left as [`Regime::Damped`] until [`assign_regimes`].
pub fn build_blocks(miniblocks: &[Interval], gamma: f64, n: usize) -> BlockStructure {
    build_blocks_ordered(miniblocks, gamma, n, MergeOrder::LeftmostFirst)
}

pub fn build_blocks_ordered(miniblocks: &[Interval], gamma: f64, n: usize, order: MergeOrder) -> BlockStructure {
    let threshold = (gamma * n as f64).max(2.0);
    let is_long = |len: usize| len as f64 >= threshold;
    let mut blocks: Vec<Block> = miniblocks
        .chunks(2)
        .enumerate()
        .map(|(k, pair)| {
            let rightmost = pair[0].rightmost;
            let leftmost = pair[pair.len() - 1].leftmost;
            Block {
                leftmost,
                rightmost,
                is_long: is_long(leftmost - rightmost + 1),
                regime: Regime::Damped,
                miniblocks: (2 * k, 2 * k + pair.len() - 1),
            }
        })
        .collect();

    let mut merge_log = Vec::new();
    loop {
        let longs: Vec<usize> = (0..blocks.len()).filter(|&k| blocks[k].is_long).collect();
        let mut candidates = longs.windows(2).filter(|w| w[1] - w[0] - 1 <= 2);
        let pick = match order {
            MergeOrder::LeftmostFirst => candidates.next_back(),
            MergeOrder::RightmostFirst => candidates.next(),
        };
        let Some(w) = pick else { break };
        let (p, q) = (w[0], w[1]);
        let merged = Block {
            leftmost: blocks[q].leftmost,
            rightmost: blocks[p].rightmost,
            is_long: true,
            regime: Regime::Damped,
            miniblocks: (blocks[p].miniblocks.0, blocks[q].miniblocks.1),
        };
        merge_log.push(MergeRecord {
            left_long: blocks[q].interval(),
            right_long: blocks[p].interval(),
            absorbed_short: q - p - 1,
            merged: merged.interval(),
        });
        blocks.splice(p..=q, std::iter::once(merged));
    }

    BlockStructure { n, miniblocks: miniblocks.to_vec(), blocks, merge_log, long_threshold: threshold }
}

/// Copy regime for long blocks and for the block immediately to the left of
/// a long block; damped otherwise.
pub fn assign_regimes(mut structure: BlockStructure) -> BlockStructure {
    let longs: Vec<bool> = structure.blocks.iter().map(|b| b.is_long).collect();
    for (k, b) in structure.blocks.iter_mut().enumerate() {
        let left_of_long = k > 0 && longs[k - 1];
        b.regime = if b.is_long || left_of_long { Regime::Copy } else { Regime::Damped };
    }
    structure
}
