//! Construction of the objective-dependent drift function `Φ_f`.

pub mod blocks;
pub mod invariants;
pub mod params;
pub mod partition;
pub mod weights;

use serde::{Deserialize, Serialize};

pub use blocks::{
    assign_regimes, build_blocks, build_blocks_ordered, build_miniblocks, Block, BlockStructure, Interval, MergeOrder,
    MergeRecord, Regime,
};
pub use params::{default_params, min_problem_size, target_delta, DriftParams};
pub use partition::{build_partition, find_jumps, FitnessPartition, Part};
pub use weights::{build_weights, DriftWeights, LogValue};

use crate::error::Result;
use crate::objective::LinearObjective;

/// Non-fatal conditions met while constructing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionWarning {
    /// `n` is below the size from which the drift guarantee is claimed.
    BelowMinimumSize { n: usize, n0: u64 },
    /// `γn < 2`; the long-block threshold was raised to 2.
    ThresholdClamped { gamma_n: f64 },
}

/// Block structure, weights and partition for one objective.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftConstruction {
    pub params: DriftParams,
    pub structure: BlockStructure,
    pub weights: DriftWeights,
    pub partition: FitnessPartition,
    pub warnings: Vec<ConstructionWarning>,
}

impl DriftConstruction {
    pub fn n(&self) -> usize {
        self.structure.n
    }

    /// `ln Φ_max = ln Σ w_i`.
    pub fn ln_phi_max(&self) -> f64 {
        self.weights.ln_total(self.n())
    }
}

pub fn construct(f: &LinearObjective, params: &DriftParams) -> Result<DriftConstruction> {
    let n = f.n();
    let structure = assign_regimes(build_blocks(&build_miniblocks(f), params.gamma, n));
    let weights = build_weights(f, &structure, params)?;
    let partition = build_partition(&find_jumps(f, &structure), &weights, params.gamma);
    let mut warnings = Vec::new();
    if (n as u64) < params.n0 {
        warnings.push(ConstructionWarning::BelowMinimumSize { n, n0: params.n0 });
    }
    let gamma_n = params.gamma * n as f64;
    if gamma_n < 2.0 {
        warnings.push(ConstructionWarning::ThresholdClamped { gamma_n });
    }
    Ok(DriftConstruction { params: *params, structure, weights, partition, warnings })
}
