//! Generators for linear objective families.

use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::LinearObjective;
use crate::rng::{below, run_rng, unit_f64};
use crate::wide::WideReal;

/// A family of linear objectives, one instance per `(n, seed)`.
///
/// * `onemax`: `a_i = 1`.
/// * `binval`: `a_i = 2^{i-1}`.
/// * `uniform_random`: `a_i` drawn uniformly from `[low, high]`, sorted.
/// * `lognormal_random`: `ln a_i ~ N(0, sigma²)`, sorted.
/// * `mixed_regime`: alternating flat and geometric runs, see
///   [`mixed_regime`].
/// * `explicit`: a fixed coefficient list, normalized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Onemax,
    Binval,
    UniformRandom { low: f64, high: f64 },
    LognormalRandom { sigma: f64 },
    MixedRegime,
    Explicit { coefficients: Vec<f64> },
}

impl FamilySpec {
    pub const KINDS: [&'static str; 6] =
        ["onemax", "binval", "uniform_random", "lognormal_random", "mixed_regime", "explicit"];

    pub fn uniform_default() -> FamilySpec {
        FamilySpec::UniformRandom { low: 1.0, high: 10.0 }
    }

    pub fn lognormal_default() -> FamilySpec {
        FamilySpec::LognormalRandom { sigma: 3.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Onemax => "onemax",
            FamilySpec::Binval => "binval",
            FamilySpec::UniformRandom { .. } => "uniform_random",
            FamilySpec::LognormalRandom { .. } => "lognormal_random",
            FamilySpec::MixedRegime => "mixed_regime",
            FamilySpec::Explicit { .. } => "explicit",
        }
    }

    /// Whether instances depend on the seed.
    pub fn is_random(&self) -> bool {
        matches!(self, FamilySpec::UniformRandom { .. } | FamilySpec::LognormalRandom { .. } | FamilySpec::MixedRegime)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::UniformRandom { low, high } if !(*low > 0.0 && low <= high && high.is_finite()) => {
                Err(Error::InvalidArgument(format!("uniform range needs 0 < low <= high, got [{low}, {high}]")))
            }
            FamilySpec::LognormalRandom { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                Err(Error::InvalidArgument(format!("sigma must be non-negative, got {sigma}")))
            }
            FamilySpec::Explicit { coefficients } if coefficients.is_empty() => {
                Err(Error::InvalidArgument("explicit family needs coefficients".into()))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses a family name with default distribution parameters (`explicit`
/// cannot be named this way).
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilySpec> {
        match s {
            "onemax" => Ok(FamilySpec::Onemax),
            "binval" => Ok(FamilySpec::Binval),
            "uniform_random" | "uniform" => Ok(FamilySpec::uniform_default()),
            "lognormal_random" | "lognormal" => Ok(FamilySpec::lognormal_default()),
            "mixed_regime" | "mixed" => Ok(FamilySpec::MixedRegime),
            other => Err(Error::InvalidArgument(format!(
                "unknown family '{other}' (expected one of onemax, binval, uniform_random, lognormal_random, mixed_regime)"
            ))),
        }
    }
}

/// The instance of `spec` at size `n`; deterministic in `(spec, n, seed)`.
pub fn generate_family(spec: &FamilySpec, n: usize, seed: u64) -> Result<LinearObjective> {
    spec.validate()?;
    if n == 0 && !matches!(spec, FamilySpec::Explicit { .. }) {
        return Err(Error::EmptyObjective);
    }
    let mut rng = run_rng(seed);
    match spec {
        FamilySpec::Onemax => Ok(LinearObjective::onemax(n)),
        FamilySpec::Binval => Ok(LinearObjective::binval(n)),
        FamilySpec::UniformRandom { low, high } => {
            let mut a: Vec<f64> = (0..n).map(|_| low + (high - low) * unit_f64(&mut rng)).collect();
            a.sort_by(f64::total_cmp);
            LinearObjective::from_sorted_f64(&a)
        }
        FamilySpec::LognormalRandom { sigma } => {
            let normal = Normal::new(0.0, *sigma).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let mut ln_a: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            ln_a.sort_by(f64::total_cmp);
            LinearObjective::from_sorted(ln_a.into_iter().map(WideReal::from_ln).collect())
        }
        FamilySpec::MixedRegime => LinearObjective::from_sorted(mixed_regime(n, seed)?),
        FamilySpec::Explicit { coefficients } => {
            let f = LinearObjective::normalize(coefficients)?;
            if n != 0 && f.n() != n {
                return Err(Error::LengthMismatch { expected: n, actual: f.n() });
            }
            Ok(f)
        }
    }
}

/// Coefficients of the `mixed_regime` family.
///
/// With `L = max(1, ⌈log2 n⌉)`, starting from `a_1 = 1` the positions are
/// filled by alternating runs, flat first:
///
/// * flat run: `1 + U{0..4L-1}` positions, each equal to its predecessor;
/// * geometric run: `2L` positions, each `exp((ln n / L) · u)` times its
///   predecessor with `u` uniform in `[1, 1.5)`, so a full run multiplies
///   the coefficient by between `n²` and `n³`.
///
/// Draws come from the seed's stream in run order.
pub fn mixed_regime(n: usize, seed: u64) -> Result<Vec<WideReal>> {
    if n == 0 {
        return Err(Error::EmptyObjective);
    }
    let mut rng = run_rng(seed);
    let l = ((n as f64).log2().ceil() as usize).max(1);
    let unit_step = (n as f64).ln() / l as f64;
    let mut ln_a = Vec::with_capacity(n);
    ln_a.push(0.0f64);
    let mut flat = true;
    while ln_a.len() < n {
        let len = if flat { 1 + below(&mut rng, 4 * l as u64) as usize } else { 2 * l };
        for _ in 0..len {
            if ln_a.len() == n {
                break;
            }
            let prev = *ln_a.last().expect("nonempty");
            let next = if flat { prev } else { prev + unit_step * (1.0 + 0.5 * unit_f64(&mut rng)) };
            ln_a.push(next);
        }
        flat = !flat;
    }
    Ok(ln_a.into_iter().map(WideReal::from_ln).collect())
}
