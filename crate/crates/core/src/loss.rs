//! Combined training objective.
//!
//! Per sample, the simplification loss is optionally summed with the
//! readability-classification loss. When coherence gating is active and the
//! sample's predicted simplification is judged coherent, that sum is scaled
//! by `delta`. Batches are aggregated by the arithmetic mean of the per-sample
//! partial losses, summed in index order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LossMode {
    /// Simplification only.
    S,
    /// Simplification + readability.
    #[serde(rename = "S_R")]
    SR,
    /// Simplification with coherence gating.
    #[serde(rename = "S_C")]
    SC,
    /// Simplification + readability with coherence gating.
    #[serde(rename = "S_R_C")]
    SRC,
}

impl LossMode {
    pub const ALL: [LossMode; 4] = [LossMode::S, LossMode::SR, LossMode::SC, LossMode::SRC];

    pub fn uses_readability(self) -> bool {
        matches!(self, LossMode::SR | LossMode::SRC)
    }

    pub fn uses_coherence(self) -> bool {
        matches!(self, LossMode::SC | LossMode::SRC)
    }

    /// Label used in report tables.
    pub fn table_label(self) -> &'static str {
        match self {
            LossMode::S => "simple",
            LossMode::SR => "simple+read",
            LossMode::SC => "simple+coh",
            LossMode::SRC => "simple+read+coh",
        }
    }
}

impl fmt::Display for LossMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossMode::S => "S",
            LossMode::SR => "S_R",
            LossMode::SC => "S_C",
            LossMode::SRC => "S_R_C",
        })
    }
}

impl FromStr for LossMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "S" | "simple" => Ok(LossMode::S),
            "S_R" | "simple+read" => Ok(LossMode::SR),
            "S_C" | "simple+coh" => Ok(LossMode::SC),
            "S_R_C" | "simple+read+coh" => Ok(LossMode::SRC),
            other => Err(Error::Config(format!("unknown loss mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig<T> {
    pub mode: LossMode,
    pub delta: T,
}

impl<T: Scalar> LossConfig<T> {
    pub fn new(mode: LossMode, delta: T) -> Result<Self> {
        if !(delta > T::zero() && delta <= T::one()) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1], got {delta:?}"
            )));
        }
        Ok(LossConfig { mode, delta })
    }

    /// `mode` with the default gating factor of 0.90.
    pub fn with_default_delta(mode: LossMode) -> Self {
        LossConfig {
            mode,
            delta: T::from_ratio(9, 10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown<T> {
    pub mode: LossMode,
    pub loss_simp: T,
    pub loss_read: Option<T>,
    pub coherent: Option<bool>,
    pub partial: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchLoss<T> {
    pub samples: Vec<LossBreakdown<T>>,
    pub total: T,
    pub n: usize,
}

/// Per-sample loss for the configured mode.
pub fn partial_loss<T: Scalar>(
    loss_simp: T,
    loss_read: Option<T>,
    coherent: Option<bool>,
    config: &LossConfig<T>,
) -> Result<LossBreakdown<T>> {
    let mode = config.mode;
    if mode.uses_readability() != loss_read.is_some() {
        return Err(Error::ModeMismatch(format!(
            "mode {mode} {} a readability loss",
            if mode.uses_readability() { "requires" } else { "does not take" }
        )));
    }
    if mode.uses_coherence() != coherent.is_some() {
        return Err(Error::ModeMismatch(format!(
            "mode {mode} {} a coherence flag",
            if mode.uses_coherence() { "requires" } else { "does not take" }
        )));
    }
    if loss_simp < T::zero() {
        return Err(Error::InvalidLoss(format!("loss_simp is negative: {loss_simp:?}")));
    }
    if let Some(r) = loss_read {
        if r < T::zero() {
            return Err(Error::InvalidLoss(format!("loss_read is negative: {r:?}")));
        }
    }

    let combined = match loss_read {
        Some(r) => loss_simp + r,
        None => loss_simp,
    };
    let partial = match coherent {
        Some(true) => config.delta * combined,
        _ => combined,
    };
    Ok(LossBreakdown {
        mode,
        loss_simp,
        loss_read,
        coherent,
        partial,
    })
}

/// Mean of the partial losses, summed in index order.
pub fn total_loss<T: Scalar>(samples: Vec<LossBreakdown<T>>) -> Result<BatchLoss<T>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::NoSamples("cannot aggregate an empty batch".into()))?;
    let mode = first.mode;
    if let Some(bad) = samples.iter().find(|s| s.mode != mode) {
        return Err(Error::ModeMismatch(format!(
            "batch mixes modes {mode} and {}",
            bad.mode
        )));
    }
    let sum = samples.iter().fold(T::zero(), |acc, s| acc + s.partial);
    let n = samples.len();
    Ok(BatchLoss {
        total: sum / T::from_count(n),
        samples,
        n,
    })
}

/// Derivative of the partial loss with respect to either loss component.
///
/// The coherence flag is a gate, not a differentiable function of the model
/// parameters.
pub fn gating_gradient<T: Scalar>(coherent: bool, config: &LossConfig<T>) -> Result<T> {
    if !config.mode.uses_coherence() {
        return Err(Error::ModeMismatch(format!(
            "mode {} has no coherence gate",
            config.mode
        )));
    }
    Ok(if coherent { config.delta } else { T::one() })
}
