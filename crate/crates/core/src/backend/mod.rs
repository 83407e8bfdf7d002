//! Simplifier / classifier backends.
//!
//! [`Backend`] routes the two control-token tasks to an implementation:
//! either the in-process [`BuiltinBackend`] or an [`ExternalBackend`] child
//! process speaking the line protocol in [`protocol`].

pub mod align;
mod builtin;
mod external;
pub mod protocol;
mod readability;
mod substitution;

pub use builtin::{BuiltinBackend, BuiltinConfig};
pub use external::{spawn_external, ExternalBackend, ExternalConfig};
pub use readability::{
    gradient_check_readability, readability_features, ReadabilityClassifier, ReadabilityRow,
    LEVELS, READABILITY_FEATURES, READABILITY_FEATURE_COUNT,
};
pub use substitution::{Action, SubstitutionModel, SPLIT_CANDIDATES};

use crate::coherence::{predict_coherence, CoherenceModel};
use crate::corpus::{SimplificationInstance, Task};
use crate::error::{Error, Result};
use crate::loss::{partial_loss, BatchLoss, LossBreakdown, LossConfig};
use crate::textproc::Document;

/// What a scored input is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Text(Document),
    Label(u8),
}

impl Target {
    fn task(&self) -> Task {
        match self {
            Target::Text(_) => Task::Simplify,
            Target::Label(_) => Task::ReadClassify,
        }
    }
}

/// Everything a training step needs besides the batch.
#[derive(Debug, Clone, Copy)]
pub struct TrainContext<'a> {
    pub loss: &'a LossConfig<f64>,
    pub coherence: Option<&'a CoherenceModel<f64>>,
    /// When false (during warm-up) every sample counts as incoherent.
    pub gate_open: bool,
}

impl<'a> TrainContext<'a> {
    pub fn new(loss: &'a LossConfig<f64>, coherence: Option<&'a CoherenceModel<f64>>) -> Self {
        TrainContext {
            loss,
            coherence,
            gate_open: true,
        }
    }
}

pub trait Backend {
    fn name(&self) -> &str;

    fn generate(&mut self, task: Task, doc: &Document) -> Result<Document>;

    /// Non-negative loss of `target` given `input`.
    fn score(&mut self, task: Task, input: &Document, target: &Target) -> Result<f64>;

    fn classify(&mut self, task: Task, doc: &Document) -> Result<u8>;

    fn train_step(&mut self, batch: &[SimplificationInstance], ctx: TrainContext<'_>) -> Result<BatchLoss<f64>>;

    fn reset(&mut self) -> Result<()>;
}

pub(crate) fn expect_task(op: &str, expected: Task, got: Task) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{op} serves task {expected}, not {got}")))
    }
}

pub(crate) fn check_target(task: Task, target: &Target) -> Result<()> {
    expect_task("score", target.task(), task)
}

/// Loss terms of one instance under the backend's current state.
pub fn sample_breakdown<B: Backend + ?Sized>(
    backend: &mut B,
    instance: &SimplificationInstance,
    ctx: TrainContext<'_>,
) -> Result<LossBreakdown<f64>> {
    let mode = ctx.loss.mode;
    let loss_simp = backend.score(
        Task::Simplify,
        &instance.source,
        &Target::Text(instance.target.clone()),
    )?;
    let loss_read = if mode.uses_readability() {
        let label = instance.readability_label.ok_or_else(|| {
            Error::ModeMismatch(format!(
                "mode {mode} needs readability labels; instance {} has none",
                instance.id
            ))
        })?;
        Some(backend.score(Task::ReadClassify, &instance.target, &Target::Label(label))?)
    } else {
        None
    };
    let coherent = if mode.uses_coherence() {
        let model = ctx.coherence.ok_or_else(|| {
            Error::ModeMismatch(format!("mode {mode} needs a coherence model"))
        })?;
        if ctx.gate_open {
            let prediction = backend.generate(Task::Simplify, &instance.source)?;
            Some(predict_coherence(model, &prediction)?.0 == 1)
        } else {
            Some(false)
        }
    } else {
        None
    };
    partial_loss(loss_simp, loss_read, coherent, ctx.loss)
}

/// Per-sample update weight: the gating derivative for coherence modes, 1 otherwise.
pub fn update_weight(breakdown: &LossBreakdown<f64>, loss: &LossConfig<f64>) -> Result<f64> {
    match breakdown.coherent {
        Some(c) => crate::loss::gating_gradient(c, loss),
        None => Ok(1.0),
    }
}
