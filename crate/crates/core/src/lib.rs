//! Document-level text simplification toolkit.
//!
//! The crate covers the whole experimental loop: building training pairs from
//! leveled article collections, scoring system outputs (FKGL, FRE, SARI,
//! D-SARI, coherence rate), a trainable coherence classifier, the
//! coherence-gated multi-objective loss, pluggable simplifier backends and an
//! experiment harness for zero-shot, few-shot and fine-tuning regimes.
//!
//! Numeric code is generic over [`scalar::Scalar`] / [`scalar::Real`]; the
//! aliases at the crate root fix the scalar to `f64`.

pub mod backend;
pub mod coherence;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod loss;
pub mod metrics;
pub mod scalar;
pub mod textproc;

pub use error::{Error, Result};
pub use textproc::{Document, Sentence};

pub type LossConfig = loss::LossConfig<f64>;
pub type LossBreakdown = loss::LossBreakdown<f64>;
pub type BatchLoss = loss::BatchLoss<f64>;
pub type CoherenceModel = coherence::CoherenceModel<f64>;
pub type CoherenceFeatureVector = coherence::CoherenceFeatureVector<f64>;
pub type CoherenceTrainConfig = coherence::TrainConfig<f64>;
pub type ReadabilityClassifier = backend::ReadabilityClassifier<f64>;
