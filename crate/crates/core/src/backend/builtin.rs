use super::{
    check_target, expect_task, readability_features, sample_breakdown, update_weight, Backend,
    ReadabilityClassifier, SubstitutionModel, Target, TrainContext,
};
use crate::corpus::{SimplificationInstance, Task};
use crate::error::{Error, Result};
use crate::loss::{total_loss, BatchLoss};
use crate::textproc::Document;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuiltinConfig {
    /// Additive smoothing of the substitution model.
    pub alpha: f64,
    /// Step size of the readability classifier.
    pub learning_rate: f64,
}

impl Default for BuiltinConfig {
    fn default() -> Self {
        BuiltinConfig {
            alpha: 1.0,
            learning_rate: 0.5,
        }
    }
}

/// In-process reference backend: a substitution model for `simplify` and a
/// softmax classifier for `read_classify`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinBackend {
    pub config: BuiltinConfig,
    pub simplifier: SubstitutionModel,
    pub classifier: ReadabilityClassifier<f64>,
}

impl BuiltinBackend {
    pub fn new(config: BuiltinConfig) -> Result<Self> {
        if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                config.learning_rate
            )));
        }
        Ok(BuiltinBackend {
            config,
            simplifier: SubstitutionModel::new(config.alpha)?,
            classifier: ReadabilityClassifier::zeros(),
        })
    }
}

impl Default for BuiltinBackend {
    fn default() -> Self {
        Self::new(BuiltinConfig::default()).expect("default config is valid")
    }
}

impl Backend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn generate(&mut self, task: Task, doc: &Document) -> Result<Document> {
        expect_task("generate", Task::Simplify, task)?;
        self.simplifier.simplify(doc)
    }

    fn score(&mut self, task: Task, input: &Document, target: &Target) -> Result<f64> {
        check_target(task, target)?;
        match target {
            Target::Text(t) => {
                if input.token_count() == 0 {
                    return Err(Error::NoText(format!("document {} has no tokens", input.id)));
                }
                Ok(self.simplifier.nll(input, t))
            }
            Target::Label(label) => {
                let x = readability_features(input)?;
                self.classifier.nll(&x, *label)
            }
        }
    }

    fn classify(&mut self, task: Task, doc: &Document) -> Result<u8> {
        expect_task("classify", Task::ReadClassify, task)?;
        Ok(self.classifier.classify(&readability_features(doc)?))
    }

    fn train_step(&mut self, batch: &[SimplificationInstance], ctx: TrainContext<'_>) -> Result<BatchLoss<f64>> {
        if batch.is_empty() {
            return Err(Error::NoSamples("empty training batch".into()));
        }
        let mut samples = Vec::with_capacity(batch.len());
        for inst in batch {
            samples.push(sample_breakdown(self, inst, ctx)?);
        }
        let mut rows = Vec::new();
        for (inst, b) in batch.iter().zip(&samples) {
            let w = update_weight(b, ctx.loss)?;
            self.simplifier.fit_pair(&inst.source, &inst.target, w);
            if b.loss_read.is_some() {
                if let Some(label) = inst.readability_label {
                    rows.push((readability_features(&inst.target)?, label, w));
                }
            }
        }
        self.classifier.sgd_step(&rows, self.config.learning_rate)?;
        total_loss(samples)
    }

    fn reset(&mut self) -> Result<()> {
        *self = Self::new(self.config)?;
        Ok(())
    }
}
