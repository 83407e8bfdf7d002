//! Experiment orchestration: zero / few / fine regimes over one or more
//! training stages, evaluation into a report row, regime comparison and
//! result files.

mod config;

pub use config::{parse_stages, ExperimentConfig, ExperimentSpec, Regime, Stage, CONFIG_KEYS, SEED_ENV};

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::backend::{Backend, TrainContext};
use crate::coherence::{predict_coherence, CoherenceModel};
use crate::corpus::{build_newsela_sl, generate_synthetic_corpus, SimplificationInstance, Split, Task};
use crate::error::{Error, Result};
use crate::loss::{total_loss, BatchLoss};
use crate::metrics::{d_sari, MetricsReport, ReadabilityStats, ReportRow};
use crate::textproc::{frame_document, Document};

pub type Corpora = BTreeMap<String, Vec<SimplificationInstance>>;

/// Training loss of one epoch: every sample seen in the epoch, averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLoss {
    pub stage: String,
    pub epoch: usize,
    pub loss: BatchLoss<f64>,
}

impl EpochLoss {
    pub fn to_json_line(&self) -> String {
        let n = self.loss.n as f64;
        let samples = &self.loss.samples;
        let simp = samples.iter().map(|s| s.loss_simp).sum::<f64>() / n;
        let read = samples
            .iter()
            .map(|s| s.loss_read)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.iter().sum::<f64>() / n);
        let coherent = samples
            .iter()
            .map(|s| s.coherent)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.iter().filter(|&&c| c).count() as f64 / n);
        json!({
            "stage": self.stage,
            "epoch": self.epoch,
            "n": self.loss.n,
            "total": self.loss.total,
            "loss_simp": simp,
            "loss_read": read,
            "coherent_rate": coherent,
        })
        .to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub trace: Vec<EpochLoss>,
    pub row: ReportRow,
    pub duration: Duration,
}

impl ExperimentResult {
    pub fn report(&self) -> &MetricsReport {
        &self.row.metrics
    }

    /// Writes `report.tsv`, `report.txt`, `loss_trace.jsonl` and `config.txt`.
    /// Wall-clock time is not written, so reruns produce identical files.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let rows = std::slice::from_ref(&self.row);
        fs::write(dir.join("report.tsv"), ReportRow::to_tsv(rows, None))?;
        fs::write(dir.join("report.txt"), ReportRow::to_table(rows, None))?;
        let mut trace = String::new();
        for e in &self.trace {
            trace.push_str(&e.to_json_line());
            trace.push('\n');
        }
        fs::write(dir.join("loss_trace.jsonl"), trace)?;
        fs::write(dir.join("config.txt"), config_echo(&self.spec))?;
        Ok(())
    }
}

/// The config as a reloadable file, with notes on how to read the run.
pub fn config_echo(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# truncation unit: documents are framed to {} sentences\n",
        spec.config.frame
    ));
    if spec.config.regime == Regime::Zero && spec.config.backend == "builtin" {
        out.push_str(
            "# zero regime on the builtin backend evaluates the untrained, copy-biased model,\n\
             # the desk-scale analogue of an unadapted pretrained model\n",
        );
    }
    out.push_str(&spec.to_text());
    out
}

fn split_of(corpora: &Corpora, id: &str, split: Split) -> Result<Vec<SimplificationInstance>> {
    let corpus = corpora
        .get(id)
        .ok_or_else(|| Error::Config(format!("unknown corpus id {id:?}")))?;
    Ok(corpus.iter().filter(|i| i.split == split).cloned().collect())
}

/// Trains `backend` per the config's regime, then evaluates it on the test
/// split of `test_corpus`. The backend is reset first.
pub fn run_experiment(
    spec: &ExperimentSpec,
    corpora: &Corpora,
    backend: &mut dyn Backend,
    coherence: &CoherenceModel<f64>,
) -> Result<ExperimentResult> {
    let started = Instant::now();
    let config = &spec.config;
    config.validate()?;
    let loss = config.loss_config()?;
    let test = split_of(corpora, &config.test_corpus, Split::Test)?;
    if test.is_empty() {
        return Err(Error::NoSamples(format!(
            "corpus {:?} has no test instances",
            config.test_corpus
        )));
    }

    let mut stages = Vec::new();
    for (k, stage) in config.stages.iter().enumerate() {
        let mut train = split_of(corpora, &stage.corpus, Split::Train)?;
        if train.is_empty() {
            return Err(Error::NoSamples(format!("corpus {:?} has no training instances", stage.corpus)));
        }
        if loss.mode.uses_readability() {
            if let Some(i) = train.iter().find(|i| i.readability_label.is_none()) {
                return Err(Error::ModeMismatch(format!(
                    "mode {} needs readability labels; corpus {:?} instance {} has none",
                    loss.mode, stage.corpus, i.id
                )));
            }
        }
        let mut epochs = config.stage_epochs(stage);
        if config.regime == Regime::Few && k + 1 == config.stages.len() {
            if train.len() < config.few_shot_samples {
                return Err(Error::Config(format!(
                    "corpus {:?} has {} training instances, fewer than few_shot_samples = {}",
                    stage.corpus,
                    train.len(),
                    config.few_shot_samples
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0xf3e5_a3b1);
            train.shuffle(&mut rng);
            train.truncate(config.few_shot_samples);
            epochs = config.few_shot_epochs;
        }
        stages.push((stage.corpus.clone(), train, epochs));
    }

    backend.reset()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Vec::new();
    let mut step = 0usize;
    for (name, mut train, epochs) in stages {
        for epoch in 1..=epochs {
            train.shuffle(&mut rng);
            let mut seen = Vec::with_capacity(train.len());
            for batch in train.chunks(config.batch_size) {
                let mut ctx = TrainContext::new(&loss, Some(coherence));
                ctx.gate_open = step >= config.warmup_steps;
                seen.extend(backend.train_step(batch, ctx)?.samples);
                step += 1;
            }
            trace.push(EpochLoss {
                stage: name.clone(),
                epoch,
                loss: total_loss(seen)?,
            });
        }
    }

    let metrics = evaluate(backend, &test, coherence, config.frame)?;
    let row = ReportRow {
        model: backend.name().to_string(),
        dataset: config.dataset_label(),
        loss: loss.mode.table_label().to_string(),
        setting: config.regime.to_string(),
        metrics,
    };
    Ok(ExperimentResult {
        spec: spec.clone(),
        trace,
        row,
        duration: started.elapsed(),
    })
}

/// Generates a prediction for every test source and averages the report
/// columns. Each target is the single reference; `_C` columns use sources.
pub fn evaluate(
    backend: &mut dyn Backend,
    test: &[SimplificationInstance],
    coherence: &CoherenceModel<f64>,
    frame: usize,
) -> Result<MetricsReport> {
    if test.is_empty() {
        return Err(Error::NoSamples("empty test set".into()));
    }
    let mut predictions = Vec::with_capacity(test.len());
    for inst in test {
        let p = backend.generate(Task::Simplify, &inst.source)?;
        let content: Vec<_> = p.content().cloned().collect();
        predictions.push(frame_document(p.id.clone(), content, frame)?);
    }
    let per_instance: Vec<[f64; 6]> = test
        .par_iter()
        .zip(predictions.par_iter())
        .map(|(inst, pred)| instance_metrics(inst, pred, coherence))
        .collect::<Result<_>>()?;
    let mut sums = [0.0; 6];
    for m in &per_instance {
        for (s, v) in sums.iter_mut().zip(m) {
            *s += v;
        }
    }
    let n = test.len() as f64;
    Ok(MetricsReport {
        d_sari_s: sums[0] / n,
        fkgl_c: sums[1] / n,
        fkgl_s: sums[2] / n,
        fre_c: sums[3] / n,
        fre_s: sums[4] / n,
        coh_s: sums[5] / n,
        n_samples: test.len(),
    })
}

fn instance_metrics(
    inst: &SimplificationInstance,
    pred: &Document,
    coherence: &CoherenceModel<f64>,
) -> Result<[f64; 6]> {
    let src = ReadabilityStats::of(&inst.source)?;
    let out = ReadabilityStats::of(pred)?;
    Ok([
        d_sari::<f64>(&inst.source, pred, std::slice::from_ref(&inst.target))?,
        src.fkgl(),
        out.fkgl(),
        src.fre(),
        out.fre(),
        f64::from(predict_coherence(coherence, pred)?.0),
    ])
}

/// Rows of a regime comparison; `best[i]` marks the highest D-SARI within
/// each (model, loss) group.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub results: Vec<ExperimentResult>,
    pub best: Vec<bool>,
}

impl Comparison {
    pub fn rows(&self) -> Vec<ReportRow> {
        self.results.iter().map(|r| r.row.clone()).collect()
    }

    fn flags(&self) -> Vec<String> {
        self.best
            .iter()
            .map(|&b| if b { "*".to_string() } else { String::new() })
            .collect()
    }

    pub fn to_tsv(&self) -> String {
        ReportRow::to_tsv(&self.rows(), Some(("Best", &self.flags())))
    }

    pub fn to_table(&self) -> String {
        ReportRow::to_table(&self.rows(), Some(("Best", &self.flags())))
    }
}

/// Runs every config with a fresh backend from `make_backend` and flags the
/// best D-SARI per (model, loss) group. Ties flag the earliest row.
pub fn compare_regimes<F>(
    specs: &[ExperimentSpec],
    corpora: &Corpora,
    mut make_backend: F,
    coherence: &CoherenceModel<f64>,
) -> Result<Comparison>
where
    F: FnMut(&ExperimentSpec) -> Result<Box<dyn Backend>>,
{
    let first = specs
        .first()
        .ok_or_else(|| Error::Config("no experiments to compare".into()))?;
    if let Some(other) = specs
        .iter()
        .find(|s| s.config.test_corpus != first.config.test_corpus)
    {
        return Err(Error::Config(format!(
            "experiments use different test corpora: {:?} and {:?}",
            first.config.test_corpus, other.config.test_corpus
        )));
    }
    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        let mut backend = make_backend(spec)?;
        results.push(run_experiment(spec, corpora, backend.as_mut(), coherence)?);
    }
    let mut best_of: BTreeMap<(String, String), usize> = BTreeMap::new();
    for (i, r) in results.iter().enumerate() {
        let key = (r.row.model.clone(), r.row.loss.clone());
        let slot = best_of.entry(key).or_insert(i);
        if r.report().d_sari_s > results[*slot].report().d_sari_s {
            *slot = i;
        }
    }
    let mut best = vec![false; results.len()];
    for &i in best_of.values() {
        best[i] = true;
    }
    Ok(Comparison { results, best })
}

/// Labelled synthetic pairs with explicit splits. Training articles
/// contribute all four levels until `n_train` instances exist; each test
/// article contributes its level-4 pair.
pub fn synthetic_benchmark(seed: u64, n_train: usize, n_test: usize, frame: usize) -> Result<Vec<SimplificationInstance>> {
    if n_train == 0 || n_test == 0 {
        return Err(Error::InvalidArgument("benchmark needs train and test instances".into()));
    }
    let train_articles = n_train.div_ceil(4);
    let test_articles = n_test;
    let articles = generate_synthetic_corpus(seed, train_articles + test_articles)?;
    let (train, test) = articles.split_at(train_articles);
    let mut out = Vec::with_capacity(n_train + n_test);
    for (part, split, n) in [(train, Split::Train, n_train), (test, Split::Test, n_test)] {
        let mut instances = build_newsela_sl(part, frame)?.instances;
        if split == Split::Test {
            instances.retain(|i| i.readability_label == Some(4));
        }
        instances.truncate(n);
        for i in &mut instances {
            i.split = split;
        }
        out.extend(instances);
    }
    Ok(out)
}
