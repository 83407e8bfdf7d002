use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::loss::{LossConfig, LossMode};
use crate::textproc::DEFAULT_FRAME;

pub const SEED_ENV: &str = "SIMDOC_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Zero,
    Few,
    Fine,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Zero => "zero",
            Regime::Few => "few",
            Regime::Fine => "fine",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Regime::Zero),
            "few" => Ok(Regime::Few),
            "fine" => Ok(Regime::Fine),
            other => Err(Error::Config(format!("unknown regime {other:?}"))),
        }
    }
}

/// One training stage: a corpus id and, optionally, its epoch count
/// (defaulting to `fine_epochs`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stage {
    pub corpus: String,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub backend: String,
    pub regime: Regime,
    pub loss_mode: LossMode,
    pub delta: f64,
    pub stages: Vec<Stage>,
    pub test_corpus: String,
    pub few_shot_samples: usize,
    pub few_shot_epochs: usize,
    pub fine_epochs: usize,
    pub batch_size: usize,
    pub warmup_steps: usize,
    pub seed: u64,
    pub frame: usize,
}

pub const CONFIG_KEYS: [&str; 13] = [
    "backend",
    "regime",
    "loss_mode",
    "delta",
    "stages",
    "test_corpus",
    "few_shot_samples",
    "few_shot_epochs",
    "fine_epochs",
    "batch_size",
    "warmup_steps",
    "seed",
    "frame",
];

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            backend: "builtin".into(),
            regime: Regime::Zero,
            loss_mode: LossMode::S,
            delta: 0.9,
            stages: Vec::new(),
            test_corpus: String::new(),
            few_shot_samples: 10,
            few_shot_epochs: 1,
            fine_epochs: 5,
            batch_size: 8,
            warmup_steps: 0,
            seed: 0,
            frame: DEFAULT_FRAME,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

pub fn parse_stages(value: &str) -> Result<Vec<Stage>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|part| match part.split_once(':') {
            Some((corpus, epochs)) if !corpus.trim().is_empty() => Ok(Stage {
                corpus: corpus.trim().to_string(),
                epochs: Some(parse_num("stages", epochs.trim())?),
            }),
            Some(_) => Err(Error::Config(format!("stages: empty corpus id in {part:?}"))),
            None => Ok(Stage {
                corpus: part.to_string(),
                epochs: None,
            }),
        })
        .collect()
}

fn format_stages(stages: &[Stage]) -> String {
    stages
        .iter()
        .map(|s| match s.epochs {
            Some(e) => format!("{}:{e}", s.corpus),
            None => s.corpus.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "backend" => self.backend = value.to_string(),
            "regime" => self.regime = value.parse()?,
            "loss_mode" => {
                self.loss_mode = value
                    .parse()
                    .map_err(|_| Error::Config(format!("unknown loss mode {value:?}")))?
            }
            "delta" => self.delta = parse_num(key, value)?,
            "stages" => self.stages = parse_stages(value)?,
            "test_corpus" => self.test_corpus = value.to_string(),
            "few_shot_samples" => self.few_shot_samples = parse_num(key, value)?,
            "few_shot_epochs" => self.few_shot_epochs = parse_num(key, value)?,
            "fine_epochs" => self.fine_epochs = parse_num(key, value)?,
            "batch_size" => self.batch_size = parse_num(key, value)?,
            "warmup_steps" => self.warmup_steps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "frame" => self.frame = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "backend" => self.backend.clone(),
            "regime" => self.regime.to_string(),
            "loss_mode" => self.loss_mode.to_string(),
            "delta" => format!("{}", self.delta),
            "stages" => format_stages(&self.stages),
            "test_corpus" => self.test_corpus.clone(),
            "few_shot_samples" => self.few_shot_samples.to_string(),
            "few_shot_epochs" => self.few_shot_epochs.to_string(),
            "fine_epochs" => self.fine_epochs.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "warmup_steps" => self.warmup_steps.to_string(),
            "seed" => self.seed.to_string(),
            "frame" => self.frame.to_string(),
            _ => return None,
        })
    }

    pub fn loss_config(&self) -> Result<LossConfig<f64>> {
        LossConfig::new(self.loss_mode, self.delta).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn stage_epochs(&self, stage: &Stage) -> usize {
        stage.epochs.unwrap_or(self.fine_epochs)
    }

    /// Dataset column of the report: training corpora joined by `+`, or the
    /// test corpus when nothing is trained.
    pub fn dataset_label(&self) -> String {
        if self.stages.is_empty() {
            self.test_corpus.clone()
        } else {
            self.stages
                .iter()
                .map(|s| s.corpus.as_str())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.loss_config()?;
        if self.test_corpus.is_empty() {
            return Err(Error::Config("test_corpus is not set".into()));
        }
        match (self.regime, self.stages.is_empty()) {
            (Regime::Zero, false) => {
                return Err(Error::Config("zero regime takes no training stages".into()))
            }
            (Regime::Few | Regime::Fine, true) => {
                return Err(Error::Config(format!("{} regime needs training stages", self.regime)))
            }
            _ => {}
        }
        for (name, v) in [
            ("few_shot_samples", self.few_shot_samples),
            ("few_shot_epochs", self.few_shot_epochs),
            ("batch_size", self.batch_size),
            ("frame", self.frame),
        ] {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.stages.iter().any(|s| self.stage_epochs(s) == 0) {
            return Err(Error::Config("stage epochs must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies the seed override from the environment, if set.
    pub fn apply_env(&mut self) -> Result<()> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = parse_num(SEED_ENV, &v)?;
        }
        Ok(())
    }
}

/// A config plus the files it refers to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSpec {
    pub config: ExperimentConfig,
    pub corpora: BTreeMap<String, PathBuf>,
    pub coherence_model: Option<PathBuf>,
}

impl ExperimentSpec {
    /// Parses `key = value` lines; `#` starts a comment. Relative paths are
    /// resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut spec = ExperimentSpec::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(id) = key.strip_prefix("corpus.") {
                spec.corpora.insert(id.to_string(), base.join(value));
            } else if key == "coherence_model" {
                spec.coherence_model = Some(base.join(value));
            } else {
                spec.config.set(key, value)?;
            }
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            out.push_str(&format!("{key} = {}\n", self.config.get(key).unwrap_or_default()));
        }
        for (id, path) in &self.corpora {
            out.push_str(&format!("corpus.{id} = {}\n", path.display()));
        }
        if let Some(p) = &self.coherence_model {
            out.push_str(&format!("coherence_model = {}\n", p.display()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_text() {
        let text = "# demo\nregime = fine\nloss_mode = S_R_C\nstages = wiki:5, news\n\
                    test_corpus = news\ncorpus.news = data/news.jsonl\ncorpus.wiki = /abs/wiki.jsonl\n\
                    coherence_model = coh.txt\nseed = 42\ndelta = 0.75\n";
        let spec = ExperimentSpec::parse(text, Path::new("/base")).unwrap();
        let c = &spec.config;
        assert_eq!(c.regime, Regime::Fine);
        assert_eq!(c.loss_mode, LossMode::SRC);
        assert_eq!(c.stage_epochs(&c.stages[0]), 5);
        assert_eq!(c.stages[1].epochs, None);
        assert_eq!(c.dataset_label(), "wiki+news");
        assert_eq!(spec.corpora["news"], PathBuf::from("/base/data/news.jsonl"));
        assert_eq!(spec.corpora["wiki"], PathBuf::from("/abs/wiki.jsonl"));
        assert_eq!(spec.coherence_model, Some(PathBuf::from("/base/coh.txt")));
        let again = ExperimentSpec::parse(&spec.to_text(), Path::new("/elsewhere")).unwrap();
        assert_eq!(again, spec);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |t: &str| ExperimentSpec::parse(t, Path::new("."));
        assert!(matches!(bad("colour = red"), Err(Error::Config(_))));
        assert!(matches!(bad("seed = many"), Err(Error::Config(_))));
        assert!(matches!(bad("just words"), Err(Error::Config(_))));
        assert!(matches!(bad("loss_mode = S_X"), Err(Error::Config(_))));

        let mut c = ExperimentConfig {
            test_corpus: "t".into(),
            ..Default::default()
        };
        c.validate().unwrap();
        c.stages = parse_stages("a:2").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.regime = Regime::Fine;
        c.validate().unwrap();
        c.delta = 1.5;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }
}
