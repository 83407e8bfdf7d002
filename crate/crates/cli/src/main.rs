//! `simdoc` command-line tool.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage or configuration error.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use simdoc::backend::{spawn_external, Backend, BuiltinBackend, ExternalConfig};
use simdoc::coherence::{feature_rows, predict_coherence, train_coherence, TrainConfig};
use simdoc::corpus::{
    build_newsela_s, build_newsela_sl, generate_synthetic_corpus, ingest_gcdc, ingest_pairs,
    read_gcdc, read_instances, read_leveled_dir, read_pairs_dir, synthetic_coherence_examples,
    write_coherence_examples, write_instances, BuildReport, LeveledArticle,
};
use simdoc::harness::{compare_regimes, config_echo, run_experiment, Corpora, ExperimentSpec};
use simdoc::metrics::{d_sari, fkgl, fre, sari};
use simdoc::textproc::{Document, DEFAULT_FRAME};
use simdoc::{CoherenceModel, Error};

#[derive(Parser)]
#[command(name = "simdoc", version, about = "Document-level text simplification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a corpus file from leveled articles, pairs, GCDC records or the synthetic generator.
    BuildCorpus(BuildArgs),
    /// Score one prediction against its source and references.
    Score(ScoreArgs),
    /// Train the coherence classifier on GCDC-style records.
    TrainCoherence(TrainCoherenceArgs),
    /// Run one experiment from a config file.
    RunExperiment(RunArgs),
    /// Run several experiments and compare them in one table.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    #[value(name = "newsela-s")]
    NewselaS,
    #[value(name = "newsela-sl")]
    NewselaSl,
    Pairs,
    Synthetic,
    Gcdc,
    #[value(name = "synthetic-coherence")]
    SyntheticCoherence,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pairing {
    #[value(name = "newsela-s")]
    NewselaS,
    #[value(name = "newsela-sl")]
    NewselaSl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Tsv,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    scheme: Scheme,
    /// Input directory (leveled articles, pairs) or file (gcdc).
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of synthetic articles.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Pairing applied to synthetic articles.
    #[arg(long, value_enum, default_value_t = Pairing::NewselaSl)]
    pairing: Pairing,
    #[arg(long, default_value_t = DEFAULT_FRAME)]
    frame: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    source: PathBuf,
    #[arg(long)]
    prediction: PathBuf,
    #[arg(long, required = true)]
    reference: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct TrainCoherenceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    learning_rate: f64,
    #[arg(long, default_value_t = DEFAULT_FRAME)]
    frame: usize,
}

#[derive(Args)]
struct ConfigOverrides {
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long = "loss_mode")]
    loss_mode: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    stages: Option<String>,
    #[arg(long = "test_corpus")]
    test_corpus: Option<String>,
    #[arg(long = "few_shot_samples")]
    few_shot_samples: Option<String>,
    #[arg(long = "few_shot_epochs")]
    few_shot_epochs: Option<String>,
    #[arg(long = "fine_epochs")]
    fine_epochs: Option<String>,
    #[arg(long = "batch_size")]
    batch_size: Option<String>,
    #[arg(long = "warmup_steps")]
    warmup_steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    frame: Option<String>,
    #[arg(long = "coherence_model")]
    coherence_model: Option<PathBuf>,
}

impl ConfigOverrides {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<(), Error> {
        let pairs = [
            ("backend", &self.backend),
            ("regime", &self.regime),
            ("loss_mode", &self.loss_mode),
            ("delta", &self.delta),
            ("stages", &self.stages),
            ("test_corpus", &self.test_corpus),
            ("few_shot_samples", &self.few_shot_samples),
            ("few_shot_epochs", &self.few_shot_epochs),
            ("fine_epochs", &self.fine_epochs),
            ("batch_size", &self.batch_size),
            ("warmup_steps", &self.warmup_steps),
            ("seed", &self.seed),
            ("frame", &self.frame),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                spec.config.set(key, v)?;
            }
        }
        if let Some(p) = &self.coherence_model {
            spec.coherence_model = Some(p.clone());
        }
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Results directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: ConfigOverrides,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Optional directory receiving one results directory per config plus `comparison.tsv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(Error::Io(e))
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::BuildCorpus(a) => cmd_build_corpus(a),
        Command::Score(a) => cmd_score(a),
        Command::TrainCoherence(a) => cmd_train_coherence(a),
        Command::RunExperiment(a) => cmd_run_experiment(a),
        Command::Compare(a) => cmd_compare(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn require_exists(path: &Path, what: &str) -> CliResult {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn create(path: &Path) -> CliResult<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}

fn print_build_report(report: &BuildReport) {
    println!("{} instances", report.instances.len());
    if !report.skipped.is_empty() {
        println!("skipped {} articles: {}", report.skipped.len(), report.skipped.join(", "));
    }
}

fn build_leveled(articles: &[LeveledArticle], pairing: Pairing, frame: usize) -> Result<BuildReport, Error> {
    match pairing {
        Pairing::NewselaS => build_newsela_s(articles, frame),
        Pairing::NewselaSl => build_newsela_sl(articles, frame),
    }
}

fn cmd_build_corpus(a: BuildArgs) -> CliResult {
    let input = || -> CliResult<PathBuf> {
        let p = a
            .input
            .clone()
            .ok_or_else(|| Failure::Usage("--in is required for this scheme".into()))?;
        require_exists(&p, "input")?;
        Ok(p)
    };
    match a.scheme {
        Scheme::NewselaS | Scheme::NewselaSl => {
            let articles = read_leveled_dir(&input()?)?;
            let pairing = match a.scheme {
                Scheme::NewselaS => Pairing::NewselaS,
                _ => Pairing::NewselaSl,
            };
            let report = build_leveled(&articles, pairing, a.frame)?;
            write_instances(create(&a.out)?, &report.instances)?;
            print_build_report(&report);
        }
        Scheme::Synthetic => {
            let articles = generate_synthetic_corpus(a.seed, a.n)?;
            let report = build_leveled(&articles, a.pairing, a.frame)?;
            write_instances(create(&a.out)?, &report.instances)?;
            print_build_report(&report);
        }
        Scheme::Pairs => {
            let pairs = read_pairs_dir(&input()?)?;
            let instances = ingest_pairs(&pairs, a.frame)?;
            write_instances(create(&a.out)?, &instances)?;
            println!("{} instances", instances.len());
        }
        Scheme::Gcdc => {
            let records = read_gcdc(BufReader::new(File::open(input()?)?))?;
            let examples = ingest_gcdc(&records, a.frame)?;
            write_coherence_examples(create(&a.out)?, &examples)?;
            println!("{} examples", examples.len());
        }
        Scheme::SyntheticCoherence => {
            let examples = synthetic_coherence_examples(a.seed, a.n, a.frame)?;
            write_coherence_examples(create(&a.out)?, &examples)?;
            println!("{} examples", examples.len());
        }
    }
    Ok(())
}

fn read_document(path: &Path, id: &str) -> CliResult<Document> {
    require_exists(path, "file")?;
    let text = fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Failure::Domain(Error::NoText(format!("{} is empty", path.display()))));
    }
    Ok(Document::from_text(id, &text)?)
}

fn cmd_score(a: ScoreArgs) -> CliResult {
    let source = read_document(&a.source, "source")?;
    let prediction = read_document(&a.prediction, "prediction")?;
    let references = a
        .reference
        .iter()
        .enumerate()
        .map(|(i, p)| read_document(p, &format!("reference{i}")))
        .collect::<CliResult<Vec<_>>>()?;
    let values = [
        ("FKGL", fkgl::<f64>(&prediction)?),
        ("FRE", fre::<f64>(&prediction)?),
        ("SARI", sari::<f64>(&source, &prediction, &references)?),
        ("D-SARI", d_sari::<f64>(&source, &prediction, &references)?),
    ];
    let header: Vec<&str> = values.iter().map(|(k, _)| *k).collect();
    let cells: Vec<String> = values.iter().map(|(_, v)| format!("{v:.3}")).collect();
    match a.format {
        Format::Tsv => {
            println!("{}", header.join("\t"));
            println!("{}", cells.join("\t"));
        }
        Format::Table => {
            let w: Vec<usize> = header.iter().zip(&cells).map(|(h, c)| h.len().max(c.len())).collect();
            let line = |xs: Vec<String>| xs.join("  ");
            println!("{}", line(header.iter().zip(&w).map(|(h, w)| format!("{h:>w$}")).collect()));
            println!("{}", line(cells.iter().zip(&w).map(|(c, w)| format!("{c:>w$}")).collect()));
        }
    }
    Ok(())
}

fn cmd_train_coherence(a: TrainCoherenceArgs) -> CliResult {
    require_exists(&a.input, "input")?;
    let records = read_gcdc(BufReader::new(File::open(&a.input)?))?;
    let examples = ingest_gcdc(&records, a.frame)?;
    let config = TrainConfig {
        learning_rate: a.learning_rate,
        epochs: a.epochs,
        seed: a.seed,
    };
    let model = train_coherence::<f64>(&examples, &config)?;
    model.save(&a.out)?;
    let rows = feature_rows::<f64>(&examples)?;
    let mut correct = 0usize;
    for e in &examples {
        if predict_coherence(&model, &e.document)?.0 == e.binary_label {
            correct += 1;
        }
    }
    println!("examples\ttrain_accuracy\tfinal_loss");
    println!(
        "{}\t{:.4}\t{:.6}",
        rows.len(),
        correct as f64 / examples.len() as f64,
        model.mean_loss(&rows)
    );
    Ok(())
}

fn load_spec(path: &Path, overrides: Option<&ConfigOverrides>) -> CliResult<ExperimentSpec> {
    require_exists(path, "config")?;
    let mut spec = ExperimentSpec::load(path)?;
    spec.config.apply_env()?;
    if let Some(o) = overrides {
        o.apply(&mut spec)?;
    }
    spec.config.validate()?;
    Ok(spec)
}

fn load_corpora(paths: &BTreeMap<String, PathBuf>) -> CliResult<Corpora> {
    let mut corpora = Corpora::new();
    for (id, path) in paths {
        let file = File::open(path).map_err(|e| {
            Failure::Usage(format!("corpus {id}: cannot open {}: {e}", path.display()))
        })?;
        corpora.insert(id.clone(), read_instances(BufReader::new(file))?);
    }
    Ok(corpora)
}

fn load_coherence(spec: &ExperimentSpec) -> CliResult<CoherenceModel> {
    let path = spec
        .coherence_model
        .as_ref()
        .ok_or_else(|| Failure::Usage("coherence_model is not set".into()))?;
    require_exists(path, "coherence model")?;
    Ok(CoherenceModel::load(path)?)
}

fn make_backend(spec: &ExperimentSpec) -> Result<Box<dyn Backend>, Error> {
    let name = spec.config.backend.as_str();
    if name == "builtin" {
        Ok(Box::new(BuiltinBackend::default()))
    } else if let Some(command) = name.strip_prefix("external:") {
        Ok(Box::new(spawn_external(command, ExternalConfig::default())?))
    } else {
        Err(Error::Config(format!(
            "unknown backend {name:?}; use builtin or external:<command>"
        )))
    }
}

fn cmd_run_experiment(a: RunArgs) -> CliResult {
    let spec = load_spec(&a.config, Some(&a.overrides))?;
    let corpora = load_corpora(&spec.corpora)?;
    let coherence = load_coherence(&spec)?;
    eprint!("{}", config_echo(&spec));
    let mut backend = make_backend(&spec)?;
    let result = run_experiment(&spec, &corpora, backend.as_mut(), &coherence)?;
    for e in &result.trace {
        eprintln!("stage {} epoch {}: loss {:.6}", e.stage, e.epoch, e.loss.total);
    }
    result.write_to(&a.out)?;
    eprintln!("finished in {:.2?}", result.duration);
    print!("{}", simdoc::metrics::ReportRow::to_table(std::slice::from_ref(&result.row), None));
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> CliResult {
    let specs = a
        .configs
        .iter()
        .map(|p| load_spec(p, None))
        .collect::<CliResult<Vec<_>>>()?;
    let mut paths = BTreeMap::new();
    for spec in &specs {
        for (id, path) in &spec.corpora {
            if let Some(prev) = paths.insert(id.clone(), path.clone()) {
                if &prev != path {
                    return Err(Failure::Usage(format!(
                        "corpus {id} refers to both {} and {}",
                        prev.display(),
                        path.display()
                    )));
                }
            }
        }
        if spec.coherence_model != specs[0].coherence_model {
            return Err(Failure::Usage("configs use different coherence models".into()));
        }
    }
    let corpora = load_corpora(&paths)?;
    let coherence = load_coherence(&specs[0])?;
    let comparison = compare_regimes(&specs, &corpora, make_backend, &coherence)?;
    if let Some(dir) = &a.out {
        for (i, r) in comparison.results.iter().enumerate() {
            r.write_to(&dir.join(format!("run{:02}-{}", i + 1, r.row.setting)))?;
        }
        create(&dir.join("comparison.tsv"))?.write_all(comparison.to_tsv().as_bytes())?;
    }
    match a.format {
        Format::Tsv => print!("{}", comparison.to_tsv()),
        Format::Table => print!("{}", comparison.to_table()),
    }
    Ok(())
}
