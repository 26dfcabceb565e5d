//! Command implementations behind the `mrforge` binary.
//!
//! Each command takes a typed configuration and either writes its outputs
//! or fails with an [`ErrorCategory`] that maps onto the process exit code.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::corpus::{self, CorpusError, CorpusInstance, CorpusStats, Overlap, SplitSpec};
use crate::lexicon::{self, AttributeLexicon, LexiconError};
use crate::metrics::{self, MarkerConfig};
use crate::mr::Variant;
use crate::sentence::{self, ConlluError, FilterPolicy, ParsedSentence};

pub const SEED_ENV: &str = "MRFORGE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Io,
    Format,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Io => "io",
            ErrorCategory::Format => "format",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Io => 3,
            ErrorCategory::Format => 4,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            category: ErrorCategory::Config,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            category: ErrorCategory::Io,
            message: message.into(),
        }
    }

    pub fn format(message: impl Into<String>) -> Self {
        CliError {
            category: ErrorCategory::Format,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category.as_str(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<LexiconError> for CliError {
    fn from(e: LexiconError) -> Self {
        match e {
            LexiconError::Io { .. } => CliError::io(e.to_string()),
            LexiconError::Manifest { .. } => CliError::config(e.to_string()),
            _ => CliError::format(e.to_string()),
        }
    }
}

impl From<ConlluError> for CliError {
    fn from(e: ConlluError) -> Self {
        match e {
            ConlluError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::format(e.to_string()),
        }
    }
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Io(_) => CliError::io(e.to_string()),
            CorpusError::BadSplit(_) => CliError::config(e.to_string()),
            _ => CliError::format(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn write_string(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Seed from `MRFORGE_SEED` when set, else the flag value, else 0.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

/// Parses `0.8,0.1,0.1`.
pub fn parse_split(s: &str, seed: u64) -> CliResult<SplitSpec> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad split `{s}`")))?;
    let [train, dev, test] = parts[..] else {
        return Err(CliError::config(format!("split `{s}` needs three fractions")));
    };
    let spec = SplitSpec { train, dev, test, seed };
    spec.validate()?;
    Ok(spec)
}

/// Parses `base`, `adj`, `sent`, `style`, `all` or a comma list of them.
pub fn parse_variants(s: &str) -> CliResult<Vec<Variant>> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim) {
        if part == "all" {
            out.extend(Variant::ALL);
        } else {
            out.insert(Variant::from_str(part).map_err(|e| CliError::config(e.to_string()))?);
        }
    }
    if out.is_empty() {
        return Err(CliError::config("no variants selected"));
    }
    Ok(out.into_iter().collect())
}

/// Short stable hash of a serializable configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let body = serde_json::to_vec(config).expect("config serializes");
    hex::encode(&Sha256::digest(&body)[..8])
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildConfig {
    pub lexicons: PathBuf,
    pub conllu: Vec<PathBuf>,
    pub meta: Option<PathBuf>,
    pub policy: FilterPolicy,
    pub variants: Vec<Variant>,
    pub split: SplitSpec,
    pub sample: Option<usize>,
    /// Not part of the config hash, so a rebuild elsewhere hashes the same.
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildReport {
    pub seed: u64,
    pub config_hash: String,
    pub sentences_read: usize,
    pub rejected: BTreeMap<String, usize>,
    pub without_values: usize,
    pub instances: usize,
    pub compounds_added: usize,
    pub splits: BTreeMap<String, usize>,
    /// Test MRs also seen in train, per variant.
    pub overlap: BTreeMap<String, Overlap>,
    pub corpus: CorpusStats,
    pub train: BTreeMap<String, CorpusStats>,
}

pub fn load_sentences(conllu: &[PathBuf], meta: Option<&Path>) -> CliResult<Vec<ParsedSentence>> {
    let metadata = match meta {
        Some(p) => sentence::read_metadata(open(p)?)?,
        None => HashMap::new(),
    };
    let mut out = Vec::new();
    for path in conllu {
        let sentences = sentence::read_conllu(open(path)?, &metadata).map_err(|e| {
            let mut err = CliError::from(e);
            err.message = format!("{}: {}", path.display(), err.message);
            err
        })?;
        out.extend(sentences);
    }
    Ok(out)
}

/// Filters, extracts, splits and writes every requested variant.
///
/// Layout under `out`: `corpus.jsonl` (+STYLE, original casing),
/// `<variant>/<split>.jsonl` (lowercased references), `compounds.tsv`,
/// `stats.json` and `stats.txt`.
pub fn cmd_build(cfg: &BuildConfig) -> CliResult<BuildReport> {
    cfg.policy.validate().map_err(|e| CliError::config(e.to_string()))?;
    cfg.split.validate()?;
    if cfg.conllu.is_empty() {
        return Err(CliError::config("no CoNLL-U input given"));
    }
    let mut lex = lexicon::load_manifest(&cfg.lexicons)?;
    let mut sentences = load_sentences(&cfg.conllu, cfg.meta.as_deref())?;
    let read = sentences.len();
    if let Some(n) = cfg.sample {
        sentences =
            sentence::sample_sentences(&sentences, n, cfg.split.seed).map_err(|e| CliError::config(e.to_string()))?;
    }
    let seed_compounds = lex.compounds().count();
    let outcome = corpus::build_instances(&sentences, &mut lex, &cfg.policy)?;
    if outcome.instances.is_empty() {
        return Err(CliError::format("no extractable sentences"));
    }
    let split = corpus::split_corpus(&outcome.instances, &cfg.split)?;

    fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(format!("{}: {e}", cfg.out.display())))?;
    corpus::write_jsonl(create(&cfg.out.join("corpus.jsonl"))?, &outcome.instances, false)
        .map_err(|e| CliError::io(e.to_string()))?;

    let markers = MarkerConfig::default();
    let mut overlap = BTreeMap::new();
    let mut train_stats = BTreeMap::new();
    for &variant in &cfg.variants {
        let dir = cfg.out.join(variant.slug());
        fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        let project = |xs: &[CorpusInstance]| -> Vec<CorpusInstance> {
            xs.iter()
                .map(|i| i.restrict(variant).expect("+STYLE restricts to any variant"))
                .collect()
        };
        let (train, dev, test) = (project(&split.train), project(&split.dev), project(&split.test));
        for (name, part) in [("train", &train), ("dev", &dev), ("test", &test)] {
            corpus::write_jsonl(create(&dir.join(format!("{name}.jsonl")))?, part, true)
                .map_err(|e| CliError::io(e.to_string()))?;
        }
        overlap.insert(variant.slug().to_string(), corpus::overlap_report(&train, &test)?);
        if !train.is_empty() {
            train_stats.insert(variant.slug().to_string(), corpus::corpus_stats(&train, &markers)?);
        }
    }

    let mut compounds = String::new();
    for (form, attr) in lex.compounds() {
        compounds.push_str(&format!("{form}\t{attr}\n"));
    }
    write_string(&cfg.out.join("compounds.tsv"), &compounds)?;

    let report = BuildReport {
        seed: cfg.split.seed,
        config_hash: config_hash(cfg),
        sentences_read: read,
        rejected: outcome
            .rejected
            .iter()
            .map(|(r, n)| (serde_json::to_value(r).unwrap().as_str().unwrap().to_string(), *n))
            .collect(),
        without_values: outcome.without_values,
        instances: outcome.instances.len(),
        compounds_added: lex.compounds().count() - seed_compounds,
        splits: BTreeMap::from([
            ("train".to_string(), split.train.len()),
            ("dev".to_string(), split.dev.len()),
            ("test".to_string(), split.test.len()),
        ]),
        overlap,
        corpus: corpus::corpus_stats(&outcome.instances, &markers)?,
        train: train_stats,
    };
    write_string(&cfg.out.join("stats.json"), &to_json(&report))?;
    write_string(&cfg.out.join("stats.txt"), &report.corpus.to_table())?;
    Ok(report)
}

pub fn read_corpus(path: &Path) -> CliResult<Vec<CorpusInstance>> {
    corpus::read_jsonl(open(path)?).map_err(|e| match e {
        CorpusError::Io(_) => CliError::io(format!("{}: {e}", path.display())),
        _ => CliError::format(format!("{}: {e}", path.display())),
    })
}

/// Generated texts, either one per line or JSON lines carrying `id` and
/// `output` (or `reference`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outputs {
    Lines(Vec<String>),
    Keyed(Vec<(String, String)>),
}

impl Outputs {
    pub fn texts(&self) -> Vec<String> {
        match self {
            Outputs::Lines(v) => v.clone(),
            Outputs::Keyed(v) => v.iter().map(|(_, t)| t.clone()).collect(),
        }
    }
}

pub fn read_outputs(path: &Path) -> CliResult<Outputs> {
    let lines: Vec<String> = open(path)?
        .lines()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let mut lines = lines;
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    let first_is_object = lines
        .first()
        .and_then(|l| serde_json::from_str::<Value>(l).ok())
        .is_some_and(|v| v.is_object());
    if !first_is_object {
        return Ok(Outputs::Lines(lines));
    }
    let mut keyed = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let bad = |m: &str| CliError::format(format!("{} line {}: {m}", path.display(), i + 1));
        let v: Value = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
        let id = v.get("id").and_then(Value::as_str).ok_or_else(|| bad("missing `id`"))?;
        let text = v
            .get("output")
            .or_else(|| v.get("reference"))
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing `output`"))?;
        keyed.push((id.to_string(), text.to_string()));
    }
    Ok(Outputs::Keyed(keyed))
}

/// Pairs outputs with corpus instances by line number or by id.
pub fn align(corpus: &[CorpusInstance], outputs: &Outputs) -> CliResult<Vec<String>> {
    match outputs {
        Outputs::Lines(lines) => {
            if lines.len() != corpus.len() {
                return Err(CliError::format(format!(
                    "misaligned: {} outputs for {} corpus instances",
                    lines.len(),
                    corpus.len()
                )));
            }
            Ok(lines.clone())
        }
        Outputs::Keyed(pairs) => {
            let mut by_id: HashMap<&str, &str> = HashMap::new();
            for (id, text) in pairs {
                if by_id.insert(id, text).is_some() {
                    return Err(CliError::format(format!("misaligned: duplicate output id `{id}`")));
                }
            }
            if by_id.len() != corpus.len() {
                return Err(CliError::format(format!(
                    "misaligned: {} outputs for {} corpus instances",
                    by_id.len(),
                    corpus.len()
                )));
            }
            corpus
                .iter()
                .map(|inst| {
                    by_id
                        .get(inst.id.as_str())
                        .map(|t| t.to_string())
                        .ok_or_else(|| CliError::format(format!("misaligned: no output for id `{}`", inst.id)))
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ser,
    Bleu,
    Nist,
    Entropy,
    Templates,
    Discourse,
    Style,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Ser,
        Metric::Bleu,
        Metric::Nist,
        Metric::Entropy,
        Metric::Templates,
        Metric::Discourse,
        Metric::Style,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Ser => "ser",
            Metric::Bleu => "bleu",
            Metric::Nist => "nist",
            Metric::Entropy => "entropy",
            Metric::Templates => "templates",
            Metric::Discourse => "discourse",
            Metric::Style => "style",
        }
    }
}

pub fn parse_metrics(s: &str) -> CliResult<BTreeSet<Metric>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            Metric::ALL
                .into_iter()
                .find(|m| m.name() == p)
                .ok_or_else(|| CliError::config(format!("unknown metric `{p}`")))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalConfig {
    pub corpus: PathBuf,
    pub outputs: PathBuf,
    /// `None` selects every metric the inputs allow.
    pub metrics: Option<BTreeSet<Metric>>,
    pub lexicons: Option<PathBuf>,
    pub top_k: usize,
}

/// Scores outputs against a corpus file. The report holds exactly the
/// requested metrics under `metrics`.
pub fn cmd_eval(cfg: &EvalConfig) -> CliResult<Value> {
    let corpus = read_corpus(&cfg.corpus)?;
    if corpus.is_empty() {
        return Err(CliError::format(format!("{}: empty corpus", cfg.corpus.display())));
    }
    let outputs = align(&corpus, &read_outputs(&cfg.outputs)?)?;
    let all_style = corpus.iter().all(|i| i.mr.variant == Variant::Style);
    let metrics = match &cfg.metrics {
        Some(m) => m.clone(),
        None => Metric::ALL
            .into_iter()
            .filter(|m| match m {
                Metric::Templates => cfg.lexicons.is_some(),
                Metric::Style => all_style,
                _ => true,
            })
            .collect(),
    };
    let lex = match &cfg.lexicons {
        Some(p) => Some(lexicon::load_manifest(p)?),
        None => None,
    };
    let references: Vec<String> = corpus.iter().map(|i| i.reference.clone()).collect();
    let mrs: Vec<_> = corpus.iter().map(|i| i.mr.clone()).collect();

    let mut report = Map::new();
    for m in &metrics {
        let value = match m {
            Metric::Ser => {
                let mut totals = (0usize, 0usize, 0usize);
                let mut sum = 0.0;
                for (mr, out) in mrs.iter().zip(&outputs) {
                    let b = metrics::ser(mr, out).map_err(|e| CliError::format(e.to_string()))?;
                    totals.0 += b.deletions;
                    totals.1 += b.repetitions;
                    totals.2 += b.slots;
                    sum += b.ser();
                }
                json!({
                    "average": sum / mrs.len() as f64,
                    "deletions": totals.0,
                    "repetitions": totals.1,
                    "slots": totals.2,
                })
            }
            Metric::Bleu => json!(metrics::bleu(&outputs, &references).map_err(|e| CliError::format(e.to_string()))?),
            Metric::Nist => json!(metrics::nist(&outputs, &references).map_err(|e| CliError::format(e.to_string()))?),
            Metric::Entropy => match metrics::entropy(&outputs) {
                Ok(e) => json!(e),
                Err(_) => Value::Null,
            },
            Metric::Templates => {
                let lex = lex
                    .as_ref()
                    .ok_or_else(|| CliError::config("the templates metric needs --lexicons"))?;
                template_json(&metrics::template_ranks(&outputs, lex), cfg.top_k)
            }
            Metric::Discourse => {
                let markers = MarkerConfig::default();
                let (mut c, mut a) = (0usize, 0usize);
                for out in &outputs {
                    let d = metrics::detect_discourse(out, &markers);
                    c += usize::from(d.contrast);
                    a += usize::from(d.aggregation);
                }
                json!({ "contrast": c, "aggregation": a })
            }
            Metric::Style => {
                serde_json::to_value(metrics::style_hits(&mrs, &outputs).map_err(|e| CliError::format(e.to_string()))?)
                    .expect("style report serializes")
            }
        };
        report.insert(m.name().to_string(), value);
    }
    Ok(json!({
        "config_hash": config_hash(cfg),
        "instances": corpus.len(),
        "metrics": report,
    }))
}

/// Fixed-layout rendering of the scalar entries of an eval report.
pub fn eval_table(report: &Value) -> String {
    let mut out = String::new();
    let Some(metrics) = report.get("metrics").and_then(Value::as_object) else {
        return out;
    };
    let mut row = |name: String, v: &Value| match v {
        Value::Number(n) => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            if n.is_f64() {
                out.push_str(&format!("{name:<36}{x:>12.4}\n"));
            } else {
                out.push_str(&format!("{name:<36}{x:>12}\n"));
            }
        }
        Value::Null => out.push_str(&format!("{name:<36}{:>12}\n", "-")),
        _ => {}
    };
    for (metric, value) in metrics {
        match value {
            Value::Object(fields) => {
                for (k, v) in fields {
                    row(format!("{metric}.{k}"), v);
                }
            }
            v => row(metric.clone(), v),
        }
    }
    out
}

fn template_json(report: &metrics::TemplateReport, top_k: usize) -> Value {
    json!({
        "unique": report.unique,
        "total": report.total,
        "top": report.top(top_k),
    })
}

pub fn cmd_stats(corpus: &Path) -> CliResult<CorpusStats> {
    let instances = read_corpus(corpus)?;
    Ok(corpus::corpus_stats(&instances, &MarkerConfig::default())?)
}

pub fn cmd_templates(outputs: &Path, lexicons: &Path, top_k: usize) -> CliResult<metrics::TemplateReport> {
    let lex: AttributeLexicon = lexicon::load_manifest(lexicons)?;
    let texts = read_outputs(outputs)?.texts();
    let mut report = metrics::template_ranks(&texts, &lex);
    report.templates.truncate(top_k);
    Ok(report)
}

/// Fixed-layout template table.
pub fn template_table(report: &metrics::TemplateReport) -> String {
    let mut out = format!("{:>5} {:>8}  pattern\n", "rank", "count");
    for t in &report.templates {
        out.push_str(&format!("{:>5} {:>8}  {}\n", t.rank, t.count, t.pattern));
    }
    out.push_str(&format!("unique templates: {} of {}\n", report.unique, report.total));
    out
}

/// Re-splits a corpus file into `train/dev/test.jsonl` under `out`.
pub fn cmd_split(corpus: &Path, spec: &SplitSpec, out: &Path) -> CliResult<Value> {
    let instances = read_corpus(corpus)?;
    let split = corpus::split_corpus(&instances, spec)?;
    fs::create_dir_all(out).map_err(|e| CliError::io(format!("{}: {e}", out.display())))?;
    for (name, part) in [("train", &split.train), ("dev", &split.dev), ("test", &split.test)] {
        corpus::write_jsonl(create(&out.join(format!("{name}.jsonl")))?, part, false)
            .map_err(|e| CliError::io(e.to_string()))?;
    }
    Ok(json!({
        "seed": spec.seed,
        "config_hash": config_hash(&(corpus, spec)),
        "train": split.train.len(),
        "dev": split.dev.len(),
        "test": split.test.len(),
    }))
}

pub fn cmd_overlap(train: &Path, test: &Path) -> CliResult<Overlap> {
    Ok(corpus::overlap_report(&read_corpus(train)?, &read_corpus(test)?)?)
}

pub fn pretty<T: Serialize>(value: &T) -> String {
    to_json(value)
}
