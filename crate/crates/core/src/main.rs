use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mrforge::cli::{self, BuildConfig, CliError, CliResult, EvalConfig};
use mrforge::FilterPolicy;

/// Build MR-to-text corpora from parsed review sentences and score generator outputs.
#[derive(Debug, Parser)]
#[command(name = "mrforge", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter, extract and split a corpus.
    Build {
        /// Lexicon manifest (TOML mapping attribute types to seed files).
        #[arg(long)]
        lexicons: PathBuf,
        /// CoNLL-U input; may be repeated.
        #[arg(long, required = true)]
        conllu: Vec<PathBuf>,
        /// Review metadata JSONL (review_id, business_id, stars).
        #[arg(long)]
        meta: Option<PathBuf>,
        /// Filter policy TOML overriding the defaults.
        #[arg(long)]
        policy: Option<PathBuf>,
        /// base, adj, sent, style, all, or a comma list.
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        split: String,
        /// Overridden by MRFORGE_SEED when set.
        #[arg(long)]
        seed: Option<u64>,
        /// Sample this many sentences before filtering.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score outputs against a corpus file.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        /// One output per line, or JSON lines with `id` and `output`.
        #[arg(long)]
        outputs: PathBuf,
        /// Comma list of ser, bleu, nist, entropy, templates, discourse, style.
        #[arg(long)]
        metrics: Option<String>,
        /// Needed for the templates metric.
        #[arg(long)]
        lexicons: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        top_k: usize,
        /// Print a fixed-layout table instead of JSON.
        #[arg(long)]
        table: bool,
    },
    /// Corpus statistics of a corpus file.
    Stats {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Rank delexicalized templates in a set of outputs.
    Templates {
        #[arg(long)]
        outputs: PathBuf,
        #[arg(long)]
        lexicons: PathBuf,
        #[arg(long, default_value_t = 20)]
        top_k: usize,
    },
    /// Split a corpus file into train/dev/test.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "0.8,0.1,0.1")]
        split: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// How many test MRs also occur in train.
    Overlap {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

fn read_policy(path: Option<PathBuf>) -> CliResult<FilterPolicy> {
    let Some(path) = path else {
        return Ok(FilterPolicy::default());
    };
    let body = std::fs::read_to_string(&path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&body).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn run(args: Args) -> CliResult<()> {
    match args.command {
        Command::Build {
            lexicons,
            conllu,
            meta,
            policy,
            variant,
            split,
            seed,
            sample,
            out,
        } => {
            let seed = cli::resolve_seed(seed)?;
            let cfg = BuildConfig {
                lexicons,
                conllu,
                meta,
                policy: read_policy(policy)?,
                variants: cli::parse_variants(&variant)?,
                split: cli::parse_split(&split, seed)?,
                sample,
                out,
            };
            let report = cli::cmd_build(&cfg)?;
            eprintln!(
                "built {} instances (train {}, dev {}, test {}) into {}",
                report.instances,
                report.splits["train"],
                report.splits["dev"],
                report.splits["test"],
                cfg.out.display()
            );
            print!("{}", report.corpus.to_table());
        }
        Command::Eval {
            corpus,
            outputs,
            metrics,
            lexicons,
            top_k,
            table,
        } => {
            let metrics = metrics.as_deref().map(cli::parse_metrics).transpose()?;
            let report = cli::cmd_eval(&EvalConfig {
                corpus,
                outputs,
                metrics,
                lexicons,
                top_k,
            })?;
            if table {
                print!("{}", cli::eval_table(&report));
            } else {
                print!("{}", cli::pretty(&report));
            }
        }
        Command::Stats { corpus, json } => {
            let stats = cli::cmd_stats(&corpus)?;
            if json {
                print!("{}", cli::pretty(&stats));
            } else {
                print!("{}", stats.to_table());
            }
        }
        Command::Templates {
            outputs,
            lexicons,
            top_k,
        } => {
            print!(
                "{}",
                cli::template_table(&cli::cmd_templates(&outputs, &lexicons, top_k)?)
            );
        }
        Command::Split {
            corpus,
            split,
            seed,
            out,
        } => {
            let spec = cli::parse_split(&split, cli::resolve_seed(seed)?)?;
            print!("{}", cli::pretty(&cli::cmd_split(&corpus, &spec, &out)?));
        }
        Command::Overlap { train, test } => {
            print!("{}", cli::pretty(&cli::cmd_overlap(&train, &test)?));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code() as u8)
        }
    }
}
