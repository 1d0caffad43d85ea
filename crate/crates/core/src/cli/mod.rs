//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a validation or metric condition fails
//! (altered hypotheses, undefined Sigma), 2 on usage and input errors.

pub mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::corpus::{
    compute_stats, filter_noise, filter_segmented, load_corpus, partition, CorpusStats,
};
use crate::error::{Error, Result};
use crate::grid::{grid_search, parse_range, GridResult};
use crate::metrics::{evaluate, validate_corpus, DiffOp, EvalReport, ValidationSummary};
use crate::scorer::{ScorerSpec, SidecarOptions};
use crate::segmenter::{score_corpus, segment_scored, SegmentationConfig};
use crate::text::DEFAULT_MARKER;

pub use self::manifest::RunManifest;

pub const TIMEOUT_ENV: &str = "ERSEG_SIDECAR_TIMEOUT_SECS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "erseg",
    version,
    about = "Easy-Read sentence segmentation toolkit"
)]
pub struct Cli {
    /// Standard-output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Break marker token in corpus files.
    #[arg(long, global = true, default_value = DEFAULT_MARKER)]
    pub marker: String,
    /// Worker threads for sentence-level parallelism.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 5)]
    pub min_words: usize,
    #[arg(long, default_value_t = 15)]
    pub max_words: usize,
    /// Beam width.
    #[arg(long, default_value_t = 5)]
    pub beam: usize,
    /// Score of a forced short final segment.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub penalty: f64,
}

impl WindowArgs {
    fn config(&self) -> SegmentationConfig {
        SegmentationConfig {
            min_words: self.min_words,
            max_words: self.max_words,
            beam_width: self.beam,
            penalty: self.penalty,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ScorerArgs {
    /// tree:<treefile> | file:<scorefile> | subprocess:<command>
    #[arg(long)]
    pub scorer: String,
    /// Per-request sidecar timeout.
    #[arg(long, env = TIMEOUT_ENV, default_value_t = 60)]
    pub timeout_secs: u64,
}

impl ScorerArgs {
    fn spec(&self) -> Result<ScorerSpec> {
        self.scorer.parse()
    }

    fn sidecar(&self) -> SidecarOptions {
        SidecarOptions {
            timeout: Duration::from_secs(self.timeout_secs),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corpus statistics.
    Stats {
        corpus: PathBuf,
        /// Keep only sentences with at least one break.
        #[arg(long)]
        segmented_only: bool,
        /// Drop sentences with text after a sentence-final punctuation mark.
        #[arg(long)]
        filter_noise: bool,
        /// Also write the statistics as JSON here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Seeded train/dev/test split.
    Partition {
        corpus: PathBuf,
        #[arg(long)]
        dev: usize,
        #[arg(long)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        segmented_only: bool,
        #[arg(long)]
        filter_noise: bool,
    },
    /// Segment every sentence of a corpus.
    Segment {
        corpus: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score hypotheses against references.
    Evaluate {
        hyp: PathBuf,
        reference: PathBuf,
        /// Comma-separated subset of sigma,bleu,f1.
        #[arg(long, default_value = "sigma,bleu,f1")]
        metrics: String,
        /// Window for the under/over-window segment diagnostics.
        #[arg(long, default_value_t = 5)]
        min_words: usize,
        #[arg(long, default_value_t = 15)]
        max_words: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check that hypotheses preserve their source text.
    Validate {
        hyp: PathBuf,
        src: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// F1 for every (min, max) window.
    GridSearch {
        corpus: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        /// Inclusive min_words range, e.g. 1-5.
        #[arg(long, default_value = "1-5")]
        min_range: String,
        /// Inclusive max_words range, e.g. 5-15.
        #[arg(long, default_value = "5-15")]
        max_range: String,
        #[arg(long, default_value_t = 5)]
        beam: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        penalty: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for an error.
pub fn exit_code(error: &Error) -> u8 {
    match error {
        Error::Metric(_) => 1,
        _ => 2,
    }
}

/// Parse process arguments, run, and map the outcome to an exit code.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("erseg: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    emit(out, &(json + "\n"))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Run a parsed command, writing human or JSON output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    if cli.jobs == 0 {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Stats {
            corpus,
            segmented_only,
            filter_noise: noise,
            report,
        } => {
            let mut c = load_corpus(corpus, &cli.marker)?;
            let mut removed = None;
            if *noise {
                let (kept, n) = filter_noise(&c);
                c = kept;
                removed = Some(n);
            }
            if *segmented_only {
                c = filter_segmented(&c);
            }
            let stats = compute_stats(&c)?;
            match cli.format {
                Format::Text => {
                    emit(out, &stats_table(&stats))?;
                    if let Some(n) = removed {
                        emit(out, &format!("{:<28}{n:>10}\n", "noise-filtered"))?;
                    }
                }
                Format::Json => emit_json(out, &stats)?,
            }
            if let Some(path) = report {
                write_json(path, &stats)?;
                let config = serde_json::json!({
                    "segmented_only": segmented_only,
                    "filter_noise": noise,
                    "noise_removed": removed,
                    "marker": cli.marker,
                });
                RunManifest::new("stats", config, &[corpus])?.write_for(&[path])?;
            }
            Ok(0)
        }

        Command::Partition {
            corpus,
            dev,
            test,
            seed,
            out_dir,
            segmented_only,
            filter_noise: noise,
        } => {
            let mut c = load_corpus(corpus, &cli.marker)?;
            let mut removed = 0;
            if *segmented_only {
                c = filter_segmented(&c);
            }
            if *noise {
                let (kept, n) = filter_noise(&c);
                c = kept;
                removed = n;
            }
            let p = partition(&c, *dev, *test, *seed)?;
            fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            let paths: Vec<PathBuf> = ["train", "dev", "test"]
                .iter()
                .map(|n| out_dir.join(format!("{n}.txt")))
                .collect();
            for (split, path) in [&p.train, &p.dev, &p.test].into_iter().zip(&paths) {
                split.write(path, &cli.marker)?;
            }
            let config = serde_json::json!({
                "dev": dev, "test": test, "seed": seed,
                "segmented_only": segmented_only, "filter_noise": noise,
                "noise_removed": removed, "marker": cli.marker,
            });
            let refs: Vec<&Path> = paths.iter().map(PathBuf::as_path).collect();
            RunManifest::new("partition", config, &[corpus])?.write_for(&refs)?;
            let sizes = serde_json::json!({
                "train": p.train.len(), "dev": p.dev.len(), "test": p.test.len(),
                "noise_removed": removed,
            });
            match cli.format {
                Format::Text => emit(
                    out,
                    &format!(
                        "train {}\ndev {}\ntest {}\n",
                        p.train.len(),
                        p.dev.len(),
                        p.test.len()
                    ),
                )?,
                Format::Json => emit_json(out, &sizes)?,
            }
            Ok(0)
        }

        Command::Segment {
            corpus,
            scorer,
            window,
            out: out_path,
        } => {
            let config = window.config();
            config.validate()?;
            let spec = scorer.spec()?;
            let c = load_corpus(corpus, &cli.marker)?;
            let sentences = c.sentences();
            let gap_scorer = spec.open(&scorer.sidecar())?;
            let scores = score_corpus(&sentences, gap_scorer.as_ref());
            drop(gap_scorer);
            let seg = segment_scored(&sentences, &scores, &config, cli.jobs)?;
            let mut text = String::new();
            for t in seg.to_segmented(&sentences) {
                text.push_str(&t.to_line(&cli.marker));
                text.push('\n');
            }
            fs::write(out_path, text).map_err(|e| Error::io(out_path, e))?;

            let mut inputs: Vec<&Path> = vec![corpus];
            if let Some(p) = spec.input_path() {
                inputs.push(p);
            }
            let manifest_config = serde_json::json!({
                "scorer": spec.to_string(),
                "segmentation": config,
                "marker": cli.marker,
                "diagnostics": seg.diagnostics,
            });
            RunManifest::new("segment", manifest_config, &inputs)?.write_for(&[out_path])?;
            let summary = serde_json::json!({
                "sentences": sentences.len(),
                "failed": seg.diagnostics.len(),
                "output": out_path.display().to_string(),
            });
            match cli.format {
                Format::Text => emit(
                    out,
                    &format!(
                        "segmented {} sentences ({} unsegmented after scorer failures) -> {}\n",
                        sentences.len(),
                        seg.diagnostics.len(),
                        out_path.display()
                    ),
                )?,
                Format::Json => emit_json(out, &summary)?,
            }
            Ok(0)
        }

        Command::Evaluate {
            hyp,
            reference,
            metrics,
            min_words,
            max_words,
            report,
        } => {
            let selected = parse_metrics(metrics)?;
            let h = load_corpus(hyp, &cli.marker)?.texts();
            let r = load_corpus(reference, &cli.marker)?.texts();
            let result = evaluate(&h, &r, Some((*min_words, *max_words)))?;
            match cli.format {
                Format::Text => emit(out, &eval_table(&result, &selected))?,
                Format::Json => emit_json(out, &result)?,
            }
            if let Some(path) = report {
                write_json(path, &result)?;
                let config = serde_json::json!({
                    "metrics": metrics, "min_words": min_words,
                    "max_words": max_words, "marker": cli.marker,
                });
                RunManifest::new("evaluate", config, &[hyp, reference])?.write_for(&[path])?;
            }
            if selected.sigma && result.sigma.is_none() {
                eprintln!(
                    "erseg: {}",
                    result.sigma_error.as_deref().unwrap_or("Sigma undefined")
                );
                return Ok(1);
            }
            Ok(0)
        }

        Command::Validate { hyp, src, report } => {
            let h = load_corpus(hyp, &cli.marker)?.texts();
            let s = load_corpus(src, &cli.marker)?.sentences();
            let summary = validate_corpus(&h, &s)?;
            match cli.format {
                Format::Text => emit(out, &validation_text(&summary))?,
                Format::Json => emit_json(out, &summary)?,
            }
            if let Some(path) = report {
                write_json(path, &summary)?;
                let config = serde_json::json!({ "marker": cli.marker });
                RunManifest::new("validate", config, &[hyp, src])?.write_for(&[path])?;
            }
            Ok(if summary.preserved == summary.sentences {
                0
            } else {
                1
            })
        }

        Command::GridSearch {
            corpus,
            scorer,
            min_range,
            max_range,
            beam,
            penalty,
            out: out_path,
        } => {
            let min_range = parse_range(min_range)?;
            let max_range = parse_range(max_range)?;
            let spec = scorer.spec()?;
            let c = load_corpus(corpus, &cli.marker)?;
            if c.texts().iter().all(|t| !t.has_breaks()) {
                return Err(Error::Usage("reference corpus has no breaks".into()));
            }
            let gap_scorer = spec.open(&scorer.sidecar())?;
            let scores = score_corpus(&c.sentences(), gap_scorer.as_ref());
            drop(gap_scorer);
            let grid = grid_search(
                &c.texts(),
                &scores,
                min_range,
                max_range,
                *beam,
                *penalty,
                cli.jobs,
            )?;
            match cli.format {
                Format::Text => emit(out, &grid_table(&grid))?,
                Format::Json => emit_json(out, &grid)?,
            }
            if let Some(path) = out_path {
                write_json(path, &grid)?;
                let mut inputs: Vec<&Path> = vec![corpus];
                if let Some(p) = spec.input_path() {
                    inputs.push(p);
                }
                let config = serde_json::json!({
                    "scorer": spec.to_string(), "beam": beam, "penalty": penalty,
                    "marker": cli.marker,
                });
                RunManifest::new("grid-search", config, &inputs)?.write_for(&[path])?;
            }
            Ok(0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct MetricSelection {
    sigma: bool,
    bleu: bool,
    f1: bool,
}

fn parse_metrics(text: &str) -> Result<MetricSelection> {
    let mut sel = MetricSelection {
        sigma: false,
        bleu: false,
        f1: false,
    };
    for name in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match name.to_ascii_lowercase().as_str() {
            "sigma" => sel.sigma = true,
            "bleu" => sel.bleu = true,
            "f1" => sel.f1 = true,
            other => return Err(Error::Usage(format!("unknown metric {other:?}"))),
        }
    }
    if !(sel.sigma || sel.bleu || sel.f1) {
        return Err(Error::Usage("no metrics selected".into()));
    }
    Ok(sel)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

fn stats_table(s: &CorpusStats) -> String {
    let rows = [
        ("sentences", s.n_sentences.to_string()),
        ("breaks", s.n_breaks.to_string()),
        (
            "% sentences with breaks",
            format!("{:.2}", s.pct_with_breaks),
        ),
        (
            "breaks per 100 sentences",
            format!("{:.2}", s.breaks_per_100_sentences),
        ),
        ("no seg: sentences", s.n_unsegmented.to_string()),
        ("no seg: avg sent. len.", opt(s.avg_len_unsegmented)),
        ("w/ seg: sentences", s.n_segmented.to_string()),
        ("w/ seg: avg breaks", opt(s.avg_breaks_segmented)),
        ("w/ seg: avg sent. len.", opt(s.avg_sent_len_segmented)),
        ("w/ seg: avg seg. len.", opt(s.avg_seg_len)),
    ];
    rows.iter()
        .map(|(k, v)| format!("{k:<28}{v:>10}\n"))
        .collect()
}

fn eval_table(r: &EvalReport, sel: &MetricSelection) -> String {
    let mut header = Vec::new();
    let mut values = Vec::new();
    if sel.sigma {
        header.push("Sigma");
        values.push(opt(r.sigma));
    }
    if sel.bleu {
        header.push("BLEU");
        values.push(format!("{:.2}", r.bleu_nb));
        header.push("BLEU-br");
        values.push(format!("{:.2}", r.bleu_br));
    }
    if sel.f1 {
        header.push("F1");
        values.push(format!("{:.2}", r.f1));
        header.push("P");
        values.push(format!("{:.2}", r.precision));
        header.push("R");
        values.push(format!("{:.2}", r.recall));
    }
    let mut s = String::new();
    s.push_str(&header.iter().map(|h| format!("{h:>9}")).collect::<String>());
    s.push('\n');
    s.push_str(&values.iter().map(|v| format!("{v:>9}")).collect::<String>());
    s.push('\n');
    s.push_str(&format!(
        "sentences {}, text preserved {:.2}%\n",
        r.sentences, r.text_preserved_pct
    ));
    for (name, w) in [
        ("reference", &r.reference_window),
        ("hypothesis", &r.hypothesis_window),
    ] {
        if let Some(w) = w {
            s.push_str(&format!(
                "{name} segments: {} total, {:.2}% under {} words, {:.2}% over {} words\n",
                w.segments, w.under_min_pct, w.min_words, w.over_max_pct, w.max_words
            ));
        }
    }
    s
}

fn validation_text(v: &ValidationSummary) -> String {
    let mut s = format!(
        "{} of {} hypotheses preserve their source ({:.2}%), BLEU-nb {:.2}\n",
        v.preserved, v.sentences, v.preserved_pct, v.bleu_nb
    );
    for (i, r) in v.reports.iter().enumerate().filter(|(_, r)| !r.preserved) {
        let ops: Vec<String> = r
            .diff
            .iter()
            .map(|op| match op {
                DiffOp::Delete { word, .. } => format!("-{word}"),
                DiffOp::Insert { word, .. } => format!("+{word}"),
            })
            .collect();
        s.push_str(&format!(
            "line {}: altered (BLEU-nb {:.2}): {}\n",
            i + 1,
            r.bleu_nb,
            ops.join(" ")
        ));
    }
    s
}

fn grid_table(g: &GridResult) -> String {
    let (max_lo, max_hi) = g.max_range;
    let mut s = format!("{:>8}", "min\\max");
    for m in max_lo..=max_hi {
        s.push_str(&format!("{m:>8}"));
    }
    s.push('\n');
    for min in g.min_range.0..=g.min_range.1 {
        s.push_str(&format!("{min:>8}"));
        for max in max_lo..=max_hi {
            match g.cell(min, max) {
                Some(c) => s.push_str(&format!("{:>8.2}", c.f1)),
                None => s.push_str(&format!("{:>8}", "-")),
            }
        }
        s.push('\n');
    }
    s.push_str(&format!(
        "best: {}-{} (F1 {:.2})\n",
        g.best.min_words, g.best.max_words, g.best.f1
    ));
    s
}
