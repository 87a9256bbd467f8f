//! `fixline`: train, apply and evaluate the single-line repair model.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use fixline_core::compiler::{Backend, BridgeError, Compiler};
use fixline_core::corpus::loader::{split_lines, write_jsonl};
use fixline_core::corpus::{load_corpus, mine_corpus, ClassCatalog, TrainPair};
use fixline_core::engine::{repair_program, RepairOptions};
use fixline_core::eval::{evaluate, report, EvalOptions, EvalReport};
use fixline_core::model::{ModelBundle, ModelConfig};
use fixline_core::synth::{fixture_corpus, heavy_tail_corpus, HeavyTailConfig};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "fixline", version, about = "Single-line compilation error repair")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a corpus and train a model bundle.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Suggest repairs for C programs; one JSON line per program.
    Repair {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        run: RunFlags,
        /// Write each repaired program to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(required = true)]
        programs: Vec<PathBuf>,
    },
    /// Evaluate a bundle on a test corpus.
    Eval {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        run: RunFlags,
        /// Apply the gold repair class instead of the ranked ones.
        #[arg(long)]
        gold_class: bool,
        /// Use the gold repair profile instead of the localizer's.
        #[arg(long)]
        gold_profile: bool,
        /// Write the full report as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write per-case results as JSONL.
        #[arg(long)]
        cases: Option<PathBuf>,
    },
    /// Mine repair classes from a corpus and print the catalog.
    Mine {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Render SVG plots from an evaluation report.
    Report {
        #[arg(long)]
        report: PathBuf,
        /// Adds the class frequency plot.
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a generated corpus of verified buggy/fixed pairs.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Zipf-distributed classes; writes `<out>` (train) and `<out>.test`.
        #[arg(long)]
        heavy_tail: bool,
    },
}

#[derive(Args)]
struct RunFlags {
    /// `mock` or `external:<command>`.
    #[arg(long, default_value = "mock")]
    compiler: String,
    /// `rr=on` or `rr=off`.
    #[arg(long, value_parser = parse_ablate, default_value = "rr=on")]
    ablate: Rerank,
}

/// Whether prototype reranking is on.
#[derive(Clone, Copy)]
struct Rerank(bool);

fn parse_ablate(s: &str) -> Result<Rerank, String> {
    match s {
        "rr=on" => Ok(Rerank(true)),
        "rr=off" => Ok(Rerank(false)),
        _ => Err(format!("expected rr=on or rr=off, got {s:?}")),
    }
}

/// Failures that are the caller's fault.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<Usage>() {
            return 2;
        }
        if cause.is::<BridgeError>() {
            return 3;
        }
        if let Some(fixline_core::error::Error::Bridge(_)) = cause.downcast_ref() {
            return 3;
        }
    }
    1
}

fn require(path: &Path, what: &str) -> anyhow::Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!("{what} not found: {}", path.display())))
    }
}

fn load_bundle(path: &Path) -> anyhow::Result<ModelBundle> {
    require(&path.join("manifest.json"), "bundle")?;
    ModelBundle::load(path).with_context(|| format!("loading bundle {}", path.display()))
}

fn load_pairs(path: &Path) -> anyhow::Result<Vec<TrainPair>> {
    require(path, "corpus")?;
    let loaded = load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))?;
    if loaded.skipped > 0 {
        log::warn!("skipped {} unreadable records", loaded.skipped);
    }
    if loaded.pairs.is_empty() {
        return Err(usage(format!("corpus {} has no pairs", path.display())));
    }
    Ok(loaded.pairs)
}

fn backend(spec: &str) -> anyhow::Result<Backend> {
    match Backend::from_spec(spec) {
        Ok(b) => Ok(b),
        Err(BridgeError::BadSpec(s)) => Err(usage(format!("bad --compiler {s:?}; use mock or external:<command>"))),
        Err(e) => Err(e.into()),
    }
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn train(corpus: &Path, bundle: &Path, seed: u64) -> anyhow::Result<()> {
    let pairs = load_pairs(corpus)?;
    let mined = mine_corpus(&pairs);
    if mined.pairs.is_empty() {
        return Err(usage("no usable single-line pairs in corpus"));
    }
    let (model, times) = ModelBundle::train(&mined.pairs, &ModelConfig::with_seed(seed))?;
    model.save(bundle)?;
    let summary = json!({
        "pairs": mined.pairs.len(),
        "dropped": mined.dropped,
        "classes": model.catalog.len(),
        "train_seconds": times.total.as_secs_f64(),
        "bundle": bundle.display().to_string(),
    });
    println!("{summary}");
    Ok(())
}

fn repair(bundle: &Path, k: usize, run: &RunFlags, out: Option<&Path>, programs: &[PathBuf]) -> anyhow::Result<()> {
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let model = load_bundle(bundle)?;
    let compiler = backend(&run.compiler)?;
    let opts = RepairOptions { k, rerank: run.ablate.0, ..Default::default() };
    for path in programs {
        require(path, "program")?;
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let start = Instant::now();
        let outcome = repair_program(&split_lines(&text), &model, &compiler as &dyn Compiler, &opts)?;
        let line = json!({
            "file": path.display().to_string(),
            "initial_errors": outcome.initial_errors,
            "final_errors": outcome.final_errors,
            "seconds": start.elapsed().as_secs_f64(),
            "suggestions": outcome.suggestions,
        });
        println!("{line}");
        if let Some(dir) = out {
            let name = path.file_name().ok_or_else(|| anyhow!("no file name in {}", path.display()))?;
            let mut fixed = outcome.program.join("\n");
            fixed.push('\n');
            write(&dir.join(name), &fixed)?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn eval(
    bundle: &Path,
    corpus: &Path,
    run: &RunFlags,
    gold_class: bool,
    gold_profile: bool,
    report_path: Option<&Path>,
    cases_path: Option<&Path>,
) -> anyhow::Result<()> {
    let model = load_bundle(bundle)?;
    let pairs = load_pairs(corpus)?;
    let compiler = backend(&run.compiler)?;
    let opts = EvalOptions { rerank: run.ablate.0, gold_class, gold_profile };
    let (rep, cases) = evaluate(&model, &pairs, &compiler, &opts)?;
    print!("{}", report::table(&rep));
    if let Some(p) = report_path {
        write(p, &rep.to_json())?;
    }
    if let Some(p) = cases_path {
        let mut text = String::new();
        for c in &cases {
            text.push_str(&serde_json::to_string(c)?);
            text.push('\n');
        }
        write(p, &text)?;
    }
    Ok(())
}

fn mine(corpus: &Path) -> anyhow::Result<()> {
    let pairs = load_pairs(corpus)?;
    let mined = mine_corpus(&pairs);
    let catalog = ClassCatalog::build(mined.pairs.iter().map(|p| &p.key));
    let classes: Vec<_> = catalog
        .classes()
        .iter()
        .map(|c| json!({"id": c.id, "kind": format!("{:?}", c.kind()), "key": c.key.to_string(), "count": c.count}))
        .collect();
    let summary = json!({"pairs": mined.pairs.len(), "dropped": mined.dropped, "classes": classes});
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn render(report_path: &Path, bundle: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    require(report_path, "report")?;
    let text = std::fs::read_to_string(report_path).with_context(|| format!("reading {}", report_path.display()))?;
    let rep: EvalReport = serde_json::from_str(&text).map_err(|e| usage(format!("not an evaluation report: {e}")))?;
    let mut written = vec![
        ("pred_per_class.svg", report::class_hits_svg(&rep, "pred1")),
        ("rep_per_class.svg", report::class_hits_svg(&rep, "rep5")),
        ("at_k.svg", report::at_k_svg(&rep)),
    ];
    if let Some(b) = bundle {
        let model = load_bundle(b)?;
        written.push(("class_frequency.svg", report::frequency_svg(&model.catalog.counts())));
    }
    for (name, svg) in &written {
        write(&out.join(name), svg)?;
        println!("{}", out.join(name).display());
    }
    Ok(())
}

fn synth(out: &Path, n: usize, seed: u64, heavy: bool) -> anyhow::Result<()> {
    if heavy {
        let h = heavy_tail_corpus(&HeavyTailConfig::default(), seed);
        write_jsonl(&h.train, out)?;
        let mut test = out.as_os_str().to_owned();
        test.push(".test");
        write_jsonl(&h.test, Path::new(&test))?;
        println!("{}", json!({"train": h.train.len(), "test": h.test.len(), "classes": h.counts.len()}));
    } else {
        let pairs = fixture_corpus(n, seed);
        write_jsonl(&pairs, out)?;
        println!("{}", json!({"pairs": pairs.len()}));
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { corpus, bundle, seed } => train(&corpus, &bundle, seed),
        Command::Repair { bundle, k, run, out, programs } => repair(&bundle, k, &run, out.as_deref(), &programs),
        Command::Eval { bundle, corpus, run, gold_class, gold_profile, report, cases } => {
            eval(&bundle, &corpus, &run, gold_class, gold_profile, report.as_deref(), cases.as_deref())
        }
        Command::Mine { corpus } => mine(&corpus),
        Command::Report { report, bundle, out } => render(&report, bundle.as_deref(), &out),
        Command::Synth { out, n, seed, heavy_tail } => synth(&out, n, seed, heavy_tail),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
