//! `demobias`: prompt grids, corpus ingestion, audits and report summaries.

mod settings;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use demobias::audit::{run_audit, AuditRegistry};
use demobias::corpus::{
    build_prompt_grid, emit_corpus, ingest_corpus, join_sidecars, read_sidecars, stamp_models,
    Corpus, Coverage, DemographicAxes, EnrichedCorpus, PromptTemplates, Setting,
};

use settings::{check_out_dir, load_axes, load_resources, parse_lexicon_arg, FileConfig, LexiconArg};

#[derive(Parser)]
#[command(name = "demobias", version, about = "Audit demographic bias in targeted generated messages")]
struct Cli {
    /// Run config (TOML with [paths] and [run] tables).
    #[arg(long, global = true, env = "DEMOBIAS_CONFIG")]
    config: Option<PathBuf>,

    /// Demographic axes file (TOML or JSON); defaults to the shipped axes.
    #[arg(long, global = true)]
    axes: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand the axes into a prompt grid (prompts.jsonl).
    Grid(GridArgs),
    /// Validate messages and sidecars; optionally write the canonical corpus.
    Ingest(IngestArgs),
    /// Run audit families and write CSV/JSON reports.
    Audit(AuditArgs),
    /// Summarize a report directory written by `audit`.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Sg,
    Crg,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Self {
        match s {
            SettingArg::Sg => Setting::Sg,
            SettingArg::Crg => Setting::Crg,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_enum)]
    setting: SettingArg,
    /// Template file with `sg` and `crg` keys.
    #[arg(long)]
    template: Option<PathBuf>,
    /// Model ids to stamp onto every prompt (comma-separated).
    #[arg(long, value_delimiter = ',')]
    models: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArgs {
    /// messages.jsonl
    #[arg(long)]
    messages: PathBuf,
    /// sidecar.jsonl files; later files overwrite earlier ones field by field.
    #[arg(long)]
    sidecar: Vec<PathBuf>,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Write the canonical messages.jsonl here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Audit family, or `all`.
    #[arg(long, default_value = "all")]
    family: String,
    /// Lexicon override as gender=PATH or age=PATH; repeatable.
    #[arg(long, value_parser = parse_lexicon_arg)]
    lexicon: Vec<LexiconArg>,
    /// Certainty/hedge marker file.
    #[arg(long)]
    markers: Option<PathBuf>,
    /// Agency verb file (verb<TAB>high|low).
    #[arg(long)]
    agency: Option<PathBuf>,
    /// Base-form verb list for the imperative fallback.
    #[arg(long)]
    base_verbs: Option<PathBuf>,
    /// Attribute word sets for association tests.
    #[arg(long)]
    weat_sets: Option<PathBuf>,
    /// Word vectors, one `word v1 v2 ...` per line.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Odds-ratio smoothing constant s.
    #[arg(long)]
    smoothing: Option<f64>,
    /// Imperative weight lambda in the Persuasion Bias Index.
    #[arg(long)]
    lambda: Option<f64>,
    /// p-value below which emotion rows are reported.
    #[arg(long)]
    p_threshold: Option<f64>,
    /// POS tags kept for salient words (comma-separated, e.g. noun,adj).
    #[arg(long, value_delimiter = ',')]
    pos_filter: Vec<String>,
    /// Salient words listed per direction.
    #[arg(long)]
    top_k: Option<usize>,
    /// Root directory for reports; each config hash gets a subdirectory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A report directory (`<out>/<hash>`).
    dir: PathBuf,
    /// Print this table (file stem, e.g. persuasion_report) instead of the summary.
    #[arg(long)]
    table: Option<String>,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load_corpus(args: &CorpusArgs, axes: &DemographicAxes) -> Result<EnrichedCorpus> {
    let corpus: Corpus = ingest_corpus(open(&args.messages)?, axes)
        .with_context(|| format!("ingesting {}", args.messages.display()))?;
    let mut records = Vec::new();
    for path in &args.sidecar {
        records.extend(read_sidecars(open(path)?).with_context(|| format!("reading {}", path.display()))?);
    }
    Ok(join_sidecars(corpus, records)?)
}

fn print_coverage(cov: &Coverage) {
    println!("messages: {}", cov.total);
    for f in Coverage::FIELDS {
        println!("  {f}: {}/{}", cov.present(f), cov.total);
    }
}

fn cmd_grid(cli: &Cli, file: &FileConfig, args: &GridArgs) -> Result<()> {
    let axes = load_axes(cli.axes.as_deref().or(file.paths.axes.as_deref()))?;
    let templates = match &args.template {
        Some(p) => PromptTemplates::load(p)?,
        None => PromptTemplates::default(),
    };
    let setting = Setting::from(args.setting);
    let grid = build_prompt_grid(&axes, setting, templates.for_setting(setting))?;
    let records = stamp_models(&grid, &args.models);
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for r in &records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    match &args.out {
        Some(p) => println!("{} prompts written to {}", records.len(), p.display()),
        None => eprintln!("{} prompts", records.len()),
    }
    Ok(())
}

fn cmd_ingest(cli: &Cli, file: &FileConfig, args: &IngestArgs) -> Result<()> {
    let axes = load_axes(cli.axes.as_deref().or(file.paths.axes.as_deref()))?;
    let enriched = load_corpus(&args.corpus, &axes)?;
    print_coverage(&enriched.coverage());
    println!("models: {}", enriched.corpus().model_ids().join(", "));
    if let Some(p) = &args.out {
        let mut w = create(p)?;
        emit_corpus(enriched.corpus(), &mut w)?;
        w.flush()?;
        println!("canonical corpus written to {}", p.display());
    }
    Ok(())
}

fn cmd_audit(cli: &Cli, file: FileConfig, args: &AuditArgs) -> Result<()> {
    let FileConfig { mut paths, run: mut config } = file;
    if cli.axes.is_some() {
        paths.axes.clone_from(&cli.axes);
    }
    for (slot, flag) in [
        (&mut paths.markers, &args.markers),
        (&mut paths.agency, &args.agency),
        (&mut paths.base_verbs, &args.base_verbs),
        (&mut paths.weat_sets, &args.weat_sets),
        (&mut paths.embeddings, &args.embeddings),
        (&mut paths.out, &args.out),
    ] {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    }
    if let Some(s) = args.smoothing {
        config.smoothing = s;
    }
    if let Some(l) = args.lambda {
        config.lambda = l;
    }
    if let Some(p) = args.p_threshold {
        config.p_threshold = p;
    }
    if let Some(k) = args.top_k {
        config.top_k = k;
    }
    if !args.pos_filter.is_empty() {
        config.pos_filter.clone_from(&args.pos_filter);
    }
    config.validate()?;

    let registry = AuditRegistry::builtin();
    let audits = registry.select(&args.family)?;
    let axes = load_axes(paths.axes.as_deref())?;
    let resources = load_resources(&paths, &args.lexicon)?;
    let enriched = load_corpus(&args.corpus, &axes)?;
    let out_root = paths.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    check_out_dir(&out_root)?;

    let output = run_audit(&audits, &enriched, &config, &resources)?;
    let dir = output.write(&out_root)?;
    println!("config_hash: {}", output.config_hash);
    println!("reports: {}", dir.display());
    let warnings = output.warnings();
    if !warnings.is_empty() {
        println!("{} warning(s); see the family JSON files", warnings.len());
    }
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    if let Some(table) = &args.table {
        let path = args.dir.join(format!("{table}.csv"));
        let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers()?.clone();
        let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;
        let widths: Vec<usize> = (0..header.len())
            .map(|j| {
                rows.iter()
                    .map(|r| r.get(j).map_or(0, |c| c.chars().count()))
                    .chain([header[j].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(header.iter().collect()))?;
        for r in &rows {
            writeln!(out, "{}", line(r.iter().collect()))?;
        }
        return Ok(());
    }
    let path = args.dir.join("manifest.json");
    let manifest: serde_json::Value = serde_json::from_reader(open(&path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    writeln!(out, "config_hash: {}", manifest["config_hash"].as_str().unwrap_or("?"))?;
    if let Some(models) = manifest["corpus"]["models"].as_array() {
        let names: Vec<&str> = models.iter().filter_map(|m| m.as_str()).collect();
        writeln!(out, "models: {}", names.join(", "))?;
    }
    writeln!(out, "files:")?;
    for f in manifest["files"].as_array().into_iter().flatten() {
        writeln!(out, "  {}", f.as_str().unwrap_or("?"))?;
    }
    for family in manifest["families"].as_array().into_iter().flatten() {
        let Some(family) = family.as_str() else { continue };
        let doc: serde_json::Value = serde_json::from_reader(open(&args.dir.join(format!("{family}.json")))?)?;
        for w in doc["warnings"].as_array().into_iter().flatten() {
            writeln!(out, "warning ({family}): {}", w.as_str().unwrap_or("?"))?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Grid(a) => cmd_grid(&cli, &file, a),
        Command::Ingest(a) => cmd_ingest(&cli, &file, a),
        Command::Audit(a) => cmd_audit(&cli, file, a),
        Command::Report(a) => cmd_report(a),
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<io::Error>())
        .any(|e| e.kind() == io::ErrorKind::BrokenPipe)
}

/// 2 for invalid input or configuration, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err
        .chain()
        .filter_map(|e| e.downcast_ref::<demobias::Error>())
        .any(demobias::Error::is_validation);
    if validation {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
