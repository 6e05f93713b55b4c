use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fixrank::bugclass::PatternSet;
use fixrank::corpus::Corpus;
use fixrank::evaluator::{
    outcome_of, outcomes_table, robustness_sweep, scatter_export, stats_table, sweep_table, topk_table, BugOutcome,
    SamplePlan, SubjectFilter,
};
use fixrank::miner::{mine_into, mine_manifest, parse_repo_manifest, MinerConfig};
use fixrank::patchclass::PatchClassifier;
use fixrank::ranker::{classify_candidate, load_bug_manifest, rank_classified, rank_cumulative_classified, ranking_tsv, ClassifiedCandidate, RankedPatch};
use fixrank::review::{export_review_queue, import_review_verdicts};
use fixrank::trainer::{category_sizes, load_model, prepare_records, proportional_plan, save_model, stratified_sample, train, CorpusRecord};
use fixrank::unidiff::SourceFilter;
use fixrank::{Catalog, Error, ExactFrequency, FrequencyModel, Result, Scalar};
use tracing::{info, warn};

#[derive(Parser)]
#[command(name = "fixrank", version, about = "Re-rank repair candidates by the patch kinds that fix each bug category")]
struct Cli {
    /// Feature/modification catalog; the bundled one by default.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
    /// Commit-message category patterns; the bundled ones by default.
    #[arg(long, global = true)]
    patterns: Option<PathBuf>,
    /// Log more (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract small bug-fixing commits into a corpus directory.
    Mine(MineArgs),
    /// Export pending triples for review, or import verdicts.
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Train a frequency model from a corpus.
    Train(TrainArgs),
    /// Re-rank the candidates of one bug.
    Rank(RankArgs),
    /// Compare original and re-ranked first-correct ranks over many bugs.
    Eval(EvalArgs),
    /// Retrain on stratified corpus samples and compare against the full corpus.
    Sample(SampleArgs),
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Local repository to mine.
    #[arg(long, conflicts_with = "manifest", required_unless_present = "manifest")]
    repo: Option<PathBuf>,
    /// Repository list, one `location<TAB>branch` per line.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Branch or revision for `--repo`.
    #[arg(long, default_value = "HEAD")]
    branch: String,
    /// Repository id used in triple ids; the directory name by default.
    #[arg(long)]
    repo_id: Option<String>,
    /// Where remote manifest entries are cloned.
    #[arg(long, default_value = "repos")]
    work_dir: PathBuf,
    #[arg(long, default_value_t = fixrank::miner::DEFAULT_MAX_CHANGED_LINES)]
    max_lines: usize,
}

#[derive(Subcommand)]
enum ReviewCommand {
    /// Write pending, categorized triples to a review file.
    Export {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply the verdicts of a filled-in review file.
    Import {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    /// Use every categorized triple, reviewed or not.
    #[arg(long)]
    no_review: bool,
    /// Train on a stratified sample of this fraction of the corpus.
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RankArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Per-bug candidate manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Rank the union of all tools' candidates instead of each tool alone.
    #[arg(long)]
    cumulative: bool,
    /// Compute scores with exact rationals.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Per-bug candidate manifests with correctness labels.
    #[arg(long, required = true, num_args = 1..)]
    manifest: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = fixrank::evaluator::DEFAULT_KS)]
    top_k: Vec<usize>,
    /// Skip bugs with fewer candidates than this.
    #[arg(long, default_value_t = SubjectFilter::default().min_patches)]
    min_patches: usize,
    /// Evaluate the union of all tools' candidates per bug.
    #[arg(long)]
    cumulative: bool,
    /// Also write rank-versus-rank plot data here.
    #[arg(long)]
    scatter: Option<PathBuf>,
    /// Compute scores with exact rationals.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, required = true, num_args = 1..)]
    manifest: Vec<PathBuf>,
    /// Sample sizes as fractions of the corpus.
    #[arg(long, value_delimiter = ',', default_values_t = [0.08, 0.30, 0.60])]
    fraction: Vec<f64>,
    /// One sweep repetition per seed.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
    seed: Vec<u64>,
    #[arg(long)]
    no_review: bool,
    #[arg(long, value_delimiter = ',', default_values_t = fixrank::evaluator::DEFAULT_KS)]
    top_k: Vec<usize>,
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).without_time().init();
}

fn load_catalog(path: &Option<PathBuf>) -> Result<Catalog> {
    path.as_deref().map_or_else(|| Ok(Catalog::default()), Catalog::load)
}

fn load_patterns(path: &Option<PathBuf>) -> Result<PatternSet> {
    path.as_deref().map_or_else(|| Ok(PatternSet::default()), PatternSet::load)
}

fn mine(cli: &Cli, args: &MineArgs) -> Result<()> {
    let patterns = load_patterns(&cli.patterns)?;
    let corpus = Corpus::open(&args.corpus)?;
    let mut config = MinerConfig::new(&args.branch, &patterns);
    config.max_changed_lines = args.max_lines;
    let runs = match (&args.repo, &args.manifest) {
        (Some(repo), _) => {
            let id = match &args.repo_id {
                Some(id) => id.clone(),
                None => repo_dir_name(repo)?,
            };
            vec![(id.clone(), mine_into(repo, &id, &config, &patterns, &corpus)?)]
        }
        (None, Some(manifest)) => {
            let text = std::fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
            mine_manifest(&parse_repo_manifest(&text)?, &args.work_dir, &config, &patterns, &corpus)?
        }
        (None, None) => unreachable!("clap requires --repo or --manifest"),
    };
    println!("repo\tpairs\tskipped_merges\temitted");
    for (id, s) in runs {
        println!("{id}\t{}\t{}\t{}", s.pairs, s.skipped_merges, s.emitted);
    }
    Ok(())
}

fn repo_dir_name(repo: &Path) -> Result<String> {
    let canonical = repo.canonicalize().map_err(|e| Error::io(repo, e))?;
    let name = canonical.file_name().map(|n| n.to_string_lossy().trim_end_matches(".git").to_string());
    name.filter(|n| !n.is_empty()).ok_or_else(|| Error::InvalidInput(format!("cannot name repository {}; pass --repo-id", repo.display())))
}

fn review(command: &ReviewCommand) -> Result<()> {
    match command {
        ReviewCommand::Export { corpus, out } => {
            let n = export_review_queue(&Corpus::open(corpus)?, out)?;
            println!("exported {n} pending triples to {}", out.display());
        }
        ReviewCommand::Import { corpus, file } => {
            let s = import_review_verdicts(&Corpus::open(corpus)?, file)?;
            println!("accepted {}\trejected {}\tpending {}", s.accepted, s.rejected, s.pending);
        }
    }
    Ok(())
}

/// Training records of a corpus; newly computed kinds are written back.
fn corpus_records(corpus_dir: &Path, classifier: &PatchClassifier, no_review: bool) -> Result<Vec<CorpusRecord>> {
    let corpus = Corpus::open(corpus_dir)?;
    let mut triples = corpus.load_all()?;
    let before = triples.clone();
    let (records, summary) = prepare_records(&mut triples, classifier, &SourceFilter::default(), no_review)?;
    for (old, new) in before.iter().zip(&triples) {
        if old.kind != new.kind {
            corpus.write(new)?;
        }
    }
    info!(?summary, "prepared training records");
    if summary.unparseable > 0 {
        warn!(count = summary.unparseable, "triples with unparseable sources were skipped");
    }
    Ok(records)
}

fn train_cmd(cli: &Cli, args: &TrainArgs) -> Result<()> {
    let classifier = PatchClassifier::new(load_catalog(&cli.catalog)?);
    let mut records = corpus_records(&args.corpus, &classifier, args.no_review)?;
    if let Some(fraction) = args.fraction {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidInput(format!("fraction {fraction} is outside [0, 1]")));
        }
        records = stratified_sample(&records, &proportional_plan(&records, fraction), args.seed)?;
    }
    let model = train(&records, classifier.catalog())?;
    save_model(&model, &args.model)?;
    println!("category\trecords\tkinds");
    for (c, n) in category_sizes(&records) {
        println!("{c}\t{n}\t{}", model.kinds(c).count());
    }
    Ok(())
}

/// Classified candidate lists of one bug, one per tool.
fn classified_tools(path: &Path, classifier: &PatchClassifier) -> Result<Vec<Vec<ClassifiedCandidate>>> {
    let manifest = load_bug_manifest(path)?;
    manifest
        .tools
        .into_iter()
        .map(|(_, cands)| cands.into_iter().map(|c| classify_candidate(classifier, c)).collect())
        .collect()
}

fn rank_sets<T: Scalar>(model: &FrequencyModel, tools: Vec<Vec<ClassifiedCandidate>>, cumulative: bool) -> Result<Vec<Vec<RankedPatch<T>>>> {
    if cumulative {
        Ok(vec![rank_cumulative_classified(model, tools)?])
    } else {
        tools.into_iter().filter(|t| !t.is_empty()).map(|t| rank_classified(model, t)).collect()
    }
}

fn rank_cmd(cli: &Cli, args: &RankArgs) -> Result<()> {
    let classifier = PatchClassifier::new(load_catalog(&cli.catalog)?);
    let model = load_model(&args.model, classifier.catalog())?;
    let tools = classified_tools(&args.manifest, &classifier)?;
    if args.exact {
        print_rankings::<ExactFrequency>(&model, tools, args.cumulative, classifier.catalog())
    } else {
        print_rankings::<f64>(&model, tools, args.cumulative, classifier.catalog())
    }
}

fn print_rankings<T: Scalar>(model: &FrequencyModel, tools: Vec<Vec<ClassifiedCandidate>>, cumulative: bool, catalog: &Catalog) -> Result<()> {
    println!("bug\trank\tpatch\tscore\tkind\tcategory");
    for ranked in rank_sets::<T>(model, tools, cumulative)? {
        for r in &ranked {
            if let Some(d) = &r.diagnostic {
                warn!(patch = %r.candidate.patch_id, "{d}");
            }
        }
        print!("{}", ranking_tsv(&ranked, catalog)?);
    }
    Ok(())
}

fn outcomes_for<T: Scalar>(model: &FrequencyModel, bugs: &[Vec<Vec<ClassifiedCandidate>>], cumulative: bool, filter: SubjectFilter) -> Result<Vec<BugOutcome>> {
    let mut out = Vec::new();
    for tools in bugs {
        for ranked in rank_sets::<T>(model, tools.clone(), cumulative)? {
            out.extend(outcome_of(&ranked).filter(|o| filter.keep(o)));
        }
    }
    Ok(out)
}

fn eval_cmd(cli: &Cli, args: &EvalArgs) -> Result<()> {
    let classifier = PatchClassifier::new(load_catalog(&cli.catalog)?);
    let model = load_model(&args.model, classifier.catalog())?;
    let bugs = args.manifest.iter().map(|m| classified_tools(m, &classifier)).collect::<Result<Vec<_>>>()?;
    let filter = SubjectFilter { min_patches: args.min_patches };
    let outcomes = if args.exact {
        outcomes_for::<ExactFrequency>(&model, &bugs, args.cumulative, filter)?
    } else {
        outcomes_for::<f64>(&model, &bugs, args.cumulative, filter)?
    };
    print!("{}", outcomes_table(&outcomes));
    println!();
    print!("{}", topk_table(&outcomes, &args.top_k)?);
    println!();
    print!("{}", stats_table(&outcomes)?);
    if let Some(path) = &args.scatter {
        scatter_export(&outcomes, path)?;
    }
    Ok(())
}

fn sample_cmd(cli: &Cli, args: &SampleArgs) -> Result<()> {
    let classifier = PatchClassifier::new(load_catalog(&cli.catalog)?);
    let records = corpus_records(&args.corpus, &classifier, args.no_review)?;
    let mut bugs = Vec::new();
    for m in &args.manifest {
        bugs.extend(classified_tools(m, &classifier)?.into_iter().filter(|t| !t.is_empty()));
    }
    let plans: Vec<SamplePlan> = args
        .fraction
        .iter()
        .map(|&f| SamplePlan { name: format!("{:.0}%", f * 100.0), sizes: proportional_plan(&records, f) })
        .collect();
    let rows = robustness_sweep::<f64>(&records, classifier.catalog(), &plans, &args.seed, &bugs)?;
    print!("{}", sweep_table(&rows));
    println!();
    println!("plan\tk\tN\tB\tO\tP");
    for r in &rows {
        for (k, [n, b, o, p]) in &r.topk {
            if args.top_k.contains(k) {
                println!("{}\t{k}\t{n:.2}\t{b:.2}\t{o:.2}\t{p:.2}", r.plan);
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Mine(a) => mine(cli, a),
        Command::Review(r) => review(r),
        Command::Train(a) => train_cmd(cli, a),
        Command::Rank(a) => rank_cmd(cli, a),
        Command::Eval(a) => eval_cmd(cli, a),
        Command::Sample(a) => sample_cmd(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fixrank: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
