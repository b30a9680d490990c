use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::Rational64;

use ddm_core::null_models::{ArrangementSampler, Direction};
use ddm_core::pipeline::{
    analyze_collection, emit_report, language_from_path, AnalysisConfig, Corpus, Families,
    HolmScope, LevelSpec, ReportFormat,
};
use ddm_core::stats;
use ddm_core::tree::{enumerate_arrangements_capped, LinearizedTree, DEFAULT_ENUMERATION_CAP};
use ddm_core::treebank::{
    collect_treebank_files, parse_treebank, PreprocessConfig, Scheme, TreebankFormat,
};

const EXIT_ARGUMENT: u8 = 1;
const EXIT_EMPTY: u8 = 2;

#[derive(Parser)]
#[command(
    name = "ddm",
    version,
    about = "Exact binomial tests of dependency distance minimization in short sentences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the six-level analysis over a collection of treebanks.
    Analyze(AnalyzeArgs),
    /// Print the exact distribution of D over all arrangements of one tree.
    Enumerate(EnumerateArgs),
    /// Print the minimum sample size for a success probability.
    MinSampleSize {
        /// Success probability as a fraction, e.g. 2/3.
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = stats::DEFAULT_ALPHA)]
        alpha: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Conllu,
    Conllx,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Ud,
    Prague,
    Stanford,
    Generic,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Both,
    Above,
    Below,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportArg {
    Csv,
    Markdown,
    Json,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Treebank file or directory; `LANG=PATH` sets the language explicitly,
    /// `-` reads standard input.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<String>,
    #[arg(long, value_enum, default_value = "conllu")]
    format: FormatArg,
    /// Annotation scheme deciding how punctuation and null elements are found.
    #[arg(long, value_enum, default_value = "ud")]
    scheme: SchemeArg,
    #[arg(long, default_value = "collection")]
    collection: String,
    /// Tab-separated `language<TAB>family` file.
    #[arg(long)]
    families: Option<PathBuf>,
    #[arg(long, default_value_t = stats::DEFAULT_ALPHA)]
    alpha: f64,
    /// `all` or a comma-separated list such as `n3_all,n4_star`.
    #[arg(long, default_value = "all")]
    levels: String,
    #[arg(long, value_enum, default_value = "both")]
    direction: DirectionArg,
    /// Use crossing-free null models instead of unrestricted ones.
    #[arg(long)]
    noncrossing_diagnostic: bool,
    /// Correct p-values within each language family instead of globally.
    #[arg(long)]
    per_family: bool,
    /// Leave languages below the minimum sample size out of the correction.
    #[arg(long)]
    exclude_undersampled: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    report: ReportArg,
    /// Seed for `--shuffle-control`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace every sentence by a random rearrangement of its tree before testing.
    #[arg(long)]
    shuffle_control: bool,
}

#[derive(clap::Args)]
struct EnumerateArgs {
    /// Comma-separated head list, 0 for the root (e.g. `2,0,2`).
    #[arg(long)]
    heads: String,
    #[arg(long)]
    noncrossing: bool,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_ARGUMENT);
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Enumerate(args) => enumerate(args),
        Command::MinSampleSize { p, alpha } => min_sample_size(&p, alpha),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ARGUMENT)
        }
    }
}

fn analyze(args: AnalyzeArgs) -> Result<ExitCode, String> {
    let format = match args.format {
        FormatArg::Conllu => TreebankFormat::Conllu,
        FormatArg::Conllx => TreebankFormat::Conllx,
    };
    let preprocess = PreprocessConfig::for_scheme(match args.scheme {
        SchemeArg::Ud => Scheme::Ud,
        SchemeArg::Prague => Scheme::Prague,
        SchemeArg::Stanford => Scheme::Stanford,
        SchemeArg::Generic => Scheme::Generic,
    });
    let families = match &args.families {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Families::parse(BufReader::new(file)).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => Families::default(),
    };
    let cfg = AnalysisConfig {
        alpha: args.alpha,
        levels: LevelSpec::parse_list(&args.levels).map_err(|e| e.to_string())?,
        directions: match args.direction {
            DirectionArg::Both => Direction::BOTH.to_vec(),
            DirectionArg::Above => vec![Direction::Above],
            DirectionArg::Below => vec![Direction::Below],
        },
        noncrossing: args.noncrossing_diagnostic,
        holm_scope: if args.per_family {
            HolmScope::PerFamily
        } else {
            HolmScope::Global
        },
        exclude_undersampled: args.exclude_undersampled,
    };
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(format!("alpha must lie in (0, 1), got {}", args.alpha));
    }

    let mut corpus = Corpus::new();
    for input in &args.input {
        let (language, path) = match input.split_once('=') {
            Some((lang, path)) => (Some(lang.to_string()), path),
            None => (None, input.as_str()),
        };
        if path == "-" {
            let parsed =
                parse_treebank(io::stdin().lock(), format, "stdin").map_err(|e| e.to_string())?;
            corpus.add_treebank(language.as_deref().unwrap_or("stdin"), &parsed, &preprocess);
            continue;
        }
        let files = collect_treebank_files(Path::new(path)).map_err(|e| e.to_string())?;
        for file in files {
            let parsed = ddm_core::treebank::parse_treebank_file(&file, format)
                .map_err(|e| format!("{}: {e}", file.display()))?;
            for err in &parsed.errors {
                eprintln!(
                    "warning: skipped sentence at {}:{}: {}",
                    file.display(),
                    err.line,
                    err.message
                );
            }
            let language = language
                .clone()
                .unwrap_or_else(|| language_from_path(&file));
            corpus.add_treebank(&language, &parsed, &preprocess);
        }
    }

    if args.shuffle_control {
        let mut sampler = ArrangementSampler::new(args.seed);
        let mut shuffled = Corpus::new();
        for (language, trees) in corpus.languages() {
            shuffled.add_trees(language, trees.iter().map(|t| sampler.sample(t)));
        }
        corpus = shuffled;
    }

    let report = analyze_collection(&args.collection, &corpus, &families, &cfg);
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let format = match args.report {
        ReportArg::Csv => ReportFormat::Csv,
        ReportArg::Markdown => ReportFormat::Markdown,
        ReportArg::Json => ReportFormat::Json,
    };
    let bytes = emit_report(&report, format).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| format!("{}: {e}", path.display()))?,
        None => io::stdout().write_all(&bytes).map_err(|e| e.to_string())?,
    }
    if report.is_empty() {
        eprintln!("error: no sentence of length 3 or 4 in the collection");
        return Ok(ExitCode::from(EXIT_EMPTY));
    }
    Ok(ExitCode::SUCCESS)
}

fn enumerate(args: EnumerateArgs) -> Result<ExitCode, String> {
    let heads = args
        .heads
        .split(',')
        .map(|h| {
            h.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid head `{h}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let tree = LinearizedTree::from_heads(&heads).map_err(|e| e.to_string())?;
    let dist = enumerate_arrangements_capped(&tree, args.noncrossing, args.cap)
        .map_err(|e| e.to_string())?;
    println!("D\tcount");
    for (d, count) in &dist.counts {
        println!("{d}\t{count}");
    }
    if let Some(mean) = dist.mean() {
        println!("# total = {}, mean = {mean}", dist.total);
    }
    Ok(ExitCode::SUCCESS)
}

fn min_sample_size(p: &str, alpha: f64) -> Result<ExitCode, String> {
    let p: Rational64 = p.parse().map_err(|_| format!("invalid fraction `{p}`"))?;
    let m = stats::min_sample_size(p, alpha).map_err(|e| e.to_string())?;
    println!("{m}");
    Ok(ExitCode::SUCCESS)
}
