//! The `proofscope` command line.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::clustering::{
    cluster_proofs, nested_partitions, proof_vectors, recurrent_cluster, statement_vectors,
    ClusterError, ClusterOptions, Cut, Partition, PartitionFile, RecurrentResult,
};
use crate::corpus::{parse_corpus, Corpus, CorpusError};
use crate::dep_graph::{build_dg1, build_dg2, dep_graph_dot, lib_graph_dot, GraphError};
use crate::features::{encode_statement, statement_tree, Encoder, FeatureError};
use crate::proof_features::{encode_proof, ProofError, ProofOptions, TacticTable};
use crate::report::{automata_dot, similarity_dot, text_report, ReportError};
use crate::sample::SAMPLE_CORPUS;
use crate::term_tree::term_tree_dot;

#[derive(Debug, Parser)]
#[command(
    name = "proofscope",
    version,
    about = "Proof-pattern mining: features, clustering, dependency graphs"
)]
pub struct Cli {
    /// Corpus file (defaults to the bundled sample corpus).
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print diagnostics as JSON lines on stderr.
    #[arg(long, global = true)]
    pub json_diagnostics: bool,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct GridArgs {
    /// Rows of the term feature grid.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub depth: Option<u32>,
    /// Columns of the term feature grid.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub width: Option<u32>,
    /// Rows of the proof feature table.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub goals: Option<u32>,
    /// Tactic registry file extending the built-in tactic table.
    #[arg(long, global = true)]
    pub tactics: Option<PathBuf>,
    /// Give unknown tactics a shared reserved code instead of failing.
    #[arg(long, global = true)]
    pub allow_unknown_tactics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Terms,
    Proofs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Dot,
    Automaton,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long, value_enum, default_value = "terms")]
    pub kind: Kind,
    /// Granularity 1..=5; higher gives more, smaller clusters.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5), conflicts_with = "clusters")]
    pub granularity: Option<u8>,
    /// Fixed number of clusters instead of a granularity.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub clusters: Option<u32>,
    /// Accepted for reproducible invocations; the pipeline is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Maximum recurrent clustering passes.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub iters: Option<u32>,
    /// Min-max scale every feature dimension before clustering.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check a corpus.
    Validate {
        /// Corpus file; overrides --corpus.
        path: Option<PathBuf>,
    },
    /// Show the term tree of an entry's statement.
    Termtree {
        /// Qualified entry name.
        entry: String,
        /// Print Graphviz DOT instead of one line per node.
        #[arg(long)]
        dot: bool,
    },
    /// Show the term feature matrix of an entry's statement.
    Features {
        /// Qualified entry name.
        entry: String,
        /// Print the grid as CSV instead of the flattened vector.
        #[arg(long)]
        csv: bool,
        /// Encode with the constants of a recurrent clustering at this granularity.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        granularity: Option<u8>,
    },
    /// Show the proof feature table of an entry.
    ProofFeatures {
        /// Qualified entry name.
        entry: String,
        /// Print the table as CSV instead of the flattened vector.
        #[arg(long)]
        csv: bool,
        /// Encode terms with the constants of a recurrent clustering at this granularity.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        granularity: Option<u8>,
    },
    /// Cluster statements or proofs and write the partition as JSON.
    Cluster {
        #[command(flatten)]
        args: ClusterArgs,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dependency graph of one entry, or of the whole corpus with `ALL`.
    Depgraph {
        /// Qualified entry name, or `ALL`.
        root: String,
        /// Write the DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Library import graph.
    Libgraph {
        /// Write the DOT here instead of stdout.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Render a clustering as text, nested similarity boxes or proof automata.
    Report {
        #[command(flatten)]
        args: ClusterArgs,
        /// Finer granularity drawn as boxes inside the base clusters.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        nested: Option<u8>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write partition.json, report.txt, depgraph.dot and libgraph.dot.
    Pipeline {
        #[command(flatten)]
        args: ClusterArgs,
        /// Directory for the four output files; created if missing.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Print the bundled sample corpus.
    Sample,
}

/// Settings that may come from the configuration file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub corpus: Option<PathBuf>,
    pub granularity: Option<u8>,
    pub nested: Option<u8>,
    pub clusters: Option<usize>,
    pub depth: Option<usize>,
    pub width: Option<usize>,
    pub goals: Option<usize>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub normalize: Option<bool>,
    pub allow_unknown_tactics: Option<bool>,
    pub tactics: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Corpus { path: String, source: CorpusError },
    #[error("unknown entry `{0}`")]
    UnknownEntry(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

struct Diagnostics {
    json: bool,
}

impl Diagnostics {
    fn emit(&self, level: &str, message: &str, entry: Option<&str>) {
        let mut err = std::io::stderr().lock();
        let _ = if self.json {
            let v = serde_json::json!({ "level": level, "message": message, "entry": entry });
            writeln!(err, "{v}")
        } else {
            match entry {
                Some(e) => writeln!(err, "{level}: {e}: {message}"),
                None => writeln!(err, "{level}: {message}"),
            }
        };
    }
}

// Resolved settings: flags over config file over defaults.
struct Settings {
    corpus_path: Option<PathBuf>,
    options: ClusterOptions,
    file: FileConfig,
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                message: e.to_string(),
            })
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let file: FileConfig = match &cli.config {
        Some(path) => toml::from_str(&read_file(path)?)
            .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))?,
        None => FileConfig::default(),
    };
    let mut proof = ProofOptions {
        table: TacticTable::default(),
        allow_unknown_tactics: cli.grid.allow_unknown_tactics
            || file.allow_unknown_tactics.unwrap_or(false),
    };
    if let Some(path) = cli.grid.tactics.as_ref().or(file.tactics.as_ref()) {
        proof
            .table
            .extend_from_registry(&read_file(path)?)
            .map_err(|e| CliError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
    }
    let defaults = ClusterOptions::default();
    let options = ClusterOptions {
        seed: file.seed.unwrap_or(defaults.seed),
        max_iters: file.max_iters.unwrap_or(defaults.max_iters),
        normalize: file.normalize.unwrap_or(false),
        depth: cli
            .grid
            .depth
            .map(|d| d as usize)
            .or(file.depth)
            .unwrap_or(defaults.depth),
        width: cli
            .grid
            .width
            .map(|w| w as usize)
            .or(file.width)
            .unwrap_or(defaults.width),
        goals: cli
            .grid
            .goals
            .map(|g| g as usize)
            .or(file.goals)
            .unwrap_or(defaults.goals),
        proof,
    };
    if options.depth == 0 || options.width == 0 || options.goals == 0 || options.max_iters == 0 {
        return Err(CliError::Usage(
            "grid sizes and max_iters must be at least 1".into(),
        ));
    }
    Ok(Settings {
        corpus_path: cli.corpus.clone().or_else(|| file.corpus.clone()),
        options,
        file,
    })
}

fn load_corpus(path: Option<&Path>) -> Result<Corpus, CliError> {
    match path {
        Some(p) => parse_corpus(&read_file(p)?).map_err(|source| CliError::Corpus {
            path: p.display().to_string(),
            source,
        }),
        None => parse_corpus(SAMPLE_CORPUS).map_err(|source| CliError::Corpus {
            path: "<bundled>".into(),
            source,
        }),
    }
}

fn resolve_cut(args: &ClusterArgs, file: &FileConfig) -> Result<Cut, CliError> {
    if let Some(k) = args.clusters {
        return Ok(Cut::Clusters(k as usize));
    }
    if let Some(g) = args.granularity {
        return Ok(Cut::Granularity(g));
    }
    match (file.clusters, file.granularity) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "config sets both `clusters` and `granularity`".into(),
        )),
        (Some(0), None) => Err(CliError::Usage(
            "config `clusters` must be at least 1".into(),
        )),
        (Some(k), None) => Ok(Cut::Clusters(k)),
        (None, Some(g)) if (1..=5).contains(&g) => Ok(Cut::Granularity(g)),
        (None, Some(g)) => Err(CliError::Usage(format!(
            "config granularity {g} is outside 1..=5"
        ))),
        (None, None) => Ok(Cut::Granularity(3)),
    }
}

fn apply_cluster_args(options: &ClusterOptions, args: &ClusterArgs) -> ClusterOptions {
    let mut o = options.clone();
    if let Some(s) = args.seed {
        o.seed = s;
    }
    if let Some(i) = args.iters {
        o.max_iters = i as usize;
    }
    o.normalize |= args.normalize;
    o
}

struct Clustered {
    partition: Partition,
    terms: RecurrentResult,
}

fn run_clustering(
    corpus: &Corpus,
    kind: Kind,
    cut: Cut,
    options: &ClusterOptions,
) -> Result<Clustered, CliError> {
    // Proofs are encoded with constants from the statement clustering at the same cut.
    let terms = recurrent_cluster(corpus, cut, options)?;
    let partition = match kind {
        Kind::Terms => terms.partition.clone(),
        Kind::Proofs => cluster_proofs(corpus, &terms.encoder, cut, options)?,
    };
    Ok(Clustered { partition, terms })
}

fn report_diagnostics(diag: &Diagnostics, p: &Partition) {
    for d in &p.diagnostics {
        diag.emit("warning", d, None);
    }
}

fn encoder_for(
    corpus: &Corpus,
    granularity: Option<u8>,
    options: &ClusterOptions,
) -> Result<Encoder, CliError> {
    Ok(match granularity {
        Some(g) => recurrent_cluster(corpus, Cut::Granularity(g), options)?.encoder,
        None => Encoder::initial(corpus),
    })
}

fn execute(cli: &Cli, diag: &Diagnostics) -> Result<(), CliError> {
    let s = settings(cli)?;
    let opts = &s.options;
    match &cli.command {
        Command::Sample => write_output(None, SAMPLE_CORPUS),
        Command::Validate { path } => {
            let corpus = load_corpus(path.as_deref().or(s.corpus_path.as_deref()))?;
            println!(
                "ok: {} libraries, {} primitives, {} entries",
                corpus.libraries.len(),
                corpus.primitives.len(),
                corpus.entries.len()
            );
            Ok(())
        }
        Command::Termtree { entry, dot } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let e = corpus
                .entry(entry)
                .ok_or_else(|| CliError::UnknownEntry(entry.clone()))?;
            let tree = statement_tree(&corpus, e)?;
            let text = if *dot {
                term_tree_dot(&tree, &e.name)
            } else {
                let mut out = String::new();
                for n in &tree.nodes {
                    let parent = n.parent.map_or(-1, |p| tree.nodes[p].level_index as i64);
                    let _ = writeln!(
                        out,
                        "({},{}) {} : {} [parent {}]",
                        n.depth, n.level_index, n.term_label.text, n.type_label.text, parent
                    );
                }
                out
            };
            write_output(None, &text)
        }
        Command::Features {
            entry,
            csv,
            granularity,
        } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let e = corpus
                .entry(entry)
                .ok_or_else(|| CliError::UnknownEntry(entry.clone()))?;
            let enc = encoder_for(&corpus, *granularity, opts)?;
            let m = encode_statement(&corpus, e, &enc, opts.depth, opts.width)?;
            let text = if *csv {
                m.to_csv()
            } else {
                format!(
                    "{}\n",
                    serde_json::to_string(&m.flatten()).expect("floats serialize")
                )
            };
            write_output(None, &text)
        }
        Command::ProofFeatures {
            entry,
            csv,
            granularity,
        } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let e = corpus
                .entry(entry)
                .ok_or_else(|| CliError::UnknownEntry(entry.clone()))?;
            let enc = encoder_for(&corpus, *granularity, opts)?;
            let m = encode_proof(e, &enc, &opts.proof, opts.goals)?;
            if m.truncated_args > 0 {
                diag.emit(
                    "warning",
                    &format!(
                        "{} tactic arguments beyond the fourth slot were dropped",
                        m.truncated_args
                    ),
                    Some(&e.name),
                );
            }
            let text = if *csv {
                m.to_csv()
            } else {
                format!(
                    "{}\n",
                    serde_json::to_string(&m.flatten()).expect("floats serialize")
                )
            };
            write_output(None, &text)
        }
        Command::Cluster { args, out } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let opts = apply_cluster_args(opts, args);
            let cut = resolve_cut(args, &s.file)?;
            let c = run_clustering(&corpus, args.kind, cut, &opts)?;
            report_diagnostics(diag, &c.partition);
            let file = PartitionFile::new(&c.partition, c.terms.converged, c.terms.passes);
            write_output(out.as_deref(), &file.to_json())
        }
        Command::Depgraph { root, dot } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let root = (root != "ALL").then_some(root.as_str());
            let g = build_dg1(&corpus, root)?;
            write_output(dot.as_deref(), &dep_graph_dot(&g))
        }
        Command::Libgraph { dot } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            write_output(dot.as_deref(), &lib_graph_dot(&build_dg2(&corpus)?))
        }
        Command::Report {
            args,
            nested,
            format,
            out,
        } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let opts = apply_cluster_args(opts, args);
            let cut = resolve_cut(args, &s.file)?;
            let nested = nested.or(s.file.nested);
            if let (Some(n), Some(g)) = (nested, cut.granularity()) {
                if n <= g {
                    return Err(CliError::Usage(format!(
                        "--nested {n} must be greater than the base granularity {g}"
                    )));
                }
            }
            let text = match format {
                Format::Text => {
                    let c = run_clustering(&corpus, args.kind, cut, &opts)?;
                    report_diagnostics(diag, &c.partition);
                    text_report(&c.partition, &corpus)?
                }
                Format::Automaton => {
                    let c = run_clustering(&corpus, args.kind, cut, &opts)?;
                    report_diagnostics(diag, &c.partition);
                    automata_dot(&c.partition, &corpus, &opts.proof.table)?
                }
                Format::Dot => {
                    let Some(g) = cut.granularity() else {
                        return Err(CliError::Usage("--format dot needs --granularity".into()));
                    };
                    let inner = nested.unwrap_or(g);
                    let terms = recurrent_cluster(&corpus, cut, &opts)?;
                    let items = match args.kind {
                        Kind::Terms => statement_vectors(&corpus, &terms.encoder, &opts)?,
                        Kind::Proofs => proof_vectors(&corpus, &terms.encoder, &opts)?,
                    };
                    let gs: Vec<u8> = if inner > g { vec![g, inner] } else { vec![g] };
                    let ps = nested_partitions(&items, &gs, opts.normalize)?;
                    for p in &ps {
                        report_diagnostics(diag, p);
                    }
                    similarity_dot(&ps[0], ps.last().expect("at least one partition"))?
                }
            };
            write_output(out.as_deref(), &text)
        }
        Command::Pipeline { args, out_dir } => {
            let corpus = load_corpus(s.corpus_path.as_deref())?;
            let opts = apply_cluster_args(opts, args);
            let cut = resolve_cut(args, &s.file)?;
            fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
                path: out_dir.display().to_string(),
                message: e.to_string(),
            })?;
            let c = run_clustering(&corpus, args.kind, cut, &opts)?;
            report_diagnostics(diag, &c.partition);
            let file = PartitionFile::new(&c.partition, c.terms.converged, c.terms.passes);
            write_output(Some(&out_dir.join("partition.json")), &file.to_json())?;
            write_output(
                Some(&out_dir.join("report.txt")),
                &text_report(&c.partition, &corpus)?,
            )?;
            write_output(
                Some(&out_dir.join("depgraph.dot")),
                &dep_graph_dot(&build_dg1(&corpus, None)?),
            )?;
            write_output(
                Some(&out_dir.join("libgraph.dot")),
                &lib_graph_dot(&build_dg2(&corpus)?),
            )
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let diag = Diagnostics {
        json: cli.json_diagnostics,
    };
    match execute(&cli, &diag) {
        Ok(()) => 0,
        Err(e) => {
            if let CliError::Corpus { path, source } = &e {
                for d in source.diagnostics() {
                    diag.emit(
                        "error",
                        &format!("{}{}", d.rule, detail(&d.detail)),
                        Some(&d.entry),
                    );
                }
                if source.diagnostics().is_empty() {
                    diag.emit("error", &format!("{path}: {source}"), None);
                } else {
                    diag.emit("error", &format!("{path}: corpus is invalid"), None);
                }
            } else {
                diag.emit("error", &e.to_string(), None);
            }
            e.exit_code()
        }
    }
}

fn detail(d: &str) -> String {
    if d.is_empty() {
        String::new()
    } else {
        format!(": {d}")
    }
}
