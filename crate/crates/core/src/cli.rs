//! The `rcg` command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{load_csv, CsvOptions, Dataset, FeatureKind, InstanceMask, NoiseSpec, SplitScheme};
use crate::error::{RcgError, Result};
use crate::evaluation::{compare_table, run_experiment, EvalResult};
use crate::graph::NeighborhoodGraph;
use crate::metric::{DistanceMatrix, DistanceSpec};
use crate::reduction::{reduce, subset_state, Algorithm, AlgorithmConfig};
use crate::report::{eval_table, ReductionReport, Results, RunManifest};
use crate::uncertainty::Significance;

#[derive(Debug, Parser)]
#[command(name = "rcg", version, about = "Feature and prototype selection with the relative certainty gain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a dataset and write the reduced CSV, trace and results.
    Reduce {
        /// none, fsrcg, psrcg, fsps, fsrcg+psrcg, cnn or rnn.
        #[arg(long)]
        algo: Algorithm,
        /// Also write the final k-NN graph as an edge list (graph.txt).
        #[arg(long)]
        dump_graph: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate one algorithm with a kNN classifier.
    Eval {
        #[arg(long)]
        algo: Algorithm,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate several algorithms on shared splits.
    Compare {
        /// Comma-separated algorithm names.
        #[arg(long, value_delimiter = ',', required = true)]
        algos: Vec<Algorithm>,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the class column.
    #[arg(long)]
    class_col: String,
    /// Neighborhood size of the graph and of the classifier.
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Chi-square significance level of the ">>" test.
    #[arg(long, conflicts_with = "epsilon")]
    alpha: Option<f64>,
    /// Use a fixed RCG margin instead of the chi-square test.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, env = "RCG_OUT_DIR", default_value = "rcg-out")]
    out: PathBuf,
    /// Columns to read as categorical.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
    /// Columns to read as numeric.
    #[arg(long, value_delimiter = ',')]
    numeric: Vec<String>,
    /// Use raw numeric differences instead of range-normalized ones.
    #[arg(long)]
    no_normalize: bool,
    /// Backward elimination removes the lowest-RCG candidate.
    #[arg(long)]
    literal_min: bool,
    /// Keep the deletion that stopped border pruning.
    #[arg(long)]
    no_rollback: bool,
    /// End (FS+PS)RCG with the (k+1)-NN zero-uncertainty purge.
    #[arg(long)]
    final_centers_pass: bool,
    /// Measure each (FS+PS)RCG round against the RCG accepted before the
    /// preceding purge.
    #[arg(long)]
    pre_purge_baseline: bool,
    /// Never keep fewer instances than this.
    #[arg(long)]
    min_alive: Option<usize>,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Number of cross-validation folds.
    #[arg(long, conflicts_with = "holdout")]
    cv: Option<usize>,
    /// Hold out this fraction of rows as a single test set.
    #[arg(long)]
    holdout: Option<f64>,
    /// Fraction of training labels to flip.
    #[arg(long)]
    noise: Option<f64>,
    /// Split without preserving class proportions.
    #[arg(long)]
    unstratified: bool,
}

impl Common {
    fn config(&self) -> AlgorithmConfig {
        let significance = match (self.alpha, self.epsilon) {
            (_, Some(epsilon)) => Significance::EpsilonMargin { epsilon },
            (Some(alpha), None) => Significance::ChiSquare { alpha },
            (None, None) => Significance::default(),
        };
        AlgorithmConfig {
            k: self.k,
            significance,
            rollback_last_deletion: !self.no_rollback,
            min_alive: self.min_alive,
            normalize: !self.no_normalize,
            literal_min: self.literal_min,
            final_centers_pass: self.final_centers_pass,
            pre_purge_baseline: self.pre_purge_baseline,
        }
    }

    fn load(&self) -> Result<Dataset> {
        let mut opts = CsvOptions::default();
        for c in &self.categorical {
            opts.kind_overrides.insert(c.clone(), FeatureKind::Categorical);
        }
        for c in &self.numeric {
            if opts.kind_overrides.insert(c.clone(), FeatureKind::Numeric).is_some() {
                return Err(RcgError::invalid(format!("column '{c}' declared both numeric and categorical")));
            }
        }
        load_csv(&self.data, &self.class_col, &opts)
    }
}

impl SplitArgs {
    fn scheme(&self, seed: u64) -> SplitScheme {
        let stratified = !self.unstratified;
        match self.holdout {
            Some(test_fraction) => SplitScheme::Holdout { test_fraction, seed, stratified },
            None => SplitScheme::KFold { folds: self.cv.unwrap_or(5), seed, stratified },
        }
    }

    fn noise(&self, seed: u64) -> Result<Option<NoiseSpec>> {
        self.noise.map(|f| NoiseSpec::new(f, seed)).transpose()
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RcgError + '_ {
    move |source| RcgError::Io { path: path.to_path_buf(), source }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(io_err(&path))
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn command_line(args: &[OsString]) -> Vec<String> {
    std::iter::once("rcg".to_string()).chain(args.iter().skip(1).map(|a| a.to_string_lossy().into_owned())).collect()
}

fn cmd_reduce(args: &[OsString], algo: Algorithm, dump_graph: bool, common: &Common, out: &mut dyn Write) -> Result<()> {
    let cfg = common.config();
    let ds = common.load()?;
    let train = InstanceMask::full(ds.n_rows());
    let outcome = reduce(&ds, &train, algo, &cfg)?;
    let final_rcg = subset_state(&ds, &train, &outcome.instances, &outcome.features, &cfg).ok().map(|s| s.rcg);

    prepare_out(&common.out)?;
    let mut csv = Vec::new();
    ds.write_csv(&mut csv, &outcome.instances, &outcome.features)?;
    write_file(&common.out, "reduced.csv", &csv)?;
    write_file(&common.out, "trace.txt", outcome.trace.to_string().as_bytes())?;
    if dump_graph {
        let spec = DistanceSpec::fit(&ds, &train, cfg.normalize);
        let matrix = DistanceMatrix::compute(&ds, &outcome.instances, &outcome.features, &spec)?;
        let labels: Vec<usize> = matrix.row_ids().iter().map(|&r| ds.label(r)).collect();
        let graph = NeighborhoodGraph::build(&matrix, &labels, ds.n_classes(), cfg.k)?;
        let mut edges = Vec::new();
        graph.write_edge_list(&matrix, &mut edges).map_err(io_err(&common.out))?;
        write_file(&common.out, "graph.txt", &edges)?;
    }

    let mut results = Results::new(RunManifest::new(command_line(args), common.seed, cfg, &common.data, &ds)?);
    let report = ReductionReport::new(&ds, &outcome.features, &outcome.instances, final_rcg, outcome.trace);
    writeln!(
        out,
        "{}: kept {} of {} instances, {} of {} features{}",
        algo,
        outcome.instances.alive_count(),
        ds.n_rows(),
        outcome.features.selected_count(),
        ds.n_features(),
        final_rcg.map(|r| format!(", RCG {r:.4}")).unwrap_or_default()
    )
    .map_err(io_err(Path::new("<stdout>")))?;
    results.reduction = Some(report);
    write_file(&common.out, "results.json", results.to_json()?.as_bytes())
}

fn cmd_evaluate(
    args: &[OsString],
    algos: &[Algorithm],
    split: &SplitArgs,
    common: &Common,
    compare: bool,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = common.config();
    let ds = common.load()?;
    let scheme = split.scheme(common.seed);
    let noise = split.noise(common.seed)?;
    let evaluations: Vec<EvalResult> =
        algos.iter().map(|&a| run_experiment(&ds, a, &scheme, &cfg, noise.as_ref())).collect::<Result<_>>()?;

    let mut results = Results::new(RunManifest::new(command_line(args), common.seed, cfg, &common.data, &ds)?);
    let stdout_err = io_err(Path::new("<stdout>"));
    if compare {
        let table = compare_table(&evaluations)?;
        write!(out, "{table}").map_err(stdout_err)?;
        results.comparison = Some(table);
    } else {
        write!(out, "{}", eval_table(&evaluations)).map_err(stdout_err)?;
    }
    results.evaluations = evaluations;
    prepare_out(&common.out)?;
    write_file(&common.out, "results.json", results.to_json()?.as_bytes())
}

/// Runs the front end on `args` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit code.
pub fn run(args: Vec<OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Reduce { algo, dump_graph, common } => cmd_reduce(&args, *algo, *dump_graph, common, out),
        Command::Eval { algo, split, common } => cmd_evaluate(&args, &[*algo], split, common, false, out),
        Command::Compare { algos, split, common } => cmd_evaluate(&args, algos, split, common, true, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "rcg: {e}");
            e.exit_code()
        }
    }
}
