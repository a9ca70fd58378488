use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use shotgun_core::assemble_one::assemble_from_1nbhd;
use shotgun_core::assemble_two::{assemble_auto, assemble_diameter2, assemble_from_2nbhd_fingerprint};
use shotgun_core::harness::{
    diameter_check, recover_centers, run_sweep, trial_seed, ExperimentConfig, Method,
};
use shotgun_core::iso::is_isomorphic;
use shotgun_core::shotgun::{shred, NeighborhoodCollection};
use shotgun_core::witness::{same_r_neighborhoods, search_nonrecon_pair, star_witness, StarWitnessReport};
use shotgun_core::{sample_er, EdgeProb, ErParams, Error, Graph};

#[derive(Parser)]
#[command(name = "shotgun", version, about = "Shotgun assembly of Erdős–Rényi graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample G(n, p) and write it in graph text format.
    Sample {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shred a graph file into a neighborhood collection.
    Shred {
        /// Input graph file.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        /// Anonymization seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        labeled_centers: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct a graph from a collection file.
    Assemble {
        #[arg(long)]
        collection: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Exponent used by auto dispatch and radius-2 center recovery.
        #[arg(long)]
        alpha: Option<f64>,
        /// Where to write the reconstructed graph.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a grid of seeded trials.
    Sweep(SweepArgs),
    /// Fraction of G(n, c sqrt(ln n / n)) samples with diameter 2.
    DiameterCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Star multiplicity reports for seeded G(n, n^-alpha) samples.
    StarWitness {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Search for a different graph with the same r-neighborhoods.
    SearchPair {
        /// Input graph file; when absent a graph is sampled.
        #[arg(long, conflicts_with_all = ["n", "alpha", "p"])]
        graph: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, conflicts_with = "p", required_unless_present = "p")]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GraphArgs {
    fn params(&self) -> ErParams {
        let prob = match (self.alpha, self.p) {
            (Some(a), _) => EdgeProb::Alpha(a),
            (None, Some(p)) => EdgeProb::P(p),
            (None, None) => unreachable!("clap requires one of alpha and p"),
        };
        ErParams {
            n: self.n,
            prob,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML config; when given the grid flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    #[arg(long)]
    radius: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Fingerprint1)]
    method: MethodArg,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    labeled_centers: bool,
    /// Output stem for the results files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    star_report: bool,
    /// Format of the per-cell summary printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fingerprint1,
    Diameter2,
    Fingerprint2,
    Auto,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Fingerprint1 => Method::Fingerprint1,
            MethodArg::Diameter2 => Method::Diameter2,
            MethodArg::Fingerprint2 => Method::Fingerprint2,
            MethodArg::Auto => Method::Auto,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => 2,
        Error::InvariantViolation(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string(value).map_err(|e| Error::InvariantViolation(e.to_string()))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Sample { graph, out } => {
            let g = sample_er(&graph.params())?;
            emit(&g.to_text(), out.as_deref())
        }
        Command::Shred {
            graph,
            radius,
            seed,
            labeled_centers,
            out,
        } => {
            let g = Graph::load(&graph)?;
            let c = shred(&g, radius, seed, labeled_centers)?;
            emit(&c.to_text(), out.as_deref())
        }
        Command::Assemble {
            collection,
            method,
            alpha,
            out,
        } => assemble_cmd(&collection, method.into(), alpha, out.as_deref()),
        Command::Sweep(args) => sweep_cmd(args),
        Command::DiameterCheck { n, c, trials, seed } => {
            let d = diameter_check(n, c, trials, seed)?;
            println!("{}", json(&d)?);
            Ok(())
        }
        Command::StarWitness {
            n,
            alpha,
            trials,
            seed,
            format,
        } => {
            let reports = (0..trials)
                .map(|t| {
                    let g = sample_er(&ErParams::with_alpha(n, alpha, trial_seed(seed, n, alpha, t)))?;
                    star_witness(&g, alpha)
                })
                .collect::<Result<Vec<_>, _>>()?;
            print_star_reports(&reports, format)
        }
        Command::SearchPair {
            graph,
            n,
            alpha,
            p,
            radius,
            budget,
            seed,
            out,
        } => {
            let g = match (graph, n) {
                (Some(path), _) => Graph::load(&path)?,
                (None, Some(n)) => {
                    let prob = match (alpha, p) {
                        (Some(a), None) => EdgeProb::Alpha(a),
                        (None, Some(p)) => EdgeProb::P(p),
                        _ => return Err(Error::Config("give exactly one of --alpha and --p".into())),
                    };
                    sample_er(&ErParams { n, prob, seed })?
                }
                (None, None) => return Err(Error::Config("give --graph or --n".into())),
            };
            match search_nonrecon_pair(&g, radius, budget, seed)? {
                Some(h) => {
                    let line = serde_json::json!({
                        "found": true,
                        "same_neighborhoods": same_r_neighborhoods(&g, &h, radius)?,
                        "isomorphic": is_isomorphic(&g, &h),
                        "edges": h.edge_count(),
                    });
                    println!("{line}");
                    if let Some(path) = out {
                        h.save(path)?;
                    }
                }
                None => println!("{}", serde_json::json!({ "found": false })),
            }
            Ok(())
        }
    }
}

fn assemble_cmd(path: &Path, method: Method, alpha: Option<f64>, out: Option<&Path>) -> Result<(), Error> {
    let mut c = NeighborhoodCollection::load(path)?;
    if c.radius != method.radius() {
        return Err(Error::Config(format!(
            "method {method} needs radius {}, collection has {}",
            method.radius(),
            c.radius
        )));
    }
    let mut center_failures = 0;
    if !c.labeled {
        let a = alpha.unwrap_or(0.5);
        let rec = recover_centers(&c, None, a);
        center_failures = rec.failures;
        c = rec.collection;
    }
    if center_failures > 0 {
        println!(
            "{}",
            serde_json::json!({ "status": "failed", "center_failures": center_failures })
        );
        return Ok(());
    }
    let outcome = match method {
        Method::Fingerprint1 => assemble_from_1nbhd(&c)?,
        Method::Diameter2 => assemble_diameter2(&c)?,
        Method::Fingerprint2 => assemble_from_2nbhd_fingerprint(&c)?,
        Method::Auto => {
            let a = alpha.ok_or_else(|| Error::Config("auto needs --alpha".into()))?;
            assemble_auto(&c, c.n, a)?
        }
    };
    let line = serde_json::json!({
        "status": outcome.status,
        "edges": outcome.graph.edge_count(),
        "diagnostics": outcome.diagnostics,
    });
    println!("{line}");
    if let Some(path) = out {
        outcome.graph.save(path)?;
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<(), Error> {
    let cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let method: Method = args.method.into();
            ExperimentConfig {
                n_values: args.n.clone(),
                alpha_values: args.alpha.clone(),
                radius: args.radius.unwrap_or(method.radius()),
                method,
                trials: args.trials,
                base_seed: args.seed,
                labeled_centers: args.labeled_centers,
                output_path: args.out.clone(),
                star_report: args.star_report,
            }
        }
    };
    let result = run_sweep(&cfg)?;
    match args.format {
        Format::Csv => {
            let path = cfg.file(".summary.csv");
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
            print!("{text}");
        }
        Format::Jsonl => {
            for cell in &result.summary {
                println!("{}", json(cell)?);
            }
        }
    }
    let _ = std::io::stdout().flush();
    Ok(())
}

fn print_star_reports(reports: &[StarWitnessReport], format: Format) -> Result<(), Error> {
    match format {
        Format::Jsonl => {
            for r in reports {
                println!("{}", json(r)?);
            }
        }
        Format::Csv => {
            println!("n,alpha,beta,star_count,isolated,best_degree,multiplicity,threshold,passed");
            for r in reports {
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    r.n, r.alpha, r.beta, r.star_count, r.isolated, r.best_degree, r.multiplicity, r.threshold, r.passed
                );
            }
        }
    }
    Ok(())
}
