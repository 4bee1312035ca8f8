use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use archpursuit::experiments::{self, FactorizeOptions, NoiseSpec, SelectRule, SweepSpec};
use archpursuit::generators::{gen_noisy_pairs, Generator};
use archpursuit::io::{load_csv_with, load_matrix, save_csv, CsvOptions};
use archpursuit::{DataMatrix, Error};

#[derive(Parser)]
#[command(name = "archpursuit", version, about = "Extreme-point pursuit with random linear functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact-recovery rate over a grid of k and m = ⌈c·k·ln k⌉.
    Sweep(SweepArgs),
    /// Residual grid over (m, eps) on noisy pairs, archetypes chosen by votes.
    Noise(NoiseArgs),
    /// As `noise`, archetypes chosen by group-lasso persistence.
    GlassoNoise(GlassoNoiseArgs),
    /// Sorted normalized vote fractions, one row per repeat.
    Scree(ScreeArgs),
    /// Label every row with its nearest archetype row.
    Classify(ClassifyArgs),
    /// Pursuit, selection and non-negative weights in one pipeline.
    Factorize(FactorizeArgs),
    /// Solid angles, simplicial constants and the predicted functional count.
    Diagnose(DiagnoseArgs),
    /// Write a synthetic instance.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Matrix file (CSV, or binary with a .bin/.apmx extension).
    #[arg(long)]
    input: PathBuf,
    /// Ignore the first CSV line.
    #[arg(long)]
    skip_header: bool,
    /// Treat columns as data points.
    #[arg(long)]
    transpose: bool,
}

impl InputArgs {
    fn load(&self) -> archpursuit::Result<DataMatrix> {
        let m = load_matrix(&self.input, CsvOptions { skip_header: self.skip_header })?;
        Ok(if self.transpose { m.transpose() } else { m })
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
    ks: Vec<usize>,
    /// Multipliers c.
    #[arg(long = "c", value_delimiter = ',', default_value = "0.5,1,2,3,5,10,12")]
    multipliers: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    #[arg(long, default_value = "uniform")]
    generator: Generator,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "recovery.csv")]
    out: PathBuf,
    /// Also write the log k reference and 95% isocline per k.
    #[arg(long)]
    isocline_out: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseArgs {
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    /// Functional counts; defaults to {1,2,5,10,20}·k ln k.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Noise levels; defaults to ten values log-spaced in [1e-4, 1e-1].
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Rows kept as archetypes.
    #[arg(long, default_value_t = 20)]
    select: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "noise.csv")]
    out: PathBuf,
}

impl NoiseArgs {
    fn spec(&self) -> NoiseSpec {
        let mut spec = NoiseSpec::with_defaults(self.k, self.p, self.seed);
        if let Some(m) = &self.m {
            spec.ms = m.clone();
        }
        if let Some(e) = &self.eps {
            spec.eps = e.clone();
        }
        spec.trials = self.trials;
        spec.select = self.select;
        spec
    }
}

#[derive(Args)]
struct GlassoNoiseArgs {
    #[command(flatten)]
    noise: NoiseArgs,
    /// Relative objective change that ends each solve on the path.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
}

#[derive(Args)]
struct ScreeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "scree.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Archetype row indices.
    #[arg(long, value_delimiter = ',', conflicts_with = "archetypes_file", required_unless_present = "archetypes_file")]
    archetypes: Option<Vec<usize>>,
    /// One archetype index per line, e.g. indices.csv from `factorize`.
    #[arg(long)]
    archetypes_file: Option<PathBuf>,
    #[arg(long, default_value = "labels.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct FactorizeArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Functional count; with --adaptive, the per-round batch.
    #[arg(long)]
    m: Option<usize>,
    /// Run rounds until --patience rounds find nothing new.
    #[arg(long)]
    adaptive: bool,
    /// Functionals per adaptive round.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long, default_value_t = 2)]
    patience: usize,
    #[arg(long, default_value = "vote")]
    select: SelectRule,
    /// Archetypes to keep; by default every row found (vote rule only).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Scale rows to unit norm before pursuit.
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Extreme rows; found by adaptive pursuit when omitted.
    #[arg(long, value_delimiter = ',')]
    ext: Option<Vec<usize>>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "geometry.csv")]
    out: PathBuf,
    /// Summary file; printed to stdout when omitted.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// uniform, hilbert or noisy-pairs.
    #[arg(long, default_value = "uniform")]
    generator: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    p: usize,
    #[arg(long, default_value_t = 20)]
    k: usize,
    /// Noise level for noisy-pairs.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    w_out: Option<PathBuf>,
    #[arg(long)]
    h_out: Option<PathBuf>,
}

/// A flag combination the library would accept but the command line rejects.
struct Usage(String);

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(msg) => Failure::Usage(msg),
            other => Failure::Runtime(other),
        }
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u.0)
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("ARCHPURSUIT_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Usage(format!("ARCHPURSUIT_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(Error::Format(e.to_string())))
}

fn load_indices(path: &Path) -> archpursuit::Result<Vec<usize>> {
    let m = load_csv_with(path, CsvOptions::default())?;
    m.as_slice()
        .iter()
        .map(|&v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Format(format!("{} holds a non-index value {v}", path.display())))
            }
        })
        .collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Sweep(a) => {
            let spec = SweepSpec {
                ks: a.ks,
                multipliers: a.multipliers,
                trials: a.trials,
                n: a.n,
                p: a.p,
                generator: a.generator,
                seed: a.seed,
            };
            let grid = experiments::cmd_sweep(&spec)?;
            experiments::write_recovery_csv(&grid, &a.out)?;
            if let Some(path) = a.isocline_out {
                experiments::write_isocline_csv(&grid, &path)?;
            }
        }
        Command::Noise(a) => {
            let grid = experiments::cmd_noise(&a.spec())?;
            experiments::write_noise_csv(&grid, &a.out)?;
        }
        Command::GlassoNoise(a) => {
            let grid = experiments::cmd_glasso_noise(&a.noise.spec(), a.tol, a.max_iter)?;
            experiments::write_noise_csv(&grid, &a.noise.out)?;
        }
        Command::Scree(a) => {
            let x = a.input.load()?;
            save_csv(&experiments::cmd_scree(&x, a.m, a.repeats, a.seed)?, &a.out)?;
        }
        Command::Classify(a) => {
            let x = a.input.load()?;
            let archetypes = match (a.archetypes, a.archetypes_file) {
                (Some(list), _) => list,
                (None, Some(path)) => load_indices(&path)?,
                (None, None) => return Err(Usage("need --archetypes or --archetypes-file".into()).into()),
            };
            experiments::write_labels_csv(&experiments::cmd_classify(&x, &archetypes)?, &a.out)?;
        }
        Command::Factorize(a) => {
            let m = match (a.adaptive, a.m, a.batch) {
                (false, _, Some(_)) => return Err(Usage("--batch only applies with --adaptive".into()).into()),
                (true, Some(_), Some(_)) => {
                    return Err(Usage("with --adaptive, --m sets the batch; give --m or --batch, not both".into()).into())
                }
                (true, m, b) => b.or(m).unwrap_or(100),
                (false, Some(m), None) => m,
                (false, None, None) => a.k.map_or(1000, |k| experiments::m_for_multiplier(10.0, k.max(2))),
            };
            let opts = FactorizeOptions {
                m,
                adaptive: a.adaptive,
                patience: a.patience,
                select: a.select,
                k: a.k,
                workers: a.workers,
                normalize: a.normalize,
                seed: a.seed,
                glasso_tol: 1e-6,
                glasso_max_iter: 2000,
            };
            let x = a.input.load()?;
            let res = experiments::cmd_factorize(&x, &opts)?;
            experiments::write_factorization(&res, &a.out_dir)?;
        }
        Command::Diagnose(a) => {
            let x = a.input.load()?;
            let report = experiments::cmd_diagnose(&x, a.ext.as_deref(), a.samples, a.seed, a.delta)?;
            experiments::write_geometry_csv(&report, &a.out)?;
            let summary = experiments::geometry_summary_json(&report);
            match a.json {
                Some(path) => experiments::write_json(&summary, &path)?,
                None => println!("{}", serde_json::to_string_pretty(&summary).expect("json values serialize")),
            }
        }
        Command::Generate(a) => {
            let (x, w, h) = match a.generator.as_str() {
                "noisy-pairs" => {
                    let inst = gen_noisy_pairs(a.p, a.k, a.eps, a.seed)?;
                    (inst.x, inst.w, inst.h)
                }
                other => {
                    let inst = other.parse::<Generator>()?.generate(a.n, a.p, a.k, a.seed)?;
                    (inst.x, inst.w, inst.h)
                }
            };
            save_csv(&x, &a.out)?;
            if let Some(path) = a.w_out {
                save_csv(&w, &path)?;
            }
            if let Some(path) = a.h_out {
                save_csv(&h, &path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
