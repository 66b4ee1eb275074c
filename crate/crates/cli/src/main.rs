use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use logistic_ts::env::PriorSpec;
use logistic_ts::geometry::{
    build_eps_net_with, covering_number_bounds, net_entropy_bound, validate_net, NetOptions,
};
use logistic_ts::harness::bounds::{default_epsilon, entropy_bound, BoundsRow, NET_BUDGET};
use logistic_ts::harness::figures::{emit_figure_data, DEFAULT_BETAS};
use logistic_ts::harness::lemmas::{lemma_sweep, write_lemma_csv, LemmaKind};
use logistic_ts::harness::{default_jobs, info_ratio_scan, run_experiment, ExperimentConfig, ScanSpec};
use logistic_ts::rng::{Purpose, StreamTree};
use logistic_ts::{Error, Slope};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "lts", version, about = "Thompson Sampling on logistic bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded regret experiments and write a per-step trace.
    Simulate(SimulateArgs),
    /// Search random and structured posteriors for large information ratios.
    InfoRatioScan(ScanArgs),
    /// Sweep the lemma oracles on random instances.
    LemmaCheck(LemmaArgs),
    /// Print the closed-form regret bounds.
    Bounds(BoundsArgs),
    /// Build and validate an epsilon-net.
    Net(NetArgs),
    /// Tabulate the scalar curves for plotting.
    FigureData(FigureArgs),
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn jobs(&self) -> usize {
        self.jobs.unwrap_or_else(default_jobs)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    horizon: usize,
    #[arg(long, default_value_t = 100)]
    episodes: usize,
    /// Atoms drawn per episode for a continuous prior.
    #[arg(long, default_value_t = 500)]
    particles: usize,
    /// Net resolution for the quantized bound (default d/(βT)).
    #[arg(long)]
    epsilon: Option<f64>,
    /// `uniform-sphere` or `file:<path>`.
    #[arg(long, default_value = "uniform-sphere")]
    prior: String,
    /// Information ratio every this many steps; 0 disables it.
    #[arg(long, default_value_t = 1)]
    metrics_every: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    dim: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5,10,100")]
    beta: Vec<f64>,
    /// Random posteriors per (d, β) cell.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Posteriors per structured family per cell.
    #[arg(long, default_value_t = 200)]
    structured_trials: usize,
    #[arg(long, default_value_t = 2)]
    n_min: usize,
    #[arg(long, default_value_t = 50)]
    n_max: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct LemmaArgs {
    /// Lemma to check (repeatable); all when omitted.
    #[arg(long)]
    lemma: Vec<String>,
    /// Trials per lemma (default: per-lemma sweep size).
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_delimiter = ',')]
    dim: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    horizon: Vec<usize>,
    /// Net resolution (default d/(βT) per row).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Largest net to build; beyond it the covering bound is used.
    #[arg(long, default_value_t = NET_BUDGET)]
    net_budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct NetArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    epsilon: f64,
    /// Validation samples per round.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the net to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long, value_delimiter = ',')]
    beta: Vec<f64>,
    #[arg(long, default_value_t = 1001)]
    resolution: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

enum Failure {
    Lib(Error),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type Outcome = std::result::Result<(), Failure>;

fn simulate(a: SimulateArgs) -> Outcome {
    let mut cfg = ExperimentConfig::new(a.dim, Slope::new(a.beta)?, a.horizon);
    cfg.episodes = a.episodes;
    cfg.particles = a.particles;
    cfg.epsilon = a.epsilon;
    cfg.prior = PriorSpec::parse(&a.prior)?;
    cfg.seed = a.common.seed;
    cfg.out_dir = a.common.out.clone();
    cfg.jobs = a.common.jobs();
    cfg.metrics_every = a.metrics_every;
    let report = run_experiment(&cfg)?;
    let (csv, json) = report.write(&cfg.out_dir)?;
    let s = &report.summary;
    println!(
        "episodes={} T={} mean_regret={:.6} ± {:.6} (realized {:.6} ± {:.6})",
        cfg.episodes,
        cfg.horizon,
        s.mean_cum_regret_expected,
        s.stderr_cum_regret_expected,
        s.mean_cum_regret_realized,
        s.stderr_cum_regret_realized
    );
    println!(
        "bound_main={:.6} bound_quantized={:.6} entropy={:.6} ({})",
        s.bound_main,
        s.bound_quantized,
        s.entropy.value,
        s.entropy.source.as_str()
    );
    if let Some(g) = s.gamma_max {
        println!(
            "gamma_max={g:.6} bound={} exceeded={}",
            s.gamma_bound, s.gamma_exceeded
        );
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn scan(a: ScanArgs) -> Outcome {
    let spec = ScanSpec {
        dims: a.dim,
        betas: a.beta,
        n_min: a.n_min,
        n_max: a.n_max,
        trials: a.trials,
        structured_trials: a.structured_trials,
        seed: a.common.seed,
        jobs: a.common.jobs(),
    };
    if spec.n_min == 0 || spec.n_min > spec.n_max {
        return Err(Error::Config("need 1 <= n-min <= n-max".into()).into());
    }
    let out = info_ratio_scan(&spec)?;
    fs::create_dir_all(&a.common.out)?;
    let path = a.common.out.join("info_ratio_scan.csv");
    out.write_csv(BufWriter::new(fs::File::create(&path)?))?;
    println!(
        "posteriors={} max_gamma_over_d={} violations={}",
        out.rows.len(),
        out.max_gamma_over_d().map_or("n/a".into(), |g| format!("{g:.6}")),
        out.violations.len()
    );
    println!("wrote {}", path.display());
    if out.violations.is_empty() {
        return Ok(());
    }
    let dir = a.common.out.join("violations");
    fs::create_dir_all(&dir)?;
    for (row, post) in &out.violations {
        let name = format!(
            "d{}_beta{}_{}_{}.txt",
            row.d,
            row.beta,
            row.family.as_str(),
            row.trial
        );
        post.save(&dir.join(name))?;
    }
    Err(Failure::Violation(format!(
        "{} posteriors exceed 4.5 d; saved under {}",
        out.violations.len(),
        dir.display()
    )))
}

fn lemma_check(a: LemmaArgs) -> Outcome {
    let kinds = if a.lemma.is_empty() {
        LemmaKind::ALL.to_vec()
    } else {
        a.lemma
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<LemmaKind>, _>>()?
    };
    let jobs = a.common.jobs();
    let mut sweeps = Vec::new();
    let mut failed = Vec::new();
    for k in kinds {
        let trials = a.trials.unwrap_or(k.default_trials());
        let s = lemma_sweep(k, trials, a.common.seed, jobs)?;
        println!(
            "{:<26} trials={:<7} checks={:<7} skipped={:<6} violations={:<5} worst_margin={}",
            k.name(),
            trials,
            s.rows.len(),
            s.skipped,
            s.violations(),
            s.worst_margin().map_or("n/a".into(), |m| format!("{m:.3e}"))
        );
        if s.violations() > 0 {
            failed.push(k.name());
        }
        sweeps.push(s);
    }
    fs::create_dir_all(&a.common.out)?;
    let path = a.common.out.join("lemma_check.csv");
    write_lemma_csv(BufWriter::new(fs::File::create(&path)?), &sweeps)?;
    println!("wrote {}", path.display());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!("violations in {}", failed.join(", "))))
    }
}

fn bounds(a: BoundsArgs) -> Outcome {
    if a.dim.is_empty() || a.beta.is_empty() || a.horizon.is_empty() {
        return Err(Error::Config("--dim, --beta and --horizon are required".into()).into());
    }
    let tree = StreamTree::new(a.seed);
    println!("d\tbeta\tT\tbound_main\tbound_quantized\tnet_size\tentropy_bound");
    let mut index = 0;
    for &d in &a.dim {
        if d == 0 {
            return Err(Error::ZeroDimension.into());
        }
        for &b in &a.beta {
            let beta = Slope::new(b)?;
            for &t in &a.horizon {
                let eps = a.epsilon.unwrap_or_else(|| default_epsilon(d, beta.get(), t));
                if !(eps > 0.0 && eps <= 2.0) {
                    return Err(Error::InvalidEpsilon(eps).into());
                }
                let h = entropy_bound(d, eps, a.net_budget, &mut tree.stream(index, Purpose::NetBuild))?;
                index += 1;
                let row = BoundsRow::new(d, beta.get(), t, eps, &h);
                println!(
                    "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\t{:.6}",
                    row.d,
                    row.beta,
                    row.horizon,
                    row.bound_main,
                    row.bound_quantized,
                    row.net_size.map_or("-".into(), |n| n.to_string()),
                    row.entropy_bound
                );
            }
        }
    }
    Ok(())
}

fn net(a: NetArgs) -> Outcome {
    let tree = StreamTree::new(a.seed);
    let opts = NetOptions {
        validation_samples: a.samples,
        ..NetOptions::default()
    };
    let net = build_eps_net_with(a.dim, a.epsilon, opts, &mut tree.stream(0, Purpose::NetBuild))?;
    let radius = validate_net(&net, a.samples, &mut tree.stream(0, Purpose::NetValidate))?;
    let (_, upper) = covering_number_bounds(a.dim, a.epsilon);
    println!(
        "atoms={} log_size={:.6} cardinality_bound={:.6e} independent_radius={:.6e} epsilon={}",
        net.len(),
        net_entropy_bound(&net),
        upper,
        radius,
        a.epsilon
    );
    if let Some(path) = a.out {
        save_net(&net, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn save_net(net: &logistic_ts::geometry::EpsNet, path: &Path) -> logistic_ts::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    net.save(path)
}

fn figure_data(a: FigureArgs) -> Outcome {
    let betas = if a.beta.is_empty() {
        DEFAULT_BETAS.to_vec()
    } else {
        a.beta
    };
    for p in emit_figure_data(&betas, a.resolution, &a.out)? {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::InfoRatioScan(a) => scan(a),
        Command::LemmaCheck(a) => lemma_check(a),
        Command::Bounds(a) => bounds(a),
        Command::Net(a) => net(a),
        Command::FigureData(a) => figure_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            ExitCode::from(EXIT_VIOLATION)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Csv(_) | Error::Json(_) => ExitCode::from(EXIT_IO),
                _ => ExitCode::from(EXIT_CONFIG),
            }
        }
    }
}
