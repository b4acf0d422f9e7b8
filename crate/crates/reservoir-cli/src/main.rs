//! reservoir-calc: exact stationary storage distributions, Monte Carlo
//! checks, outflow optimization, and the continuous-time model, emitted as
//! CSV or JSON tables.
//!
//! Exit codes: 0 ok, 2 usage or invalid parameters, 3 numerical failure,
//! 4 bracket failure.

mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha12Rng;
use rand_core::SeedableRng;
use reservoir_core::moran::ks_against_cdf;
use reservoir_core::sim::{compare, pool_chains, run_single_chain};
use reservoir_core::{build_distribution, Error, ModelParams, MoranModel, SimConfig};

use report::{DerivedEcho, Format, Report, Table, ToolInfo};

#[derive(Parser)]
#[command(name = "reservoir-calc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Crossover,
    Sum,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this path instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Reservoir capacity.
    #[arg(long)]
    v: f64,
    /// Gamma inflow shape (integer).
    #[arg(long)]
    p: u32,
    /// Gamma inflow rate.
    #[arg(long)]
    mu: f64,
    /// Target outflow per period.
    #[arg(long)]
    m: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Exact stationary distribution: atoms, alpha vector, density and CDF series.
    Dist {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of interior series points.
        #[arg(long, default_value_t = 200)]
        grid: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Simulate the storage recurrence and compare against the exact distribution.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Retained steps per chain.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 10_000)]
        burn_in: u64,
        #[arg(long, default_value_t = 1)]
        chains: u64,
        /// Declared pass/fail threshold on the KS distance.
        #[arg(long, default_value_t = 0.005)]
        ks_threshold: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Choose the outflow: spillage/depletion crossover or sum minimization.
    Optimize {
        /// Reservoir capacity.
        #[arg(long)]
        v: f64,
        /// Gamma inflow shape (integer).
        #[arg(long)]
        p: u32,
        /// Gamma inflow rate.
        #[arg(long)]
        mu: f64,
        #[arg(long, value_enum)]
        objective: Objective,
        /// Lower bracket edge; defaults to v/100.
        #[arg(long)]
        lo: Option<f64>,
        /// Upper bracket edge; defaults to v.
        #[arg(long)]
        hi: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Continuous-time model: density series, normalization, optional simulation.
    Moran {
        /// Inflow rate, in (0, 1).
        #[arg(long)]
        rho: f64,
        /// Number of series points (and histogram bins).
        #[arg(long, default_value_t = 200)]
        grid: u32,
        /// Series endpoint; defaults to a multiple of the tail decay scale.
        #[arg(long)]
        z_max: Option<f64>,
        /// Also run the discretized simulation and report its KS distance.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = 20_000.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, output) = match cli.command {
        Command::Dist { model, grid, output } => (cmd_dist(&model, grid), output),
        Command::Simulate { model, seed, samples, burn_in, chains, ks_threshold, output } => (
            cmd_simulate(
                &model,
                SimConfig { seed, burn_in, samples, chains },
                ks_threshold,
            ),
            output,
        ),
        Command::Optimize { v, p, mu, objective, lo, hi, output } => {
            (cmd_optimize(v, p, mu, objective, lo, hi), output)
        }
        Command::Moran { rho, grid, z_max, simulate, horizon, dt, seed, output } => {
            (cmd_moran(rho, grid, z_max, simulate, horizon, dt, seed), output)
        }
    };
    let report = match result {
        Ok(report) => report,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                Error::InvalidParams(_) | Error::Domain(_) => 2,
                Error::Bracket(_) => 4,
                _ => 3,
            });
        }
    };
    if let Err(e) = report.write(output.format, output.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn tool() -> ToolInfo {
    ToolInfo { name: "reservoir-calc", version: env!("CARGO_PKG_VERSION") }
}

fn check_grid(grid: u32) -> Result<(), Error> {
    if grid < 2 {
        return Err(Error::InvalidParams(format!("grid must be at least 2, got {grid}")));
    }
    Ok(())
}

fn cmd_dist(model: &ModelArgs, grid: u32) -> Result<Report, Error> {
    check_grid(grid)?;
    let params = ModelParams::new(model.v, model.p, model.mu, model.m)?;
    let dist = build_distribution(&params)?;
    let mut series = Table::new(vec!["z", "pdf", "cdf"]);
    for i in 1..=grid {
        let z = params.v * i as f64 / (grid + 1) as f64;
        series.push(vec![z, dist.pdf(z)?, dist.cdf(z)?]);
    }
    let mut r = Report::new(tool());
    r.params_model(&params);
    r.derived_model(&dist.derived);
    r.result_real("condition", dist.alpha.condition);
    for (i, &a) in dist.alpha.alpha.iter().enumerate() {
        r.result_real(&format!("alpha_{i}"), a);
    }
    r.result_real("depletion", dist.depletion_probability());
    r.result_real("spillage", dist.spillage_probability());
    r.table("series", series);
    Ok(r)
}

/// Run chains in parallel, capped by RESERVOIR_CALC_THREADS (default: the
/// machine's parallelism). Chains are keyed by index, so the pooled result
/// is byte-identical at any thread count.
fn run_chains_parallel(
    params: &ModelParams,
    config: &SimConfig,
) -> Result<reservoir_core::SimulationResult, Error> {
    params.validate()?;
    config.validate()?;
    let workers = std::env::var("RESERVOIR_CALC_THREADS")
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get() as u64).unwrap_or(1)
        })
        .min(config.chains);
    let mut chains: Vec<Result<Vec<f64>, Error>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..config.chains)
                        .step_by(workers as usize)
                        .map(|c| run_single_chain(params, config, c))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        // worker w produced chains w, w + workers, ...; restore index order
        let per_worker: Vec<Vec<Result<Vec<f64>, Error>>> =
            handles.into_iter().map(|h| h.join().expect("chain worker panicked")).collect();
        let mut per_worker: Vec<_> = per_worker.into_iter().map(Vec::into_iter).collect();
        for c in 0..config.chains {
            chains.push(per_worker[(c % workers) as usize].next().expect("chain missing"));
        }
    });
    let chains = chains.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(pool_chains(params, config, &chains))
}

fn cmd_simulate(
    model: &ModelArgs,
    config: SimConfig,
    ks_threshold: f64,
) -> Result<Report, Error> {
    let params = ModelParams::new(model.v, model.p, model.mu, model.m)?;
    let dist = build_distribution(&params)?;
    let mut sim = run_chains_parallel(&params, &config)?;
    let ks = compare(&mut sim, &dist)?;
    let mut r = Report::new(tool());
    r.params_model(&params);
    r.derived_model(&dist.derived);
    r.result_int("seed", config.seed as i64);
    r.result_int("burn_in", config.burn_in as i64);
    r.result_int("samples", config.samples as i64);
    r.result_int("chains", config.chains as i64);
    r.result_real("empirical_mass_at_zero", sim.empirical_mass_at_zero);
    r.result_real("empirical_mass_at_v", sim.empirical_mass_at_v);
    r.result_real("analytic_depletion", dist.depletion_probability());
    r.result_real("analytic_spillage", dist.spillage_probability());
    r.result_real("ks_distance", ks);
    r.result_real("ks_threshold", ks_threshold);
    r.result_bool("ks_pass", ks < ks_threshold);
    Ok(r)
}

fn cmd_optimize(
    v: f64,
    p: u32,
    mu: f64,
    objective: Objective,
    lo: Option<f64>,
    hi: Option<f64>,
) -> Result<Report, Error> {
    let lo = lo.unwrap_or(v / 100.0);
    let hi = hi.unwrap_or(v);
    let opt = match objective {
        Objective::Crossover => reservoir_core::optimize::crossover_outflow(v, p, mu, (lo, hi))?,
        Objective::Sum => reservoir_core::optimize::minimize_sum(v, p, mu, (lo, hi))?,
    };
    let at_star = build_distribution(&ModelParams::new(v, p, mu, opt.m_star)?)?;
    let mut r = Report::new(tool());
    r.param_real("v", v);
    r.param_int("p", p as i64);
    r.param_real("mu", mu);
    r.derived = Some(DerivedEcho::Bracket { lo, hi });
    r.result_str(
        "objective",
        match objective {
            Objective::Crossover => "crossover",
            Objective::Sum => "sum",
        },
    );
    r.result_real("m_star", opt.m_star);
    r.result_real("objective_value", opt.objective_value);
    r.result_int("evaluations", opt.evaluations as i64);
    r.result_real("depletion_at_m_star", at_star.depletion_probability());
    r.result_real("spillage_at_m_star", at_star.spillage_probability());
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn cmd_moran(
    rho: f64,
    grid: u32,
    z_max: Option<f64>,
    simulate: bool,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Report, Error> {
    check_grid(grid)?;
    let model = MoranModel::new(rho)?;
    // default endpoint: seven tail-decay lengths, where the CDF is ~0.999
    let z_max = z_max.unwrap_or(model.quad_upper * 0.14);
    if !(z_max > 0.0) {
        return Err(Error::InvalidParams(format!("z_max must be positive, got {z_max}")));
    }
    let density_mass = model.density_mass()?;
    let mut series = Table::new(vec!["z", "pdf", "cdf"]);
    for i in 1..=grid {
        let z = z_max * i as f64 / grid as f64;
        series.push(vec![z, model.daniels_pdf(z)?, model.cdf(z)?]);
    }
    let mut r = Report::new(tool());
    r.param_real("rho", rho);
    r.derived = Some(DerivedEcho::Moran { quad_upper: model.quad_upper, z_max });
    r.result_real("point_mass", model.point_mass());
    r.result_real("density_mass", density_mass);
    r.result_real("normalization", model.point_mass() + density_mass);
    if simulate {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut samples = reservoir_core::moran::simulate_moran(&model, horizon, dt, &mut rng)?;
        let n = samples.len() as f64;
        let atom = samples.iter().filter(|&&z| z == 0.0).count() as f64 / n;
        let ks = ks_against_cdf(&model, &mut samples, grid as usize)?;
        r.result_real("sim_dt", dt);
        r.result_real("sim_horizon", horizon);
        r.result_int("sim_seed", seed as i64);
        r.result_int("sim_samples", samples.len() as i64);
        r.result_real("sim_empirical_atom", atom);
        r.result_real("sim_ks_distance", ks);
        let mut hist = Table::new(vec!["bin_left", "bin_right", "frequency"]);
        let width = z_max / grid as f64;
        for i in 0..grid {
            let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
            // samples are sorted by the KS computation
            let count = samples.partition_point(|&s| s < b) - samples.partition_point(|&s| s < a);
            hist.push(vec![a, b, count as f64 / n]);
        }
        r.table("histogram", hist);
    }
    r.table("series", series);
    Ok(r)
}
