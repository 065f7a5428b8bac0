use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use extdep::estimate::{
    eps_pair_estimate, eps_scaled_estimate, l_pair_estimate, lambda_estimate, stdf_estimate,
    Estimate, DEFAULT_LEVEL,
};
use extdep::models::{gaussian_eta, minfactor_eta_and_c};
use extdep::pipeline::{
    align, analyze, load_prices, monthly_block_maxima, neg_log_returns, read_sample_csv,
    write_sample_csv, GroupConfig,
};
use extdep::sample::{pit_transform, rank_transform, Margin, Margins, PseudoSample};
use extdep::simulate::{simulate, Seed};
use extdep::validate::{mc_consistency, mc_normality, MCConfig, SurvivalConfig};
use extdep::{make_index_pair, Error, ModelSpec, Result};

#[derive(Parser)]
#[command(
    name = "extdep",
    version,
    about = "Extremal dependence between groups of components"
)]
struct Cli {
    /// Seed value for the random generator (overrides config files).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a sample from a model and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate a tail functional from a CSV sample.
    Estimate(EstimateArgs),
    /// Print exact functionals of a model for a pair of groups.
    Theory(TheoryArgs),
    /// Run a Monte Carlo check.
    Mc(McArgs),
    /// Monthly block maxima analysis of daily prices.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Model spec: a JSON file or inline JSON.
    #[arg(long)]
    model: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MarginsArg {
    Ranks,
    Frechet,
    Uniform,
    Normal,
    Meta,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    EpsPair,
    Lambda,
    LPair,
    EpsScaled,
    Stdf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "ranks")]
    margins: MarginsArg,
    /// Metadata sidecar for `--margins meta`; defaults to `<input>.meta.json`.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// One-based columns of the first group, comma separated.
    #[arg(long, value_delimiter = ',')]
    i1: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    i2: Vec<usize>,
    #[arg(long, default_value_t = 1.0)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    /// Per-column arguments for `stdf`; `inf` drops a column.
    #[arg(long, value_delimiter = ',')]
    stdf_x: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, value_enum, default_value = "eps-pair")]
    estimator: EstimatorArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    model: String,
    #[arg(long, value_delimiter = ',')]
    i1: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    i2: Vec<usize>,
    /// Grid points as `x:y`, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1:1")]
    grid: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum McMode {
    Normality,
    Consistency,
    Survival,
}

#[derive(Args)]
struct McArgs {
    /// Serialized MCConfig (or SurvivalConfig for `--mode survival`).
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "normality")]
    mode: McMode,
    /// Sample sizes for `--mode consistency`.
    #[arg(long, value_delimiter = ',')]
    n_grid: Vec<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Daily price CSVs; several files are inner-joined on date.
    #[arg(long, required = true)]
    input: Vec<PathBuf>,
    /// Group config JSON; the bundled market grouping when omitted.
    #[arg(long)]
    groups: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    level: f64,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Serialize, Deserialize)]
struct SimMeta {
    model: ModelSpec,
    n: usize,
    seed: Seed,
    margins: Margins,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Simulate(a) => cmd_simulate(a, cli.seed, out),
        Command::Estimate(a) => cmd_estimate(a, out),
        Command::Theory(a) => cmd_theory(a, out),
        Command::Mc(a) => cmd_mc(a, cli.seed, out),
        Command::Analyze(a) => cmd_analyze(a, out),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(out, &text)
}

fn parse_model(arg: &str) -> Result<ModelSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        fs::read_to_string(arg)?
    };
    Ok(serde_json::from_str(&text)?)
}

fn cmd_simulate(a: SimulateArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let model = parse_model(&a.model)?;
    let seed = Seed::new(seed.unwrap_or(0), a.stream);
    let sim = simulate(&model, a.n, seed)?;
    match out {
        Some(path) => {
            write_sample_csv(&sim.raw, fs::File::create(path)?)?;
            let meta = SimMeta {
                model: sim.model,
                n: a.n,
                seed,
                margins: sim.margins,
            };
            let mut side = path.as_os_str().to_owned();
            side.push(".meta.json");
            fs::write(side, serde_json::to_string_pretty(&meta)? + "\n")?;
        }
        None => write_sample_csv(&sim.raw, std::io::stdout().lock())?,
    }
    Ok(())
}

fn pseudo_sample(a: &EstimateArgs) -> Result<PseudoSample> {
    let (_, raw) = read_sample_csv(&a.input)?;
    let known = |m: Margin| pit_transform(&raw, &Margins::uniform(m, raw.d()));
    match a.margins {
        MarginsArg::Ranks => rank_transform(&raw),
        MarginsArg::Frechet => known(Margin::UnitFrechet),
        MarginsArg::Uniform => known(Margin::Uniform01),
        MarginsArg::Normal => known(Margin::StdNormal),
        MarginsArg::Meta => {
            let path = a.meta.clone().unwrap_or_else(|| {
                let mut p = a.input.as_os_str().to_owned();
                p.push(".meta.json");
                p.into()
            });
            let meta: SimMeta = serde_json::from_str(&fs::read_to_string(path)?)?;
            pit_transform(&raw, &meta.margins)
        }
    }
}

fn cmd_estimate(a: EstimateArgs, out: Option<&Path>) -> Result<()> {
    let u = pseudo_sample(&a)?;
    let d = u.d();
    let est: Estimate = match a.estimator {
        EstimatorArg::Stdf => stdf_estimate(&u, &a.stdf_x)?,
        EstimatorArg::EpsScaled => {
            let set = extdep::sample::one_based_set(&a.i1, d)?;
            eps_scaled_estimate(&u, &set, a.x)?
        }
        _ => {
            let pair = make_index_pair(&a.i1, &a.i2, d)?;
            match a.estimator {
                EstimatorArg::EpsPair => eps_pair_estimate(&u, &pair)?,
                EstimatorArg::Lambda => lambda_estimate(&u, &pair, a.x, a.y)?,
                _ => l_pair_estimate(&u, &pair, a.x, a.y)?,
            }
        }
    }
    .at_level(a.level)?;
    match a.format {
        Format::Json => emit_json(
            out,
            &json!({
                "estimator": est.estimator.as_str(),
                "value": est.value,
                "std_error": est.std_error,
                "ci": [est.ci_low, est.ci_high],
                "level": est.level,
                "n": est.n,
                "provenance": est.provenance.as_str(),
                "se_method": est.se_method,
                "se_approximate": est.se_approximate,
            }),
        ),
        Format::Tsv => emit(
            out,
            &format!(
                "estimator\tvalue\tstd_error\tci_low\tci_high\tlevel\tn\tprovenance\n{}\t{:.9}\t{:.9}\t{:.9}\t{:.9}\t{}\t{}\t{}\n",
                est.estimator.as_str(),
                est.value,
                est.std_error,
                est.ci_low,
                est.ci_high,
                est.level,
                est.n,
                est.provenance.as_str()
            ),
        ),
    }
}

fn parse_grid(grid: &[String]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|g| {
            let bad = || Error::Config(format!("grid point {g:?} is not `x:y`"));
            let (x, y) = g.split_once(':').ok_or_else(bad)?;
            Ok((
                x.trim().parse().map_err(|_| bad())?,
                y.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn cmd_theory(a: TheoryArgs, out: Option<&Path>) -> Result<()> {
    let model = parse_model(&a.model)?;
    let pair = make_index_pair(&a.i1, &a.i2, model.d())?;
    let f = model.functionals(&pair)?;
    let eta = match &model {
        ModelSpec::Gaussian(g) => Some(gaussian_eta(g, &pair)?),
        ModelSpec::MinFactor(_) => minfactor_eta_and_c(&pair).ok().map(|t| t.eta),
        _ => (f.eps_pair > 0.0).then_some(1.0),
    };
    let grid = parse_grid(&a.grid)?
        .into_iter()
        .map(|(x, y)| {
            if !(x >= 0.0 && y >= 0.0) {
                return Err(Error::OutOfDomain(format!("grid point ({x}, {y})")));
            }
            Ok(json!({ "x": x, "y": y, "l_pair": f.l_pair(x, y), "lambda_u": f.lambda_u(x, y) }))
        })
        .collect::<Result<Vec<_>>>()?;
    emit_json(
        out,
        &json!({
            "pair": pair.label(),
            "max_stable": model.is_max_stable(),
            "eps_i1": f.eps_i1,
            "eps_i2": f.eps_i2,
            "eps_union": f.eps_union,
            "eps_pair": f.eps_pair,
            "eta": eta,
            "grid": grid,
        }),
    )
}

fn cmd_mc(a: McArgs, seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(&a.config)?;
    if let McMode::Survival = a.mode {
        let mut cfg: SurvivalConfig = serde_json::from_str(&text)?;
        if let Some(s) = seed {
            cfg.seed.value = s;
        }
        return emit_json(out, &cfg.run()?);
    }
    let mut cfg: MCConfig = serde_json::from_str(&text)?;
    if let Some(s) = seed {
        cfg.seed.value = s;
    }
    match a.mode {
        McMode::Consistency => emit_json(out, &mc_consistency(&cfg, &a.n_grid)?),
        _ => emit_json(out, &mc_normality(&cfg)?),
    }
}

fn cmd_analyze(a: AnalyzeArgs, out: Option<&Path>) -> Result<()> {
    let groups = match &a.groups {
        Some(p) => GroupConfig::from_json(&fs::read_to_string(p)?)?,
        None => GroupConfig::markets(),
    };
    let series = a
        .input
        .iter()
        .map(load_prices)
        .collect::<Result<Vec<_>>>()?;
    let (prices, dropped) = align(&series)?;
    if dropped > 0 {
        eprintln!("inner join dropped {dropped} dates not common to all inputs");
    }
    let maxima = monthly_block_maxima(&neg_log_returns(&prices)?)?;
    let table = analyze(&maxima, &groups, a.level)?;
    match a.format {
        Format::Tsv => emit(out, &table.to_tsv()),
        Format::Json => emit_json(out, &table),
    }
}
