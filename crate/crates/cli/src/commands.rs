//! Command-line parsing and subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use sdemem::diagnostics::{chain_summary, gelman_rubin_chains, posterior_predictive_draws};
use sdemem::exec::{try_map_indexed, Execution};
use sdemem::model::simulate_dataset;
use sdemem::pmm::Chain;
use sdemem::rng::keys;
use sdemem::{ModelKind, Stream};

use crate::chainio::{read_chain_csv, write_chain_csv};
use crate::config::{Method, RunConfig, Settings};
use crate::data::{parse_dataset_csv, write_dataset_csv};
use crate::error::{CliError, CliResult};
use crate::study::{fit, run_study, write_study_csv};

#[derive(Debug, Parser)]
#[command(name = "sdemem", version, about = "Bayesian inference for SDE mixed-effects tumor growth models")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `mcmc.burnin` in the config.
    #[arg(long)]
    pub burnin: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a dataset from the `[truth]` parameters on the configured design.
    Simulate {
        #[command(flatten)]
        common: Common,
    },
    /// Pseudo-marginal MCMC with particle-filter likelihoods.
    FitPmm(FitArgs),
    /// MCMC with the synthetic likelihood.
    FitBsl(FitArgs),
    /// Scale reduction factors and posterior summaries of chain files.
    Diagnose {
        #[arg(long, num_args = 1.., required = true)]
        chains: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Draws discarded from each chain (default: the first half).
        #[arg(long)]
        burnin: Option<usize>,
    },
    /// Posterior predictive summary statistics.
    Ppc {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated simulate-then-fit cycles with bias and RMSE.
    SimStudy {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        replicates: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub common: Common,
    /// Independent chains; with more than one, chain k is written to
    /// `<out stem>_<k>.<ext>`.
    #[arg(long)]
    pub chains: Option<usize>,
}

fn load(common: &Common) -> CliResult<(Settings, Stream)> {
    let mut settings = RunConfig::load(&common.config)?.resolve()?;
    if let Some(b) = common.burnin {
        settings.mcmc.burnin = b;
    }
    let seed = common
        .seed
        .or(settings.seed)
        .ok_or_else(|| CliError::Usage("no seed: set `seed` in the config or pass --seed".into()))?;
    settings.seed = Some(seed);
    Ok((settings, Stream::new(seed)))
}

/// Output path of chain `k` (0-based) among `n`.
pub fn chain_path(out: &Path, k: usize, n: usize) -> PathBuf {
    if n == 1 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{}.{}", k + 1, ext.to_string_lossy()),
        None => format!("{stem}_{}", k + 1),
    };
    out.with_file_name(name)
}

fn cmd_simulate(common: &Common) -> CliResult<String> {
    let (s, root) = load(common)?;
    let truth = s.truth.ok_or_else(|| CliError::Usage("simulate needs a [truth] table".into()))?;
    let design = s.design.as_ref().ok_or_else(|| CliError::Usage("simulate needs a [design] section".into()))?;
    let ds = simulate_dataset(&truth, design, root.child(keys::DATASET))?;
    write_dataset_csv(&common.out, &ds, s.days_per_time_unit)?;
    Ok(format!("wrote {} subjects to {}", ds.len(), common.out.display()))
}

fn cmd_fit(args: &FitArgs, method: Method) -> CliResult<String> {
    let (s, root) = load(&args.common)?;
    s.mcmc.validate()?;
    let ds = parse_dataset_csv(&args.data, s.days_per_time_unit)?;
    let n = args.chains.unwrap_or(s.chains);
    if n == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let chains: Vec<Chain> =
        try_map_indexed(Execution::Parallel, n, |k| fit(&s, &ds, method, root.path(&[keys::CHAIN, k as u64])))?;
    let mut msg = Vec::new();
    for (k, c) in chains.iter().enumerate() {
        let path = chain_path(&args.common.out, k, n);
        write_chain_csv(&path, c, s.kind)?;
        msg.push(format!("{} (acceptance {:.3})", path.display(), c.acceptance_rate));
    }
    Ok(format!("wrote {}", msg.join(", ")))
}

fn cmd_diagnose(paths: &[PathBuf], out: &Path, burnin: Option<usize>) -> CliResult<String> {
    let mut kind: Option<ModelKind> = None;
    let mut chains = Vec::new();
    for p in paths {
        let (k, c) = read_chain_csv(p)?;
        if kind.is_some_and(|x| x != k) {
            return Err(CliError::Data(format!("{}: chains are from different models", p.display())));
        }
        kind = Some(k);
        chains.push(c);
    }
    let kind = kind.expect("at least one chain");
    let len = chains[0].len();
    if chains.iter().any(|c| c.len() != len) {
        return Err(CliError::Data("chains have different lengths".into()));
    }
    let burnin = burnin.unwrap_or(len / 2);
    if burnin >= len {
        return Err(CliError::Usage(format!("burnin {burnin} leaves no draws of {len}")));
    }
    let rhat = if chains.len() >= 2 && len - burnin >= 2 { Some(gelman_rubin_chains(&chains, burnin)?) } else { None };
    let mut pooled_states = Vec::new();
    for c in &chains {
        pooled_states.extend_from_slice(&c.states[burnin..]);
    }
    let pooled = Chain { states: pooled_states, ..chains[0].clone() };
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_path(out).map_err(io)?;
    w.write_record(["scope", "param", "rhat", "mean", "q025", "q975", "acceptance_rate"]).map_err(io)?;
    let mut write = |scope: &str, summary: &sdemem::diagnostics::ChainSummary, rhat: Option<&Vec<f64>>| {
        for (i, p) in summary.params.iter().enumerate() {
            w.write_record([
                scope.to_string(),
                p.param.name().to_string(),
                rhat.map_or(String::new(), |r| r[i].to_string()),
                p.mean.to_string(),
                p.lower.to_string(),
                p.upper.to_string(),
                summary.acceptance_rate.to_string(),
            ])
            .map_err(io)?;
        }
        Ok::<_, CliError>(())
    };
    write("pooled", &chain_summary(&pooled, kind, 0)?, rhat.as_ref())?;
    for (k, c) in chains.iter().enumerate() {
        write(&format!("chain{}", k + 1), &chain_summary(c, kind, burnin)?, None)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    let worst = rhat.as_ref().map(|r| r.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    Ok(match worst {
        Some(r) => format!("max rhat {r:.4}{}", if r < 1.1 { "" } else { " (above 1.1)" }),
        None => "single chain: no rhat".into(),
    })
}

fn cmd_ppc(chain: &Path, data: &Path, common: &Common) -> CliResult<String> {
    let (s, root) = load(common)?;
    let (kind, c) = read_chain_csv(chain)?;
    if kind != s.kind {
        return Err(CliError::Usage(format!("chain is {kind} but the config is {}", s.kind)));
    }
    let ds = parse_dataset_csv(data, s.days_per_time_unit)?;
    let burnin = common.burnin.unwrap_or(s.mcmc.burnin);
    if burnin >= c.len() {
        return Err(CliError::Usage(format!("burnin {burnin} leaves no draws of {}", c.len())));
    }
    let p = posterior_predictive_draws(
        &c,
        &ds,
        kind,
        s.bsl_simulations,
        burnin,
        s.ppc_thin,
        Execution::Parallel,
        root.child(keys::PREDICTIVE),
    )?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut w = csv::Writer::from_path(&common.out).map_err(io)?;
    let d = p.observed.len();
    let mut header = vec!["row".to_string()];
    header.extend((1..=d).map(|j| format!("s{j}")));
    w.write_record(&header).map_err(io)?;
    let mut obs = vec!["observed".to_string()];
    obs.extend(p.observed.iter().map(|v| v.to_string()));
    w.write_record(&obs).map_err(io)?;
    for r in 0..p.draws.nrows() {
        let mut row = vec![(r + 1).to_string()];
        row.extend(p.draws.row(r).iter().map(|v| v.to_string()));
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(format!("wrote {} predictive draws of dimension {d}", p.draws.nrows()))
}

fn cmd_study(common: &Common, replicates: Option<usize>) -> CliResult<String> {
    let (s, root) = load(common)?;
    s.mcmc.validate()?;
    let b = replicates.unwrap_or(s.replicates);
    let result = run_study(&s, b, s.mcmc.burnin, root)?;
    write_study_csv(&common.out, &result)?;
    Ok(format!("wrote {b} replicates to {}", common.out.display()))
}

fn dispatch(command: &Command) -> CliResult<String> {
    match command {
        Command::Simulate { common } => cmd_simulate(common),
        Command::FitPmm(a) => cmd_fit(a, Method::Pmm),
        Command::FitBsl(a) => cmd_fit(a, Method::Bsl),
        Command::Diagnose { chains, out, burnin } => cmd_diagnose(chains, out, *burnin),
        Command::Ppc { chain, data, common } => cmd_ppc(chain, data, common),
        Command::SimStudy { common, replicates } => cmd_study(common, *replicates),
    }
}

/// Runs a parsed command line and returns a one-line status message.
pub fn run(cli: &Cli) -> CliResult<String> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}
