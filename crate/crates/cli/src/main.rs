use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use aon_cli::commands::{cmd_classify, cmd_generate, cmd_overlap, cmd_simulate, cmd_thresholds};
use aon_cli::config::{apply_config, ConfigError, ExperimentConfig, Format};
use aon_cli::output::{sha256_hex, write_run, Artifact};
use aon_cli::verify::{run_suite, Suite};
use aon_core::Family;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aon", version, about = "Threshold landscapes and planted-subgraph simulations")]
struct Cli {
    /// Master seed for simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 means all cores. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output directory (a file for `generate`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format printed to stdout when no --out is given.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Config file of key=value lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Clique,
    Cycle,
    Path,
    Matching,
    Sun,
    CycleOut,
    Cliques,
}

#[derive(Args, Default)]
struct Common {
    /// Pattern: clique:K, cycle:K, path:K, matching:N, sun:K, cycle-out:K, cliques:A,B,.. or file:PATH.
    #[arg(long)]
    pattern: Option<String>,
    /// Host size n (integer, scientific notation allowed).
    #[arg(long)]
    n: Option<String>,
    /// Extra key=value settings, same keys as the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a pattern family member as an edge list.
    Generate {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Clique sizes for `cliques`, comma separated.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// ψ_q, λ_q and α_q over a q grid, with witnesses.
    Thresholds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        q_grid: Option<String>,
        /// Skip the ψ search and report α_q only.
        #[arg(long)]
        alpha_only: bool,
    },
    /// Structural conditions and the all-or-nothing verdict.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Overlap distribution of two uniform copies, plus moment sums over --p-grid.
    Overlap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p_grid: Option<String>,
    },
    /// Monte Carlo MMSE, KL and mutual-information curve.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        p_grid: Option<String>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run a built-in check suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug)]
struct VerificationFailed(usize);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} check(s) failed", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn family(kind: FamilyArg, k: Option<usize>, n: Option<usize>, sizes: Vec<usize>) -> Result<Family, ConfigError> {
    let need = |x: Option<usize>, flag: &str| {
        x.ok_or_else(|| ConfigError {
            line: None,
            message: format!("this family needs {flag}"),
        })
    };
    Ok(match kind {
        FamilyArg::Clique => Family::Clique(need(k, "--k")?),
        FamilyArg::Cycle => Family::Cycle(need(k, "--k")?),
        FamilyArg::Path => Family::Path(need(k, "--k")?),
        FamilyArg::Matching => Family::PerfectMatching(need(n, "--n")?),
        FamilyArg::Sun => Family::Sun(need(k, "--k")?),
        FamilyArg::CycleOut => Family::CycleWithOutEdges(need(k, "--k")?),
        FamilyArg::Cliques => Family::DisjointCliques(sizes),
    })
}

fn build_config(cli: &Cli, common: &Common, extra: &[(&str, Option<String>)]) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
        apply_config(&mut cfg, &text)?;
    }
    for pair in &common.set {
        cfg.set_pair(pair)?;
    }
    let mut flags: Vec<(&str, Option<String>)> = vec![
        ("pattern", common.pattern.clone()),
        ("n", common.n.clone()),
        ("seed", cli.seed.map(|s| s.to_string())),
        ("jobs", cli.jobs.map(|j| j.to_string())),
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
    ];
    flags.extend(extra.iter().cloned());
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(f) = cli.format {
        cfg.format = Some(match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
        });
    }
    Ok(cfg)
}

fn input_hash(command: &str, cfg: &ExperimentConfig) -> String {
    let mut text = format!("{command}\n");
    for (k, v) in &cfg.echo {
        if k != "out" && k != "jobs" {
            text.push_str(&format!("{k}={v}\n"));
        }
    }
    if let Ok(g) = cfg.resolve_pattern() {
        text.push_str(&g.to_edge_list());
    }
    sha256_hex(text.as_bytes())
}

fn emit(command: &str, cfg: &ExperimentConfig, started: Instant, artifacts: Vec<Artifact>) -> anyhow::Result<()> {
    if let Some(dir) = &cfg.out {
        write_run(dir, command, &cfg.echo, input_hash(command, cfg), started.elapsed().as_secs_f64(), &artifacts)?;
        for a in &artifacts {
            eprintln!("wrote {}", dir.join(&a.name).display());
        }
        return Ok(());
    }
    let chosen = match cfg.format {
        Some(f) => artifacts
            .iter()
            .find(|a| a.format == f)
            .ok_or_else(|| ConfigError {
                line: None,
                message: format!("{command} has no {} output", f.extension()),
            })?,
        None => &artifacts[0],
    };
    use std::io::Write;
    std::io::stdout().write_all(&chosen.bytes)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    let jobs = cli.jobs.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| match &cli.command {
        Command::Generate { family: kind, k, n, sizes } => {
            let fam = family(*kind, *k, *n, sizes.clone())?;
            let a = cmd_generate(&fam)?;
            match &cli.out {
                Some(path) => std::fs::write(path, &a[0].bytes)?,
                None => print!("{}", String::from_utf8_lossy(&a[0].bytes)),
            }
            Ok(())
        }
        Command::Thresholds { common, q_grid, alpha_only } => {
            let cfg = build_config(&cli, common, &[("q_grid", q_grid.clone()), ("alpha_only", alpha_only.then(|| "true".into()))])?;
            emit("thresholds", &cfg, started, cmd_thresholds(&cfg)?)
        }
        Command::Classify { common } => {
            let cfg = build_config(&cli, common, &[])?;
            emit("classify", &cfg, started, cmd_classify(&cfg)?)
        }
        Command::Overlap { common, p_grid } => {
            let cfg = build_config(&cli, common, &[("p_grid", p_grid.clone())])?;
            emit("overlap", &cfg, started, cmd_overlap(&cfg)?)
        }
        Command::Simulate { common, p_grid, trials } => {
            let cfg = build_config(&cli, common, &[("p_grid", p_grid.clone()), ("trials", trials.map(|t| t.to_string()))])?;
            emit("simulate", &cfg, started, cmd_simulate(&cfg)?)
        }
        Command::Verify { suite } => {
            let checks = run_suite(*suite)?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            for c in &checks {
                println!("{}", c.line());
            }
            if failed > 0 {
                return Err(VerificationFailed(failed).into());
            }
            Ok(())
        }
    })
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        3
    } else if matches!(e.downcast_ref::<aon_core::Error>(), Some(aon_core::Error::BudgetExceeded(_))) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
