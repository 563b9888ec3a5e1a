//! `offhub`: run short-term cases, the S1-S7 suite, annual designs and the
//! electrolyzer sizing sweep from a flat key-value config.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use offhub_core::config::{Config, ConfigError};
use offhub_core::engine::{
    annual_wind_field, run, run_suite, run_year_on, summary_text, sweep, write_kpi_csv, write_trace_csv,
    EngineError, RunResult,
};
use offhub_core::metrics::{summarize_designs, summarize_designs_csv};
use thiserror::Error;

#[derive(Parser)]
#[command(name = "offhub", version, about = "Offshore wind/hydrogen hub simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Config file (flat `section.key = value` TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one key; repeatable, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Wind seed (short-term) or turbulence seed (year, sweep).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root; results go to `<DIR>/<name>/`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for suite and sweep (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One short-term scenario (`scenario.case`, default S1).
    Run,
    /// S1-S7 with worst-instant contingencies and a peak report.
    Suite,
    /// One design over the annual wind series.
    Year {
        /// initial, design1, design2 or custom (overrides `year.preset`).
        design: Option<String>,
    },
    /// Annual runs with the electrolyzer plant scaled by each factor.
    Sweep {
        /// Comma-separated factors >= 1 (overrides `year.factors`).
        #[arg(long, value_name = "LIST")]
        factors: Option<String>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Engine(#[from] EngineError),
    #[error("writing {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("thread pool: {0}")]
    Pool(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Engine(e) if e.is_invariant_violation() => 3,
            CliError::Engine(EngineError::Config(_) | EngineError::Wind(_) | EngineError::Plant(_) | EngineError::Io(_)) => 2,
            _ => 1,
        }
    }
}

/// Files for one output folder, written only once everything is computed.
struct Bundle {
    name: String,
    files: Vec<(&'static str, Vec<u8>)>,
}

impl Bundle {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, file: &'static str, body: impl Into<Vec<u8>>) {
        self.files.push((file, body.into()));
    }

    fn run_files(r: &RunResult, cfg: &Config, stride: usize) -> Result<Self, CliError> {
        let mut b = Self::new(r.name.clone());
        let mut trace = Vec::new();
        write_trace_csv(&r.trace, stride, &mut trace)?;
        b.add("trace.csv", trace);
        b.add("summary.txt", summary_with_config(r, cfg));
        let mut kpis = Vec::new();
        write_kpi_csv(&[r], &mut kpis)?;
        b.add("kpis.csv", kpis);
        b.add("config.toml", cfg.echo());
        Ok(b)
    }
}

fn summary_with_config(r: &RunResult, cfg: &Config) -> String {
    let mut s = summary_text(r);
    for line in cfg.echo().lines() {
        s.push_str("config.");
        s.push_str(line);
        s.push('\n');
    }
    s
}

/// Write each bundle to a scratch folder and move it into place, so a failed
/// write never leaves a half-filled result folder behind.
fn publish(root: &Path, bundles: &[Bundle]) -> Result<(), CliError> {
    let err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Write { path, source }
    };
    fs::create_dir_all(root).map_err(err(root))?;
    for b in bundles {
        let dest = root.join(&b.name);
        let tmp = root.join(format!(".{}.partial", b.name));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(err(&tmp))?;
        }
        fs::create_dir_all(&tmp).map_err(err(&tmp))?;
        for (file, body) in &b.files {
            let p = tmp.join(file);
            fs::write(&p, body).map_err(err(&p))?;
        }
        if dest.exists() {
            fs::remove_dir_all(&dest).map_err(err(&dest))?;
        }
        fs::rename(&tmp, &dest).map_err(err(&dest))?;
    }
    Ok(())
}

fn load_config(common: &Common, command: &Command) -> Result<Config, ConfigError> {
    let mut sets = common.sets.clone();
    if let Some(seed) = common.seed {
        sets.push(format!("wind.seed={seed}"));
        sets.push(format!("year.seed={seed}"));
    }
    if let Some(out) = &common.out {
        sets.push(format!("output.dir={}", toml_string(&out.display().to_string())));
    }
    match command {
        Command::Year { design: Some(d) } => sets.push(format!("year.preset={}", toml_string(d))),
        Command::Sweep { factors: Some(f) } => sets.push(format!("year.factors=[{f}]")),
        _ => {}
    }
    Config::load(common.config.as_deref(), &sets)
}

fn toml_string(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn cmd_run(cfg: &Config) -> Result<Vec<Bundle>, CliError> {
    let wind = Arc::new(cfg.short_term_wind()?);
    let r = run(&cfg.run_scenario(wind))?;
    print!("{}", summary_text(&r));
    Ok(vec![Bundle::run_files(&r, cfg, cfg.output.trace_stride)?])
}

fn cmd_suite(cfg: &Config) -> Result<Vec<Bundle>, CliError> {
    let wind = Arc::new(cfg.short_term_wind()?);
    let report = run_suite(&cfg.design, &cfg.control, wind)?;
    print!("{}", report.to_text());
    let mut bundles = report
        .results
        .iter()
        .map(|r| Bundle::run_files(r, cfg, cfg.output.trace_stride))
        .collect::<Result<Vec<_>, _>>()?;
    let mut b = Bundle::new("suite");
    b.add("report.txt", report.to_text());
    b.add("report.csv", report.to_csv());
    let mut kpis = Vec::new();
    write_kpi_csv(&report.results.iter().collect::<Vec<_>>(), &mut kpis)?;
    b.add("kpis.csv", kpis);
    b.add("config.toml", cfg.echo());
    bundles.push(b);
    Ok(bundles)
}

fn cmd_year(cfg: &Config) -> Result<Vec<Bundle>, CliError> {
    let design = cfg.year_design();
    design.validate()?;
    let input = cfg.annual_input()?;
    let field = Arc::new(annual_wind_field(&design, &input, cfg.year.dt)?);
    let r = run_year_on(&design, field, &cfg.control, input.seed)?;
    let table = summarize_designs(&[(&r.name, &r.kpis)]);
    print!("{table}");
    let mut b = Bundle::run_files(&r, cfg, cfg.year.trace_stride)?;
    b.add("kpi_table.txt", table);
    Ok(vec![b])
}

fn cmd_sweep(cfg: &Config) -> Result<Vec<Bundle>, CliError> {
    let base = cfg.year_design();
    let input = cfg.annual_input()?;
    let result = sweep(&base, &cfg.year.factors, &input, cfg.year.dt, &cfg.control)?;
    let mut csv = String::from("factor,wind_mw,ely_mw,net_h2_kg\n");
    for p in &result.points {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.factor,
            p.design.wind_mw(),
            p.design.ely_mw(),
            p.net_h2_kg()
        ));
    }
    let crossing = result
        .neutrality_factor
        .map(|f| format!("{f}"))
        .unwrap_or_else(|| "none".into());
    let mut summary = format!("sweep.base = {}\nsweep.neutrality_factor = {crossing}\n", base.name);
    for (i, p) in result.points.iter().enumerate() {
        summary.push_str(&format!(
            "sweep.{i}.factor = {}\nsweep.{i}.wind_mw = {}\nsweep.{i}.ely_mw = {}\nsweep.{i}.net_h2_kg = {}\n",
            p.factor,
            p.design.wind_mw(),
            p.design.ely_mw(),
            p.net_h2_kg()
        ));
    }
    println!("{csv}neutrality factor: {crossing}");
    let named: Vec<(String, _)> = result.points.iter().map(|p| (p.design.name.clone(), &p.kpis)).collect();
    let refs: Vec<(&str, _)> = named.iter().map(|(n, k)| (n.as_str(), *k)).collect();
    let mut b = Bundle::new("sweep");
    b.add("sweep.csv", csv);
    b.add("summary.txt", summary);
    b.add("kpis.csv", summarize_designs_csv(&refs));
    b.add("config.toml", cfg.echo());
    Ok(vec![b])
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(&cli.common, &cli.command)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.common.jobs {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build().map_err(|e| CliError::Pool(e.to_string()))?;
    let bundles = pool.install(|| match &cli.command {
        Command::Run => cmd_run(&cfg),
        Command::Suite => cmd_suite(&cfg),
        Command::Year { .. } => cmd_year(&cfg),
        Command::Sweep { .. } => cmd_sweep(&cfg),
    })?;
    publish(&cfg.output.dir, &bundles)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let balance = CliError::Engine(EngineError::Balance { t: 3.0, residual: 1.0 });
        assert_eq!(balance.exit_code(), 3);
        assert_eq!(CliError::Engine(EngineError::Sweep("x".into())).exit_code(), 3);
        assert_eq!(CliError::Engine(EngineError::Config("x".into())).exit_code(), 2);
        assert_eq!(CliError::Config(ConfigError::Invalid("x".into())).exit_code(), 2);
        let write = CliError::Write {
            path: "x".into(),
            source: io::Error::other("full"),
        };
        assert_eq!(write.exit_code(), 1);
    }
}
