//! Command-line surface.
//!
//! Exit codes: 0 success, 1 ledger failure, 2 usage or configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use crate::analysis::{audit_trajectory, viscous_convergence, LedgerReport};
use crate::error::{Error, Result};
use crate::integrator::{simulate, SimConfig, Trajectory};
use crate::io::{
    config_echo, parse_config, parse_config_value, read_trajectory, set_key, write_table,
    write_trajectory, RunManifest, TRAJECTORY_FILE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_LEDGER: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Caps the worker threads of `sweep`.
pub const THREADS_ENV: &str = "NONSMOOTH_PLAST_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "nonsmooth-plast",
    version,
    about = "Nonsmooth elastoplastic rheological simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration and write trajectory, events and manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Print the ledger as key=value lines.
        #[arg(long)]
        kv: bool,
    },
    /// Re-verify the ledger of a run directory.
    Audit {
        dir: PathBuf,
        #[arg(long)]
        kv: bool,
    },
    /// Run the grid spanned by the `--set` lists, concurrently.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2,...`; dotted keys reach nested fields. Repeatable.
        #[arg(long = "set", required = true)]
        sets: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plastic-strain deviation from the rate-independent run for each viscosity.
    ViscousStudy {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eta: Vec<f64>,
        /// Directory for `viscous.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Strain, energy, stress and stress/strain series for plotting.
    PlotData {
        #[arg(long, conflicts_with = "config", required_unless_present = "config")]
        run: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate { config, out, kv } => cmd_simulate(&config, &out, kv),
        Command::Audit { dir, kv } => cmd_audit(&dir, kv),
        Command::Sweep { config, sets, out } => cmd_sweep(&config, &sets, &out),
        Command::ViscousStudy { config, eta, out } => cmd_viscous(&config, &eta, out.as_deref()),
        Command::PlotData { run, config, out } => cmd_plot(run.as_deref(), config.as_deref(), &out),
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_config(path: &Path) -> Result<SimConfig> {
    parse_config(&read_text(path)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn exit_for(report: &LedgerReport) -> i32 {
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_LEDGER
    }
}

/// Simulates, audits and writes one run directory.
pub fn run_to_dir(config: &SimConfig, dir: &Path) -> Result<(Trajectory, LedgerReport)> {
    let start = Instant::now();
    let traj = simulate(config)?;
    let report = audit_trajectory(&traj, config);
    let elapsed = start.elapsed().as_secs_f64();
    create_dir(dir)?;
    write_trajectory(&traj, &dir.join(TRAJECTORY_FILE))?;
    RunManifest::new(config_echo(config), elapsed, &report).write(dir)?;
    Ok((traj, report))
}

fn cmd_simulate(config: &Path, out: &Path, kv: bool) -> Result<i32> {
    let config = load_config(config)?;
    let (_, report) = run_to_dir(&config, out)?;
    print!("{}", if kv { report.to_kv() } else { report.to_text() });
    Ok(exit_for(&report))
}

/// Reads a run directory back and audits it against its manifest config.
pub fn audit_dir(dir: &Path) -> Result<LedgerReport> {
    let manifest = RunManifest::read(dir)?;
    let config = parse_config_value(manifest.config)?;
    let traj = read_trajectory(&dir.join(&manifest.artifacts.trajectory))?;
    Ok(audit_trajectory(&traj, &config))
}

fn cmd_audit(dir: &Path, kv: bool) -> Result<i32> {
    let report = audit_dir(dir)?;
    print!("{}", if kv { report.to_kv() } else { report.to_text() });
    Ok(exit_for(&report))
}

fn parse_set(spec: &str) -> Result<(String, Vec<Value>)> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "expected key=v1,v2,..."))?;
    let values: Vec<Value> = values
        .split(',')
        .filter(|v| !v.trim().is_empty())
        .map(|v| {
            serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string()))
        })
        .collect();
    if key.is_empty() || values.is_empty() {
        return Err(Error::config(spec, "expected key=v1,v2,..."));
    }
    Ok((key.to_string(), values))
}

fn sweep_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config(
                THREADS_ENV,
                format!("expected a positive integer, got `{v}`"),
            )),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_sweep(config: &Path, sets: &[String], out: &Path) -> Result<i32> {
    let base: Value = serde_json::from_str(&read_text(config)?).map_err(|e| Error::Parse {
        path: config.to_path_buf(),
        message: e.to_string(),
    })?;
    let axes = sets
        .iter()
        .map(|s| parse_set(s))
        .collect::<Result<Vec<_>>>()?;

    let mut grid: Vec<Vec<Value>> = vec![Vec::new()];
    for (_, values) in &axes {
        grid = grid
            .into_iter()
            .flat_map(|point| {
                values.iter().map(move |v| {
                    let mut p = point.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    // Validate the whole grid before running anything.
    let configs = grid
        .iter()
        .map(|point| {
            let mut doc = base.clone();
            for ((key, _), value) in axes.iter().zip(point) {
                set_key(&mut doc, key, value.clone())?;
            }
            parse_config_value(doc)
        })
        .collect::<Result<Vec<_>>>()?;
    create_dir(out)?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = sweep_threads()? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(THREADS_ENV, e.to_string()))?;
    let results = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                run_to_dir(c, &out.join(format!("run_{i:04}")))
                    .map(|(t, r)| (t.total_dissipation(), r))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut table = String::from("run");
    for (key, _) in &axes {
        let _ = write!(table, ",{key}");
    }
    table.push_str(",n_events,D_total,max_energy_residual,pass\n");
    for (i, (point, (d_total, report))) in grid.iter().zip(&results).enumerate() {
        let _ = write!(table, "run_{i:04}");
        for v in point {
            let _ = write!(table, ",{v}");
        }
        let energy = report
            .max_energy_residual
            .map_or_else(|| "none".to_string(), |r| format!("{r:.16e}"));
        let _ = writeln!(
            table,
            ",{},{d_total:.16e},{energy},{}",
            report.n_events,
            report.passed()
        );
    }
    let path = out.join("sweep.csv");
    std::fs::write(&path, &table).map_err(|e| Error::io(&path, e))?;
    print!("{table}");
    Ok(if results.iter().all(|(_, r)| r.passed()) {
        EXIT_OK
    } else {
        EXIT_LEDGER
    })
}

fn cmd_viscous(config: &Path, etas: &[f64], out: Option<&Path>) -> Result<i32> {
    let config = load_config(config)?;
    let study = viscous_convergence(&config, etas)?;
    let table = study.to_csv_string();
    print!("{table}");
    match study.order {
        Some(order) => println!("# fitted order {order:.6}"),
        None => println!("# fitted order undefined"),
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join("viscous.csv");
        std::fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
    }
    Ok(EXIT_OK)
}

/// Writes the four plotting series for `traj`.
pub fn write_plot_data(traj: &Trajectory, config: &SimConfig, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let s = &traj.samples;
    let sigma_y = |st: &crate::models::MaterialState| {
        let model = &config.model;
        model
            .criterion
            .yield_stress(&model.stress(st))
            .unwrap_or(f64::NAN)
    };
    write_table(
        &dir.join("strain.csv"),
        &["t", "eps", "eps_p"],
        s.iter().map(|x| vec![x.t(), x.state.eps, x.state.eps_p]),
    )?;
    write_table(
        &dir.join("energy.csv"),
        &["t", "E_tot", "D_cum", "E_tot_plus_D_cum"],
        s.iter()
            .map(|x| vec![x.t(), x.e_tot, x.d_cum, x.e_tot + x.d_cum]),
    )?;
    // yield window [β_k − σ_Y + β_i, β_k + σ_Y − β_i]
    write_table(
        &dir.join("stress.csv"),
        &["t", "sigma", "yield_lower", "yield_upper"],
        s.iter().map(|x| {
            let r = sigma_y(&x.state) - x.beta_i;
            vec![x.t(), x.sigma, x.beta_k - r, x.beta_k + r]
        }),
    )?;
    write_table(
        &dir.join("stress_strain.csv"),
        &["eps", "sigma"],
        s.iter().map(|x| vec![x.state.eps, x.sigma]),
    )
}

fn cmd_plot(run: Option<&Path>, config: Option<&Path>, out: &Path) -> Result<i32> {
    let (traj, config) = match (run, config) {
        (Some(dir), _) => {
            let manifest = RunManifest::read(dir)?;
            let config = parse_config_value(manifest.config)?;
            (
                read_trajectory(&dir.join(&manifest.artifacts.trajectory))?,
                config,
            )
        }
        (None, Some(path)) => {
            let config = load_config(path)?;
            (simulate(&config)?, config)
        }
        (None, None) => {
            return Err(Error::config(
                "plot-data",
                "one of --run or --config is required",
            ))
        }
    };
    write_plot_data(&traj, &config, out)?;
    println!(
        "wrote strain.csv, energy.csv, stress.csv, stress_strain.csv to {}",
        out.display()
    );
    Ok(EXIT_OK)
}
