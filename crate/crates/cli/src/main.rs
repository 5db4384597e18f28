//! `sqpc`: transport and electrostatics runs for split-gate hybrid quantum
//! point contacts.
//!
//! Subcommands: `params` (derived 2DEG quantities), `band` (self-consistent
//! band profile), `trace` (gate sweep), `map` (field-gate map with per-field
//! plateau metrics), `analyze` (plateau metrics of a trace CSV). Every run
//! writes a run record with a checksum manifest of its outputs.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use sqpc_core::config::{parse_config, SimulationConfig};
use sqpc_core::material::{derive_2deg_parameters, estimate_mode_count, DeviceGeometry};
use sqpc_core::sweep::{field_gate_map, gate_sweep, plateau_report, Model};
use sqpc_core::{band, io};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "sqpc", version, about = "Split-gate SQPC simulator and analysis toolkit")]
struct Cli {
    /// Config file (TOML); built-in defaults describe table device 5.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Table device index 1-8 (overrides the config).
    #[arg(long, global = true)]
    device: Option<usize>,
    /// Pair potential of the contacts in meV (0 = normal QPC).
    #[arg(long, global = true)]
    delta0: Option<f64>,
    /// Effective critical field in T.
    #[arg(long, global = true)]
    bc: Option<f64>,
    /// Transport model: analytic | bdg | series.
    #[arg(long, global = true)]
    model: Option<String>,
    /// Interface barrier strength Z.
    #[arg(long, global = true)]
    z: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived 2DEG quantities.
    Params,
    /// Solve the self-consistent band profile of the wafer.
    Band,
    /// Run a gate sweep and extract plateau metrics.
    Trace {
        /// Magnetic field of the sweep (T).
        #[arg(long, default_value_t = 0.0)]
        b: f64,
    },
    /// Run a field-gate conductance map with per-field plateau metrics.
    Map,
    /// Extract plateau metrics from a trace CSV.
    Analyze { file: PathBuf },
}

#[derive(Serialize)]
struct OutputEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunRecord<'a> {
    tool_version: &'static str,
    timestamp_utc: String,
    command: String,
    config: &'a SimulationConfig,
    outputs: Vec<OutputEntry>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn write_run_record(
    out_dir: &Path,
    command: &str,
    config: &SimulationConfig,
    outputs: &[PathBuf],
) -> Result<()> {
    let entries: Result<Vec<OutputEntry>> = outputs
        .iter()
        .map(|p| {
            Ok(OutputEntry {
                path: p.display().to_string(),
                sha256: sha256_file(p)?,
            })
        })
        .collect();
    let record = RunRecord {
        tool_version: env!("CARGO_PKG_VERSION"),
        timestamp_utc: chrono::Utc::now().to_rfc3339(),
        command: command.to_string(),
        config,
        outputs: entries?,
    };
    let path = out_dir.join("run_record.json");
    std::fs::write(&path, serde_json::to_string_pretty(&record)?)?;
    Ok(())
}

fn resolve_config(cli: &Cli) -> Result<SimulationConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path).with_context(|| format!("loading {}", path.display()))?,
        None => SimulationConfig::default(),
    };
    if let Some(idx) = cli.device {
        let z = cfg.device.z;
        let interfaces = cfg.device.interfaces;
        cfg.device = DeviceGeometry::table_device(idx)?;
        cfg.device.z = z;
        cfg.device.interfaces = interfaces;
        cfg.device_index = Some(idx);
    }
    if let Some(d) = cli.delta0 {
        cfg.delta_0 = d;
    }
    if let Some(b) = cli.bc {
        cfg.b_c = b;
    }
    if let Some(z) = cli.z {
        cfg.device.z = z;
    }
    if let Some(model) = &cli.model {
        cfg.model = match model.as_str() {
            "analytic" => Model::Analytic,
            "bdg" => Model::Bdg,
            "series" => Model::Series,
            other => anyhow::bail!("unknown model {other:?} (expected analytic|bdg|series)"),
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Ok(threads) = std::env::var("SQPC_THREADS") {
        let n: usize = threads.parse().context("SQPC_THREADS must be an integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    let cfg = resolve_config(cli)?;
    let out_dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    match &cli.command {
        Command::Params => {
            let d = derive_2deg_parameters(cfg.n_s, cfg.m_eff, cfg.delta_0.max(1e-6))?;
            println!("n_s      = {:.3e} m^-2 ({:.3e} cm^-2)", d.n_s, d.n_s * 1e-4);
            println!("m*       = {} m_e", cfg.m_eff);
            if let Some(mu) = cfg.mobility {
                println!("mu_e     = {mu:.3e} cm^2/Vs (provenance only)");
            }
            println!("k_F      = {:.4e} m^-1", d.k_f);
            println!("lambda_F = {:.1} nm", d.lambda_f);
            println!("v_F      = {:.3e} m/s", d.v_f);
            println!("E_F      = {:.1} meV", d.e_f);
            println!("xi_0     = {:.1} nm (Delta_0 = {} meV)", d.xi_0, cfg.delta_0);
            let modes = estimate_mode_count(cfg.device.w_c_nm, d.lambda_f)?;
            println!("constriction modes (2 W_c / lambda_F) ~ {modes}");
        }
        Command::Band => {
            std::fs::create_dir_all(&out_dir)?;
            let result = band::self_consistent_band(&cfg.wafer, cfg.temperature, 0.3, 1e-6)?;
            let edge_path = out_dir.join("band_edge.csv");
            let density_path = out_dir.join("band_density.csv");
            let summary_path = out_dir.join("band_summary.json");
            std::fs::write(&edge_path, io::band_edge_csv(&result.band))?;
            std::fs::write(&density_path, io::band_density_csv(&result.band))?;
            std::fs::write(&summary_path, io::band_summary_json(&result.band))?;
            println!(
                "converged in {} iterations: n_s = {:.3e} cm^-2",
                result.iterations,
                result.band.sheet_density * 1e-4
            );
            write_run_record(
                &out_dir,
                "band",
                &cfg,
                &[edge_path, density_path, summary_path],
            )?;
        }
        Command::Trace { b } => {
            std::fs::create_dir_all(&out_dir)?;
            let trace = gate_sweep(&cfg, cfg.model, *b, &cfg.gate_range)?;
            let report = plateau_report(&trace, &cfg.analysis)?;
            let trace_path = out_dir.join("trace.csv");
            let report_path = out_dir.join("report.json");
            io::write_trace(&trace, &trace_path)?;
            io::write_report(&report, &report_path)?;
            println!(
                "{} points, {} plateaus, H1 = {:?}",
                trace.v_g.len(),
                report.plateaus.len(),
                report.h1
            );
            write_run_record(&out_dir, "trace", &cfg, &[trace_path, report_path])?;
        }
        Command::Map => {
            std::fs::create_dir_all(&out_dir)?;
            let map = field_gate_map(&cfg, cfg.model, &cfg.field_range, &cfg.gate_range)?;
            let map_path = out_dir.join("map.csv");
            io::write_map(&map, &map_path)?;
            // per-field metrics, the Fig. 5(b)-(d) style analysis
            let metrics_path = out_dir.join("map_metrics.csv");
            let mut text = String::from("B[T],V_p1[V],V_p2[V],H1[2e^2/h],H2[2e^2/h],G_off[2e^2/h]\n");
            let fmt = |x: Option<f64>| x.map_or("".to_string(), |v| format!("{v}"));
            for trace in &map.traces {
                let report = plateau_report(trace, &cfg.analysis)?;
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    trace.b,
                    fmt(report.v_p1),
                    fmt(report.v_p2),
                    fmt(report.h1),
                    fmt(report.h2),
                    fmt(report.g_off),
                ));
            }
            std::fs::write(&metrics_path, text)?;
            println!("{} field values x {} gate points", map.b.len(), map.traces[0].v_g.len());
            write_run_record(&out_dir, "map", &cfg, &[map_path, metrics_path])?;
        }
        Command::Analyze { file } => {
            let trace = io::read_trace(file)?;
            let report = plateau_report(&trace, &cfg.analysis)?;
            println!("{}", io::report_to_json(&report));
            if cli.out.is_some() {
                std::fs::create_dir_all(&out_dir)?;
                let report_path = out_dir.join("report.json");
                io::write_report(&report, &report_path)?;
                write_run_record(&out_dir, "analyze", &cfg, &[report_path])?;
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
        std::process::exit(1);
    }
}
