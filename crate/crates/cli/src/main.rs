mod config;
mod output;
mod report;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use undulator_core::{build_and_propagate, fix_c1, stitch_magnet_to_drift, PhysicalParams};

#[derive(Parser)]
#[command(name = "undulator", about = "Wavepacket propagation through a step-field undulator", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate through the lattice and emit the trajectory CSV.
    Simulate { config: PathBuf },
    /// Run the full verification suite and emit the summary JSON.
    Verify { config: PathBuf },
    /// Print the first boundary system, its solution and the compatibility
    /// defects.
    StitchDemo { config: PathBuf },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate { config } => simulate(&config),
        Command::Verify { config } => verify(&config),
        Command::StitchDemo { config } => stitch_demo(&config),
    }
}

fn load(path: &PathBuf) -> Result<config::RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    config::parse_config(&text).map_err(|e| anyhow::anyhow!("{e}"))
}

fn simulate(path: &PathBuf) -> Result<()> {
    let cfg = load(path)?;
    let run = build_and_propagate(&cfg.propagation()?)?;
    let out = output::resolve_output_path(&cfg.trajectory_csv);
    output::write_trajectory_csv(&run, &out)?;
    println!(
        "simulated {} regions, {} samples -> {}",
        run.lattice.regions.len(),
        run.samples.len(),
        out.display()
    );
    Ok(())
}

fn verify(path: &PathBuf) -> Result<()> {
    let cfg = load(path)?;
    let report = report::run_checks(&cfg)?;
    let out = output::resolve_output_path(&cfg.summary_json);
    std::fs::write(&out, report.to_json())?;
    for line in report.lines() {
        println!("{line}");
    }
    println!(
        "overall: {} -> {}",
        if report.overall() { "pass" } else { "FAIL" },
        out.display()
    );
    if let Some(psi_path) = &cfg.psi_density_csv {
        let out = output::resolve_output_path(psi_path);
        output::write_density_csv(&cfg, &out)?;
        println!("wavepacket density -> {}", out.display());
    }
    if !report.overall() {
        std::process::exit(1);
    }
    Ok(())
}

fn stitch_demo(path: &PathBuf) -> Result<()> {
    let cfg = load(path)?;
    let params = PhysicalParams::new(cfg.mass, cfg.charge, cfg.hbar)?;
    let omega = params.cyclotron_frequency(cfg.field, undulator_core::FieldSign::Positive)?;
    let c1 = cfg.c1_scale * fix_c1(&params, omega)?;
    let t1 = undulator_core::magnet_exit_time(omega)?;
    println!("omega = {omega}");
    println!("t1 = {t1}");
    println!("C1 = {c1}  (scale {})", cfg.c1_scale);

    let alpha = undulator_core::Complex64::new(cfg.alpha_entry, 0.0);
    let sol = stitch_magnet_to_drift(alpha, &params, omega, c1)?;
    let sqrt_e = params.charge.sqrt();
    let coord = sqrt_e / (params.mass * c1);
    let mom = params.mass * c1 / sqrt_e;
    println!("\nboundary system  M q = exit means,  q = (Re a, Im a, Re b, Im b):");
    println!("  [ {:+.6} {:+.6} {:+.6} {:+.6} ]", 0.0, -coord, coord, 0.0);
    println!("  [ {:+.6} {:+.6} {:+.6} {:+.6} ]", coord, 0.0, 0.0, -coord);
    println!("  [ {:+.6} {:+.6} {:+.6} {:+.6} ]", mom, 0.0, 0.0, mom);
    println!("  [ {:+.6} {:+.6} {:+.6} {:+.6} ]", 0.0, mom, mom, 0.0);

    println!("\nsolution:");
    println!("  alpha'' = {:+.12} {:+.12}i", sol.alpha_next.re, sol.alpha_next.im);
    println!("  beta''  = {:+.12} {:+.12}i", sol.beta_next.re, sol.beta_next.im);
    println!("  mean residuals (x, y, px, py): {:?}", sol.residuals);
    println!("  compatibility defects: {:?}", sol.compat_defect);
    let alt = undulator_core::stitching::alt_form_row_defects(
        cfg.alpha_entry,
        &sol,
        &params,
        omega,
        c1,
    );
    println!("  alternative published-coefficient row defects: {alt:?}");
    Ok(())
}
