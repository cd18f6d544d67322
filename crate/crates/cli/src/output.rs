//! Trajectory CSV and wavepacket-density output.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use undulator_core::grid::{eval_psi_magnet, GridSpec};
use undulator_core::{
    heisenberg_product, schrodinger_functional, Axis, Complex64, PhysicalParams, PropagationRun,
};

/// Environment variable overriding the directory of relative output paths.
pub const OUTPUT_DIR_ENV: &str = "UNDULATOR_OUT_DIR";

pub fn resolve_output_path(name: &str) -> PathBuf {
    let p = Path::new(name);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(p),
        None => p.to_path_buf(),
    }
}

/// Header shared by every trajectory file.
pub const TRAJECTORY_HEADER: &str = "t,region_index,region_kind,mean_x,mean_y,mean_px,mean_py,\
var_x,var_y,var_px,var_py,cov_xpx,cov_ypy,heis_x,schr_x,heis_y,schr_y";

/// Renders the run as CSV text: full round-trip precision, LF endings,
/// time-ordered rows.
pub fn trajectory_csv(run: &PropagationRun) -> String {
    let mut out = String::with_capacity(64 * (run.samples.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for sample in &run.samples {
        let ms = &sample.state;
        let kind = run.lattice.regions[sample.region].kind.label();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            ms.t,
            sample.region,
            kind,
            ms.mean_x,
            ms.mean_y,
            ms.mean_px,
            ms.mean_py,
            ms.var_x,
            ms.var_y,
            ms.var_px,
            ms.var_py,
            ms.cov_xpx,
            ms.cov_ypy,
            heisenberg_product(ms, Axis::X),
            schrodinger_functional(ms, Axis::X),
            heisenberg_product(ms, Axis::Y),
            schrodinger_functional(ms, Axis::Y),
        ));
    }
    out
}

pub fn write_trajectory_csv(run: &PropagationRun, path: &Path) -> Result<()> {
    std::fs::write(path, trajectory_csv(run))
        .with_context(|| format!("cannot write trajectory CSV to {}", path.display()))
}

/// Writes |psi|^2 of the entry-region state at t = 0 on the configured grid.
pub fn write_density_csv(cfg: &crate::config::RunConfig, path: &Path) -> Result<()> {
    let params = PhysicalParams::new(cfg.mass, cfg.charge, cfg.hbar)?;
    let desc = undulator_core::EpsilonDescriptor::magnet(
        &params,
        cfg.field,
        undulator_core::FieldSign::Positive,
    )?;
    let cs = undulator_core::CoherentStateParams::new(
        Complex64::new(cfg.alpha_entry, 0.0),
        Complex64::new(0.0, 0.0),
        desc,
        0.0,
        0.0,
        undulator_core::DEFAULT_OVERFLOW_BOUND,
    )?;
    let y0 = 2.0 * cfg.alpha_entry * params.charge.sqrt();
    let spec = GridSpec::centered(0.0, y0, cfg.grid_extent, cfg.grid_points)?;
    let field = eval_psi_magnet(&spec, &cs, 0.0, &params)?;
    std::fs::write(path, field.density_csv())
        .with_context(|| format!("cannot write density CSV to {}", path.display()))
}
