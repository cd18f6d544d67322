//! Verification suite behind `undulator verify` and its summary JSON.

use anyhow::Result;
use serde_json::{json, Map, Value};

use undulator_core::grid::{eigenstate_residual, eval_psi_drift, eval_psi_magnet, grid_moments, GridSpec, InvariantKind};
use undulator_core::oracle::{
    drift_covariance, free_flow_covariance, integrate_covariance, integrate_means_lattice,
    magnet_kinetic_covariance,
};
use undulator_core::propagators::magnet_orbit;
use undulator_core::{
    build_and_propagate, heisenberg_product, mean_drift, mean_magnet, schrodinger_functional,
    wronskian, Axis, BoundaryKind, EpsilonDescriptor, FieldSign, PropagationRun, RegionKind,
};

use crate::config::RunConfig;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Default)]
pub struct Report {
    checks: Vec<Check>,
    info: Vec<(&'static str, Value)>,
    lattice: Vec<Value>,
}

impl Report {
    fn push(&mut self, name: &'static str, residual: f64, tolerance: f64) {
        self.checks.push(Check { name, residual, tolerance });
    }

    pub fn overall(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "check {}: {} (residual {:.3e}, tolerance {:.3e})",
                    c.name,
                    if c.pass() { "pass" } else { "FAIL" },
                    c.residual,
                    c.tolerance
                )
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut root = Map::new();
        root.insert("overall".into(), Value::Bool(self.overall()));
        let mut checks = Map::new();
        for c in &self.checks {
            checks.insert(
                c.name.to_string(),
                json!({
                    "residual": c.residual,
                    "tolerance": c.tolerance,
                    "pass": c.pass(),
                }),
            );
        }
        root.insert("checks".into(), Value::Object(checks));
        let mut info = Map::new();
        for (k, v) in &self.info {
            info.insert(k.to_string(), v.clone());
        }
        root.insert("info".into(), Value::Object(info));
        root.insert("lattice".into(), Value::Array(self.lattice.clone()));
        serde_json::to_string_pretty(&Value::Object(root)).expect("json serialization")
    }
}

pub fn run_checks(cfg: &RunConfig) -> Result<Report> {
    let pcfg = cfg.propagation()?;
    let run = build_and_propagate(&pcfg)?;
    let params = run.params;
    let omega = params.cyclotron_frequency(cfg.field, FieldSign::Positive)?;

    let mut report = Report::default();

    // Interface continuity.
    let mean_res = run
        .interfaces
        .iter()
        .map(|r| r.mean_residual)
        .fold(0.0f64, f64::max);
    report.push("mean_continuity", mean_res, cfg.interface_tol);

    let moment_res = run
        .interfaces
        .iter()
        .filter(|r| r.kind == BoundaryKind::MagnetToDrift)
        .map(|r| r.moment_residual)
        .fold(0.0f64, f64::max);
    report.push("second_moment_continuity", moment_res, cfg.interface_tol);

    // Re-entry boundaries restart the moments at the magnet constants; the
    // observed jump must equal the accumulated drift spreading.
    let spreading_defect = run
        .interfaces
        .iter()
        .filter(|r| r.kind == BoundaryKind::DriftToMagnet)
        .map(|r| (r.moment_residual - r.analytic_moment_jump).abs())
        .fold(0.0f64, f64::max);
    report.push("drift_spreading_jump", spreading_defect, cfg.interface_tol);

    // Uncertainty functionals over every sample.
    let bound = params.hbar * params.hbar / 4.0;
    let mut schr_defect = 0.0f64;
    let mut heis_min = f64::INFINITY;
    for s in &run.samples {
        for axis in [Axis::X, Axis::Y] {
            schr_defect = schr_defect.max((schrodinger_functional(&s.state, axis) - bound).abs());
            heis_min = heis_min.min(heisenberg_product(&s.state, axis));
        }
    }
    report.push("schrodinger_minimization", schr_defect, cfg.uncertainty_tol);
    report.push(
        "heisenberg_bound",
        (bound - heis_min).max(0.0),
        cfg.uncertainty_tol,
    );

    // First-boundary compatibility relations.
    let sol = undulator_core::stitch_magnet_to_drift(
        undulator_core::Complex64::new(cfg.alpha_entry, 0.0),
        &params,
        omega,
        run.c1,
    )?;
    report.push(
        "compatibility_relations",
        sol.compat_defect[0].max(sol.compat_defect[1]),
        cfg.interface_tol,
    );

    // Oscillator-solution conservation law at deterministic sample times.
    let magnet_desc = EpsilonDescriptor::magnet(&params, cfg.field, FieldSign::Positive)?;
    let drift_desc = EpsilonDescriptor::drift(run.c1, 0.0, &params)?;
    let expected = 2.0 * params.charge / params.mass;
    let mut wronskian_defect = 0.0f64;
    for k in 0..100 {
        let t = 10.0 / omega.abs() * (k as f64 + 0.31) / 100.0;
        for desc in [magnet_desc, drift_desc] {
            let w = wronskian(desc.eval(t, &params), desc.eval_dot(t, &params));
            wronskian_defect = wronskian_defect
                .max((w - undulator_core::Complex64::new(0.0, expected)).norm());
        }
    }
    report.push("wronskian", wronskian_defect, 1e-12 * expected);

    geometry_checks(&mut report, &run, cfg)?;

    if cfg.oracle_check {
        oracle_checks(&mut report, &run, cfg)?;
    }
    if cfg.grid_check {
        grid_checks(&mut report, &run, cfg, omega)?;
    }

    for (i, region) in run.lattice.regions.iter().enumerate() {
        report.lattice.push(json!({
            "index": i,
            "kind": region.kind.label(),
            "duration": region.duration,
            "duration_rule": run.lattice.duration_rules[i].label(),
        }));
    }
    report.info.push(("c1", json!(run.c1)));
    report.info.push(("c1_fixed", json!(run.c1_fixed)));
    report.info.push(("y0", json!(run.y0)));
    report.info.push((
        "drift_cov_sign",
        json!("per-axis closed form reports cov with the opposite sign of the spreading flow; magnitudes agree"),
    ));
    Ok(report)
}

fn geometry_checks(report: &mut Report, run: &PropagationRun, cfg: &RunConfig) -> Result<()> {
    // Height of the first boundary: half the initial offset.
    let exit0 = run.exit_means(0)?;
    report.push(
        "first_boundary_half_height",
        (exit0.y - run.y0 / 2.0).abs(),
        1e-12,
    );

    // Magnet samples stay on their circles.
    let mut circle_defect = 0.0f64;
    for s in &run.samples {
        if !run.lattice.regions[s.region].kind.is_magnet() {
            continue;
        }
        let rs = run.region_state(s.region)?;
        let orbit = magnet_orbit(&rs)?;
        let d2 = (s.state.mean_y - orbit.center_y).powi(2)
            + (s.state.mean_x - orbit.center_x).powi(2);
        circle_defect = circle_defect.max((d2 - orbit.radius.powi(2)).abs() / orbit.radius.powi(2));
    }
    report.push("orbit_circle", circle_defect, 1e-12);

    // Arc extrema: every positive-field magnet peaks at the same height and
    // every reversed one bottoms out at the same depth; their midline equals
    // the analytic value for the configured gap length.
    let mut peaks: Vec<f64> = Vec::new();
    let mut troughs: Vec<f64> = Vec::new();
    for (i, region) in run.lattice.regions.iter().enumerate() {
        let RegionKind::Magnet { sign, .. } = region.kind else { continue };
        let rs = run.region_state(i)?;
        let orbit = magnet_orbit(&rs)?;
        match sign {
            FieldSign::Positive => peaks.push(orbit.center_y + orbit.radius),
            FieldSign::Negative => troughs.push(orbit.center_y - orbit.radius),
        }
    }
    let spread = |vals: &[f64]| {
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    report.push("extrema_periodicity", spread(&peaks).max(spread(&troughs)), cfg.oracle_tol);

    let params = run.params;
    let omega = params.cyclotron_frequency(cfg.field, FieldSign::Positive)?;
    let drift_len = cfg
        .drift_duration
        .unwrap_or(undulator_core::magnet_exit_time(omega)?);
    let speed = run.y0 * omega.abs();
    let sag = 0.5 * 3.0f64.sqrt() * speed * drift_len;
    let midline = (peaks[0] + troughs[0]) / 2.0;
    let analytic_midline = (run.y0 - sag) / 2.0;
    report.push("extrema_midline", (midline - analytic_midline).abs(), cfg.oracle_tol);
    report
        .info
        .push(("midline_offset_from_half_y0", json!(midline - run.y0 / 2.0)));
    Ok(())
}

fn oracle_checks(report: &mut Report, run: &PropagationRun, cfg: &RunConfig) -> Result<()> {
    let params = run.params;

    // Means across the whole lattice against the closed forms.
    let init = run.samples[0].state.means();
    let series = integrate_means_lattice(init, &run.lattice, &params, cfg.oracle_dt)?;
    let mut max_err = 0.0f64;
    for (t, means) in &series {
        // Locate the region this time belongs to (boundaries go to the
        // earlier region; means are continuous there).
        let k = run
            .lattice
            .entry_times
            .partition_point(|entry| entry <= t)
            .saturating_sub(1);
        let rs = run.region_state(k)?;
        let closed = match run.lattice.regions[k].kind {
            RegionKind::Magnet { .. } => mean_magnet(&rs, *t),
            RegionKind::Drift => mean_drift(&rs, *t),
        };
        if let Ok(closed) = closed {
            max_err = max_err.max(closed.max_abs_diff(means));
        }
    }
    report.push("oracle_mean_flow", max_err, cfg.oracle_tol);

    // Covariance flow in the first drift against the exact free flow.
    if let Some((k, region)) = run
        .lattice
        .regions
        .iter()
        .enumerate()
        .find(|(_, r)| !r.kind.is_magnet())
    {
        let _ = k;
        let sigma0 = drift_covariance(&params, run.c1, 0.0);
        let series = integrate_covariance(sigma0, region, &params, cfg.oracle_dt)?;
        let mut err = 0.0f64;
        for (tau, sigma) in &series {
            let exact = free_flow_covariance(&sigma0, params.mass, *tau);
            err = err.max((sigma - exact).abs().max());
        }
        report.push("oracle_drift_covariance", err, cfg.oracle_tol);
    }

    // Covariance constancy across a full magnet arc.
    if let Some(region) = run
        .lattice
        .regions
        .iter()
        .find(|r| matches!(r.kind, RegionKind::Magnet { .. } if r.index > 0))
    {
        let RegionKind::Magnet { field, sign } = region.kind else { unreachable!() };
        let omega = params.cyclotron_frequency(field, sign)?;
        let sigma0 = magnet_kinetic_covariance(&params, omega);
        let series = integrate_covariance(sigma0, region, &params, cfg.oracle_dt)?;
        let mut err = 0.0f64;
        for (_, sigma) in &series {
            err = err.max((sigma - sigma0).abs().max());
        }
        report.push("oracle_magnet_covariance_constancy", err, cfg.oracle_tol);
    }
    Ok(())
}

fn grid_checks(report: &mut Report, run: &PropagationRun, cfg: &RunConfig, omega: f64) -> Result<()> {
    let params = run.params;

    // Entry-region state.
    let cs = run.states[0];
    let spec = GridSpec::centered(0.0, run.y0, cfg.grid_extent, cfg.grid_points)?;
    let field = eval_psi_magnet(&spec, &cs, 0.0, &params)?;
    report.push("grid_norm_magnet", (field.norm_estimate - 1.0).abs(), 1e-6);
    let res_a = eigenstate_residual(&field, InvariantKind::A, &cs, 0.0, &params)?;
    let res_b = eigenstate_residual(&field, InvariantKind::B, &cs, 0.0, &params)?;
    report.push("grid_eigen_magnet", res_a.max(res_b), 1e-3);
    let ms = grid_moments(&field, &params)?;
    let closed = run.samples[0].state.clone();
    let magnet_defect = [
        ms.mean_x - closed.mean_x,
        ms.mean_y - closed.mean_y,
        ms.var_x - closed.var_x,
        ms.var_px - closed.var_px,
        ms.cov_xpx - closed.cov_xpx,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));
    report.push("grid_moments_magnet", magnet_defect, 1e-3);

    // First drift state at its entry.
    if let Some((k, _)) = run
        .lattice
        .regions
        .iter()
        .enumerate()
        .find(|(_, r)| !r.kind.is_magnet())
    {
        let cs = run.states[k];
        let rs = run.region_state(k)?;
        let entry_t = run.lattice.entry_times[k];
        let entry = mean_drift(&rs, entry_t)?;
        let spec = GridSpec::centered(entry.x, entry.y, cfg.grid_extent, cfg.grid_points)?;
        let field = eval_psi_drift(&spec, &cs, entry_t, &params)?;
        report.push("grid_norm_drift", (field.norm_estimate - 1.0).abs(), 1e-6);
        let res_a = eigenstate_residual(&field, InvariantKind::A, &cs, entry_t, &params)?;
        let res_b = eigenstate_residual(&field, InvariantKind::B, &cs, entry_t, &params)?;
        report.push("grid_eigen_drift", res_a.max(res_b), 1e-3);
        let ms = grid_moments(&field, &params)?;
        let sm = undulator_core::moments_drift(&rs, entry_t)?;
        let drift_defect = [
            ms.mean_x - entry.x,
            ms.mean_y - entry.y,
            ms.mean_px - entry.px,
            ms.mean_py - entry.py,
            ms.var_x - sm.var_x,
            ms.var_px - sm.var_px,
            ms.cov_xpx - sm.cov_xpx,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));
        report.push("grid_moments_drift", drift_defect, 1e-3);
    }
    let _ = omega;
    Ok(())
}
