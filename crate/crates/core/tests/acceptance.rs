//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! with its measured residual and pinned tolerance.
//!
//! Two run configurations appear throughout. The `canonical` run keeps the
//! default gap length (one boundary time); the `narrow` run shrinks the gaps
//! to 1e-10 so the step-field idealization's continuity and symmetry claims,
//! which are exact only for vanishing gap length, can be tested at full
//! precision while every stitched interface is still exercised.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use undulator_core::grid::{
    eigenstate_residual, eval_psi_drift, eval_psi_magnet, grid_moments, grid_moments_kinetic,
    GridSpec, InvariantKind,
};
use undulator_core::oracle::{
    free_flow_covariance, integrate_covariance, integrate_means_lattice, magnet_kinetic_covariance,
};
use undulator_core::propagators::magnet_orbit;
use undulator_core::{
    build_and_propagate, fix_c1, magnet_exit_time, mean_drift, mean_magnet, moments_drift,
    schrodinger_functional, stitch_magnet_to_drift, verify_compatibility, wronskian, Axis,
    BoundaryKind, EpsilonDescriptor, FieldSign, PhysicalParams, PropagationConfig, RegionKind,
    RegionSpec,
};

fn report(num: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {num} ({name}): {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn canonical_run(n_periods: usize) -> undulator_core::PropagationRun {
    build_and_propagate(&PropagationConfig::canonical(n_periods)).expect("canonical run")
}

fn narrow_run(n_periods: usize) -> undulator_core::PropagationRun {
    let mut cfg = PropagationConfig::canonical(n_periods);
    cfg.drift_duration = Some(1e-10);
    build_and_propagate(&cfg).expect("narrow-gap run")
}

// Criterion 1: the Schrodinger functional sits at hbar^2/4 on both axes at
// every sample of a 5-period canonical run, within 1e-12, in under a second.
#[test]
fn criterion_1_schrodinger_minimization() {
    let clock = Instant::now();
    let run = canonical_run(5);
    let mut defect = 0.0f64;
    for s in &run.samples {
        for axis in [Axis::X, Axis::Y] {
            defect = defect.max((schrodinger_functional(&s.state, axis) - 0.25).abs());
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    let pass = defect < 1e-12 && elapsed < 1.0;
    report(
        1,
        "schrodinger minimization",
        pass,
        &format!("max |S - 0.25| = {defect:.3e} over {} samples (tol 1e-12), {elapsed:.3} s", run.samples.len()),
    );
    assert!(pass);
}

// Criterion 2: magnet second moments equal hbar/(m omega), m omega hbar / 4
// and zero covariance, exactly constant in time, for three parameter sets.
#[test]
fn criterion_2_magnet_moment_constants() {
    let sets = [
        (1.0, 1.0, 1.0, 1.0),
        (2.0, 1.0, 3.0, 1.0),
        (0.5, 2.0, 1.0, 0.5),
    ];
    let mut worst = 0.0f64;
    for (mass, charge, field, hbar) in sets {
        let params = PhysicalParams::new(mass, charge, hbar).unwrap();
        let mut cfg = PropagationConfig::canonical(1);
        cfg.params = params;
        cfg.field = field;
        let run = build_and_propagate(&cfg).expect("run");
        let omega = charge * field / mass;
        let var_q = hbar / (mass * omega);
        let var_p = mass * omega * hbar / 4.0;
        let mut reference = None;
        for s in &run.samples {
            if !run.lattice.regions[s.region].kind.is_magnet() {
                continue;
            }
            worst = worst.max((s.state.var_x - var_q).abs());
            worst = worst.max((s.state.var_y - var_q).abs());
            worst = worst.max((s.state.var_px - var_p).abs());
            worst = worst.max((s.state.var_py - var_p).abs());
            assert_eq!(s.state.cov_xpx, 0.0);
            assert_eq!(s.state.cov_ypy, 0.0);
            // Constancy is exact: every magnet sample carries the same bits.
            let sm = s.state.second_moments();
            match &reference {
                None => reference = Some(sm),
                Some(r) => assert_eq!(*r, sm),
            }
        }
    }
    let pass = worst < 1e-15;
    report(
        2,
        "magnet moment constants",
        pass,
        &format!("max deviation from closed-form constants = {worst:.3e} (exact expected)"),
    );
    assert!(pass);
}

// Criterion 3: drift coordinate variance is the printed quadratic in local
// time, the covariance the printed linear form, the momentum variance
// constant; residuals below 1e-12.
#[test]
fn criterion_3_drift_moment_profiles() {
    let run = canonical_run(5);
    let drift_idx = run
        .lattice
        .regions
        .iter()
        .position(|r| !r.kind.is_magnet())
        .unwrap();
    let samples: Vec<_> = run
        .samples
        .iter()
        .filter(|s| s.region == drift_idx)
        .collect();
    assert!(samples.len() >= 10);
    let entry_t = run.lattice.entry_times[drift_idx];
    let tau = |i: usize| samples[i].state.t - entry_t;
    let var = |i: usize| samples[i].state.var_x;
    let cov = |i: usize| samples[i].state.cov_xpx;

    // Quadratic reconstruction from three spread samples predicts a fourth.
    let (i0, i1, i2, i3) = (0usize, 16usize, 33usize, samples.len() - 1);
    let (t0, t1, t2, t3) = (tau(i0), tau(i1), tau(i2), tau(i3));
    let l0 = (t3 - t1) * (t3 - t2) / ((t0 - t1) * (t0 - t2));
    let l1 = (t3 - t0) * (t3 - t2) / ((t1 - t0) * (t1 - t2));
    let l2 = (t3 - t0) * (t3 - t1) / ((t2 - t0) * (t2 - t1));
    let var_defect = (var(i0) * l0 + var(i1) * l1 + var(i2) * l2 - var(i3)).abs();

    // The reconstructed coefficients match the printed profile.
    let p = run.params;
    let c1 = run.c1;
    let quad_coeff = p.hbar * c1 * c1 / (2.0 * p.charge);
    let const_coeff = p.hbar * p.charge / (2.0 * p.mass * p.mass * c1 * c1);
    let coeff_defect = (var(i0) - const_coeff)
        .abs()
        .max((var(i3) - (const_coeff + quad_coeff * t3 * t3)).abs());

    // Covariance is linear with the printed slope; momentum variance frozen.
    let slope = p.hbar * p.mass * c1 * c1 / (2.0 * p.charge);
    let cov_defect = (cov(i1) - (cov(i0) - slope * (t1 - t0)))
        .abs()
        .max((cov(i3) - (cov(i0) - slope * (t3 - t0))).abs());
    let mut var_p_defect = 0.0f64;
    for s in &samples {
        var_p_defect = var_p_defect.max((s.state.var_px - samples[0].state.var_px).abs());
    }

    let worst = var_defect.max(coeff_defect).max(cov_defect).max(var_p_defect);
    let pass = worst < 1e-12;
    report(
        3,
        "drift moment profiles",
        pass,
        &format!(
            "quadratic fit {var_defect:.3e}, coefficients {coeff_defect:.3e}, covariance {cov_defect:.3e}, var_p {var_p_defect:.3e} (tol 1e-12)"
        ),
    );
    assert!(pass);
}

// Criterion 4: with the fixed C1 every interface of the narrow-gap run is
// continuous in means and per-axis second moments below 1e-10; a C1 scaled
// by 1.1 keeps the means continuous but opens the analytic variance jump.
#[test]
fn criterion_4_interface_continuity() {
    let run = narrow_run(5);
    let mut mean_res = 0.0f64;
    let mut moment_res = 0.0f64;
    for rec in &run.interfaces {
        mean_res = mean_res.max(rec.mean_residual);
        moment_res = moment_res.max(rec.moment_residual);
    }

    // Canonical gap length: magnet-to-drift boundaries stay continuous; the
    // re-entry jump equals the accumulated drift spreading.
    let full = canonical_run(5);
    let mut md_res = 0.0f64;
    let mut spreading_defect = 0.0f64;
    for rec in &full.interfaces {
        match rec.kind {
            BoundaryKind::MagnetToDrift => md_res = md_res.max(rec.moment_residual),
            BoundaryKind::DriftToMagnet => {
                spreading_defect =
                    spreading_defect.max((rec.moment_residual - rec.analytic_moment_jump).abs())
            }
        }
        mean_res = mean_res.max(rec.mean_residual);
    }

    // Negative control: scaling C1 leaves means continuous and produces the
    // analytic variance jump e/(2 m^2) (1/C1^2 - 1/C1_fixed^2) at the first
    // boundary.
    let mut cfg = PropagationConfig::canonical(1);
    cfg.c1_scale = 1.1;
    let control = build_and_propagate(&cfg).expect("control run");
    let p = control.params;
    let expected_jump = (p.hbar * p.charge / (2.0 * p.mass * p.mass)
        * (1.0 / (control.c1 * control.c1) - 1.0 / (control.c1_fixed * control.c1_fixed)))
        .abs();
    let first = control
        .interfaces
        .iter()
        .find(|r| r.kind == BoundaryKind::MagnetToDrift)
        .unwrap();
    let control_mean_res = control
        .interfaces
        .iter()
        .map(|r| r.mean_residual)
        .fold(0.0f64, f64::max);
    let control_defect = (first.moment_residual - expected_jump).abs();

    let pass = mean_res < 1e-10
        && moment_res < 1e-10
        && md_res < 1e-10
        && spreading_defect < 1e-10
        && control_mean_res < 1e-10
        && control_defect < 1e-10;
    report(
        4,
        "interface continuity",
        pass,
        &format!(
            "narrow-gap jumps: means {mean_res:.3e}, moments {moment_res:.3e}; canonical magnet-to-drift {md_res:.3e}, re-entry vs analytic {spreading_defect:.3e}; control jump defect {control_defect:.3e} (tol 1e-10)"
        ),
    );
    assert!(pass);
}

// Criterion 5: the solved boundary eigenvalues satisfy both compatibility
// relations below 1e-10 for 20 random entry eigenvalues in (0, 2].
#[test]
fn criterion_5_compatibility_relations() {
    let p = PhysicalParams::natural();
    let omega = 1.0;
    let c1 = fix_c1(&p, omega).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let alpha = rng.gen_range(f64::EPSILON..=2.0);
        let sol = stitch_magnet_to_drift(Complex64::new(alpha, 0.0), &p, omega, c1).unwrap();
        let defects = verify_compatibility(&sol, &p, omega, c1);
        worst = worst.max(defects[0]).max(defects[1]);
        // Scaling the input scales the solution (homogeneous linear system).
        let doubled = stitch_magnet_to_drift(Complex64::new(2.0 * alpha, 0.0), &p, omega, c1).unwrap();
        assert!((doubled.alpha_next - 2.0 * sol.alpha_next).norm() < 1e-12);
        assert!((doubled.beta_next - 2.0 * sol.beta_next).norm() < 1e-12);
    }
    let pass = worst < 1e-10;
    report(
        5,
        "boundary compatibility relations",
        pass,
        &format!("max defect over 20 random entry eigenvalues = {worst:.3e} (tol 1e-10)"),
    );
    assert!(pass);
}

// Criterion 6: the classical-flow integrator reproduces the closed-form
// means over 5 periods below 1e-8; the covariance flow seeded with
// grid-extracted matrices reproduces the exact linear flow below 1e-8 in the
// drift and stays constant in the magnet; everything inside 30 s.
#[test]
fn criterion_6_oracle_equivalence() {
    let clock = Instant::now();
    let run = canonical_run(5);
    let p = run.params;
    let dt = 1e-3;

    // Means across the whole lattice.
    let series = integrate_means_lattice(run.samples[0].state.means(), &run.lattice, &p, dt)
        .expect("mean flow");
    let mut mean_err = 0.0f64;
    for (t, means) in &series {
        let k = run
            .lattice
            .entry_times
            .partition_point(|entry| entry <= t)
            .saturating_sub(1);
        let rs = run.region_state(k).unwrap();
        let closed = match run.lattice.regions[k].kind {
            RegionKind::Magnet { .. } => mean_magnet(&rs, *t),
            RegionKind::Drift => mean_drift(&rs, *t),
        };
        if let Ok(closed) = closed {
            mean_err = mean_err.max(closed.max_abs_diff(means));
        }
    }

    // Drift covariance seeded from the wavefunction grid.
    let drift_idx = run
        .lattice
        .regions
        .iter()
        .position(|r| !r.kind.is_magnet())
        .unwrap();
    let drift_cs = run.states[drift_idx];
    let entry_t = run.lattice.entry_times[drift_idx];
    let rs = run.region_state(drift_idx).unwrap();
    let entry = mean_drift(&rs, entry_t).unwrap();
    let spec = GridSpec::centered(entry.x, entry.y, 8.0, 192).unwrap();
    let field = eval_psi_drift(&spec, &drift_cs, entry_t, &p).unwrap();
    let sigma0 = grid_moments(&field, &p).unwrap().full_cov.unwrap();
    let drift_region = run.lattice.regions[drift_idx];
    let flow = integrate_covariance(sigma0, &drift_region, &p, dt).expect("drift covariance flow");
    let mut drift_err = 0.0f64;
    for (tau, sigma) in &flow {
        let exact = free_flow_covariance(&sigma0, p.mass, *tau);
        drift_err = drift_err.max((sigma - exact).abs().max());
    }
    // The flowed per-axis moments track the printed profile at quadrature
    // accuracy (covariance magnitudes; the printed form carries the opposite
    // sign convention).
    let (tau_end, sigma_end) = flow.last().unwrap();
    let printed = moments_drift(&rs, entry_t + tau_end).unwrap();
    let grid_vs_printed = (sigma_end[(0, 0)] - printed.var_x)
        .abs()
        .max((sigma_end[(2, 2)] - printed.var_px).abs())
        .max((sigma_end[(0, 2)].abs() - printed.cov_xpx.abs()).abs());

    // Magnet covariance constancy over a full cyclotron turn: exact with the
    // invariant seed, and at grid accuracy with the grid-extracted kinetic
    // seed.
    let omega = p.cyclotron_frequency(1.0, FieldSign::Positive).unwrap();
    let turn = RegionSpec::new(
        RegionKind::Magnet { field: 1.0, sign: FieldSign::Positive },
        2.0 * std::f64::consts::PI / omega,
        0,
    )
    .unwrap();
    let invariant_seed = magnet_kinetic_covariance(&p, omega);
    let flow = integrate_covariance(invariant_seed, &turn, &p, dt).expect("magnet covariance flow");
    let mut magnet_err = 0.0f64;
    for (_, sigma) in &flow {
        magnet_err = magnet_err.max((sigma - invariant_seed).abs().max());
    }

    let magnet_cs = run.states[0];
    let spec = GridSpec::centered(0.0, run.y0, 8.0, 192).unwrap();
    let field = eval_psi_magnet(&spec, &magnet_cs, 0.0, &p).unwrap();
    let kinetic = grid_moments_kinetic(&field, &p, omega).unwrap();
    let grid_seed = kinetic.full_cov.unwrap();
    let flow = integrate_covariance(grid_seed, &turn, &p, dt).expect("grid-seeded magnet flow");
    let mut grid_const_err = 0.0f64;
    for (_, sigma) in &flow {
        for (i, j) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 2), (1, 3)] {
            grid_const_err = grid_const_err.max((sigma[(i, j)] - grid_seed[(i, j)]).abs());
        }
    }

    let elapsed = clock.elapsed().as_secs_f64();
    let pass = mean_err < 1e-8
        && drift_err < 1e-8
        && magnet_err < 1e-8
        && grid_vs_printed < 5e-3
        && grid_const_err < 5e-3
        && elapsed < 30.0;
    report(
        6,
        "oracle equivalence",
        pass,
        &format!(
            "means {mean_err:.3e}, drift covariance {drift_err:.3e}, magnet constancy {magnet_err:.3e} (tol 1e-8); grid-seeded: vs printed {grid_vs_printed:.3e}, constancy {grid_const_err:.3e} (tol 5e-3); {elapsed:.2} s"
        ),
    );
    assert!(pass);
}

// Criterion 7: on 256x256 windows spanning +-8 around the packet, both
// wavefunctions normalize to 1 +- 1e-6, all four invariant eigenstate
// residuals sit below 1e-3 and shrink at least 8x when the spacing halves,
// and grid moments agree with the closed forms within 1e-3; under 60 s.
#[test]
fn criterion_7_wavefunction_checks() {
    let clock = Instant::now();
    let p = PhysicalParams::natural();
    let run = canonical_run(1);
    let omega = 1.0;

    // Entry magnet state.
    let magnet_cs = run.states[0];
    let spec = GridSpec::centered(0.0, run.y0, 8.0, 256).unwrap();
    let field = eval_psi_magnet(&spec, &magnet_cs, 0.0, &p).unwrap();
    let norm_magnet = (field.norm_estimate - 1.0).abs();
    let res_a = eigenstate_residual(&field, InvariantKind::A, &magnet_cs, 0.0, &p).unwrap();
    let res_b = eigenstate_residual(&field, InvariantKind::B, &magnet_cs, 0.0, &p).unwrap();
    let fine = spec.refined().unwrap();
    let field_fine = eval_psi_magnet(&fine, &magnet_cs, 0.0, &p).unwrap();
    let res_a_fine = eigenstate_residual(&field_fine, InvariantKind::A, &magnet_cs, 0.0, &p).unwrap();
    let improvement_magnet = res_a / res_a_fine;
    let ms = grid_moments(&field, &p).unwrap();
    let closed = &run.samples[0].state;
    let magnet_moment_defect = [
        ms.mean_x - closed.mean_x,
        ms.mean_y - closed.mean_y,
        ms.mean_px - closed.mean_px,
        ms.mean_py - closed.mean_py,
        ms.var_x - closed.var_x,
        ms.var_y - closed.var_y,
        ms.var_px - closed.var_px,
        ms.var_py - closed.var_py,
        ms.cov_xpx - closed.cov_xpx,
        ms.cov_ypy - closed.cov_ypy,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));

    // First drift state at its entry.
    let drift_idx = run
        .lattice
        .regions
        .iter()
        .position(|r| !r.kind.is_magnet())
        .unwrap();
    let drift_cs = run.states[drift_idx];
    let entry_t = run.lattice.entry_times[drift_idx];
    let rs = run.region_state(drift_idx).unwrap();
    let entry = mean_drift(&rs, entry_t).unwrap();
    let spec_d = GridSpec::centered(entry.x, entry.y, 8.0, 256).unwrap();
    let field_d = eval_psi_drift(&spec_d, &drift_cs, entry_t, &p).unwrap();
    let norm_drift = (field_d.norm_estimate - 1.0).abs();
    let res_a2 = eigenstate_residual(&field_d, InvariantKind::A, &drift_cs, entry_t, &p).unwrap();
    let res_b2 = eigenstate_residual(&field_d, InvariantKind::B, &drift_cs, entry_t, &p).unwrap();
    let fine_d = spec_d.refined().unwrap();
    let field_d_fine = eval_psi_drift(&fine_d, &drift_cs, entry_t, &p).unwrap();
    let res_a2_fine =
        eigenstate_residual(&field_d_fine, InvariantKind::A, &drift_cs, entry_t, &p).unwrap();
    let improvement_drift = res_a2 / res_a2_fine;
    let ms_d = grid_moments(&field_d, &p).unwrap();
    let sm = moments_drift(&rs, entry_t).unwrap();
    let drift_moment_defect = [
        ms_d.mean_x - entry.x,
        ms_d.mean_y - entry.y,
        ms_d.mean_px - entry.px,
        ms_d.mean_py - entry.py,
        ms_d.var_x - sm.var_x,
        ms_d.var_px - sm.var_px,
        ms_d.cov_xpx - sm.cov_xpx,
    ]
    .iter()
    .fold(0.0f64, |m, d| m.max(d.abs()));

    let elapsed = clock.elapsed().as_secs_f64();
    let max_residual = res_a.max(res_b).max(res_a2).max(res_b2);
    let pass = norm_magnet < 1e-6
        && norm_drift < 1e-6
        && max_residual < 1e-3
        && improvement_magnet >= 8.0
        && improvement_drift >= 8.0
        && magnet_moment_defect < 1e-3
        && drift_moment_defect < 1e-3
        && elapsed < 60.0;
    report(
        7,
        "wavefunction checks",
        pass,
        &format!(
            "norms {norm_magnet:.3e}/{norm_drift:.3e} (tol 1e-6); eigenstate residuals max {max_residual:.3e} (tol 1e-3), halving gains {improvement_magnet:.1}x/{improvement_drift:.1}x (need 8x); moments {magnet_moment_defect:.3e}/{drift_moment_defect:.3e} (tol 1e-3); {elapsed:.2} s"
        ),
    );
    assert!(pass);
}

// Criterion 8: the first boundary sits at half the initial offset with the
// boundary time pi/(3 omega); over 5 narrow-gap periods the arc extrema are
// symmetric about half the initial offset; magnet samples stay on their
// circles to 1e-12 relative.
#[test]
fn criterion_8_trajectory_geometry() {
    let run = canonical_run(5);
    let t1 = magnet_exit_time(1.0).unwrap();
    assert!((t1 - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
    let exit0 = run.exit_means(0).unwrap();
    let half_height_defect = (exit0.y - run.y0 / 2.0).abs();

    let mut circle_defect = 0.0f64;
    for s in &run.samples {
        if !run.lattice.regions[s.region].kind.is_magnet() {
            continue;
        }
        let rs = run.region_state(s.region).unwrap();
        let orbit = magnet_orbit(&rs).unwrap();
        let d2 = (s.state.mean_x - orbit.center_x).powi(2)
            + (s.state.mean_y - orbit.center_y).powi(2);
        circle_defect = circle_defect.max((d2 - orbit.radius.powi(2)).abs() / orbit.radius.powi(2));
    }
    let expected_radius = 2.0 * 0.5 * 1.0f64.sqrt();
    let radius_defect = run
        .lattice
        .regions
        .iter()
        .filter(|r| r.kind.is_magnet())
        .map(|r| {
            let orbit = magnet_orbit(&run.region_state(r.index).unwrap()).unwrap();
            (orbit.radius - expected_radius).abs()
        })
        .fold(0.0f64, f64::max);

    // Extrema symmetry in the vanishing-gap limit of the step-field model.
    let narrow = narrow_run(5);
    let mut peaks: Vec<f64> = Vec::new();
    let mut troughs: Vec<f64> = Vec::new();
    for region in &narrow.lattice.regions {
        let RegionKind::Magnet { sign, .. } = region.kind else { continue };
        let orbit = magnet_orbit(&narrow.region_state(region.index).unwrap()).unwrap();
        match sign {
            FieldSign::Positive => peaks.push(orbit.center_y + orbit.radius),
            FieldSign::Negative => troughs.push(orbit.center_y - orbit.radius),
        }
    }
    assert_eq!(peaks.len(), 6);
    assert_eq!(troughs.len(), 5);
    let mut symmetry_defect = 0.0f64;
    for peak in &peaks {
        for trough in &troughs {
            // Symmetric about y0/2 means peak - y0/2 == y0/2 - trough.
            symmetry_defect = symmetry_defect.max((peak + trough - narrow.y0).abs());
        }
    }

    let pass = half_height_defect < 1e-12
        && circle_defect < 1e-12
        && radius_defect < 1e-12
        && symmetry_defect < 1e-8;
    report(
        8,
        "trajectory geometry",
        pass,
        &format!(
            "half-height defect {half_height_defect:.3e} (tol 1e-12), circle {circle_defect:.3e} (tol 1e-12), radius {radius_defect:.3e}, extrema symmetry about y0/2 {symmetry_defect:.3e} (tol 1e-8, vanishing-gap lattice)"
        ),
    );
    assert!(pass);
}

// Criterion 9: the oscillator-solution conservation law eps_dot conj(eps) -
// conj(eps_dot) eps = 2i e/m holds to 1e-12 (e/m) at 100 random times in
// each region type.
#[test]
fn criterion_9_wronskian_conservation() {
    let p = PhysicalParams::natural();
    let omega = 1.0;
    let magnet = EpsilonDescriptor::magnet(&p, 1.0, FieldSign::Positive).unwrap();
    let drift = EpsilonDescriptor::drift(fix_c1(&p, omega).unwrap(), 0.0, &p).unwrap();
    let expected = Complex64::new(0.0, 2.0 * p.charge / p.mass);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let t = rng.gen_range(0.0..10.0 / omega);
        for desc in [magnet, drift] {
            let w = wronskian(desc.eval(t, &p), desc.eval_dot(t, &p));
            worst = worst.max((w - expected).norm());
        }
    }
    let tol = 1e-12 * p.charge / p.mass;
    let pass = worst < tol;
    report(
        9,
        "wronskian conservation",
        pass,
        &format!("max defect over 100 random times per region type = {worst:.3e} (tol {tol:.1e})"),
    );
    assert!(pass);
}
