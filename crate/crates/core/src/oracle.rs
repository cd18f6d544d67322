//! Independent verification engine: fixed-step fourth-order integration of
//! the classical mean flow and the linearized covariance flow, plus the
//! closed-form covariances the flows must preserve.
//!
//! The flows are linear, so the integrator doubles as a brute-force oracle
//! for every closed-form result in the propagators.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::model::{LatticePlan, Means, PhysicalParams, RegionKind, RegionSpec};

/// Phase-space flow matrix over (x, y, px, py) with kinetic momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMatrix(pub Matrix4<f64>);

/// Magnet: position driven by momentum, momentum rotating at the signed
/// cyclotron rate. Drift: free motion.
pub fn flow_matrix(kind: &RegionKind, params: &PhysicalParams) -> FlowMatrix {
    let m_inv = 1.0 / params.mass;
    let mut m = Matrix4::zeros();
    m[(0, 2)] = m_inv;
    m[(1, 3)] = m_inv;
    if let RegionKind::Magnet { field, sign } = kind {
        let omega = sign.signum() * params.charge * field / params.mass;
        m[(2, 3)] = omega;
        m[(3, 2)] = -omega;
    }
    FlowMatrix(m)
}

fn validate_step(dt: f64, duration: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Config(format!("step size must be > 0, got {dt}")));
    }
    if dt > duration / 100.0 {
        return Err(Error::Config(format!(
            "step size {dt} too coarse for region duration {duration}; need dt <= duration/100"
        )));
    }
    Ok((duration / dt).ceil() as usize)
}

fn rk4_step<F>(dt: f64, y: Vector4<f64>, f: F) -> Vector4<f64>
where
    F: Fn(&Vector4<f64>) -> Vector4<f64>,
{
    let k1 = f(&y);
    let k2 = f(&(y + 0.5 * dt * k1));
    let k3 = f(&(y + 0.5 * dt * k2));
    let k4 = f(&(y + dt * k3));
    y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates the mean flow across one region. Returns (local time, means)
/// samples at every step including both endpoints.
pub fn integrate_means(
    init: Means,
    region: &RegionSpec,
    params: &PhysicalParams,
    dt: f64,
) -> Result<Vec<(f64, Means)>> {
    let steps = validate_step(dt, region.duration)?;
    let flow = flow_matrix(&region.kind, params).0;
    let f = |y: &Vector4<f64>| flow * y;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = init.to_vector();
    let mut t = 0.0;
    out.push((t, init));
    for k in 0..steps {
        let h = if k == steps - 1 { region.duration - t } else { dt };
        y = rk4_step(h, y, f);
        t = if k == steps - 1 { region.duration } else { t + h };
        out.push((t, Means::from_vector(&y)));
    }
    Ok(out)
}

/// Integrates the means across a whole lattice, continuing the state through
/// each boundary. Returns (global time, means) samples.
pub fn integrate_means_lattice(
    init: Means,
    lattice: &LatticePlan,
    params: &PhysicalParams,
    dt: f64,
) -> Result<Vec<(f64, Means)>> {
    let mut out = Vec::new();
    let mut state = init;
    for (region, entry) in lattice.regions.iter().zip(&lattice.entry_times) {
        let series = integrate_means(state, region, params, dt)?;
        state = series.last().unwrap().1;
        let skip = usize::from(!out.is_empty());
        out.extend(series.into_iter().skip(skip).map(|(tau, m)| (entry + tau, m)));
    }
    Ok(out)
}

/// Integrates the covariance flow dS/dt = M S + S M^T across one region,
/// symmetrizing every step. Returns (local time, covariance, smallest
/// eigenvalue seen so far).
pub fn integrate_covariance(
    sigma0: Matrix4<f64>,
    region: &RegionSpec,
    params: &PhysicalParams,
    dt: f64,
) -> Result<Vec<(f64, Matrix4<f64>)>> {
    let asym = (sigma0 - sigma0.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(Error::Domain(format!(
            "initial covariance must be symmetric; asymmetry {asym:.3e}"
        )));
    }
    let min_eig = sigma0.symmetric_eigenvalues().min();
    if min_eig < -1e-10 * sigma0.abs().max().max(1.0) {
        return Err(Error::Domain(format!(
            "initial covariance must be positive semidefinite; min eigenvalue {min_eig:.3e}"
        )));
    }
    let steps = validate_step(dt, region.duration)?;
    let flow = flow_matrix(&region.kind, params).0;
    let flow_t = flow.transpose();
    let f = |s: &Matrix4<f64>| flow * s + s * flow_t;

    let mut out = Vec::with_capacity(steps + 1);
    let mut s = sigma0;
    let mut t = 0.0;
    out.push((t, s));
    for k in 0..steps {
        let h = if k == steps - 1 { region.duration - t } else { dt };
        let k1 = f(&s);
        let k2 = f(&(s + 0.5 * h * k1));
        let k3 = f(&(s + 0.5 * h * k2));
        let k4 = f(&(s + h * k3));
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = 0.5 * (s + s.transpose());
        t = if k == steps - 1 { region.duration } else { t + h };
        out.push((t, s));
    }
    Ok(out)
}

/// Exact free flow of a covariance matrix over time `t`.
pub fn free_flow_covariance(sigma0: &Matrix4<f64>, mass: f64, t: f64) -> Matrix4<f64> {
    let mut f = Matrix4::identity();
    f[(0, 2)] = t / mass;
    f[(1, 3)] = t / mass;
    f * sigma0 * f.transpose()
}

/// Full 4x4 kinetic-momentum covariance of a magnet coherent state. The
/// momentum variances are twice the reported oscillator constants and the
/// cross covariances cov(x, py), cov(y, px) carry -+ hbar/2 (for positive
/// omega); exactly this matrix is stationary under the magnet flow.
pub fn magnet_kinetic_covariance(params: &PhysicalParams, omega: f64) -> Matrix4<f64> {
    let hbar = params.hbar;
    let var_q = hbar / (params.mass * omega.abs());
    let var_p = params.mass * omega.abs() * hbar / 2.0;
    let chi = 0.5 * hbar * omega.signum();
    let mut s = Matrix4::zeros();
    s[(0, 0)] = var_q;
    s[(1, 1)] = var_q;
    s[(2, 2)] = var_p;
    s[(3, 3)] = var_p;
    s[(0, 3)] = -chi;
    s[(3, 0)] = -chi;
    s[(1, 2)] = chi;
    s[(2, 1)] = chi;
    s
}

/// Full 4x4 covariance of a drift coherent state at local time `tau`. The
/// covariance grows with the physical positive sign; the per-axis closed
/// form reports it with the opposite printed sign convention.
pub fn drift_covariance(params: &PhysicalParams, c1: f64, tau: f64) -> Matrix4<f64> {
    let hbar = params.hbar;
    let m = params.mass;
    let e = params.charge.abs();
    let c1sq = c1 * c1;
    let var_q = hbar * (e / (2.0 * m * m * c1sq) + c1sq * tau * tau / (2.0 * e));
    let var_p = hbar * m * m * c1sq / (2.0 * e);
    let cov = hbar * m * c1sq * tau / (2.0 * e);
    let mut s = Matrix4::zeros();
    s[(0, 0)] = var_q;
    s[(1, 1)] = var_q;
    s[(2, 2)] = var_p;
    s[(3, 3)] = var_p;
    s[(0, 2)] = cov;
    s[(2, 0)] = cov;
    s[(1, 3)] = cov;
    s[(3, 1)] = cov;
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FieldSign;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_3, PI};

    fn natural() -> PhysicalParams {
        PhysicalParams::natural()
    }

    fn magnet_region(duration: f64, sign: FieldSign) -> RegionSpec {
        RegionSpec::new(RegionKind::Magnet { field: 1.0, sign }, duration, 0).unwrap()
    }

    fn drift_region(duration: f64) -> RegionSpec {
        RegionSpec::new(RegionKind::Drift, duration, 1).unwrap()
    }

    #[test]
    fn drift_flow_is_straight() {
        let p = natural();
        let series = integrate_means(
            Means::new(0.8660254037844386, 0.5, 0.5, -0.8660254037844386),
            &drift_region(1.0),
            &p,
            1e-3,
        )
        .unwrap();
        let (_, end) = series.last().unwrap();
        assert_abs_diff_eq!(end.x, 1.3660254037844386, epsilon = 1e-12);
        assert_abs_diff_eq!(end.y, -0.3660254037844386, epsilon = 1e-12);
        assert_abs_diff_eq!(end.px, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(end.py, -0.8660254037844386, epsilon = 1e-14);
    }

    #[test]
    fn magnet_flow_rotates_with_cyclotron_period() {
        let p = natural();
        let init = Means::new(0.0, 1.0, 1.0, 0.0);
        let series = integrate_means(init, &magnet_region(2.0 * PI, FieldSign::Positive), &p, 1e-3).unwrap();
        let (_, end) = series.last().unwrap();
        assert!(end.max_abs_diff(&init) < 1e-9);
    }

    #[test]
    fn magnet_flow_third_turn_matches_rotation() {
        let p = natural();
        let series = integrate_means(
            Means::new(0.0, 1.0, 1.0, 0.0),
            &magnet_region(FRAC_PI_3, FieldSign::Positive),
            &p,
            1e-3,
        )
        .unwrap();
        let (_, end) = series.last().unwrap();
        assert_abs_diff_eq!(end.x, 0.8660254037844386, epsilon = 1e-10);
        assert_abs_diff_eq!(end.y, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(end.px, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(end.py, -0.8660254037844386, epsilon = 1e-10);
    }

    #[test]
    fn sign_flip_reverses_rotation() {
        let p = natural();
        let init = Means::new(0.0, 0.0, 1.0, 0.0);
        let pos = integrate_means(init, &magnet_region(0.5, FieldSign::Positive), &p, 1e-3).unwrap();
        let neg = integrate_means(init, &magnet_region(0.5, FieldSign::Negative), &p, 1e-3).unwrap();
        let (_, a) = pos.last().unwrap();
        let (_, b) = neg.last().unwrap();
        assert_abs_diff_eq!(a.py, -b.py, epsilon = 1e-12);
        assert_abs_diff_eq!(a.px, b.px, epsilon = 1e-12);
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let p = natural();
        let series = integrate_means(Means::default(), &magnet_region(1.0, FieldSign::Positive), &p, 1e-3).unwrap();
        for (_, m) in series {
            assert_eq!(m, Means::default());
        }
    }

    #[test]
    fn step_size_guard() {
        let p = natural();
        assert!(integrate_means(Means::default(), &drift_region(1.0), &p, 0.5).is_err());
    }

    #[test]
    fn drift_covariance_spreads_exactly() {
        let p = natural();
        let mut sigma0 = Matrix4::zeros();
        sigma0[(0, 0)] = 1.0;
        sigma0[(1, 1)] = 1.0;
        sigma0[(2, 2)] = 0.25;
        sigma0[(3, 3)] = 0.25;
        let series = integrate_covariance(sigma0, &drift_region(2.0), &p, 1e-3).unwrap();
        for (t, s) in &series {
            assert_abs_diff_eq!(s[(0, 0)], 1.0 + 0.25 * t * t, epsilon = 1e-10);
            assert_abs_diff_eq!(s[(0, 2)], 0.25 * t, epsilon = 1e-10);
            assert_abs_diff_eq!(s[(2, 2)], 0.25, epsilon = 1e-12);
            let exact = free_flow_covariance(&sigma0, 1.0, *t);
            assert!((s - exact).abs().max() < 1e-10);
        }
    }

    #[test]
    fn magnet_covariance_is_stationary_for_invariant_seed() {
        let p = natural();
        let sigma0 = magnet_kinetic_covariance(&p, 1.0);
        let series =
            integrate_covariance(sigma0, &magnet_region(2.0 * PI, FieldSign::Positive), &p, 1e-3).unwrap();
        for (_, s) in &series {
            assert!((s - sigma0).abs().max() < 1e-9);
        }
    }

    #[test]
    fn reported_oscillator_constants_need_cross_covariances() {
        // A diagonal seed with the reported per-axis constants is NOT
        // preserved: the cross covariances carry the balance.
        let p = natural();
        let mut diag = Matrix4::zeros();
        diag[(0, 0)] = 1.0;
        diag[(1, 1)] = 1.0;
        diag[(2, 2)] = 0.25;
        diag[(3, 3)] = 0.25;
        let series =
            integrate_covariance(diag, &magnet_region(FRAC_PI_3, FieldSign::Positive), &p, 1e-3).unwrap();
        let (_, end) = series.last().unwrap();
        assert!((end - diag).abs().max() > 1e-3);
    }

    #[test]
    fn determinant_is_preserved() {
        let p = natural();
        let sigma0 = magnet_kinetic_covariance(&p, 1.0);
        let d0 = sigma0.determinant();
        let series =
            integrate_covariance(sigma0, &magnet_region(PI, FieldSign::Positive), &p, 1e-3).unwrap();
        for (_, s) in &series {
            assert!((s.determinant() - d0).abs() < 1e-8 * d0.abs());
        }
        let sigma0 = drift_covariance(&p, 0.5f64.sqrt(), 0.0);
        let d0 = sigma0.determinant();
        let series = integrate_covariance(sigma0, &drift_region(3.0), &p, 1e-3).unwrap();
        for (_, s) in &series {
            assert!((s.determinant() - d0).abs() < 1e-8 * d0.abs());
        }
    }

    #[test]
    fn zero_covariance_stays_zero() {
        let p = natural();
        let series =
            integrate_covariance(Matrix4::zeros(), &drift_region(1.0), &p, 1e-3).unwrap();
        for (_, s) in series {
            assert_eq!(s, Matrix4::zeros());
        }
    }

    #[test]
    fn drift_covariance_closed_form_flows() {
        // The drift coherent-state covariance family is closed under the
        // free flow.
        let p = natural();
        let c1 = 0.5f64.sqrt();
        let s0 = drift_covariance(&p, c1, 0.0);
        let flowed = free_flow_covariance(&s0, p.mass, 1.7);
        let direct = drift_covariance(&p, c1, 1.7);
        assert!((flowed - direct).abs().max() < 1e-14);
    }
}
