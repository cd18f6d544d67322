//! Closed-form mean trajectories and second moments inside a single region.
//!
//! Magnet means move on a circle of radius 2|alpha|sqrt(e) around the center
//! (2 sqrt(e) Re beta, -2 sqrt(e) Im beta); magnet second moments are the
//! constants hbar/(m|omega|) and m|omega|hbar/4 with vanishing covariance.
//! Drift means are straight lines; drift coordinate variances grow
//! quadratically while momentum variances stay constant.

use crate::error::{Error, Result};
use crate::model::{
    CoherentStateParams, EpsilonDescriptor, Means, MomentState, PhysicalParams, RegionKind,
    RegionSpec, SecondMoments,
};

/// A region paired with the coherent-state record that lives in it.
#[derive(Debug, Clone, Copy)]
pub struct RegionState {
    pub cs: CoherentStateParams,
    pub region: RegionSpec,
    pub params: PhysicalParams,
}

impl RegionState {
    pub fn new(cs: CoherentStateParams, region: RegionSpec, params: PhysicalParams) -> Result<Self> {
        let matches = match region.kind {
            RegionKind::Magnet { .. } => cs.epsilon.is_magnet(),
            RegionKind::Drift => !cs.epsilon.is_magnet(),
        };
        if !matches {
            return Err(Error::Config(
                "epsilon descriptor variant does not match the region kind".into(),
            ));
        }
        Ok(Self { cs, region, params })
    }

    fn local_time(&self, t: f64) -> Result<f64> {
        let tau = t - self.cs.t_entry;
        let slack = 1e-9 * self.region.duration.max(1.0);
        if tau < -slack || tau > self.region.duration + slack {
            return Err(Error::Domain(format!(
                "time {t} outside region {} spanning [{}, {}]",
                self.region.index,
                self.cs.t_entry,
                self.cs.t_entry + self.region.duration
            )));
        }
        Ok(tau.clamp(0.0, self.region.duration))
    }

    fn magnet_omega(&self) -> Result<f64> {
        match self.cs.epsilon {
            EpsilonDescriptor::Magnet { omega, .. } => {
                if omega == 0.0 {
                    Err(Error::Domain("zero cyclotron frequency; use the drift formulas".into()))
                } else {
                    Ok(omega)
                }
            }
            EpsilonDescriptor::Drift { .. } => {
                Err(Error::Domain("magnet operation on a drift state".into()))
            }
        }
    }

    fn drift_c1(&self) -> Result<f64> {
        match self.cs.epsilon {
            EpsilonDescriptor::Drift { c1, .. } => Ok(c1),
            EpsilonDescriptor::Magnet { .. } => {
                Err(Error::Domain("drift operation on a magnet state".into()))
            }
        }
    }
}

/// Circle geometry of a magnet-region mean orbit: center, radius and the
/// rotation phase at region entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitCircle {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub theta_entry: f64,
}

pub fn magnet_orbit(rs: &RegionState) -> Result<OrbitCircle> {
    rs.magnet_omega()?;
    let sqrt_e = rs.params.charge.sqrt();
    let cs = &rs.cs;
    Ok(OrbitCircle {
        center_x: 2.0 * sqrt_e * cs.beta.re,
        center_y: -2.0 * sqrt_e * cs.beta.im,
        radius: 2.0 * sqrt_e * cs.alpha.norm(),
        theta_entry: cs.entry_phase - cs.alpha.arg(),
    })
}

/// Mean position and kinetic momentum on the magnet circle at time `t`.
pub fn mean_magnet(rs: &RegionState, t: f64) -> Result<Means> {
    let tau = rs.local_time(t)?;
    let omega = rs.magnet_omega()?;
    let orbit = magnet_orbit(rs)?;
    let theta = omega * tau + orbit.theta_entry;
    let m = rs.params.mass;
    Ok(Means {
        x: orbit.center_x + orbit.radius * theta.sin(),
        y: orbit.center_y + orbit.radius * theta.cos(),
        px: m * orbit.radius * omega * theta.cos(),
        py: -m * orbit.radius * omega * theta.sin(),
    })
}

/// Magnet second moments; time-independent constants.
pub fn moments_magnet(rs: &RegionState) -> Result<SecondMoments> {
    let omega = rs.magnet_omega()?.abs();
    let m = rs.params.mass;
    let hbar = rs.params.hbar;
    let var_q = hbar / (m * omega);
    let var_p = m * omega * hbar / 4.0;
    Ok(SecondMoments {
        var_x: var_q,
        var_y: var_q,
        var_px: var_p,
        var_py: var_p,
        cov_xpx: 0.0,
        cov_ypy: 0.0,
    })
}

/// Mean position and momentum the drift state takes at its own entry time,
/// reconstructed from the region's eigenvalues.
pub fn drift_entry_means(cs: &CoherentStateParams, params: &PhysicalParams, c1: f64) -> Means {
    let sqrt_e = params.charge.sqrt();
    let m = params.mass;
    let (a, b) = (cs.alpha, cs.beta);
    let coord = sqrt_e / (m * c1);
    let mom = m * c1 / sqrt_e;
    Means {
        x: coord * (b.re - a.im),
        y: coord * (a.re - b.im),
        px: mom * (a.re + b.im),
        py: mom * (a.im + b.re),
    }
}

/// Free mean motion: constant momentum, coordinates affine in time.
pub fn mean_drift(rs: &RegionState, t: f64) -> Result<Means> {
    let tau = rs.local_time(t)?;
    let c1 = rs.drift_c1()?;
    let entry = drift_entry_means(&rs.cs, &rs.params, c1);
    let m = rs.params.mass;
    Ok(Means {
        x: entry.x + entry.px / m * tau,
        y: entry.y + entry.py / m * tau,
        px: entry.px,
        py: entry.py,
    })
}

/// Drift second moments at time `t >= t_entry`: spreading coordinate
/// variances, constant momentum variances, linear covariance.
pub fn moments_drift(rs: &RegionState, t: f64) -> Result<SecondMoments> {
    let c1 = rs.drift_c1()?;
    let tau = t - rs.cs.t_entry;
    if tau < -1e-12 {
        return Err(Error::Domain(format!(
            "drift moments need t >= entry time {}, got {t}",
            rs.cs.t_entry
        )));
    }
    let tau = tau.max(0.0);
    let m = rs.params.mass;
    let e = rs.params.charge.abs();
    let hbar = rs.params.hbar;
    let c1sq = c1 * c1;
    let var_q = hbar * (e / (2.0 * m * m * c1sq) + c1sq * tau * tau / (2.0 * e));
    let var_p = hbar * m * m * c1sq / (2.0 * e);
    let cov = -hbar * m * c1sq / (2.0 * rs.params.charge) * tau;
    Ok(SecondMoments {
        var_x: var_q,
        var_y: var_q,
        var_px: var_p,
        var_py: var_p,
        cov_xpx: cov,
        cov_ypy: cov,
    })
}

/// Means plus second moments at `t`, dispatched on the region kind.
pub fn sample_moment_state(rs: &RegionState, t: f64) -> Result<MomentState> {
    let (means, moments) = match rs.region.kind {
        RegionKind::Magnet { .. } => (mean_magnet(rs, t)?, moments_magnet(rs)?),
        RegionKind::Drift => (mean_drift(rs, t)?, moments_drift(rs, t)?),
    };
    Ok(MomentState::from_parts(t, means, moments))
}
