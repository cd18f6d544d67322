//! Physical parameters, lattice description and per-region coherent-state
//! records.
//!
//! Natural units with the light speed fixed at 1; `hbar` is kept
//! configurable so moment formulas can be exercised in both conventions.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default hard bound on coherent-state eigenvalue magnitudes.
pub const DEFAULT_OVERFLOW_BOUND: f64 = 1e12;

/// Mass, charge magnitude and action quantum of the simulated particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mass: f64,
    pub charge: f64,
    pub hbar: f64,
    /// Fixed at 1 by the unit system.
    pub light_speed: f64,
}

impl PhysicalParams {
    pub fn new(mass: f64, charge: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("charge", charge), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { mass, charge, hbar, light_speed: 1.0 })
    }

    /// m = e = hbar = 1.
    pub fn natural() -> Self {
        Self { mass: 1.0, charge: 1.0, hbar: 1.0, light_speed: 1.0 }
    }

    /// Signed cyclotron frequency e·H/m for a field of magnitude `field`
    /// pointing along ±z.
    pub fn cyclotron_frequency(&self, field: f64, sign: FieldSign) -> Result<f64> {
        if !(field.is_finite() && field > 0.0) {
            return Err(Error::Domain(format!(
                "field magnitude must be finite and > 0, got {field}"
            )));
        }
        let omega = self.charge * field / self.mass;
        if !omega.is_finite() {
            return Err(Error::Domain(format!("cyclotron frequency overflowed: e*H/m with H={field}")));
        }
        Ok(sign.signum() * omega)
    }
}

/// Orientation of the magnetic field along z.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldSign {
    Positive,
    Negative,
}

impl FieldSign {
    pub fn signum(self) -> f64 {
        match self {
            FieldSign::Positive => 1.0,
            FieldSign::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            FieldSign::Positive => FieldSign::Negative,
            FieldSign::Negative => FieldSign::Positive,
        }
    }
}

/// What fills a lattice region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionKind {
    Magnet { field: f64, sign: FieldSign },
    Drift,
}

impl RegionKind {
    pub fn is_magnet(&self) -> bool {
        matches!(self, RegionKind::Magnet { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegionKind::Magnet { .. } => "magnet",
            RegionKind::Drift => "drift",
        }
    }
}

/// One region of the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub duration: f64,
    pub index: usize,
}

impl RegionSpec {
    pub fn new(kind: RegionKind, duration: f64, index: usize) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::Domain(format!("region duration must be > 0, got {duration}")));
        }
        if let RegionKind::Magnet { field, .. } = kind {
            if !(field.is_finite() && field > 0.0) {
                return Err(Error::Domain(format!("magnet field must be > 0, got {field}")));
            }
        }
        Ok(Self { kind, duration, index })
    }
}

/// Why a region's duration has the value it has in the built lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DurationRule {
    /// First magnet: the time to swing the heading from 0 to -60 degrees.
    EntryMagnet,
    /// Later magnets: full arc from -60 to +60 degrees of heading.
    FullArcMagnet,
    /// Field-free gap; a single configurable value.
    DriftGap,
}

impl DurationRule {
    pub fn label(&self) -> &'static str {
        match self {
            DurationRule::EntryMagnet => "entry_magnet_third_turn",
            DurationRule::FullArcMagnet => "extension_full_arc",
            DurationRule::DriftGap => "extension_drift_gap",
        }
    }
}

/// Ordered sequence of regions with cumulative entry times.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePlan {
    pub regions: Vec<RegionSpec>,
    pub entry_times: Vec<f64>,
    pub duration_rules: Vec<DurationRule>,
}

impl LatticePlan {
    /// Validates alternation of magnet signs and accumulates entry times with
    /// compensated summation.
    pub fn new(regions: Vec<RegionSpec>, duration_rules: Vec<DurationRule>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::Config("lattice must contain at least one region".into()));
        }
        if duration_rules.len() != regions.len() {
            return Err(Error::Config("one duration rule per region required".into()));
        }
        let mut last_sign: Option<FieldSign> = None;
        for r in &regions {
            if let RegionKind::Magnet { sign, .. } = r.kind {
                if let Some(prev) = last_sign {
                    if prev == sign {
                        return Err(Error::Config(format!(
                            "magnet signs must alternate; region {} repeats the previous sign",
                            r.index
                        )));
                    }
                }
                last_sign = Some(sign);
            }
        }

        // Kahan accumulation keeps per-region reconstruction drift below 1e-14.
        let mut entry_times = Vec::with_capacity(regions.len());
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for r in &regions {
            entry_times.push(sum);
            let y = r.duration - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        Ok(Self { regions, entry_times, duration_rules })
    }

    /// Builds the step-field undulator: an entry magnet of a third of a turn,
    /// then `n_periods` repetitions of (drift, flipped full-arc magnet,
    /// drift, restored full-arc magnet).
    pub fn undulator(
        params: &PhysicalParams,
        field: f64,
        n_periods: usize,
        drift_duration: f64,
    ) -> Result<Self> {
        if n_periods == 0 {
            return Err(Error::Config("number of periods must be >= 1".into()));
        }
        let omega = params.cyclotron_frequency(field, FieldSign::Positive)?;
        let t1 = crate::stitching::magnet_exit_time(omega)?;
        if !(drift_duration.is_finite() && drift_duration > 0.0) {
            return Err(Error::Config(format!(
                "drift duration must be > 0, got {drift_duration}"
            )));
        }

        let mut regions = Vec::with_capacity(1 + 4 * n_periods);
        let mut rules = Vec::with_capacity(1 + 4 * n_periods);
        let mut idx = 0usize;
        let mut push = |regions: &mut Vec<RegionSpec>,
                        rules: &mut Vec<DurationRule>,
                        kind: RegionKind,
                        duration: f64,
                        rule: DurationRule|
         -> Result<()> {
            regions.push(RegionSpec::new(kind, duration, idx)?);
            rules.push(rule);
            idx += 1;
            Ok(())
        };

        let magnet = |sign| RegionKind::Magnet { field, sign };
        push(&mut regions, &mut rules, magnet(FieldSign::Positive), t1, DurationRule::EntryMagnet)?;
        let mut sign = FieldSign::Negative;
        for _ in 0..n_periods {
            push(&mut regions, &mut rules, RegionKind::Drift, drift_duration, DurationRule::DriftGap)?;
            push(&mut regions, &mut rules, magnet(sign), 2.0 * t1, DurationRule::FullArcMagnet)?;
            sign = sign.flipped();
            push(&mut regions, &mut rules, RegionKind::Drift, drift_duration, DurationRule::DriftGap)?;
            push(&mut regions, &mut rules, magnet(sign), 2.0 * t1, DurationRule::FullArcMagnet)?;
            sign = sign.flipped();
        }
        Self::new(regions, rules)
    }

    pub fn total_duration(&self) -> f64 {
        let last = self.regions.len() - 1;
        self.entry_times[last] + self.regions[last].duration
    }
}

/// The complex classical-oscillator solution attached to a region, in the
/// region's local time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonDescriptor {
    /// sqrt(2/H) * exp(i*omega*t/2) with signed cyclotron frequency.
    Magnet { omega: f64, field: f64 },
    /// i*C1*t + e/(m*C1); `c2` is the phase-integration constant.
    Drift { c1: f64, c2: f64 },
}

impl EpsilonDescriptor {
    pub fn magnet(params: &PhysicalParams, field: f64, sign: FieldSign) -> Result<Self> {
        let omega = params.cyclotron_frequency(field, sign)?;
        Ok(Self::Magnet { omega, field })
    }

    pub fn drift(c1: f64, c2: f64, params: &PhysicalParams) -> Result<Self> {
        if !(c1.is_finite() && c1 > 0.0) {
            return Err(Error::Domain(format!("C1 must be finite and > 0, got {c1}")));
        }
        let scale = params.charge / (params.mass * c1);
        if !scale.is_finite() || scale.abs() > DEFAULT_OVERFLOW_BOUND {
            return Err(Error::Overflow {
                quantity: "e/(m*C1)",
                magnitude: scale.abs(),
                bound: DEFAULT_OVERFLOW_BOUND,
            });
        }
        Ok(Self::Drift { c1, c2 })
    }

    pub fn is_magnet(&self) -> bool {
        matches!(self, Self::Magnet { .. })
    }

    /// Evaluates epsilon at local time `t`.
    pub fn eval(&self, t: f64, params: &PhysicalParams) -> Complex64 {
        match *self {
            Self::Magnet { omega, field } => epsilon_magnet(t, omega, field),
            Self::Drift { c1, .. } => epsilon_drift(t, c1, params),
        }
    }

    /// Time derivative of epsilon at local time `t`.
    pub fn eval_dot(&self, t: f64, params: &PhysicalParams) -> Complex64 {
        match *self {
            Self::Magnet { omega, field } => {
                Complex64::new(0.0, 0.5 * omega) * epsilon_magnet(t, omega, field)
            }
            Self::Drift { c1, .. } => {
                let _ = params;
                Complex64::new(0.0, c1)
            }
        }
    }
}

/// sqrt(2/H) * exp(i*omega*t/2), the magnet-region oscillator solution.
pub fn epsilon_magnet(t: f64, omega: f64, field: f64) -> Complex64 {
    (2.0 / field).sqrt() * Complex64::new(0.0, 0.5 * omega * t).exp()
}

/// i*C1*t + e/(m*C1), the field-free oscillator solution.
pub fn epsilon_drift(t: f64, c1: f64, params: &PhysicalParams) -> Complex64 {
    Complex64::new(params.charge / (params.mass * c1), c1 * t)
}

/// eps_dot * conj(eps) - conj(eps_dot) * eps. Equals 2i*e/m for both region
/// solutions with correctly normalized parameters.
pub fn wronskian(eps: Complex64, eps_dot: Complex64) -> Complex64 {
    eps_dot * eps.conj() - eps_dot.conj() * eps
}

/// Coherent-state eigenvalues for one region plus the region's oscillator
/// descriptor. `entry_phase` re-parameterizes magnet arcs so trajectories are
/// continuous when a packet re-enters a later magnet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentStateParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub epsilon: EpsilonDescriptor,
    pub t_entry: f64,
    pub entry_phase: f64,
}

impl CoherentStateParams {
    pub fn new(
        alpha: Complex64,
        beta: Complex64,
        epsilon: EpsilonDescriptor,
        t_entry: f64,
        entry_phase: f64,
        overflow_bound: f64,
    ) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
            if v.norm() > overflow_bound {
                return Err(Error::Overflow {
                    quantity: if name == "alpha" { "alpha" } else { "beta" },
                    magnitude: v.norm(),
                    bound: overflow_bound,
                });
            }
        }
        if !t_entry.is_finite() || !entry_phase.is_finite() {
            return Err(Error::Domain("entry time and phase must be finite".into()));
        }
        Ok(Self { alpha, beta, epsilon, t_entry, entry_phase })
    }
}

/// Phase-space means; momenta are kinetic (m times velocity).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Means {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

impl Means {
    pub fn new(x: f64, y: f64, px: f64, py: f64) -> Self {
        Self { x, y, px, py }
    }

    pub fn to_vector(self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.x, self.y, self.px, self.py)
    }

    pub fn from_vector(v: &nalgebra::Vector4<f64>) -> Self {
        Self { x: v[0], y: v[1], px: v[2], py: v[3] }
    }

    pub fn max_abs_diff(&self, other: &Means) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.px - other.px).abs())
            .max((self.py - other.py).abs())
    }
}

/// Per-axis second central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondMoments {
    pub var_x: f64,
    pub var_y: f64,
    pub var_px: f64,
    pub var_py: f64,
    pub cov_xpx: f64,
    pub cov_ypy: f64,
}

impl SecondMoments {
    pub fn max_abs_diff(&self, other: &SecondMoments) -> f64 {
        [
            self.var_x - other.var_x,
            self.var_y - other.var_y,
            self.var_px - other.var_px,
            self.var_py - other.var_py,
            self.cov_xpx - other.cov_xpx,
            self.cov_ypy - other.cov_ypy,
        ]
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()))
    }
}

/// Time-stamped means and second moments, optionally with the full 4x4
/// covariance over (x, y, px, py).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentState {
    pub t: f64,
    pub mean_x: f64,
    pub mean_y: f64,
    pub mean_px: f64,
    pub mean_py: f64,
    pub var_x: f64,
    pub var_y: f64,
    pub var_px: f64,
    pub var_py: f64,
    pub cov_xpx: f64,
    pub cov_ypy: f64,
    pub full_cov: Option<Matrix4<f64>>,
}

impl MomentState {
    pub fn from_parts(t: f64, means: Means, moments: SecondMoments) -> Self {
        Self {
            t,
            mean_x: means.x,
            mean_y: means.y,
            mean_px: means.px,
            mean_py: means.py,
            var_x: moments.var_x,
            var_y: moments.var_y,
            var_px: moments.var_px,
            var_py: moments.var_py,
            cov_xpx: moments.cov_xpx,
            cov_ypy: moments.cov_ypy,
            full_cov: None,
        }
    }

    pub fn means(&self) -> Means {
        Means::new(self.mean_x, self.mean_y, self.mean_px, self.mean_py)
    }

    pub fn second_moments(&self) -> SecondMoments {
        SecondMoments {
            var_x: self.var_x,
            var_y: self.var_y,
            var_px: self.var_px,
            var_py: self.var_py,
            cov_xpx: self.cov_xpx,
            cov_ypy: self.cov_ypy,
        }
    }

    /// Checks positivity, the uncertainty bound and, when present, agreement
    /// and positive semidefiniteness of the full covariance.
    pub fn validate(&self, hbar: f64, tol: f64) -> Result<()> {
        for (name, v) in [
            ("var_x", self.var_x),
            ("var_y", self.var_y),
            ("var_px", self.var_px),
            ("var_py", self.var_py),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        let bound = hbar * hbar / 4.0;
        for (name, s) in [
            ("x", self.var_x * self.var_px - self.cov_xpx * self.cov_xpx),
            ("y", self.var_y * self.var_py - self.cov_ypy * self.cov_ypy),
        ] {
            if s < bound - tol {
                return Err(Error::Accuracy {
                    what: if name == "x" { "uncertainty bound (x)" } else { "uncertainty bound (y)" },
                    defect: bound - s,
                    tolerance: tol,
                });
            }
        }
        if let Some(cov) = &self.full_cov {
            let asym = (cov - cov.transpose()).abs().max();
            if asym > tol {
                return Err(Error::Accuracy { what: "covariance symmetry", defect: asym, tolerance: tol });
            }
            let named = [
                (cov[(0, 0)], self.var_x),
                (cov[(1, 1)], self.var_y),
                (cov[(2, 2)], self.var_px),
                (cov[(3, 3)], self.var_py),
                (cov[(0, 2)], self.cov_xpx),
                (cov[(1, 3)], self.cov_ypy),
            ];
            for (a, b) in named {
                if (a - b).abs() > tol.max(1e-12 * b.abs()) {
                    return Err(Error::Accuracy {
                        what: "full covariance vs named fields",
                        defect: (a - b).abs(),
                        tolerance: tol,
                    });
                }
            }
            let eig = cov.symmetric_eigenvalues();
            let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
            if min_eig < -1e-10 {
                return Err(Error::Accuracy {
                    what: "covariance positive semidefiniteness",
                    defect: -min_eig,
                    tolerance: 1e-10,
                });
            }
        }
        Ok(())
    }
}
