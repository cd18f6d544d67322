//! Heisenberg and Schrodinger uncertainty functionals over moment records.

use crate::model::MomentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

fn axis_triplet(ms: &MomentState, axis: Axis) -> (f64, f64, f64) {
    match axis {
        Axis::X => (ms.var_x, ms.var_px, ms.cov_xpx),
        Axis::Y => (ms.var_y, ms.var_py, ms.cov_ypy),
    }
}

/// var(q) * var(p) for the chosen axis.
pub fn heisenberg_product(ms: &MomentState, axis: Axis) -> f64 {
    let (vq, vp, _) = axis_triplet(ms, axis);
    vq * vp
}

/// var(q) * var(p) - cov(q, p)^2; bounded below by hbar^2/4 for physical
/// states.
pub fn schrodinger_functional(ms: &MomentState, axis: Axis) -> f64 {
    let (vq, vp, c) = axis_triplet(ms, axis);
    vq * vp - c * c
}

/// Outcome of testing both functionals against the hbar^2/4 bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Minimization {
    /// Schrodinger functional within `tol` of the bound.
    pub minimizes_schrodinger: bool,
    /// Heisenberg product within `tol` of the bound.
    pub minimizes_heisenberg: bool,
    /// Schrodinger functional below the bound by more than `tol` (unphysical
    /// moment data).
    pub schrodinger_violated: bool,
    /// Heisenberg product below the bound by more than `tol`.
    pub heisenberg_violated: bool,
}

pub fn classify_minimization(ms: &MomentState, axis: Axis, tol: f64, hbar: f64) -> Minimization {
    let bound = hbar * hbar / 4.0;
    let schr = schrodinger_functional(ms, axis);
    let heis = heisenberg_product(ms, axis);
    Minimization {
        minimizes_schrodinger: (schr - bound).abs() <= tol,
        minimizes_heisenberg: (heis - bound).abs() <= tol,
        schrodinger_violated: schr < bound - tol,
        heisenberg_violated: heis < bound - tol,
    }
}
