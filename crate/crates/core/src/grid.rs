//! Pointwise wavefunction evaluation on a rectangular grid, finite-difference
//! application of the linear invariant operators, and quadrature extraction
//! of the full first/second moment set.
//!
//! Both region wavefunctions are Gaussians times linear-exponential cross
//! terms in z = x + iy and conj(z). The cross-term coefficients are the ones
//! forced by the eigenvalue relations A psi = alpha psi, B psi = beta psi, and
//! the normalizing constant is carried analytically so the quadrature norm is
//! a genuine accuracy check.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    CoherentStateParams, EpsilonDescriptor, Means, MomentState, PhysicalParams,
};

/// Rectangular evaluation window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        if nx < 16 || ny < 16 {
            return Err(Error::Config(format!("grid needs at least 16 points per side, got {nx}x{ny}")));
        }
        if !(x_max > x_min && y_max > y_min) {
            return Err(Error::Config("grid extents must be ordered".into()));
        }
        Ok(Self { x_min, x_max, y_min, y_max, nx, ny })
    }

    /// Square window of half-width `half_extent` around a center.
    pub fn centered(cx: f64, cy: f64, half_extent: f64, n: usize) -> Result<Self> {
        Self::new(cx - half_extent, cx + half_extent, cy - half_extent, cy + half_extent, n, n)
    }

    /// Same window with the spacing halved (n -> 2n - 1 keeps the endpoints).
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.y_min, self.y_max, 2 * self.nx - 1, 2 * self.ny - 1)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        self.x_min + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y_min + iy as f64 * self.dy()
    }

    fn len(&self) -> usize {
        self.nx * self.ny
    }
}

/// Complex samples over a grid, row-major in y.
#[derive(Debug, Clone)]
pub struct GridField {
    pub spec: GridSpec,
    pub values: Vec<Complex64>,
    pub t: f64,
    /// Trapezoidal estimate of the squared norm at construction; 1 up to
    /// quadrature and window-coverage error for freshly evaluated states.
    pub norm_estimate: f64,
}

impl GridField {
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.spec.nx + ix]
    }

    /// |psi|^2 rows as "x,y,density" CSV text.
    pub fn density_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 24);
        out.push_str("x,y,density\n");
        for iy in 0..self.spec.ny {
            for ix in 0..self.spec.nx {
                let v = self.at(ix, iy).norm_sqr();
                out.push_str(&format!("{},{},{}\n", self.spec.x(ix), self.spec.y(iy), v));
            }
        }
        out
    }
}

/// Integrated phase of the drift oscillator solution,
/// arctan(m C1^2 t / e) + C2.
pub fn drift_phase(c1: f64, c2: f64, t: f64, params: &PhysicalParams) -> f64 {
    (params.mass * c1 * c1 * t / params.charge).atan() + c2
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

fn quadrature_norm(spec: &GridSpec, values: &[Complex64]) -> f64 {
    let mut sum = 0.0;
    for iy in 0..spec.ny {
        let wy = trapezoid_weight(iy, spec.ny);
        for ix in 0..spec.nx {
            let wx = trapezoid_weight(ix, spec.nx);
            sum += wx * wy * values[iy * spec.nx + ix].norm_sqr();
        }
    }
    sum * spec.dx() * spec.dy()
}

fn coverage_check(spec: &GridSpec, mean: (f64, f64), sigma: f64) -> Result<()> {
    let need = 6.0 * sigma;
    let ok = mean.0 - spec.x_min >= need
        && spec.x_max - mean.0 >= need
        && mean.1 - spec.y_min >= need
        && spec.y_max - mean.1 >= need;
    if !ok {
        return Err(Error::Config(format!(
            "grid does not cover 6 standard deviations (sigma = {sigma:.4}) around the packet mean ({:.4}, {:.4})",
            mean.0, mean.1
        )));
    }
    Ok(())
}

struct GaussianSpec {
    /// Coefficient of -|z|^2 in the exponent (complex for the drift).
    quad: Complex64,
    /// Coefficient of z.
    a: Complex64,
    /// Coefficient of conj(z).
    b: Complex64,
    /// Complex prefactor carrying normalization and global phase.
    prefactor: Complex64,
}

impl GaussianSpec {
    fn eval(&self, x: f64, y: f64) -> Complex64 {
        let z = Complex64::new(x, y);
        let zb = z.conj();
        (self.prefactor * (-self.quad * (x * x + y * y) + self.a * z + self.b * zb).exp()) as Complex64
    }
}

fn magnet_gaussian(cs: &CoherentStateParams, t: f64, params: &PhysicalParams) -> Result<(GaussianSpec, f64)> {
    let EpsilonDescriptor::Magnet { omega, .. } = cs.epsilon else {
        return Err(Error::Config("magnet wavefunction needs a magnet descriptor".into()));
    };
    if omega <= 0.0 {
        // Reversed-field regions are handled by the mirror map in
        // eval_psi_magnet; this factory is for the positive orientation.
        return Err(Error::Domain("positive cyclotron frequency required here".into()));
    }
    let hbar = params.hbar;
    let m = params.mass;
    let tau = t - cs.t_entry;
    let theta = omega * tau + cs.entry_phase;
    let k = params.charge.sqrt() * m * omega / hbar;
    let a = k * cs.beta;
    let b = Complex64::i() * k * cs.alpha * Complex64::new(0.0, -theta).exp();
    let w = a + b.conj();
    let compensator = -(hbar / (m * omega)) * w.norm_sqr();
    let norm = (m * omega / (2.0 * std::f64::consts::PI * hbar)).sqrt();
    let prefactor = norm
        * (Complex64::new(compensator, 0.0) + Complex64::new(0.0, -0.5 * omega * tau)).exp();
    let spec = GaussianSpec {
        quad: Complex64::new(m * omega / (4.0 * hbar), 0.0),
        a,
        b,
        prefactor,
    };
    let sigma = (hbar / (m * omega)).sqrt();
    Ok((spec, sigma))
}

fn drift_gaussian(cs: &CoherentStateParams, t: f64, params: &PhysicalParams) -> Result<(GaussianSpec, f64)> {
    let EpsilonDescriptor::Drift { c1, c2 } = cs.epsilon else {
        return Err(Error::Config("drift wavefunction needs a drift descriptor".into()));
    };
    let hbar = params.hbar;
    let m = params.mass;
    let e = params.charge;
    let tau = t - cs.t_entry;
    let eps = crate::model::epsilon_drift(tau, c1, params);
    // A nonzero phase constant rotates the eigenvalue convention.
    let rot = Complex64::new(0.0, -c2).exp();
    let alpha = cs.alpha * rot;
    let beta = cs.beta * rot;
    let a = e.sqrt() * beta / (hbar * eps);
    let b = Complex64::i() * e.sqrt() * alpha / (hbar * eps);
    let w = a + b.conj();
    let c = e / (hbar * eps.norm_sqr());
    let compensator = -w.norm_sqr() / (2.0 * c);
    let prefactor = (e / (std::f64::consts::PI * hbar)).sqrt() / eps
        * Complex64::new(compensator, 0.0).exp();
    let spec = GaussianSpec {
        quad: m * c1 / (2.0 * hbar) / eps,
        a,
        b,
        prefactor,
    };
    let sigma = (hbar * eps.norm_sqr() / (2.0 * e)).sqrt();
    Ok((spec, sigma))
}

fn eval_gaussian(spec: &GridSpec, g: &GaussianSpec, t: f64) -> GridField {
    let mut values = Vec::with_capacity(spec.len());
    for iy in 0..spec.ny {
        let y = spec.y(iy);
        for ix in 0..spec.nx {
            values.push(g.eval(spec.x(ix), y));
        }
    }
    let norm_estimate = quadrature_norm(spec, &values);
    GridField { spec: *spec, values, t, norm_estimate }
}

/// Magnet-region wavefunction on a grid. Reversed-field states are evaluated
/// through the mirror map y -> -y of an equivalent positive-field state.
pub fn eval_psi_magnet(
    spec: &GridSpec,
    cs: &CoherentStateParams,
    t: f64,
    params: &PhysicalParams,
) -> Result<GridField> {
    let EpsilonDescriptor::Magnet { omega, field } = cs.epsilon else {
        return Err(Error::Config("magnet wavefunction needs a magnet descriptor".into()));
    };
    if omega > 0.0 {
        let (g, sigma) = magnet_gaussian(cs, t, params)?;
        let mean = mean_of(cs, t, params)?;
        coverage_check(spec, (mean.x, mean.y), sigma)?;
        return Ok(eval_gaussian(spec, &g, t));
    }
    // Mirror map: a reversed-field state equals the positive-field state with
    // conjugated center eigenvalue and reflected arc phase, sampled at -y.
    let mirrored = CoherentStateParams {
        alpha: Complex64::new(cs.alpha.norm(), 0.0),
        beta: cs.beta.conj(),
        epsilon: EpsilonDescriptor::Magnet { omega: -omega, field },
        t_entry: cs.t_entry,
        entry_phase: std::f64::consts::PI - cs.entry_phase + cs.alpha.arg(),
    };
    let (g, sigma) = magnet_gaussian(&mirrored, t, params)?;
    let mean = mean_of(cs, t, params)?;
    coverage_check(spec, (mean.x, mean.y), sigma)?;
    let mut values = Vec::with_capacity(spec.len());
    for iy in 0..spec.ny {
        let y = spec.y(iy);
        for ix in 0..spec.nx {
            values.push(g.eval(spec.x(ix), -y));
        }
    }
    let norm_estimate = quadrature_norm(spec, &values);
    Ok(GridField { spec: *spec, values, t, norm_estimate })
}

/// Field-free wavefunction on a grid, spreading with the drift's oscillator
/// solution.
pub fn eval_psi_drift(
    spec: &GridSpec,
    cs: &CoherentStateParams,
    t: f64,
    params: &PhysicalParams,
) -> Result<GridField> {
    let (g, sigma) = drift_gaussian(cs, t, params)?;
    let mean = mean_of(cs, t, params)?;
    coverage_check(spec, (mean.x, mean.y), sigma)?;
    Ok(eval_gaussian(spec, &g, t))
}

/// Closed-form means for either descriptor without region bounds checking.
fn mean_of(cs: &CoherentStateParams, t: f64, params: &PhysicalParams) -> Result<Means> {
    let tau = t - cs.t_entry;
    match cs.epsilon {
        EpsilonDescriptor::Magnet { omega, .. } => {
            let sqrt_e = params.charge.sqrt();
            let r = 2.0 * sqrt_e * cs.alpha.norm();
            let theta = omega * tau + cs.entry_phase - cs.alpha.arg();
            Ok(Means {
                x: 2.0 * sqrt_e * cs.beta.re + r * theta.sin(),
                y: -2.0 * sqrt_e * cs.beta.im + r * theta.cos(),
                px: params.mass * r * omega * theta.cos(),
                py: -params.mass * r * omega * theta.sin(),
            })
        }
        EpsilonDescriptor::Drift { c1, .. } => {
            let entry = crate::propagators::drift_entry_means(cs, params, c1);
            Ok(Means {
                x: entry.x + entry.px / params.mass * tau,
                y: entry.y + entry.py / params.mass * tau,
                px: entry.px,
                py: entry.py,
            })
        }
    }
}

/// Which linear invariant to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantKind {
    A,
    B,
}

const RESOLUTION_LIMIT: f64 = 0.1;

/// Fourth-order central first derivatives along x and y. The two-cell margin
/// is left at zero; callers integrate against fields that decay well inside
/// the window.
fn derivatives(field: &GridField) -> (Vec<Complex64>, Vec<Complex64>) {
    let spec = &field.spec;
    let (nx, ny) = (spec.nx, spec.ny);
    let inv12dx = 1.0 / (12.0 * spec.dx());
    let inv12dy = 1.0 / (12.0 * spec.dy());
    let mut dxf = vec![Complex64::new(0.0, 0.0); field.values.len()];
    let mut dyf = vec![Complex64::new(0.0, 0.0); field.values.len()];
    let v = &field.values;
    for iy in 2..ny - 2 {
        for ix in 2..nx - 2 {
            let i = iy * nx + ix;
            dxf[i] = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) * inv12dx;
            dyf[i] =
                (-v[i + 2 * nx] + 8.0 * v[i + nx] - 8.0 * v[i - nx] + v[i - 2 * nx]) * inv12dy;
        }
    }
    (dxf, dyf)
}

/// Relative size of the second-order/fourth-order stencil disagreement; a
/// proxy for how far the grid is from resolving the field.
fn resolution_estimate(field: &GridField) -> f64 {
    let spec = &field.spec;
    let (nx, ny) = (spec.nx, spec.ny);
    let v = &field.values;
    let inv2dx = 1.0 / (2.0 * spec.dx());
    let inv12dx = 1.0 / (12.0 * spec.dx());
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for iy in 2..ny - 2 {
        for ix in 2..nx - 2 {
            let i = iy * nx + ix;
            let d4 = (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) * inv12dx;
            let d2 = (v[i + 1] - v[i - 1]) * inv2dx;
            diff += (d4 - d2).norm_sqr();
            scale += d4.norm_sqr();
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        (diff / scale).sqrt()
    }
}

/// Applies one of the region's linear invariants with fourth-order stencils.
pub fn apply_invariant(
    field: &GridField,
    which: InvariantKind,
    cs: &CoherentStateParams,
    t: f64,
    params: &PhysicalParams,
) -> Result<GridField> {
    if (t - field.t).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "field evaluated at t = {} but operator requested at t = {t}",
            field.t
        )));
    }
    let est = resolution_estimate(field);
    if est > RESOLUTION_LIMIT {
        return Err(Error::Resolution { estimate: est, limit: RESOLUTION_LIMIT });
    }
    let (dxf, dyf) = derivatives(field);
    let spec = &field.spec;
    let hbar = params.hbar;
    let m = params.mass;
    let sqrt_e = params.charge.sqrt();
    let tau = t - cs.t_entry;
    let i_unit = Complex64::i();

    let mut values = vec![Complex64::new(0.0, 0.0); field.values.len()];
    match cs.epsilon {
        EpsilonDescriptor::Magnet { omega, .. } => {
            let theta = omega * tau + cs.entry_phase;
            let scale = hbar / (m * omega);
            for iy in 2..spec.ny - 2 {
                let y = spec.y(iy);
                for ix in 2..spec.nx - 2 {
                    let idx = iy * spec.nx + ix;
                    let x = spec.x(ix);
                    let z = Complex64::new(x, y);
                    let f = field.values[idx];
                    values[idx] = match which {
                        InvariantKind::A => {
                            // -i e^{i theta} [ z/2 + (hbar/(m omega)) (dx + i dy) ] / (2 sqrt e)
                            -i_unit * Complex64::new(0.0, theta).exp()
                                * (0.5 * z * f + scale * (dxf[idx] + i_unit * dyf[idx]))
                                / (2.0 * sqrt_e)
                        }
                        InvariantKind::B => {
                            (0.5 * z.conj() * f + scale * (dxf[idx] - i_unit * dyf[idx]))
                                / (2.0 * sqrt_e)
                        }
                    };
                }
            }
        }
        EpsilonDescriptor::Drift { c1, .. } => {
            let eps = crate::model::epsilon_drift(tau, c1, params);
            for iy in 2..spec.ny - 2 {
                let y = spec.y(iy);
                for ix in 2..spec.nx - 2 {
                    let idx = iy * spec.nx + ix;
                    let x = spec.x(ix);
                    let f = field.values[idx];
                    values[idx] = match which {
                        InvariantKind::A => {
                            // [ -i hbar eps (dx + i dy) + m C1 (y - i x) ] / (2 sqrt e)
                            (-i_unit * hbar * eps * (dxf[idx] + i_unit * dyf[idx])
                                + m * c1 * Complex64::new(y, -x) * f)
                                / (2.0 * sqrt_e)
                        }
                        InvariantKind::B => {
                            (hbar * eps * (dxf[idx] - i_unit * dyf[idx])
                                + m * c1 * Complex64::new(x, -y) * f)
                                / (2.0 * sqrt_e)
                        }
                    };
                }
            }
        }
    }
    let norm_estimate = quadrature_norm(spec, &values);
    Ok(GridField { spec: *spec, values, t, norm_estimate })
}

/// Eigenvalue the invariant must reproduce on the state.
pub fn invariant_eigenvalue(cs: &CoherentStateParams, which: InvariantKind) -> Complex64 {
    let rot = match cs.epsilon {
        EpsilonDescriptor::Drift { c2, .. } => Complex64::new(0.0, -c2).exp(),
        EpsilonDescriptor::Magnet { .. } => Complex64::new(1.0, 0.0),
    };
    match which {
        InvariantKind::A => cs.alpha * rot,
        InvariantKind::B => cs.beta * rot,
    }
}

/// Relative L2 residual of the eigenstate property for one invariant:
/// ||(Op - lambda) psi|| / (||psi|| max(1, |lambda|)), interior points only.
pub fn eigenstate_residual(
    field: &GridField,
    which: InvariantKind,
    cs: &CoherentStateParams,
    t: f64,
    params: &PhysicalParams,
) -> Result<f64> {
    let applied = apply_invariant(field, which, cs, t, params)?;
    let lambda = invariant_eigenvalue(cs, which);
    let spec = &field.spec;
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for iy in 2..spec.ny - 2 {
        for ix in 2..spec.nx - 2 {
            let idx = iy * spec.nx + ix;
            num += (applied.values[idx] - lambda * field.values[idx]).norm_sqr();
            den += field.values[idx].norm_sqr();
        }
    }
    Ok((num / den).sqrt() / lambda.norm().max(1.0))
}

/// Quadrature moments of a normalized field with canonical momentum
/// operators -i hbar d/dx, -i hbar d/dy. In the drift these are the kinetic
/// momenta; in the magnet they are the per-region bookkeeping set whose
/// second moments are continuous across stitched boundaries.
pub fn grid_moments(field: &GridField, params: &PhysicalParams) -> Result<MomentState> {
    grid_moments_with_gauge(field, params, 0.0)
}

/// Quadrature moments with kinetic momentum operators pi = p - eA in the
/// symmetric gauge of a magnet with signed cyclotron frequency `omega`.
pub fn grid_moments_kinetic(
    field: &GridField,
    params: &PhysicalParams,
    omega: f64,
) -> Result<MomentState> {
    grid_moments_with_gauge(field, params, omega)
}

fn grid_moments_with_gauge(
    field: &GridField,
    params: &PhysicalParams,
    omega: f64,
) -> Result<MomentState> {
    let norm = field.norm_estimate;
    if (norm - 1.0).abs() > 1e-4 {
        return Err(Error::Accuracy {
            what: "field normalization before moments",
            defect: (norm - 1.0).abs(),
            tolerance: 1e-4,
        });
    }
    let spec = &field.spec;
    let (dxf, dyf) = derivatives(field);
    let hbar = params.hbar;
    let half_m_omega = 0.5 * params.mass * omega;
    let da = spec.dx() * spec.dy();

    // Momentum-operator fields.
    let mut px_f = vec![Complex64::new(0.0, 0.0); field.values.len()];
    let mut py_f = vec![Complex64::new(0.0, 0.0); field.values.len()];
    for iy in 0..spec.ny {
        let y = spec.y(iy);
        for ix in 0..spec.nx {
            let idx = iy * spec.nx + ix;
            let x = spec.x(ix);
            let f = field.values[idx];
            px_f[idx] = -Complex64::i() * hbar * dxf[idx] + half_m_omega * y * f;
            py_f[idx] = -Complex64::i() * hbar * dyf[idx] - half_m_omega * x * f;
        }
    }

    let mut w = vec![0.0f64; field.values.len()];
    for iy in 0..spec.ny {
        let wy = trapezoid_weight(iy, spec.ny);
        for ix in 0..spec.nx {
            w[iy * spec.nx + ix] = wy * trapezoid_weight(ix, spec.nx) * da;
        }
    }

    // First moments.
    let mut mean = [0.0f64; 4];
    for iy in 0..spec.ny {
        let y = spec.y(iy);
        for ix in 0..spec.nx {
            let idx = iy * spec.nx + ix;
            let x = spec.x(ix);
            let rho = field.values[idx].norm_sqr() * w[idx];
            mean[0] += x * rho;
            mean[1] += y * rho;
            let bra = field.values[idx].conj() * w[idx];
            mean[2] += (bra * px_f[idx]).re;
            mean[3] += (bra * py_f[idx]).re;
        }
    }
    for v in &mut mean {
        *v /= norm;
    }

    // Second moments about the means; operator products via the self-adjoint
    // pairing <A psi | B psi>.
    let mut cov = Matrix4::zeros();
    for iy in 0..spec.ny {
        let y = spec.y(iy) - mean[1];
        for ix in 0..spec.nx {
            let idx = iy * spec.nx + ix;
            let x = spec.x(ix) - mean[0];
            let f = field.values[idx];
            let dpx = px_f[idx] - mean[2] * f;
            let dpy = py_f[idx] - mean[3] * f;
            let rho = f.norm_sqr() * w[idx];
            cov[(0, 0)] += x * x * rho;
            cov[(1, 1)] += y * y * rho;
            cov[(0, 1)] += x * y * rho;
            let bra = f.conj() * w[idx];
            cov[(0, 2)] += (x * bra * dpx).re;
            cov[(0, 3)] += (x * bra * dpy).re;
            cov[(1, 2)] += (y * bra * dpx).re;
            cov[(1, 3)] += (y * bra * dpy).re;
            cov[(2, 2)] += dpx.norm_sqr() * w[idx];
            cov[(3, 3)] += dpy.norm_sqr() * w[idx];
            cov[(2, 3)] += (dpx.conj() * dpy).re * w[idx];
        }
    }
    cov /= norm;
    for i in 0..4 {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }

    Ok(MomentState {
        t: field.t,
        mean_x: mean[0],
        mean_y: mean[1],
        mean_px: mean[2],
        mean_py: mean[3],
        var_x: cov[(0, 0)],
        var_y: cov[(1, 1)],
        var_px: cov[(2, 2)],
        var_py: cov[(3, 3)],
        cov_xpx: cov[(0, 2)],
        cov_ypy: cov[(1, 3)],
        full_cov: Some(cov),
    })
}
