//! Independent checks on a reconstructed field.
//!
//! * the separation-of-variables solution of the linearized problem `q_xx + q_yy = q`
//! * the five-point residual of `q_xx + q_yy = sin q`
//! * boundary values recovered by quadratic extrapolation
//! * a spectral round trip: traces extracted from the field, their spectral functions,
//!   and the global relations and side identities they must satisfy

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linearizable::{relation_audit, LinearizableSpectrum, RelationAudit};
use crate::params::{PhysicalPoint, ProblemParams};
use crate::reconstruct::SolutionField;
use crate::volterra::{
    global_relation_residual, unit_determinant_residual, BoundarySideData, Side, SpectralPair,
    VolterraConfig,
};

/// Truncated sine series for the linearized problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSeries {
    pub d: f64,
    pub width: f64,
    /// Highest mode index kept (only odd modes contribute).
    pub n_terms: usize,
}

impl OracleSeries {
    pub fn new(d: f64, width: f64, n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::Config("n_terms must be at least 1".into()));
        }
        if !(width > 0.0 && width.is_finite() && d.is_finite()) {
            return Err(Error::Config(format!("invalid oracle parameters d = {d}, L = {width}")));
        }
        Ok(Self { d, width, n_terms })
    }

    /// Decay rate `sqrt(1 + (n pi / L)^2)` of mode `n`.
    pub fn kappa(&self, n: usize) -> f64 {
        (1.0 + (n as f64 * PI / self.width).powi(2)).sqrt()
    }

    fn modes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (1..=self.n_terms).step_by(2).map(move |n| {
            let k = n as f64 * PI / self.width;
            (4.0 * self.d / (n as f64 * PI), k, self.kappa(n))
        })
    }
}

/// `q(x, y)` of the linearized problem.
pub fn linear_oracle(p: &PhysicalPoint, oracle: &OracleSeries) -> f64 {
    oracle
        .modes()
        .map(|(c, k, kappa)| c * (k * p.y).sin() * (-kappa * p.x).exp())
        .sum()
}

/// `(q_x, q_y)` of the linearized problem.
pub fn linear_oracle_gradient(p: &PhysicalPoint, oracle: &OracleSeries) -> (f64, f64) {
    oracle.modes().fold((0.0, 0.0), |(gx, gy), (c, k, kappa)| {
        let e = (-kappa * p.x).exp();
        (
            gx - c * kappa * (k * p.y).sin() * e,
            gy + c * k * (k * p.y).cos() * e,
        )
    })
}

fn uniform_spacing(v: &[f64], what: &str) -> Result<f64> {
    if v.len() < 2 {
        return Err(Error::Grid(format!("{what} needs at least 2 points")));
    }
    let h = v[1] - v[0];
    if !(h > 0.0) || v.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0)) {
        return Err(Error::Grid(format!("{what} is not uniformly spaced")));
    }
    Ok(h)
}

/// Max over interior grid points of `|Laplacian_5 q - sin q|`.
pub fn pde_residual(field: &SolutionField) -> Result<f64> {
    let (nx, ny) = (field.xs.len(), field.ys.len());
    if nx < 3 || ny < 3 {
        return Err(Error::Grid(format!("need at least 3x3 points, got {nx}x{ny}")));
    }
    let hx = uniform_spacing(&field.xs, "x grid")?;
    let hy = uniform_spacing(&field.ys, "y grid")?;
    let mut worst: f64 = 0.0;
    for ix in 1..nx - 1 {
        for iy in 1..ny - 1 {
            let c = field.at(ix, iy);
            let lap = (field.at(ix + 1, iy) - 2.0 * c + field.at(ix - 1, iy)) / (hx * hx)
                + (field.at(ix, iy + 1) - 2.0 * c + field.at(ix, iy - 1)) / (hy * hy);
            let r = (lap - c.sin()).abs();
            if r.is_nan() {
                return Err(Error::Grid(format!(
                    "missing value near ({}, {})",
                    field.xs[ix], field.ys[iy]
                )));
            }
            worst = worst.max(r);
        }
    }
    Ok(worst)
}

/// Maximum deviation from the prescribed boundary values on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BcRecovery {
    /// `y = L`, target 0.
    pub side1: f64,
    /// `x = 0`, target `d`.
    pub side2: f64,
    /// `y = 0`, target 0.
    pub side3: f64,
}

/// Rows or columns nearest a corner that are left out of the maxima.
pub const CORNER_EXCLUSION: usize = 2;

fn extrapolate_quadratic(t: [f64; 3], f: [f64; 3], at: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= (at - t[j]) / (t[i] - t[j]);
            }
        }
        acc += w * f[i];
    }
    acc
}

/// Extrapolate `q` to the three sides and compare with the boundary conditions.
pub fn bc_recovery(field: &SolutionField, params: &ProblemParams) -> Result<BcRecovery> {
    let (nx, ny) = (field.xs.len(), field.ys.len());
    if nx < 3 || ny < 3 {
        return Err(Error::Grid(format!("need at least 3x3 points, got {nx}x{ny}")));
    }
    let hx = uniform_spacing(&field.xs, "x grid")?;
    let hy = uniform_spacing(&field.ys, "y grid")?;
    let width = params.width;
    if field.xs[0] > 3.0 * hx + 1e-12 {
        return Err(Error::Grid(format!(
            "first column x = {} is more than 3 spacings from x = 0",
            field.xs[0]
        )));
    }
    if field.ys[0] > 3.0 * hy + 1e-12 || width - field.ys[ny - 1] > 3.0 * hy + 1e-12 {
        return Err(Error::Grid("outer rows are more than 3 spacings from y = 0 or y = L".into()));
    }
    if nx <= CORNER_EXCLUSION || ny <= 2 * CORNER_EXCLUSION {
        return Err(Error::Grid("grid too small once corner cells are excluded".into()));
    }
    let (mut s1, mut s2, mut s3): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for ix in CORNER_EXCLUSION..nx {
        let lo = [field.ys[0], field.ys[1], field.ys[2]];
        let flo = [field.at(ix, 0), field.at(ix, 1), field.at(ix, 2)];
        s3 = s3.max(extrapolate_quadratic(lo, flo, 0.0).abs());
        let hi = [field.ys[ny - 1], field.ys[ny - 2], field.ys[ny - 3]];
        let fhi = [field.at(ix, ny - 1), field.at(ix, ny - 2), field.at(ix, ny - 3)];
        s1 = s1.max(extrapolate_quadratic(hi, fhi, width).abs());
    }
    for iy in CORNER_EXCLUSION..ny - CORNER_EXCLUSION {
        let t = [field.xs[0], field.xs[1], field.xs[2]];
        let f = [field.at(0, iy), field.at(1, iy), field.at(2, iy)];
        s2 = s2.max((extrapolate_quadratic(t, f, 0.0) - params.d).abs());
    }
    if !(s1.is_finite() && s2.is_finite() && s3.is_finite()) {
        return Err(Error::Grid("field has missing values".into()));
    }
    Ok(BcRecovery {
        side1: s1,
        side2: s2,
        side3: s3,
    })
}

/// Derivative at `at` of the interpolant through `(t, f)`.
fn lagrange_slope(t: &[f64], f: &[f64], at: f64) -> f64 {
    let n = t.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut denom = 1.0;
        let mut num = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            denom *= t[i] - t[j];
            let mut prod = 1.0;
            for k in 0..n {
                if k != i && k != j {
                    prod *= at - t[k];
                }
            }
            num += prod;
        }
        acc += f[i] * num / denom;
    }
    acc
}

/// Number of interior samples used by the one-sided normal-derivative stencil.
pub const STENCIL_DEPTH: usize = 4;

/// Settings of the spectral round trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripOptions {
    pub volterra: VolterraConfig,
    /// Samples in the closed upper half plane for the global relations.
    pub upper_samples: Vec<(f64, f64)>,
    /// Real samples for the side identities.
    pub real_samples: Vec<f64>,
    pub traces: TraceOptions,
}

impl Default for RoundTripOptions {
    fn default() -> Self {
        Self {
            volterra: VolterraConfig::default(),
            upper_samples: vec![(0.5, 0.5), (1.0, 0.5), (1.5, 1.0), (0.8, 1.5), (-0.7, 0.6), (0.0, 1.0)],
            real_samples: vec![0.3, 0.5, 0.8, 1.25, 2.0, 3.0],
            traces: TraceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundTripReport {
    /// First global relation.
    pub global1: f64,
    /// Second global relation.
    pub global2: f64,
    pub relations: RelationAudit,
    /// Unit-determinant residual of sides 1, 2, 3 on the real samples.
    pub determinant: [f64; 3],
}

impl RoundTripReport {
    /// Largest of the two global relations and the side-1 identity.
    pub fn headline(&self) -> f64 {
        self.global1.max(self.global2).max(self.relations.rel1)
    }
}

/// How boundary traces are assembled from a field.
///
/// The data jump from `d` to 0 at the corners `(0, 0)` and `(0, L)`, so the normal
/// derivatives blow up like the inverse distance to the corner and each side's spectral
/// functions diverge logarithmically. The traces are cut off at the same distance `cutoff`
/// from each corner on every side, and the jump itself is carried by a layer of length
/// `cutoff` at both ends of side 2 in which `q` ramps linearly with zero normal derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub cutoff: f64,
    /// Ratio of consecutive nodes between the cutoff and the first grid line.
    pub grading: f64,
    /// Continue the horizontal traces past the grid with the slowest decaying mode.
    pub tail_extension: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            cutoff: 1e-7,
            grading: 1.05,
            tail_extension: true,
        }
    }
}

/// Fraction of the corner layer over which the normal derivative switches on.
const LAYER_EDGE: f64 = 1e-4;

/// Harmonic function with the problem's boundary values: `d` on `x = 0`, zero on `y = 0`
/// and `y = L`.
pub fn corner_field(x: f64, y: f64, params: &ProblemParams) -> f64 {
    let k = PI / params.width;
    2.0 * params.d / PI * (k * y).sin().atan2((k * x).sinh())
}

/// `(q_y(x, 0), q_y(x, L))` of [`corner_field`].
fn corner_field_dy(x: f64, params: &ProblemParams) -> (f64, f64) {
    let v = 2.0 * params.d / params.width / (PI * x / params.width).sinh();
    (v, -v)
}

/// `q_x(0, y)` of [`corner_field`].
fn corner_field_dx(y: f64, params: &ProblemParams) -> f64 {
    -2.0 * params.d / params.width / (PI * y / params.width).sin()
}

/// Points `a, a r, a r^2, ...` strictly below `b`, with `r <= ratio`.
fn geometric(a: f64, b: f64, ratio: f64) -> Vec<f64> {
    if a >= b {
        return Vec::new();
    }
    let n = ((b / a).ln() / ratio.ln()).ceil().max(1.0) as usize;
    let r = (b / a).powf(1.0 / n as f64);
    (0..n).map(|k| a * r.powi(k as i32)).collect()
}

/// Cubic through `(0, 0)` and three samples, evaluated at `at`.
fn from_corner(t: [f64; 3], f: [f64; 3], at: f64) -> f64 {
    let ts = [0.0, t[0], t[1], t[2]];
    let fs = [0.0, f[0], f[1], f[2]];
    let mut acc = 0.0;
    for i in 1..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (at - ts[j]) / (ts[i] - ts[j]);
            }
        }
        acc += w * fs[i];
    }
    acc
}

/// Boundary traces of a field.
///
/// The harmonic [`corner_field`] is subtracted first; the remainder vanishes on all three
/// sides and is smooth enough at the corners for one-sided stencils. Its normal derivatives
/// go to zero at the corners and are interpolated there; the corner field's own normal
/// derivatives are added back in closed form.
pub fn extract_traces(
    field: &SolutionField,
    params: &ProblemParams,
    opts: &TraceOptions,
) -> Result<[BoundarySideData; 3]> {
    let (nx, ny) = (field.xs.len(), field.ys.len());
    if nx < STENCIL_DEPTH + 1 || ny < 2 * STENCIL_DEPTH {
        return Err(Error::Grid(format!(
            "round trip needs at least {}x{} points, got {nx}x{ny}",
            STENCIL_DEPTH + 1,
            2 * STENCIL_DEPTH
        )));
    }
    if field.q.iter().any(|v| !v.is_finite()) {
        return Err(Error::Grid("field has missing values".into()));
    }
    let eps = opts.cutoff;
    if !(eps > 0.0 && eps < 0.1 * field.xs[0].min(field.ys[0]).min(params.width - field.ys[ny - 1])) {
        return Err(Error::Config(format!("corner cutoff {eps} must be positive and well inside the grid margin")));
    }
    if !(opts.grading > 1.0 && opts.grading < 2.0) {
        return Err(Error::Config(format!("grading {} must lie in (1, 2)", opts.grading)));
    }
    let width = params.width;
    let k = STENCIL_DEPTH;
    let rem = |ix: usize, iy: usize| field.at(ix, iy) - corner_field(field.xs[ix], field.ys[iy], params);

    let mut top = Vec::with_capacity(nx);
    let mut bottom = Vec::with_capacity(nx);
    for ix in 0..nx {
        let mut t = vec![width];
        let mut f = vec![0.0];
        for j in 0..k {
            t.push(field.ys[ny - 1 - j]);
            f.push(rem(ix, ny - 1 - j));
        }
        top.push(lagrange_slope(&t, &f, width));
        let mut t = vec![0.0];
        let mut f = vec![0.0];
        for j in 0..k {
            t.push(field.ys[j]);
            f.push(rem(ix, j));
        }
        bottom.push(lagrange_slope(&t, &f, 0.0));
    }
    let mut left = Vec::with_capacity(ny);
    for iy in 0..ny {
        let mut t = vec![0.0];
        let mut f = vec![0.0];
        for j in 0..k {
            t.push(field.xs[j]);
            f.push(rem(j, iy));
        }
        left.push(lagrange_slope(&t, &f, 0.0));
    }

    let kappa = (1.0 + (PI / width).powi(2)).sqrt();
    let xs = &field.xs;
    let horizontal = |side: Side, rn: &[f64]| -> Result<BoundarySideData> {
        let sing = |x: f64| {
            let (b, t) = corner_field_dy(x, params);
            if side == Side::Side3 {
                b
            } else {
                t
            }
        };
        let mut phys = Vec::new();
        let mut neu = Vec::new();
        for x in geometric(eps, xs[0], opts.grading) {
            phys.push(x);
            neu.push(sing(x) + from_corner([xs[0], xs[1], xs[2]], [rn[0], rn[1], rn[2]], x));
        }
        for (i, &x) in xs.iter().enumerate() {
            phys.push(x);
            neu.push(sing(x) + rn[i]);
        }
        if opts.tail_extension {
            let last = *neu.last().expect("non-empty");
            let x_last = *phys.last().expect("non-empty");
            let h = xs[1] - xs[0];
            if last.abs() > 1e-14 {
                let steps = ((last.abs() / 1e-14).ln() / kappa / h).ceil() as usize;
                for s in 1..=steps {
                    let x = x_last + s as f64 * h;
                    phys.push(x);
                    neu.push(last * (-kappa * (x - x_last)).exp());
                }
            }
        }
        let nodes: Vec<f64> = phys.iter().map(|x| x - eps).collect();
        let n = nodes.len();
        BoundarySideData::new(side, nodes, vec![0.0; n], neu)
    };
    let side1 = horizontal(Side::Side1, &top)?;
    let side3 = horizontal(Side::Side3, &bottom)?;

    let ys = &field.ys;
    let d = params.d;
    let mut nodes = vec![0.0, 0.5 * eps, (1.0 - LAYER_EDGE) * eps];
    let mut dir: Vec<f64> = nodes.iter().map(|t| d * t / eps).collect();
    let mut neu = vec![0.0; 3];
    for y in geometric(eps, ys[0], opts.grading) {
        nodes.push(y);
        dir.push(d);
        neu.push(corner_field_dx(y, params) + from_corner([ys[0], ys[1], ys[2]], [left[0], left[1], left[2]], y));
    }
    for (i, &y) in ys.iter().enumerate() {
        nodes.push(y);
        dir.push(d);
        neu.push(corner_field_dx(y, params) + left[i]);
    }
    let top_gap = geometric(eps, width - ys[ny - 1], opts.grading);
    for &s in top_gap.iter().rev() {
        let y = width - s;
        nodes.push(y);
        dir.push(d);
        let rn = from_corner(
            [width - ys[ny - 1], width - ys[ny - 2], width - ys[ny - 3]],
            [left[ny - 1], left[ny - 2], left[ny - 3]],
            s,
        );
        neu.push(corner_field_dx(y, params) + rn);
    }
    for t in [width - (1.0 - LAYER_EDGE) * eps, width - 0.5 * eps, width] {
        nodes.push(t);
        dir.push(d * (width - t) / eps);
        neu.push(0.0);
    }
    let side2 = BoundarySideData::new(Side::Side2, nodes, dir, neu)?;
    Ok([side1, side2, side3])
}

/// Spectral functions of the field's traces checked against the global relations and
/// the side identities.
pub fn spectral_roundtrip(
    field: &SolutionField,
    spec: &LinearizableSpectrum,
    params: &ProblemParams,
    opts: &RoundTripOptions,
) -> Result<RoundTripReport> {
    let [s1, s2, s3] = extract_traces(field, params, &opts.traces)?;
    let pair = |d: BoundarySideData| SpectralPair::from_boundary(d, *params, opts.volterra);
    let (p1, p2, p3) = (pair(s1), pair(s2), pair(s3));
    spectral_roundtrip_pairs(&p1, &p2, &p3, spec, params, opts)
}

/// The round-trip checks for given spectral pairs.
pub fn spectral_roundtrip_pairs(
    p1: &SpectralPair,
    p2: &SpectralPair,
    p3: &SpectralPair,
    spec: &LinearizableSpectrum,
    params: &ProblemParams,
    opts: &RoundTripOptions,
) -> Result<RoundTripReport> {
    let upper: Vec<Complex64> = opts
        .upper_samples
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect();
    let real: Vec<Complex64> = opts.real_samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let (global1, global2) = global_relation_residual(p1, p2, p3, params, &upper)?;
    let relations = relation_audit(p1, p3, spec, &opts.real_samples)?;
    let determinant = [
        unit_determinant_residual(p1, &real)?,
        unit_determinant_residual(p2, &real)?,
        unit_determinant_residual(p3, &real)?,
    ];
    Ok(RoundTripReport {
        global1,
        global2,
        relations,
        determinant,
    })
}

/// One named check with its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
        }
    }
}

/// All checks of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Thresholds applied by [`verification_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub route_gap: f64,
    pub pde_residual: f64,
    /// Multiplied by `max(|d|, 1)`.
    pub boundary: f64,
    /// Multiplied by `|d|`; only applied while `|d| <= oracle_regime`.
    pub oracle: f64,
    pub oracle_regime: f64,
    pub round_trip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            route_gap: 1e-4,
            pde_residual: 1e-2,
            boundary: 1e-3,
            oracle: 5e-3,
            oracle_regime: 0.05,
            round_trip: 5e-4,
        }
    }
}

/// Max over the grid of `|q - oracle|`.
pub fn oracle_distance(field: &SolutionField, oracle: &OracleSeries) -> f64 {
    let mut worst: f64 = 0.0;
    for (ix, &x) in field.xs.iter().enumerate() {
        for (iy, &y) in field.ys.iter().enumerate() {
            let diff = (field.at(ix, iy) - linear_oracle(&PhysicalPoint { x, y }, oracle)).abs();
            worst = if diff.is_nan() { f64::NAN } else { worst.max(diff) };
        }
    }
    worst
}

/// Every check that applies to `field`; checks the grid cannot support become notes.
pub fn verification_report(
    field: &SolutionField,
    spec: &LinearizableSpectrum,
    oracle: &OracleSeries,
    tol: &Tolerances,
) -> VerificationReport {
    let params = *spec.params();
    let mut report = VerificationReport::default();
    report.push(Check::new("failed_points", field.failures.len() as f64, 0.0));
    report.push(Check::new("route_gap", field.route_gap(), tol.route_gap));
    match pde_residual(field) {
        Ok(r) => report.push(Check::new("pde_residual", r, tol.pde_residual)),
        Err(e) => report.notes.push(format!("pde_residual skipped: {e}")),
    }
    let bound = tol.boundary * params.d.abs().max(1.0);
    match bc_recovery(field, &params) {
        Ok(bc) => {
            report.push(Check::new("boundary_side1", bc.side1, bound));
            report.push(Check::new("boundary_side2", bc.side2, bound));
            report.push(Check::new("boundary_side3", bc.side3, bound));
        }
        Err(e) => report.notes.push(format!("boundary recovery skipped: {e}")),
    }
    if params.d.abs() <= tol.oracle_regime {
        let bound = (tol.oracle * params.d.abs()).max(1e-12);
        report.push(Check::new("oracle_distance", oracle_distance(field, oracle), bound));
    } else {
        report.notes.push(format!(
            "oracle comparison skipped: |d| = {} is outside the linear regime",
            params.d.abs()
        ));
    }
    if field.is_partial() {
        report.notes.push("spectral round trip skipped: field has failed points".into());
    } else {
        match spectral_roundtrip(field, spec, &params, &RoundTripOptions::default()) {
            Ok(r) => {
                report.push(Check::new("global_relation_1", r.global1, tol.round_trip));
                report.push(Check::new("global_relation_2", r.global2, tol.round_trip));
                report.push(Check::new("side1_identity", r.relations.rel1, tol.round_trip));
            }
            Err(e) => report.notes.push(format!("spectral round trip skipped: {e}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(x0: f64, x1: f64, nx: usize, y0: f64, y1: f64, ny: usize) -> (Vec<f64>, Vec<f64>) {
        let lin = |a: f64, b: f64, n: usize| (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        (lin(x0, x1, nx), lin(y0, y1, ny))
    }

    #[test]
    fn oracle_basics() {
        let o = OracleSeries::new(0.001, 1.0, 25).unwrap();
        let v = linear_oracle(&PhysicalPoint { x: 0.5, y: 0.5 }, &o);
        assert!((v - 2.412_852e-4).abs() < 1e-9, "{v}");
        assert_eq!(linear_oracle(&PhysicalPoint { x: 0.5, y: 0.0 }, &o), 0.0);
        assert!(linear_oracle(&PhysicalPoint { x: 0.5, y: 1.0 }, &o).abs() < 1e-18);
        assert!(linear_oracle(&PhysicalPoint { x: 40.0, y: 0.5 }, &o).abs() < 1e-20);
        assert!(OracleSeries::new(0.1, 1.0, 0).is_err());
    }

    #[test]
    fn oracle_modes_satisfy_the_linear_pde() {
        let o = OracleSeries::new(1.0, 1.7, 41).unwrap();
        for n in (1..=41).step_by(2) {
            let k = n as f64 * PI / o.width;
            assert!((o.kappa(n).powi(2) - (1.0 + k * k)).abs() < 1e-12 * (1.0 + k * k));
        }
    }

    #[test]
    fn oracle_gradient_matches_differences() {
        let o = OracleSeries::new(0.01, 1.0, 101).unwrap();
        let p = PhysicalPoint { x: 0.5, y: 0.3 };
        let (gx, gy) = linear_oracle_gradient(&p, &o);
        let h = 1e-5;
        let f = |x: f64, y: f64| linear_oracle(&PhysicalPoint { x, y }, &o);
        assert!((gx - (f(0.5 + h, 0.3) - f(0.5 - h, 0.3)) / (2.0 * h)).abs() < 1e-9);
        assert!((gy - (f(0.5, 0.3 + h) - f(0.5, 0.3 - h)) / (2.0 * h)).abs() < 1e-9);
    }

    /// Gauss-Seidel SOR for `q_xx + q_yy = q` on `[0, X] x [0, L]`.
    fn finite_difference_solve(d: f64, width: f64, x_end: f64, h: f64) -> (Vec<Vec<f64>>, f64) {
        let nx = (x_end / h).round() as usize;
        let ny = (width / h).round() as usize;
        let mut u = vec![vec![0.0; ny + 1]; nx + 1];
        for j in 1..ny {
            u[0][j] = d;
        }
        let omega = 1.9;
        for _ in 0..20_000 {
            let mut change: f64 = 0.0;
            for i in 1..nx {
                for j in 1..ny {
                    let gs = (u[i + 1][j] + u[i - 1][j] + u[i][j + 1] + u[i][j - 1]) / (4.0 + h * h);
                    let new = u[i][j] + omega * (gs - u[i][j]);
                    change = change.max((new - u[i][j]).abs());
                    u[i][j] = new;
                }
            }
            if change < 1e-15 {
                break;
            }
        }
        (u, h)
    }

    #[test]
    fn oracle_agrees_with_finite_differences() {
        let d = 0.001;
        let (u, h) = finite_difference_solve(d, 1.0, 4.0, 1.0 / 40.0);
        let o = OracleSeries::new(d, 1.0, 401).unwrap();
        let fd = u[20][20];
        let series = linear_oracle(&PhysicalPoint { x: 20.0 * h, y: 20.0 * h }, &o);
        assert!(((fd - series) / series).abs() < 1e-3, "{fd} vs {series}");
    }

    #[test]
    fn zero_field_checks() {
        let p = ProblemParams::new(0.0, 1.0).unwrap();
        let (xs, ys) = grid(0.2, 2.0, 10, 0.1, 0.9, 9);
        let f = SolutionField::from_fn(p, xs, ys, |_, _| 0.0);
        assert_eq!(pde_residual(&f).unwrap(), 0.0);
        let bc = bc_recovery(&f, &p).unwrap();
        assert_eq!((bc.side1, bc.side2, bc.side3), (0.0, 0.0, 0.0));
    }

    #[test]
    fn non_uniform_grid_rejected() {
        let p = ProblemParams::new(0.0, 1.0).unwrap();
        let f = SolutionField::from_fn(p, vec![0.1, 0.2, 0.4], vec![0.1, 0.2, 0.3], |_, _| 0.0);
        assert!(matches!(pde_residual(&f), Err(Error::Grid(_))));
    }

    #[test]
    fn far_grid_rejected_for_extrapolation() {
        let p = ProblemParams::new(0.0, 1.0).unwrap();
        let (xs, ys) = grid(1.0, 2.0, 6, 0.1, 0.9, 9);
        let f = SolutionField::from_fn(p, xs, ys, |_, _| 0.0);
        assert!(matches!(bc_recovery(&f, &p), Err(Error::Grid(_))));
    }

    fn oracle_field(d: f64, nx: usize, ny: usize) -> (ProblemParams, SolutionField) {
        let p = ProblemParams::new(d, 1.0).unwrap();
        let o = OracleSeries::new(d, 1.0, 4001).unwrap();
        let (xs, ys) = grid(0.2, 2.0, nx, 0.1, 0.9, ny);
        (p, SolutionField::from_fn(p, xs, ys, |x, y| linear_oracle(&PhysicalPoint { x, y }, &o)))
    }

    #[test]
    fn oracle_field_residual_is_second_order() {
        let d = 0.001;
        let o = OracleSeries::new(d, 1.0, 2001).unwrap();
        let p = ProblemParams::new(d, 1.0).unwrap();
        let make = |n: usize| {
            let (xs, ys) = grid(0.5, 1.5, n, 0.25, 0.75, n);
            SolutionField::from_fn(p, xs, ys, |x, y| linear_oracle(&PhysicalPoint { x, y }, &o))
        };
        let coarse = pde_residual(&make(21)).unwrap();
        let fine = pde_residual(&make(41)).unwrap();
        assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
    }

    #[test]
    fn corner_field_is_harmonic_with_the_boundary_values() {
        let p = ProblemParams::new(0.3, 1.5).unwrap();
        assert!((corner_field(1e-9, 0.7, &p) - 0.3).abs() < 1e-8);
        assert_eq!(corner_field(0.4, 0.0, &p), 0.0);
        assert!(corner_field(0.4, 1.5, &p).abs() < 1e-15);
        let h = 1e-3;
        let (x, y) = (0.3, 0.4);
        let lap = (corner_field(x + h, y, &p) + corner_field(x - h, y, &p) + corner_field(x, y + h, &p)
            + corner_field(x, y - h, &p)
            - 4.0 * corner_field(x, y, &p))
            / (h * h);
        assert!(lap.abs() < 1e-5, "{lap}");
        let (bottom, top) = corner_field_dy(0.4, &p);
        assert!((bottom - corner_field(0.4, h, &p) / h).abs() < 1e-3);
        assert_eq!(top, -bottom);
        let dx = (corner_field(h, 0.7, &p) - 0.3) / h;
        assert!((corner_field_dx(0.7, &p) - dx).abs() < 1e-3);
    }

    #[test]
    fn geometric_nodes_cover_the_gap() {
        let g = geometric(1e-6, 0.1, 1.05);
        assert_eq!(g[0], 1e-6);
        assert!(*g.last().unwrap() < 0.1 && g.windows(2).all(|w| w[1] / w[0] <= 1.05 + 1e-12));
        assert!(geometric(0.2, 0.1, 1.05).is_empty());
    }

    #[test]
    fn oracle_field_round_trip_is_small_and_converges() {
        let run = |nx: usize, ny: usize| {
            let (p, f) = oracle_field(0.01, nx, ny);
            let spec = LinearizableSpectrum::new(p, crate::linearizable::HQuadrature::default()).unwrap();
            spectral_roundtrip(&f, &spec, &p, &RoundTripOptions::default()).unwrap()
        };
        let coarse = run(10, 9);
        let fine = run(19, 17);
        assert!(coarse.headline() < 1e-4, "{coarse:?}");
        assert!(fine.global2 < coarse.global2 && fine.relations.rel1 < coarse.relations.rel1);
        assert!(coarse.determinant.iter().all(|&r| r < 1e-8), "{:?}", coarse.determinant);
    }

    #[test]
    fn trace_options_validated() {
        let (p, f) = oracle_field(0.01, 10, 9);
        let bad = TraceOptions { cutoff: 0.05, ..TraceOptions::default() };
        assert!(matches!(extract_traces(&f, &p, &bad), Err(Error::Config(_))));
        let bad = TraceOptions { grading: 1.0, ..TraceOptions::default() };
        assert!(matches!(extract_traces(&f, &p, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn oracle_field_recovers_boundary_values() {
        let (p, f) = oracle_field(0.01, 10, 9);
        let bc = bc_recovery(&f, &p).unwrap();
        assert!(bc.side1 <= 1e-3 && bc.side2 <= 1e-3 && bc.side3 <= 1e-3, "{bc:?}");
    }
}
