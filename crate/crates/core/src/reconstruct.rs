//! Recovery of `q(x, y)` from RH solutions, and grid sweeps.
//!
//! Two independent routes:
//!
//! * `l -> 0`: `Psi(0) = [[cos q/2, i sin q/2], [i sin q/2, cos q/2]]`. `Psi` is evaluated
//!   at two small off-contour probes and Richardson-extrapolated.
//! * `l -> inf`: `q_x - i q_y = 2 Psi*_21` and `cos q = 1 + 4i (Psi*_x)_11 + 2 (Psi*_21)^2`.
//!   The sign of `q` is taken from the first route.

use std::f64::consts::FRAC_PI_4;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::contour::ContourDiscretization;
use crate::error::{Error, Result};
use crate::params::{PhysicalPoint, ProblemParams};
use crate::rh::{solve_rh, RHSolution, SolverOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `q_x - i q_y` at the solution's point.
pub fn q_derivative_combo(sol: &RHSolution) -> Complex64 {
    2.0 * sol.psi_star.get(1, 0)
}

/// Placement of the two probes used for the `l -> 0` limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Outer probe radius as a fraction of `r_min`; the inner probe sits at half of it.
    pub radius_factor: f64,
    /// Argument of the probes, inside the first quadrant.
    pub angle: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            radius_factor: 0.1,
            angle: FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaZeroEstimate {
    pub q: f64,
    pub cos_half: f64,
    pub sin_half: f64,
    /// Largest imaginary part discarded from the real entries of `Psi(0)`.
    pub imag_leak: f64,
}

/// `q` from the `l -> 0` limit of `Psi`.
pub fn q_from_lambda_zero(
    p: &PhysicalPoint,
    disc: &ContourDiscretization,
    sol: &RHSolution,
    probe: &ProbeConfig,
) -> Result<LambdaZeroEstimate> {
    if sol.point != *p {
        return Err(Error::Config("solution belongs to a different point".into()));
    }
    if !(probe.radius_factor > 0.0 && probe.angle > 0.0 && probe.angle < 0.5 * std::f64::consts::PI) {
        return Err(Error::Config(format!("invalid probe {probe:?}")));
    }
    let r = probe.radius_factor * disc.spec().r_min;
    let dir = Complex64::from_polar(1.0, probe.angle);
    let outer = sol.psi_at(disc, dir * r)?;
    let inner = sol.psi_at(disc, dir * (0.5 * r))?;
    let psi0: Matrix2 = inner * 2.0 - outer;
    let diag = 0.5 * (psi0.get(0, 0) + psi0.get(1, 1));
    let off = 0.5 * (psi0.get(0, 1) + psi0.get(1, 0));
    let imag_leak = psi0.get(0, 0).im.abs()
        .max(psi0.get(1, 1).im.abs())
        .max(psi0.get(0, 1).re.abs())
        .max(psi0.get(1, 0).re.abs());
    let cos_half = diag.re;
    let sin_half = (-I * off).re;
    Ok(LambdaZeroEstimate {
        q: 2.0 * sin_half.atan2(cos_half),
        cos_half,
        sin_half,
        imag_leak,
    })
}

/// How `d Psi*/dx` is obtained in the `l -> inf` route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeRule {
    /// From the differentiated RH problem solved alongside `mu`.
    Exact,
    /// Central differences along the row (one-sided at the ends).
    CentralDifference,
}

impl FromStr for DerivativeRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(DerivativeRule::Exact),
            "central-difference" => Ok(DerivativeRule::CentralDifference),
            other => Err(Error::Config(format!("unknown derivative rule '{other}'"))),
        }
    }
}

/// One point of a row at fixed `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSample {
    pub x: f64,
    pub psi_star: Matrix2,
    pub psi_star_x: Option<Matrix2>,
    /// Sign source for `q`.
    pub sin_half: f64,
}

/// Tolerance on `|cos q| - 1` before a value is declared inconsistent.
pub const COS_TOLERANCE: f64 = 1e-6;

/// `q` along a row from `cos q = 1 + 4i (Psi*_x)_11 + 2 (Psi*_21)^2`.
///
/// Returns `(q, largest discarded imaginary part of cos q)`.
pub fn q_from_psistar(row: &[RowSample], rule: DerivativeRule) -> Result<(Vec<f64>, f64)> {
    let n = row.len();
    let derivs: Vec<Matrix2> = match rule {
        DerivativeRule::Exact => row
            .iter()
            .map(|s| {
                s.psi_star_x.ok_or_else(|| {
                    Error::Config("exact rule needs psi_star_x on every sample".into())
                })
            })
            .collect::<Result<_>>()?,
        DerivativeRule::CentralDifference => {
            if n < 3 {
                return Err(Error::Grid(format!(
                    "central differences need at least 3 samples per row, got {n}"
                )));
            }
            (0..n)
                .map(|i| {
                    let (a, b, c) = match i {
                        0 => (0, 1, 2),
                        k if k == n - 1 => (n - 3, n - 2, n - 1),
                        k => (k - 1, k, k + 1),
                    };
                    lagrange_derivative(
                        [row[a].x, row[b].x, row[c].x],
                        [row[a].psi_star, row[b].psi_star, row[c].psi_star],
                        row[i].x,
                    )
                })
                .collect()
        }
    };
    let mut leak: f64 = 0.0;
    let mut out = Vec::with_capacity(n);
    for (s, dx) in row.iter().zip(&derivs) {
        let p21 = s.psi_star.get(1, 0);
        let cos_q = 1.0 + 4.0 * I * dx.get(0, 0) + 2.0 * p21 * p21;
        leak = leak.max(cos_q.im.abs());
        if cos_q.re.abs() > 1.0 + COS_TOLERANCE {
            return Err(Error::Inconsistency(format!(
                "cos q = {} at x = {} (under-resolved solve)",
                cos_q.re, s.x
            )));
        }
        let q = cos_q.re.clamp(-1.0, 1.0).acos();
        out.push(if s.sin_half < 0.0 { -q } else { q });
    }
    Ok((out, leak))
}

fn lagrange_derivative(x: [f64; 3], f: [Matrix2; 3], at: f64) -> Matrix2 {
    let mut acc = Matrix2::zero();
    for i in 0..3 {
        let mut denom = 1.0;
        let mut num = 0.0;
        for j in 0..3 {
            if j != i {
                denom *= x[i] - x[j];
                let mut prod = 1.0;
                for k in 0..3 {
                    if k != i && k != j {
                        prod *= at - x[k];
                    }
                }
                num += prod;
            }
        }
        acc += f[i] * (num / denom);
    }
    acc
}

/// Rectangular interior grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    /// Distance of the first and last rows from `y = 0` and `y = L`.
    pub y_margin: f64,
    pub ny: usize,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

impl GridSpec {
    pub fn validate(&self, params: &ProblemParams) -> Result<()> {
        if !(self.x_min > 0.0 && self.x_max >= self.x_min && self.x_max.is_finite()) {
            return Err(Error::Grid(format!(
                "need 0 < x_min <= x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if !(self.y_margin > 0.0 && 2.0 * self.y_margin <= params.width) {
            return Err(Error::Grid(format!(
                "y_margin = {} must lie in (0, L/2]",
                self.y_margin
            )));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::Grid("grid needs at least one point per direction".into()));
        }
        if (self.nx == 1) != (self.x_max == self.x_min) {
            return Err(Error::Grid("a single column needs x_min = x_max".into()));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ys(&self, width: f64) -> Vec<f64> {
        linspace(self.y_margin, width - self.y_margin, self.ny)
    }
}

/// Solver settings for a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub solver: SolverOptions,
    pub probe: ProbeConfig,
    pub derivative: DerivativeRule,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            probe: ProbeConfig::default(),
            derivative: DerivativeRule::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointDiagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub contraction: Option<f64>,
    pub imag_leak: f64,
    /// `2 Psi*_21`, the reconstructed `q_x - i q_y`.
    pub grad_re: f64,
    pub grad_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub x: f64,
    pub y: f64,
    pub message: String,
}

/// `q` on a rectangular grid; values are stored column-major, index `ix * ny + iy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub params: ProblemParams,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub q: Vec<f64>,
    pub q_alt: Vec<f64>,
    pub imag_leak: f64,
    pub diagnostics: Vec<Option<PointDiagnostics>>,
    pub failures: Vec<PointFailure>,
}

impl SolutionField {
    /// Field built from a function, with empty diagnostics.
    pub fn from_fn(params: ProblemParams, xs: Vec<f64>, ys: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut q = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                q.push(f(x, y));
            }
        }
        Self {
            params,
            q_alt: q.clone(),
            q,
            imag_leak: 0.0,
            diagnostics: vec![None; xs.len() * ys.len()],
            failures: Vec::new(),
            xs,
            ys,
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        ix * self.ys.len() + iy
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.q[self.index(ix, iy)]
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    /// Largest `|q - q_alt|` over points where both are finite.
    pub fn route_gap(&self) -> f64 {
        self.q
            .iter()
            .zip(&self.q_alt)
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

struct PointResult {
    q: f64,
    sample: RowSample,
    diag: PointDiagnostics,
}

fn solve_point(
    p: PhysicalPoint,
    disc: &ContourDiscretization,
    cfg: &SweepConfig,
) -> Result<PointResult> {
    let opts = SolverOptions {
        x_derivative: matches!(cfg.derivative, DerivativeRule::Exact),
        ..cfg.solver
    };
    let sol = solve_rh(&p, disc, &opts)?;
    let est = q_from_lambda_zero(&p, disc, &sol, &cfg.probe)?;
    let grad = q_derivative_combo(&sol);
    Ok(PointResult {
        q: est.q,
        sample: RowSample {
            x: p.x,
            psi_star: sol.psi_star,
            psi_star_x: sol.psi_star_x,
            sin_half: est.sin_half,
        },
        diag: PointDiagnostics {
            iterations: sol.diagnostics.iterations,
            residual: sol.diagnostics.residual,
            contraction: sol.diagnostics.contraction,
            imag_leak: est.imag_leak,
            grad_re: grad.re,
            grad_im: grad.im,
        },
    })
}

/// Solve on every grid point in parallel and reconstruct `q` by both routes.
pub fn field_sweep(
    grid: &GridSpec,
    disc: &ContourDiscretization,
    params: &ProblemParams,
    cfg: &SweepConfig,
) -> Result<SolutionField> {
    grid.validate(params)?;
    cfg.solver.validate()?;
    if (disc.width() - params.width).abs() > 1e-12 * params.width {
        return Err(Error::Config("contour was built for a different strip width".into()));
    }
    let xs = grid.xs();
    let ys = grid.ys(params.width);
    let points: Vec<PhysicalPoint> = xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| PhysicalPoint { x, y }))
        .collect();
    let results: Vec<Result<PointResult>> = points
        .par_iter()
        .map(|p| solve_point(*p, disc, cfg))
        .collect();

    let total = points.len();
    let mut q = vec![f64::NAN; total];
    let mut q_alt = vec![f64::NAN; total];
    let mut diagnostics = vec![None; total];
    let mut failures = Vec::new();
    let mut samples: Vec<Option<RowSample>> = vec![None; total];
    let mut imag_leak: f64 = 0.0;
    for ((k, p), r) in points.iter().enumerate().zip(results) {
        match r {
            Ok(res) => {
                q[k] = res.q;
                imag_leak = imag_leak.max(res.diag.imag_leak);
                diagnostics[k] = Some(res.diag);
                samples[k] = Some(res.sample);
            }
            Err(e) => failures.push(PointFailure {
                x: p.x,
                y: p.y,
                message: e.to_string(),
            }),
        }
    }

    let ny = ys.len();
    for iy in 0..ny {
        let idx: Vec<usize> = (0..xs.len()).map(|ix| ix * ny + iy).collect();
        let row: Option<Vec<RowSample>> = idx.iter().map(|&k| samples[k]).collect();
        let Some(row) = row else { continue };
        if matches!(cfg.derivative, DerivativeRule::CentralDifference) && row.len() < 3 {
            continue;
        }
        match q_from_psistar(&row, cfg.derivative) {
            Ok((vals, leak)) => {
                imag_leak = imag_leak.max(leak);
                for (k, v) in idx.iter().zip(vals) {
                    q_alt[*k] = v;
                }
            }
            Err(e) => failures.push(PointFailure {
                x: f64::NAN,
                y: ys[iy],
                message: e.to_string(),
            }),
        }
    }

    Ok(SolutionField {
        params: *params,
        xs,
        ys,
        q,
        q_alt,
        imag_leak,
        diagnostics,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::ContourSpec;
    use crate::linearizable::{HQuadrature, LinearizableSpectrum};

    fn setup(d: f64, width: f64, n: usize) -> (ProblemParams, ContourDiscretization) {
        let p = ProblemParams::new(d, width).unwrap();
        let lin = LinearizableSpectrum::new(p, HQuadrature::default()).unwrap();
        let disc = ContourDiscretization::new(&lin, ContourSpec { n_per_ray: n, ..ContourSpec::default() }).unwrap();
        (p, disc)
    }

    #[test]
    fn zero_d_field_is_zero() {
        let (p, disc) = setup(0.0, 1.0, 32);
        let grid = GridSpec { x_min: 0.2, x_max: 1.0, nx: 5, y_margin: 0.1, ny: 5 };
        let f = field_sweep(&grid, &disc, &p, &SweepConfig::default()).unwrap();
        assert!(f.q.iter().chain(&f.q_alt).all(|v| *v == 0.0));
        assert!(!f.is_partial());
    }

    #[test]
    fn central_difference_needs_three_samples() {
        let s = RowSample { x: 0.0, psi_star: Matrix2::zero(), psi_star_x: None, sin_half: 0.0 };
        assert!(matches!(q_from_psistar(&[s, s], DerivativeRule::CentralDifference), Err(Error::Grid(_))));
        assert!(matches!(q_from_psistar(&[s], DerivativeRule::Exact), Err(Error::Config(_))));
    }

    #[test]
    fn inconsistent_cosine_is_flagged() {
        let bad = Matrix2::new(Complex64::new(0.0, 1.0), Complex64::default(), Complex64::default(), Complex64::default());
        let s = RowSample { x: 1.0, psi_star: Matrix2::zero(), psi_star_x: Some(bad), sin_half: 0.1 };
        assert!(matches!(q_from_psistar(&[s], DerivativeRule::Exact), Err(Error::Inconsistency(_))));
    }

    #[test]
    fn lagrange_derivative_is_exact_for_quadratics() {
        let f = |x: f64| Matrix2::identity() * (3.0 * x * x - x + 2.0);
        let xs = [0.1, 0.4, 0.9];
        let d = lagrange_derivative(xs, xs.map(f), 0.4);
        assert!((d.get(0, 0).re - (6.0 * 0.4 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn routes_agree_at_moderate_d() {
        let (_, disc) = setup(0.5, 2.0, 200);
        let pt = PhysicalPoint { x: 1.0, y: 1.0 };
        let cfg = SweepConfig::default();
        let res = solve_point(pt, &disc, &cfg).unwrap();
        let (alt, leak) = q_from_psistar(&[res.sample], DerivativeRule::Exact).unwrap();
        assert!((res.q - alt[0]).abs() < 1e-4, "{} vs {}", res.q, alt[0]);
        assert!(leak < 1e-6 && res.diag.imag_leak < 1e-6);
    }

    #[test]
    fn grid_validation() {
        let p = ProblemParams::new(0.1, 1.0).unwrap();
        let good = GridSpec { x_min: 0.2, x_max: 2.0, nx: 10, y_margin: 0.1, ny: 9 };
        assert!(good.validate(&p).is_ok());
        assert!((good.xs()[1] - 0.4).abs() < 1e-15 && (good.ys(1.0)[8] - 0.9).abs() < 1e-15);
        assert!(GridSpec { x_min: 0.0, ..good }.validate(&p).is_err());
        assert!(GridSpec { y_margin: 0.6, ..good }.validate(&p).is_err());
    }
}
