//! Collocation solver for the matrix Riemann-Hilbert problem.
//!
//! The unknown is the `+` boundary value `mu` of `Psi` at the contour nodes:
//!
//! ```text
//! mu = I + C+[mu W],   W = I - J,   C+ f = f/2 + K f
//! ```
//!
//! Then `Psi(l) = I + (1/2 pi i) int mu W/(s - l) ds`. Its `1/l` moment is
//! `Psi* = -(1/2 pi i) int mu W ds`.
//!
//! The x-derivative `mu_x` solves the same operator with source `C+[mu W_x]`, which gives
//! `d Psi*/dx` without finite differences.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::contour::ContourDiscretization;
use crate::error::{Error, Result};
use crate::jumps::{jump_unchecked, jump_x_derivative};
use crate::params::PhysicalPoint;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Fixed-point iteration `mu <- I + C+[mu W]`.
    Neumann,
    /// Dense LU of the collocated system.
    Direct,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(Backend::Neumann),
            "direct" => Ok(Backend::Direct),
            other => Err(Error::Config(format!("unknown backend '{other}'"))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Neumann => "neumann",
            Backend::Direct => "direct",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub backend: Backend,
    pub tol: f64,
    pub max_iter: usize,
    /// Also solve for `mu_x` and `d Psi*/dx`.
    pub x_derivative: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Neumann,
            tol: 1e-10,
            max_iter: 200,
            x_derivative: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::Config(format!("tol = {} must lie in (0, 1)", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhDiagnostics {
    pub backend: Backend,
    pub iterations: usize,
    /// Max-norm residual of the collocated equation for `mu`.
    pub residual: f64,
    /// Ratio of the last two Neumann update norms.
    pub contraction: Option<f64>,
    /// Largest `|J - I|` over the nodes.
    pub jump_size: f64,
}

#[derive(Debug, Clone)]
pub struct RHSolution {
    pub point: PhysicalPoint,
    /// `Psi+` at the nodes.
    pub mu: Vec<Matrix2>,
    /// `mu (I - J)` at the nodes.
    pub density: Vec<Matrix2>,
    pub psi_star: Matrix2,
    pub psi_star_x: Option<Matrix2>,
    pub diagnostics: RhDiagnostics,
}

impl RHSolution {
    /// `Psi(l) = I + C[mu W](l)` off the contour.
    pub fn psi_at(&self, disc: &ContourDiscretization, l: Complex64) -> Result<Matrix2> {
        Ok(Matrix2::identity() + disc.cauchy_apply(&self.density, l)?)
    }
}

fn moment(disc: &ContourDiscretization, density: &[Matrix2]) -> Matrix2 {
    let mut acc = Matrix2::zero();
    for (node, f) in disc.nodes().iter().zip(density) {
        acc += *f * node.weight;
    }
    acc * (-1.0 / (2.0 * PI * I))
}

fn products(a: &[Matrix2], b: &[Matrix2]) -> Vec<Matrix2> {
    a.iter().zip(b).map(|(x, y)| *x * *y).collect()
}

fn max_diff(a: &[Matrix2], b: &[Matrix2]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x - *y).max_abs())
        .fold(0.0, f64::max)
}

/// Fixed-point iteration `m <- source + C+[m W]` started from `source`.
fn neumann(
    disc: &ContourDiscretization,
    w: &[Matrix2],
    source: &[Matrix2],
    opts: &SolverOptions,
) -> Result<(Vec<Matrix2>, usize, Option<f64>)> {
    let mut m = source.to_vec();
    let mut last = f64::INFINITY;
    let mut growth = 0;
    let mut contraction = None;
    for it in 1..=opts.max_iter {
        let proj = disc.plus_projection(&products(&m, w));
        let next: Vec<Matrix2> = source.iter().zip(&proj).map(|(s, p)| *s + *p).collect();
        let upd = max_diff(&next, &m);
        m = next;
        if !upd.is_finite() {
            return Err(Error::Divergence(
                "Neumann iterate became non-finite; use the direct backend".into(),
            ));
        }
        if last.is_finite() && last > 0.0 {
            contraction = Some(upd / last);
        }
        if upd < opts.tol {
            return Ok((m, it, contraction));
        }
        if upd > last {
            growth += 1;
            if growth >= 3 {
                return Err(Error::Divergence(format!(
                    "Neumann update grew for 3 consecutive iterations (|update| = {upd:.3e}); \
                     use the direct backend"
                )));
            }
        } else {
            growth = 0;
        }
        last = upd;
    }
    Err(Error::Divergence(format!(
        "Neumann iteration did not reach tol {} in {} iterations; use the direct backend",
        opts.tol, opts.max_iter
    )))
}

/// Dense system for the rows of `m` in `m - C+[m W] = rhs`.
fn direct_matrix(disc: &ContourDiscretization, w: &[Matrix2]) -> DMatrix<Complex64> {
    let n = disc.len();
    let mut a = DMatrix::<Complex64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        let row = disc.kernel_row(i);
        for (j, k) in row.iter().enumerate() {
            if k.norm_sqr() == 0.0 {
                continue;
            }
            for ra in 0..2 {
                for cb in 0..2 {
                    a[(2 * i + ra, 2 * j + cb)] -= k * w[j].m[cb][ra];
                }
            }
        }
        for ra in 0..2 {
            a[(2 * i + ra, 2 * i + ra)] += Complex64::new(1.0, 0.0);
            for cb in 0..2 {
                a[(2 * i + ra, 2 * i + cb)] -= 0.5 * w[i].m[cb][ra];
            }
        }
    }
    a
}

struct DirectSolver {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    n: usize,
}

impl DirectSolver {
    fn new(disc: &ContourDiscretization, w: &[Matrix2]) -> Self {
        Self {
            lu: direct_matrix(disc, w).lu(),
            n: disc.len(),
        }
    }

    fn solve(&self, rhs: &[Matrix2]) -> Result<Vec<Matrix2>> {
        let mut out = vec![Matrix2::zero(); self.n];
        for r in 0..2 {
            let b = DVector::from_fn(2 * self.n, |k, _| rhs[k / 2].m[r][k % 2]);
            let x = self.lu.solve(&b).ok_or_else(|| {
                Error::Conditioning("collocation matrix is singular".into())
            })?;
            if x.iter().any(|z| !z.is_finite()) {
                return Err(Error::Conditioning("non-finite direct solution".into()));
            }
            for (i, o) in out.iter_mut().enumerate() {
                o.m[r][0] = x[2 * i];
                o.m[r][1] = x[2 * i + 1];
            }
        }
        Ok(out)
    }
}

/// Solve the collocated RH problem at `p`.
pub fn solve_rh(
    p: &PhysicalPoint,
    disc: &ContourDiscretization,
    opts: &SolverOptions,
) -> Result<RHSolution> {
    opts.validate()?;
    let width = disc.width();
    if !(p.x >= 0.0 && p.y > 0.0 && p.y < width && p.x.is_finite()) {
        return Err(Error::Domain(format!(
            "({}, {}) is not an interior point of the strip",
            p.x, p.y
        )));
    }
    let nodes = disc.nodes();
    let jumps: Vec<Matrix2> = nodes
        .iter()
        .map(|n| jump_unchecked(n, p.x, p.y, width))
        .collect();
    if jumps.iter().any(|j| !j.is_finite()) {
        return Err(Error::Resolution("non-finite jump matrix".into()));
    }
    let w: Vec<Matrix2> = jumps.iter().map(|j| Matrix2::identity() - *j).collect();
    let jump_size = w.iter().map(Matrix2::max_abs).fold(0.0, f64::max);
    let n = nodes.len();
    let ident = vec![Matrix2::identity(); n];

    if jump_size == 0.0 {
        return Ok(RHSolution {
            point: *p,
            mu: ident,
            density: vec![Matrix2::zero(); n],
            psi_star: Matrix2::zero(),
            psi_star_x: opts.x_derivative.then(Matrix2::zero),
            diagnostics: RhDiagnostics {
                backend: opts.backend,
                iterations: 0,
                residual: 0.0,
                contraction: None,
                jump_size,
            },
        });
    }

    let direct = matches!(opts.backend, Backend::Direct).then(|| DirectSolver::new(disc, &w));
    let (mu, iterations, contraction) = match &direct {
        None => neumann(disc, &w, &ident, opts)?,
        Some(s) => (s.solve(&ident)?, 1, None),
    };
    let density = products(&mu, &w);
    let check = disc.plus_projection(&density);
    let residual = mu
        .iter()
        .zip(&check)
        .map(|(m, c)| (*m - Matrix2::identity() - *c).max_abs())
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual > 1e-6_f64.max(100.0 * opts.tol) {
        return Err(Error::Conditioning(format!(
            "collocation residual {residual:.3e} after solve"
        )));
    }
    let psi_star = moment(disc, &density);

    let psi_star_x = if opts.x_derivative {
        let wx: Vec<Matrix2> = nodes
            .iter()
            .zip(&jumps)
            .map(|(node, j)| -jump_x_derivative(node, j))
            .collect();
        let mwx = products(&mu, &wx);
        let source = disc.plus_projection(&mwx);
        let mu_x = match &direct {
            None => neumann(disc, &w, &source, opts)?.0,
            Some(s) => s.solve(&source)?,
        };
        let dens_x: Vec<Matrix2> = products(&mu_x, &w)
            .into_iter()
            .zip(&mwx)
            .map(|(a, b)| a + *b)
            .collect();
        Some(moment(disc, &dens_x))
    } else {
        None
    };

    Ok(RHSolution {
        point: *p,
        mu,
        density,
        psi_star,
        psi_star_x,
        diagnostics: RhDiagnostics {
            backend: opts.backend,
            iterations,
            residual,
            contraction,
            jump_size,
        },
    })
}
