//! Discretization of the cross contour `R u iR` and the Cauchy operator on it.
//!
//! Each ray carries nodes `l = dir * exp(u)` with `u` uniform on `[ln r_min, ln r_max]`.
//! The real rays point away from the origin. The imaginary rays point toward it. With
//! this orientation the left (`+`) side of every ray lies in the first or third quadrant.
//!
//! Weights are trapezoid weights in `u`: `w = orientation * l * du`. That is spectrally
//! accurate because every density on the contour decays exponentially toward `0` and `inf`.
//! Principal values at a node use the odd-offset rule: only nodes an odd number of steps
//! away on the same ray contribute, and with doubled weight.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::error::{Error, Result};
use crate::exponents::exponents;
use crate::linearizable::{g_fn, g_times_one_plus_exp, LinearizableSpectrum};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// One of the four rays of the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ray {
    Zero,
    HalfPi,
    Pi,
    ThreeHalfPi,
}

impl Ray {
    pub const ALL: [Ray; 4] = [Ray::Zero, Ray::HalfPi, Ray::Pi, Ray::ThreeHalfPi];

    pub fn direction(self) -> Complex64 {
        match self {
            Ray::Zero => Complex64::new(1.0, 0.0),
            Ray::HalfPi => I,
            Ray::Pi => Complex64::new(-1.0, 0.0),
            Ray::ThreeHalfPi => -I,
        }
    }

    /// `+1` for rays oriented away from the origin, `-1` for rays oriented toward it.
    pub fn orientation(self) -> f64 {
        match self {
            Ray::Zero | Ray::Pi => 1.0,
            Ray::HalfPi | Ray::ThreeHalfPi => -1.0,
        }
    }

    pub fn angle(self) -> f64 {
        match self {
            Ray::Zero => 0.0,
            Ray::HalfPi => 0.5 * PI,
            Ray::Pi => PI,
            Ray::ThreeHalfPi => 1.5 * PI,
        }
    }
}

/// Node placement along each ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grading {
    /// Uniform in `ln |l|`.
    LogUniform,
}

impl std::str::FromStr for Grading {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log-uniform" => Ok(Grading::LogUniform),
            other => Err(Error::Config(format!("unknown grading '{other}'"))),
        }
    }
}

/// Truncation radii and resolution of the contour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n_per_ray: usize,
    pub grading: Grading,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            r_min: 1e-2,
            r_max: 1e2,
            n_per_ray: 200,
            grading: Grading::LogUniform,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return Err(Error::Config(format!("r_min = {} must lie in (0, 1)", self.r_min)));
        }
        if !(self.r_max > 1.0 && self.r_max.is_finite()) {
            return Err(Error::Config(format!("r_max = {} must exceed 1", self.r_max)));
        }
        if self.n_per_ray < 8 {
            return Err(Error::Config(format!(
                "n_per_ray = {} must be at least 8",
                self.n_per_ray
            )));
        }
        Ok(())
    }
}

/// Per-node coefficients of the jump matrices; only the `theta` exponentials vary with `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCoefficients {
    /// `G(l)/h(l)`.
    pub g_over_h: Complex64,
    /// `G(l)/h(-l)`.
    pub g_over_hminus: Complex64,
    /// `-(G/h)(1 + e^{omega L})`, used on the upper imaginary ray.
    pub combo_pi2: Complex64,
    /// `(G/h(-l))(1 + e^{-omega L})`, used on the lower imaginary ray.
    pub combo_3pi2: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourNode {
    pub ray: Ray,
    /// Position along the ray, `0` nearest the origin.
    pub index: usize,
    pub lambda: Complex64,
    /// Oriented trapezoid weight `orientation * l * du` (halved at the ray ends).
    pub weight: Complex64,
    pub omega: Complex64,
    pub omega_big: Complex64,
    pub coeff: NodeCoefficients,
}

/// Nodes, weights, jump coefficients and the collocated Cauchy kernel.
#[derive(Debug, Clone)]
pub struct ContourDiscretization {
    spec: ContourSpec,
    width: f64,
    du: f64,
    nodes: Vec<ContourNode>,
    /// Row-major `K[i][j]`: the contribution of the density at node `j` to the
    /// principal-value Cauchy integral at node `i`, including `1/(2 pi i)`.
    kernel: Vec<Complex64>,
}

fn coefficients(l: Complex64, ray: Ray, lin: &LinearizableSpectrum) -> Result<NodeCoefficients> {
    let p = lin.params();
    match ray {
        Ray::Zero | Ray::Pi => {
            let g = g_fn(l, p)?;
            let (h, hm) = lin.h_boundary_pair(l.re)?;
            Ok(NodeCoefficients {
                g_over_h: g / h,
                g_over_hminus: g / hm,
                combo_pi2: Complex64::new(0.0, 0.0),
                combo_3pi2: Complex64::new(0.0, 0.0),
            })
        }
        Ray::HalfPi | Ray::ThreeHalfPi => {
            let big_h = lin.cauchy_log_transform(l)?;
            let (h, hm) = (big_h.exp(), (-big_h).exp());
            let (g_over_h, g_over_hminus) = match g_fn(l, p) {
                Ok(g) => (g / h, g / hm),
                Err(Error::Pole(_)) => (Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0)),
                Err(e) => return Err(e),
            };
            Ok(NodeCoefficients {
                g_over_h,
                g_over_hminus,
                combo_pi2: -g_times_one_plus_exp(l, 1.0, p)? / h,
                combo_3pi2: g_times_one_plus_exp(l, -1.0, p)? / hm,
            })
        }
    }
}

impl ContourDiscretization {
    pub fn new(lin: &LinearizableSpectrum, spec: ContourSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_per_ray;
        let (u0, u1) = (spec.r_min.ln(), spec.r_max.ln());
        let du = (u1 - u0) / (n - 1) as f64;
        let mut nodes = Vec::with_capacity(4 * n);
        for ray in Ray::ALL {
            for k in 0..n {
                let r = (u0 + k as f64 * du).exp();
                let lambda = ray.direction() * r;
                let end = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                let (omega, omega_big) = exponents(lambda)?;
                let coeff = coefficients(lambda, ray, lin)?;
                let finite = [coeff.combo_pi2, coeff.combo_3pi2]
                    .iter()
                    .all(|z| z.is_finite())
                    && (matches!(ray, Ray::HalfPi | Ray::ThreeHalfPi)
                        || (coeff.g_over_h.is_finite() && coeff.g_over_hminus.is_finite()));
                if !finite {
                    return Err(Error::Resolution(format!(
                        "non-finite jump coefficient at node {lambda}"
                    )));
                }
                nodes.push(ContourNode {
                    ray,
                    index: k,
                    lambda,
                    weight: lambda * (ray.orientation() * du * end),
                    omega,
                    omega_big,
                    coeff,
                });
            }
        }
        let total = nodes.len();
        let mut kernel = vec![Complex64::new(0.0, 0.0); total * total];
        let inv = 1.0 / (2.0 * PI * I);
        for (i, ni) in nodes.iter().enumerate() {
            let row = &mut kernel[i * total..(i + 1) * total];
            for (j, nj) in nodes.iter().enumerate() {
                if nj.ray == ni.ray {
                    if (nj.index as isize - ni.index as isize) % 2 != 0 {
                        row[j] = 2.0 * nj.weight / (nj.lambda - ni.lambda) * inv;
                    }
                } else {
                    row[j] = nj.weight / (nj.lambda - ni.lambda) * inv;
                }
            }
        }
        Ok(Self {
            spec,
            width: lin.params().width,
            du,
            nodes,
            kernel,
        })
    }

    pub fn spec(&self) -> &ContourSpec {
        &self.spec
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn nodes(&self) -> &[ContourNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spacing in `ln |l|`.
    pub fn du(&self) -> f64 {
        self.du
    }

    #[inline]
    pub(crate) fn kernel_row(&self, i: usize) -> &[Complex64] {
        let n = self.nodes.len();
        &self.kernel[i * n..(i + 1) * n]
    }

    /// `C+[f]` at every node: `f/2 + K f`.
    pub fn plus_projection(&self, f: &[Matrix2]) -> Vec<Matrix2> {
        let n = self.nodes.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.kernel_row(i);
            let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
            for (k, fj) in row.iter().zip(f) {
                for a in 0..2 {
                    for b in 0..2 {
                        acc[a][b] += k * fj.m[a][b];
                    }
                }
            }
            out.push(Matrix2 { m: acc } + f[i] * 0.5);
        }
        out
    }

    fn on_ray(&self, target: Complex64) -> Option<(Ray, f64)> {
        let r = target.norm();
        if r < self.spec.r_min || r > self.spec.r_max {
            return None;
        }
        Ray::ALL.into_iter().find_map(|ray| {
            let along = target * ray.direction().conj();
            (along.im.abs() <= 1e-14 * r && along.re > 0.0).then_some((ray, along.re))
        })
    }

    fn ray_slice(&self, ray: Ray) -> std::ops::Range<usize> {
        let n = self.spec.n_per_ray;
        let k = Ray::ALL.iter().position(|&r| r == ray).expect("known ray");
        k * n..(k + 1) * n
    }

    /// Cauchy integral `(1/2 pi i) int f(s)/(s - target) ds` of nodal values.
    ///
    /// On the contour the `+` boundary value is returned.
    pub fn cauchy_apply(&self, values: &[Matrix2], target: Complex64) -> Result<Matrix2> {
        if values.len() != self.nodes.len() {
            return Err(Error::Config(format!(
                "{} values for {} nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        let inv = 1.0 / (2.0 * PI * I);
        if let Some((ray, r)) = self.on_ray(target) {
            let range = self.ray_slice(ray);
            let u = (r.ln() - self.spec.r_min.ln()) / self.du;
            let nearest = u.round() as usize;
            if (u - nearest as f64).abs() < 1e-9 {
                let i = range.start + nearest;
                let row = self.kernel_row(i);
                let mut acc = values[i] * 0.5;
                for (k, v) in row.iter().zip(values) {
                    acc += *v * *k;
                }
                return Ok(acc);
            }
            let vt = self.interpolate(&values[range.clone()], u);
            let mut acc = Matrix2::zero();
            for (j, node) in self.nodes.iter().enumerate() {
                let diff = node.lambda - target;
                if range.contains(&j) {
                    acc += (values[j] - vt) * (node.weight / diff);
                } else {
                    acc += values[j] * (node.weight / diff);
                }
            }
            let log = ((self.spec.r_max - r) / (r - self.spec.r_min)).ln() * ray.orientation();
            acc += vt * log;
            return Ok(acc * inv + vt * 0.5);
        }
        let (nearest, dist) = self
            .nodes
            .iter()
            .map(|n| (n, (n.lambda - target).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty contour");
        let spacing = nearest.lambda.norm() * self.du;
        if dist < 0.5 * spacing {
            return Err(Error::Resolution(format!(
                "target {target} lies within half a node spacing of the contour"
            )));
        }
        let mut acc = Matrix2::zero();
        for (node, v) in self.nodes.iter().zip(values) {
            acc += *v * (node.weight / (node.lambda - target));
        }
        Ok(acc * inv)
    }

    /// Cubic Lagrange interpolation in the node index.
    fn interpolate(&self, values: &[Matrix2], u: f64) -> Matrix2 {
        let n = values.len();
        let base = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut acc = Matrix2::zero();
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (u - (base + b) as f64) / (a as f64 - b as f64);
                }
            }
            acc += values[base + a] * w;
        }
        acc
    }
}
