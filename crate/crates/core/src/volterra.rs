//! Spectral functions `a_j(l), b_j(l)` of the three sides from boundary traces.
//!
//! The first column `(A, B)` of the side eigenfunction satisfies
//!
//! ```text
//! A' = (M v)_1,    B' - k B = (M v)_2,    v(far end) = (1, 0)
//! ```
//!
//! Here `k = Omega(l)` and `M = Q(x, l)` on the horizontal sides. On the vertical side
//! `k = omega(l)` and `M = i Q(0, y, -l)`. The system is integrated backward with a Lawson
//! (integrating-factor) RK4 step, so the exponential `e^{k(xi - x)}` is applied exactly.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Matrix2;
use crate::error::{Error, Result};
use crate::exponents::{exponents, omega};
use crate::params::ProblemParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The three sides of the semistrip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `y = L`, parametrised by `x`.
    Side1,
    /// `x = 0`, parametrised by `y`.
    Side2,
    /// `y = 0`, parametrised by `x`.
    Side3,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::Side1 => 1,
            Side::Side2 => 2,
            Side::Side3 => 3,
        }
    }

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Side::Side1),
            2 => Ok(Side::Side2),
            3 => Ok(Side::Side3),
            _ => Err(Error::Parse(format!("unknown side {i}"))),
        }
    }

    fn horizontal(self) -> bool {
        !matches!(self, Side::Side2)
    }
}

/// Piecewise cubic Hermite interpolant with three-point slopes and a Hyman monotonicity
/// filter.
///
/// Local, so a sharp feature in the samples does not ring into neighbouring intervals,
/// and third order on smooth data, extrema included.
#[derive(Debug, Clone)]
pub(crate) struct HermiteInterpolant {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl HermiteInterpolant {
    pub(crate) fn new(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let secant: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slope = vec![secant[0]; n];
        if n > 2 {
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let m = (h1 * secant[i - 1] + h0 * secant[i]) / (h0 + h1);
                slope[i] = limit(m, secant[i - 1], secant[i]);
            }
            let h0 = x[1] - x[0];
            let h1 = x[2] - x[1];
            let m0 = ((2.0 * h0 + h1) * secant[0] - h0 * secant[1]) / (h0 + h1);
            slope[0] = limit(m0, secant[0], secant[0]);
            let h0 = x[n - 1] - x[n - 2];
            let h1 = x[n - 2] - x[n - 3];
            let m1 = ((2.0 * h0 + h1) * secant[n - 2] - h0 * secant[n - 3]) / (h0 + h1);
            slope[n - 1] = limit(m1, secant[n - 2], secant[n - 2]);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
        }
    }

    /// Value and first derivative; constant extrapolation outside the nodes.
    pub(crate) fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        if t < self.x[0] {
            return (self.y[0], 0.0);
        }
        if t > self.x[n - 1] {
            return (self.y[n - 1], 0.0);
        }
        let k = self.x.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (y0, y1) = (self.y[k], self.y[k + 1]);
        let (m0, m1) = (self.slope[k] * h, self.slope[k + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let dv = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        (v, dv)
    }
}

/// Hyman filter: the slope is at most three times the smaller adjacent secant, keeps
/// the secants' sign inside a monotone stretch and vanishes next to a flat secant.
fn limit(m: f64, d0: f64, d1: f64) -> f64 {
    if d0 == 0.0 || d1 == 0.0 || (d0 * d1 > 0.0 && m * d0 <= 0.0) {
        return 0.0;
    }
    let cap = 3.0 * d0.abs().min(d1.abs());
    m.signum() * m.abs().min(cap)
}

/// Sampled Dirichlet and Neumann traces on one side.
///
/// `neumann` holds `q_y` on sides 1 and 3 and `q_x` on side 2.
#[derive(Debug, Clone)]
pub struct BoundarySideData {
    side: Side,
    nodes: Vec<f64>,
    dirichlet: Vec<f64>,
    neumann: Vec<f64>,
    dirichlet_interp: HermiteInterpolant,
    neumann_interp: HermiteInterpolant,
    node_combo: Vec<f64>,
}

impl BoundarySideData {
    pub fn new(side: Side, nodes: Vec<f64>, dirichlet: Vec<f64>, neumann: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::BoundaryData("at least two nodes are required".into()));
        }
        if dirichlet.len() != nodes.len() || neumann.len() != nodes.len() {
            return Err(Error::BoundaryData(format!(
                "{} nodes but {} dirichlet and {} neumann samples",
                nodes.len(),
                dirichlet.len(),
                neumann.len()
            )));
        }
        if nodes
            .iter()
            .chain(&dirichlet)
            .chain(&neumann)
            .any(|v| !v.is_finite())
        {
            return Err(Error::BoundaryData("non-finite sample".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BoundaryData("nodes must be strictly increasing".into()));
        }
        if nodes[0].abs() > 1e-12 {
            return Err(Error::BoundaryData(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        let dirichlet_interp = HermiteInterpolant::new(&nodes, &dirichlet);
        let neumann_interp = HermiteInterpolant::new(&nodes, &neumann);
        let mut data = Self {
            side,
            nodes,
            dirichlet,
            neumann,
            dirichlet_interp,
            neumann_interp,
            node_combo: Vec::new(),
        };
        data.node_combo = data.nodes.iter().map(|&t| data.trace(t).1.norm()).collect();
        Ok(data)
    }

    /// All-zero traces on `[0, length]`.
    pub fn zero(side: Side, length: f64) -> Result<Self> {
        Self::new(side, vec![0.0, length], vec![0.0; 2], vec![0.0; 2])
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dirichlet(&self) -> &[f64] {
        &self.dirichlet
    }

    pub fn neumann(&self) -> &[f64] {
        &self.neumann
    }

    pub fn end(&self) -> f64 {
        *self.nodes.last().expect("non-empty")
    }

    /// Largest trace magnitude at the far node (sides 1 and 3).
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.nodes.len() - 1;
        self.dirichlet[n].abs().max(self.neumann[n].abs())
    }

    /// `q` and `q_x - i q_y` at parameter `t`.
    pub fn trace(&self, t: f64) -> (f64, Complex64) {
        let (q, qt) = self.dirichlet_interp.eval(t);
        let (qn, _) = self.neumann_interp.eval(t);
        let combo = if self.side.horizontal() {
            Complex64::new(qt, -qn)
        } else {
            Complex64::new(qn, -qt)
        };
        (q, combo)
    }
}

/// The Lax-pair potential `Q(l)` built from `q` and `q_x - i q_y`.
pub fn q_matrix(q: f64, combo: Complex64, l: Complex64) -> Result<Matrix2> {
    if !l.is_finite() || l.norm() < crate::exponents::LAMBDA_FLOOR {
        return Err(Error::Domain(format!("Q evaluated at {l}")));
    }
    let li = l.inv();
    let (s, c) = q.sin_cos();
    let k = 0.25 * I;
    let diag = (1.0 - c) * li;
    Ok(Matrix2::new(
        k * diag,
        k * (combo + I * s * li),
        k * (combo - I * s * li),
        -k * diag,
    ))
}

/// Step control for the backward integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolterraConfig {
    /// Largest step along the side.
    pub max_step: f64,
    /// Far-end trace magnitude above which a tail warning is attached.
    pub tail_tol: f64,
}

impl Default for VolterraConfig {
    fn default() -> Self {
        Self {
            max_step: 0.01,
            tail_tol: 1e-10,
        }
    }
}

/// `(a, b)` at one `l`, with the neglected tail if it exceeds the tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralValues {
    pub a: Complex64,
    pub b: Complex64,
    pub tail_warning: Option<f64>,
}

fn in_region(side: Side, l: Complex64) -> bool {
    !side.horizontal() || l.im >= -1e-12 * l.norm().max(1.0)
}

/// Solve the side's Volterra equation at `l` and return `(a, b)`.
pub fn spectral_functions(
    data: &BoundarySideData,
    l: Complex64,
    params: &ProblemParams,
    cfg: &VolterraConfig,
) -> Result<SpectralValues> {
    let (w, wb) = exponents(l)?;
    if !in_region(data.side, l) {
        return Err(Error::Region(format!(
            "{l} is outside the closed upper half plane required for side {}",
            data.side.index()
        )));
    }
    if !(cfg.max_step.is_finite() && cfg.max_step > 0.0) {
        return Err(Error::Config(format!("max_step = {}", cfg.max_step)));
    }
    if !data.side.horizontal() && (data.end() - params.width).abs() > 1e-9 * params.width {
        return Err(Error::BoundaryData(format!(
            "side 2 nodes must end at L = {}, got {}",
            params.width,
            data.end()
        )));
    }
    let (k, ls) = if data.side.horizontal() {
        (wb, l)
    } else {
        (w, -l)
    };
    let scale = if data.side.horizontal() {
        Complex64::new(1.0, 0.0)
    } else {
        I
    };
    let rhs = |t: f64, v: [Complex64; 2]| -> Result<[Complex64; 2]> {
        let (q, c) = data.trace(t);
        let m = q_matrix(q, c, ls)?;
        let r = m.mul_vec(v);
        Ok([scale * r[0], scale * r[1]])
    };

    let mut v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
    for i in (0..data.nodes.len() - 1).rev() {
        let (lo, hi) = (data.nodes[i], data.nodes[i + 1]);
        let len = hi - lo;
        let m_bound = 0.25 * (2.0 / l.norm() + data.node_combo[i].max(data.node_combo[i + 1]));
        let n = ((len / cfg.max_step).ceil())
            .max((len * m_bound / 0.5).ceil())
            .max(1.0) as usize;
        let h = len / n as f64;
        let tau = -h;
        let e_half = (k * tau * 0.5).exp();
        let e_full = (k * tau).exp();
        let mut t = hi;
        for _ in 0..n {
            let k1 = rhs(t, v)?;
            let u2 = [v[0] + 0.5 * tau * k1[0], e_half * (v[1] + 0.5 * tau * k1[1])];
            let k2 = rhs(t + 0.5 * tau, u2)?;
            let u3 = [v[0] + 0.5 * tau * k2[0], e_half * v[1] + 0.5 * tau * k2[1]];
            let k3 = rhs(t + 0.5 * tau, u3)?;
            let u4 = [v[0] + tau * k3[0], e_full * v[1] + tau * e_half * k3[1]];
            let k4 = rhs(t + tau, u4)?;
            v = [
                v[0] + tau / 6.0 * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
                e_full * v[1]
                    + tau / 6.0
                        * (e_full * k1[1] + 2.0 * e_half * (k2[1] + k3[1]) + k4[1]),
            ];
            t += tau;
        }
    }
    if !(v[0].is_finite() && v[1].is_finite()) {
        return Err(Error::Resolution(format!("Volterra integration overflowed at {l}")));
    }
    let tail = data.tail_magnitude();
    let tail_warning = (data.side.horizontal() && tail > cfg.tail_tol).then_some(tail);
    Ok(SpectralValues {
        a: v[0],
        b: v[1],
        tail_warning,
    })
}

type PairFn = dyn Fn(Complex64) -> Result<(Complex64, Complex64)> + Send + Sync;

#[derive(Clone)]
enum Source {
    Trivial,
    Boundary {
        data: Arc<BoundarySideData>,
        params: ProblemParams,
        cfg: VolterraConfig,
    },
    Function(Arc<PairFn>),
}

/// `(a(l), b(l))` for one side, evaluable anywhere in the side's validity region.
///
/// Sides 1 and 3 require `Im l >= 0`; side 2 accepts any `l != 0`.
#[derive(Clone)]
pub struct SpectralPair {
    side: Side,
    source: Source,
}

impl std::fmt::Debug for SpectralPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.source {
            Source::Trivial => "trivial",
            Source::Boundary { .. } => "boundary",
            Source::Function(_) => "function",
        };
        f.debug_struct("SpectralPair")
            .field("side", &self.side)
            .field("source", &kind)
            .finish()
    }
}

impl SpectralPair {
    /// `a = 1`, `b = 0`.
    pub fn trivial(side: Side) -> Self {
        Self {
            side,
            source: Source::Trivial,
        }
    }

    pub fn from_boundary(data: BoundarySideData, params: ProblemParams, cfg: VolterraConfig) -> Self {
        Self {
            side: data.side,
            source: Source::Boundary {
                data: Arc::new(data),
                params,
                cfg,
            },
        }
    }

    pub fn from_fn<F>(side: Side, f: F) -> Self
    where
        F: Fn(Complex64) -> Result<(Complex64, Complex64)> + Send + Sync + 'static,
    {
        Self {
            side,
            source: Source::Function(Arc::new(f)),
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn in_region(&self, l: Complex64) -> bool {
        l.norm() >= crate::exponents::LAMBDA_FLOOR && in_region(self.side, l)
    }

    pub fn eval(&self, l: Complex64) -> Result<(Complex64, Complex64)> {
        if l.norm() < crate::exponents::LAMBDA_FLOOR {
            return Err(Error::Domain(format!("spectral pair evaluated at {l}")));
        }
        if !in_region(self.side, l) {
            return Err(Error::Region(format!(
                "{l} outside the validity region of side {}",
                self.side.index()
            )));
        }
        match &self.source {
            Source::Trivial => Ok((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))),
            Source::Boundary { data, params, cfg } => {
                let v = spectral_functions(data, l, params, cfg)?;
                Ok((v.a, v.b))
            }
            Source::Function(f) => f(l),
        }
    }
}

/// `max |a(l) a(-l) - b(l) b(-l) - 1|` over the samples.
pub fn unit_determinant_residual(pair: &SpectralPair, samples: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &l in samples {
        if !pair.in_region(l) || !pair.in_region(-l) {
            return Err(Error::Region(format!(
                "sample {l} or its negative lies outside the validity region"
            )));
        }
        let (a, b) = pair.eval(l)?;
        let (am, bm) = pair.eval(-l)?;
        worst = worst.max((a * am - b * bm - 1.0).norm());
    }
    Ok(worst)
}

/// Residuals of the two global relations over samples in the closed upper half plane.
pub fn global_relation_residual(
    s1: &SpectralPair,
    s2: &SpectralPair,
    s3: &SpectralPair,
    params: &ProblemParams,
    samples: &[Complex64],
) -> Result<(f64, f64)> {
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for &l in samples {
        let (a1, b1) = s1.eval(l)?;
        let (a3, b3) = s3.eval(l)?;
        let (a2, b2) = s2.eval(l)?;
        let (a2m, b2m) = s2.eval(-l)?;
        let e = (-omega(l)? * params.width).exp();
        r1 = r1.max((a1 - a2m * a3 + b2m * b3).norm());
        r2 = r2.max((b1 * e - a2 * b3 + a3 * b2).norm());
    }
    Ok((r1, r2))
}
