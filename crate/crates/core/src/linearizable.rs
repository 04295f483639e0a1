//! Closed-form spectral data for the boundary values `q(x,0) = q(x,L) = 0`, `q(0,y) = d`.
//!
//! With `t = tan(d/2)`:
//!
//! * `F(l) = i (1 - l^2)/(1 + l^2) t`
//! * `G(l) = F(l) tanh(omega(l) L / 2)`
//! * `h = exp(H)`, where `H` solves the scalar jump problem `H+ - H- = ln(1 - G^2)` on the real line.
//!
//! `c(s) = ln(1 - G(s)^2)` tends to `c_inf = ln(1 + t^2)` both as `s -> 0` and as `s -> inf`.
//! The approach is only algebraic, like `1/s^2`. `G` and `H` are odd, so the Cauchy integral
//! over the real line folds onto the half line:
//!
//! `H(l) = sgn(Im l) c_inf / 2 + (1/2 pi i) int_0^inf (c(s) - c_inf) 2l/(s^2 - l^2) ds`.
//!
//! The integral is evaluated in `u = ln s`. Points far from the real axis use a cached
//! composite Gauss-Legendre table. Points near or on the axis use adaptive quadrature after
//! subtracting the local value `c(|l|)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::omega;
use crate::params::ProblemParams;
use crate::quadrature::{gauss_legendre, integrate};
use crate::volterra::SpectralPair;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Distance from `+-i` inside which bare `F` and `G` report a pole.
pub const POLE_GUARD: f64 = 1e-6;

/// `|Re(omega L)|` beyond which `tanh(omega L / 2)` is replaced by its sign.
pub const TANH_SATURATION: f64 = 40.0;

const PANEL: usize = 16;
const TABLE_MIN_ANGLE: f64 = 0.15;
const ADAPTIVE_U_RANGE: f64 = 40.0;

fn near_pole(l: Complex64) -> bool {
    (l - I).norm() < POLE_GUARD || (l + I).norm() < POLE_GUARD
}

pub fn f_sym(l: Complex64, d: f64) -> Result<Complex64> {
    if near_pole(l) {
        return Err(Error::Pole(format!("F has a pole at {l}")));
    }
    let l2 = l * l;
    Ok(I * (1.0 - l2) / (1.0 + l2) * (0.5 * d).tan())
}

/// `tanh(z/2)` with saturation for large `|Re z|`.
pub fn tanh_half(z: Complex64) -> Result<Complex64> {
    if z.re > TANH_SATURATION {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if z.re < -TANH_SATURATION {
        return Ok(Complex64::new(-1.0, 0.0));
    }
    let h = 0.5 * z;
    let ch = h.cosh();
    if ch.norm() < 1e-12 {
        return Err(Error::Pole(format!("tanh(z/2) has a pole at z = {z}")));
    }
    Ok(h.sinh() / ch)
}

pub fn g_fn(l: Complex64, params: &ProblemParams) -> Result<Complex64> {
    let w = omega(l)?;
    if near_pole(l) {
        return Err(Error::Pole(format!("bare G evaluated at {l}; use the combined form")));
    }
    let l2 = l * l;
    Ok(I * (1.0 - l2) / (1.0 + l2) * tanh_half(w * params.width)? * params.tan_half_d())
}

/// `(e^z - 1)/z`, accurate for small `z`.
pub(crate) fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-5 {
        return 1.0 + z * (0.5 + z / 6.0);
    }
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let em1 = Complex64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s);
    em1 / z
}

/// `G(l) (1 + exp(sign omega(l) L))`, finite at `l = +-i`.
///
/// Since `omega = (1 + l^2)/(2l)`, the combination equals
/// `i t (1 - l^2) L/(2l) * (e^z - 1)/z` with `z = sign omega L`.
pub fn g_times_one_plus_exp(l: Complex64, sign: f64, params: &ProblemParams) -> Result<Complex64> {
    let w = omega(l)?;
    let z = sign * w * params.width;
    Ok(I * params.tan_half_d() * (1.0 - l * l) * params.width / (2.0 * l) * phi1(z))
}

/// Quadrature settings for `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HQuadrature {
    /// The cached table covers `s` in `[1/r_cut, r_cut]`.
    pub r_cut: f64,
    /// Total Gauss-Legendre nodes in the cached table (rounded up to panels of 16).
    pub n_nodes: usize,
}

impl Default for HQuadrature {
    fn default() -> Self {
        Self {
            r_cut: 1e4,
            n_nodes: 1024,
        }
    }
}

/// Values of `c(s) = ln(1 - G(s)^2)` and `g(s) = c(s) - c_inf` for real `s > 0`.
#[derive(Debug, Clone, Copy)]
struct RealSample {
    c: f64,
    g: f64,
}

/// `F`, `G`, `h` for fixed `(d, L)`, with the cached node table for `H`.
#[derive(Debug, Clone)]
pub struct LinearizableSpectrum {
    params: ProblemParams,
    quadrature: HQuadrature,
    t2: f64,
    c_inf: f64,
    kappa4: f64,
    table_s: Vec<f64>,
    table_wg: Vec<f64>,
}

impl LinearizableSpectrum {
    pub fn new(params: ProblemParams, quadrature: HQuadrature) -> Result<Self> {
        if !(quadrature.r_cut.is_finite() && quadrature.r_cut > 100.0) {
            return Err(Error::Config(format!(
                "r_cut = {} must exceed 100",
                quadrature.r_cut
            )));
        }
        if quadrature.n_nodes < PANEL {
            return Err(Error::Config(format!(
                "n_nodes = {} must be at least {PANEL}",
                quadrature.n_nodes
            )));
        }
        let t = params.tan_half_d();
        let t2 = t * t;
        let mut spec = Self {
            params,
            quadrature,
            t2,
            c_inf: t2.ln_1p(),
            kappa4: 4.0 * t2 / (1.0 + t2),
            table_s: Vec::new(),
            table_wg: Vec::new(),
        };
        let panels = quadrature.n_nodes.div_ceil(PANEL);
        let (xg, wg) = gauss_legendre(PANEL);
        let umax = quadrature.r_cut.ln();
        let width = 2.0 * umax / panels as f64;
        for p in 0..panels {
            let mid = -umax + (p as f64 + 0.5) * width;
            for (x, w) in xg.iter().zip(&wg) {
                let s = (mid + 0.5 * width * x).exp();
                spec.table_s.push(s);
                spec.table_wg.push(0.5 * width * w * spec.sample(s).g);
            }
        }
        Ok(spec)
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn quadrature(&self) -> &HQuadrature {
        &self.quadrature
    }

    /// `ln(1 + tan^2(d/2))`, the limit of `ln(1 - G^2)` at `0` and `inf`.
    pub fn c_inf(&self) -> f64 {
        self.c_inf
    }

    fn sample(&self, s: f64) -> RealSample {
        let s2 = s * s;
        let rho = (1.0 - s2) / (1.0 + s2);
        let half = 0.25 * (s + 1.0 / s) * self.params.width;
        let tau = half.tanh();
        let ch = half.cosh();
        let sech2 = 1.0 / (ch * ch);
        let q = 1.0 + s2;
        let rt_m1 = -rho * rho * sech2 - 4.0 * s2 / (q * q);
        let c = (rho * rho * tau * tau * self.t2).ln_1p();
        let g = (rt_m1 * self.t2 / (1.0 + self.t2)).ln_1p();
        RealSample { c, g }
    }

    /// `ln(1 - G(s)^2)` for real `s`.
    pub fn log_one_minus_g2(&self, s: f64) -> f64 {
        self.sample(s.abs()).c
    }

    /// `(1/2 pi i) int_0^inf (g(s) - g(a)) 2l/(s^2 - l^2) ds` with `a = |l|`, `Re l >= 0`.
    fn folded_adaptive(&self, l: Complex64) -> Result<Complex64> {
        let a = l.norm();
        let ga = self.sample(a).g;
        let l2 = l * l;
        let two_l = 2.0 * l;
        let f = |u: f64| {
            let s = u.exp();
            let gs = self.sample(s).g;
            (gs - ga) * two_l * s / (s * s - l2)
        };
        let ua = a.ln();
        let v = integrate(
            f,
            -ADAPTIVE_U_RANGE,
            ADAPTIVE_U_RANGE,
            &[ua, ua - 1.0, ua + 1.0],
            1e-14,
            1e-13,
        )?;
        Ok(v / (2.0 * PI * I))
    }

    fn folded_table(&self, l: Complex64) -> Complex64 {
        let l2 = l * l;
        let mut acc = Complex64::new(0.0, 0.0);
        for (&s, &wg) in self.table_s.iter().zip(&self.table_wg) {
            acc += wg * s / (s * s - l2);
        }
        acc *= 2.0 * l;
        let r3 = self.quadrature.r_cut.powi(3);
        acc += -self.kappa4 * 2.0 * l / (3.0 * r3) + 2.0 * self.kappa4 / (3.0 * l * r3);
        acc / (2.0 * PI * I)
    }

    fn use_table(&self, l: Complex64) -> bool {
        let r = l.norm();
        let angle = l.im.abs().atan2(l.re.abs());
        angle >= TABLE_MIN_ANGLE
            && r >= 10.0 / self.quadrature.r_cut
            && r <= self.quadrature.r_cut / 10.0
    }

    /// `H(l)` for `Re l >= 0`, `Im l != 0`.
    fn h_exponent_right(&self, l: Complex64) -> Result<Complex64> {
        let sgn = l.im.signum();
        if self.use_table(l) {
            Ok(sgn * self.c_inf / 2.0 + self.folded_table(l))
        } else {
            let c = self.sample(l.norm()).c;
            Ok(sgn * c / 2.0 + self.folded_adaptive(l)?)
        }
    }

    /// `H(l)` off the real axis.
    pub fn cauchy_log_transform(&self, l: Complex64) -> Result<Complex64> {
        if !l.is_finite() || l.norm() < crate::exponents::LAMBDA_FLOOR {
            return Err(Error::Domain(format!("H evaluated at {l}")));
        }
        if l.im == 0.0 {
            return Err(Error::Region(format!(
                "H at real {l} needs a boundary value; use h_boundary_pair"
            )));
        }
        if self.t2 == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if l.re < 0.0 {
            Ok(-self.h_exponent_right(-l)?)
        } else {
            self.h_exponent_right(l)
        }
    }

    pub fn h_fn(&self, l: Complex64) -> Result<Complex64> {
        Ok(self.cauchy_log_transform(l)?.exp())
    }

    /// Upper boundary value `H+(l)` for real `l != 0`.
    pub fn h_plus_exponent(&self, l: f64) -> Result<Complex64> {
        if !l.is_finite() || l.abs() < crate::exponents::LAMBDA_FLOOR {
            return Err(Error::Domain(format!("H+ evaluated at {l}")));
        }
        if self.t2 == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let a = l.abs();
        let c = self.sample(a).c;
        let odd = self.folded_adaptive(Complex64::new(a, 0.0))?;
        Ok(if l > 0.0 { c / 2.0 + odd } else { c / 2.0 - odd })
    }

    /// `(h+(l), (1 - G(l)^2)/h+(l))`; the second value is the boundary value of `h` at `-l`.
    pub fn h_boundary_pair(&self, l: f64) -> Result<(Complex64, Complex64)> {
        let hp = self.h_plus_exponent(l)?;
        let c = self.sample(l.abs()).c;
        Ok((hp.exp(), (c - hp).exp()))
    }
}

/// `(a2, b2)` from sides 1 and 3.
pub fn a2b2_from_sides(
    s1: &SpectralPair,
    s3: &SpectralPair,
    l: Complex64,
    params: &ProblemParams,
) -> Result<(Complex64, Complex64)> {
    let (a1m, _) = s1.eval(-l)?;
    let (_, b1) = s1.eval(l)?;
    let (a3, b3) = s3.eval(l)?;
    let (a3m, b3m) = s3.eval(-l)?;
    let e = (-omega(l)? * params.width).exp();
    Ok((a1m * a3 - e * b1 * b3m, a1m * b3 - e * b1 * a3m))
}

/// Maximum residuals of the identities linking sides 1 and 3 on the real axis.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RelationAudit {
    /// `a1 b1(-l) - a1(-l) b1 - G`
    pub rel1: f64,
    /// `a3 b3(-l) - a3(-l) b3 + G`
    pub rel2: f64,
    /// `(a1^2 - b1^2)(a1(-l)^2 - b1(-l)^2) - (1 - G^2)`
    pub fact0: f64,
    /// `a1(-l), b1(-l)` against `(a1 + G b1)/h1`, `(b1 + G a1)/h1` with `h1 = a1^2 - b1^2`
    pub sol2: f64,
    /// `a3(-l), b3(-l)` against `(a3 - G b3)/h3`, `(b3 - G a3)/h3` with `h3 = a3^2 - b3^2`
    pub sol2a3: f64,
    /// Quadratic identity in `exp(+-omega L)`, normalised by `2 cosh(omega L)`.
    pub finid: f64,
    /// `|a1^2 - b1^2 - h+|` against the scalar jump solution (informational).
    pub sol1: f64,
}

pub fn relation_audit(
    s1: &SpectralPair,
    s3: &SpectralPair,
    spec: &LinearizableSpectrum,
    samples: &[f64],
) -> Result<RelationAudit> {
    let p = spec.params();
    let mut out = RelationAudit::default();
    for &x in samples {
        let l = Complex64::new(x, 0.0);
        let g = g_fn(l, p)?;
        let f = f_sym(l, p.d)?;
        let (a1, b1) = s1.eval(l)?;
        let (a1m, b1m) = s1.eval(-l)?;
        let (a3, b3) = s3.eval(l)?;
        let (a3m, b3m) = s3.eval(-l)?;
        out.rel1 = out.rel1.max((a1 * b1m - a1m * b1 - g).norm());
        out.rel2 = out.rel2.max((a3 * b3m - a3m * b3 + g).norm());
        let h1 = a1 * a1 - b1 * b1;
        let h1m = a1m * a1m - b1m * b1m;
        out.fact0 = out.fact0.max((h1 * h1m - (1.0 - g * g)).norm());
        out.sol2 = out
            .sol2
            .max((a1m - (a1 + g * b1) / h1).norm())
            .max((b1m - (b1 + g * a1) / h1).norm());
        let h3 = a3 * a3 - b3 * b3;
        out.sol2a3 = out
            .sol2a3
            .max((a3m - (a3 - g * b3) / h3).norm())
            .max((b3m - (b3 - g * a3) / h3).norm());
        let wl = omega(l)?.re * p.width;
        let (ep, em) = (wl.exp(), (-wl).exp());
        let lhs = ep * h1 + em * h1m;
        let rhs = (ep + em) * (1.0 - f * f) + 2.0 * f * f;
        out.finid = out.finid.max((lhs - rhs).norm() / (ep + em));
        let (hp, _) = spec.h_boundary_pair(x)?;
        out.sol1 = out.sol1.max((h1 - hp).norm());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn spec(d: f64, width: f64) -> LinearizableSpectrum {
        LinearizableSpectrum::new(ProblemParams::new(d, width).unwrap(), HQuadrature::default())
            .unwrap()
    }

    #[test]
    fn f_values() {
        assert!(f_sym(c(1.0, 0.0), 0.7).unwrap().norm() < 1e-15);
        assert!((f_sym(c(0.0, 0.0), PI / 2.0).unwrap() - I).norm() < 1e-15);
        assert!(matches!(f_sym(I, 0.5), Err(Error::Pole(_))));
    }

    #[test]
    fn g_values() {
        let p = ProblemParams::new(0.8, 1.3).unwrap();
        assert!(g_fn(c(1.0, 0.0), &p).unwrap().norm() < 1e-15);
        let big = g_fn(c(1e6, 0.0), &p).unwrap();
        assert!((big - c(0.0, -(0.4f64).tan())).norm() < 1e-10);
        assert!(matches!(g_fn(c(0.0, 0.0), &p), Err(Error::Domain(_))));
        assert!(matches!(g_fn(c(0.0, 1.0 + 1e-8), &p), Err(Error::Pole(_))));
    }

    #[test]
    fn combined_form_matches_naive_product() {
        let p = ProblemParams::new(0.9, 2.0).unwrap();
        let l = c(0.5, 0.5);
        let w = omega(l).unwrap();
        for sign in [1.0, -1.0] {
            let naive = g_fn(l, &p).unwrap() * (1.0 + (sign * w * p.width).exp());
            let combo = g_times_one_plus_exp(l, sign, &p).unwrap();
            assert!((naive - combo).norm() < 1e-12, "{naive} {combo}");
        }
    }

    #[test]
    fn combined_form_is_continuous_through_plus_minus_i() {
        let p = ProblemParams::new(0.9, 2.0).unwrap();
        for pole in [I, -I] {
            let at = g_times_one_plus_exp(pole, 1.0, &p).unwrap();
            let near = g_times_one_plus_exp(pole * 1.001, 1.0, &p).unwrap();
            assert!((at - near).norm() < 1e-2);
            let naive = g_fn(pole * 1.001, &p).unwrap()
                * (1.0 + (omega(pole * 1.001).unwrap() * p.width).exp());
            assert!((naive - near).norm() < 1e-10);
        }
        let limit = g_times_one_plus_exp(I, 1.0, &p).unwrap();
        assert!((limit - c(p.width * p.tan_half_d(), 0.0)).norm() < 1e-14);
        assert_eq!(g_times_one_plus_exp(c(1.0, 0.0), 1.0, &p).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn zero_d_gives_trivial_scalar_problem() {
        let s = spec(0.0, 1.0);
        assert_eq!(s.cauchy_log_transform(c(0.3, 0.7)).unwrap(), c(0.0, 0.0));
        let (hp, hm) = s.h_boundary_pair(0.4).unwrap();
        assert_eq!((hp, hm), (c(1.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn h_is_odd_and_unimodular_pairs() {
        let s = spec(1.0, 1.0);
        for l in [c(1.0, 1.0), c(0.2, 0.05), c(3.0, -0.4), c(0.0, 2.0)] {
            let h = s.cauchy_log_transform(l).unwrap();
            let hm = s.cauchy_log_transform(-l).unwrap();
            assert!((h + hm).norm() < 1e-10);
            assert!((s.h_fn(l).unwrap() * s.h_fn(-l).unwrap() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_reflects_h() {
        let s = spec(1.0, 1.0);
        let l = c(0.7, 1.3);
        let h = s.cauchy_log_transform(l).unwrap();
        let hb = s.cauchy_log_transform(l.conj()).unwrap();
        assert!((hb.conj() + h).norm() < 1e-11);
    }

    #[test]
    fn table_and_adaptive_paths_agree() {
        let s = spec(0.5, 2.0);
        for l in [c(0.6, 0.4), c(2.0, 1.0), c(0.05, 0.03), c(0.0, 0.3)] {
            let a = s.h_exponent_right(l).unwrap();
            let sgn = l.im.signum();
            let b = sgn * s.sample(l.norm()).c / 2.0 + s.folded_adaptive(l).unwrap();
            assert!((a - b).norm() < 1e-11, "{l}: {a} vs {b}");
        }
    }

    #[test]
    fn h_tends_to_half_c_inf_at_infinity() {
        let s = spec(1.0, 1.0);
        let dir = Complex64::from_polar(1.0, PI / 4.0);
        let h3 = s.cauchy_log_transform(dir * 1e3).unwrap();
        let h4 = s.cauchy_log_transform(dir * 1e4).unwrap();
        let target = s.c_inf() / 2.0;
        assert!((h4 - target).norm() < (h3 - target).norm());
        assert!((h4 - target).norm() < 1e-3);
    }

    #[test]
    fn plemelj_product_from_off_axis_limits() {
        let s = spec(0.5, 2.0);
        let p = *s.params();
        for x in [0.3, 1.0, 2.5, -0.8] {
            let prod = |eps: f64| {
                s.h_fn(c(x, eps)).unwrap() * s.h_fn(c(-x, eps)).unwrap()
            };
            let extrap = (10.0 * prod(1e-4) - prod(1e-3)) / 9.0;
            let g = g_fn(c(x, 0.0), &p).unwrap();
            assert!((extrap - (1.0 - g * g)).norm() < 1e-6);
            let (hp, hm) = s.h_boundary_pair(x).unwrap();
            assert!((hp * hm - (1.0 - g * g)).norm() < 1e-13);
            let upper = (10.0 * s.h_fn(c(x, 1e-4)).unwrap() - s.h_fn(c(x, 1e-3)).unwrap()) / 9.0;
            assert!((upper - hp).norm() < 1e-6);
        }
    }

    #[test]
    fn h_plus_at_one_has_no_local_term() {
        let s = spec(0.5, 2.0);
        let hp = s.h_plus_exponent(1.0).unwrap();
        assert!(hp.re.abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn g_is_odd_and_imaginary_on_the_real_line(x in 0.01f64..50.0, d in -3.0f64..3.0) {
            let p = ProblemParams::new(d, 1.5).unwrap();
            let g = g_fn(c(x, 0.0), &p).unwrap();
            let gm = g_fn(c(-x, 0.0), &p).unwrap();
            prop_assert!((g + gm).norm() <= 1e-12 * (1.0 + g.norm()));
            let one_minus = 1.0 - g * g;
            prop_assert!(one_minus.im.abs() <= 1e-14);
            prop_assert!(one_minus.re >= 1.0);
        }

        #[test]
        fn tanh_form_equivalence(re in -30.0f64..30.0, im in -10.0f64..10.0) {
            let z = c(re, im);
            prop_assume!((0.5 * z).cosh().norm() > 1e-3);
            let raw = (z.exp() + (-z).exp() - 2.0) / (z.exp() - (-z).exp());
            let t = tanh_half(z).unwrap();
            prop_assert!((raw - t).norm() <= 1e-12 * (1.0 + t.norm()));
        }
    }
}
