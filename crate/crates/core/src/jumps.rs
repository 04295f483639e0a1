//! Jump matrices `J(x, y, l)` on the four rays.
//!
//! With `a = G/h(l)`, `b = G/h(-l)` and `T = e^theta`:
//!
//! ```text
//! ray 0     [[1 - a b e^{-wL}, -a/T], [b T e^{-wL}, 1]]
//! ray pi/2  [[1, combo_pi2 / T], [0, 1]]
//! ray 3pi/2 [[1, 0], [combo_3pi2 T, 1]]
//! ray pi    [[1, -a e^{wL}/T], [b T, 1 - a b e^{wL}]]
//! ```
//!
//! The last matrix is the closed form of `J(3pi/2) J(0)^{-1} J(pi/2)`.
//! Exponents are summed before exponentiating, so every factor stays bounded for
//! interior points.

use num_complex::Complex64;

use crate::algebra::Matrix2;
use crate::contour::{ContourNode, Ray};
use crate::error::{Error, Result};
use crate::params::PhysicalPoint;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_point(p: &PhysicalPoint, width: f64) -> Result<()> {
    if !(p.x >= 0.0 && p.y > 0.0 && p.y < width && p.x.is_finite()) {
        return Err(Error::Domain(format!(
            "jump matrices need 0 < y < L and x >= 0, got ({}, {})",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Jump matrix at a node for the point `p` in a strip of width `width`.
pub fn assemble_jump(node: &ContourNode, p: &PhysicalPoint, width: f64) -> Result<Matrix2> {
    check_point(p, width)?;
    Ok(jump_unchecked(node, p.x, p.y, width))
}

#[inline]
pub(crate) fn jump_unchecked(node: &ContourNode, x: f64, y: f64, width: f64) -> Matrix2 {
    let w = node.omega;
    let wb = node.omega_big;
    let c = &node.coeff;
    match node.ray {
        Ray::Zero => {
            let ab = c.g_over_h * c.g_over_hminus;
            Matrix2::new(
                ONE - ab * (-w * width).exp(),
                -c.g_over_h * (-(wb * x + w * y)).exp(),
                c.g_over_hminus * (wb * x + w * (y - width)).exp(),
                ONE,
            )
        }
        Ray::Pi => {
            let ab = c.g_over_h * c.g_over_hminus;
            Matrix2::new(
                ONE,
                -c.g_over_h * (w * (width - y) - wb * x).exp(),
                c.g_over_hminus * (wb * x + w * y).exp(),
                ONE - ab * (w * width).exp(),
            )
        }
        Ray::HalfPi => Matrix2::new(ONE, c.combo_pi2 * (-(wb * x + w * y)).exp(), ZERO, ONE),
        Ray::ThreeHalfPi => Matrix2::new(ONE, ZERO, c.combo_3pi2 * (wb * x + w * y).exp(), ONE),
    }
}

/// `d J / d x`: the `(1,2)` entries carry `e^{-theta}` and the `(2,1)` entries `e^{theta}`.
#[inline]
pub(crate) fn jump_x_derivative(node: &ContourNode, jump: &Matrix2) -> Matrix2 {
    let wb = node.omega_big;
    Matrix2::new(ZERO, -wb * jump.get(0, 1), wb * jump.get(1, 0), ZERO)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{ContourDiscretization, ContourSpec, Grading};
    use crate::linearizable::{HQuadrature, LinearizableSpectrum};
    use crate::params::ProblemParams;

    fn disc(d: f64, width: f64, n: usize) -> ContourDiscretization {
        let lin = LinearizableSpectrum::new(ProblemParams::new(d, width).unwrap(), HQuadrature::default())
            .unwrap();
        ContourDiscretization::new(&lin, ContourSpec { n_per_ray: n, ..ContourSpec::default() }).unwrap()
    }

    fn pt(x: f64, y: f64) -> PhysicalPoint {
        PhysicalPoint { x, y }
    }

    #[test]
    fn zero_d_gives_identity() {
        let dd = disc(0.0, 1.0, 16);
        for n in dd.nodes() {
            assert_eq!(assemble_jump(n, &pt(0.4, 0.3), 1.0).unwrap(), Matrix2::identity());
        }
    }

    #[test]
    fn unit_determinant_everywhere() {
        let dd = disc(0.5, 2.0, 64);
        for p in [pt(0.1, 0.2), pt(1.0, 1.0), pt(3.0, 1.9), pt(0.0, 0.5)] {
            for n in dd.nodes() {
                let j = assemble_jump(n, &p, 2.0).unwrap();
                assert!((j.det() - 1.0).norm() < 1e-12, "{:?} {}", n.ray, j.det());
            }
        }
    }

    #[test]
    fn boundary_points_rejected() {
        let dd = disc(0.5, 2.0, 8);
        assert!(matches!(assemble_jump(&dd.nodes()[0], &pt(1.0, 2.0), 2.0), Err(Error::Domain(_))));
        assert!(matches!(assemble_jump(&dd.nodes()[0], &pt(-0.1, 1.0), 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn pi_ray_closed_form_matches_triple_product() {
        let dd = disc(0.5, 2.0, 64);
        let n = dd.spec().n_per_ray;
        let p = pt(0.7, 1.3);
        let nodes = dd.nodes();
        for k in 0..n {
            let on_pi = &nodes[2 * n + k];
            let l = on_pi.lambda;
            if (on_pi.omega * 2.0).norm() > 20.0 {
                continue;
            }
            // J(0), J(pi/2), J(3pi/2) continued to l = -r from their closed forms.
            let mut zero = nodes[k];
            zero.lambda = l;
            zero.omega = on_pi.omega;
            zero.omega_big = on_pi.omega_big;
            zero.coeff = on_pi.coeff;
            let mut up = zero;
            up.ray = Ray::HalfPi;
            up.coeff.combo_pi2 = -on_pi.coeff.g_over_h * (1.0 + (on_pi.omega * 2.0).exp());
            let mut down = zero;
            down.ray = Ray::ThreeHalfPi;
            down.coeff.combo_3pi2 = on_pi.coeff.g_over_hminus * (1.0 + (-on_pi.omega * 2.0).exp());
            let j0 = jump_unchecked(&zero, p.x, p.y, 2.0);
            let product = jump_unchecked(&down, p.x, p.y, 2.0)
                * j0.inverse().unwrap()
                * jump_unchecked(&up, p.x, p.y, 2.0);
            let closed = jump_unchecked(on_pi, p.x, p.y, 2.0);
            let err = (product - closed).max_abs();
            let cond = j0.max_abs() * j0.inverse().unwrap().max_abs();
            if (on_pi.omega * 2.0).norm() <= 12.0 {
                assert!(err < 1e-10, "{l}: {err:e}");
            } else {
                assert!(err < 1e-15 * cond, "{l}: {err:e} vs cond {cond:e}");
            }
        }
    }

    #[test]
    fn schwarz_structure() {
        let width = 2.0;
        let dd = disc(0.5, width, 64);
        let n = dd.spec().n_per_ray;
        let nodes = dd.nodes();
        for p in [pt(0.8, 0.5), pt(1.0, 1.0), pt(0.3, 1.7)] {
            for k in 0..n {
                let up = &nodes[n + k];
                let down = &nodes[3 * n + k];
                let delta = (up.omega * (2.0 * p.y - width) / 4.0).exp();
                let conj = |m: Matrix2, dl: Complex64| {
                    let d = Matrix2::diag(dl, dl.inv());
                    d * m * Matrix2::diag(dl.inv(), dl)
                };
                let a = conj(assemble_jump(down, &p, width).unwrap(), (down.omega * (2.0 * p.y - width) / 4.0).exp());
                let b = conj(assemble_jump(up, &p, width).unwrap(), delta).adjoint();
                assert!((a - b).max_abs() < 1e-10 * (1.0 + a.max_abs()));
            }
            for node in &nodes[..n] {
                let dl = (node.omega * (2.0 * p.y - width) / 4.0).exp();
                let d = Matrix2::diag(dl, dl.inv());
                let m = d * assemble_jump(node, &p, width).unwrap() * Matrix2::diag(dl.inv(), dl);
                assert!((m - m.adjoint()).max_abs() < 1e-10 * (1.0 + m.max_abs()));
                assert!(m.get(0, 0).re > 0.0 && (m.det() - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn jumps_decay_at_contour_ends() {
        let lin = LinearizableSpectrum::new(ProblemParams::new(0.5, 2.0).unwrap(), HQuadrature::default())
            .unwrap();
        let spec = ContourSpec { r_min: 1e-2, r_max: 1e2, n_per_ray: 200, grading: Grading::LogUniform };
        let dd = ContourDiscretization::new(&lin, spec).unwrap();
        let p = pt(1.0, 1.0);
        for node in dd.nodes().iter().filter(|n| n.index == 0 || n.index == spec.n_per_ray - 1) {
            let j = assemble_jump(node, &p, 2.0).unwrap();
            assert!((j - Matrix2::identity()).max_abs() <= 1e-8, "{:?} {}", node.ray, node.lambda);
        }
    }
}
