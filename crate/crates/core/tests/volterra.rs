//! Spectral functions of sampled boundary traces: weak-data limit, unit determinant and
//! convergence under step halving.

use esg_rh::exponents::omega_big;
use esg_rh::volterra::{spectral_functions, unit_determinant_residual, BoundarySideData, Side, SpectralPair, VolterraConfig};
use esg_rh::ProblemParams;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `q = 0` and `q_y = eps e^{-x}` on a horizontal side.
fn decaying_neumann(side: Side, eps: f64, step: f64, length: f64) -> BoundarySideData {
    let n = (length / step).round() as usize;
    let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let neumann = nodes.iter().map(|x| eps * (-x).exp()).collect();
    BoundarySideData::new(side, nodes, vec![0.0; n + 1], neumann).unwrap()
}

fn samples() -> Vec<Complex64> {
    vec![c(0.0, 1.0), c(0.5, 0.5), c(1.5, 0.8), c(-0.7, 1.2), c(2.0, 0.0), c(0.6, 0.0)]
}

#[test]
fn weak_data_matches_first_order_formula() {
    let params = ProblemParams::new(0.0, 1.0).unwrap();
    let eps = 1e-3;
    let data = decaying_neumann(Side::Side1, eps, 0.005, 40.0);
    let cfg = VolterraConfig { max_step: 0.005, ..VolterraConfig::default() };
    let mut worst: f64 = 0.0;
    for l in samples() {
        let v = spectral_functions(&data, l, &params, &cfg).unwrap();
        let born = -(eps / 4.0) / (1.0 + omega_big(l).unwrap());
        worst = worst.max((v.b - born).norm()).max((v.a - 1.0).norm());
    }
    println!("weak-data deviation {worst:.3e}");
    assert!(worst <= 1e-6, "{worst:e}");
}

#[test]
fn unit_determinant_on_the_real_axis() {
    let params = ProblemParams::new(0.0, 1.0).unwrap();
    let real: Vec<Complex64> = [0.3, 0.8, 1.0, 1.7, 3.0].iter().map(|&x| c(x, 0.0)).collect();
    for eps in [1e-3, 0.1, 0.5] {
        for side in [Side::Side1, Side::Side3] {
            let pair = SpectralPair::from_boundary(
                decaying_neumann(side, eps, 0.01, 40.0),
                params,
                VolterraConfig::default(),
            );
            let r = unit_determinant_residual(&pair, &real).unwrap();
            assert!(r <= 1e-8, "eps {eps}: {r:e}");
        }
    }
}

#[test]
fn second_order_under_step_halving() {
    let params = ProblemParams::new(0.0, 1.0).unwrap();
    let eps = 0.3;
    let b = |h: f64, l: Complex64| {
        let cfg = VolterraConfig { max_step: h, ..VolterraConfig::default() };
        spectral_functions(&decaying_neumann(Side::Side1, eps, h, 30.0), l, &params, &cfg)
            .unwrap()
            .b
    };
    for l in [c(0.5, 0.5), c(1.5, 0.8)] {
        let reference = b(0.0025, l);
        let e1 = (b(0.04, l) - reference).norm();
        let e2 = (b(0.02, l) - reference).norm();
        let order = (e1 / e2).log2();
        println!("{l}: errors {e1:.3e} {e2:.3e}, order {order:.2}");
        assert!(order >= 2.0, "{l}: order {order}");
    }
}
