//! Spectral functions `(a, b)` of a boundary trace, compared with the weak-data formula.

use esg_rh::exponents::omega_big;
use esg_rh::volterra::{spectral_functions, BoundarySideData, Side, VolterraConfig};
use esg_rh::{ProblemParams, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    let params = ProblemParams::new(0.0, 1.0)?;
    let eps = 1e-2;
    // q = 0 and q_y = eps e^{-x} on the side y = L.
    let nodes: Vec<f64> = (0..=4000).map(|i| i as f64 * 0.01).collect();
    let neumann = nodes.iter().map(|x| eps * (-x).exp()).collect();
    let data = BoundarySideData::new(Side::Side1, nodes.clone(), vec![0.0; nodes.len()], neumann)?;
    for l in [Complex64::new(0.0, 1.0), Complex64::new(1.5, 0.8), Complex64::new(2.0, 0.0)] {
        let v = spectral_functions(&data, l, &params, &VolterraConfig::default())?;
        let weak = -(eps / 4.0) / (1.0 + omega_big(l)?);
        println!("l = {l}: a = {:.8}, b = {:.8}, weak-data b = {:.8}", v.a, v.b, weak);
    }
    Ok(())
}
