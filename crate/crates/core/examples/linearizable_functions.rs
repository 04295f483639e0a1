//! The scalar functions behind the jump matrices: `G` on the real line, the scalar
//! factorization `h`, and its boundary values.

use esg_rh::linearizable::{g_fn, HQuadrature, LinearizableSpectrum};
use esg_rh::{ProblemParams, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    let params = ProblemParams::new(0.5, 2.0)?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    println!("c_inf = {:.6}", spec.c_inf());
    println!("{:>8} {:>14} {:>14} {:>14}", "lambda", "Im G", "|h+ h- - (1-G^2)|", "arg h+");
    for l in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let g = g_fn(Complex64::new(l, 0.0), &params)?;
        let (hp, hm) = spec.h_boundary_pair(l)?;
        let defect = (hp * hm - (1.0 - g * g)).norm();
        println!("{l:>8} {:>14.6e} {defect:>14.2e} {:>14.6}", g.im, hp.arg());
    }
    let l = Complex64::new(0.7, 1.3);
    println!("h(l) h(-l) at {l} = {:.3e}", spec.h_fn(l)? * spec.h_fn(-l)?);
    Ok(())
}
