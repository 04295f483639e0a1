//! Boundary traces of the linearized series pushed back through the spectral functions:
//! the global relations and the side identity should vanish.

use esg_rh::linearizable::{HQuadrature, LinearizableSpectrum};
use esg_rh::reconstruct::{GridSpec, SolutionField};
use esg_rh::verify::{linear_oracle, spectral_roundtrip, OracleSeries, RoundTripOptions};
use esg_rh::{PhysicalPoint, ProblemParams, Result};

fn main() -> Result<()> {
    let params = ProblemParams::new(0.01, 1.0)?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    let oracle = OracleSeries::new(params.d, params.width, 4001)?;
    let grid = GridSpec { x_min: 0.2, x_max: 2.0, nx: 19, y_margin: 0.1, ny: 17 };
    let field = SolutionField::from_fn(params, grid.xs(), grid.ys(params.width), |x, y| {
        linear_oracle(&PhysicalPoint { x, y }, &oracle)
    });
    let r = spectral_roundtrip(&field, &spec, &params, &RoundTripOptions::default())?;
    println!("global relations {:.2e} {:.2e}", r.global1, r.global2);
    println!("side identities  {:.2e} {:.2e}", r.relations.rel1, r.relations.rel2);
    println!("unit determinant {:.1e} {:.1e} {:.1e}", r.determinant[0], r.determinant[1], r.determinant[2]);
    Ok(())
}
