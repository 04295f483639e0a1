//! One Riemann-Hilbert solve at an interior point, with both reconstructions of `q`.

use esg_rh::contour::{ContourDiscretization, ContourSpec};
use esg_rh::linearizable::{HQuadrature, LinearizableSpectrum};
use esg_rh::reconstruct::{q_derivative_combo, q_from_lambda_zero, ProbeConfig};
use esg_rh::rh::{solve_rh, Backend, SolverOptions};
use esg_rh::verify::{linear_oracle, OracleSeries};
use esg_rh::{PhysicalPoint, ProblemParams, Result};

fn main() -> Result<()> {
    let params = ProblemParams::new(0.5, 2.0)?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    let disc = ContourDiscretization::new(&spec, ContourSpec::default())?;
    let p = PhysicalPoint::interior(1.0, 1.0, &params)?;
    for backend in [Backend::Neumann, Backend::Direct] {
        let sol = solve_rh(&p, &disc, &SolverOptions { backend, ..SolverOptions::default() })?;
        let est = q_from_lambda_zero(&p, &disc, &sol, &ProbeConfig::default())?;
        println!(
            "{backend}: q = {:.10}, q_x - i q_y = {:.6}, iterations {}, residual {:.1e}",
            est.q,
            q_derivative_combo(&sol),
            sol.diagnostics.iterations,
            sol.diagnostics.residual
        );
    }
    let oracle = OracleSeries::new(params.d, params.width, 2001)?;
    println!("linearized series at the same point: {:.10}", linear_oracle(&p, &oracle));
    Ok(())
}
