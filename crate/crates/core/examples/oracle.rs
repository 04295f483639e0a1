//! The linearized series solution and its decay along the strip.

use esg_rh::verify::{linear_oracle, OracleSeries};
use esg_rh::{PhysicalPoint, Result};

fn main() -> Result<()> {
    let oracle = OracleSeries::new(0.001, 1.0, 2001)?;
    for x in [0.1, 0.5, 1.0, 2.0] {
        let q = linear_oracle(&PhysicalPoint { x, y: 0.5 }, &oracle);
        println!("q({x}, 0.5) = {q:.6e}");
    }
    println!("slowest decay rate {:.6}", oracle.kappa(1));
    Ok(())
}
