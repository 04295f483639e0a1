//! A field sweep on the small-data grid followed by the full verification report.

use esg_rh::config::RunConfig;
use esg_rh::contour::ContourDiscretization;
use esg_rh::linearizable::{HQuadrature, LinearizableSpectrum};
use esg_rh::reconstruct::field_sweep;
use esg_rh::verify::{verification_report, Tolerances};
use esg_rh::Result;

fn main() -> Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/small-d.cfg");
    let cfg = RunConfig::load(&path)?;
    let params = cfg.problem()?;
    let spec = LinearizableSpectrum::new(params, HQuadrature::default())?;
    let disc = ContourDiscretization::new(&spec, cfg.contour_spec())?;
    let field = field_sweep(&cfg.grid, &disc, &params, &cfg.sweep_config())?;
    println!("q at the first grid point ({}, {}): {:.8}", field.xs[0], field.ys[0], field.at(0, 0));
    let report = verification_report(&field, &spec, &cfg.oracle_series()?, &Tolerances::default());
    for c in &report.checks {
        println!("{} {:<18} {:.3e} <= {:.1e}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
    }
    Ok(())
}
