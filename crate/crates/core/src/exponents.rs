//! Spectral exponents of the Lax pair.
//!
//! `omega(l) = (l + 1/l)/2`, `omega_big(l) = (l - 1/l)/(2i)` and the phase
//! `theta = omega_big * x + omega * y`. Near the origin both blow up like `1/l`,
//! so `l` is rejected once `|l| < LAMBDA_FLOOR`.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const LAMBDA_FLOOR: f64 = 1e-14;

#[inline]
fn check(l: Complex64) -> Result<()> {
    if !l.is_finite() || l.norm() < LAMBDA_FLOOR {
        return Err(Error::Domain(format!("spectral parameter {l} too close to 0")));
    }
    Ok(())
}

pub fn omega(l: Complex64) -> Result<Complex64> {
    check(l)?;
    Ok(0.5 * (l + l.inv()))
}

pub fn omega_big(l: Complex64) -> Result<Complex64> {
    check(l)?;
    Ok((l - l.inv()) / Complex64::new(0.0, 2.0))
}

/// Both exponents at once.
pub fn exponents(l: Complex64) -> Result<(Complex64, Complex64)> {
    check(l)?;
    let li = l.inv();
    Ok((0.5 * (l + li), (l - li) / Complex64::new(0.0, 2.0)))
}

pub fn theta(l: Complex64, x: f64, y: f64) -> Result<Complex64> {
    let (w, wb) = exponents(l)?;
    Ok(wb * x + w * y)
}
