//! Elliptic sine-Gordon equation `q_xx + q_yy = sin q` on the semistrip
//! `{x > 0, 0 < y < L}` with `q(x,0) = q(x,L) = 0` and `q(0,y) = d`.
//!
//! The solution is obtained from a 2x2 matrix Riemann-Hilbert problem on the cross
//! `R u iR`. Its jump matrices are explicit in `d` and `L`.
//!
//! * [`linearizable`]: closed-form spectral data `F`, `G`, `h`.
//! * [`contour`], [`jumps`], [`rh`]: discretized contour, jump matrices, collocation solver.
//! * [`reconstruct`]: recovery of `q` from the RH solution and grid sweeps.
//! * [`volterra`]: spectral functions of boundary traces and the global relations.
//! * [`verify`]: oracles, PDE residual, boundary recovery, spectral round trip.
//! * [`config`], [`output`], [`cli`]: run configuration, data files and the command-line driver.

pub mod algebra;
pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod exponents;
pub mod jumps;
pub mod linearizable;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod reconstruct;
pub mod rh;
pub mod verify;
pub mod volterra;

pub use algebra::Matrix2;
pub use error::{Error, Result};
pub use params::{PhysicalPoint, ProblemParams};
