//! Complex special functions, sparse bivariate series and the DFT solve
//! used by the block-triangular inversions.

mod dft;
mod gamma;
mod quadrature;
mod series;

pub use dft::{root_of_unity, vandermonde_apply, vandermonde_solve};
pub use gamma::{reciprocal_gamma, sin_pi};
pub use quadrature::segment_integral;
pub use series::{series_exp, series_log_ratio, BiSeries, CoeffTable, DenseBiSeries, Poly1};

pub use num_complex::Complex64;
