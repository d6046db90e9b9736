//! Shared numeric machinery: compensated summation, bracketed root finding,
//! derivative-free extremization, and the gamma-family special functions.

pub mod roots;
pub mod special;
pub mod sum;

pub use roots::{bisect, golden_extremum, least_squares_slope, scan_extrema, ScanExtrema};
pub use special::{digamma, ln_gamma};
pub use sum::NeumaierSum;
