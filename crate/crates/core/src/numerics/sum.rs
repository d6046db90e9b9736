//! Neumaier compensated summation.
//!
//! The bi-infinite spectral sums mix magnitudes across many decades, so every
//! accumulation longer than a few dozen terms goes through this accumulator.
//! The rounding error is O(ε)·Σ|xᵢ| independent of the term count.

/// Compensated accumulator (Neumaier's variant of Kahan summation).
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += value.abs();
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    /// Σ|xᵢ| over everything added so far; used to bound the floating-point
    /// contribution in truncation certificates.
    #[inline]
    pub fn abs_value(&self) -> f64 {
        self.abs_sum
    }

    /// Rigorous bound on the rounding error of `value()`.
    #[inline]
    pub fn rounding_bound(&self) -> f64 {
        4.0 * f64::EPSILON * self.abs_sum
    }
}
