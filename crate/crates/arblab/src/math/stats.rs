//! Streaming mean/variance with a fixed merge order.
//!
//! Batch estimators collect per-path contributions into an indexed buffer and
//! fold it sequentially, so the result does not depend on how the batch was
//! scheduled across threads.

/// Welford accumulator for mean and variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanVar {
    n: u64,
    mean: f64,
    m2: f64,
}

impl MeanVar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Fold a slice in order.
    pub fn from_slice(xs: &[f64]) -> Self {
        let mut acc = Self::new();
        for &x in xs {
            acc.push(x);
        }
        acc
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}
