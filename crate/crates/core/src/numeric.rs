//! Small numeric helpers shared across modules: compensated summation and
//! base-2 log-domain accumulation.

/// Kahan-Babuska (Neumaier) compensated accumulator.
///
/// Used wherever long sums of similar-magnitude terms feed a tolerance-bound
/// assertion, so the verification margins are not eaten by accumulation error.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// log2(2^a + 2^b), stable for arguments of any magnitude.
pub fn log2_add_exp2(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let d = lo - hi;
    if d < -1080.0 {
        hi
    } else {
        hi + (1.0 + d.exp2()).log2()
    }
}

/// Running sum of 2^{l_i} kept in log2 domain, so geometric series with
/// thousands of doubling terms neither overflow nor lose their head term.
#[derive(Debug, Clone, Copy)]
pub struct Log2Sum {
    log2: f64,
}

impl Log2Sum {
    pub fn empty() -> Self {
        Self {
            log2: f64::NEG_INFINITY,
        }
    }

    pub fn add_log2_term(&mut self, term_log2: f64) {
        self.log2 = log2_add_exp2(self.log2, term_log2);
    }

    pub fn log2(&self) -> f64 {
        self.log2
    }

    /// Linear-domain value; +inf when the sum exceeds f64 range.
    pub fn value(&self) -> f64 {
        self.log2.exp2()
    }
}
