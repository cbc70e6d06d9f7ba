//! Small numeric helpers shared across modules.

/// Neumaier-compensated accumulator. Alternating-sign expansions and long
/// probability sums go through this instead of a bare `+=`.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// ln(n!) for n = 0..=n_max, built by compensated accumulation of ln(i).
pub(crate) fn ln_factorials(n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for i in 1..=n_max {
        acc.add((i as f64).ln());
        out.push(acc.total());
    }
    out
}
