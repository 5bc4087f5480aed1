/// Visit count and empirical mean of one arm.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMean {
    pub count: u64,
    pub mean: f64,
}

impl RunningMean {
    pub fn new() -> Self {
        Self::default()
    }

    /// Incremental update `m ← (v + m·N) / (N + 1)`, `N ← N + 1`.
    pub fn push(&mut self, value: f64) {
        let n = self.count as f64;
        self.mean = (value + self.mean * n) / (n + 1.0);
        self.count += 1;
    }

    pub fn updated(mut self, value: f64) -> Self {
        self.push(value);
        self
    }
}

/// Functional form of [`RunningMean::push`].
pub fn update_running_mean(stat: RunningMean, value: f64) -> RunningMean {
    stat.updated(value)
}
