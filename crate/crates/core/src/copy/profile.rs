//! Cost of relation queries against input length, and a polynomial fit.

use std::fmt::Write as _;

/// `(n, steps)` per query.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepProfile {
    pub samples: Vec<(u64, u64)>,
}

/// Slack allowed when a bound fitted on the smaller inputs is extrapolated to
/// the larger ones.
pub const FIT_SLACK: f64 = 1.5;

/// Inputs shorter than this are ignored by the fit: constant overheads
/// dominate there.
pub const MIN_FIT_LENGTH: u64 = 4;

impl StepProfile {
    pub fn push(&mut self, n: u64, steps: u64) {
        self.samples.push((n, steps));
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("n,steps\n");
        for (n, s) in &self.samples {
            let _ = writeln!(out, "{n},{s}");
        }
        out
    }

    fn fit_points(&self) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .filter(|&&(n, s)| n >= MIN_FIT_LENGTH && s > 0)
            .map(|&(n, s)| (n as f64, s as f64))
            .collect()
    }

    /// Least-squares slope of `log steps` against `log n`.
    pub fn slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.fit_points().iter().map(|&(n, s)| (n.ln(), s.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), &(x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        (den > 0.0).then(|| num / den)
    }

    /// The least `k` such that `c = max steps / n^k` over the inputs no longer
    /// than the median bounds every sample by `FIT_SLACK * c * n^k`.
    pub fn degree(&self) -> Option<u32> {
        let mut pts = self.fit_points();
        if pts.len() < 2 {
            return None;
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let median = pts[pts.len() / 2].0;
        (0..=8).find(|&k| {
            let c = pts
                .iter()
                .filter(|p| p.0 <= median)
                .map(|&(n, s)| s / n.powi(k as i32))
                .fold(0.0, f64::max);
            pts.iter().all(|&(n, s)| s <= FIT_SLACK * c * n.powi(k as i32))
        })
    }
}
