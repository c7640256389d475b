//! Small numeric helpers used throughout the crate.

/// Kahan compensated summation.
///
/// Keeps reductions accurate to a few ulps regardless of term count, with a
/// deterministic result for a given input order.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// log(sum(exp(x_i))) with the max-shift trick.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_matches_exact_on_small_input() {
        assert_eq!(kahan_sum([1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn kahan_beats_naive_on_ill_conditioned_input() {
        // 1 + 1e-16 repeated: naive summation loses the small terms entirely.
        let mut values = vec![1.0];
        values.extend(std::iter::repeat(1e-16).take(10_000));
        let compensated = kahan_sum(values.iter().copied());
        assert!((compensated - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_uniform() {
        let xs = vec![0.5; 64];
        assert!((log_sum_exp(&xs) - (0.5 + 64f64.ln())).abs() < 1e-13);
    }

    #[test]
    fn log_sum_exp_handles_large_magnitudes() {
        let xs = vec![1000.0, 1000.0];
        assert!((log_sum_exp(&xs) - (1000.0 + 2f64.ln())).abs() < 1e-10);
    }
}
