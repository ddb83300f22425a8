//! Deterministic reductions.
//!
//! Energy totals are accumulated with pairwise (tree) summation over a fixed
//! cell order, so a report is reproducible bit-for-bit no matter how many
//! worker threads produced the per-cell terms.

/// Pairwise sum of a slice, sequential leaves below a small cutoff.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const CUTOFF: usize = 16;
    if xs.len() <= CUTOFF {
        let mut acc = 0.0;
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Plain dot product; fixed order, used by the inner CG loops.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_uniform_data() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn pairwise_empty_and_single() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[4.25]), 4.25);
    }
}
