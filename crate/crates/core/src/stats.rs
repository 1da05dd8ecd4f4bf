//! Small descriptive statistics over replicate draws.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation with the `n - 1` divisor; zero below two draws.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mu = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Quantile `q` of already sorted values, interpolating linearly between
/// order statistics at position `q (n - 1)`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Mean, spread and central 95% percentile interval of a set of draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    /// Standard error of the mean, `sd / sqrt(n)`.
    pub se: f64,
    pub p2_5: f64,
    pub p97_5: f64,
}

pub fn spread(xs: &[f64]) -> Spread {
    let s = sorted(xs);
    let sd = sample_sd(xs);
    Spread {
        n: xs.len(),
        mean: mean(xs),
        sd,
        se: if xs.is_empty() {
            f64::NAN
        } else {
            sd / (xs.len() as f64).sqrt()
        },
        p2_5: percentile(&s, 0.025),
        p97_5: percentile(&s, 0.975),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_eq!(mean(&xs), 5.0);
        assert_abs_diff_eq!(sample_sd(&xs), (32.0f64 / 7.0).sqrt(), epsilon = 1e-12);
        let s = sorted(&xs);
        assert_eq!(percentile(&s, 0.0), 2.0);
        assert_eq!(percentile(&s, 1.0), 9.0);
        assert_eq!(percentile(&s, 0.5), 4.5);
        assert_abs_diff_eq!(percentile(&[0.0, 10.0], 0.25), 2.5);
    }

    #[test]
    fn empty_and_single() {
        assert!(mean(&[]).is_nan());
        assert_eq!(sample_sd(&[3.0]), 0.0);
        assert_eq!(percentile(&[3.0], 0.975), 3.0);
    }

    proptest! {
        #[test]
        fn percentiles_are_ordered(xs in prop::collection::vec(-1e3f64..1e3, 1..50)) {
            let sp = spread(&xs);
            let s = sorted(&xs);
            prop_assert!(s[0] <= sp.p2_5 && sp.p2_5 <= sp.p97_5 && sp.p97_5 <= s[s.len() - 1]);
            prop_assert!(s[0] <= sp.mean + 1e-9 && sp.mean <= s[s.len() - 1] + 1e-9);
        }
    }
}
