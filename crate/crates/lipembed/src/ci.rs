use statrs::distribution::{Beta, ContinuousCDF};

/// Exact (Clopper-Pearson) 95% binomial interval.
pub fn clopper_pearson(successes: u64, trials: u64) -> (f64, f64) {
    clopper_pearson_level(successes, trials, 0.05)
}

pub fn clopper_pearson_level(s: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(s <= n && n > 0);
    let (sf, nf) = (s as f64, n as f64);
    let lo = if s == 0 { 0.0 } else { Beta::new(sf, nf - sf + 1.0).unwrap().inverse_cdf(alpha / 2.0) };
    let hi = if s == n { 1.0 } else { Beta::new(sf + 1.0, nf - sf).unwrap().inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}
