//! Deterministic reductions and small summary statistics.
//!
//! Row means are computed over fixed-size blocks that may run on any rayon
//! worker; block sums are then combined by pairwise summation in block order,
//! so the result does not depend on the thread count.

use rayon::prelude::*;

/// Rows per reduction block.
pub const BLOCK: usize = 4096;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Mean of `f(i)` for i in 0..n, bit-stable across thread counts.
pub fn block_mean<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    block_means::<1, _>(n, |i| [f(i)])[0]
}

/// Several row means evaluated in one pass; same determinism contract as [`block_mean`].
pub fn block_means<const K: usize, F>(n: usize, f: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let sums: Vec<[f64; K]> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n);
            let mut buf: Vec<[f64; K]> = (lo..hi).map(&f).collect();
            let mut out = [0.0; K];
            let mut col = Vec::with_capacity(buf.len());
            for (k, slot) in out.iter_mut().enumerate() {
                col.clear();
                col.extend(buf.iter().map(|r| r[k]));
                *slot = pairwise_sum(&col);
            }
            buf.clear();
            out
        })
        .collect();
    let mut out = [0.0; K];
    let mut col = Vec::with_capacity(sums.len());
    for (k, slot) in out.iter_mut().enumerate() {
        col.clear();
        col.extend(sums.iter().map(|r| r[k]));
        *slot = pairwise_sum(&col) / n as f64;
    }
    out
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() - 1) as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Kolmogorov-Smirnov distance between the empirical d.f. of `v` and `cdf`.
pub fn ks_distance(v: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Sample Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let va: Vec<f64> = a.iter().map(|x| (x - ma) * (x - ma)).collect();
    let vb: Vec<f64> = b.iter().map(|y| (y - mb) * (y - mb)).collect();
    pairwise_sum(&cov) / (pairwise_sum(&va) * pairwise_sum(&vb)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_mean_matches_plain_mean() {
        let n = 3 * BLOCK + 17;
        let m = block_mean(n, |i| i as f64);
        assert_eq!(m, (n - 1) as f64 / 2.0);
    }

    #[test]
    fn block_mean_is_thread_count_invariant() {
        let f = |i: usize| ((i as f64) * 0.618_033_988_749).fract().powf(1.7);
        let n = 50_000;
        let run = |t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(|| block_mean(n, f))
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(3).to_bits());
        assert_eq!(one.to_bits(), run(8).to_bits());
    }

    #[test]
    fn summaries() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(variance(&[1.0, 2.0, 3.0, 4.0]), 5.0 / 3.0);
        let ks = ks_distance(&[0.5], |x| x);
        assert_eq!(ks, 0.5);
    }
}
