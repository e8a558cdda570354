//! Parallel sums with a reduction order fixed by the input length alone, so
//! repeated runs give bit-identical results whatever the thread schedule.

use rayon::prelude::*;

const CHUNK: usize = 1 << 14;

/// `Σ_{i<len} f(i)` componentwise.
pub(crate) fn ordered_sums<const K: usize>(len: usize, f: impl Fn(usize) -> [f64; K] + Sync) -> [f64; K] {
    let parts: Vec<[f64; K]> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                let v = f(i);
                for k in 0..K {
                    acc[k] += v[k];
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; K];
    for p in parts {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    total
}

pub(crate) fn ordered_sum(len: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    ordered_sums(len, |i| [f(i)])[0]
}

/// Per-bin sums; `f(i, acc)` adds the contributions of index `i` into `acc`.
pub(crate) fn ordered_bins(len: usize, bins: usize, f: impl Fn(usize, &mut [f64]) + Sync) -> Vec<f64> {
    let parts: Vec<Vec<f64>> = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; bins];
            for i in c * CHUNK..((c + 1) * CHUNK).min(len) {
                f(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; bins];
    for p in parts {
        total.iter_mut().zip(&p).for_each(|(t, v)| *t += v);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_match_sequential_order_within_chunks() {
        let len = 3 * CHUNK + 17;
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let s = ordered_sum(len, f);
        let seq: f64 = (0..len).map(f).sum();
        assert!((s - seq).abs() < 1e-12 * seq);
        for _ in 0..4 {
            assert_eq!(ordered_sum(len, f).to_bits(), s.to_bits());
        }
        assert_eq!(ordered_sum(0, f), 0.0);
        let [a, b] = ordered_sums(10, |i| [i as f64, 1.0]);
        assert_eq!((a, b), (45.0, 10.0));
        let bins = ordered_bins(10, 2, |i, acc| acc[i % 2] += 1.0);
        assert_eq!(bins, vec![5.0, 5.0]);
    }
}
