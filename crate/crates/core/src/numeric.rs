//! Deterministic parallel reductions.
//!
//! Inputs are cut into fixed-size chunks, each chunk is summed left to right,
//! and the chunk partials are combined pairwise in index order. The result
//! does not depend on how many worker threads rayon uses.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 14;

/// Pairwise sum in index order.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub(crate) fn deterministic_sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().sum::<f64>())
        .collect();
    pairwise_sum(&partials)
}

/// Multiply `mass[i]` by `weight(&keys[i])` in place and return the new total.
pub(crate) fn scale_and_sum<K, F>(mass: &mut [f64], keys: &[K], weight: F) -> f64
where
    K: Sync,
    F: Fn(&K) -> f64 + Sync,
{
    let partials: Vec<f64> = mass
        .par_chunks_mut(CHUNK)
        .zip(keys.par_chunks(CHUNK))
        .map(|(m, k)| {
            let mut s = 0.0;
            for (mi, ki) in m.iter_mut().zip(k) {
                *mi *= weight(ki);
                s += *mi;
            }
            s
        })
        .collect();
    pairwise_sum(&partials)
}

pub(crate) fn divide_all(mass: &mut [f64], by: f64) {
    mass.par_chunks_mut(CHUNK).for_each(|c| {
        for m in c {
            *m /= by;
        }
    });
}

/// Mean and sample standard deviation (n − 1 denominator; zero for n < 2).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}
