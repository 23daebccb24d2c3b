//! Reference computations shared by the integration tests. None of these go
//! through the crate's evaluators or eigensolvers.

#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `1 + t + ... + t^(r-1)`, the reciprocal of `f_r` for integer `r`.
pub fn geometric_sum(r: u32, t: f64) -> f64 {
    (0..r).map(|k| t.powi(k as i32)).sum()
}

/// `(1 - t) / (1 - t^r)` straight from the definition (away from `t = 1`).
pub fn f_direct(r: f64, t: f64) -> f64 {
    (1.0 - t) / (1.0 - t.powf(r))
}

/// `(1 - t^r) / (1 - t)` straight from the definition, `r` at `t = 1`.
pub fn g_direct(r: f64, t: f64) -> f64 {
    if t == 1.0 {
        r
    } else {
        (1.0 - t.powf(r)) / (1.0 - t)
    }
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn form(a: &[Vec<f64>], w: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            s += w[i] * v * w[j];
        }
    }
    s
}

fn project(w: &mut [f64], sum_zero: bool) {
    if sum_zero {
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        w.iter_mut().for_each(|x| *x -= mean);
    }
}

fn rayleigh(a: &[Vec<f64>], w: &[f64], sign: f64) -> f64 {
    let nn: f64 = w.iter().map(|x| x * x).sum();
    sign * form(a, w) / nn
}

/// Smallest Rayleigh quotient found by random sampling followed by projected
/// gradient descent from the best sample. `sum_zero` restricts to vectors
/// with zero sum and negates the form (the cnd convention).
pub fn sampled_min_form(a: &[Vec<f64>], sum_zero: bool, samples: usize, seed: u64) -> f64 {
    let m = a.len();
    let sign = if sum_zero { -1.0 } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut best_w = vec![0.0; m];
    let mut w = vec![0.0; m];
    for _ in 0..samples {
        for x in w.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        project(&mut w, sum_zero);
        let q = rayleigh(a, &w, sign);
        if q < best {
            best = q;
            best_w.copy_from_slice(&w);
        }
    }
    let scale = a.iter().flatten().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300) * m as f64;
    let step = 0.5 / scale;
    let mut w = best_w;
    for _ in 0..5000 {
        let q = rayleigh(a, &w, sign);
        best = best.min(q);
        let mut grad: Vec<f64> = (0..m)
            .map(|i| sign * a[i].iter().zip(&w).map(|(v, x)| v * x).sum::<f64>() - q * w[i])
            .collect();
        project(&mut grad, sum_zero);
        for (x, g) in w.iter_mut().zip(&grad) {
            *x -= step * 2.0 * g;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        w.iter_mut().for_each(|x| *x /= norm);
    }
    best.min(rayleigh(a, &w, sign))
}

/// `1 + u + ... + u^(n-1)`.
fn powers_sum(n: u64, u: f64) -> f64 {
    (0..n).map(|k| u.powi(k as i32)).sum()
}

/// `f_{p/q}(t)` as a quotient of geometric sums in `u = t^(1/q)`, free of
/// cancellation near `t = 1`.
pub fn f_rational(p: u64, q: u64, t: f64) -> f64 {
    let u = t.powf(1.0 / q as f64);
    powers_sum(q, u) / powers_sum(p, u)
}

/// Derivatives of order `0..=max` at `x = 1` of the log-convexity numerator
/// for integer `r >= 2`, in exact integer arithmetic.
pub fn psi_derivatives_at_one(r: i64, max: u32) -> Vec<i128> {
    let terms: [(i64, i64); 7] = [
        (2 * r, r - 1),
        (2 * r - 1, -2 * r),
        (2 * r - 2, r),
        (r, r * r - r + 2),
        (r - 1, -2 * r * (r - 1)),
        (0, -1),
        (r - 2, r * (r - 1)),
    ];
    (0..=max)
        .map(|k| {
            terms
                .iter()
                .map(|&(j, c)| {
                    let falling: i128 = (0..k as i64).map(|i| (j - i) as i128).product();
                    c as i128 * falling
                })
                .sum()
        })
        .collect()
}
