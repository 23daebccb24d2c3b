//! Bessel functions of integer and half-integer order, and the Schoenberg
//! kernels `Omega_n(u) = Gamma(n/2) (2/u)^(n/2 - 1) J_(n/2 - 1)(u)`.
//!
//! `Omega_n(|w| |x|)` is the average of `cos(w . x)` over the sphere, so the
//! Fourier transform of a radial function in `R^n` is
//! `|S^(n-1)| * int_0^inf f(t) t^(n-1) Omega_n(w t) dt`.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

/// Largest dimension the kernels support.
pub const MAX_DIMENSION: usize = 16;

const SERIES_LIMIT: f64 = 8.0;
const ASYMPTOTIC_LIMIT: f64 = 30.0;

/// `Gamma(k / 2)` for a positive integer `k`.
pub fn gamma_half(k: usize) -> f64 {
    let mut g = if k.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if k.is_multiple_of(2) { 1.0 } else { 0.5 };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// `Omega_n(u)` for `u >= 0`, `1 <= n <= MAX_DIMENSION`.
pub fn schoenberg_kernel(n: usize, u: f64) -> Result<f64> {
    if n == 0 || n > MAX_DIMENSION {
        return Err(invalid(format!("dimension must lie in 1..={MAX_DIMENSION}, got {n}")));
    }
    let u = u.abs();
    if u <= SERIES_LIMIT {
        return Ok(kernel_series(n, u));
    }
    // nu = n/2 - 1, stored doubled
    let nu2 = n as i32 - 2;
    let j = bessel_j(nu2, u);
    Ok(gamma_half(n) * (2.0 / u).powf(nu2 as f64 / 2.0) * j)
}

/// `sum_k (-u^2/4)^k / (k! (n/2)_k)`.
fn kernel_series(n: usize, u: f64) -> f64 {
    let a = n as f64 / 2.0;
    let z = -0.25 * u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= z / (kf * (a + kf - 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && kf > -z.sqrt() {
            break;
        }
    }
    sum
}

/// `J_(nu2/2)(x)` for `x > SERIES_LIMIT` and `-1 <= nu2 <= 2 MAX_DIMENSION`.
fn bessel_j(nu2: i32, x: f64) -> f64 {
    if nu2 % 2 != 0 {
        // Half-integer order, upward from J_{-1/2} and J_{1/2}; stable for x > nu.
        let c = (2.0 / (PI * x)).sqrt();
        let (mut jm, mut j) = (c * x.cos(), c * x.sin());
        if nu2 == -1 {
            return jm;
        }
        let mut nu = 0.5;
        while (2.0 * nu) as i32 != nu2 {
            let next = 2.0 * nu / x * j - jm;
            jm = j;
            j = next;
            nu += 1.0;
        }
        j
    } else {
        let order = (nu2 / 2) as usize;
        if x >= ASYMPTOTIC_LIMIT {
            let (mut jm, mut j) = (hankel_asymptotic(0.0, x), hankel_asymptotic(1.0, x));
            if order == 0 {
                return jm;
            }
            for k in 1..order {
                let next = 2.0 * k as f64 / x * j - jm;
                jm = j;
                j = next;
            }
            j
        } else {
            miller(order, x)
        }
    }
}

/// Hankel's asymptotic expansion of `J_nu(x)`, summed to its smallest term.
fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let (mut p, mut q) = (1.0, 0.0);
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        term *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // terms alternate between Q (odd k) and P (even k) with sign (-1)^floor(k/2)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if last < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `J_order(x)` by Miller's backward recurrence, normalized with
/// `J_0 + 2 sum J_2k = 1`.
fn miller(order: usize, x: f64) -> f64 {
    let start = 2 * ((x as usize + order + 40) / 2);
    let (mut jp, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut result = 0.0;
    for k in (1..=start).rev() {
        let jm = 2.0 * k as f64 / x * j - jp;
        jp = j;
        j = jm;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp *= 1e-250;
            norm *= 1e-250;
            result *= 1e-250;
        }
        // j now holds J_{k-1}
        if k - 1 == order {
            result = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    norm += j;
    result / norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma_half(1), PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(2), 1.0);
        assert_relative_eq!(gamma_half(5), 0.75 * PI.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(gamma_half(8), 6.0);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn bessel_j0_j1_reference_values() {
        // Abramowitz & Stegun tables.
        for (x, j0) in [
            (1.0, 0.765_197_686_557_966_6),
            (10.0, -0.245_935_764_451_348_3),
            (25.0, 0.096_266_783_275_958_17),
            (50.0, 0.055_812_327_669_251_82),
        ] {
            assert_relative_eq!(schoenberg_kernel(2, x).unwrap(), j0, epsilon = 1e-13);
        }
        // Omega_4(u) = 2 J_1(u) / u
        assert_relative_eq!(schoenberg_kernel(4, 10.0).unwrap(), 2.0 * 0.043_472_746_168_861_44 / 10.0, epsilon = 1e-13);
    }

    #[test]
    fn odd_dimensions_are_elementary() {
        for u in [0.0, 0.3, 5.0, 8.0, 8.5, 20.0, 40.0, 300.0] {
            assert_relative_eq!(schoenberg_kernel(1, u).unwrap(), u.cos(), epsilon = 1e-13);
            let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
            assert_relative_eq!(schoenberg_kernel(3, u).unwrap(), sinc, epsilon = 1e-13);
            let s5 = if u == 0.0 { 1.0 } else { 3.0 * (u.sin() - u * u.cos()) / u.powi(3) };
            assert_relative_eq!(schoenberg_kernel(5, u).unwrap(), s5, epsilon = 1e-12);
        }
    }

    #[test]
    fn continuous_across_method_switches() {
        for n in 1..=MAX_DIMENSION {
            for edge in [SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
                let a = schoenberg_kernel(n, edge * (1.0 - 1e-15)).unwrap();
                let b = schoenberg_kernel(n, edge * (1.0 + 1e-15)).unwrap();
                assert!((a - b).abs() < 1e-11, "n={n} edge={edge}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(schoenberg_kernel(0, 1.0).is_err());
        assert!(schoenberg_kernel(MAX_DIMENSION + 1, 1.0).is_err());
    }
}
