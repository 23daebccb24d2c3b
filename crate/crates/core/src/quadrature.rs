//! Gauss-Legendre rules and adaptive panel integration.

use crate::error::{invalid, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Tricomi initial guesses.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("Gauss-Legendre rule needs at least one node"));
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Sum over accepted panels of `|Q_fine - Q_coarse|`.
    pub error: f64,
    pub panels: usize,
}

/// Adaptive panel quadrature: every panel is integrated by a coarse and a
/// fine Gauss-Legendre rule; panels whose difference exceeds their share of
/// `abs_tol` are bisected, up to `max_depth` levels.
pub struct AdaptiveIntegrator {
    coarse: GaussLegendre,
    fine: GaussLegendre,
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl AdaptiveIntegrator {
    pub fn new(abs_tol: f64, max_depth: usize) -> Result<Self> {
        Ok(Self {
            coarse: GaussLegendre::new(10)?,
            fine: GaussLegendre::new(20)?,
            abs_tol,
            max_depth,
        })
    }

    /// Integrates over `[a, b]`, pre-split into `initial_panels` pieces.
    pub fn integrate(&self, a: f64, b: f64, initial_panels: usize, f: &dyn Fn(f64) -> f64) -> Integral {
        let k = initial_panels.max(1);
        let width = (b - a) / k as f64;
        let mut total = Integral {
            value: 0.0,
            error: 0.0,
            panels: 0,
        };
        let share = self.abs_tol / k as f64;
        for i in 0..k {
            let lo = a + width * i as f64;
            let hi = if i + 1 == k { b } else { lo + width };
            self.panel(lo, hi, share, 0, f, &mut total);
        }
        total
    }

    fn panel(&self, a: f64, b: f64, tol: f64, depth: usize, f: &dyn Fn(f64) -> f64, acc: &mut Integral) {
        let coarse = self.coarse.integrate(a, b, f);
        let fine = self.fine.integrate(a, b, f);
        let err = (fine - coarse).abs();
        if err <= tol || depth >= self.max_depth {
            acc.value += fine;
            acc.error += err;
            acc.panels += 1;
            return;
        }
        let mid = 0.5 * (a + b);
        self.panel(a, mid, 0.5 * tol, depth + 1, f, acc);
        self.panel(mid, b, 0.5 * tol, depth + 1, f, acc);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two_and_nodes_symmetric() {
        for n in [1, 2, 5, 16, 32, 64] {
            let gl = GaussLegendre::new(n).unwrap();
            assert_relative_eq!(gl.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            for i in 0..n {
                assert_eq!(gl.nodes[i], -gl.nodes[n - 1 - i]);
            }
        }
        assert!(GaussLegendre::new(0).is_err());
    }

    #[test]
    fn exact_for_polynomials_of_degree_2n_minus_1() {
        let gl = GaussLegendre::new(4).unwrap();
        // int_0^1 x^7 = 1/8
        assert_relative_eq!(gl.integrate(0.0, 1.0, |x| x.powi(7)), 0.125, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_oscillatory() {
        let q = AdaptiveIntegrator::new(1e-12, 30).unwrap();
        let r = q.integrate(0.0, 50.0, 8, &|x| (3.0 * x).cos() * (-x).exp());
        // int_0^inf e^{-x} cos 3x = 1/10, tail beyond 50 is ~e^{-50}.
        assert_relative_eq!(r.value, 0.1, epsilon = 1e-12);
        assert!(r.error < 1e-11);
    }
}
