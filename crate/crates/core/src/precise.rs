//! Compensated (twice-working-precision) summation and dot products.
//!
//! Used to confirm candidate violations: a quadratic form `w^T A w` is
//! re-evaluated with error-free transformations so the result is as accurate
//! as if computed in ~106-bit arithmetic and then rounded.

/// `a + b = s + e` exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly (fused multiply-add).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Accumulator holding an unevaluated sum `hi + lo`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.lo += e;
    }

    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// Compensated dot product (Ogita-Rump-Oishi Dot2).
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Compensated::default();
    for (x, y) in a.iter().zip(b) {
        acc.add_product(*x, *y);
    }
    acc.value()
}

/// Compensated sum.
pub fn sum(xs: &[f64]) -> f64 {
    let mut acc = Compensated::default();
    for x in xs {
        acc.add(*x);
    }
    acc.value()
}
