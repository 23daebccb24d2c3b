//! Scalar and complex evaluation of the radial kernel family
//!
//! ```text
//! f_r(t) = (1 - t) / (1 - t^r),      g_r(t) = 1 / f_r(t),      h_r(s) = f_r(sqrt(s))
//! ```
//!
//! where `t >= 0` is the radial variable `|x|`. At `t = 1` the removable
//! singularity takes its limit `f_r(1) = 1/r`.
//!
//! Away from `t = 1` the denominator is formed as `-expm1(r ln t)`, which is
//! free of cancellation for every `t > 0`. Inside the band `|t - 1| < delta`
//! the value is computed as `u / expm1(r * ln1p(u))` with `u = t - 1` (exact
//! there by Sterbenz). The derivatives use a Taylor expansion of `f_r` about
//! `t = 1`, computed once per kernel by power-series arithmetic, inside a band
//! sized to the radius of convergence.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{domain, invalid, Error, Result};

/// Default half-width of the switchover band around `t = 1`.
pub const DEFAULT_BAND: f64 = 1e-3;

/// Number of Taylor coefficients kept for the expansion about `t = 1`.
const TAYLOR_TERMS: usize = 24;

/// Which member of the pair is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum Direction {
    /// `f = (1 - t) / (1 - t^r)`
    #[default]
    F,
    /// `g = (1 - t^r) / (1 - t)`
    G,
}

/// An exponent given exactly as `p/q` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExactRatio {
    pub p: u64,
    pub q: u64,
}

impl ExactRatio {
    /// Builds `p/q`, reducing to lowest terms.
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(invalid(format!("exact exponent {p}/{q} needs p, q >= 1")));
        }
        let g = num_integer::gcd(p, q);
        Ok(Self { p: p / g, q: q / g })
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for ExactRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q == 1 {
            write!(f, "{}", self.p)
        } else {
            write!(f, "{}/{}", self.p, self.q)
        }
    }
}

impl FromStr for ExactRatio {
    type Err = Error;

    /// Accepts `p/q` or a bare integer.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| invalid(format!("`{s}` is not an exact ratio p/q")))
        };
        match s.split_once('/') {
            Some((p, q)) => Self::new(parse(p)?, parse(q)?),
            None => Self::new(parse(s)?, 1),
        }
    }
}

/// Exponent and direction of a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub r: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_r: Option<ExactRatio>,
    #[serde(default)]
    pub direction: Direction,
}

impl KernelParams {
    /// A decimal exponent, direction `F`.
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(domain(format!("exponent r must be positive and finite, got {r}")));
        }
        Ok(Self {
            r,
            exact_r: None,
            direction: Direction::F,
        })
    }

    /// An exact exponent `p/q`, direction `F`.
    pub fn exact(p: u64, q: u64) -> Result<Self> {
        let ratio = ExactRatio::new(p, q)?;
        Ok(Self {
            r: ratio.value(),
            exact_r: Some(ratio),
            direction: Direction::F,
        })
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    /// Checks the struct invariants, for values that arrive by deserialization.
    pub fn validate(&self) -> Result<()> {
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(domain(format!("exponent r must be positive and finite, got {}", self.r)));
        }
        if let Some(ratio) = self.exact_r {
            if ratio.p == 0 || ratio.q == 0 || num_integer::gcd(ratio.p, ratio.q) != 1 {
                return Err(invalid(format!("exact exponent {ratio} is not in lowest terms")));
            }
            let v = ratio.value();
            if (v - self.r).abs() > f64::EPSILON * v {
                return Err(invalid(format!("r = {} disagrees with exact {ratio}", self.r)));
            }
        }
        Ok(())
    }
}

impl fmt::Display for KernelParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.direction {
            Direction::F => "f",
            Direction::G => "g",
        };
        match self.exact_r {
            Some(ratio) => write!(f, "{name}[r={ratio}]"),
            None => write!(f, "{name}[r={}]", self.r),
        }
    }
}

impl FromStr for KernelParams {
    type Err = Error;

    /// `p/q` gives an exact exponent; anything else is parsed as a decimal.
    fn from_str(s: &str) -> Result<Self> {
        if s.contains('/') {
            let ratio: ExactRatio = s.parse()?;
            return Self::exact(ratio.p, ratio.q);
        }
        let r: f64 = s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("`{s}` is not a number or ratio")))?;
        Self::new(r)
    }
}

/// A sorted grid of radial points plus the band half-width used on it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    points: Vec<f64>,
    near_one_band: f64,
}

impl EvalGrid {
    pub fn new(mut points: Vec<f64>, near_one_band: f64) -> Result<Self> {
        if !(near_one_band > 0.0 && near_one_band < 1.0) {
            return Err(invalid(format!("band half-width must lie in (0, 1), got {near_one_band}")));
        }
        if let Some(bad) = points.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
            return Err(domain(format!("grid point {bad} is not a nonnegative real")));
        }
        points.sort_by(f64::total_cmp);
        Ok(Self {
            points,
            near_one_band,
        })
    }

    /// `count` points evenly spaced on `[lo, hi]`.
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(linspace(lo, hi, count), DEFAULT_BAND)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn near_one_band(&self) -> f64 {
        self.near_one_band
    }

    /// Evaluates `f, g, f', f''` at every grid point.
    pub fn evaluate(&self, params: &KernelParams) -> Result<Vec<EvalRow>> {
        let kernel = RadialKernel::with_band(*params, self.near_one_band)?;
        self.points
            .iter()
            .map(|&t| {
                Ok(EvalRow {
                    t,
                    f: kernel.f(t)?,
                    g: kernel.g(t)?,
                    f_prime: kernel.f_prime(t)?,
                    f_second: kernel.f_second(t)?,
                })
            })
            .collect()
    }
}

/// One row of a tabulated kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub t: f64,
    pub f: f64,
    pub g: f64,
    pub f_prime: f64,
    pub f_second: f64,
}

/// A kernel with its near-one Taylor data precomputed.
#[derive(Clone, Debug)]
pub struct RadialKernel {
    params: KernelParams,
    band: f64,
    deriv_band: f64,
    taylor: [f64; TAYLOR_TERMS],
}

impl RadialKernel {
    pub fn new(params: KernelParams) -> Result<Self> {
        Self::with_band(params, DEFAULT_BAND)
    }

    pub fn with_band(params: KernelParams, band: f64) -> Result<Self> {
        params.validate()?;
        if !(band > 0.0 && band < 1.0) {
            return Err(invalid(format!("band half-width must lie in (0, 1), got {band}")));
        }
        let r = params.r;
        // Nearest singularity of f(1 + u): u = -1 from the logarithm, or the
        // root of unity e^{2 pi i / r} once it lies on the principal sheet.
        let radius = if r > 2.0 {
            2.0 * (std::f64::consts::PI / r).sin()
        } else {
            1.0
        };
        Ok(Self {
            params,
            band,
            deriv_band: (0.1 * radius).min(0.05),
            taylor: taylor_at_one(r),
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn band(&self) -> f64 {
        self.band
    }

    /// Taylor coefficients `c_k` of `f(1 + u) = sum c_k u^k`.
    pub fn taylor_coefficients(&self) -> &[f64] {
        &self.taylor
    }

    fn is_constant(&self) -> bool {
        self.params.r == 1.0
    }

    /// `f_r(t)`, with `f_r(1) = 1/r` exactly.
    pub fn f(&self, t: f64) -> Result<f64> {
        check_radial(t)?;
        let r = self.params.r;
        if self.is_constant() {
            return Ok(1.0);
        }
        if t == 1.0 {
            return Ok(1.0 / r);
        }
        let u = t - 1.0;
        if u.abs() < self.band {
            return Ok(u / (r * u.ln_1p()).exp_m1());
        }
        let x = r * t.ln();
        if x.abs() >= 0.5 {
            // 1 - t^r loses at most a factor e^0.5 / (e^0.5 - 1) here.
            Ok((1.0 - t) / (1.0 - t.powf(r)))
        } else {
            Ok((1.0 - t) / -x.exp_m1())
        }
    }

    /// `g_r(t) = 1 / f_r(t)`, with `g_r(1) = r` exactly.
    pub fn g(&self, t: f64) -> Result<f64> {
        check_radial(t)?;
        if self.is_constant() {
            return Ok(1.0);
        }
        if t == 1.0 {
            return Ok(self.params.r);
        }
        Ok(1.0 / self.f(t)?)
    }

    /// `h_r(s) = f_r(sqrt(s))`.
    pub fn h(&self, s: f64) -> Result<f64> {
        check_radial(s)?;
        if s == 1.0 {
            return self.f(1.0);
        }
        self.f(s.sqrt())
    }

    /// Evaluates whichever of `f`, `g` the parameters select.
    pub fn value(&self, t: f64) -> Result<f64> {
        match self.params.direction {
            Direction::F => self.f(t),
            Direction::G => self.g(t),
        }
    }

    fn taylor_derivative(&self, u: f64, order: usize) -> f64 {
        // sum_k k (k-1) ... (k-order+1) c_k u^(k-order), by Horner.
        let mut acc = 0.0;
        for k in (order..TAYLOR_TERMS).rev() {
            let falling: f64 = (0..order).map(|j| (k - j) as f64).product();
            acc = acc * u + falling * self.taylor[k];
        }
        acc
    }

    /// `f'_r(t) = ((1-r) t^r + r t^(r-1) - 1) / (1 - t^r)^2`.
    pub fn f_prime(&self, t: f64) -> Result<f64> {
        check_radial(t)?;
        let r = self.params.r;
        if self.is_constant() {
            return Ok(0.0);
        }
        let u = t - 1.0;
        if u.abs() < self.deriv_band {
            return Ok(self.taylor_derivative(u, 1));
        }
        if t < 1.0 {
            let denom = -(r * t.ln()).exp_m1();
            let num = (1.0 - r) * t.powf(r) + r * t.powf(r - 1.0) - 1.0;
            Ok(num / (denom * denom))
        } else {
            // Divide through by t^(2r) so nothing overflows for large t.
            let s = (-r * t.ln()).exp();
            let num = (1.0 - r) * s + r * s / t - s * s;
            let denom = s - 1.0;
            Ok(num / (denom * denom))
        }
    }

    /// `f''_r(t) = phi(t) / (1 - t^r)^3` with
    /// `phi = r(1-r) t^(2r-1) + r(1+r) t^(2r-2) - r(1+r) t^(r-1) - r(1-r) t^(r-2)`.
    pub fn f_second(&self, t: f64) -> Result<f64> {
        check_radial(t)?;
        let r = self.params.r;
        if self.is_constant() {
            return Ok(0.0);
        }
        let u = t - 1.0;
        if u.abs() < self.deriv_band {
            return Ok(self.taylor_derivative(u, 2));
        }
        let (a, b) = (r * (1.0 - r), r * (1.0 + r));
        if t < 1.0 {
            let denom = -(r * t.ln()).exp_m1();
            let phi = a * t.powf(2.0 * r - 1.0) + b * t.powf(2.0 * r - 2.0)
                - b * t.powf(r - 1.0)
                - a * t.powf(r - 2.0);
            Ok(phi / (denom * denom * denom))
        } else {
            let lt = t.ln();
            let pw = |e: f64| (e * lt).exp();
            let phi = a * pw(-r - 1.0) + b * pw(-r - 2.0) - b * pw(-2.0 * r - 1.0) - a * pw(-2.0 * r - 2.0);
            let denom = pw(-r) - 1.0;
            Ok(phi / (denom * denom * denom))
        }
    }
}

fn check_radial(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("radial argument must be finite and nonnegative, got {t}")))
    }
}

/// Taylor coefficients of `u / expm1(r ln(1 + u))` about `u = 0`.
fn taylor_at_one(r: f64) -> [f64; TAYLOR_TERMS] {
    const N: usize = TAYLOR_TERMS + 1;
    // v = r ln(1 + u)
    let mut v = [0.0; N + 1];
    for (k, vk) in v.iter_mut().enumerate().skip(1) {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        *vk = sign * r / k as f64;
    }
    // w = exp(v), from w' = v' w.
    let mut w = [0.0; N + 1];
    w[0] = 1.0;
    for n in 1..=N {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += k as f64 * v[k] * w[n - k];
        }
        w[n] = acc / n as f64;
    }
    // expm1(v) / u has coefficients w[k + 1]; invert that series.
    let e: Vec<f64> = (0..N).map(|k| w[k + 1]).collect();
    let mut c = [0.0; TAYLOR_TERMS];
    c[0] = 1.0 / e[0];
    for n in 1..TAYLOR_TERMS {
        let mut acc = 0.0;
        for k in 1..=n {
            acc += e[k] * c[n - k];
        }
        c[n] = -acc / e[0];
    }
    c
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `count` log-spaced points on `[lo, hi]`, both positive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

pub fn eval_f(params: &KernelParams, t: f64) -> Result<f64> {
    RadialKernel::new(*params)?.f(t)
}

pub fn eval_g(params: &KernelParams, t: f64) -> Result<f64> {
    RadialKernel::new(*params)?.g(t)
}

pub fn eval_h(params: &KernelParams, s: f64) -> Result<f64> {
    RadialKernel::new(*params)?.h(s)
}

pub fn eval_f_prime(params: &KernelParams, t: f64) -> Result<f64> {
    RadialKernel::new(*params)?.f_prime(t)
}

pub fn eval_f_second(params: &KernelParams, t: f64) -> Result<f64> {
    RadialKernel::new(*params)?.f_second(t)
}

/// Exponent pair of the quotient `(1 - z^q) / (1 - z^p)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PickPair {
    pub p: f64,
    pub q: f64,
}

impl PickPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite() && p > 0.0 && q > 0.0) {
            return Err(domain(format!("pick exponents must be positive, got ({p}, {q})")));
        }
        Ok(Self { p, q })
    }

    /// The range `0 < p <= 1`, `p <= q <= p + 1` in which the quotient is
    /// operator monotone.
    pub fn in_operator_monotone_range(&self) -> bool {
        self.p <= 1.0 && self.p <= self.q && self.q <= self.p + 1.0
    }
}

/// `(1 - z^q) / (1 - z^p)` on the open upper half-plane, principal branches.
pub fn eval_f_complex(pair: PickPair, z: Complex64) -> Result<Complex64> {
    if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
        return Err(domain(format!("complex argument must satisfy Im z > 0, got {z}")));
    }
    if pair.p == pair.q {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let one = Complex64::new(1.0, 0.0);
    Ok((one - z.powf(pair.q)) / (one - z.powf(pair.p)))
}
