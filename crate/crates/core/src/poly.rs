//! Exact sign analysis of the convexity and log-convexity numerators.
//!
//! For `f(x) = (1 - x) / (1 - x^r)` with rational `r = p/q > 1`,
//!
//! ```text
//! f''(x)          = phi(x) / (1 - x^r)^3
//! f f'' - (f')^2  = psi(x) / (1 - x^r)^4
//! ```
//!
//! Both numerators are generalized polynomials in `x`. Substituting `x = t^q`
//! and multiplying by a monomial gives ordinary polynomials in `t` with
//! rational coefficients; multiplying by a positive monomial does not change
//! signs on `(0, inf)`. If the number of coefficient sign changes equals the
//! multiplicity of the root at `t = 1`, Descartes' rule leaves no other
//! positive root and the sign on each side of 1 is read off the end
//! coefficients.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{invalid, Result};
use crate::kernel::ExactRatio;

/// Sparse polynomial in one variable with exact rational coefficients.
///
/// Terms are kept by strictly decreasing exponent, with no zero coefficients.
/// Polynomials produced by [`RationalPoly::from_shifted_terms`] also have
/// their smallest exponent at 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalPoly {
    terms: Vec<(u64, BigRational)>,
}

/// Sign of a quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

impl Sign {
    fn of(x: &BigRational) -> Self {
        if x.is_positive() {
            Sign::Positive
        } else if x.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Negative => "-",
            Sign::Zero => "0",
        })
    }
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RationalPoly {
    /// Builds a polynomial from terms with arbitrary (possibly negative or
    /// repeated) exponents, shifting so the smallest surviving exponent is 0.
    /// Returns the polynomial and the shift that was added to every exponent.
    pub fn from_shifted_terms(terms: impl IntoIterator<Item = (i64, BigRational)>) -> (Self, i64) {
        let mut collected: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *collected.entry(e).or_insert_with(BigRational::zero) += c;
        }
        collected.retain(|_, c| !c.is_zero());
        let shift = collected.keys().next().map_or(0, |min| -min);
        let terms = collected
            .into_iter()
            .rev()
            .map(|(e, c)| ((e + shift) as u64, c))
            .collect();
        (Self { terms }, shift)
    }

    /// Builds from nonnegative exponents without shifting.
    pub fn from_terms(terms: impl IntoIterator<Item = (u64, BigRational)>) -> Self {
        let mut collected: BTreeMap<u64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *collected.entry(e).or_insert_with(BigRational::zero) += c;
        }
        collected.retain(|_, c| !c.is_zero());
        Self {
            terms: collected.into_iter().rev().collect(),
        }
    }

    /// Dense coefficients, constant term first.
    pub fn from_dense(coeffs: &[BigRational]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(e, c)| (e as u64, c.clone())))
    }

    pub fn terms(&self) -> &[(u64, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<u64> {
        self.terms.first().map(|(e, _)| *e)
    }

    /// Dense coefficients, constant term first.
    pub fn dense(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.degree().map_or(0, |d| d as usize + 1)];
        for (e, c) in &self.terms {
            out[*e as usize] = c.clone();
        }
        out
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.first().map(|(_, c)| c)
    }

    /// Coefficient of the lowest-order term.
    pub fn trailing_coefficient(&self) -> Option<&BigRational> {
        self.terms.last().map(|(_, c)| c)
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        let mut prev: Option<u64> = None;
        for (e, c) in &self.terms {
            if let Some(pe) = prev {
                acc *= pow(t, pe - e);
            }
            acc += c;
            prev = Some(*e);
        }
        if let Some(pe) = prev {
            acc *= pow(t, pe);
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * t.powi(*e as i32))
            .sum()
    }
}

fn pow(t: &BigRational, e: u64) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..e {
        out *= t;
    }
    out
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            match *e {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*t")?,
                _ => write!(f, "{a}*t^{e}")?,
            }
        }
        Ok(())
    }
}

/// JSON form: an array of `[exponent, "numerator", "denominator"]` triples,
/// integers as decimal strings so no precision is lost.
impl Serialize for RationalPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(u64, String, String)> = self
            .terms
            .iter()
            .map(|(e, c)| (*e, c.numer().to_string(), c.denom().to_string()))
            .collect();
        triples.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let triples: Vec<(u64, String, String)> = Vec::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(triples.len());
        for (e, n, d) in triples {
            let n: BigInt = n.parse().map_err(D::Error::custom)?;
            let d: BigInt = d.parse().map_err(D::Error::custom)?;
            if d.is_zero() {
                return Err(D::Error::custom("zero denominator"));
            }
            terms.push((e, BigRational::new(n, d)));
        }
        Ok(Self::from_terms(terms))
    }
}

/// How a cleared polynomial in `t` relates to the original numerator in `x`:
/// `numerator(x) = poly(t) * t^(-shift)` with `t = x^(1/q)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    pub q: u64,
    pub shift: i64,
}

impl Substitution {
    /// Evaluates the original numerator at `x > 0` from the cleared polynomial.
    pub fn original_at(&self, poly: &RationalPoly, x: f64) -> f64 {
        let t = x.powf(1.0 / self.q as f64);
        poly.eval_f64(t) * t.powf(-(self.shift as f64))
    }
}

fn check_ratio(p: u64, q: u64) -> Result<BigRational> {
    let ratio = ExactRatio::new(p, q)?;
    if ratio.p != p || ratio.q != q {
        return Err(invalid(format!("{p}/{q} is not in lowest terms")));
    }
    if p <= q {
        return Err(invalid(format!("exponent {p}/{q} must exceed 1")));
    }
    Ok(rational(p as i64, q as i64))
}

/// `phi(x) = r(1-r) x^(2r-1) + r(1+r) x^(2r-2) - r(1+r) x^(r-1) - r(1-r) x^(r-2)`
/// after `x = t^q` and clearing, with the substitution that undoes it.
pub fn build_phi_with_substitution(p: u64, q: u64) -> Result<(RationalPoly, Substitution)> {
    let r = check_ratio(p, q)?;
    let one = BigRational::one();
    let (p, q) = (p as i64, q as i64);
    let a = &r * (&one - &r);
    let b = &r * (&one + &r);
    let (poly, shift) = RationalPoly::from_shifted_terms([
        (2 * p - q, a.clone()),
        (2 * p - 2 * q, b.clone()),
        (p - q, -b),
        (p - 2 * q, -a),
    ]);
    Ok((poly, Substitution { q: q as u64, shift }))
}

pub fn build_phi_poly(p: u64, q: u64) -> Result<RationalPoly> {
    Ok(build_phi_with_substitution(p, q)?.0)
}

/// `psi(x) = (r-1) x^(2r) - 2r x^(2r-1) + r x^(2r-2) + (r^2-r+2) x^r
///           - 2r(r-1) x^(r-1) - 1 + r(r-1) x^(r-2)`
/// after `x = t^q` and clearing, with the substitution that undoes it.
pub fn build_psi_with_substitution(p: u64, q: u64) -> Result<(RationalPoly, Substitution)> {
    let r = check_ratio(p, q)?;
    let one = BigRational::one();
    let two = rational(2, 1);
    let (p, q) = (p as i64, q as i64);
    let (poly, shift) = RationalPoly::from_shifted_terms([
        (2 * p, &r - &one),
        (2 * p - q, -(&two * &r)),
        (2 * p - 2 * q, r.clone()),
        (p, &r * &r - &r + &two),
        (p - q, -(&two * &r * (&r - &one))),
        (0, -one.clone()),
        (p - 2 * q, &r * (&r - &one)),
    ]);
    Ok((poly, Substitution { q: q as u64, shift }))
}

pub fn build_psi_poly(p: u64, q: u64) -> Result<RationalPoly> {
    Ok(build_psi_with_substitution(p, q)?.0)
}

/// Sign changes in the coefficient sequence (zero coefficients are absent).
pub fn descartes_sign_changes(poly: &RationalPoly) -> usize {
    poly.terms
        .windows(2)
        .filter(|w| w[0].1.is_negative() != w[1].1.is_negative())
        .count()
}

/// Largest `k` with `(t - 1)^k` dividing the polynomial.
pub fn multiplicity_at_one(poly: &RationalPoly) -> usize {
    let mut coeffs = poly.dense();
    let mut k = 0;
    while coeffs.len() > 1 {
        // Synthetic division by (t - 1): running sums from the top.
        let n = coeffs.len() - 1;
        let mut quotient = vec![BigRational::zero(); n];
        let mut carry = BigRational::zero();
        for i in (1..=n).rev() {
            carry += &coeffs[i];
            quotient[i - 1] = carry.clone();
        }
        let remainder = carry + &coeffs[0];
        if !remainder.is_zero() {
            break;
        }
        coeffs = quotient;
        k += 1;
    }
    k
}

/// Outcome of the Descartes-versus-multiplicity comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignReport {
    pub sign_changes: usize,
    pub multiplicity_at_one: usize,
    /// Sign just right of 0 (constant on `(0, 1)` when conclusive).
    pub sign_left: Sign,
    /// Sign at infinity (constant on `(1, inf)` when conclusive).
    pub sign_right: Sign,
    pub conclusive: bool,
}

pub fn sign_analysis(poly: &RationalPoly) -> SignReport {
    let sign_changes = descartes_sign_changes(poly);
    let multiplicity = multiplicity_at_one(poly);
    SignReport {
        sign_changes,
        multiplicity_at_one: multiplicity,
        sign_left: poly.trailing_coefficient().map_or(Sign::Zero, Sign::of),
        sign_right: poly.leading_coefficient().map_or(Sign::Zero, Sign::of),
        conclusive: !poly.is_zero() && sign_changes == multiplicity,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TheoremVerdict {
    Convex,
    NotConvex,
    LogConvex,
    NotLogConvex,
    Inconclusive,
}

impl fmt::Display for TheoremVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TheoremVerdict::Convex => "CONVEX",
            TheoremVerdict::NotConvex => "NOT_CONVEX",
            TheoremVerdict::LogConvex => "LOG_CONVEX",
            TheoremVerdict::NotLogConvex => "NOT_LOG_CONVEX",
            TheoremVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// An exact point where a cleared numerator is negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignWitness {
    /// The point in the cleared variable `t`, as an exact fraction.
    pub t: String,
    /// The same point in the original variable, `x = t^q`.
    pub x: f64,
    /// The cleared polynomial's value at `t`, exact.
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionCheck {
    pub r: ExactRatio,
    pub verdict: TheoremVerdict,
    pub polynomial: RationalPoly,
    pub report: SignReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<SignWitness>,
    /// The original numerator at `x = 0`, exact, when no clearing monomial
    /// was needed (all original exponents nonnegative).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_at_zero: Option<String>,
}

fn value_at_zero(poly: &RationalPoly, subst: &Substitution) -> Option<String> {
    (subst.shift == 0).then(|| poly.eval(&BigRational::zero()).to_string())
}

/// Looks for an exact rational `t` with `poly(t) < 0`, trying dyadic points
/// towards 0 when the trailing coefficient is negative and fixed probes on
/// either side of 1 otherwise.
fn negative_witness(poly: &RationalPoly, q: u64) -> Option<SignWitness> {
    let mut candidates: Vec<BigRational> = Vec::new();
    if poly.trailing_coefficient().is_some_and(|c| c.is_negative()) {
        candidates.extend((1..=256).map(|k| BigRational::new(BigInt::one(), BigInt::one() << k)));
    }
    if poly.leading_coefficient().is_some_and(|c| c.is_negative()) {
        candidates.extend((1..=64).map(|k| BigRational::from_integer(BigInt::one() << k)));
    }
    candidates.extend([rational(1, 2), rational(2, 1)]);
    candidates.into_iter().find_map(|t| {
        let v = poly.eval(&t);
        v.is_negative().then(|| SignWitness {
            x: t.to_f64().unwrap_or(f64::NAN).powi(q as i32),
            t: t.to_string(),
            value: v.to_string(),
        })
    })
}

/// Convexity of `f` on `(0, inf)` for `r = p/q > 1`: `f'' >= 0` needs `phi`
/// positive on `(0, 1)` and negative on `(1, inf)`, matching `(1 - x^r)^3`.
pub fn verify_convexity(p: u64, q: u64) -> Result<PropositionCheck> {
    let (poly, subst) = build_phi_with_substitution(p, q)?;
    let report = sign_analysis(&poly);
    let at_zero = value_at_zero(&poly, &subst);
    let (verdict, witness) = if report.conclusive {
        if report.sign_left == Sign::Positive && report.sign_right == Sign::Negative {
            (TheoremVerdict::Convex, None)
        } else {
            (TheoremVerdict::NotConvex, None)
        }
    } else {
        (TheoremVerdict::Inconclusive, None)
    };
    Ok(PropositionCheck {
        r: ExactRatio { p, q },
        verdict,
        polynomial: poly,
        report,
        witness,
        value_at_zero: at_zero,
    })
}

/// Log-convexity of `f` on `(0, inf)` for `r = p/q >= 1`: holds iff
/// `psi >= 0` there.
pub fn verify_logconvexity(p: u64, q: u64) -> Result<PropositionCheck> {
    let ratio = ExactRatio::new(p, q)?;
    if ratio.p != p || ratio.q != q {
        return Err(invalid(format!("{p}/{q} is not in lowest terms")));
    }
    if p == q {
        // r = 1: f is identically 1 and psi vanishes.
        return Ok(PropositionCheck {
            r: ratio,
            verdict: TheoremVerdict::LogConvex,
            polynomial: RationalPoly::default(),
            report: SignReport {
                sign_changes: 0,
                multiplicity_at_one: 0,
                sign_left: Sign::Zero,
                sign_right: Sign::Zero,
                conclusive: true,
            },
            witness: None,
            value_at_zero: Some("0".into()),
        });
    }
    let (poly, subst) = build_psi_with_substitution(p, q)?;
    let report = sign_analysis(&poly);
    let at_zero = value_at_zero(&poly, &subst);
    let witness = negative_witness(&poly, q);
    let verdict = if witness.is_some() {
        TheoremVerdict::NotLogConvex
    } else if report.conclusive
        && report.sign_left == Sign::Positive
        && report.sign_right == Sign::Positive
    {
        TheoremVerdict::LogConvex
    } else {
        TheoremVerdict::Inconclusive
    };
    Ok(PropositionCheck {
        r: ratio,
        verdict,
        polynomial: poly,
        report,
        witness,
        value_at_zero: at_zero,
    })
}
