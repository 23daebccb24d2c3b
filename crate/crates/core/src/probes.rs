//! Function-level probes.
//!
//! Sampling can only ever produce evidence for a property, but a single
//! reproducible counterexample refutes it. Every [`ProbeReport`] records that
//! asymmetry: `PASS` means "no violation on the sampled set", `FAIL` carries a
//! witness that can be recomputed from the recorded settings.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::kernel::{logspace, Direction, KernelParams, PickPair, RadialKernel};
use crate::matrix::{psd_verdict, Provenance, SymMatrix};
use crate::poly::{verify_convexity, TheoremVerdict};
use crate::quadrature::GaussLegendre;

/// Highest finite-difference order the complete-monotonicity probes accept.
pub const MAX_DIFFERENCE_ORDER: usize = 8;

/// Default Pick-probe threshold: `Im f(z) < -1e-10 (1 + |f(z)|)` is a failure.
pub const PICK_TOLERANCE: f64 = 1e-10;

const EVIDENCE_NOTE: &str = "PASS is sampling evidence, not proof; FAIL carries a reproducible counterexample";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ProbeVerdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for ProbeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProbeVerdict::Pass => "PASS",
            ProbeVerdict::Fail => "FAIL",
            ProbeVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Inputs and computed quantities at the worst sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeWitness {
    pub inputs: Vec<f64>,
    pub values: Vec<f64>,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub probe_name: String,
    pub verdict: ProbeVerdict,
    /// Smallest slack observed; negative beyond the tolerance means failure.
    pub worst_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<ProbeWitness>,
    pub settings: serde_json::Value,
    pub evidence: String,
}

impl ProbeReport {
    fn new(name: &str, verdict: ProbeVerdict, worst_margin: f64, witness: Option<ProbeWitness>, settings: serde_json::Value) -> Self {
        Self {
            probe_name: name.to_string(),
            verdict,
            worst_margin,
            witness,
            settings,
            evidence: EVIDENCE_NOTE.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == ProbeVerdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == ProbeVerdict::Fail
    }
}

fn sample(what: &str, fun: &impl Fn(f64) -> f64, x: f64) -> Result<f64> {
    let value = fun(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            x,
            value,
        })
    }
}

fn check_positive_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance must be nonnegative, got {tol}")))
    }
}

/// Necessary condition for complete monotonicity: the matrix
/// `[fun(x_i + x_j)]` must be positive semidefinite.
pub fn widder_cm_probe(fun: impl Fn(f64) -> f64, points: &[f64], tol: f64) -> Result<ProbeReport> {
    if points.is_empty() {
        return Err(invalid("Widder probe needs at least one point"));
    }
    if let Some(bad) = points.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(invalid(format!("Widder probe points must be positive, got {bad}")));
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("Widder probe points must be distinct"));
    }
    let provenance = Provenance {
        kernel: "hankel".into(),
        config: None,
    };
    let matrix = SymMatrix::from_fn(points.len(), provenance, |i, j| sample("widder", &fun, points[i] + points[j]))?;
    let verdict = psd_verdict(&matrix, tol.max(f64::MIN_POSITIVE))?;
    let settings = json!({ "points": points, "tol": tol });
    let (status, witness) = if verdict.is_certified() {
        (ProbeVerdict::Pass, None)
    } else {
        let w = verdict.witness.clone().unwrap_or_default();
        (
            ProbeVerdict::Fail,
            Some(ProbeWitness {
                inputs: points.to_vec(),
                values: w,
                description: format!(
                    "[f(x_i + x_j)] has eigenvalue {:.6e}; values are the eigenvector, form {:.6e}",
                    verdict.min_eigenvalue, verdict.confirmed_form
                ),
            }),
        )
    };
    Ok(ProbeReport::new("widder_cm", status, verdict.min_eigenvalue, witness, settings))
}

/// Step used for order-`k` differences at `x`.
fn difference_step(k: usize, x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / (k as f64 + 2.0)) * x.abs().max(1.0)
}

/// Scans `(-1)^(k + shift) Delta_h^k fun(x) >= 0` over the grid for each
/// order in `orders`. Forward differences of a completely monotone function
/// alternate exactly for every step, so only rounding needs to be allowed for.
fn alternating_differences(
    name: &str,
    fun: &impl Fn(f64) -> f64,
    grid: &[f64],
    orders: std::ops::RangeInclusive<usize>,
    shift: usize,
    tol: f64,
) -> Result<(f64, Option<ProbeWitness>)> {
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &x in grid {
        for k in orders.clone() {
            let h = difference_step(k, x);
            let mut diff = 0.0;
            let mut scale = 0.0f64;
            let mut binom = 1.0;
            for j in 0..=k {
                let v = sample(name, fun, x + j as f64 * h)?;
                let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
                diff += sign * binom * v;
                scale = scale.max(v.abs());
                binom = binom * (k - j) as f64 / (j + 1) as f64;
            }
            let signed = if (k + shift).is_multiple_of(2) { diff } else { -diff };
            let noise = 2f64.powi(k as i32) * 8.0 * f64::EPSILON * scale;
            let hk = h.powi(k as i32);
            let margin = (signed + noise) / hk;
            if margin < worst {
                worst = margin;
                if margin < -tol {
                    witness = Some(ProbeWitness {
                        inputs: vec![x, k as f64, h],
                        values: vec![signed / hk],
                        description: format!("order {k} signed difference quotient at x = {x} with step {h}"),
                    });
                } else {
                    witness = None;
                }
            }
        }
    }
    Ok((worst, witness))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("probe grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(invalid(format!("probe grid points must be nonnegative, got {bad}")));
    }
    Ok(())
}

/// `(-1)^k Delta_h^k fun(x) >= -tol h^k` for `k <= max_order` on the grid.
pub fn finite_diff_cm_probe(fun: impl Fn(f64) -> f64, max_order: usize, grid: &[f64], tol: f64) -> Result<ProbeReport> {
    if max_order > MAX_DIFFERENCE_ORDER {
        return Err(invalid(format!("difference order {max_order} exceeds {MAX_DIFFERENCE_ORDER}")));
    }
    check_grid(grid)?;
    check_positive_tol(tol)?;
    let (worst, witness) = alternating_differences("finite_diff_cm", &fun, grid, 0..=max_order, 0, tol)?;
    let verdict = if worst < -tol { ProbeVerdict::Fail } else { ProbeVerdict::Pass };
    let settings = json!({ "max_order": max_order, "grid": grid, "tol": tol, "step": "eps^(1/(k+2)) * max(x, 1)" });
    Ok(ProbeReport::new("finite_diff_cm", verdict, worst, witness, settings))
}

/// Settings shared by the Bernstein probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSettings {
    pub grid: Vec<f64>,
    pub max_order: usize,
    pub tol: f64,
}

/// Bernstein property: `fun >= 0` and the first difference quotient is
/// completely monotone, i.e. `(-1)^(k-1) Delta_h^k fun >= 0` for
/// `1 <= k <= max_order`. The witness reports the order of `fun` itself.
pub fn bernstein_probe(fun: impl Fn(f64) -> f64, settings: &DifferenceSettings) -> Result<ProbeReport> {
    if settings.max_order == 0 || settings.max_order > MAX_DIFFERENCE_ORDER {
        return Err(invalid(format!("Bernstein order must lie in 1..={MAX_DIFFERENCE_ORDER}")));
    }
    check_grid(&settings.grid)?;
    check_positive_tol(settings.tol)?;
    let (mut worst, mut witness) = (f64::INFINITY, None);
    for &x in &settings.grid {
        let v = sample("bernstein", &fun, x)?;
        if v < worst {
            worst = v;
            witness = (v < -settings.tol).then(|| ProbeWitness {
                inputs: vec![x, 0.0, 0.0],
                values: vec![v],
                description: format!("negative value at x = {x}"),
            });
        }
    }
    let (w, wit) = alternating_differences("bernstein", &fun, &settings.grid, 1..=settings.max_order, 1, settings.tol)?;
    if w < worst {
        worst = w;
        witness = wit;
    }
    let verdict = if worst < -settings.tol { ProbeVerdict::Fail } else { ProbeVerdict::Pass };
    Ok(ProbeReport::new("bernstein", verdict, worst, witness, serde_json::to_value(settings)?))
}

/// 32 log-spaced radii in `[1e-2, 1e2]` times 16 angles in `(0, pi)`.
pub fn pick_grid() -> Vec<Complex64> {
    let radii = logspace(1e-2, 1e2, 32);
    let mut grid = Vec::with_capacity(32 * 16);
    for r in radii {
        for j in 0..16 {
            let theta = (j as f64 + 0.5) * std::f64::consts::PI / 16.0;
            grid.push(Complex64::from_polar(r, theta));
        }
    }
    grid
}

/// Samples `(1 - z^q) / (1 - z^p)` on upper-half-plane points; the Pick
/// property needs `Im >= 0` everywhere.
pub fn pick_probe(pair: PickPair, grid: &[Complex64], tol: f64) -> Result<ProbeReport> {
    check_positive_tol(tol)?;
    if grid.is_empty() {
        return Err(invalid("Pick probe grid is empty"));
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &z in grid {
        let v = crate::kernel::eval_f_complex(pair, z)?;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite {
                what: "pick".into(),
                x: z.norm(),
                value: v.im,
            });
        }
        let margin = v.im / (1.0 + v.norm());
        if margin < worst {
            worst = margin;
            witness = Some(ProbeWitness {
                inputs: vec![z.re, z.im],
                values: vec![v.re, v.im],
                description: format!("(1 - z^{q}) / (1 - z^{p}) at z = {z}", p = pair.p, q = pair.q),
            });
        }
    }
    let verdict = if worst < -tol { ProbeVerdict::Fail } else { ProbeVerdict::Pass };
    let settings = json!({ "p": pair.p, "q": pair.q, "grid_points": grid.len(), "tol": tol });
    Ok(ProbeReport::new(
        "pick",
        verdict,
        worst,
        if verdict == ProbeVerdict::Fail { witness } else { None },
        settings,
    ))
}

/// `(1 - t^q) / (1 - t^p)` without cancellation, `q/p` at `t = 1`.
pub fn power_quotient(p: f64, q: f64, t: f64) -> f64 {
    if t == 1.0 {
        return q / p;
    }
    let lt = t.ln();
    (q * lt).exp_m1() / (p * lt).exp_m1()
}

/// `(q/p) int_0^1 (lambda t^p + 1 - lambda)^((q-p)/p) d lambda` by an
/// `nodes`-point Gauss-Legendre rule.
pub fn power_quotient_integral(p: f64, q: f64, t: f64, rule: &GaussLegendre) -> f64 {
    let tp = t.powf(p);
    let e = (q - p) / p;
    q / p * rule.integrate(0.0, 1.0, |lambda| (lambda * tp + 1.0 - lambda).powf(e))
}

/// Relative agreement of the power quotient with its integral form.
pub fn quadrature_identity_check(p: f64, q: f64, t_grid: &[f64], nodes: usize, tol: f64) -> Result<ProbeReport> {
    if !(p > 0.0 && q > p && q.is_finite()) {
        return Err(invalid(format!("identity check needs 0 < p < q, got ({p}, {q})")));
    }
    check_grid(t_grid)?;
    let rule = GaussLegendre::new(nodes)?;
    let mut worst = 0.0f64;
    let mut witness = None;
    for &t in t_grid {
        let lhs = power_quotient(p, q, t);
        let rhs = power_quotient_integral(p, q, t, &rule);
        let err = (lhs - rhs).abs() / lhs.abs();
        if err > worst || witness.is_none() {
            worst = worst.max(err);
            witness = Some(ProbeWitness {
                inputs: vec![t],
                values: vec![lhs, rhs, err],
                description: format!("t = {t}: quotient {lhs}, integral {rhs}"),
            });
        }
    }
    let verdict = if worst <= tol { ProbeVerdict::Pass } else { ProbeVerdict::Fail };
    let settings = json!({ "p": p, "q": q, "nodes": nodes, "points": t_grid.len(), "tol": tol });
    Ok(ProbeReport::new(
        "quadrature_identity",
        verdict,
        // margin: slack below the tolerance
        tol - worst,
        if verdict == ProbeVerdict::Fail { witness } else { None },
        settings,
    ))
}

/// Midpoint log-convexity `fun((x+y)/2)^2 <= fun(x) fun(y) (1 + tol)`.
///
/// The witness lists `[mid, lhs, rhs, 1/rhs, 1/lhs]` as values: the last two
/// are the same comparison in reciprocal form, `1/(fun(x) fun(y))` against
/// `1/fun(mid)^2`.
pub fn logconvex_midpoint_probe(fun: impl Fn(f64) -> f64, pairs: &[(f64, f64)], tol: f64) -> Result<ProbeReport> {
    check_positive_tol(tol)?;
    if pairs.is_empty() {
        return Err(invalid("log-convexity probe needs at least one pair"));
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut failed = false;
    for &(x, y) in pairs {
        let mid = 0.5 * (x + y);
        let (fx, fy, fm) = (sample("logconvex", &fun, x)?, sample("logconvex", &fun, y)?, sample("logconvex", &fun, mid)?);
        if !(fx > 0.0 && fy > 0.0 && fm > 0.0) {
            return Err(invalid(format!("log-convexity needs a positive function, got {fx}, {fy}, {fm}")));
        }
        let lhs = fm * fm;
        let rhs = fx * fy;
        let margin = (rhs - lhs) / rhs;
        let violated = lhs > rhs * (1.0 + tol);
        if margin < worst {
            worst = margin;
            witness = Some(ProbeWitness {
                inputs: vec![x, y],
                values: vec![mid, lhs, rhs, 1.0 / rhs, 1.0 / lhs],
                description: format!("f(mid)^2 = {lhs:.12} vs f(x) f(y) = {rhs:.12}"),
            });
        }
        failed |= violated;
    }
    let verdict = if failed { ProbeVerdict::Fail } else { ProbeVerdict::Pass };
    let settings = json!({ "pairs": pairs, "tol": tol });
    Ok(ProbeReport::new(
        "logconvex_midpoint",
        verdict,
        worst,
        if failed { witness } else { None },
        settings,
    ))
}

/// Checks the hypotheses of Polya's criterion for `f_r` on `[0, inf)`:
/// nonnegative, nonincreasing and convex on the grid (slopes `<= tol`,
/// slope increments `>= -tol`). With an exact exponent `r > 1` the exact
/// convexity verdict must also hold. A PASS means `f_r(|x|)` is positive
/// definite on the line, granted Polya's theorem.
pub fn polya_certificate(params: &KernelParams, grid: &[f64], tol: f64) -> Result<ProbeReport> {
    if params.direction != Direction::F {
        return Err(invalid("Polya certificate applies to f, not its reciprocal"));
    }
    if params.r < 1.0 {
        return Err(invalid(format!("Polya certificate needs r >= 1, got {}", params.r)));
    }
    check_positive_tol(tol)?;
    check_grid(grid)?;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    if grid.len() < 3 {
        return Err(invalid("Polya certificate needs at least three distinct grid points"));
    }
    let kernel = RadialKernel::new(*params)?;
    let values = grid.iter().map(|t| kernel.f(*t)).collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = (1..grid.len())
        .map(|i| (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]))
        .collect();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut note = |margin: f64, inputs: Vec<f64>, values: Vec<f64>, what: &str| {
        if margin < worst {
            worst = margin;
            witness = Some(ProbeWitness {
                inputs,
                values,
                description: what.to_string(),
            });
        }
    };
    for (i, v) in values.iter().enumerate() {
        note(*v, vec![grid[i]], vec![*v], "value");
    }
    for (i, s) in slopes.iter().enumerate() {
        note(-s, vec![grid[i], grid[i + 1]], vec![*s], "slope");
    }
    for i in 1..slopes.len() {
        let d = slopes[i] - slopes[i - 1];
        note(d, vec![grid[i - 1], grid[i], grid[i + 1]], vec![d], "slope increment");
    }
    let numeric_ok = worst >= -tol;
    let exact = match params.exact_r {
        Some(ratio) if ratio.p > ratio.q => Some(verify_convexity(ratio.p, ratio.q)?.verdict),
        _ => None,
    };
    let exact_ok = exact.is_none_or(|v| v == TheoremVerdict::Convex);
    let verdict = if numeric_ok && exact_ok {
        ProbeVerdict::Pass
    } else if !numeric_ok {
        ProbeVerdict::Fail
    } else {
        ProbeVerdict::Inconclusive
    };
    let settings = json!({
        "r": params.r,
        "exact_r": params.exact_r.map(|e| e.to_string()),
        "grid_points": grid.len(),
        "grid_range": [grid[0], grid[grid.len() - 1]],
        "tol": tol,
        "exact_convexity": exact.map(|v| v.to_string()),
    });
    Ok(ProbeReport::new(
        "polya",
        verdict,
        worst,
        if verdict == ProbeVerdict::Fail { witness } else { None },
        settings,
    ))
}

/// Quadratic-growth test for `g_r`: a continuous cnd function is
/// `O(x^2)`. PASS means the obstruction is present (`g(x) / (1 + x^2)`
/// increases over the last decade of the grid and ends above ten times its
/// value at `x = 1`), so `g_r` cannot be cnd. FAIL means the ratio stayed
/// bounded on `[1, x_max]`.
pub fn growth_obstruction_probe(params: &KernelParams, x_max: f64) -> Result<ProbeReport> {
    if params.direction != Direction::G {
        return Err(invalid("growth obstruction applies to g (direction G)"));
    }
    if !(x_max > 10.0 && x_max.is_finite()) {
        return Err(invalid(format!("x_max must exceed 10, got {x_max}")));
    }
    let kernel = RadialKernel::new(*params)?;
    let count = 200;
    let xs = logspace(1.0, x_max, count);
    let ratios = xs
        .iter()
        .map(|&x| Ok(kernel.g(x)? / (1.0 + x * x)))
        .collect::<Result<Vec<f64>>>()?;
    let decade = x_max / 10.0;
    let tail_start = xs.iter().position(|x| *x >= decade).unwrap_or(0);
    let increasing = ratios[tail_start..].windows(2).all(|w| w[1] > w[0]);
    let growth = ratios[count - 1] / ratios[0];
    let present = increasing && growth > 10.0;
    let verdict = if present { ProbeVerdict::Pass } else { ProbeVerdict::Fail };
    let settings = json!({ "r": params.r, "x_max": x_max, "points": count });
    let witness = ProbeWitness {
        inputs: vec![1.0, x_max],
        values: vec![ratios[0], ratios[count - 1], growth],
        description: format!("g(x)/(1+x^2) goes from {:.6} to {:.6}", ratios[0], ratios[count - 1]),
    };
    Ok(ProbeReport::new("growth_obstruction", verdict, growth, Some(witness), settings))
}

/// `f_4(t) = 1 / ((1 + t)(1 + t^2))` to relative accuracy `tol`.
pub fn factorization_check_r4(t_grid: &[f64], tol: f64) -> Result<ProbeReport> {
    check_grid(t_grid)?;
    check_positive_tol(tol)?;
    let kernel = RadialKernel::new(KernelParams::exact(4, 1)?)?;
    let mut worst = 0.0f64;
    let mut at = t_grid[0];
    for &t in t_grid {
        let f4 = kernel.f(t)?;
        let product = 1.0 / ((1.0 + t) * (1.0 + t * t));
        let dev = (f4 - product).abs() / f4.abs();
        if dev > worst {
            worst = dev;
            at = t;
        }
    }
    let verdict = if worst <= tol { ProbeVerdict::Pass } else { ProbeVerdict::Fail };
    let witness = (verdict == ProbeVerdict::Fail).then(|| ProbeWitness {
        inputs: vec![at],
        values: vec![worst],
        description: format!("relative deviation {worst:.3e} at t = {at}"),
    });
    let settings = json!({ "points": t_grid.len(), "tol": tol, "max_relative_deviation": worst });
    Ok(ProbeReport::new("factorization_r4", verdict, tol - worst, witness, settings))
}
