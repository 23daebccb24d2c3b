//! Orthogonal lifts of Hankel violations.
//!
//! Put `m` points `sqrt(s_i) e_a` on pairwise orthogonal axes and repeat the
//! pattern `k` times, using `n = k m` axes in total. Two distinct points on
//! different axes are at squared distance `s_i + s_j`, so the kernel matrix of
//! `f(|x|) = h(|x|^2)` is
//!
//! ```text
//! J_k (x) H + I_k (x) D,   H = [h(s_i + s_j)],   D = diag(1 - h(2 s_i)).
//! ```
//!
//! Its spectrum is that of `k H + D` together with the diagonal of `D`
//! (repeated), so the smallest eigenvalue of the `n x n` matrix is read off an
//! `m x m` matrix. When `H` has a negative eigenvalue, `k H + D` turns
//! indefinite for large `k`: an explicit configuration in `R^n` on which `f`
//! fails to be positive definite.
//!
//! The smallest eigenvalue of `k H + D` is a concave function of `k` that is
//! positive at `k = 0`, so the copies needed form a half-line and bisection
//! finds its start.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernel::{logspace, KernelParams, RadialKernel};
use crate::matrix::{decide, min_eigenvalue, ConfigRef, Generator, PositivityVerdict, Provenance, Subspace, SymMatrix};

/// Full eigensolves are used for lifted matrices up to this order; larger
/// ones are handled through the reduced `m x m` form.
pub const FULL_LIFT_LIMIT: usize = 1024;

/// Hard cap on the number of copies considered.
pub const MAX_COPIES: u64 = 1 << 50;

/// `[h(s_i + s_j)^alpha]`.
pub fn hankel_matrix(kernel: &RadialKernel, offsets: &[f64], alpha: f64) -> Result<SymMatrix> {
    if offsets.is_empty() {
        return Err(invalid("Hankel matrix needs at least one offset"));
    }
    let provenance = Provenance {
        kernel: format!("hankel {}", kernel.params()),
        config: None,
    };
    SymMatrix::from_fn(offsets.len(), provenance, |i, j| Ok(kernel.h(offsets[i] + offsets[j])?.powf(alpha)))
}

/// The lifted kernel matrix in reduced form, `k H + D`, with `H` and `D`
/// built from the `alpha`-th power of `f`.
pub fn reduced_lift_matrix(params: &KernelParams, offsets: &[f64], copies: u64, alpha: f64) -> Result<(SymMatrix, Vec<f64>)> {
    if copies == 0 || copies > MAX_COPIES {
        return Err(invalid(format!("copies must lie in 1..={MAX_COPIES}, got {copies}")));
    }
    let kernel = RadialKernel::new(*params)?;
    let h = hankel_matrix(&kernel, offsets, alpha)?;
    let d = offsets
        .iter()
        .map(|s| Ok(1.0 - kernel.h(2.0 * s)?.powf(alpha)))
        .collect::<Result<Vec<f64>>>()?;
    let k = copies as f64;
    let provenance = Provenance {
        kernel: format!("lift {params} alpha={alpha} copies={copies}"),
        config: Some(ConfigRef::orthogonal_lift(offsets.to_vec(), copies as usize)),
    };
    let reduced = SymMatrix::from_fn(offsets.len(), provenance, |i, j| {
        let mut v = k * h.get(i, j);
        if i == j {
            v += d[i];
        }
        Ok(v)
    })?;
    Ok((reduced, d))
}

/// psd verdict of the full lifted matrix, computed from its reduced form.
/// The tolerance is the default one for the full matrix, `1e-9 n max|a|`
/// with `n = copies * m` and `max|a| = 1`. The witness is the reduced
/// eigenvector `v`; the full one is `v (x) 1_k / sqrt(k)`.
pub fn lifted_verdict(params: &KernelParams, offsets: &[f64], copies: u64, alpha: f64) -> Result<PositivityVerdict> {
    let (reduced, d) = reduced_lift_matrix(params, offsets, copies, alpha)?;
    let order = copies as f64 * offsets.len() as f64;
    let tol = 1e-9 * order;
    let pair = min_eigenvalue(&reduced)?;
    let form = reduced.quadratic_form_precise(&pair.vector);
    let floor = d.iter().copied().fold(f64::INFINITY, f64::min);
    let value = if copies > 1 { pair.value.min(floor) } else { pair.value };
    let vector = if value < pair.value {
        let idx = d.iter().position(|x| *x == floor).unwrap_or(0);
        let mut e = vec![0.0; d.len()];
        e[idx] = 1.0;
        e
    } else {
        pair.vector
    };
    Ok(decide(value, vector, form, tol, Subspace::Full))
}

/// Smallest number of copies for which the lifted matrix is VIOLATED, if any
/// up to `max_copies`.
pub fn minimal_copies(params: &KernelParams, offsets: &[f64], alpha: f64, max_copies: u64) -> Result<Option<u64>> {
    let violated = |k: u64| -> Result<bool> { Ok(!lifted_verdict(params, offsets, k, alpha)?.is_certified()) };
    let cap = max_copies.min(MAX_COPIES);
    let mut hi = 1u64;
    while !violated(hi)? {
        if hi >= cap {
            return Ok(None);
        }
        hi = (hi * 2).min(cap);
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(Some(1));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if violated(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Grid of geometric offset ladders `s_i = a b^i` scanned for Hankel
/// violations.
/// Missing fields take their [`Default`] values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LadderSpec {
    pub sizes: Vec<usize>,
    pub a_range: (f64, f64),
    pub b_range: (f64, f64),
    pub steps: usize,
    /// Ladders whose top offset exceeds this are skipped.
    pub max_offset: f64,
    pub max_copies: u64,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            sizes: (2..=8).collect(),
            a_range: (0.02, 3.0),
            b_range: (1.05, 6.0),
            steps: 60,
            max_offset: 40.0,
            max_copies: MAX_COPIES,
        }
    }
}

impl LadderSpec {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return Err(invalid("ladder sizes must be nonempty and positive"));
        }
        let (a0, a1) = self.a_range;
        let (b0, b1) = self.b_range;
        if !(a0 > 0.0 && a1 >= a0 && b0 > 1.0 && b1 >= b0 && self.steps >= 1) {
            return Err(invalid("ladder ranges need 0 < a0 <= a1, 1 < b0 <= b1 and steps >= 1"));
        }
        Ok(())
    }
}

/// Outcome of a Hankel scan at one exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftEvidence {
    pub r: f64,
    pub offsets: Vec<f64>,
    /// Smallest eigenvalue of `[h(s_i + s_j)]`.
    pub hankel_min_eig: f64,
    /// The same divided by the largest entry.
    pub hankel_relative: f64,
    pub hankel_verdict: PositivityVerdict,
    /// Copies needed for an explicit violation, when found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub copies: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lifted_min_eig: Option<f64>,
}

impl LiftEvidence {
    pub fn is_violation(&self) -> bool {
        !self.hankel_verdict.is_certified() && self.copies.is_some()
    }

    pub fn config_ref(&self) -> Option<ConfigRef> {
        self.copies
            .map(|k| ConfigRef::orthogonal_lift(self.offsets.clone(), k as usize))
    }
}

/// Hankel verdict for explicit offsets plus the smallest explicit lift.
pub fn lift_offsets(params: &KernelParams, offsets: &[f64], max_copies: u64) -> Result<LiftEvidence> {
    let kernel = RadialKernel::new(*params)?;
    let h = hankel_matrix(&kernel, offsets, 1.0)?;
    let tol = crate::matrix::default_tolerance(&h);
    let verdict = crate::matrix::psd_verdict(&h, tol)?;
    let scale = h.max_abs();
    let mut evidence = LiftEvidence {
        r: params.r,
        offsets: offsets.to_vec(),
        hankel_min_eig: verdict.min_eigenvalue,
        hankel_relative: verdict.min_eigenvalue / scale,
        hankel_verdict: verdict,
        copies: None,
        dimension: None,
        lifted_min_eig: None,
    };
    if !evidence.hankel_verdict.is_certified() {
        if let Some(k) = minimal_copies(params, offsets, 1.0, max_copies)? {
            evidence.copies = Some(k);
            evidence.dimension = Some(k * offsets.len() as u64);
            evidence.lifted_min_eig = Some(lifted_verdict(params, offsets, k, 1.0)?.min_eigenvalue);
        }
    }
    Ok(evidence)
}

/// Scans the ladder grid. Returns the most negative relative Hankel
/// eigenvalue per size; among violating sizes, the one with the smallest
/// lifted dimension comes first.
pub fn hankel_scan(params: &KernelParams, spec: &LadderSpec) -> Result<Vec<LiftEvidence>> {
    spec.validate()?;
    let kernel = RadialKernel::new(*params)?;
    let a_grid = logspace(spec.a_range.0, spec.a_range.1, spec.steps);
    let b_grid = logspace(spec.b_range.0, spec.b_range.1, spec.steps);
    let mut found = Vec::new();
    for &m in &spec.sizes {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for &a in &a_grid {
            for &b in &b_grid {
                let offsets: Vec<f64> = (0..m).map(|i| a * b.powi(i as i32)).collect();
                if offsets[m - 1] > spec.max_offset {
                    continue;
                }
                let h = hankel_matrix(&kernel, &offsets, 1.0)?;
                let rel = min_eigenvalue(&h)?.value / h.max_abs();
                if best.as_ref().is_none_or(|(v, _)| rel < *v) {
                    best = Some((rel, offsets));
                }
            }
        }
        if let Some((_, offsets)) = best {
            found.push(lift_offsets(params, &offsets, spec.max_copies)?);
        }
    }
    found.sort_by(|x, y| {
        let key = |e: &LiftEvidence| (!e.is_violation(), e.dimension.unwrap_or(u64::MAX), e.offsets.len());
        key(x).cmp(&key(y))
    });
    Ok(found)
}

/// True if the generator is an orthogonal lift too large for a dense solve.
pub fn needs_reduced_form(config: &ConfigRef) -> bool {
    config.generator == Generator::OrthogonalLift && config.m > FULL_LIFT_LIMIT
}
