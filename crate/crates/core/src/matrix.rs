//! Kernel matrices on point configurations and their positivity verdicts.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

use crate::error::{domain, invalid, Error, Result};
use crate::kernel::{KernelParams, RadialKernel};
use crate::precise;

/// Candidate violations this close to zero are re-checked with compensated
/// arithmetic before they are accepted.
pub const CONFIRMATION_THRESHOLD: f64 = 1e-6;

/// How the points of a configuration are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Generator {
    /// Independent standard normal coordinates times `scale`.
    RandomGaussian,
    /// `i * scale` along the first axis, `i = 0..m`.
    GridLine,
    /// Vertices of a regular simplex with edge length `scale` (`m <= n + 1`).
    Simplex,
    /// Integer lattice points ordered by norm (ties lexicographic), the
    /// first `m` of them, times `scale`.
    ScaledLattice,
    /// Points given verbatim.
    Explicit,
    /// Mutually orthogonal points `sqrt(s_i) e_k`, one axis per point, with
    /// the squared norms `s_i` cycled `m / len(s)` times. Pairwise squared
    /// distances are `s_i + s_j`, which turns a Hankel matrix `[h(s_i + s_j)]`
    /// into an off-diagonal block of a kernel matrix.
    OrthogonalLift,
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        let name = s.as_ref().and_then(|v| v.as_str()).unwrap_or("?");
        f.write_str(name)
    }
}

/// Everything needed to regenerate a configuration bit-for-bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigRef {
    pub generator: Generator,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub scale: f64,
    /// Points for [`Generator::Explicit`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Squared norms for [`Generator::OrthogonalLift`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
}

impl ConfigRef {
    pub fn new(generator: Generator, seed: u64, m: usize, n: usize, scale: f64) -> Self {
        Self {
            generator,
            seed,
            m,
            n,
            scale,
            points: None,
            offsets: None,
        }
    }

    pub fn explicit(points: Vec<Vec<f64>>) -> Self {
        let n = points.first().map_or(0, Vec::len);
        Self {
            generator: Generator::Explicit,
            seed: 0,
            m: points.len(),
            n,
            scale: 1.0,
            points: Some(points),
            offsets: None,
        }
    }

    /// `copies` orthogonal copies of the squared norms `offsets`.
    pub fn orthogonal_lift(offsets: Vec<f64>, copies: usize) -> Self {
        let m = offsets.len() * copies;
        Self {
            generator: Generator::OrthogonalLift,
            seed: 0,
            m,
            n: m,
            scale: 1.0,
            points: None,
            offsets: Some(offsets),
        }
    }
}

impl fmt::Display for ConfigRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(seed={}, m={}, n={}, scale={})",
            self.generator, self.seed, self.m, self.n, self.scale
        )
    }
}

/// A finite set of points in `R^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig {
    config_ref: ConfigRef,
    points: Vec<Vec<f64>>,
}

impl PointConfig {
    pub fn generate(config_ref: &ConfigRef) -> Result<Self> {
        let ConfigRef {
            generator,
            seed,
            m,
            n,
            scale,
            ..
        } = *config_ref;
        if m == 0 || n == 0 {
            return Err(invalid(format!("configuration needs m, n >= 1, got m={m}, n={n}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("scale must be positive, got {scale}")));
        }
        let points = match generator {
            Generator::RandomGaussian => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..m)
                    .map(|_| {
                        (0..n)
                            .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                            .collect()
                    })
                    .collect()
            }
            Generator::GridLine => (0..m)
                .map(|i| {
                    let mut p = vec![0.0; n];
                    p[0] = i as f64 * scale;
                    p
                })
                .collect(),
            Generator::Simplex => simplex(m, n, scale)?,
            Generator::ScaledLattice => lattice(m, n, scale),
            Generator::Explicit => {
                let pts = config_ref
                    .points
                    .clone()
                    .ok_or_else(|| invalid("explicit configuration without points"))?;
                if pts.len() != m {
                    return Err(invalid(format!("explicit configuration has {} points, m = {m}", pts.len())));
                }
                pts
            }
            Generator::OrthogonalLift => {
                let offsets = config_ref
                    .offsets
                    .as_ref()
                    .ok_or_else(|| invalid("orthogonal lift without offsets"))?;
                if offsets.is_empty() || m % offsets.len() != 0 || n < m {
                    return Err(invalid("orthogonal lift needs m a multiple of the offsets and n >= m"));
                }
                if offsets.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                    return Err(domain("orthogonal lift offsets must be nonnegative"));
                }
                (0..m)
                    .map(|k| {
                        let mut p = vec![0.0; n];
                        p[k] = scale * offsets[k % offsets.len()].sqrt();
                        p
                    })
                    .collect()
            }
        };
        let config = Self {
            config_ref: config_ref.clone(),
            points,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::generate(&ConfigRef::explicit(points))
    }

    fn validate(&self) -> Result<()> {
        let n = self.config_ref.n;
        for p in &self.points {
            if p.len() != n {
                return Err(invalid(format!("point with {} coordinates in R^{n}", p.len())));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(domain("non-finite coordinate"));
            }
        }
        Ok(())
    }

    pub fn config_ref(&self) -> &ConfigRef {
        &self.config_ref
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.config_ref.n
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .iter()
            .zip(&self.points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

fn simplex(m: usize, n: usize, scale: f64) -> Result<Vec<Vec<f64>>> {
    if m > n + 1 {
        return Err(invalid(format!("a simplex in R^{n} has at most {} vertices", n + 1)));
    }
    // e_i / sqrt(2) are at mutual distance 1; the last vertex sits on the
    // diagonal at distance 1 from all of them.
    let a = scale / std::f64::consts::SQRT_2;
    let mut pts: Vec<Vec<f64>> = (0..m.min(n))
        .map(|i| {
            let mut p = vec![0.0; n];
            p[i] = a;
            p
        })
        .collect();
    if m == n + 1 {
        let nf = n as f64;
        let c = a * (1.0 - (nf + 1.0).sqrt()) / nf;
        pts.push(vec![c; n]);
    }
    Ok(pts)
}

fn lattice(m: usize, n: usize, scale: f64) -> Vec<Vec<f64>> {
    let mut radius = 1i64;
    loop {
        let side = (2 * radius + 1) as usize;
        let total = side.checked_pow(n as u32).unwrap_or(usize::MAX);
        let mut pts: Vec<(i64, Vec<i64>)> = Vec::new();
        if total < 50_000_000 {
            let mut idx = vec![-radius; n];
            loop {
                let norm2: i64 = idx.iter().map(|x| x * x).sum();
                if norm2 <= radius * radius {
                    pts.push((norm2, idx.clone()));
                }
                // odometer increment
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] > radius {
                        idx[k] = -radius;
                        k += 1;
                    } else {
                        break;
                    }
                }
                if k == n {
                    break;
                }
            }
        }
        if pts.len() >= m {
            pts.sort();
            return pts
                .into_iter()
                .take(m)
                .map(|(_, p)| p.into_iter().map(|x| x as f64 * scale).collect())
                .collect();
        }
        radius += 1;
    }
}

/// Where a matrix came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kernel: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigRef>,
}

/// Dense symmetric matrix stored as its packed lower triangle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix {
    order: usize,
    entries: Vec<f64>,
    provenance: Provenance,
}

#[inline]
fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i >= j { (i, j) } else { (j, i) };
    i * (i + 1) / 2 + j
}

impl SymMatrix {
    /// Builds from `entry(i, j)` evaluated once per unordered pair `i >= j`.
    pub fn from_fn(
        order: usize,
        provenance: Provenance,
        mut entry: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(order * (order + 1) / 2);
        for i in 0..order {
            for j in 0..=i {
                entries.push(entry(i, j)?);
            }
        }
        Ok(Self {
            order,
            entries,
            provenance,
        })
    }

    /// From row-major rows; the lower triangle is taken and the upper must
    /// match it exactly.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let order = rows.len();
        if rows.iter().any(|r| r.len() != order) {
            return Err(invalid("matrix rows must be square"));
        }
        for i in 0..order {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(invalid(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Self::from_fn(
            order,
            Provenance {
                kernel: "explicit".into(),
                config: None,
            },
            |i, j| Ok(rows[i][j]),
        )
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[packed(i, j)]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn packed_entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn map(&self, kernel: String, f: impl Fn(f64) -> f64) -> Self {
        Self {
            order: self.order,
            entries: self.entries.iter().map(|x| f(*x)).collect(),
            provenance: Provenance {
                kernel,
                config: self.provenance.config.clone(),
            },
        }
    }

    /// `w^T A w` evaluated with compensated arithmetic.
    pub fn quadratic_form_precise(&self, w: &[f64]) -> f64 {
        let mut acc = precise::Compensated::default();
        for i in 0..self.order {
            for j in 0..self.order {
                let a = self.get(i, j);
                acc.add_product(a * w[i], w[j]);
            }
        }
        acc.value()
    }

    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.order {
            let row: f64 = (0..self.order).map(|j| self.get(i, j) * w[j]).sum();
            total += w[i] * row;
        }
        total
    }

    /// SHA-256 over the little-endian bytes of the packed entries.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.order as u64).to_le_bytes());
        for x in &self.entries {
            hasher.update(x.to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

/// `[kernel(|x_i - x_j|)]` with each unordered pair evaluated once.
pub fn build_kernel_matrix(config: &PointConfig, params: &KernelParams) -> Result<SymMatrix> {
    let kernel = RadialKernel::new(*params)?;
    build_radial_matrix(config, params.to_string(), |t| kernel.value(t))
}

/// `[phi(|x_i - x_j|)]` for an arbitrary radial profile.
pub fn build_radial_matrix(
    config: &PointConfig,
    kernel: String,
    phi: impl Fn(f64) -> Result<f64>,
) -> Result<SymMatrix> {
    let provenance = Provenance {
        kernel,
        config: Some(config.config_ref().clone()),
    };
    SymMatrix::from_fn(config.len(), provenance, |i, j| {
        if i == j {
            phi(0.0)
        } else {
            phi(config.distance(i, j))
        }
    })
}

/// Smallest eigenpair of a symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn smallest_eigenpair(dense: DMatrix<f64>) -> Result<EigenPair> {
    let order = dense.nrows();
    if dense.iter().any(|x| !x.is_finite()) {
        return Err(domain("matrix has non-finite entries"));
    }
    let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 1000 * order.max(1))
        .ok_or(Error::EigenConvergence { order })?;
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .ok_or_else(|| invalid("empty matrix"))?;
    let mut vector: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    // Fix the sign so output is deterministic: largest component positive.
    let pivot = vector
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    let s = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
    vector.iter_mut().for_each(|x| *x *= s);
    Ok(EigenPair { value, vector })
}

/// Smallest eigenvalue and a unit eigenvector, from a full symmetric
/// eigendecomposition.
pub fn min_eigenvalue(matrix: &SymMatrix) -> Result<EigenPair> {
    if matrix.order() == 0 {
        return Err(invalid("empty matrix"));
    }
    smallest_eigenpair(matrix.to_dense())
}

/// `1e-9 * order * max |entry|`.
pub fn default_tolerance(matrix: &SymMatrix) -> f64 {
    (1e-9 * matrix.order() as f64 * matrix.max_abs()).max(f64::MIN_POSITIVE)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Certified,
    Violated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Certified => "CERTIFIED",
            Status::Violated => "VIOLATED",
        })
    }
}

/// The vectors over which the quadratic form is tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Subspace {
    Full,
    SumZero,
}

/// Verdict on the sign of a quadratic form.
///
/// For [`Subspace::SumZero`] the form tested is `-w^T A w` (the cnd
/// convention), and `min_eigenvalue` is the smallest eigenvalue of
/// `-Q^T A Q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityVerdict {
    pub status: Status,
    pub min_eigenvalue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
    pub tolerance: f64,
    pub subspace: Subspace,
    /// The tested form at the eigenvector, recomputed with compensated
    /// arithmetic.
    pub confirmed_form: f64,
}

impl PositivityVerdict {
    pub fn is_certified(&self) -> bool {
        self.status == Status::Certified
    }
}

pub(crate) fn decide(
    value: f64,
    witness: Vec<f64>,
    confirmed_form: f64,
    tol: f64,
    subspace: Subspace,
) -> PositivityVerdict {
    let candidate = value < -tol;
    let confirmed = value.abs() >= CONFIRMATION_THRESHOLD || confirmed_form < -tol;
    let status = if candidate && confirmed {
        Status::Violated
    } else {
        Status::Certified
    };
    PositivityVerdict {
        status,
        min_eigenvalue: value,
        witness: (status == Status::Violated).then_some(witness),
        tolerance: tol,
        subspace,
        confirmed_form,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("tolerance must be positive, got {tol}")))
    }
}

/// Positive semidefiniteness: certified iff the smallest eigenvalue is at
/// least `-tol`.
pub fn psd_verdict(matrix: &SymMatrix, tol: f64) -> Result<PositivityVerdict> {
    check_tol(tol)?;
    let pair = min_eigenvalue(matrix)?;
    let form = matrix.quadratic_form_precise(&pair.vector);
    Ok(decide(pair.value, pair.vector, form, tol, Subspace::Full))
}

/// Orthonormal basis of the complement of the all-ones vector, as the last
/// `m - 1` columns of the Householder reflector exchanging `e_1` and
/// `1 / sqrt(m)`.
pub fn sum_zero_basis(m: usize) -> DMatrix<f64> {
    let u = 1.0 / (m as f64).sqrt();
    let mut v = DVector::from_element(m, u);
    v[0] -= 1.0;
    let vv = v.dot(&v);
    let mut h = DMatrix::identity(m, m);
    if vv > 0.0 {
        h -= (2.0 / vv) * &v * v.transpose();
    }
    h.columns(1, m - 1).into_owned()
}

/// Conditional negative definiteness: certified iff the smallest eigenvalue
/// of `-Q^T A Q` is at least `-tol`, `Q` spanning the sum-zero vectors. The
/// witness is returned in the original coordinates.
pub fn cnd_verdict(matrix: &SymMatrix, tol: f64) -> Result<PositivityVerdict> {
    check_tol(tol)?;
    let m = matrix.order();
    if m < 2 {
        return Err(invalid("cnd test needs a matrix of order >= 2"));
    }
    let q = sum_zero_basis(m);
    let a = matrix.to_dense();
    let mut b = -(q.transpose() * &a * &q);
    b = (&b + b.transpose()) * 0.5;
    let pair = smallest_eigenpair(b)?;
    let y = DVector::from_vec(pair.vector);
    let w: Vec<f64> = (&q * y).iter().copied().collect();
    let form = -matrix.quadratic_form_precise(&w);
    Ok(decide(pair.value, w, form, tol, Subspace::SumZero))
}

/// Entrywise power `[a_ij^alpha]` of a matrix with positive entries.
pub fn hadamard_power(matrix: &SymMatrix, alpha: f64) -> Result<SymMatrix> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(domain(format!("Hadamard exponent must be positive, got {alpha}")));
    }
    if let Some(bad) = matrix.packed_entries().iter().find(|x| !(**x > 0.0)) {
        return Err(domain(format!("Hadamard power needs positive entries, found {bad}")));
    }
    if alpha == 1.0 {
        return Ok(matrix.clone());
    }
    let kernel = format!("({})^{alpha}", matrix.provenance().kernel);
    Ok(matrix.map(kernel, |x| x.powf(alpha)))
}

/// Per-exponent outcome of an infinite-divisibility probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaVerdict {
    pub alpha: f64,
    pub verdict: PositivityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfDivReport {
    /// The verdict with the smallest eigenvalue (a violated one if any).
    pub worst: PositivityVerdict,
    pub worst_alpha: f64,
    pub per_alpha: Vec<AlphaVerdict>,
}

impl InfDivReport {
    pub fn is_certified(&self) -> bool {
        self.per_alpha.iter().all(|a| a.verdict.is_certified())
    }
}

/// psd verdicts of every Hadamard power `A^{o alpha}` of the kernel matrix.
/// `tol = None` uses [`default_tolerance`] of each powered matrix.
pub fn infdiv_probe(
    config: &PointConfig,
    params: &KernelParams,
    alphas: &[f64],
    tol: Option<f64>,
) -> Result<InfDivReport> {
    if alphas.is_empty() {
        return Err(invalid("infinite-divisibility probe needs at least one exponent"));
    }
    let base = build_kernel_matrix(config, params)?;
    let per_alpha = alphas
        .iter()
        .map(|&alpha| {
            let powered = hadamard_power(&base, alpha)?;
            let tol = tol.unwrap_or_else(|| default_tolerance(&powered));
            Ok(AlphaVerdict {
                alpha,
                verdict: psd_verdict(&powered, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = per_alpha
        .iter()
        .min_by(|a, b| {
            let key = |v: &AlphaVerdict| (v.verdict.is_certified(), v.verdict.min_eigenvalue);
            let (ca, ea) = key(a);
            let (cb, eb) = key(b);
            ca.cmp(&cb).then(ea.total_cmp(&eb))
        })
        .expect("nonempty");
    Ok(InfDivReport {
        worst: worst.verdict.clone(),
        worst_alpha: worst.alpha,
        per_alpha,
    })
}
