//! Campaigns over the open range of exponents.
//!
//! A [`CampaignPlan`] expands into tasks `(r, n, family, scale, seed)`; each
//! task builds one kernel matrix and decides psd for every Hadamard exponent.
//! Tasks run on a rayon pool whose width can be capped with
//! `POSDEF_LAB_THREADS`, and results come back in plan order. Findings are
//! reported as brackets and evidence, never as a value of the threshold.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelParams;
use crate::lift::{hankel_scan, lifted_verdict, needs_reduced_form, reduced_lift_matrix, LadderSpec, LiftEvidence};
use crate::matrix::{
    build_kernel_matrix, default_tolerance, hadamard_power, min_eigenvalue, psd_verdict, ConfigRef, Generator,
    PointConfig, Subspace, SymMatrix,
};

/// Environment variable capping the worker pool width.
pub const THREADS_ENV: &str = "POSDEF_LAB_THREADS";

/// Default seed for every randomized component.
pub const DEFAULT_SEED: u64 = 20140704;

/// Replayed eigenvalues must agree with the record to this absolute accuracy.
pub const REPLAY_TOLERANCE: f64 = 1e-10;

/// A family of point configurations: one generator, a point count and the
/// scales (and seeds, for random generators) to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub generator: Generator,
    pub m: usize,
    pub scales: Vec<f64>,
    /// Empty means the plan seed.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    /// Bisection steps on r between the last certified and the first violated
    /// grid value of the Hankel family.
    #[serde(default)]
    pub bisect_iters: usize,
    /// Scan offset ladders for Hankel violations and lift them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hankel: Option<LadderSpec>,
    /// Pairs `(x, y)` tested for midpoint log-convexity of `h_r`; a failure
    /// is a 2x2 Hankel violation on offsets `(x/2, y/2)` and gets lifted.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub logconvex_pairs: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignPlan {
    pub r_grid: Vec<f64>,
    pub n_list: Vec<usize>,
    /// Hadamard exponents; empty means `{1}`.
    #[serde(default)]
    pub alpha_grid: Vec<f64>,
    pub families: Vec<FamilySpec>,
    /// Maximum number of matrix eigensolves in the sweep phase.
    pub budget: usize,
    #[serde(default)]
    pub refinement: Refinement,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

impl CampaignPlan {
    pub fn validate(&self) -> Result<()> {
        if self.r_grid.is_empty() || self.n_list.is_empty() || self.families.is_empty() {
            return Err(invalid("plan needs nonempty r_grid, n_list and families"));
        }
        if let Some(r) = self.r_grid.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(invalid(format!("r must be positive, got {r}")));
        }
        if self.n_list.contains(&0) {
            return Err(invalid("dimensions must be positive"));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(invalid(format!("Hadamard exponents must be positive, got {a}")));
        }
        for fam in &self.families {
            if fam.m == 0 || fam.scales.is_empty() {
                return Err(invalid(format!("family {} needs m >= 1 and at least one scale", fam.generator)));
            }
            if matches!(fam.generator, Generator::Explicit | Generator::OrthogonalLift) {
                return Err(invalid("explicit and lifted configurations cannot be swept"));
            }
        }
        if let Some(spec) = &self.refinement.hankel {
            spec.validate()?;
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        if self.alpha_grid.is_empty() {
            vec![1.0]
        } else {
            self.alpha_grid.clone()
        }
    }

    /// Tasks in plan order: r, then n, family, scale, seed.
    pub fn tasks(&self) -> Vec<Task> {
        let mut out = Vec::new();
        for &r in &self.r_grid {
            for &n in &self.n_list {
                for fam in &self.families {
                    let seeds = if fam.seeds.is_empty() { vec![self.seed] } else { fam.seeds.clone() };
                    for &scale in &fam.scales {
                        for &seed in &seeds {
                            out.push(Task {
                                r,
                                config: ConfigRef::new(fam.generator, seed, fam.m, n, scale),
                            });
                        }
                    }
                }
            }
        }
        out
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let plan: Self = serde_json::from_str(&text)?;
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub r: f64,
    pub config: ConfigRef,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RecordVerdict {
    Certified,
    Violated,
    Error,
}

impl fmt::Display for RecordVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecordVerdict::Certified => "CERTIFIED",
            RecordVerdict::Violated => "VIOLATED",
            RecordVerdict::Error => "ERROR",
        })
    }
}

/// One psd decision, replayable from `(config_ref, r, alpha)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub plan_index: usize,
    pub r: f64,
    pub n: usize,
    pub alpha: f64,
    pub config_ref: ConfigRef,
    /// NaN (written as `null`) for ERROR records.
    #[serde(with = "nan_as_null")]
    pub min_eig: f64,
    #[serde(with = "nan_as_null")]
    pub tolerance: f64,
    pub subspace: Subspace,
    pub verdict: RecordVerdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checksum: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl SearchRecord {
    pub fn is_violated(&self) -> bool {
        self.verdict == RecordVerdict::Violated
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn error_record(plan_index: usize, r: f64, alpha: f64, config: &ConfigRef, e: &Error) -> SearchRecord {
    SearchRecord {
        plan_index,
        r,
        n: config.n,
        alpha,
        config_ref: config.clone(),
        min_eig: f64::NAN,
        tolerance: f64::NAN,
        subspace: Subspace::Full,
        verdict: RecordVerdict::Error,
        checksum: None,
        error: Some(e.to_string()),
        timestamp: now(),
    }
}

/// The matrix a record was decided on: the powered kernel matrix, or the
/// reduced form for large orthogonal lifts.
fn record_matrix(r: f64, alpha: f64, config: &ConfigRef) -> Result<SymMatrix> {
    let params = KernelParams::new(r)?;
    if needs_reduced_form(config) {
        let offsets = config
            .offsets
            .as_ref()
            .ok_or_else(|| invalid("orthogonal lift without offsets"))?;
        let copies = (config.m / offsets.len()) as u64;
        return Ok(reduced_lift_matrix(&params, offsets, copies, alpha)?.0);
    }
    let points = PointConfig::generate(config)?;
    hadamard_power(&build_kernel_matrix(&points, &params)?, alpha)
}

fn decide_record(r: f64, alpha: f64, config: &ConfigRef) -> Result<(crate::matrix::PositivityVerdict, SymMatrix)> {
    let matrix = record_matrix(r, alpha, config)?;
    let verdict = if needs_reduced_form(config) {
        let offsets = config.offsets.as_ref().expect("checked above");
        lifted_verdict(&KernelParams::new(r)?, offsets, (config.m / offsets.len()) as u64, alpha)?
    } else {
        psd_verdict(&matrix, default_tolerance(&matrix))?
    };
    Ok((verdict, matrix))
}

fn make_record(plan_index: usize, r: f64, alpha: f64, config: &ConfigRef) -> SearchRecord {
    match decide_record(r, alpha, config) {
        Ok((v, matrix)) => SearchRecord {
            plan_index,
            r,
            n: config.n,
            alpha,
            config_ref: config.clone(),
            min_eig: v.min_eigenvalue,
            tolerance: v.tolerance,
            subspace: v.subspace,
            verdict: if v.is_certified() { RecordVerdict::Certified } else { RecordVerdict::Violated },
            checksum: Some(matrix.checksum()),
            error: None,
            timestamp: now(),
        },
        Err(e) => error_record(plan_index, r, alpha, config, &e),
    }
}

/// Evaluates all Hadamard exponents of one task, building the base matrix once.
fn run_task(first_index: usize, task: &Task, alphas: &[f64]) -> Vec<SearchRecord> {
    let base = KernelParams::new(task.r)
        .and_then(|p| Ok((p, PointConfig::generate(&task.config)?)))
        .and_then(|(p, pts)| build_kernel_matrix(&pts, &p));
    alphas
        .iter()
        .enumerate()
        .map(|(k, &alpha)| {
            let idx = first_index + k;
            let outcome = base.as_ref().map_err(|e| invalid(e.to_string())).and_then(|m| {
                let powered = hadamard_power(m, alpha)?;
                let v = psd_verdict(&powered, default_tolerance(&powered))?;
                Ok((v, powered.checksum()))
            });
            match outcome {
                Ok((v, checksum)) => SearchRecord {
                    plan_index: idx,
                    r: task.r,
                    n: task.config.n,
                    alpha,
                    config_ref: task.config.clone(),
                    min_eig: v.min_eigenvalue,
                    tolerance: v.tolerance,
                    subspace: v.subspace,
                    verdict: if v.is_certified() { RecordVerdict::Certified } else { RecordVerdict::Violated },
                    checksum: Some(checksum),
                    error: None,
                    timestamp: now(),
                },
                Err(e) => error_record(idx, task.r, alpha, &task.config, &e),
            }
        })
        .collect()
}

/// Worker pool honoring `POSDEF_LAB_THREADS`.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let width: usize = v
            .trim()
            .parse()
            .map_err(|_| invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        if width == 0 {
            return Err(invalid(format!("{THREADS_ENV} must be positive")));
        }
        builder = builder.num_threads(width);
    }
    builder.build().map_err(|e| invalid(format!("cannot start worker pool: {e}")))
}

/// Runs every task of the plan that fits in the eigensolve budget. Records
/// are returned in plan order; a failing task yields ERROR records and the
/// sweep continues.
pub fn sweep(plan: &CampaignPlan) -> Result<Vec<SearchRecord>> {
    plan.validate()?;
    let alphas = plan.alphas();
    let per_task = alphas.len();
    let affordable = plan.budget / per_task;
    let tasks: Vec<Task> = plan.tasks().into_iter().take(affordable).collect();
    let pool = worker_pool()?;
    let chunks: Vec<Vec<SearchRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| run_task(i * per_task, task, &alphas))
            .collect()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Recomputes a record's smallest eigenvalue and checks it against the
/// stored one.
pub fn replay_record(record: &SearchRecord) -> Result<f64> {
    if record.verdict == RecordVerdict::Error {
        return Err(invalid("cannot replay an ERROR record"));
    }
    let (v, _) = decide_record(record.r, record.alpha, &record.config_ref)?;
    if (v.min_eigenvalue - record.min_eig).abs() > REPLAY_TOLERANCE || v.min_eigenvalue.is_nan() {
        return Err(Error::ReplayMismatch {
            recorded: record.min_eig,
            replayed: v.min_eigenvalue,
        });
    }
    Ok(v.min_eigenvalue)
}

/// Evidence records for a Hankel scan result: the lifted configuration as a
/// regular record (decided in reduced form when large).
pub fn lift_record(plan_index: usize, evidence: &LiftEvidence) -> Option<SearchRecord> {
    let config = evidence.config_ref()?;
    Some(make_record(plan_index, evidence.r, 1.0, &config))
}

/// How the exponent family behaves at a given r.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BisectFamily {
    /// Fixed configurations; violated at r if any (config, alpha) is.
    Configs { configs: Vec<ConfigRef>, alphas: Vec<f64> },
    /// Hankel ladder scan; violated at r if some ladder lifts to a violation.
    Hankel { spec: LadderSpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    /// Largest r found certified by the family.
    pub lo: f64,
    /// Smallest r found violated by the family.
    pub hi: f64,
    pub iterations: usize,
    /// False when the endpoints did not straddle a change of verdict.
    pub conclusive: bool,
    pub records: Vec<SearchRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evidence: Vec<LiftEvidence>,
}

fn family_violated(family: &BisectFamily, r: f64, next_index: &mut usize) -> Result<(bool, Vec<SearchRecord>, Vec<LiftEvidence>)> {
    match family {
        BisectFamily::Configs { configs, alphas } => {
            let alphas = if alphas.is_empty() { vec![1.0] } else { alphas.clone() };
            let mut records = Vec::new();
            for config in configs {
                for &alpha in &alphas {
                    records.push(make_record(*next_index, r, alpha, config));
                    *next_index += 1;
                }
            }
            Ok((records.iter().any(SearchRecord::is_violated), records, Vec::new()))
        }
        BisectFamily::Hankel { spec } => {
            let scan = hankel_scan(&KernelParams::new(r)?, spec)?;
            let best = scan.into_iter().next();
            let mut records = Vec::new();
            let mut evidence = Vec::new();
            if let Some(ev) = best {
                if let Some(rec) = lift_record(*next_index, &ev) {
                    *next_index += 1;
                    records.push(rec);
                }
                evidence.push(ev);
            }
            let violated = records.iter().any(SearchRecord::is_violated);
            Ok((violated, records, evidence))
        }
    }
}

/// Bisection on r keeping "certified at lo, violated at hi". Returns the
/// input interval flagged inconclusive when the endpoints do not straddle.
pub fn bisect_r(family: &BisectFamily, r_lo: f64, r_hi: f64, iters: usize) -> Result<Bracket> {
    if !(r_lo > 0.0 && r_hi > r_lo && r_hi.is_finite()) {
        return Err(invalid(format!("bisection needs 0 < r_lo < r_hi, got ({r_lo}, {r_hi})")));
    }
    let mut index = 0;
    let mut records = Vec::new();
    let mut evidence = Vec::new();
    let (lo_bad, recs, ev) = family_violated(family, r_lo, &mut index)?;
    records.extend(recs);
    evidence.extend(ev);
    let (hi_bad, recs, ev) = family_violated(family, r_hi, &mut index)?;
    records.extend(recs);
    evidence.extend(ev);
    if lo_bad || !hi_bad {
        return Ok(Bracket {
            lo: r_lo,
            hi: r_hi,
            iterations: 0,
            conclusive: false,
            records,
            evidence,
        });
    }
    let (mut lo, mut hi) = (r_lo, r_hi);
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let (bad, recs, ev) = family_violated(family, mid, &mut index)?;
        records.extend(recs);
        evidence.extend(ev);
        if bad {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Bracket {
        lo,
        hi,
        iterations: iters,
        conclusive: true,
        records,
        evidence,
    })
}

/// Records contradicting known theory: a VIOLATED record with `alpha = 1`
/// and `1 <= r <= 4`.
pub fn theory_conflicts(records: &[SearchRecord]) -> Vec<&SearchRecord> {
    records
        .iter()
        .filter(|r| r.is_violated() && r.alpha == 1.0 && (1.0..=4.0).contains(&r.r))
        .collect()
}

/// Flags jumps in `r -> min_eig` for fixed configuration and exponent: a step
/// is suspicious when it exceeds ten times both neighbouring steps (scaled by
/// grid spacing) plus a small absolute floor.
pub fn continuity_audit(records: &[SearchRecord]) -> Vec<String> {
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.verdict != RecordVerdict::Error) {
        let key = format!("{} alpha={}", rec.config_ref, rec.alpha);
        groups.entry(key).or_default().push((rec.r, rec.min_eig));
    }
    let mut flags = Vec::new();
    for (key, mut pts) in groups {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        for i in 1..slopes.len().saturating_sub(1) {
            let local = slopes[i - 1].abs().max(slopes[i + 1].abs());
            if slopes[i].abs() > 10.0 * local + 1e-9 {
                flags.push(format!("{key}: slope {:.3e} between r = {} and r = {}", slopes[i], pts[i].0, pts[i + 1].0));
            }
        }
    }
    flags
}

/// Smallest violating dimension per r, and notes for CERTIFIED records of the
/// same generator at larger dimensions (they certify only that configuration,
/// not the kernel on that space).
pub fn dimension_notes(records: &[SearchRecord]) -> Vec<String> {
    let mut first: BTreeMap<String, usize> = BTreeMap::new();
    for rec in records.iter().filter(|r| r.is_violated()) {
        let key = format!("r={} {}", rec.r, rec.config_ref.generator);
        let e = first.entry(key).or_insert(rec.n);
        *e = (*e).min(rec.n);
    }
    let mut notes = Vec::new();
    for (key, n0) in &first {
        let later = records
            .iter()
            .filter(|r| r.verdict == RecordVerdict::Certified)
            .filter(|r| &format!("r={} {}", r.r, r.config_ref.generator) == key && r.n > *n0)
            .count();
        notes.push(format!(
            "{key}: violated at n = {n0}; {later} certified records at larger n certify those configurations only"
        ));
    }
    notes
}

/// Per-(r, n) summary row for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub r: f64,
    pub n: usize,
    pub worst_alpha: f64,
    pub min_eig: f64,
    pub verdict: RecordVerdict,
    pub records: usize,
}

pub fn summarize(records: &[SearchRecord]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for rec in records.iter().filter(|r| r.verdict != RecordVerdict::Error) {
        match rows.iter_mut().find(|row| row.r == rec.r && row.n == rec.n) {
            Some(row) => {
                row.records += 1;
                let worse = (rec.is_violated() && row.verdict != RecordVerdict::Violated)
                    || (rec.is_violated() == (row.verdict == RecordVerdict::Violated) && rec.min_eig < row.min_eig);
                if worse {
                    row.worst_alpha = rec.alpha;
                    row.min_eig = rec.min_eig;
                    row.verdict = rec.verdict;
                }
            }
            None => rows.push(SummaryRow {
                r: rec.r,
                n: rec.n,
                worst_alpha: rec.alpha,
                min_eig: rec.min_eig,
                verdict: rec.verdict,
                records: 1,
            }),
        }
    }
    rows
}

/// Self-contained description of a violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub format: String,
    pub r: f64,
    pub alpha: f64,
    pub config: ConfigRef,
    /// `full`: the matrix is `[f(|x_i - x_j|)^alpha]` on `points`.
    /// `lift_reduced`: the matrix is `k H + D` of an orthogonal lift.
    pub representation: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    pub matrix_order: usize,
    pub checksum: String,
    pub min_eig: f64,
    pub tolerance: f64,
    pub confirmed_form: f64,
    pub eigenvector: Vec<f64>,
}

pub const WITNESS_FORMAT: &str = "posdef-lab witness 1";

/// Builds the witness for a VIOLATED record, recomputing it first.
pub fn witness_export(record: &SearchRecord) -> Result<WitnessFile> {
    if !record.is_violated() {
        return Err(Error::NotViolated);
    }
    let (v, matrix) = decide_record(record.r, record.alpha, &record.config_ref)?;
    if v.is_certified() || (v.min_eigenvalue - record.min_eig).abs() > REPLAY_TOLERANCE {
        return Err(Error::ReplayMismatch {
            recorded: record.min_eig,
            replayed: v.min_eigenvalue,
        });
    }
    let reduced = needs_reduced_form(&record.config_ref);
    let points = if reduced {
        None
    } else {
        Some(PointConfig::generate(&record.config_ref)?.points().to_vec())
    };
    Ok(WitnessFile {
        format: WITNESS_FORMAT.to_string(),
        r: record.r,
        alpha: record.alpha,
        config: record.config_ref.clone(),
        representation: if reduced { "lift_reduced" } else { "full" }.to_string(),
        points,
        matrix_order: matrix.order(),
        checksum: matrix.checksum(),
        min_eig: v.min_eigenvalue,
        tolerance: v.tolerance,
        confirmed_form: v.confirmed_form,
        eigenvector: v.witness.unwrap_or_default(),
    })
}

/// Re-verifies a witness: rebuilds the matrix (from the stored points for
/// full witnesses), checks the checksum and the smallest eigenvalue.
pub fn replay_witness(witness: &WitnessFile) -> Result<f64> {
    let matrix = match (&witness.points, witness.representation.as_str()) {
        (Some(points), "full") => {
            let cfg = PointConfig::from_points(points.clone())?;
            hadamard_power(&build_kernel_matrix(&cfg, &KernelParams::new(witness.r)?)?, witness.alpha)?
        }
        (None, "lift_reduced") => record_matrix(witness.r, witness.alpha, &witness.config)?,
        _ => return Err(invalid(format!("unknown witness representation {:?}", witness.representation))),
    };
    if matrix.checksum() != witness.checksum {
        return Err(invalid("witness matrix checksum mismatch"));
    }
    let value = min_eigenvalue(&matrix)?.value;
    if (value - witness.min_eig).abs() > REPLAY_TOLERANCE {
        return Err(Error::ReplayMismatch {
            recorded: witness.min_eig,
            replayed: value,
        });
    }
    Ok(value)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn write_witness(path: &Path, witness: &WitnessFile) -> Result<()> {
    let mut text = serde_json::to_string_pretty(witness)?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_error(path))
}

pub fn read_witness(path: &Path) -> Result<WitnessFile> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// First line of every JSON-lines file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub provenance: serde_json::Value,
}

/// Writes a provenance header line followed by one JSON object per line.
pub fn write_jsonl<T: Serialize>(out: &mut impl Write, provenance: &serde_json::Value, items: &[T]) -> Result<()> {
    let header = Header {
        provenance: provenance.clone(),
    };
    let mut emit = |line: String| -> Result<()> {
        writeln!(out, "{line}").map_err(|source| Error::Io {
            path: "<output>".into(),
            source,
        })
    };
    emit(serde_json::to_string(&header)?)?;
    for item in items {
        emit(serde_json::to_string(item)?)?;
    }
    Ok(())
}

/// Reads a file produced by [`write_jsonl`].
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(input: impl BufRead) -> Result<(serde_json::Value, Vec<T>)> {
    let mut lines = input.lines();
    let read = |l: std::io::Result<String>| {
        l.map_err(|source| Error::Io {
            path: "<input>".into(),
            source,
        })
    };
    let first = lines.next().ok_or_else(|| invalid("empty records file"))?;
    let header: Header = serde_json::from_str(&read(first)?)?;
    let mut items = Vec::new();
    for line in lines {
        let line = read(line)?;
        if !line.trim().is_empty() {
            items.push(serde_json::from_str(&line)?);
        }
    }
    Ok((header.provenance, items))
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, provenance: &serde_json::Value, items: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    let mut out = std::io::BufWriter::new(file);
    write_jsonl(&mut out, provenance, items)?;
    out.flush().map_err(io_error(path))
}

pub fn read_jsonl_file<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(serde_json::Value, Vec<T>)> {
    let file = std::fs::File::open(path).map_err(io_error(path))?;
    read_jsonl(std::io::BufReader::new(file))
}

/// Midpoint log-convexity failure of `h_r` and its lift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub r: f64,
    pub x: f64,
    pub y: f64,
    pub probe: crate::probes::ProbeReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<LiftEvidence>,
}

/// Everything a campaign produced.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignOutcome {
    pub records: Vec<SearchRecord>,
    pub lift_evidence: Vec<LiftEvidence>,
    pub pair_evidence: Vec<PairEvidence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    pub theory_conflicts: usize,
    pub continuity_flags: Vec<String>,
    pub dimension_notes: Vec<String>,
    /// Plain-language summary of what the evidence says about the threshold.
    pub findings: Vec<String>,
}

impl CampaignOutcome {
    pub fn violated(&self) -> impl Iterator<Item = &SearchRecord> {
        self.records.iter().filter(|r| r.is_violated())
    }
}

/// Sweep, then the optional Hankel phase: log-convexity pairs, ladder scans
/// and their lifts at every grid exponent, and bisection of the ladder family
/// between the largest certified and smallest violated grid values. A zero
/// budget runs nothing.
pub fn run_campaign(plan: &CampaignPlan) -> Result<CampaignOutcome> {
    plan.validate()?;
    let mut out = CampaignOutcome::default();
    if plan.budget == 0 {
        return Ok(out);
    }
    out.records = sweep(plan)?;
    let mut next = out.records.len();
    for &r in &plan.r_grid {
        let params = KernelParams::new(r)?;
        let kernel = crate::kernel::RadialKernel::new(params)?;
        for &(x, y) in &plan.refinement.logconvex_pairs {
            let probe = crate::probes::logconvex_midpoint_probe(|s| kernel.h(s).unwrap_or(f64::NAN), &[(x, y)], 0.0)?;
            let lift = if probe.failed() {
                let ev = crate::lift::lift_offsets(&params, &[0.5 * x, 0.5 * y], crate::lift::MAX_COPIES)?;
                if let Some(rec) = lift_record(next, &ev) {
                    out.records.push(rec);
                    next += 1;
                }
                Some(ev)
            } else {
                None
            };
            out.pair_evidence.push(PairEvidence { r, x, y, probe, lift });
        }
        if let Some(spec) = &plan.refinement.hankel {
            if let Some(best) = hankel_scan(&params, spec)?.into_iter().next() {
                if let Some(rec) = lift_record(next, &best) {
                    out.records.push(rec);
                    next += 1;
                }
                out.lift_evidence.push(best);
            }
        }
    }
    if let (Some(spec), true) = (&plan.refinement.hankel, plan.refinement.bisect_iters > 0) {
        let certified = out.lift_evidence.iter().filter(|e| !e.is_violation()).map(|e| e.r);
        let violated = out.lift_evidence.iter().filter(|e| e.is_violation()).map(|e| e.r);
        let lo = certified.fold(f64::NEG_INFINITY, f64::max);
        let hi = violated.fold(f64::INFINITY, f64::min);
        if lo.is_finite() && hi.is_finite() && lo < hi {
            let family = BisectFamily::Hankel { spec: spec.clone() };
            let mut bracket = bisect_r(&family, lo, hi, plan.refinement.bisect_iters)?;
            for rec in &mut bracket.records {
                rec.plan_index = next;
                next += 1;
            }
            out.records.extend(bracket.records.iter().cloned());
            out.bracket = Some(bracket);
        }
    }
    out.theory_conflicts = theory_conflicts(&out.records).len();
    out.continuity_flags = continuity_audit(&out.records);
    out.dimension_notes = dimension_notes(&out.records);
    out.findings = findings(&out);
    Ok(out)
}

fn findings(out: &CampaignOutcome) -> Vec<String> {
    let mut notes = Vec::new();
    let direct: Vec<&SearchRecord> = out
        .violated()
        .filter(|r| r.config_ref.generator != Generator::OrthogonalLift)
        .collect();
    match direct.iter().min_by(|a, b| a.r.total_cmp(&b.r)) {
        Some(rec) => notes.push(format!(
            "sweep: smallest violating r = {} (n = {}, alpha = {}); f is not positive definite on R^{} there",
            rec.r, rec.n, rec.alpha, rec.n
        )),
        None => notes.push("sweep: no violation on the swept configurations".into()),
    }
    let lifted = out
        .records
        .iter()
        .filter(|r| r.is_violated() && r.config_ref.generator == Generator::OrthogonalLift);
    if let Some(rec) = lifted.min_by(|a, b| a.r.total_cmp(&b.r)) {
        notes.push(format!(
            "lift: explicit violation at r = {} in dimension n = {}, so the threshold lies at or below {}",
            rec.r, rec.n, rec.r
        ));
    }
    if let Some(b) = &out.bracket {
        notes.push(format!(
            "ladder family changes verdict inside ({}, {}] after {} bisection steps{}",
            b.lo,
            b.hi,
            b.iterations,
            if b.conclusive { "" } else { " (inconclusive)" }
        ));
    }
    notes.push("these are brackets for the configurations tried, not a determination of the threshold".into());
    notes
}
