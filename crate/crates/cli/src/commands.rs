use anyhow::{bail, Context, Result};
use serde_json::json;
use std::path::Path;

use posdef_core::kernel::{linspace, Direction, EvalGrid, ExactRatio, KernelParams, PickPair, RadialKernel};
use posdef_core::matrix::{
    build_kernel_matrix, cnd_verdict, default_tolerance, infdiv_probe, psd_verdict, ConfigRef, Generator, PointConfig,
};
use posdef_core::poly::{verify_convexity, verify_logconvexity};
use posdef_core::probes::{self, DifferenceSettings, ProbeReport, ProbeVerdict};
use posdef_core::radial::{bochner_radial_probe, QuadSettings};
use posdef_core::reproduce::{all_pass, claim_ids, reproduce, ReproduceOptions};
use posdef_core::search::{
    read_jsonl_file, read_witness, replay_record, replay_witness, run_campaign, summarize, witness_export,
    write_jsonl_file, write_witness, CampaignPlan, RecordVerdict, SearchRecord,
};

use posdef_cli::output::{csv_document, emit, json_document, num, provenance};
use crate::{
    Cli, CmTarget, Command, DirectionArg, EvalArgs, Expectation, Format, GeneratorArg, MatrixArgs, MatrixTestKind,
    Outcome, PolyArgs, ProbeArgs, ProbeExpectation, ProbeKind, ReplayArgs, ReproduceArgs, SearchArgs,
};

pub fn run(cli: &Cli) -> Result<Outcome> {
    let prov = provenance(cli, cli.seed)?;
    match &cli.command {
        Command::Eval(a) => eval(a, &prov),
        Command::PolyAnalyze(a) => poly(a, &prov),
        Command::MatrixTest(a) => matrix_test(a, cli.seed, &prov),
        Command::Probe(a) => probe(a, &prov),
        Command::ReproducePaper(a) => reproduce_paper(a, cli.seed, &prov),
        Command::Search(a) => search(a, &prov),
        Command::Replay(a) => replay(a),
    }
}

fn kernel_params(r: &str) -> Result<KernelParams> {
    r.parse::<KernelParams>().with_context(|| format!("invalid --r {r:?}"))
}

fn eval(a: &EvalArgs, prov: &serde_json::Value) -> Result<Outcome> {
    let params = kernel_params(&a.r)?;
    let points = if a.points.is_empty() { linspace(0.0, 4.0, 9) } else { a.points.clone() };
    let rows = EvalGrid::new(points, a.band)?.evaluate(&params)?;
    let bytes = match a.format {
        Format::Json => json_document(prov, &rows)?,
        Format::Csv => {
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![num(r.t), num(r.f), num(r.g), num(r.f_prime), num(r.f_second)])
                .collect();
            csv_document(prov, &["t", "f", "g", "f_prime", "f_second"], &table)?
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    Ok(Outcome::Met)
}

fn poly(a: &PolyArgs, prov: &serde_json::Value) -> Result<Outcome> {
    let ratio: ExactRatio = a
        .r
        .parse()
        .with_context(|| format!("poly-analyze needs an exact ratio p/q, got {:?}", a.r))?;
    if ratio.p < ratio.q {
        bail!("poly-analyze needs r >= 1, got {ratio}");
    }
    let convexity = if ratio.p > ratio.q { Some(verify_convexity(ratio.p, ratio.q)?) } else { None };
    let logconvexity = verify_logconvexity(ratio.p, ratio.q)?;
    let result = json!({
        "r": ratio.to_string(),
        "convexity": convexity,
        "logconvexity": logconvexity,
    });
    emit(a.out.as_deref(), &json_document(prov, &result)?)?;
    Ok(Outcome::Met)
}

fn generator(g: GeneratorArg) -> Generator {
    match g {
        GeneratorArg::Gaussian => Generator::RandomGaussian,
        GeneratorArg::Lattice => Generator::ScaledLattice,
        GeneratorArg::Line => Generator::GridLine,
        GeneratorArg::Simplex => Generator::Simplex,
    }
}

fn matrix_test(a: &MatrixArgs, seed: u64, prov: &serde_json::Value) -> Result<Outcome> {
    let direction = match (a.direction, a.test) {
        (Some(DirectionArg::F), _) => Direction::F,
        (Some(DirectionArg::G), _) => Direction::G,
        (None, MatrixTestKind::Cnd) => Direction::G,
        (None, _) => Direction::F,
    };
    let params = kernel_params(&a.r)?.with_direction(direction);
    let config_ref = ConfigRef::new(generator(a.generator), seed, a.m, a.n, a.scale);
    let config = PointConfig::generate(&config_ref)?;
    let (certified, result) = match a.test {
        MatrixTestKind::Infdiv => {
            let report = infdiv_probe(&config, &params, &a.alphas, a.tol)?;
            (report.is_certified(), serde_json::to_value(&report)?)
        }
        kind => {
            let matrix = build_kernel_matrix(&config, &params)?;
            let tol = a.tol.unwrap_or_else(|| default_tolerance(&matrix));
            let verdict = if kind == MatrixTestKind::Cnd { cnd_verdict(&matrix, tol)? } else { psd_verdict(&matrix, tol)? };
            (
                verdict.is_certified(),
                json!({ "kernel": params.to_string(), "checksum": matrix.checksum(), "verdict": verdict }),
            )
        }
    };
    let result = json!({ "config": config_ref, "test": a.test, "certified": certified, "report": result });
    emit(a.out.as_deref(), &json_document(prov, &result)?)?;
    Ok(match a.expect {
        Some(Expectation::Certified) if !certified => Outcome::Failed,
        Some(Expectation::Violated) if certified => Outcome::Failed,
        _ => Outcome::Met,
    })
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    let (x, y) = s.split_once(':').with_context(|| format!("pair {s:?} must look like x:y"))?;
    Ok((x.trim().parse()?, y.trim().parse()?))
}

fn run_probe(kind: &ProbeKind) -> Result<ProbeReport> {
    Ok(match kind {
        ProbeKind::Cm {
            r,
            target,
            points,
            max_order,
            tol,
        } => {
            let kernel = RadialKernel::new(kernel_params(r)?)?;
            let fun = |x: f64| match target {
                CmTarget::H => kernel.h(x).unwrap_or(f64::NAN),
                CmTarget::F => kernel.f(x).unwrap_or(f64::NAN),
            };
            let widder = probes::widder_cm_probe(fun, points, *tol)?;
            if widder.failed() {
                widder
            } else {
                probes::finite_diff_cm_probe(fun, *max_order, &linspace(0.01, 4.0, 80), *tol)?
            }
        }
        ProbeKind::Bernstein { r, max_order, tol } => {
            let kernel = RadialKernel::new(kernel_params(r)?)?;
            let settings = DifferenceSettings {
                grid: linspace(0.01, 4.0, 80),
                max_order: *max_order,
                tol: *tol,
            };
            probes::bernstein_probe(|x| kernel.g(x).unwrap_or(f64::NAN), &settings)?
        }
        ProbeKind::Pick { p, q, tol } => probes::pick_probe(PickPair::new(*p, *q)?, &probes::pick_grid(), *tol)?,
        ProbeKind::Logconvex { r, pairs, tol } => {
            let kernel = RadialKernel::new(kernel_params(r)?)?;
            let pairs = pairs.iter().map(|p| parse_pair(p)).collect::<Result<Vec<_>>>()?;
            probes::logconvex_midpoint_probe(|s| kernel.h(s).unwrap_or(f64::NAN), &pairs, *tol)?
        }
        ProbeKind::Polya { r, tol } => probes::polya_certificate(&kernel_params(r)?, &linspace(0.0, 50.0, 5001), *tol)?,
        ProbeKind::Growth { r, x_max } => {
            probes::growth_obstruction_probe(&kernel_params(r)?.with_direction(Direction::G), *x_max)?
        }
        ProbeKind::Quadrature { p, q, nodes, tol } => {
            let grid: Vec<f64> = posdef_core::kernel::logspace(0.01, 100.0, 2001)
                .into_iter()
                .filter(|t| (t - 1.0).abs() >= posdef_core::kernel::DEFAULT_BAND)
                .collect();
            probes::quadrature_identity_check(*p, *q, &grid, *nodes, *tol)?
        }
        ProbeKind::Factor4 { points, tol } => probes::factorization_check_r4(&linspace(0.0, 100.0, *points), *tol)?,
        ProbeKind::Bochner { r, n, freqs, damping } => {
            let settings = QuadSettings {
                damping: *damping,
                ..QuadSettings::default()
            };
            bochner_radial_probe(&kernel_params(r)?, *n, freqs, &settings)?
        }
    })
}

fn probe(a: &ProbeArgs, prov: &serde_json::Value) -> Result<Outcome> {
    let report = run_probe(&a.kind)?;
    emit(a.out.as_deref(), &json_document(prov, &report)?)?;
    Ok(match (a.expect, report.verdict) {
        (Some(ProbeExpectation::Pass), v) if v != ProbeVerdict::Pass => Outcome::Failed,
        (Some(ProbeExpectation::Fail), v) if v != ProbeVerdict::Fail => Outcome::Failed,
        _ => Outcome::Met,
    })
}

fn reproduce_paper(a: &ReproduceArgs, seed: u64, prov: &serde_json::Value) -> Result<Outcome> {
    if a.list {
        emit(None, (claim_ids().join("\n") + "\n").as_bytes())?;
        return Ok(Outcome::Met);
    }
    let opts = ReproduceOptions {
        only: a.only.clone(),
        tol: a.tol,
        seed,
    };
    let rows = reproduce(&opts)?;
    let id_w = rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
    let exp_w = rows.iter().map(|r| r.expected.len()).max().unwrap_or(8).max(8);
    let mut text = format!("# {}\n", serde_json::to_string(prov)?);
    text += &format!("{:<id_w$}  {:<6}  {:<exp_w$}  {}\n", "id", "status", "expected", "observed");
    for r in &rows {
        text += &format!("{:<id_w$}  {:<6}  {:<exp_w$}  {}\n", r.id, r.status.to_string(), r.expected, r.observed);
    }
    let passed = rows.iter().filter(|r| r.status == posdef_core::RowStatus::Pass).count();
    text += &format!("{passed}/{} claims reproduced\n", rows.len());
    emit(None, text.as_bytes())?;
    if let Some(path) = &a.json {
        emit(Some(path), &json_document(prov, &rows)?)?;
    }
    Ok(if all_pass(&rows) { Outcome::Met } else { Outcome::Failed })
}

fn search(a: &SearchArgs, prov: &serde_json::Value) -> Result<Outcome> {
    let plan = CampaignPlan::from_json_file(&a.plan).with_context(|| format!("reading plan {}", a.plan.display()))?;
    let prov = json!({ "header": prov, "plan": plan });
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let outcome = run_campaign(&plan)?;
    let records_path = a.out_dir.join("records.jsonl");
    write_jsonl_file(&records_path, &prov, &outcome.records).with_context(|| format!("writing {}", records_path.display()))?;
    let summary: Vec<Vec<String>> = summarize(&outcome.records)
        .iter()
        .map(|s| vec![num(s.r), s.n.to_string(), num(s.worst_alpha), num(s.min_eig), s.verdict.to_string(), s.records.to_string()])
        .collect();
    emit(
        Some(&a.out_dir.join("summary.csv")),
        &csv_document(&prov, &["r", "n", "worst_alpha", "min_eig", "verdict", "records"], &summary)?,
    )?;
    let mut evidence = outcome.clone();
    evidence.records.clear();
    emit(Some(&a.out_dir.join("evidence.json")), &json_document(&prov, &evidence)?)?;
    let mut written = 0;
    for rec in outcome.violated().take(a.max_witnesses) {
        let witness = witness_export(rec)?;
        write_witness(&a.out_dir.join(format!("witness-{:05}.json", rec.plan_index)), &witness)?;
        written += 1;
    }
    let mut text = format!(
        "{} records ({} violated, {} errors), {} witness files in {}\n",
        outcome.records.len(),
        outcome.violated().count(),
        outcome.records.iter().filter(|r| r.verdict == RecordVerdict::Error).count(),
        written,
        a.out_dir.display()
    );
    for f in &outcome.findings {
        text += &format!("- {f}\n");
    }
    if outcome.theory_conflicts > 0 {
        text += &format!("THEORY CONFLICT: {} violated records with alpha = 1 and r in [1, 4]\n", outcome.theory_conflicts);
    }
    emit(None, text.as_bytes())?;
    Ok(if outcome.theory_conflicts == 0 { Outcome::Met } else { Outcome::Failed })
}

fn replay(a: &ReplayArgs) -> Result<Outcome> {
    if let Some(path) = &a.witness {
        let witness = read_witness(path)?;
        return Ok(match replay_witness(&witness) {
            Ok(v) => {
                println!("witness replayed: min eigenvalue {v:e} (recorded {:e})", witness.min_eig);
                Outcome::Met
            }
            Err(e) => {
                println!("witness replay failed: {e}");
                Outcome::Failed
            }
        });
    }
    let path: &Path = a.records.as_deref().context("--records or --witness is required")?;
    let (_, records): (_, Vec<SearchRecord>) = read_jsonl_file(path)?;
    let mut mismatches = 0;
    let mut replayed = 0;
    for rec in records.iter().filter(|r| r.verdict != RecordVerdict::Error) {
        replayed += 1;
        if let Err(e) = replay_record(rec) {
            mismatches += 1;
            println!("record {}: {e}", rec.plan_index);
        }
    }
    println!("replayed {replayed} records, {mismatches} mismatches");
    Ok(if mismatches == 0 { Outcome::Met } else { Outcome::Failed })
}
