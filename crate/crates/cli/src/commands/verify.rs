use std::fmt;

use anyhow::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wirl_core::projections::is_feasible;
use wirl_core::{
    evaluate, lipschitz_constant, project_param, sample_feasible, vi_certificate, Dataset, ExactSolver, ParamSpace,
    ParamVector, TraceRow,
};

use crate::args::{required, resolve_seed, VerifyArgs};
use crate::commands::learn::resolve_space;
use crate::exit::{Coded, ExitKind};
use crate::io::{load_dataset, read_summary, read_trace, Summary};

pub const DEFAULT_CHECKS: usize = 100;
const PROPERTY_TOL: f64 = 1e-10;
const REPLAY_RTOL: f64 = 1e-9;
const BOUND_TOL: f64 = 1e-9;
const CERTIFICATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub max_violation: f64,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        write!(f, "{tag}  {:<26} max_violation={:e}", self.name, self.max_violation)?;
        if !self.detail.is_empty() {
            write!(f, "  ({})", self.detail)?;
        }
        Ok(())
    }
}

/// Accumulates the worst violation of one property and where it happened.
struct Tally {
    name: &'static str,
    tol: f64,
    worst: f64,
    witness: String,
}

impl Tally {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            tol,
            worst: 0.0,
            witness: String::new(),
        }
    }

    fn record(&mut self, violation: f64, witness: impl FnOnce() -> String) {
        // NaN counts as a violation.
        if violation.is_nan() || violation > self.worst {
            self.worst = violation;
            self.witness = witness();
        }
    }

    fn finish(self) -> Check {
        let pass = self.worst <= self.tol;
        Check {
            name: self.name,
            status: if pass { Status::Pass } else { Status::Fail },
            max_violation: self.worst,
            detail: if pass { String::new() } else { self.witness },
        }
    }
}

fn skip(name: &'static str, why: &str) -> Check {
    Check {
        name,
        status: Status::Skip,
        max_violation: 0.0,
        detail: why.into(),
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }
}

pub fn verify(args: &VerifyArgs) -> Result<VerifyReport> {
    let loaded = load_dataset(&required(args.data.clone(), "data")?)?;
    let data = &loaded.data;
    let rows = read_trace(&required(args.trace.clone(), "trace")?)?;
    let summary = args.summary.as_deref().map(read_summary).transpose()?;
    let (space, init) = match &summary {
        Some(s) => (s.config.space, s.config.init.clone()),
        None => {
            let space = resolve_space(None, data)?;
            let init = space.center();
            (space, init)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(resolve_seed(args.seed)?);
    let cases = args.checks.unwrap_or(DEFAULT_CHECKS);

    let mut checks = vec![structure(&rows)];
    if checks[0].status == Status::Fail {
        return Ok(VerifyReport { checks });
    }
    checks.push(match &summary {
        Some(s) if s.dataset_sha256 != loaded.sha256 => Check {
            name: "dataset hash",
            status: Status::Fail,
            max_violation: 1.0,
            detail: format!("summary has {}, file has {}", s.dataset_sha256, loaded.sha256),
        },
        Some(_) => Check {
            name: "dataset hash",
            status: Status::Pass,
            max_violation: 0.0,
            detail: String::new(),
        },
        None => skip("dataset hash", "no summary"),
    });
    checks.push(monotonicity(&rows));
    checks.extend(replay(data, &rows, &space, init, summary.as_ref())?);
    checks.extend(bounds(data, &rows, &space, summary.as_ref())?);
    checks.extend(spot_checks(data, &space, cases, &mut rng)?);
    Ok(VerifyReport { checks })
}

fn structure(rows: &[TraceRow]) -> Check {
    let mut t = Tally::new("trace structure", 0.0);
    if rows.is_empty() {
        t.record(1.0, || "trace has no rows".into());
    }
    for (i, r) in rows.iter().enumerate() {
        if r.k != i + 1 {
            t.record(1.0, || format!("row {} has k={}", i + 1, r.k));
        }
        let finite = [r.alpha, r.objective, r.best_objective, r.subgrad_norm]
            .iter()
            .all(|x| x.is_finite());
        if !finite || r.alpha <= 0.0 {
            t.record(1.0, || {
                format!("row k={} has a non-finite value or nonpositive step", r.k)
            });
        }
    }
    t.finish()
}

fn monotonicity(rows: &[TraceRow]) -> Check {
    let mut t = Tally::new("best-iterate monotonicity", 0.0);
    let mut running = f64::INFINITY;
    let mut prev = f64::INFINITY;
    for r in rows {
        running = running.min(r.objective);
        t.record((r.best_objective - prev).max(0.0), || {
            format!("F_best increased at k={}", r.k)
        });
        t.record((r.best_objective - running).abs(), || {
            format!("F_best differs from min F at k={}", r.k)
        });
        prev = r.best_objective;
    }
    t.finish()
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Re-runs the iteration from the recorded steps and compares every row.
fn replay(
    data: &Dataset,
    rows: &[TraceRow],
    space: &ParamSpace,
    init: ParamVector,
    summary: Option<&Summary>,
) -> Result<Vec<Check>> {
    let mut values = Tally::new("replay F and subgradient", REPLAY_RTOL);
    let mut steps = Tally::new("step schedule", 0.0);
    let mut projection = Tally::new("projection certificate", CERTIFICATE_TOL);
    let mut best = Tally::new("best iterate", REPLAY_RTOL);
    let stride = (rows.len() / 50).max(1);

    let mut phi = init;
    let mut best_value = f64::INFINITY;
    let mut best_phi = phi.clone();
    for (i, row) in rows.iter().enumerate() {
        let e = evaluate(&phi, data, &ExactSolver)?;
        values.record(relative(row.objective, e.objective), || format!("F at k={}", row.k));
        values.record(relative(row.subgrad_norm, e.subgradient.norm()), || {
            format!("subgradient at k={}", row.k)
        });
        if let Some(s) = summary {
            let alpha = s.config.schedule.rate(row.k)?;
            steps.record((alpha - row.alpha).abs(), || format!("alpha at k={}", row.k));
        }
        if e.objective < best_value {
            best_value = e.objective;
            best_phi = phi.clone();
        }
        if i + 1 == rows.len() {
            break;
        }
        let mut stepped = phi.clone();
        stepped.axpy(-row.alpha, &e.subgradient)?;
        let next = project_param(&stepped, space)?;
        if !is_feasible(&next, space, CERTIFICATE_TOL)? {
            projection.record(f64::INFINITY, || format!("iterate {} left the space", row.k + 1));
        }
        if i % stride == 0 {
            let c = vi_certificate(&stepped, &next, space, 20, row.k as u64)?;
            projection.record(c.max(0.0), || format!("projection after k={}", row.k));
        }
        phi = next;
    }
    let mut out = vec![values.finish()];
    out.push(match summary {
        Some(_) => steps.finish(),
        None => skip("step schedule", "no summary"),
    });
    out.push(projection.finish());
    out.push(match summary {
        Some(s) => {
            best.record(relative(s.f_best, best_value), || "summary F_best".into());
            best.record(s.phi_best.max_abs_diff(&best_phi)?, || "summary phi_best".into());
            best.finish()
        }
        None => skip("best iterate", "no summary"),
    });
    Ok(out)
}

fn bounds(data: &Dataset, rows: &[TraceRow], space: &ParamSpace, summary: Option<&Summary>) -> Result<Vec<Check>> {
    let g = lipschitz_constant(data)?.value;
    let d = space.diameter();
    let mut column = Tally::new("bound column", BOUND_TOL);
    let mut inequality = Tally::new("best-iterate bound", BOUND_TOL);
    if let Some(s) = summary {
        column.record(relative(s.lipschitz, g), || "summary G".into());
        column.record(relative(s.diameter, d), || "summary diameter".into());
    }
    let (mut linear, mut squares) = (0.0, 0.0);
    for r in rows {
        linear += r.alpha;
        squares += r.alpha * r.alpha;
        let bound = (d * d + g * g * squares) / (2.0 * linear);
        if let Some(b) = r.bound {
            column.record(relative(b, bound), || format!("bound at k={}", r.k));
        }
        inequality.record(r.best_objective - bound, || format!("F_best above bound at k={}", r.k));
    }
    let has_column = rows.iter().any(|r| r.bound.is_some());
    Ok(vec![
        if has_column || summary.is_some() {
            column.finish()
        } else {
            skip("bound column", "bounds disabled")
        },
        // The relaxed bound controls F_best − min F; min F = 0 is only known for generated data.
        if data.metadata.phi0.is_some() {
            inequality.finish()
        } else {
            skip("best-iterate bound", "min F unknown (no phi0)")
        },
    ])
}

fn spot_checks(data: &Dataset, space: &ParamSpace, cases: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let g = lipschitz_constant(data)?.value;
    let mut convex = Tally::new("convexity", PROPERTY_TOL);
    let mut subgrad = Tally::new("subgradient inequality", PROPERTY_TOL);
    let mut lipschitz = Tally::new("lipschitz", PROPERTY_TOL);
    let mut homogeneous = Tally::new("homogeneity", PROPERTY_TOL);
    for case in 0..cases {
        let p = sample_feasible(space, rng);
        let q = sample_feasible(space, rng);
        let t = (case as f64 + 0.5) / cases as f64;
        let ep = evaluate(&p, data, &ExactSolver)?;
        let eq = evaluate(&q, data, &ExactSolver)?;
        let mid = p.scale(t).add(&q.scale(1.0 - t))?;
        let fm = evaluate(&mid, data, &ExactSolver)?.objective;
        convex.record(fm - t * ep.objective - (1.0 - t) * eq.objective, || {
            format!("case {case}, t={t}")
        });
        let linear = ep.objective + ep.subgradient.dot(&q.sub(&p)?)?;
        subgrad.record(linear - eq.objective, || format!("case {case}"));
        lipschitz.record((ep.objective - eq.objective).abs() - g * p.distance(&q)?, || {
            format!("case {case}")
        });
        for gamma in [0.5, 2.0, 10.0] {
            let scaled = evaluate(&p.scale(gamma), data, &ExactSolver)?;
            homogeneous.record((scaled.objective - gamma * ep.objective).abs(), || {
                format!("case {case}, gamma={gamma}")
            });
            if let Some(n) = scaled
                .solutions
                .iter()
                .zip(&ep.solutions)
                .position(|(a, b)| a.witness != b.witness)
            {
                homogeneous.record(f64::INFINITY, || {
                    format!("argmax changed on sample {n}, case {case}, gamma={gamma}")
                });
            }
        }
    }
    Ok(vec![
        convex.finish(),
        subgrad.finish(),
        lipschitz.finish(),
        homogeneous.finish(),
    ])
}

pub fn run(args: VerifyArgs) -> Result<()> {
    let report = verify(&args)?;
    for c in &report.checks {
        println!("{c}");
    }
    if report.passed() {
        return Ok(());
    }
    let failed: Vec<String> = report
        .failures()
        .map(|c| format!("{} ({})", c.name, c.detail))
        .collect();
    Err(Coded::new(ExitKind::Property, format!("property violation: {}", failed.join("; "))).into())
}
