use std::path::Path;

use anyhow::Result;
use wirl_core::{
    lipschitz_constant, run_intention_learning, BoundParams, Dataset, ExactSolver, LearnerConfig, LearningTrace,
    ParamSpace, Schedule,
};

use crate::args::{required, resolve_seed, LearnArgs};
use crate::exit::{Coded, ExitKind};
use crate::io::{emit, json_arg, load_dataset, trace_csv, write_atomic, Summary};

pub const DEFAULT_SCHEDULE: &str = "invsqrt:1";
pub const DEFAULT_ITERS: usize = 1000;

/// Space from the flag, else the one recorded by the generator, else the default for the data's variant.
pub fn resolve_space(flag: Option<&str>, data: &Dataset) -> Result<ParamSpace> {
    let space = match flag {
        Some(s) => s.parse()?,
        None => data
            .metadata
            .space
            .unwrap_or_else(|| ParamSpace::default_for(data.variant, data.dim)),
    };
    space.validate()?;
    Ok(space)
}

pub struct LearnOutcome {
    pub trace: LearningTrace,
    pub summary: Summary,
}

pub fn learn(args: &LearnArgs) -> Result<LearnOutcome> {
    let loaded = load_dataset(&required(args.data.clone(), "data")?)?;
    let data = &loaded.data;
    let space = resolve_space(args.space.as_deref(), data)?;
    let schedule: Schedule = args.schedule.as_deref().unwrap_or(DEFAULT_SCHEDULE).parse()?;
    let mut cfg = LearnerConfig::new(schedule, args.iters.unwrap_or(DEFAULT_ITERS), space);
    cfg.target_eps = args.eps;
    cfg.rng_seed = resolve_seed(args.seed)?;
    if let Some(init) = &args.init {
        cfg.init = json_arg("init", init)?;
    }
    let lipschitz = lipschitz_constant(data)?;
    if !lipschitz.exact {
        eprintln!("warning: G is an over-estimate (knapsack too large to enumerate)");
    }
    let diameter = space.diameter();
    if !args.no_bound {
        cfg.bound = Some(BoundParams {
            diameter,
            lipschitz: lipschitz.value,
        });
    }

    let trace = run_intention_learning(data, &cfg, &ExactSolver)?;
    let summary = Summary {
        phi_best: trace.phi_best.clone(),
        k_best: trace.k_best,
        f_best: trace.best_objective().unwrap_or(f64::INFINITY),
        iterations: trace.rows.len(),
        converged: trace.converged,
        complete: trace.is_complete(),
        abort_reason: trace.abort_reason.clone(),
        lipschitz: lipschitz.value,
        lipschitz_exact: lipschitz.exact,
        diameter,
        dataset_sha256: loaded.sha256,
        config: cfg,
    };
    Ok(LearnOutcome { trace, summary })
}

pub fn write_outputs(outcome: &LearnOutcome, trace: Option<&Path>, summary: Option<&Path>) -> Result<()> {
    emit(trace, &trace_csv(&outcome.trace.rows)?)?;
    if let Some(path) = summary {
        let mut text = serde_json::to_string_pretty(&outcome.summary)?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

pub fn run(args: LearnArgs) -> Result<()> {
    let outcome = learn(&args)?;
    write_outputs(&outcome, args.trace.as_deref(), args.summary.as_deref())?;
    let s = &outcome.summary;
    eprintln!(
        "iterations={} k_best={} F_best={} converged={} wall_time={:.3}s",
        s.iterations,
        s.k_best,
        s.f_best,
        s.converged,
        outcome.trace.wall_time.as_secs_f64()
    );
    if let Some(reason) = &s.abort_reason {
        return Err(Coded::new(
            ExitKind::Numerical,
            format!("run aborted, partial trace written: {reason}"),
        )
        .into());
    }
    Ok(())
}
