use std::collections::HashSet;
use std::path::Path;

use anyhow::Result;

use crate::args::ReportArgs;
use crate::exit::usage;
use crate::io::{emit, fmt_float, read_trace};

fn run_id(path: &Path, taken: &mut HashSet<String>) -> String {
    let stem = path
        .file_stem()
        .map_or_else(|| "run".into(), |s| s.to_string_lossy().into_owned());
    let mut id = stem.clone();
    let mut n = 2;
    while !taken.insert(id.clone()) {
        id = format!("{stem}-{n}");
        n += 1;
    }
    id
}

/// Long-format `run_id,k,F_best,bound` CSV over all traces.
pub fn report(traces: &[impl AsRef<Path>]) -> Result<Vec<u8>> {
    if traces.is_empty() {
        return Err(usage("report needs at least one trace file"));
    }
    let mut taken = HashSet::new();
    let mut missing = Vec::new();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["run_id", "k", "F_best", "bound"])?;
    for path in traces {
        let path = path.as_ref();
        let rows = read_trace(path)?;
        let id = run_id(path, &mut taken);
        if rows.iter().any(|r| r.bound.is_none()) {
            missing.push(id.clone());
        }
        for r in &rows {
            w.write_record([
                id.clone(),
                r.k.to_string(),
                fmt_float(r.best_objective),
                r.bound.map(fmt_float).unwrap_or_default(),
            ])?;
        }
    }
    let body = w.into_inner()?;
    let mut out = Vec::with_capacity(body.len() + 64);
    if !missing.is_empty() {
        out.extend_from_slice(format!("# bound column empty for: {}\n", missing.join(" ")).as_bytes());
    }
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn run(args: ReportArgs) -> Result<()> {
    let bytes = report(&args.traces)?;
    emit(args.out.as_deref(), &bytes)
}
