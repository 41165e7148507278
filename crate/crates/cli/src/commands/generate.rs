use anyhow::Result;
use wirl_core::{generate, serialize_dataset, Family, FamilyParams, ParamVector};

use crate::args::{required, resolve_seed, GenerateArgs};
use crate::io::{emit, json_arg};

pub fn run(args: GenerateArgs) -> Result<()> {
    let family: Family = required(args.family, "family")?.parse()?;
    let mut params = FamilyParams::new(family, required(args.dim, "dim")?, required(args.samples, "samples")?);
    if let Some(v) = args.items {
        params.items = v;
    }
    if let Some(v) = args.max_weight {
        params.max_weight = v;
    }
    if let Some(v) = args.capacity_ratio {
        params.capacity_ratio = v;
    }
    if let Some(v) = args.points {
        params.points = v;
    }
    if let Some(v) = args.grid {
        params.grid = v;
    }
    if let Some(v) = args.b0 {
        params.b0 = v;
    }
    let phi0: Option<ParamVector> = args.phi0.as_deref().map(|s| json_arg("phi0", s)).transpose()?;
    let data = generate(&params, resolve_seed(args.seed)?, phi0)?;
    let mut text = serialize_dataset(&data)?;
    text.push('\n');
    emit(args.out.as_deref(), text.as_bytes())?;
    if let Some(out) = &args.out {
        eprintln!(
            "wrote {} samples ({}) to {}",
            data.len(),
            data.metadata.generator,
            out.display()
        );
    }
    Ok(())
}
