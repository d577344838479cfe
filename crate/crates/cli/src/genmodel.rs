use acpso::problems::{Instance, ProblemPack};

use crate::{write_json, CliError, GenmodelArgs};

/// Size parameters from either an explicit list or a named preset.
pub(crate) fn size_of(pack: &ProblemPack, size: Option<&[usize]>, preset: Option<&str>) -> Result<Vec<usize>, CliError> {
    match (size, preset) {
        (Some(s), _) => Ok(s.to_vec()),
        (None, Some(name)) => pack.preset(name).ok_or_else(|| {
            CliError::input(anyhow::anyhow!("no preset `{name}` for {}", pack.kind))
        }),
        (None, None) => Err(CliError::input(anyhow::anyhow!("either --size or --preset is required"))),
    }
}

pub(crate) fn generate(pack: &ProblemPack, size: &[usize], seed: u64) -> Result<Instance, CliError> {
    pack.generate_instance(size, seed).map_err(CliError::input)
}

pub fn cmd_genmodel(args: &GenmodelArgs) -> Result<(), CliError> {
    let pack = ProblemPack::new(args.pack);
    let size = size_of(&pack, args.size.as_deref(), args.preset.as_deref())?;
    let instance = generate(&pack, &size, args.seed)?;
    write_json(&pack.instance_doc(&instance), args.out.as_deref())
}
