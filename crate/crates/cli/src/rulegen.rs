use acpso::graph::{ConstraintSet, Metamodel, MetamodelDoc};
use acpso::problems::ProblemPack;
use acpso::rulegen::{generate_acpsos, generate_single_phase, GenOptions, GenerationScope, RuleSet};
use acpso::rules::{Phase, RuleDoc};
use log::warn;

use crate::{read_json, write_json, CliError, PhaseArg, RulegenArgs};

/// Rule documents for the requested phases, with provenance if asked.
pub fn rule_docs(args: &RulegenArgs) -> Result<Vec<RuleDoc>, CliError> {
    let (mm, cs, scope) = match (&args.pack, &args.metamodel) {
        (Some(kind), _) => {
            let pack = ProblemPack::new(*kind);
            ((*pack.metamodel).clone(), pack.constraints, pack.scope)
        }
        (None, Some(path)) => {
            let doc: MetamodelDoc = read_json(path)?;
            let (mm, cs) = doc
                .build()
                .map_err(|e| CliError::input(anyhow::anyhow!("{}: {e}", path.display())))?;
            let scope = scope_of(&mm, args)?;
            (mm, cs, scope)
        }
        (None, None) => return Err(CliError::input(anyhow::anyhow!("either --pack or --metamodel is required"))),
    };
    if scope.is_empty() {
        warn!("generation scope is empty; no rules are generated");
    }
    let opts = GenOptions {
        combination_cap: args.combination_cap,
    };
    let set = generate(&mm, &cs, &scope, args.phase, opts).map_err(CliError::input)?;
    Ok(set
        .rules
        .iter()
        .zip(&set.provenance)
        .map(|(rule, prov)| {
            let mut doc = RuleDoc::new(&mm, rule);
            if args.explain {
                doc.provenance = Some(
                    prov.iter()
                        .flat_map(|p| p.cells.iter().map(move |c| format!("{}: {c}", p.phase)))
                        .collect(),
                );
            }
            doc
        })
        .collect())
}

fn generate(
    mm: &Metamodel,
    cs: &ConstraintSet,
    scope: &GenerationScope,
    phase: PhaseArg,
    opts: GenOptions,
) -> Result<RuleSet, acpso::rulegen::RulegenError> {
    match phase {
        PhaseArg::Both => generate_acpsos(mm, cs, scope, opts),
        PhaseArg::Problem => generate_single_phase(mm, &ConstraintSet::empty(), scope, Phase::Problem, opts),
        PhaseArg::Solution => generate_single_phase(mm, cs, scope, Phase::Solution, opts),
    }
}

fn scope_of(mm: &Metamodel, args: &RulegenArgs) -> Result<GenerationScope, CliError> {
    let nodes: Vec<String> = match &args.scope_nodes {
        Some(v) => v.iter().filter(|s| !s.is_empty()).cloned().collect(),
        None => mm
            .node_types()
            .filter(|(_, t)| !t.is_abstract)
            .map(|(_, t)| t.name.clone())
            .collect(),
    };
    let edges: Vec<String> = match &args.scope_edges {
        Some(v) => v.iter().filter(|s| !s.is_empty()).cloned().collect(),
        None => mm.edge_types().map(|(_, e)| e.name.clone()).collect(),
    };
    let nodes: Vec<&str> = nodes.iter().map(String::as_str).collect();
    let edges: Vec<&str> = edges.iter().map(String::as_str).collect();
    GenerationScope::by_name(mm, &nodes, &edges).map_err(CliError::input)
}

pub fn cmd_rulegen(args: &RulegenArgs) -> Result<(), CliError> {
    let docs = rule_docs(args)?;
    write_json(&docs, args.dump.as_deref())
}
