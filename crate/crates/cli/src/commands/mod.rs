pub mod bench;
pub mod build;
pub mod compile;
pub mod decode;
pub mod eval;
pub mod mask;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use gcdkit::templates::{
    build_cie_grammar, build_cp_grammar, build_ed_grammar, CieSchema, CpInstance, CpInstanceFile,
    EdInstance, EdInstanceFile, EdMode,
};
use gcdkit::{Catalog, Grammar};
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::inputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Cie,
    Ed,
    Cp,
    Raw,
}

#[derive(Debug, clap::Args)]
pub struct TaskArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// Task instance (JSON); required for cie, ed and cp.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Grammar file; required for raw.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Lexset binding NAME=PATH for raw grammars; repeatable.
    #[arg(long = "catalog", value_parser = inputs::parse_binding)]
    pub catalogs: Vec<(String, PathBuf)>,
    /// Knowledge-base catalog: ed decodes against it instead of the
    /// instance candidates.
    #[arg(long)]
    pub kb: Option<PathBuf>,
}

/// Catalog entries inline or as a path relative to the instance file.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entries {
    Path(String),
    Inline(Vec<String>),
}

#[derive(Debug, Deserialize)]
struct CieInstanceFile {
    entities: Entries,
    relations: Entries,
}

fn entries(name: &str, e: Entries, instance: &Path) -> Result<Arc<Catalog>> {
    match e {
        Entries::Path(p) => inputs::catalog(&inputs::relative_to(instance, &p)),
        Entries::Inline(list) => Catalog::new(name, list)
            .map(Arc::new)
            .map_err(|e| CliError::format("catalog", e)),
    }
}

pub enum TaskGrammar {
    Cie(Grammar, CieSchema),
    Ed(Grammar, EdInstance),
    Cp(Grammar, CpInstance),
    Raw(Grammar),
}

impl TaskGrammar {
    pub fn grammar(&self) -> &Grammar {
        match self {
            TaskGrammar::Cie(g, _)
            | TaskGrammar::Ed(g, _)
            | TaskGrammar::Cp(g, _)
            | TaskGrammar::Raw(g) => g,
        }
    }
}

fn template_error(e: gcdkit::templates::TemplateError) -> CliError {
    CliError::invalid("template", e)
}

pub fn task_grammar(a: &TaskArgs) -> Result<TaskGrammar> {
    let instance = || {
        a.instance
            .as_deref()
            .ok_or_else(|| CliError::format("usage", "--instance is required for this task"))
    };
    match a.task {
        Task::Raw => {
            let path = a
                .grammar
                .as_deref()
                .ok_or_else(|| CliError::format("usage", "--grammar is required for --task raw"))?;
            Ok(TaskGrammar::Raw(inputs::grammar(path, &a.catalogs)?))
        }
        Task::Cie => {
            let path = instance()?;
            let f: CieInstanceFile = inputs::read_json(path)?;
            let schema = CieSchema::new(
                entries("entities", f.entities, path)?,
                entries("relations", f.relations, path)?,
            )
            .map_err(template_error)?;
            Ok(TaskGrammar::Cie(build_cie_grammar(&schema), schema))
        }
        Task::Ed => {
            let f: EdInstanceFile = inputs::read_json(instance()?)?;
            let inst = EdInstance::from(f);
            let mode = match &a.kb {
                Some(p) => EdMode::InputIndependent(inputs::catalog(p)?),
                None => EdMode::InputDependent,
            };
            let g = build_ed_grammar(&inst, &mode).map_err(template_error)?;
            Ok(TaskGrammar::Ed(g, inst))
        }
        Task::Cp => {
            let f: CpInstanceFile = inputs::read_json(instance()?)?;
            let inst = CpInstance::try_from(f).map_err(template_error)?;
            let g = build_cp_grammar(&inst).map_err(template_error)?;
            Ok(TaskGrammar::Cp(g, inst))
        }
    }
}
