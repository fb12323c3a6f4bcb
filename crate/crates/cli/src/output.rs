//! Artifact writing with provenance headers, input opening and error
//! classification.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::Context;
use wikidir::collection::CollectionIoError;
use wikidir::dialect::DialectError;
use wikidir::eval::{EvalError, TrecError};
use wikidir::ingest::IngestError;
use wikidir::lexindex::IndexError;
use wikidir::runtime::{PluginError, RerankError, TranslateError};
use wikidir_annotate::StoreError;

use crate::config::PipelineConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// A setting a subcommand needs is absent or unusable.
    #[error("{field}: {message}")]
    Config { field: String, message: String },
}

pub fn missing(field: &str, message: &str) -> anyhow::Error {
    CliError::Config {
        field: field.to_owned(),
        message: message.to_owned(),
    }
    .into()
}

pub struct Ctx {
    pub config: PipelineConfig,
    pub command: &'static str,
}

impl Ctx {
    pub fn new(config: PipelineConfig, command: &'static str) -> Self {
        Self { config, command }
    }

    pub fn provenance(&self) -> String {
        format!(
            "wikidir {VERSION} | command={} | config={} | seed={}",
            self.command, self.config.hash, self.config.seed
        )
    }

    /// Writes `path` as a provenance comment line followed by `body`'s output.
    pub fn write_artifact<F>(&self, path: &Path, body: F) -> anyhow::Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
    {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "# {}", self.provenance())?;
        body(&mut out).with_context(|| format!("writing {}", path.display()))?;
        out.flush()?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

pub fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(BufReader::new(file))
}

/// Short machine-readable kind for the error line.
pub fn error_code(err: &anyhow::Error) -> &'static str {
    for cause in err.chain() {
        if cause.is::<PluginError>() || cause.is::<RerankError>() || cause.is::<TranslateError>() {
            return "plugin";
        }
        if cause.is::<IndexError>() {
            return "index";
        }
        if cause.is::<StoreError>() {
            return "annotation";
        }
        if cause.is::<CollectionIoError>()
            || cause.is::<TrecError>()
            || cause.is::<IngestError>()
            || cause.is::<DialectError>()
            || cause.is::<EvalError>()
            || cause.is::<serde_json::Error>()
        {
            return "input";
        }
    }
    if err.chain().any(|c| c.is::<std::io::Error>()) {
        "io"
    } else {
        "runtime"
    }
}
