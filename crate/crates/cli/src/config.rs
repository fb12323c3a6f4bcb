//! Pipeline configuration: a TOML file, `WIKIDIR_` environment overrides and
//! command-line `--set` overrides, in increasing precedence. Validation
//! collects every problem before reporting.
//!
//! Environment keys map to config paths by dropping the prefix, lowercasing
//! and reading `__` as a section separator: `WIKIDIR_SPLIT__SEED=7` sets
//! `split.seed`. Values are parsed as TOML literals and fall back to strings.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use toml::{Table, Value};
use wikidir::dialect::Policy;
use wikidir::eval::GainMode;
use wikidir::runtime::{EndpointKind, PluginEndpoint, Transport};
use wikidir::{Bm25Params, DialectCode};

pub const ENV_PREFIX: &str = "WIKIDIR_";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{}", .0.display())]
    Io(PathBuf, #[source] std::io::Error),
    #[error("{} configuration error(s)", .0.len())]
    Invalid(Vec<ConfigIssue>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Paths {
    pub dumps: PathBuf,
    pub langlinks: Option<PathBuf>,
    pub corpus: PathBuf,
    pub index: PathBuf,
    pub qrels: PathBuf,
    pub dictionary: PathBuf,
    pub judgments: PathBuf,
    pub runs: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub dialects: Vec<DialectCode>,
    pub paths: Paths,
    pub bm25: Bm25Params,
    pub seed: u64,
    pub dev_ratio: f64,
    pub test_ratio: f64,
    pub depth: usize,
    pub window: usize,
    pub step: usize,
    pub k: usize,
    pub gain: GainMode,
    pub reranker: Option<PluginEndpoint>,
    pub translator: Option<PluginEndpoint>,
    pub bind: String,
    pub static_dir: Option<PathBuf>,
    pub policy: Option<Policy>,
    pub online_redirects: bool,
    pub redirect_cache: PathBuf,
    pub workers: usize,
    pub warnings: Vec<String>,
    /// Hash of the effective configuration, recorded in output headers.
    pub hash: String,
}

/// Loads `path`, applies overrides and validates.
pub fn load(path: &Path, env: impl IntoIterator<Item = (String, String)>, sets: &[String]) -> Result<PipelineConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_owned(), e))?;
    let base = path.parent().map(Path::to_owned).unwrap_or_default();
    let mut issues = Vec::new();
    let mut table: Table = match text.parse() {
        Ok(t) => t,
        Err(e) => {
            issues.push(ConfigIssue {
                field: "<file>".into(),
                message: e.to_string(),
            });
            Table::new()
        }
    };
    for (key, raw) in env {
        if let Some(rest) = key.strip_prefix(ENV_PREFIX) {
            let field = rest.to_lowercase().replace("__", ".");
            set_path(&mut table, &field, parse_literal(&raw));
        }
    }
    for assignment in sets {
        match assignment.split_once('=') {
            Some((field, raw)) => set_path(&mut table, field.trim(), parse_literal(raw.trim())),
            None => issues.push(ConfigIssue {
                field: assignment.clone(),
                message: "override must look like key.path=value".into(),
            }),
        }
    }
    validate(&table, &base, issues)
}

fn parse_literal(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_owned()))
}

fn set_path(table: &mut Table, field: &str, value: Value) {
    let mut parts: Vec<&str> = field.split('.').collect();
    let last = parts.pop().expect("split yields at least one part");
    let mut current = table;
    for part in parts {
        let entry = current.entry(part.to_owned()).or_insert_with(|| Value::Table(Table::new()));
        if !entry.is_table() {
            *entry = Value::Table(Table::new());
        }
        current = entry.as_table_mut().expect("just made a table");
    }
    current.insert(last.to_owned(), value);
}

struct Reader<'a> {
    root: &'a Table,
    base: &'a Path,
    issues: Vec<ConfigIssue>,
    warnings: Vec<String>,
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("", &["dialects", "workers", "paths", "bm25", "split", "retrieval", "evaluation", "plugins", "annotation", "ingest"]),
    ("paths", &["dumps", "langlinks", "corpus", "index", "qrels", "dictionary", "judgments", "runs"]),
    ("bm25", &["k1", "b"]),
    ("split", &["seed", "dev", "test"]),
    ("retrieval", &["depth", "window", "step"]),
    ("evaluation", &["k", "gain"]),
    ("plugins", &["reranker", "translator"]),
    ("plugins.reranker", &["transport", "address", "timeout_ms"]),
    ("plugins.translator", &["transport", "address", "timeout_ms"]),
    ("annotation", &["bind", "static_dir", "policy"]),
    ("ingest", &["online_redirects", "redirect_cache"]),
];

impl<'a> Reader<'a> {
    fn issue(&mut self, field: &str, message: impl Into<String>) {
        self.issues.push(ConfigIssue {
            field: field.to_owned(),
            message: message.into(),
        });
    }

    fn get(&self, field: &str) -> Option<&'a Value> {
        let mut parts = field.split('.');
        let mut value = self.root.get(parts.next()?)?;
        for part in parts {
            value = value.as_table()?.get(part)?;
        }
        Some(value)
    }

    fn check_unknown_keys(&mut self) {
        for (section, allowed) in SCHEMA {
            let table = if section.is_empty() {
                Some(self.root)
            } else {
                match self.get(section) {
                    None => None,
                    Some(Value::Table(t)) => Some(t),
                    Some(_) => {
                        self.issue(section, "expected a table");
                        None
                    }
                }
            };
            let Some(table) = table else { continue };
            let unknown: Vec<String> = table.keys().filter(|k| !allowed.contains(&k.as_str())).cloned().collect();
            for key in unknown {
                let field = if section.is_empty() { key } else { format!("{section}.{key}") };
                self.issue(&field, "unknown key");
            }
        }
    }

    fn float(&mut self, field: &str, default: f64, ok: impl Fn(f64) -> bool, rule: &str) -> f64 {
        match self.get(field) {
            None => default,
            Some(Value::Float(f)) if ok(*f) => *f,
            Some(Value::Integer(i)) if ok(*i as f64) => *i as f64,
            Some(Value::Float(_) | Value::Integer(_)) => {
                self.issue(field, rule);
                default
            }
            Some(other) => {
                self.issue(field, format!("expected a number, found {}", other.type_str()));
                default
            }
        }
    }

    fn integer(&mut self, field: &str, default: u64, min: u64) -> Option<u64> {
        match self.get(field) {
            None => Some(default),
            Some(Value::Integer(i)) if *i >= min as i64 => Some(*i as u64),
            Some(Value::Integer(_)) => {
                self.issue(field, format!("must be at least {min}"));
                None
            }
            Some(other) => {
                self.issue(field, format!("expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, field: &str) -> Option<String> {
        match self.get(field) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                self.issue(field, format!("expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn boolean(&mut self, field: &str) -> bool {
        match self.get(field) {
            None => false,
            Some(Value::Boolean(b)) => *b,
            Some(other) => {
                self.issue(field, format!("expected a boolean, found {}", other.type_str()));
                false
            }
        }
    }

    fn path(&mut self, field: &str, default: &str) -> PathBuf {
        let raw = self.string(field).unwrap_or_else(|| default.to_owned());
        self.base.join(raw)
    }

    /// A path that must already exist when configured.
    fn existing_path(&mut self, field: &str) -> Option<PathBuf> {
        let raw = self.string(field)?;
        let path = self.base.join(raw);
        if !path.exists() {
            self.issue(field, format!("{} does not exist", path.display()));
        }
        Some(path)
    }

    fn parsed<T: std::str::FromStr<Err = String>>(&mut self, field: &str) -> Option<T> {
        let raw = self.string(field)?;
        raw.parse().map_err(|e: String| self.issue(field, e)).ok()
    }

    fn plugin(&mut self, name: &str, kind: EndpointKind) -> Option<PluginEndpoint> {
        self.get(&format!("plugins.{name}"))?;
        let transport = match self.string(&format!("plugins.{name}.transport")).as_deref() {
            Some("subprocess-stdio") => Some(Transport::SubprocessStdio),
            Some("http") => Some(Transport::Http),
            Some(other) => {
                self.issue(&format!("plugins.{name}.transport"), format!("unknown transport {other:?}; expected subprocess-stdio or http"));
                None
            }
            None => {
                self.issue(&format!("plugins.{name}.transport"), "missing");
                None
            }
        };
        let address = self.string(&format!("plugins.{name}.address")).filter(|a| !a.trim().is_empty());
        if address.is_none() {
            self.issue(&format!("plugins.{name}.address"), "missing");
        }
        let timeout_ms = self.integer(&format!("plugins.{name}.timeout_ms"), 30_000, 1)?;
        let mut address = address?;
        let transport = transport?;
        if transport == Transport::SubprocessStdio {
            // Relative program paths are resolved against the config directory.
            let mut words = address.split_whitespace();
            let program = words.next().expect("non-empty address");
            if program.contains('/') && !Path::new(program).is_absolute() {
                let resolved = self.base.join(program);
                if !resolved.exists() {
                    self.issue(&format!("plugins.{name}.address"), format!("{} does not exist", resolved.display()));
                }
                address = std::iter::once(resolved.display().to_string()).chain(words.map(str::to_owned)).collect::<Vec<_>>().join(" ");
            }
        }
        Some(PluginEndpoint {
            kind,
            transport,
            address,
            timeout_ms,
        })
    }
}

fn validate(table: &Table, base: &Path, issues: Vec<ConfigIssue>) -> Result<PipelineConfig, ConfigError> {
    let mut r = Reader {
        root: table,
        base,
        issues,
        warnings: Vec::new(),
    };
    r.check_unknown_keys();

    let dialects = match r.get("dialects") {
        Some(Value::Array(items)) if !items.is_empty() => {
            let mut out = Vec::new();
            for (i, item) in items.iter().enumerate() {
                match item.as_str().map(DialectCode::new) {
                    Some(Ok(code)) => out.push(code),
                    Some(Err(e)) => r.issue(&format!("dialects[{i}]"), e.to_string()),
                    None => r.issue(&format!("dialects[{i}]"), "expected a string"),
                }
            }
            out
        }
        Some(Value::Array(_)) => {
            r.issue("dialects", "must list at least one dialect code");
            Vec::new()
        }
        Some(other) => {
            let found = other.type_str();
            r.issue("dialects", format!("expected an array of dialect codes, found {found}"));
            Vec::new()
        }
        None => {
            r.issue("dialects", "missing");
            Vec::new()
        }
    };

    let dumps = r.existing_path("paths.dumps").unwrap_or_else(|| base.join("dumps"));
    let langlinks = r.existing_path("paths.langlinks");
    let dictionary = r.path("paths.dictionary", "out/dictionary");
    let judgments = r.path("paths.judgments", &dictionary.join("judgments.jsonl").display().to_string());
    let paths = Paths {
        dumps,
        langlinks,
        corpus: r.path("paths.corpus", "out/corpus"),
        index: r.path("paths.index", "out/index"),
        qrels: r.path("paths.qrels", "out/collection"),
        dictionary,
        judgments,
        runs: r.path("paths.runs", "out/runs"),
    };

    let k1 = r.float("bm25.k1", 0.9, |v| v > 0.0, "must be greater than 0");
    let b = r.float("bm25.b", 0.4, |v| (0.0..=1.0).contains(&v), "must lie in [0, 1]");

    let seed = match r.get("split.seed") {
        None => {
            r.warnings.push(format!("split.seed missing; using {DEFAULT_SEED}"));
            DEFAULT_SEED
        }
        Some(_) => r.integer("split.seed", DEFAULT_SEED, 0).unwrap_or(DEFAULT_SEED),
    };
    let ratio_ok = |v: f64| (0.0..1.0).contains(&v);
    let dev_ratio = r.float("split.dev", 0.1, ratio_ok, "must lie in [0, 1)");
    let test_ratio = r.float("split.test", 0.1, ratio_ok, "must lie in [0, 1)");
    if dev_ratio + test_ratio >= 1.0 {
        r.issue("split", "dev + test must be below 1");
    }

    let depth = r.integer("retrieval.depth", 100, 1).unwrap_or(100) as usize;
    let window = r.integer("retrieval.window", 16, 1).unwrap_or(16) as usize;
    let step = r.integer("retrieval.step", 8, 1).unwrap_or(8) as usize;
    if step > window {
        r.issue("retrieval.step", "must not exceed retrieval.window");
    }
    let k = r.integer("evaluation.k", 10, 1).unwrap_or(10) as usize;
    let gain = r.parsed::<GainMode>("evaluation.gain").unwrap_or_default();

    let reranker = r.plugin("reranker", EndpointKind::Reranker);
    let translator = r.plugin("translator", EndpointKind::Translator);

    let bind = r.string("annotation.bind").unwrap_or_else(|| "127.0.0.1:8080".into());
    if bind.parse::<std::net::SocketAddr>().is_err() {
        r.issue("annotation.bind", format!("{bind:?} is not an address like 127.0.0.1:8080"));
    }
    let static_dir = r.existing_path("annotation.static_dir");
    let policy = r.parsed::<Policy>("annotation.policy");

    let online_redirects = r.boolean("ingest.online_redirects");
    let redirect_cache = r.path("ingest.redirect_cache", "out/redirect-cache");
    let workers = r.integer("workers", 1, 1).unwrap_or(1) as usize;

    if !r.issues.is_empty() {
        return Err(ConfigError::Invalid(r.issues));
    }
    let canonical = toml::to_string(table).expect("a parsed table serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let hash = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
    Ok(PipelineConfig {
        dialects,
        paths,
        bm25: Bm25Params { k1, b },
        seed,
        dev_ratio,
        test_ratio,
        depth,
        window,
        step,
        k,
        gain,
        reranker,
        translator,
        bind,
        static_dir,
        policy,
        online_redirects,
        redirect_cache,
        workers,
        warnings: r.warnings,
        hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(text: &str, env: &[(&str, &str)], sets: &[&str]) -> Result<PipelineConfig, ConfigError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("wikidir.toml");
        std::fs::write(&path, text).unwrap();
        let env = env.iter().map(|(k, v)| (k.to_string(), v.to_string()));
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        load(&path, env, &sets)
    }

    fn fields(err: ConfigError) -> Vec<String> {
        match err {
            ConfigError::Invalid(issues) => issues.into_iter().map(|i| i.field).collect(),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn minimal_config_defaults_seed_with_warning() {
        let config = load_str("dialects = [\"bar\"]\n", &[], &[]).unwrap();
        assert_eq!(config.seed, DEFAULT_SEED);
        assert_eq!(config.bm25, Bm25Params::default());
        assert_eq!((config.depth, config.window, config.step, config.k), (100, 16, 8, 10));
        assert_eq!(config.warnings.len(), 1);
    }

    #[test]
    fn all_problems_are_reported_together() {
        let err = load_str("dialects = [\"Bar\"]\n[bm25]\nk1 = -1\nb = \"x\"\n[retrieval]\nwindow = 4\nstep = 8\n[extra]\n", &[], &[]).unwrap_err();
        let fields = fields(err);
        for expected in ["dialects[0]", "bm25.k1", "bm25.b", "retrieval.step", "extra"] {
            assert!(fields.iter().any(|f| f == expected), "{expected} missing from {fields:?}");
        }
    }

    #[test]
    fn environment_then_flags_override() {
        let text = "dialects = [\"bar\"]\n[split]\nseed = 1\n";
        let config = load_str(text, &[("WIKIDIR_SPLIT__SEED", "7"), ("OTHER", "x")], &[]).unwrap();
        assert_eq!(config.seed, 7);
        let config = load_str(text, &[("WIKIDIR_SPLIT__SEED", "7")], &["split.seed=9"]).unwrap();
        assert_eq!(config.seed, 9);
        let config = load_str(text, &[("WIKIDIR_EVALUATION__GAIN", "exponential")], &[]).unwrap();
        assert_eq!(config.gain, GainMode::Exponential);
    }

    #[test]
    fn hash_tracks_effective_values() {
        let a = load_str("dialects = [\"bar\"]\n", &[], &[]).unwrap();
        let b = load_str("dialects = [\"bar\"]\n", &[], &["split.seed=3"]).unwrap();
        assert_ne!(a.hash, b.hash);
        assert_eq!(a.hash, load_str("dialects = [\"bar\"]\n", &[], &[]).unwrap().hash);
    }

    #[test]
    fn plugin_definitions() {
        let text = "dialects = [\"bar\"]\n[plugins.reranker]\ntransport = \"http\"\naddress = \"http://127.0.0.1:9/\"\n[plugins.translator]\ntransport = \"pigeon\"\n";
        let fields = fields(load_str(text, &[], &[]).unwrap_err());
        assert_eq!(fields, ["plugins.translator.transport", "plugins.translator.address"]);
    }

    #[test]
    fn missing_input_paths_are_reported() {
        let fields = fields(load_str("dialects = [\"bar\"]\n[paths]\ndumps = \"nowhere\"\n", &[], &[]).unwrap_err());
        assert_eq!(fields, ["paths.dumps"]);
    }
}
