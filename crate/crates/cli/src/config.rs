//! Experiment parameters: `key = value` config files layered under
//! command-line flags, with typed access to the merged parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

/// Merged parameter map; keys are the long flag names.
pub type Params = BTreeMap<String, String>;

/// Keys a config file or flag set may carry.
pub const KNOWN_KEYS: &[&str] = &[
    "n", "q", "q0", "q1", "seed", "reps", "setting", "threads", "out", "format", "which", "k", "i", "input",
    "replicate", "normalization", "extended", "cap",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Generate,
    Stats,
    Estimate,
    Test,
    Cluster,
    Oracle,
    TvExact,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Generate,
        Command::Stats,
        Command::Estimate,
        Command::Test,
        Command::Cluster,
        Command::Oracle,
        Command::TvExact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::Generate => "generate",
            Command::Stats => "stats",
            Command::Estimate => "estimate",
            Command::Test => "test",
            Command::Cluster => "cluster",
            Command::Oracle => "oracle",
            Command::TvExact => "tv-exact",
        }
    }

    /// Keys that must be present after merging.
    fn required(self) -> &'static [&'static str] {
        match self {
            Command::Generate | Command::Estimate | Command::Cluster => &["n", "q"],
            // stats either reads `input` or generates from `n`, `q`
            Command::Stats => &[],
            Command::Test | Command::TvExact => &["n", "q0", "q1", "setting"],
            Command::Oracle => &["which"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| CliError::Usage(format!("unknown command `{s}`")))
    }
}

/// Output encoding of emitted rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Usage(format!("unknown format `{other}` (json|csv)"))),
        }
    }
}

// ---------------------------------------------------------------------------
// config files

/// Parsed config file. `command` is taken out of the key space.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub params: Params,
    /// Human-readable notes about overridden duplicates.
    pub warnings: Vec<String>,
}

/// Reads a `key = value` file; `#` starts a comment, blank lines are skipped.
pub fn parse_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ConfigFile, CliError> {
    let mut out = ConfigFile::default();
    let mut seen_at: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config { line: line_no, detail: format!("expected `key = value`, got `{line}`") });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(CliError::Config { line: line_no, detail: "empty key or value".into() });
        }
        if key != "command" && !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config { line: line_no, detail: format!("unknown key `{key}`") });
        }
        if let Some(prev) = seen_at.insert(key.to_string(), line_no) {
            let w = format!("key `{key}` on line {line_no} overrides line {prev}");
            log::warn!("{w}");
            out.warnings.push(w);
        }
        if key == "command" {
            out.command = Some(value.parse().map_err(|e: CliError| CliError::Config {
                line: line_no,
                detail: e.to_string(),
            })?);
        } else {
            out.params.insert(key.to_string(), value.to_string());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// specs

/// A fully resolved campaign: command plus merged parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub params: Params,
}

impl ExperimentSpec {
    /// Flags override the file. A command named on the command line must
    /// agree with one named in the file.
    pub fn resolve(command: Option<Command>, file: ConfigFile, flags: Params) -> Result<Self, CliError> {
        let command = match (command, file.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Usage(format!("config names command `{b}` but `{a}` was given")))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(CliError::Usage("no command given".into())),
        };
        let mut params = file.params;
        params.extend(flags);
        let spec = ExperimentSpec { command, params };
        spec.validate()?;
        Ok(spec)
    }

    pub fn new(command: Command, pairs: &[(&str, &str)]) -> Result<Self, CliError> {
        let flags = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Self::resolve(Some(command), ConfigFile::default(), flags)
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(k) = self.params.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CliError::Usage(format!("unknown key `{k}`")));
        }
        for key in self.command.required() {
            if !self.params.contains_key(*key) {
                return Err(CliError::Usage(format!("`{}` needs --{key}", self.command)));
            }
        }
        if self.command == Command::Stats && !self.has("input") && !(self.has("n") && self.has("q")) {
            return Err(CliError::Usage("`stats` needs --input or both --n and --q".into()));
        }
        if self.reps()? == 0 {
            return Err(CliError::Usage("reps must be at least 1".into()));
        }
        if self.threads()? == 0 {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        self.format()?;
        Ok(())
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    /// Typed value of an optional key.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.params
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| CliError::Usage(format!("--{key} `{v}`: {e}"))))
            .transpose()
    }

    /// Typed value of a key that must be present.
    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("`{}` needs --{key}", self.command)))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        Ok(self.get("seed")?.unwrap_or(0))
    }

    pub fn reps(&self) -> Result<usize, CliError> {
        Ok(self.get("reps")?.unwrap_or(1))
    }

    /// Flag or file, then `BCMRT_THREADS`, then the machine's parallelism.
    pub fn threads(&self) -> Result<usize, CliError> {
        if let Some(t) = self.get("threads")? {
            return Ok(t);
        }
        if let Ok(v) = std::env::var("BCMRT_THREADS") {
            return v
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("BCMRT_THREADS `{v}`: {e}")));
        }
        Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    /// `oracle` defaults to CSV, everything else to JSON lines.
    pub fn format(&self) -> Result<Format, CliError> {
        let default = if self.command == Command::Oracle { Format::Csv } else { Format::Json };
        Ok(self.get("format")?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}
