//! Config files: `key = value` lines, `#` comments, blank lines ignored.
//!
//! Keys are the long flag names of the subcommand (`tau`, `rho`, `n-max`,
//! ...). `step = tau,rho` may repeat and lists the steps in order. Values
//! from the command line win over values from the file.

use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)));
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Config(format!("line {}: bad key `{key}`", i + 1)));
        }
        if value.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for `{key}`", i + 1)));
        }
        out.push(ConfigEntry {
            line: i + 1,
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<ConfigEntry>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Splices the config named by `--config` into `argv` as flags placed right
/// after the subcommand, so that later command-line flags override them.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let v = it
                .next()
                .ok_or_else(|| CliError::Config("--config needs a file".into()))?;
            path = Some(v);
        } else if let Some(v) = a.strip_prefix("--config=") {
            path = Some(v.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let entries = read_config(Path::new(&path))?;
    let cli_has_steps = rest.iter().any(|a| a == "--step" || a.starts_with("--step="));
    let mut injected = Vec::new();
    for e in entries {
        if e.key == "config" {
            return Err(CliError::Config(format!("line {}: nested config is not supported", e.line)));
        }
        if e.key == "step" && cli_has_steps {
            continue;
        }
        injected.push(format!("--{}={}", e.key, e.value));
    }
    // argv[0] is the program, argv[1] the subcommand
    let at = rest.len().min(2);
    rest.splice(at..at, injected);
    Ok(rest)
}
