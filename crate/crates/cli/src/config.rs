//! `--config <file>` support.
//!
//! The file holds `key = value` lines whose keys are long flag names
//! (`c-eps` or `c_eps`). Entries are spliced in right after the subcommand,
//! so flags given on the command line take precedence.

use std::path::Path;

pub const SUBCOMMANDS: [&str; 4] = ["gen-mesh", "solve", "verify-identity", "study"];

pub fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected 'key = value', found '{line}'", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(format!("config line {}: invalid key '{key}'", i + 1));
        }
        if key == "config" {
            return Err(format!("config line {}: nested config files are not supported", i + 1));
        }
        out.push(format!("--{key}"));
        out.push(value.to_string());
    }
    Ok(out)
}

/// Removes `--config FILE` / `--config=FILE` from `args` and splices the
/// file's entries after the subcommand name.
pub fn expand_args(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut i = 1;
    while i < args.len() {
        if args[i] == "--" {
            break;
        }
        if args[i] == "--config" {
            if i + 1 >= args.len() {
                return Err("--config needs a file argument".into());
            }
            path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).map_err(|e| format!("cannot read config '{path}': {e}"))?;
    let extra = parse_config(&text)?;
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map_or(args.len(), |p| p + 1);
    args.splice(at..at, extra);
    Ok(args)
}
