//! `key = value` configuration files, merged into the argument list so that
//! command-line flags take precedence.

use std::path::Path;

/// Parses `key = value` lines; `#` starts a comment. Keys are flag names without
/// the leading dashes.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let k = k.trim().trim_start_matches('-').replace('_', "-");
        if k.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

/// Flag arguments for the parsed entries. `true`/`false` values toggle switches.
pub fn to_args(entries: &[(String, String)]) -> Vec<String> {
    let mut args = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => args.push(format!("--{k}")),
            "false" => {}
            _ => {
                args.push(format!("--{k}"));
                args.push(v.clone());
            }
        }
    }
    args
}

/// Removes `--config FILE` from argv and splices the file's flags right after the
/// subcommand, ahead of the explicit flags.
pub fn expand_argv(argv: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut file = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            file = Some(it.next().ok_or("--config needs a file")?);
        } else if let Some(f) = a.strip_prefix("--config=") {
            file = Some(f.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(file) = file else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&file))
        .map_err(|e| format!("cannot read config {file}: {e}"))?;
    let extra = to_args(&parse(&text)?);
    let pos = rest
        .iter()
        .position(|a| subcommands.contains(&a.as_str()))
        .ok_or("config file given without a subcommand")?;
    let mut out: Vec<String> = rest[..=pos].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_splices() {
        let e = parse("g = 0.6\n# note\nlevels=3\noracle = true\n").unwrap();
        assert_eq!(to_args(&e), vec!["--g", "0.6", "--levels", "3", "--oracle"]);
        assert!(parse("nonsense").is_err());
    }
}
