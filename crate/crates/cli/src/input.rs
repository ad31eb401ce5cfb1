//! Loading schemes and systems named on the command line.

use std::path::Path;
use std::sync::Arc;

use splitorder_core::scheme::{builtin, Interpretation, Scheme, SchemeSpec, CATALOG};
use splitorder_core::words::Alphabet;
use splitorder_core::{Error, Result};
use splitorder_mc::system::{builtin_system, witness_system, BoundSystem, System, SYSTEMS};

pub struct SchemeInput {
    pub spec: SchemeSpec,
    pub label: String,
    /// Bytes hashed into the report digest.
    pub bytes: Vec<u8>,
}

/// `builtin:NAME`, a bare catalog name, or a path to a JSON scheme file.
pub fn load_scheme(arg: &str) -> Result<SchemeInput> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return from_builtin(name);
    }
    let path = Path::new(arg);
    if !path.exists() && CATALOG.contains(&arg) {
        return from_builtin(arg);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))?;
    let spec = SchemeSpec::parse(&text).map_err(|e| Error::Input(format!("{arg}: {e}")))?;
    let label = spec.name.clone().unwrap_or_else(|| {
        path.file_stem().map_or_else(|| arg.to_string(), |s| s.to_string_lossy().into_owned())
    });
    Ok(SchemeInput { spec, label, bytes: text.into_bytes() })
}

fn from_builtin(name: &str) -> Result<SchemeInput> {
    let spec = builtin(name)?;
    Ok(SchemeInput { bytes: spec.to_json().into_bytes(), label: name.to_string(), spec })
}

pub fn validate(spec: &SchemeSpec, interp: Option<Interpretation>) -> Result<Scheme> {
    let spec = match interp {
        Some(i) => spec.clone().with_interpretation(i),
        None => spec.clone(),
    };
    spec.validate().map_err(Error::Invalid)
}

/// `builtin:NAME`, a bare system name, or `witness:WORD` over the scheme
/// alphabet.
pub fn load_system(arg: &str, al: &Arc<Alphabet>) -> Result<BoundSystem> {
    let sys: System = if let Some(w) = arg.strip_prefix("witness:") {
        witness_system(al, &al.parse_word(w)?)?
    } else {
        let name = arg.strip_prefix("builtin:").unwrap_or(arg);
        if !SYSTEMS.contains(&name) {
            return Err(Error::Input(format!(
                "unknown system {arg:?}; use witness:WORD or one of {}",
                SYSTEMS.join(", ")
            )));
        }
        builtin_system(name)?
    };
    BoundSystem::bind(&sys, al.clone())
}

/// Comma separated step sizes: `T/n` (horizon over n), `p/q` or decimals.
pub fn parse_h_list(s: &str, horizon: f64) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let bad = || Error::Input(format!("bad step size {t:?} (expected a number or T/n)"));
            if let Some(rest) = t.strip_prefix("T/") {
                let n: f64 = rest.parse().map_err(|_| bad())?;
                Ok(horizon / n)
            } else if let Some((p, q)) = t.split_once('/') {
                let (p, q): (f64, f64) = (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
                Ok(p / q)
            } else {
                t.parse().map_err(|_| bad())
            }
        })
        .collect()
}

/// Alphabet and interpretation of a system file for conversion. Accepts a
/// scheme file (stages are ignored) or `{"alphabet", "interpretation",
/// "additiveNoise"?}`.
pub struct SystemFile {
    pub spec: SchemeSpec,
    pub additive: Option<bool>,
    pub bytes: Vec<u8>,
}

pub fn load_system_file(arg: &str) -> Result<SystemFile> {
    if arg.starts_with("builtin:") || (!Path::new(arg).exists() && CATALOG.contains(&arg)) {
        let s = load_scheme(arg)?;
        return Ok(SystemFile { spec: s.spec, additive: None, bytes: s.bytes });
    }
    let text = std::fs::read_to_string(arg).map_err(|e| Error::Input(format!("cannot read {arg}: {e}")))?;
    let mut v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Input(format!("{arg}: line {} column {}: {e}", e.line(), e.column())))?;
    let obj = v.as_object_mut().ok_or_else(|| Error::Input(format!("{arg}: expected a JSON object")))?;
    let additive = match obj.remove("additiveNoise") {
        None => None,
        Some(serde_json::Value::Bool(b)) => Some(b),
        Some(other) => return Err(Error::Input(format!("{arg}: additiveNoise must be a boolean, got {other}"))),
    };
    if !obj.contains_key("stages") {
        obj.insert("stages".into(), serde_json::Value::Array(Vec::new()));
    }
    let spec = SchemeSpec::parse(&serde_json::to_string(&v).unwrap_or_default())
        .map_err(|e| Error::Input(format!("{arg}: {e}")))?;
    Ok(SystemFile { spec, additive, bytes: text.into_bytes() })
}
