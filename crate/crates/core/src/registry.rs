//! Named systems and system definition files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::symbolic::SftSystem;
use crate::toral::ToralMap;

/// A concrete system, as stored in artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    Sft(SftSystem),
    Toral(ToralMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub name: String,
    pub kind: String,
    pub description: String,
}

const BUILTIN: &[(&str, &str)] = &[
    ("fullshift2", "full shift on two symbols"),
    ("golden-mean", "binary sequences without 11"),
    ("two-fixed", "SFT allowing only 00 and 11: two fixed points"),
    ("periodic01", "SFT allowing only 01 and 10: one orbit of period 2"),
    ("cat", "Arnold's cat map [[2,1],[1,1]] on the 2-torus"),
];

impl SystemSpec {
    pub fn id(&self) -> &str {
        match self {
            SystemSpec::Sft(s) => &s.name,
            SystemSpec::Toral(t) => t.name(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SystemSpec::Sft(_) => "sft",
            SystemSpec::Toral(_) => "toral",
        }
    }

    /// A built-in system by name (`fullshiftN` works for any `2 ≤ N ≤ 36`).
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(match name {
            "golden-mean" => SystemSpec::Sft(SftSystem::golden_mean()),
            "two-fixed" => SystemSpec::Sft(SftSystem::two_fixed_points()),
            "periodic01" => SystemSpec::Sft(SftSystem::period_two()),
            "cat" => SystemSpec::Toral(ToralMap::cat()),
            _ => match name.strip_prefix("fullshift").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if (2..=36).contains(&n) => SystemSpec::Sft(SftSystem::full_shift(n)),
                _ => return Err(Error::Config(format!("unknown system '{name}'"))),
            },
        })
    }

    /// Parses an SFT file `{"alphabet", "transitions", "name"}` or a map file
    /// `{"matrix", "name"}`.
    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("matrix").is_some() {
            let map: ToralMap = serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
            Ok(SystemSpec::Toral(map))
        } else if v.get("transitions").is_some() {
            let sft: SftSystem = serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
            sft.validate()?;
            Ok(SystemSpec::Sft(sft))
        } else if v.get("kind").is_some() {
            let spec: SystemSpec = serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))?;
            if let SystemSpec::Sft(s) = &spec {
                s.validate()?;
            }
            Ok(spec)
        } else {
            Err(Error::Config(
                "system file needs either \"matrix\" or \"transitions\"".into(),
            ))
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let v: Value = serde_json::from_str(&text)?;
        Self::from_json(&v)
    }

    /// A built-in name, or else a path to a definition file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match Self::builtin(name_or_path) {
            Ok(s) => Ok(s),
            Err(e) => {
                let p = Path::new(name_or_path);
                if p.exists() {
                    Self::from_file(p)
                } else {
                    Err(e)
                }
            }
        }
    }
}

/// The built-in systems plus any definition files given.
pub fn list_systems(files: &[&Path]) -> Result<Vec<SystemInfo>> {
    let mut out: Vec<SystemInfo> = BUILTIN
        .iter()
        .map(|(name, desc)| {
            let spec = SystemSpec::builtin(name).expect("built-in names resolve");
            SystemInfo {
                name: name.to_string(),
                kind: spec.kind().to_string(),
                description: desc.to_string(),
            }
        })
        .collect();
    for f in files {
        let spec = SystemSpec::from_file(f)?;
        out.push(SystemInfo {
            name: spec.id().to_string(),
            kind: spec.kind().to_string(),
            description: format!("user system from {}", f.display()),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_resolve() {
        for (name, _) in BUILTIN {
            assert_eq!(SystemSpec::builtin(name).unwrap().id(), *name);
        }
        assert_eq!(SystemSpec::builtin("fullshift3").unwrap().id(), "fullshift3");
        assert!(SystemSpec::builtin("fullshift1").is_err());
        assert!(SystemSpec::builtin("nope").is_err());
    }

    #[test]
    fn files_parse() {
        let v: Value = serde_json::from_str(r#"{"alphabet": 2, "transitions": [[1,1],[1,0]], "name": "gm"}"#).unwrap();
        assert_eq!(SystemSpec::from_json(&v).unwrap().id(), "gm");
        let v: Value = serde_json::from_str(r#"{"matrix": [[2,1],[1,1]], "name": "cat2"}"#).unwrap();
        let s = SystemSpec::from_json(&v).unwrap();
        assert_eq!(s.kind(), "toral");
        let v: Value = serde_json::from_str(r#"{"matrix": [[1,1],[0,1]], "name": "shear"}"#).unwrap();
        assert!(SystemSpec::from_json(&v).is_err());
        let v: Value = serde_json::from_str(r#"{"alphabet": 2, "transitions": [[1,1],[0,0]], "name": "bad"}"#).unwrap();
        assert!(SystemSpec::from_json(&v).is_err());
        // Round trip through the tagged form.
        let spec = SystemSpec::builtin("golden-mean").unwrap();
        let back = SystemSpec::from_json(&serde_json::to_value(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
    }
}
