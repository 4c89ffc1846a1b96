//! Layered settings: built-in defaults, then command-line flags, then the
//! `--config` file. The file uses the same JSON shape as the resolved-config
//! log line, so a logged run can be repeated by pasting that line into a file.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use std::path::Path;

use crate::error::CliError;

fn as_object(v: Value, what: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        other => Err(CliError::Config(format!("{what} must be a JSON object, got {other}"))),
    }
}

/// A flag counts as given unless it is null or an empty list.
fn given(v: &Value) -> bool {
    match v {
        Value::Null => false,
        Value::Array(a) => !a.is_empty(),
        _ => true,
    }
}

pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    as_object(v, &path.display().to_string())
}

/// Resolves the settings of `command`. Every key of `flags` and `file` must be a
/// settings key; a `command` key in the file must name this command.
pub fn resolve<S>(command: &str, flags: impl Serialize, file: Option<Map<String, Value>>) -> Result<S, CliError>
where
    S: Serialize + DeserializeOwned + Default,
{
    let mut merged = as_object(serde_json::to_value(S::default())?, "defaults")?;
    // Flags left unset do not count; config keys always do, nulls included.
    let layers = [
        ("flag", as_object(serde_json::to_value(flags)?, "flags")?, true),
        ("config key", file.unwrap_or_default(), false),
    ];
    for (what, mut layer, skip_unset) in layers {
        if let Some(c) = layer.remove("command") {
            if c != command {
                return Err(CliError::Config(format!("config is for command {c}, not `{command}`")));
            }
        }
        for (k, v) in layer {
            if !merged.contains_key(&k) {
                return Err(CliError::Config(format!("unknown {what} `{k}` for `{command}`")));
            }
            if !skip_unset || given(&v) {
                merged.insert(k, v);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("{command}: {e}")))
}

/// The resolved settings as one JSON line, tagged with the command name.
pub fn describe<S: Serialize>(command: &str, settings: &S) -> Result<String, CliError> {
    let mut m = as_object(serde_json::to_value(settings)?, "settings")?;
    m.insert("command".into(), Value::String(command.into()));
    Ok(Value::Object(m).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;
    use serde_json::json;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct S {
        a: u32,
        b: Option<String>,
        c: Vec<u32>,
    }

    impl Default for S {
        fn default() -> Self {
            S { a: 1, b: None, c: vec![9] }
        }
    }

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn layers_apply_in_order() {
        let s: S = resolve("x", json!({"a": null, "b": null, "c": []}), None).unwrap();
        assert_eq!(s, S::default());
        let s: S = resolve("x", json!({"a": 2, "b": null, "c": [3]}), None).unwrap();
        assert_eq!(s, S { a: 2, b: None, c: vec![3] });
        let s: S = resolve("x", json!({"a": 2, "b": "f"}), Some(obj(json!({"a": 5, "command": "x"})))).unwrap();
        assert_eq!(s, S { a: 5, b: Some("f".into()), c: vec![9] });
    }

    #[test]
    fn rejects_unknown_keys_and_wrong_command() {
        let err = resolve::<S>("x", json!({}), Some(obj(json!({"zz": 1})))).unwrap_err();
        assert!(err.to_string().contains("zz"));
        assert!(resolve::<S>("x", json!({}), Some(obj(json!({"command": "y"})))).is_err());
        assert!(resolve::<S>("x", json!({"a": "text"}), None).is_err());
    }

    #[test]
    fn described_config_resolves_to_itself() {
        let s = S { a: 7, b: Some("q".into()), c: vec![] };
        let line = describe("x", &s).unwrap();
        let back: S = resolve("x", json!({"a": 3}), Some(obj(serde_json::from_str(&line).unwrap()))).unwrap();
        assert_eq!(back, s);
    }
}
