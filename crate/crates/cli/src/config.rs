//! Option resolution (flag, then config file, then default) and run
//! manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use hsrocket::{sha256_hex, Error};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub struct Resolver {
    file: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> anyhow::Result<Self> {
        let file = match config {
            None => Map::new(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                match serde_json::from_str::<Value>(&text).map_err(Error::from)? {
                    Value::Object(map) => map,
                    _ => return Err(Error::Config("config file must hold a JSON object".into()).into()),
                }
            }
        };
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    /// Flag value if given, else the config file entry, else `default`.
    pub fn get<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>, default: T) -> anyhow::Result<T> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| Error::Config(format!("config key `{key}`: {e}")))?,
                None => default,
            },
        };
        self.record(key, &value);
        Ok(value)
    }

    /// Like [`Resolver::get`] for settings without a default.
    pub fn require<T: Serialize + DeserializeOwned>(&mut self, key: &str, flag: Option<T>) -> anyhow::Result<T> {
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| Error::Config(format!("config key `{key}`: {e}")))?,
                None => {
                    return Err(Error::Config(format!("missing required setting `{key}` (flag --{})", key.replace('_', "-"))).into())
                }
            },
        };
        self.record(key, &value);
        Ok(value)
    }

    pub fn record<T: Serialize>(&mut self, key: &str, value: &T) {
        self.resolved
            .insert(key.to_string(), serde_json::to_value(value).expect("setting serializes"));
    }

    pub fn into_manifest(self, command: &str) -> RunManifest {
        RunManifest {
            tool: "hsrocket".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: self.resolved,
            inputs: BTreeMap::new(),
        }
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: BTreeMap<String, Value>,
    /// Input path to SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn add_input(&mut self, path: &Path) -> anyhow::Result<()> {
        let bytes = std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn write(&self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// `<file>.manifest.json` next to a single-file output.
pub fn manifest_beside(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}
