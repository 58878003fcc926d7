//! Run manifests: everything needed to repeat a command exactly.

use std::collections::BTreeMap;
use std::path::Path;

use macroforge::env::MapSet;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub manifest_version: u32,
    /// Subcommand name: `generate`, `experiment`, `report` or `solve`.
    pub command: String,
    /// The fully resolved configuration the command ran with.
    pub config: serde_json::Value,
    /// Map file name to git blob hash of its contents.
    pub map_hashes: BTreeMap<String, String>,
    /// RFC 3339, UTC. Informational only.
    pub timestamp: String,
    pub toolkit_version: String,
    pub master_seed: Option<u64>,
}

/// The object id git assigns to a blob with these contents.
pub fn git_blob_hash(contents: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", contents.len()).as_bytes());
    h.update(contents);
    hex::encode(h.finalize())
}

fn hashes(maps: &MapSet) -> BTreeMap<String, String> {
    maps.sources
        .iter()
        .map(|(name, text)| (name.clone(), git_blob_hash(text.as_bytes())))
        .collect()
}

impl RunManifest {
    pub fn new<C: Serialize>(
        command: &str,
        config: &C,
        maps: Option<&MapSet>,
        master_seed: Option<u64>,
    ) -> CliResult<Self> {
        Ok(Self {
            manifest_version: MANIFEST_VERSION,
            command: command.to_string(),
            config: serde_json::to_value(config)?,
            map_hashes: maps.map(hashes).unwrap_or_default(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            toolkit_version: macroforge::VERSION.to_string(),
            master_seed,
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = crate::config::read_text(path)?;
        let m: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: malformed manifest: {e}", path.display())))?;
        if m.manifest_version != MANIFEST_VERSION {
            return Err(CliError::Config(format!(
                "{}: manifest version {} is not supported (expected {MANIFEST_VERSION})",
                path.display(),
                m.manifest_version
            )));
        }
        Ok(m)
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        crate::output::write_file(dir, MANIFEST_FILE, serde_json::to_string_pretty(self)? + "\n")
    }

    /// The stored config, provided the manifest was written by `command`.
    pub fn config_for<T: DeserializeOwned>(&self, command: &str) -> CliResult<T> {
        if self.command != command {
            return Err(CliError::Config(format!(
                "manifest was written by `{}`, not `{command}`",
                self.command
            )));
        }
        serde_json::from_value(self.config.clone())
            .map_err(|e| CliError::Config(format!("manifest config does not match `{command}`: {e}")))
    }

    /// Fails when a map changed since the manifest was written.
    pub fn verify_maps(&self, maps: &MapSet) -> CliResult<()> {
        let now = hashes(maps);
        for (name, recorded) in &self.map_hashes {
            match now.get(name) {
                Some(h) if h == recorded => {}
                Some(h) => {
                    return Err(CliError::Config(format!(
                        "map {name} changed since the manifest was written ({recorded} -> {h})"
                    )))
                }
                None => return Err(CliError::Config(format!("map {name} from the manifest is not loaded"))),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_hash_matches_git() {
        // `printf 'hello\n' | git hash-object --stdin`
        assert_eq!(git_blob_hash(b"hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
        // The empty blob.
        assert_eq!(git_blob_hash(b""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    }

    #[test]
    fn manifest_round_trips_and_checks_command() {
        let maps = MapSet::bundled();
        let m = RunManifest::new("solve", &serde_json::json!({"a": 1}), Some(&maps), Some(4)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        m.write(dir.path()).unwrap();
        let back = RunManifest::load(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, m);
        assert!(back.config_for::<serde_json::Value>("generate").is_err());
        back.verify_maps(&maps).unwrap();
        let mut tampered = back.clone();
        tampered.map_hashes.insert("dense_sparse.map".into(), "0".repeat(40));
        assert!(tampered.verify_maps(&maps).is_err());
    }
}
