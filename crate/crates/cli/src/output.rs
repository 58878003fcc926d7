use std::path::{Path, PathBuf};

use crate::error::CliResult;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "MACROFORGE_OUT";

/// `--out` when given, else `$MACROFORGE_OUT/<command>`, else
/// `macroforge-out/<command>`.
pub fn resolve_out_dir(out: Option<PathBuf>, command: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("macroforge-out"))
            .join(command)
    })
}

pub fn write_file(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, contents)?;
    Ok(())
}

/// Runs `write` against an in-memory buffer and stores the result.
pub fn write_with<F>(dir: &Path, name: &str, write: F) -> CliResult<()>
where
    F: FnOnce(&mut Vec<u8>) -> CliResult<()>,
{
    let mut buf = Vec::new();
    write(&mut buf)?;
    write_file(dir, name, buf)
}
